#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polarnet/community.hpp"
#include "polarnet/ingest.hpp"
#include "polarnet/time.hpp"

namespace polarnet::temporal {

enum class Measure {
  active_pages_post,
  active_pages_like,
  active_pages_comment,
  active_users_like,
  active_users_comment,
};

inline constexpr Measure kAllMeasures[] = {Measure::active_pages_post, Measure::active_pages_like,
                                           Measure::active_pages_comment,
                                           Measure::active_users_like,
                                           Measure::active_users_comment};

std::string_view to_string(Measure measure);
Measure parse_measure(std::string_view text);

struct SeriesPoint {
  Quarter quarter;
  Label community = Label::pro;
  Measure measure = Measure::active_pages_post;
  std::size_t count = 0;
};

/// One point per (quarter, community, measure) for every quarter from the
/// first to the last record of the dataset; only pro/anti pages count.
std::vector<SeriesPoint> activity_series(const Dataset& dataset, const LabelMap& labels);

void write_series_csv(std::ostream& out, std::span<const SeriesPoint> series);

/// Detection method whose largest community size is reported. `components`
/// reports the largest connected component of the quarter's projection.
struct CohesionMethod {
  bool components = false;
  community::Algorithm algorithm = community::Algorithm::fastgreedy;

  std::string name() const;
};

struct CohesionPoint {
  Quarter quarter;
  Label community = Label::pro;
  CohesionMethod method;
  std::size_t largest = 0;
  std::size_t total = 0;
  /// Fewer than two active pages; `largest` is then set to `total`.
  bool degenerate = false;
};

struct CohesionOptions {
  Action action = Action::like;
  std::vector<CohesionMethod> methods;
  /// Window from the dataset's first quarter through each quarter instead of
  /// the quarter alone.
  bool cumulative = false;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Per quarter and community: project the bipartite graph of that window's
/// actions on the community's pages and report each method's largest
/// community next to the number of active pages.
std::vector<CohesionPoint> cohesion_series(const Dataset& dataset, const LabelMap& labels,
                                           const CohesionOptions& options);

void write_cohesion_csv(std::ostream& out, std::span<const CohesionPoint> points);

enum class Sentiment { pro, anti };
enum class Epoch { before, after };

struct Observation {
  Sentiment sentiment;
  Epoch epoch;
  double value;
};

struct MultiObservation {
  Sentiment sentiment;
  Epoch epoch;
  std::vector<double> values;
};

struct AnovaResult {
  double F = 0.0;
  std::size_t df1 = 0;
  std::size_t df2 = 0;
  double p = 1.0;
  double partial_eta2 = 0.0;
  /// No variation to test (e.g. all observations equal); F = 0 and p = 1.
  bool degenerate = false;
};

struct TwoWayAnova {
  AnovaResult sentiment;
  AnovaResult epoch;
  AnovaResult interaction;
  double ss_sentiment = 0.0;
  double ss_epoch = 0.0;
  double ss_interaction = 0.0;
  double ss_error = 0.0;
  double ss_total = 0.0;
};

/// Fixed-effects 2x2 ANOVA with Type II sums of squares. Throws
/// std::invalid_argument naming a cell with fewer than two observations.
TwoWayAnova two_way_anova(std::span<const Observation> observations);

/// Pillai's trace test of the sentiment x epoch interaction for one or more
/// dependent variables; for this single-df hypothesis df1 = p and
/// df2 = N - 4 - p + 1, and partial eta^2 is V itself. Throws
/// std::domain_error when the error SSCP matrix is singular.
struct PillaiResult {
  double trace = 0.0;
  AnovaResult test;
};
PillaiResult manova_pillai(std::span<const MultiObservation> observations);

/// Upper-tail probability of the F(df1, df2) distribution at `F`.
double f_tail(double F, double df1, double df2);

/// Per-quarter observations for a measure split at `split` (quarters up to
/// and including `split` are `before`).
std::vector<MultiObservation> observations_from_series(std::span<const SeriesPoint> series,
                                                       std::span<const Measure> measures,
                                                       Quarter split);

}  // namespace polarnet::temporal
