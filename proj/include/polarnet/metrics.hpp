#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "polarnet/graph.hpp"
#include "polarnet/ingest.hpp"
#include "polarnet/time.hpp"

namespace polarnet::metrics {

/// Side of a page for polarization: 0 = C1, 1 = C2.
using SideMap = std::map<std::string, int, std::less<>>;

/// pro -> C1, anti -> C2; unlabeled pages are left out.
SideMap sides_from_labels(const LabelMap& labels);

/// Largest community -> C1, second largest -> C2 (ties by lower id); pages in
/// smaller communities are left out. Needs at least two communities.
SideMap sides_from_partition(const Partition& partition);

struct PolarizationProfile {
  std::string user;
  std::size_t x = 0;  // actions on C1 pages
  std::size_t y = 0;  // actions on C2 pages
  double rho = 0.0;   // (x - y) / (x + y)
};

PolarizationProfile make_profile(std::string user, std::size_t x, std::size_t y);

/// One profile per user with x + y >= min_actions, sorted by user id. x and y
/// count records of kind `action` (not distinct pages); pages absent from
/// `sides` are ignored. Throws std::invalid_argument on an empty side map.
std::vector<PolarizationProfile> user_polarization(const Dataset& dataset, Action action,
                                                   const SideMap& sides,
                                                   std::size_t min_actions = 10);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges over [-1, 1]
  std::vector<std::size_t> counts;
  std::vector<double> density;
  std::size_t total = 0;

  double bin_width() const { return edges.size() > 1 ? edges[1] - edges[0] : 0.0; }
};

/// Equal-width bins over [-1, 1]; rho = -1 lands in the first bin, rho = 1 in
/// the last. Throws on bins < 2 or an empty profile list.
Histogram polarization_histogram(std::span<const PolarizationProfile> profiles,
                                 std::size_t bins = 21);

void write_histogram_csv(std::ostream& out, const Histogram& histogram);

struct UserEngagement {
  std::string user;
  Label community = Label::unlabeled;
  Timestamp lifetime = 0;     // latest minus earliest action timestamp
  std::size_t activity = 0;   // number of actions
  double lifetime_std = 0.0;  // min-max scaled within the community
  double activity_std = 0.0;
};

struct EngagementResult {
  std::vector<UserEngagement> users;  // sorted by user id
  /// Communities whose lifetime or activity range is degenerate (max = min);
  /// their standardized values are 0.
  std::vector<Label> degenerate;
  /// Users whose actions split evenly between pro and anti pages.
  std::size_t ties_excluded = 0;
};

/// Users are assigned to the side holding the majority of their actions of
/// kind `action` on labeled pages.
EngagementResult user_engagement(const Dataset& dataset, const LabelMap& labels,
                                 Action action = Action::like);

/// Maximum over calendar windows of the number of distinct pages the user
/// acted on within one window. Throws when the user has no such actions.
std::size_t pages_per_window(const Dataset& dataset, std::string_view user, CalendarWindow window,
                             Action action = Action::like);

struct LoessPoint {
  double x = 0.0;
  double fit = 0.0;
  double lower = 0.0;  // fit - 1.96 SE
  double upper = 0.0;  // fit + 1.96 SE
  /// The local design was degenerate and a local constant was fitted.
  bool local_constant = false;
};

struct LoessResult {
  std::vector<LoessPoint> points;
  /// Pooled residual standard deviation, RSS / trace((I-L)'(I-L)).
  double residual_sd = 0.0;
};

/// Local linear regression with tricube weights over the floor(span * n)
/// nearest neighbours (span > 1 widens the bandwidth proportionally).
LoessResult loess_fit(std::span<const double> x, std::span<const double> y, double span,
                      std::span<const double> eval_points);

struct PageStats {
  std::size_t users = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single user
};

/// Distinct pages per user within the user's majority community.
std::map<Label, PageStats> community_page_stats(const Dataset& dataset, const LabelMap& labels,
                                                Action action = Action::like);

enum class Covariate { lifetime, activity };

struct ExposureRow {
  Label community;
  Covariate covariate;
  LoessPoint point;
};

struct ExposureOptions {
  CalendarWindow window = CalendarWindow::month;
  double span = 0.75;
  std::size_t eval_points = 51;  // evenly spaced over [0, 1]
  bool standardize_pages = false;
  Action action = Action::like;
};

/// Smoothed maximum pages-per-window against standardized lifetime and
/// activity for each community.
std::vector<ExposureRow> exposure_curves(const Dataset& dataset, const LabelMap& labels,
                                         const ExposureOptions& options);

/// CSV `community,covariate,x,fit,lo95,hi95`.
void write_exposure_csv(std::ostream& out, std::span<const ExposureRow> rows);

}  // namespace polarnet::metrics
