#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polarnet/ingest.hpp"

namespace polarnet::synth {

/// Side index: 0 = pro, 1 = anti.
enum class Side : std::uint8_t { pro = 0, anti = 1 };

inline Label to_label(Side side) { return side == Side::pro ? Label::pro : Label::anti; }

struct ActivityDistribution {
  enum class Kind { fixed, lognormal };
  Kind kind = Kind::lognormal;
  std::size_t fixed_count = 10;
  double mu = 2.0;
  double sigma = 1.0;
  /// Upper bound applied to lognormal draws.
  std::size_t cap = 5000;

  static ActivityDistribution fixed(std::size_t n) {
    ActivityDistribution d;
    d.kind = Kind::fixed;
    d.fixed_count = n;
    return d;
  }
  static ActivityDistribution lognormal(double mu, double sigma, std::size_t cap = 5000) {
    return {Kind::lognormal, 0, mu, sigma, cap};
  }
};

struct SynthConfig {
  std::array<std::size_t, 2> users_per_side{5000, 5000};
  std::array<std::size_t, 2> pages_per_side{145, 98};
  /// Optional split of a side's pages into user-disjoint blocks. When
  /// non-empty the sizes must sum to that side's page count; each user of the
  /// side is assigned to one block (probability proportional to block size)
  /// and own-side actions target only that block.
  std::array<std::vector<std::size_t>, 2> block_sizes{};
  /// Probability that an action targets the other side.
  double p_out = 0.02;
  ActivityDistribution actions_per_user{};
  double comment_fraction = 0.1;
  std::size_t posts_per_page = 20;
  std::int64_t first_day = days_from_civil(2010, 1, 1);
  std::int64_t last_day = days_from_civil(2017, 5, 31);
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on an unusable configuration.
  void validate() const;
};

struct PlantedTruth {
  std::map<std::string, Side> page_side;
  std::map<std::string, Side> user_side;
  /// Block index within the side, for configurations with `block_sizes`.
  std::map<std::string, std::size_t> page_block;
};

struct SynthOutput {
  Dataset dataset;
  PlantedTruth truth;
  LabelMap labels;
};

/// Page ids are `pro_p0007` / `anti_p0003`, user ids `pro_u000042`, post ids
/// `<page>_x0012`. Post records use the page id as actor.
SynthOutput generate(const SynthConfig& config);

/// Writes `id,kind,side` rows (kind = page|user) for the planted truth.
void write_truth_csv(std::ostream& out, const PlantedTruth& truth);

}  // namespace polarnet::synth
