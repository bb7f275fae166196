#include "polarnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "polarnet/rng.hpp"

namespace polarnet::synth {

namespace {

constexpr const char* kSideName[2] = {"pro", "anti"};

std::string padded(const char* prefix, std::size_t index, int width) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, index);
  return buf;
}

int width_for(std::size_t count) {
  int w = 1;
  for (std::size_t n = count; n >= 10; n /= 10) ++w;
  return std::max(w, 4);
}

std::size_t draw_actions(const ActivityDistribution& dist, Rng& rng) {
  if (dist.kind == ActivityDistribution::Kind::fixed) return dist.fixed_count;
  double value = std::exp(dist.mu + dist.sigma * rng.normal());
  auto n = static_cast<std::size_t>(std::ceil(value));
  return std::clamp<std::size_t>(n, 1, dist.cap);
}

// Stream ids keep every entity's draws independent of generation order.
constexpr std::uint64_t kPageStream = 1ULL << 62;
constexpr std::uint64_t kUserStream = 2ULL << 62;

}  // namespace

void SynthConfig::validate() const {
  if (!(p_out >= 0.0 && p_out <= 1.0)) throw std::invalid_argument("p_out must lie in [0, 1]");
  if (!(comment_fraction >= 0.0 && comment_fraction <= 1.0)) {
    throw std::invalid_argument("comment_fraction must lie in [0, 1]");
  }
  if (first_day > last_day) throw std::invalid_argument("time range start is after its end");
  if (actions_per_user.kind == ActivityDistribution::Kind::lognormal &&
      !(actions_per_user.sigma >= 0.0 && std::isfinite(actions_per_user.mu))) {
    throw std::invalid_argument("lognormal activity needs finite mu and sigma >= 0");
  }
  for (int s = 0; s < 2; ++s) {
    const int other = 1 - s;
    if (users_per_side[s] > 0 && pages_per_side[s] == 0 && p_out < 1.0) {
      throw std::invalid_argument(std::string("side ") + kSideName[s] +
                                  " has users but no pages");
    }
    if (users_per_side[s] > 0 && pages_per_side[other] == 0 && p_out > 0.0) {
      throw std::invalid_argument(std::string("side ") + kSideName[s] +
                                  " has cross-side activity but side " + kSideName[other] +
                                  " has no pages");
    }
    if (!block_sizes[s].empty()) {
      std::size_t total = std::accumulate(block_sizes[s].begin(), block_sizes[s].end(),
                                          std::size_t{0});
      if (total != pages_per_side[s]) {
        throw std::invalid_argument(std::string("block sizes of side ") + kSideName[s] +
                                    " do not sum to its page count");
      }
      if (std::find(block_sizes[s].begin(), block_sizes[s].end(), 0) != block_sizes[s].end()) {
        throw std::invalid_argument("block sizes must be positive");
      }
    }
  }
  if (posts_per_page == 0 && (users_per_side[0] + users_per_side[1]) > 0) {
    throw std::invalid_argument("posts_per_page must be positive when users act on posts");
  }
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  SynthOutput out;
  std::vector<InteractionRecord> records;

  const Timestamp begin = config.first_day * kSecondsPerDay;
  const Timestamp end = (config.last_day + 1) * kSecondsPerDay;
  const auto span = static_cast<std::uint64_t>(end - begin);

  struct PageInfo {
    std::string id;
    std::vector<std::string> posts;
    std::vector<Timestamp> post_ts;
  };
  std::array<std::vector<PageInfo>, 2> pages;
  // Block b of side s covers pages [block_start[s][b], block_start[s][b+1]).
  std::array<std::vector<std::size_t>, 2> block_start;
  const int page_width = width_for(std::max(config.pages_per_side[0], config.pages_per_side[1]));
  const int post_width = width_for(config.posts_per_page);

  for (int s = 0; s < 2; ++s) {
    std::vector<std::size_t> sizes = config.block_sizes[s];
    if (sizes.empty()) sizes.push_back(config.pages_per_side[s]);
    block_start[s].push_back(0);
    for (std::size_t sz : sizes) block_start[s].push_back(block_start[s].back() + sz);

    std::size_t block = 0;
    for (std::size_t p = 0; p < config.pages_per_side[s]; ++p) {
      while (p >= block_start[s][block + 1]) ++block;
      PageInfo info;
      info.id = padded((std::string(kSideName[s]) + "_p").c_str(), p, page_width);
      Rng rng(config.seed, kPageStream | (static_cast<std::uint64_t>(s) << 40) | p);
      for (std::size_t k = 0; k < config.posts_per_page; ++k) {
        std::string post = info.id + padded("_x", k, post_width);
        Timestamp ts = begin + static_cast<Timestamp>(rng.below(span));
        records.push_back({info.id, info.id, post, Action::post, ts});
        info.posts.push_back(std::move(post));
        info.post_ts.push_back(ts);
      }
      out.truth.page_side[info.id] = static_cast<Side>(s);
      out.truth.page_block[info.id] = block;
      out.labels[info.id] = to_label(static_cast<Side>(s));
      pages[s].push_back(std::move(info));
    }
  }

  const int user_width = std::max(6, width_for(std::max(config.users_per_side[0],
                                                        config.users_per_side[1])));
  for (int s = 0; s < 2; ++s) {
    const int other = 1 - s;
    const std::size_t n_blocks = block_start[s].size() - 1;
    for (std::size_t u = 0; u < config.users_per_side[s]; ++u) {
      std::string user = padded((std::string(kSideName[s]) + "_u").c_str(), u, user_width);
      out.truth.user_side[user] = static_cast<Side>(s);
      Rng rng(config.seed, kUserStream | (static_cast<std::uint64_t>(s) << 40) | u);

      std::size_t block = 0;
      if (n_blocks > 1) {
        std::uint64_t pick = rng.below(config.pages_per_side[s]);
        while (pick >= block_start[s][block + 1]) ++block;
      }
      const std::size_t lo = block_start[s][block];
      const std::size_t own_count = block_start[s][block + 1] - lo;

      const std::size_t n_actions = draw_actions(config.actions_per_user, rng);
      for (std::size_t a = 0; a < n_actions; ++a) {
        const bool cross = rng.bernoulli(config.p_out);
        const PageInfo& page = cross ? pages[other][rng.below(pages[other].size())]
                                     : pages[s][lo + rng.below(own_count)];
        const Action action = rng.bernoulli(config.comment_fraction) ? Action::comment
                                                                     : Action::like;
        const std::size_t k = rng.below(page.posts.size());
        const Timestamp post_ts = page.post_ts[k];
        const Timestamp ts = post_ts + static_cast<Timestamp>(
                                           rng.below(static_cast<std::uint64_t>(end - post_ts)));
        records.push_back({user, page.id, page.posts[k], action, ts});
      }
    }
  }

  out.dataset = Dataset(std::move(records));
  return out;
}

void write_truth_csv(std::ostream& out, const PlantedTruth& truth) {
  out << "id,kind,side\n";
  for (const auto& [page, side] : truth.page_side) {
    out << page << ",page," << kSideName[static_cast<int>(side)] << '\n';
  }
  for (const auto& [user, side] : truth.user_side) {
    out << user << ",user," << kSideName[static_cast<int>(side)] << '\n';
  }
}

}  // namespace polarnet::synth
