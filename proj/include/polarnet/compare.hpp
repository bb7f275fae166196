#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "polarnet/graph.hpp"

namespace polarnet::compare {

/// Plain (unadjusted) Rand index: the fraction of node pairs on which the two
/// partitions agree. Computed from the contingency table; partitions may list
/// their nodes in different orders but must cover the same node set.
/// Throws std::invalid_argument naming the symmetric difference otherwise,
/// and when fewer than two nodes are given.
double rand_index(const Partition& p, const Partition& q);

struct KappaResult {
  double kappa = 0.0;
  double observed = 0.0;  // p_o
  double expected = 0.0;  // p_e
  /// Set when p_e = 1 (both raters constant and equal); kappa is then 1.
  bool degenerate = false;
};

/// Cohen's kappa with product marginals. Both maps must have the same keys.
KappaResult cohen_kappa(const std::map<std::string, std::string>& rater1,
                        const std::map<std::string, std::string>& rater2);

/// Each node independently and uniformly assigned to one of `k` communities;
/// empty communities are dropped by relabelling ids in order of first use.
Partition random_partition(std::vector<std::string> nodes, std::size_t k, std::uint64_t seed);

}  // namespace polarnet::compare
