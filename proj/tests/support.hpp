#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "polarnet/graph.hpp"
#include "polarnet/ingest.hpp"
#include "polarnet/rng.hpp"

namespace testing {

using namespace polarnet;

inline InteractionRecord rec(std::string user, std::string page, std::string post, Action action,
                             std::string_view ts) {
  return {std::move(user), std::move(page), std::move(post), action, parse_timestamp(ts)};
}

inline InteractionRecord like(std::string user, std::string page, std::string_view ts,
                              std::string post = "x") {
  return rec(std::move(user), std::move(page), std::move(post), Action::like, ts);
}

inline InteractionRecord comment(std::string user, std::string page, std::string_view ts,
                                 std::string post = "x") {
  return rec(std::move(user), std::move(page), std::move(post), Action::comment, ts);
}

inline InteractionRecord post(std::string page, std::string post_id, std::string_view ts) {
  return rec(page, page, std::move(post_id), Action::post, ts);
}

inline std::string node_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "n%03zu", i);
  return buf;
}

inline std::vector<std::string> node_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(node_name(i));
  return out;
}

inline ProjectionGraph make_graph(std::size_t n, const std::vector<WeightedEdge>& edges) {
  return ProjectionGraph(node_names(n), edges);
}

/// Two disjoint unit-weight triangles {0,1,2}, {3,4,5}.
inline ProjectionGraph two_triangles(std::int64_t w = 1) {
  return make_graph(6, {{0, 1, w}, {0, 2, w}, {1, 2, w}, {3, 4, w}, {3, 5, w}, {4, 5, w}});
}

inline ProjectionGraph scaled(const ProjectionGraph& g, std::int64_t k) {
  std::vector<WeightedEdge> edges = g.edges();
  for (auto& e : edges) e.weight *= k;
  return ProjectionGraph(g.nodes(), edges);
}

/// Random weighted graph; each pair present with probability p, weights in [1, max_w].
inline ProjectionGraph random_graph(std::size_t n, double p, std::int64_t max_w, Rng& rng) {
  std::vector<WeightedEdge> edges;
  for (NodeIndex a = 0; a < n; ++a) {
    for (NodeIndex b = a + 1; b < n; ++b) {
      if (rng.bernoulli(p)) {
        edges.push_back({a, b, 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_w)))});
      }
    }
  }
  return make_graph(n, edges);
}

/// Two planted blocks of n/2 nodes; returns the graph and block of each node.
inline std::pair<ProjectionGraph, std::vector<int>> planted_graph(std::size_t n, double p_in,
                                                                  double p_out, std::uint64_t seed) {
  Rng rng(seed, 99);
  std::vector<int> block(n);
  for (std::size_t i = 0; i < n; ++i) block[i] = i < n / 2 ? 0 : 1;
  std::vector<WeightedEdge> edges;
  for (NodeIndex a = 0; a < n; ++a) {
    for (NodeIndex b = a + 1; b < n; ++b) {
      if (rng.bernoulli(block[a] == block[b] ? p_in : p_out)) edges.push_back({a, b, 1});
    }
  }
  return {make_graph(n, edges), block};
}

inline bool connected(const ProjectionGraph& g) {
  if (g.node_count() == 0) return true;
  std::vector<bool> seen(g.node_count(), false);
  std::vector<NodeIndex> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    NodeIndex v = stack.back();
    stack.pop_back();
    for (const auto& nb : g.neighbors(v)) {
      if (!seen[nb.node]) {
        seen[nb.node] = true;
        ++count;
        stack.push_back(nb.node);
      }
    }
  }
  return count == g.node_count();
}

/// Q straight from the double-sum definition over all ordered node pairs.
inline double modularity_by_definition(const ProjectionGraph& g, const std::vector<CommunityId>& c) {
  const std::size_t n = g.node_count();
  const double two_m = 2.0 * static_cast<double>(g.total_weight());
  std::vector<double> s(n, 0.0);
  for (const auto& e : g.edges()) {
    s[e.a] += static_cast<double>(e.weight);
    s[e.b] += static_cast<double>(e.weight);
  }
  double q = 0.0;
  for (NodeIndex i = 0; i < n; ++i) {
    for (NodeIndex j = 0; j < n; ++j) {
      if (c[i] != c[j]) continue;
      q += static_cast<double>(g.weight(i, j)) - s[i] * s[j] / two_m;
    }
  }
  return q / two_m;
}

/// Calls fn on every set partition of n elements as restricted growth strings.
inline void for_each_set_partition(std::size_t n,
                                   const std::function<void(const std::vector<CommunityId>&)>& fn) {
  std::vector<CommunityId> a(n, 0);
  if (n == 0) return;
  a[0] = 0;
  if (n == 1) {
    fn(a);
    return;
  }
  std::function<void(std::size_t, CommunityId)> go = [&](std::size_t i, CommunityId max_used) {
    if (i == n) {
      fn(a);
      return;
    }
    for (CommunityId c = 0; c <= max_used + 1; ++c) {
      a[i] = c;
      go(i + 1, std::max<CommunityId>(max_used, c));
    }
  };
  go(1, 0);
}

inline double brute_force_max_modularity(const ProjectionGraph& g) {
  double best = -1.0;
  for_each_set_partition(g.node_count(), [&](const std::vector<CommunityId>& c) {
    best = std::max(best, modularity_by_definition(g, c));
  });
  return best;
}

/// Rand index by enumerating every node pair, with q looked up by node id.
inline double rand_by_pairs(const Partition& p, const Partition& q) {
  std::map<std::string, CommunityId> q_of;
  for (NodeIndex i = 0; i < q.size(); ++i) q_of[q.nodes()[i]] = q.community_of(i);
  std::uint64_t agree = 0, total = 0;
  for (NodeIndex i = 0; i < p.size(); ++i) {
    for (NodeIndex j = i + 1; j < p.size(); ++j) {
      const bool together_p = p.community_of(i) == p.community_of(j);
      const bool together_q = q_of.at(p.nodes()[i]) == q_of.at(p.nodes()[j]);
      agree += together_p == together_q;
      ++total;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

inline Partition partition_of(const std::vector<int>& blocks) {
  return Partition::from_labels(node_names(blocks.size()), blocks);
}

}  // namespace testing
