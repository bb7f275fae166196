#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polarnet/ingest.hpp"
#include "polarnet/time.hpp"

namespace polarnet {

using NodeIndex = std::uint32_t;
using CommunityId = std::uint32_t;

/// User-page incidence for one action kind. Page and user ids are densely
/// re-indexed in sorted id order; incidence lists are sorted and duplicate-free.
class BipartiteGraph {
 public:
  BipartiteGraph(std::vector<std::string> pages, std::vector<std::string> users,
                 std::vector<std::vector<NodeIndex>> page_users, Action action,
                 std::optional<TimeWindow> window);

  const std::vector<std::string>& pages() const { return pages_; }
  const std::vector<std::string>& users() const { return users_; }
  std::span<const NodeIndex> users_of(NodeIndex page) const { return page_users_[page]; }
  std::span<const NodeIndex> pages_of(NodeIndex user) const { return user_pages_[user]; }
  std::size_t edge_count() const { return edge_count_; }
  Action action() const { return action_; }
  const std::optional<TimeWindow>& window() const { return window_; }

  std::optional<NodeIndex> page_index(std::string_view page) const;
  /// Pages with at least one incident user, in index order.
  std::vector<std::string> active_pages() const;

 private:
  std::vector<std::string> pages_;
  std::vector<std::string> users_;
  std::vector<std::vector<NodeIndex>> page_users_;
  std::vector<std::vector<NodeIndex>> user_pages_;
  std::size_t edge_count_ = 0;
  Action action_;
  std::optional<TimeWindow> window_;
};

/// Edge (u, p) exists iff user u performed at least one `action` on page p
/// inside `window` (the whole dataset when absent). Every dataset page is a
/// node even when it has no edges of this kind.
BipartiteGraph build_bipartite(const Dataset& dataset, Action action,
                               std::optional<TimeWindow> window = std::nullopt);

struct WeightedEdge {
  NodeIndex a;
  NodeIndex b;
  std::int64_t weight;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

struct Neighbor {
  NodeIndex node;
  std::int64_t weight;
};

/// Weighted undirected page graph. Each unordered pair is stored once with
/// a < b; there are no self-loops and no zero-weight edges.
class ProjectionGraph {
 public:
  ProjectionGraph() = default;
  /// Validates and canonicalises: edges are sorted by (a, b) and oriented a < b.
  /// Throws on self-loops, non-positive weights, duplicate pairs or bad indices.
  ProjectionGraph(std::vector<std::string> nodes, std::vector<WeightedEdge> edges);

  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  std::span<const Neighbor> neighbors(NodeIndex node) const {
    return {adjacency_.data() + offsets_[node], adjacency_.data() + offsets_[node + 1]};
  }
  /// Sum of incident edge weights.
  std::int64_t strength(NodeIndex node) const { return strength_[node]; }
  /// m: sum of all edge weights (each edge once).
  std::int64_t total_weight() const { return total_weight_; }
  /// Weight of the (a, b) edge, 0 when absent.
  std::int64_t weight(NodeIndex a, NodeIndex b) const;
  std::optional<NodeIndex> index_of(std::string_view node) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<WeightedEdge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
  std::vector<std::int64_t> strength_;
  std::int64_t total_weight_ = 0;
  std::unordered_map<std::string, NodeIndex> index_;
};

/// weight(a, b) = number of users incident to both pages. Runs in
/// O(sum over users of degree^2).
ProjectionGraph project(const BipartiteGraph& bipartite);

/// Keeps the listed nodes (in the order given) and every edge between them.
/// Throws std::invalid_argument naming a node that is not in `graph`.
ProjectionGraph induced_subgraph(const ProjectionGraph& graph, std::span<const std::string> keep);

/// Total assignment of nodes to contiguous community ids 0..count-1.
class Partition {
 public:
  Partition() = default;
  /// `membership` must use exactly the ids 0..k-1 for some k.
  Partition(std::vector<std::string> nodes, std::vector<CommunityId> membership);

  /// Relabels arbitrary labels to contiguous ids by first appearance.
  template <typename Label>
  static Partition from_labels(std::vector<std::string> nodes, const std::vector<Label>& labels);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<CommunityId>& membership() const { return membership_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t community_count() const { return community_count_; }
  CommunityId community_of(NodeIndex node) const { return membership_[node]; }
  std::vector<std::size_t> community_sizes() const;
  std::vector<std::vector<NodeIndex>> members() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<std::string> nodes_;
  std::vector<CommunityId> membership_;
  std::size_t community_count_ = 0;
};

template <typename Label>
Partition Partition::from_labels(std::vector<std::string> nodes, const std::vector<Label>& labels) {
  std::vector<CommunityId> membership(labels.size());
  std::unordered_map<Label, CommunityId> ids;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.emplace(labels[i], static_cast<CommunityId>(ids.size()));
    membership[i] = it->second;
  }
  return Partition(std::move(nodes), std::move(membership));
}

/// Components of the positive-weight edge relation. Ids are assigned in
/// decreasing component size, ties broken by the smallest contained node id.
Partition connected_components(const ProjectionGraph& graph);

/// `page_a,page_b,weight` rows sorted lexicographically by (page_a, page_b)
/// with page_a < page_b.
void write_projection_csv(std::ostream& out, const ProjectionGraph& graph);
/// Nodes are the ids appearing in edges plus `extra_nodes`; sorted.
ProjectionGraph read_projection_csv(std::istream& in,
                                    std::span<const std::string> extra_nodes = {});

void write_partition_csv(std::ostream& out, const Partition& partition);
Partition read_partition_csv(std::istream& in);

}  // namespace polarnet
