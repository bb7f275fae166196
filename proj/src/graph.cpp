#include "polarnet/graph.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "polarnet/csv.hpp"

namespace polarnet {

BipartiteGraph::BipartiteGraph(std::vector<std::string> pages, std::vector<std::string> users,
                               std::vector<std::vector<NodeIndex>> page_users, Action action,
                               std::optional<TimeWindow> window)
    : pages_(std::move(pages)),
      users_(std::move(users)),
      page_users_(std::move(page_users)),
      user_pages_(users_.size()),
      action_(action),
      window_(window) {
  if (page_users_.size() != pages_.size()) {
    throw std::invalid_argument("incidence list count does not match page count");
  }
  for (NodeIndex p = 0; p < page_users_.size(); ++p) {
    auto& list = page_users_[p];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (NodeIndex u : list) {
      if (u >= users_.size()) throw std::invalid_argument("user index out of range");
      user_pages_[u].push_back(p);
    }
    edge_count_ += list.size();
  }
}

std::optional<NodeIndex> BipartiteGraph::page_index(std::string_view page) const {
  auto it = std::lower_bound(pages_.begin(), pages_.end(), page);
  if (it == pages_.end() || *it != page) return std::nullopt;
  return static_cast<NodeIndex>(it - pages_.begin());
}

std::vector<std::string> BipartiteGraph::active_pages() const {
  std::vector<std::string> out;
  for (NodeIndex p = 0; p < pages_.size(); ++p) {
    if (!page_users_[p].empty()) out.push_back(pages_[p]);
  }
  return out;
}

BipartiteGraph build_bipartite(const Dataset& dataset, Action action,
                               std::optional<TimeWindow> window) {
  const auto& pages = dataset.pages();
  std::unordered_map<std::string_view, NodeIndex> page_idx;
  for (NodeIndex i = 0; i < pages.size(); ++i) page_idx.emplace(pages[i], i);

  // Users are the actors with at least one qualifying record.
  std::set<std::string_view> user_set;
  for (const auto& r : dataset.records()) {
    if (r.action == action && (!window || window->contains(r.ts))) user_set.insert(r.user);
  }
  std::vector<std::string> users(user_set.begin(), user_set.end());
  std::unordered_map<std::string_view, NodeIndex> user_idx;
  for (NodeIndex i = 0; i < users.size(); ++i) user_idx.emplace(users[i], i);

  std::vector<std::vector<NodeIndex>> page_users(pages.size());
  for (const auto& r : dataset.records()) {
    if (r.action != action || (window && !window->contains(r.ts))) continue;
    page_users[page_idx.at(r.page)].push_back(user_idx.at(r.user));
  }
  return BipartiteGraph(pages, std::move(users), std::move(page_users), action, window);
}

ProjectionGraph::ProjectionGraph(std::vector<std::string> nodes, std::vector<WeightedEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), strength_(nodes_.size(), 0) {
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i], i).second) {
      throw std::invalid_argument("duplicate node id '" + nodes_[i] + "'");
    }
  }
  for (auto& e : edges_) {
    if (e.a >= nodes_.size() || e.b >= nodes_.size()) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (e.a == e.b) throw std::invalid_argument("self-loop on node '" + nodes_[e.a] + "'");
    if (e.weight <= 0) throw std::invalid_argument("edge weight must be positive");
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const auto& x, const auto& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].a == edges_[i - 1].a && edges_[i].b == edges_[i - 1].b) {
      throw std::invalid_argument("duplicate edge between '" + nodes_[edges_[i].a] + "' and '" +
                                  nodes_[edges_[i].b] + "'");
    }
  }

  std::vector<std::size_t> degree(nodes_.size(), 0);
  for (const auto& e : edges_) {
    ++degree[e.a];
    ++degree[e.b];
    strength_[e.a] += e.weight;
    strength_[e.b] += e.weight;
    total_weight_ += e.weight;
  }
  offsets_.assign(nodes_.size() + 1, 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) offsets_[i + 1] = offsets_[i] + degree[i];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) adjacency_[cursor[e.b]++] = {e.a, e.weight};
  for (const auto& e : edges_) adjacency_[cursor[e.a]++] = {e.b, e.weight};
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]),
              [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
  }
}

std::int64_t ProjectionGraph::weight(NodeIndex a, NodeIndex b) const {
  auto list = neighbors(a);
  auto it = std::lower_bound(list.begin(), list.end(), b,
                             [](const Neighbor& n, NodeIndex v) { return n.node < v; });
  return it != list.end() && it->node == b ? it->weight : 0;
}

std::optional<NodeIndex> ProjectionGraph::index_of(std::string_view node) const {
  auto it = index_.find(std::string(node));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ProjectionGraph project(const BipartiteGraph& bipartite) {
  const std::size_t n = bipartite.pages().size();
  std::vector<WeightedEdge> edges;
  std::vector<std::int64_t> counts(n, 0);
  std::vector<NodeIndex> touched;
  for (NodeIndex a = 0; a < n; ++a) {
    for (NodeIndex u : bipartite.users_of(a)) {
      for (NodeIndex b : bipartite.pages_of(u)) {
        if (b <= a) continue;
        if (counts[b]++ == 0) touched.push_back(b);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (NodeIndex b : touched) {
      edges.push_back({a, b, counts[b]});
      counts[b] = 0;
    }
    touched.clear();
  }
  return ProjectionGraph(bipartite.pages(), std::move(edges));
}

ProjectionGraph induced_subgraph(const ProjectionGraph& graph, std::span<const std::string> keep) {
  std::vector<NodeIndex> old_to_new(graph.node_count(), static_cast<NodeIndex>(-1));
  std::vector<std::string> nodes;
  nodes.reserve(keep.size());
  for (const auto& id : keep) {
    auto idx = graph.index_of(id);
    if (!idx) throw std::invalid_argument("node '" + id + "' is not in the graph");
    if (old_to_new[*idx] != static_cast<NodeIndex>(-1)) {
      throw std::invalid_argument("node '" + id + "' listed twice");
    }
    old_to_new[*idx] = static_cast<NodeIndex>(nodes.size());
    nodes.push_back(id);
  }
  std::vector<WeightedEdge> edges;
  for (const auto& e : graph.edges()) {
    NodeIndex a = old_to_new[e.a];
    NodeIndex b = old_to_new[e.b];
    if (a != static_cast<NodeIndex>(-1) && b != static_cast<NodeIndex>(-1)) {
      edges.push_back({a, b, e.weight});
    }
  }
  return ProjectionGraph(std::move(nodes), std::move(edges));
}

Partition::Partition(std::vector<std::string> nodes, std::vector<CommunityId> membership)
    : nodes_(std::move(nodes)), membership_(std::move(membership)) {
  if (nodes_.size() != membership_.size()) {
    throw std::invalid_argument("partition needs one community id per node");
  }
  CommunityId max_id = 0;
  for (CommunityId c : membership_) max_id = std::max(max_id, c);
  community_count_ = membership_.empty() ? 0 : static_cast<std::size_t>(max_id) + 1;
  std::vector<bool> used(community_count_, false);
  for (CommunityId c : membership_) used[c] = true;
  if (std::find(used.begin(), used.end(), false) != used.end()) {
    throw std::invalid_argument("community ids are not contiguous from 0");
  }
}

std::vector<std::size_t> Partition::community_sizes() const {
  std::vector<std::size_t> sizes(community_count_, 0);
  for (CommunityId c : membership_) ++sizes[c];
  return sizes;
}

std::vector<std::vector<NodeIndex>> Partition::members() const {
  std::vector<std::vector<NodeIndex>> out(community_count_);
  for (NodeIndex i = 0; i < membership_.size(); ++i) out[membership_[i]].push_back(i);
  return out;
}

Partition connected_components(const ProjectionGraph& graph) {
  const std::size_t n = graph.node_count();
  std::vector<NodeIndex> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](NodeIndex x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : graph.edges()) {
    NodeIndex ra = find(e.a);
    NodeIndex rb = find(e.b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }

  struct Component {
    std::size_t size = 0;
    const std::string* min_id = nullptr;
  };
  std::map<NodeIndex, Component> components;
  for (NodeIndex i = 0; i < n; ++i) {
    Component& c = components[find(i)];
    ++c.size;
    if (!c.min_id || graph.nodes()[i] < *c.min_id) c.min_id = &graph.nodes()[i];
  }
  std::vector<std::pair<NodeIndex, Component>> order(components.begin(), components.end());
  std::sort(order.begin(), order.end(), [](const auto& x, const auto& y) {
    if (x.second.size != y.second.size) return x.second.size > y.second.size;
    return *x.second.min_id < *y.second.min_id;
  });
  std::unordered_map<NodeIndex, CommunityId> id_of_root;
  for (CommunityId c = 0; c < order.size(); ++c) id_of_root[order[c].first] = c;

  std::vector<CommunityId> membership(n);
  for (NodeIndex i = 0; i < n; ++i) membership[i] = id_of_root.at(find(i));
  return Partition(graph.nodes(), std::move(membership));
}

void write_projection_csv(std::ostream& out, const ProjectionGraph& graph) {
  struct Row {
    const std::string* a;
    const std::string* b;
    std::int64_t w;
  };
  std::vector<Row> rows;
  rows.reserve(graph.edges().size());
  for (const auto& e : graph.edges()) {
    const std::string* a = &graph.nodes()[e.a];
    const std::string* b = &graph.nodes()[e.b];
    if (*b < *a) std::swap(a, b);
    rows.push_back({a, b, e.weight});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    return std::tie(*x.a, *x.b) < std::tie(*y.a, *y.b);
  });
  out << "page_a,page_b,weight\n";
  for (const auto& r : rows) out << csv::escape(*r.a) << ',' << csv::escape(*r.b) << ',' << r.w << '\n';
}

namespace {

std::int64_t parse_int(const std::string& text) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("expected integer, got '" + text + "'");
  }
  return value;
}

}  // namespace

ProjectionGraph read_projection_csv(std::istream& in, std::span<const std::string> extra_nodes) {
  auto rows = csv::read_rows(in, "page_a,page_b,weight");
  std::set<std::string> ids(extra_nodes.begin(), extra_nodes.end());
  for (const auto& row : rows) {
    if (row.size() != 3) throw std::invalid_argument("projection rows need 3 fields");
    ids.insert(row[0]);
    ids.insert(row[1]);
  }
  std::vector<std::string> nodes(ids.begin(), ids.end());
  auto index = [&](const std::string& id) {
    return static_cast<NodeIndex>(std::lower_bound(nodes.begin(), nodes.end(), id) - nodes.begin());
  };
  std::vector<WeightedEdge> edges;
  for (const auto& row : rows) edges.push_back({index(row[0]), index(row[1]), parse_int(row[2])});
  return ProjectionGraph(std::move(nodes), std::move(edges));
}

void write_partition_csv(std::ostream& out, const Partition& partition) {
  out << "page_id,community\n";
  for (NodeIndex i = 0; i < partition.size(); ++i) {
    out << csv::escape(partition.nodes()[i]) << ',' << partition.community_of(i) << '\n';
  }
}

Partition read_partition_csv(std::istream& in) {
  auto rows = csv::read_rows(in, "page_id,community");
  std::vector<std::string> nodes;
  std::vector<std::int64_t> labels;
  for (const auto& row : rows) {
    if (row.size() != 2) throw std::invalid_argument("partition rows need 2 fields");
    nodes.push_back(row[0]);
    labels.push_back(parse_int(row[1]));
  }
  // Keep the file's ids when they are already contiguous from 0.
  std::vector<bool> used(labels.size(), false);
  bool contiguous = true;
  for (auto l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= labels.size()) {
      contiguous = false;
      break;
    }
    used[static_cast<std::size_t>(l)] = true;
  }
  if (contiguous) {
    const auto k = static_cast<std::size_t>(std::find(used.begin(), used.end(), false) - used.begin());
    contiguous = std::none_of(used.begin() + static_cast<std::ptrdiff_t>(k), used.end(),
                              [](bool b) { return b; });
  }
  if (contiguous) {
    return Partition(std::move(nodes), std::vector<CommunityId>(labels.begin(), labels.end()));
  }
  return Partition::from_labels(std::move(nodes), labels);
}

}  // namespace polarnet
