#include "polarnet/community.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include "polarnet/csv.hpp"
#include "polarnet/rng.hpp"

namespace polarnet::community {

namespace {

using Wide = __int128;

void check_partition(const ProjectionGraph& graph, const Partition& partition) {
  if (partition.size() != graph.node_count()) {
    throw std::invalid_argument("partition does not cover the graph's nodes");
  }
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    if (partition.nodes()[i] != graph.nodes()[i]) {
      throw std::invalid_argument("partition node '" + partition.nodes()[i] +
                                  "' does not match graph node '" + graph.nodes()[i] + "'");
    }
  }
}

void require_weight(const ProjectionGraph& graph) {
  if (graph.node_count() == 0) throw std::domain_error("graph has no nodes");
  if (graph.total_weight() <= 0) throw std::domain_error("graph has zero total edge weight");
}

/// Modularity scaled by 4m^2, which is an integer for integer weights:
///   4m^2 Q = sum_c (4m e_c - s_c^2).
double scaled_to_q(Wide scaled, std::int64_t m) {
  long double denom = 4.0L * static_cast<long double>(m) * static_cast<long double>(m);
  return static_cast<double>(static_cast<long double>(scaled) / denom);
}

Partition singletons(const ProjectionGraph& graph) {
  std::vector<CommunityId> membership(graph.node_count());
  std::iota(membership.begin(), membership.end(), 0);
  return Partition(graph.nodes(), std::move(membership));
}

/// Replays the first `steps` merges and labels nodes by first appearance.
Partition cut_dendrogram(const ProjectionGraph& graph, const Dendrogram& dendrogram,
                         std::size_t steps) {
  const std::size_t n = dendrogram.leaf_count;
  std::vector<std::size_t> parent(n + steps);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t k = 0; k < steps; ++k) {
    parent[dendrogram.merges[k].a] = n + k;
    parent[dendrogram.merges[k].b] = n + k;
  }
  std::vector<std::size_t> root(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t x = i;
    while (parent[x] != x) x = parent[x];
    root[i] = x;
  }
  return Partition::from_labels(graph.nodes(), root);
}

std::size_t best_cut(const std::vector<Wide>& scaled_after_merge, Wide initial) {
  std::size_t best = 0;
  Wide best_value = initial;
  for (std::size_t k = 0; k < scaled_after_merge.size(); ++k) {
    if (scaled_after_merge[k] >= best_value) {
      best_value = scaled_after_merge[k];
      best = k + 1;
    }
  }
  return best;
}

}  // namespace

double modularity(const ProjectionGraph& graph, const Partition& partition) {
  check_partition(graph, partition);
  require_weight(graph);
  const std::size_t k = partition.community_count();
  std::vector<std::int64_t> internal(k, 0);
  std::vector<std::int64_t> strength(k, 0);
  for (const auto& e : graph.edges()) {
    if (partition.community_of(e.a) == partition.community_of(e.b)) {
      internal[partition.community_of(e.a)] += e.weight;
    }
  }
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    strength[partition.community_of(i)] += graph.strength(i);
  }
  const double m = static_cast<double>(graph.total_weight());
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double share = static_cast<double>(strength[c]) / (2.0 * m);
    q += static_cast<double>(internal[c]) / m - share * share;
  }
  return q;
}

// ---------------------------------------------------------------------------
// FastGreedy

HierarchicalResult fastgreedy(const ProjectionGraph& graph) {
  require_weight(graph);
  const std::size_t n = graph.node_count();
  const std::int64_t m = graph.total_weight();

  struct Community {
    bool alive = true;
    NodeIndex key = 0;  // smallest member node
    std::int64_t strength = 0;
    std::map<std::size_t, std::int64_t> links;  // neighbor community -> weight
  };
  std::vector<Community> comms(n);
  comms.reserve(2 * n);
  Wide scaled = 0;
  for (NodeIndex i = 0; i < n; ++i) {
    comms[i].key = i;
    comms[i].strength = graph.strength(i);
    for (const auto& nb : graph.neighbors(i)) comms[i].links[nb.node] = nb.weight;
    scaled -= static_cast<Wide>(comms[i].strength) * comms[i].strength;
  }

  Dendrogram dendrogram;
  dendrogram.leaf_count = n;
  dendrogram.initial_score = scaled_to_q(scaled, m);
  const Wide initial = scaled;
  std::vector<Wide> scaled_after;

  while (true) {
    // Gain scaled by 2m^2: D = 2m w_ij - s_i s_j.
    bool found = false;
    Wide best_gain = 0;
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < comms.size(); ++i) {
      const Community& ci = comms[i];
      if (!ci.alive) continue;
      for (const auto& [j, w] : ci.links) {
        const Community& cj = comms[j];
        if (ci.key > cj.key) continue;
        Wide gain = static_cast<Wide>(2 * m) * w - static_cast<Wide>(ci.strength) * cj.strength;
        bool better = !found || gain > best_gain ||
                      (gain == best_gain && std::pair(ci.key, cj.key) <
                                                std::pair(comms[best_i].key, comms[best_j].key));
        if (better) {
          found = true;
          best_gain = gain;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (!found) break;

    const std::size_t id = comms.size();
    Community merged;
    merged.key = std::min(comms[best_i].key, comms[best_j].key);
    merged.strength = comms[best_i].strength + comms[best_j].strength;
    for (std::size_t src : {best_i, best_j}) {
      for (const auto& [x, w] : comms[src].links) {
        if (x == best_i || x == best_j) continue;
        merged.links[x] += w;
        comms[x].links.erase(src);
      }
      comms[src].alive = false;
      comms[src].links.clear();
    }
    for (const auto& [x, w] : merged.links) comms[x].links[id] = w;
    comms.push_back(std::move(merged));

    scaled += 2 * best_gain;
    scaled_after.push_back(scaled);
    dendrogram.merges.push_back({best_i, best_j, scaled_to_q(scaled, m)});
  }

  std::size_t cut = best_cut(scaled_after, initial);
  HierarchicalResult result;
  result.partition = cut_dendrogram(graph, dendrogram, cut);
  result.modularity = cut == 0 ? dendrogram.initial_score : dendrogram.merges[cut - 1].score;
  result.dendrogram = std::move(dendrogram);
  return result;
}

// ---------------------------------------------------------------------------
// Louvain

namespace {

struct LevelGraph {
  std::vector<std::vector<std::pair<NodeIndex, std::int64_t>>> adj;  // no self entries
  std::vector<std::int64_t> loop;
  std::vector<std::int64_t> strength;  // sum of adj weights + 2 * loop
};

LevelGraph level_from(const ProjectionGraph& graph) {
  LevelGraph g;
  const std::size_t n = graph.node_count();
  g.adj.resize(n);
  g.loop.assign(n, 0);
  g.strength.assign(n, 0);
  for (NodeIndex i = 0; i < n; ++i) {
    for (const auto& nb : graph.neighbors(i)) g.adj[i].emplace_back(nb.node, nb.weight);
    g.strength[i] = graph.strength(i);
  }
  return g;
}

/// Returns the number of moves made across all sweeps.
std::size_t local_moving(const LevelGraph& g, std::int64_t two_m, std::vector<NodeIndex>& comm,
                         Rng& rng) {
  const std::size_t n = g.adj.size();
  std::vector<std::int64_t> total(g.strength);
  comm.resize(n);
  std::iota(comm.begin(), comm.end(), 0);
  std::vector<std::int64_t> link(n, 0);
  std::vector<NodeIndex> touched;
  std::vector<NodeIndex> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::size_t moves_total = 0;
  for (std::size_t sweep = 0; sweep < 1000; ++sweep) {
    rng.shuffle(std::span<NodeIndex>(order));
    std::size_t moves = 0;
    for (NodeIndex i : order) {
      const NodeIndex old = comm[i];
      for (const auto& [j, w] : g.adj[i]) {
        if (link[comm[j]] == 0) touched.push_back(comm[j]);
        link[comm[j]] += w;
      }
      const std::int64_t s = g.strength[i];
      total[old] -= s;
      auto gain = [&](NodeIndex c) {
        return static_cast<Wide>(link[c]) * two_m - static_cast<Wide>(total[c]) * s;
      };
      NodeIndex best = old;
      Wide best_gain = gain(old);
      for (NodeIndex c : touched) {
        if (c == old) continue;
        Wide gc = gain(c);
        if (gc > best_gain || (gc == best_gain && best != old && c < best)) {
          best = c;
          best_gain = gc;
        }
      }
      total[best] += s;
      comm[i] = best;
      if (best != old) ++moves;
      for (NodeIndex c : touched) link[c] = 0;
      touched.clear();
    }
    moves_total += moves;
    if (moves == 0) break;
  }
  return moves_total;
}

/// Renumbers `comm` to 0..k-1 by first appearance and builds the quotient graph.
LevelGraph aggregate(const LevelGraph& g, std::vector<NodeIndex>& comm) {
  std::vector<NodeIndex> remap(g.adj.size(), static_cast<NodeIndex>(-1));
  NodeIndex k = 0;
  for (auto& c : comm) {
    if (remap[c] == static_cast<NodeIndex>(-1)) remap[c] = k++;
    c = remap[c];
  }
  LevelGraph out;
  out.adj.resize(k);
  out.loop.assign(k, 0);
  out.strength.assign(k, 0);
  std::vector<std::map<NodeIndex, std::int64_t>> links(k);
  for (NodeIndex i = 0; i < g.adj.size(); ++i) {
    const NodeIndex ci = comm[i];
    out.loop[ci] += g.loop[i];
    out.strength[ci] += g.strength[i];
    for (const auto& [j, w] : g.adj[i]) {
      const NodeIndex cj = comm[j];
      if (ci == cj) {
        if (i < j) out.loop[ci] += w;
      } else {
        links[ci][cj] += w;
      }
    }
  }
  for (NodeIndex c = 0; c < k; ++c) out.adj[c].assign(links[c].begin(), links[c].end());
  return out;
}

}  // namespace

Partition louvain(const ProjectionGraph& graph, std::uint64_t seed) {
  require_weight(graph);
  const std::int64_t two_m = 2 * graph.total_weight();
  Rng rng(seed, hash_name("louvain"));

  std::vector<NodeIndex> node_comm(graph.node_count());
  std::iota(node_comm.begin(), node_comm.end(), 0);
  LevelGraph level = level_from(graph);
  while (true) {
    std::vector<NodeIndex> comm;
    std::size_t moves = local_moving(level, two_m, comm, rng);
    if (moves == 0) break;
    level = aggregate(level, comm);
    for (auto& c : node_comm) c = comm[c];
  }
  return Partition::from_labels(graph.nodes(), node_comm);
}

// ---------------------------------------------------------------------------
// Walktrap

HierarchicalResult walktrap(const ProjectionGraph& graph, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("walktrap needs at least one step");
  require_weight(graph);
  const std::size_t n = graph.node_count();
  const std::int64_t m = graph.total_weight();
  const double two_m = 2.0 * static_cast<double>(m);

  // Transition probabilities w_jk / s_j, stored alongside the adjacency.
  std::vector<std::vector<std::pair<NodeIndex, double>>> transition(n);
  std::vector<double> inv_degree_share(n, 0.0);  // 1 / (s_k / 2m)
  for (NodeIndex j = 0; j < n; ++j) {
    const double s = static_cast<double>(graph.strength(j));
    for (const auto& nb : graph.neighbors(j)) {
      transition[j].emplace_back(nb.node, static_cast<double>(nb.weight) / s);
    }
    if (graph.strength(j) > 0) inv_degree_share[j] = 1.0 / (s / two_m);
  }

  struct Community {
    bool alive = true;
    NodeIndex key = 0;
    std::size_t size = 1;
    std::int64_t strength = 0;
    std::vector<double> walk;  // probability vector after `steps` steps
    std::map<std::size_t, std::int64_t> links;
  };
  std::vector<Community> comms(n);
  comms.reserve(2 * n);
  Wide scaled = 0;
  std::vector<double> next(n);
  for (NodeIndex i = 0; i < n; ++i) {
    Community& c = comms[i];
    c.key = i;
    c.strength = graph.strength(i);
    scaled -= static_cast<Wide>(c.strength) * c.strength;
    if (c.strength == 0) continue;
    for (const auto& nb : graph.neighbors(i)) c.links[nb.node] = nb.weight;
    c.walk.assign(n, 0.0);
    c.walk[i] = 1.0;
    for (std::size_t t = 0; t < steps; ++t) {
      std::fill(next.begin(), next.end(), 0.0);
      for (NodeIndex j = 0; j < n; ++j) {
        const double p = c.walk[j];
        if (p == 0.0) continue;
        for (const auto& [k, prob] : transition[j]) next[k] += p * prob;
      }
      c.walk.swap(next);
    }
  }

  auto delta_sigma = [&](const Community& a, const Community& b) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = a.walk[k] - b.walk[k];
      r2 += d * d * inv_degree_share[k];
    }
    const double sa = static_cast<double>(a.size);
    const double sb = static_cast<double>(b.size);
    return (sa * sb / (sa + sb)) * r2 / static_cast<double>(n);
  };

  // (delta sigma, smaller key, larger key, id, id)
  using Entry = std::tuple<double, NodeIndex, NodeIndex, std::size_t, std::size_t>;
  std::set<Entry> queue;
  std::map<std::pair<std::size_t, std::size_t>, double> pair_delta;
  auto add_pair = [&](std::size_t x, std::size_t y) {
    if (comms[x].key > comms[y].key) std::swap(x, y);
    double ds = delta_sigma(comms[x], comms[y]);
    queue.emplace(ds, comms[x].key, comms[y].key, x, y);
    pair_delta[{x, y}] = ds;
  };
  auto remove_pair = [&](std::size_t x, std::size_t y) {
    if (comms[x].key > comms[y].key) std::swap(x, y);
    auto it = pair_delta.find({x, y});
    if (it == pair_delta.end()) return;
    queue.erase(Entry{it->second, comms[x].key, comms[y].key, x, y});
    pair_delta.erase(it);
  };
  for (const auto& e : graph.edges()) add_pair(e.a, e.b);

  Dendrogram dendrogram;
  dendrogram.leaf_count = n;
  dendrogram.initial_score = scaled_to_q(scaled, m);
  const Wide initial = scaled;
  std::vector<Wide> scaled_after;

  while (!queue.empty()) {
    const auto [ds, key_a, key_b, a, b] = *queue.begin();
    const std::int64_t w_ab = comms[a].links.at(b);
    for (std::size_t src : {a, b}) {
      for (const auto& [x, w] : comms[src].links) remove_pair(src, x);
    }

    const std::size_t id = comms.size();
    Community merged;
    merged.key = std::min(comms[a].key, comms[b].key);
    merged.size = comms[a].size + comms[b].size;
    merged.strength = comms[a].strength + comms[b].strength;
    merged.walk.resize(n);
    const double fa = static_cast<double>(comms[a].size) / static_cast<double>(merged.size);
    const double fb = static_cast<double>(comms[b].size) / static_cast<double>(merged.size);
    for (std::size_t k = 0; k < n; ++k) {
      merged.walk[k] = fa * comms[a].walk[k] + fb * comms[b].walk[k];
    }
    for (std::size_t src : {a, b}) {
      for (const auto& [x, w] : comms[src].links) {
        if (x == a || x == b) continue;
        merged.links[x] += w;
        comms[x].links.erase(src);
      }
      comms[src].alive = false;
      comms[src].links.clear();
      std::vector<double>().swap(comms[src].walk);
    }
    comms.push_back(std::move(merged));
    for (const auto& [x, w] : comms[id].links) {
      comms[x].links[id] = w;
      add_pair(id, x);
    }

    scaled += 4 * static_cast<Wide>(m) * w_ab -
              2 * static_cast<Wide>(comms[a].strength) * comms[b].strength;
    scaled_after.push_back(scaled);
    dendrogram.merges.push_back({a, b, scaled_to_q(scaled, m)});
  }

  std::size_t cut = best_cut(scaled_after, initial);
  HierarchicalResult result;
  result.partition = cut_dendrogram(graph, dendrogram, cut);
  result.modularity = cut == 0 ? dendrogram.initial_score : dendrogram.merges[cut - 1].score;
  result.dendrogram = std::move(dendrogram);
  return result;
}

// ---------------------------------------------------------------------------
// Label propagation

LabelPropagationResult label_propagation(const ProjectionGraph& graph, std::uint64_t seed,
                                         std::size_t max_sweeps) {
  const std::size_t n = graph.node_count();
  Rng rng(seed, hash_name("label_propagation"));
  std::vector<NodeIndex> label(n);
  std::iota(label.begin(), label.end(), 0);
  std::vector<NodeIndex> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::int64_t> score(n, 0);
  std::vector<NodeIndex> touched;
  std::vector<NodeIndex> tied;

  // Fills `tied` with the sorted labels of maximum incident weight around i.
  auto majority = [&](NodeIndex i) {
    for (const auto& nb : graph.neighbors(i)) {
      if (score[label[nb.node]] == 0) touched.push_back(label[nb.node]);
      score[label[nb.node]] += nb.weight;
    }
    std::int64_t best = 0;
    for (NodeIndex l : touched) best = std::max(best, score[l]);
    tied.clear();
    for (NodeIndex l : touched) {
      if (score[l] == best) tied.push_back(l);
    }
    std::sort(tied.begin(), tied.end());
    for (NodeIndex l : touched) score[l] = 0;
    touched.clear();
  };

  LabelPropagationResult result;
  result.converged = false;
  while (result.sweeps < max_sweeps) {
    ++result.sweeps;
    rng.shuffle(std::span<NodeIndex>(order));
    for (NodeIndex i : order) {
      if (graph.neighbors(i).empty()) continue;
      majority(i);
      label[i] = tied.size() == 1 ? tied.front() : tied[rng.below(tied.size())];
    }
    bool stable = true;
    for (NodeIndex i = 0; i < n && stable; ++i) {
      if (graph.neighbors(i).empty()) continue;
      majority(i);
      stable = std::binary_search(tied.begin(), tied.end(), label[i]);
    }
    if (stable) {
      result.converged = true;
      break;
    }
  }
  result.partition = Partition::from_labels(graph.nodes(), label);
  return result;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::fastgreedy:
      return "fastgreedy";
    case Algorithm::walktrap:
      return "walktrap";
    case Algorithm::multilevel:
      return "multilevel";
    case Algorithm::labelprop:
      return "labelprop";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "fastgreedy") return Algorithm::fastgreedy;
  if (text == "walktrap") return Algorithm::walktrap;
  if (text == "multilevel" || text == "louvain") return Algorithm::multilevel;
  if (text == "labelprop" || text == "label_propagation") return Algorithm::labelprop;
  throw std::invalid_argument("unknown algorithm '" + std::string(text) + "'");
}

Partition detect(const ProjectionGraph& graph, Algorithm algorithm, std::uint64_t seed) {
  if (graph.total_weight() == 0) return singletons(graph);
  switch (algorithm) {
    case Algorithm::fastgreedy:
      return fastgreedy(graph).partition;
    case Algorithm::walktrap:
      return walktrap(graph).partition;
    case Algorithm::multilevel:
      return louvain(graph, seed);
    case Algorithm::labelprop:
      return label_propagation(graph, seed).partition;
  }
  throw std::logic_error("unhandled algorithm");
}

void write_dendrogram_csv(std::ostream& out, const Dendrogram& dendrogram) {
  out << "step,comm_a,comm_b,score\n";
  for (std::size_t k = 0; k < dendrogram.merges.size(); ++k) {
    const Merge& mg = dendrogram.merges[k];
    out << k << ',' << mg.a << ',' << mg.b << ',' << csv::format_real(mg.score) << '\n';
  }
}

}  // namespace polarnet::community
