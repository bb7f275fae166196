#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "polarnet/graph.hpp"

namespace polarnet::community {

/// Newman-Girvan modularity of `partition` on `graph`:
///   Q = sum_c ( e_c / m - (s_c / 2m)^2 )
/// with e_c the total weight of edges inside c, s_c the summed node strength
/// of c and m the total edge weight. Throws std::domain_error when m = 0.
double modularity(const ProjectionGraph& graph, const Partition& partition);

/// One agglomeration step. Leaves are ids 0..n-1; step k creates id n+k.
struct Merge {
  std::size_t a;
  std::size_t b;
  /// Modularity of the partition right after this merge.
  double score;
};

struct Dendrogram {
  std::size_t leaf_count = 0;
  /// Modularity of the all-singletons partition.
  double initial_score = 0.0;
  std::vector<Merge> merges;
};

struct HierarchicalResult {
  Partition partition;
  Dendrogram dendrogram;
  /// Tracked modularity of the chosen cut.
  double modularity = 0.0;
};

/// Greedy agglomerative modularity optimisation (Clauset-Newman-Moore).
/// Merges the adjacent pair with the largest modularity gain until no
/// adjacent pairs remain; ties go to the lexicographically smallest pair of
/// (smallest member node index). The returned cut is the one with maximum
/// tracked modularity, preferring the later cut on ties.
HierarchicalResult fastgreedy(const ProjectionGraph& graph);

/// Multi-level local moving with aggregation, resolution 1.
/// Node visit order is reshuffled every sweep from `seed`.
Partition louvain(const ProjectionGraph& graph, std::uint64_t seed);

/// Random-walk distance agglomeration (Pons-Latapy) with walks of `steps`
/// steps; cut at maximum modularity. Isolated nodes stay singletons.
HierarchicalResult walktrap(const ProjectionGraph& graph, std::size_t steps = 4);

struct LabelPropagationResult {
  Partition partition;
  std::size_t sweeps = 0;
  /// False when `max_sweeps` was reached before every node held a
  /// weighted-majority label.
  bool converged = true;
};

/// Asynchronous weighted label propagation.
LabelPropagationResult label_propagation(const ProjectionGraph& graph, std::uint64_t seed,
                                         std::size_t max_sweeps = 1000);

enum class Algorithm { fastgreedy, walktrap, multilevel, labelprop };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::fastgreedy, Algorithm::walktrap,
                                               Algorithm::multilevel, Algorithm::labelprop};

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);

/// Runs one algorithm with default parameters; `seed` is ignored by the
/// deterministic ones. Graphs with zero total weight yield all-singleton
/// partitions for every algorithm.
Partition detect(const ProjectionGraph& graph, Algorithm algorithm, std::uint64_t seed);

/// CSV `step,comm_a,comm_b,score`.
void write_dendrogram_csv(std::ostream& out, const Dendrogram& dendrogram);

}  // namespace polarnet::community
