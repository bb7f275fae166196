#include "polarnet/compare.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "polarnet/rng.hpp"

namespace polarnet::compare {

namespace {

std::uint64_t pairs(std::uint64_t n) { return n * (n - 1) / 2; }

[[noreturn]] void throw_mismatch(const Partition& p, const Partition& q) {
  std::set<std::string> a(p.nodes().begin(), p.nodes().end());
  std::set<std::string> b(q.nodes().begin(), q.nodes().end());
  std::vector<std::string> diff;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
  std::string msg = "partitions cover different node sets; symmetric difference:";
  for (std::size_t i = 0; i < diff.size() && i < 20; ++i) msg += " " + diff[i];
  if (diff.size() > 20) msg += " ... (" + std::to_string(diff.size()) + " total)";
  if (diff.empty()) msg = "partitions list duplicate nodes";
  throw std::invalid_argument(msg);
}

}  // namespace

double rand_index(const Partition& p, const Partition& q) {
  const std::size_t n = p.size();
  if (q.size() != n) throw_mismatch(p, q);
  if (n < 2) throw std::invalid_argument("rand index needs at least two nodes");

  // Align q onto p's node order.
  std::vector<CommunityId> q_of(n);
  if (p.nodes() == q.nodes()) {
    q_of = q.membership();
  } else {
    std::unordered_map<std::string_view, NodeIndex> q_index;
    for (NodeIndex i = 0; i < n; ++i) q_index.emplace(q.nodes()[i], i);
    for (NodeIndex i = 0; i < n; ++i) {
      auto it = q_index.find(p.nodes()[i]);
      if (it == q_index.end() || q_index.size() != n) throw_mismatch(p, q);
      q_of[i] = q.community_of(it->second);
    }
  }

  std::unordered_map<std::uint64_t, std::uint64_t> cells;
  std::vector<std::uint64_t> row(p.community_count(), 0), col(q.community_count(), 0);
  for (NodeIndex i = 0; i < n; ++i) {
    const std::uint64_t a = p.community_of(i);
    const std::uint64_t b = q_of[i];
    ++cells[a * q.community_count() + b];
    ++row[a];
    ++col[b];
  }
  std::uint64_t together_both = 0, together_p = 0, together_q = 0;
  for (const auto& [cell, count] : cells) together_both += pairs(count);
  for (auto r : row) together_p += pairs(r);
  for (auto c : col) together_q += pairs(c);

  const std::uint64_t total = pairs(n);
  // agreements = together in both + apart in both
  const std::uint64_t agreements = total + 2 * together_both - together_p - together_q;
  return static_cast<double>(agreements) / static_cast<double>(total);
}

KappaResult cohen_kappa(const std::map<std::string, std::string>& rater1,
                        const std::map<std::string, std::string>& rater2) {
  if (rater1.size() != rater2.size() ||
      !std::equal(rater1.begin(), rater1.end(), rater2.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw std::invalid_argument("raters labelled different node sets");
  }
  if (rater1.empty()) throw std::invalid_argument("no rated nodes");

  std::map<std::string, std::uint64_t> m1, m2;
  std::uint64_t agree = 0;
  for (auto it1 = rater1.begin(), it2 = rater2.begin(); it1 != rater1.end(); ++it1, ++it2) {
    if (it1->second == it2->second) ++agree;
    ++m1[it1->second];
    ++m2[it2->second];
  }
  // Integer form: kappa = (n * agree - sum c1 c2) / (n^2 - sum c1 c2).
  const std::uint64_t n = rater1.size();
  std::uint64_t chance = 0;
  for (const auto& [label, count] : m1) {
    auto it = m2.find(label);
    if (it != m2.end()) chance += count * it->second;
  }
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  KappaResult r;
  r.observed = static_cast<double>(agree) / static_cast<double>(n);
  r.expected = static_cast<double>(chance) / n2;
  if (chance == n * n) {
    r.kappa = 1.0;
    r.degenerate = true;
  } else {
    r.kappa = (static_cast<double>(n * agree) - static_cast<double>(chance)) /
              (n2 - static_cast<double>(chance));
  }
  return r;
}

Partition random_partition(std::vector<std::string> nodes, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("random partition needs k >= 1");
  if (k > nodes.size()) throw std::invalid_argument("random partition needs k <= node count");
  Rng rng(seed, hash_name("random_partition"));
  std::vector<std::uint64_t> labels(nodes.size());
  for (auto& l : labels) l = rng.below(k);
  return Partition::from_labels(std::move(nodes), labels);
}

}  // namespace polarnet::compare
