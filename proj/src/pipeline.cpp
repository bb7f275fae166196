#include "polarnet/pipeline.hpp"

#include <fstream>
#include <memory>
#include <ostream>
#include <stdexcept>

#include <json.hpp>
#include <openssl/evp.h>

#include "polarnet/compare.hpp"
#include "polarnet/csv.hpp"
#include "polarnet/graph.hpp"
#include "polarnet/parallel.hpp"
#include "polarnet/rng.hpp"

namespace polarnet::pipeline {

namespace {

std::string_view graph_name(Action action) {
  return action == Action::like ? "likes" : "comments";
}

ValidationTable validate_action(const Dataset& dataset, const LabelMap& labels, Action action,
                                std::uint64_t seed, const ValidationOptions& options) {
  std::vector<std::string> pages;
  std::vector<std::string> page_labels;
  for (const auto& page : dataset.pages()) {
    const Label label = label_of(labels, page);
    if (label == Label::unlabeled) continue;
    pages.push_back(page);
    page_labels.emplace_back(to_string(label));
  }
  if (pages.size() < 2) throw std::invalid_argument("validation needs at least two labeled pages");

  const ProjectionGraph graph = induced_subgraph(project(build_bipartite(dataset, action)), pages);
  const std::string scope = "validate." + std::string(graph_name(action));

  std::array<Partition, 4> detected;
  parallel_for(4, options.threads, [&](std::size_t i) {
    const community::Algorithm alg = community::kAllAlgorithms[i];
    detected[i] = community::detect(graph, alg, derive_seed(seed, scope, community::to_string(alg)));
  });
  const Partition labeled = Partition::from_labels(pages, page_labels);
  const std::size_t k = std::min(options.random_k, pages.size());

  ValidationTable table;
  table.action = action;
  table.pages = pages.size();
  std::vector<std::array<double, 4>> random_rows(options.draws);
  const std::uint64_t random_seed = derive_seed(seed, scope, "random_partition");
  parallel_for(options.draws, options.threads, [&](std::size_t d) {
    const Partition baseline = compare::random_partition(pages, k, mix64(random_seed + d));
    for (std::size_t j = 0; j < 4; ++j) random_rows[d][j] = compare::rand_index(baseline, detected[j]);
  });
  for (std::size_t j = 0; j < 4; ++j) {
    double sum = 0.0;
    for (const auto& row : random_rows) sum += row[j];
    table.random[j] = options.draws == 0 ? 0.0 : sum / static_cast<double>(options.draws);
    table.labeled[j] = compare::rand_index(labeled, detected[j]);
    table.fastgreedy[j] = compare::rand_index(detected[0], detected[j]);
  }
  return table;
}

}  // namespace

ValidationReport run_validation_matrix(const Dataset& dataset, const LabelMap& labels,
                                       std::uint64_t seed, const ValidationOptions& options) {
  ValidationReport report;
  for (Action action : {Action::like, Action::comment}) {
    const bool present = std::any_of(dataset.records().begin(), dataset.records().end(),
                                     [&](const auto& r) { return r.action == action; });
    if (!present) {
      report.warnings.push_back("no " + std::string(to_string(action)) +
                                " records; omitting the " + std::string(graph_name(action)) +
                                " table");
      continue;
    }
    report.tables.push_back(validate_action(dataset, labels, action, seed, options));
  }
  return report;
}

void write_validation_csv(std::ostream& out, const ValidationReport& report) {
  out << "graph,communities";
  for (auto alg : community::kAllAlgorithms) out << ',' << community::to_string(alg);
  out << '\n';
  for (const auto& t : report.tables) {
    const std::pair<const char*, const std::array<double, 4>*> rows[] = {
        {"random", &t.random}, {"labeled", &t.labeled}, {"fastgreedy", &t.fastgreedy}};
    for (const auto& [name, values] : rows) {
      out << graph_name(t.action) << ',' << name;
      for (double v : *values) out << ',' << csv::format_real(v);
      out << '\n';
    }
  }
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 unavailable");
  }
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &length);
  static constexpr char hex[] = "0123456789abcdef";
  std::string text;
  for (unsigned int i = 0; i < length; ++i) {
    text += hex[digest[i] >> 4];
    text += hex[digest[i] & 15];
  }
  return text;
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  nlohmann::ordered_json j;
  j["tool"] = "polarnet";
  j["version"] = kVersion;
  j["subcommand"] = manifest.subcommand;
  j["seed"] = manifest.seed;
  j["flags"] = manifest.flags;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& [name, digest] : manifest.inputs) {
    j["inputs"].push_back({{"file", name}, {"sha256", digest}});
  }
  j["outputs"] = manifest.outputs;
  out << j.dump(2) << '\n';
}

}  // namespace polarnet::pipeline
