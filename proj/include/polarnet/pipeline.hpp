#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "polarnet/community.hpp"
#include "polarnet/ingest.hpp"

namespace polarnet::pipeline {

inline constexpr std::string_view kVersion = "1.0.0";

/// Rand indices of each detected partition (columns, in kAllAlgorithms
/// order) against a reference partition (row).
struct ValidationTable {
  Action action = Action::like;
  std::size_t pages = 0;
  std::array<double, 4> random{};  // mean over draws
  std::array<double, 4> labeled{};
  std::array<double, 4> fastgreedy{};
};

struct ValidationReport {
  std::vector<ValidationTable> tables;
  std::vector<std::string> warnings;
};

struct ValidationOptions {
  std::size_t draws = 100;
  /// Communities in each random baseline partition.
  std::size_t random_k = 2;
  std::size_t threads = 1;
};

/// For likes and comments: project the labeled pages, run every algorithm
/// and compare its partition with random, labeled and FastGreedy partitions.
/// An action kind absent from the data is skipped with a warning. Throws
/// std::invalid_argument with fewer than two labeled pages.
ValidationReport run_validation_matrix(const Dataset& dataset, const LabelMap& labels,
                                       std::uint64_t seed, const ValidationOptions& options = {});

/// `graph,communities,fastgreedy,walktrap,multilevel,labelprop`.
void write_validation_csv(std::ostream& out, const ValidationReport& report);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Reproducibility record: no clocks, no absolute paths.
struct Manifest {
  std::string subcommand;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> flags;
  /// File name -> SHA-256.
  std::map<std::string, std::string> inputs;
  std::vector<std::string> outputs;
};

void write_manifest(std::ostream& out, const Manifest& manifest);

}  // namespace polarnet::pipeline
