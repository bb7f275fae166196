#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polarnet/time.hpp"

namespace polarnet {

enum class Action : std::uint8_t { post, like, comment };

std::string_view to_string(Action action);
Action parse_action(std::string_view text);

struct InteractionRecord {
  std::string user;
  std::string page;
  std::string post;
  Action action = Action::like;
  Timestamp ts = 0;

  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

/// Actor id used for post records whose publisher is the page itself.
inline constexpr std::string_view kPageActor = "page";

enum class Label : std::uint8_t { pro, anti, unlabeled };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

using LabelMap = std::map<std::string, Label, std::less<>>;

/// Immutable, indexed collection of interaction records.
///
/// Records are stored in canonical order (timestamp, page, post, user, action)
/// regardless of input order, so equal multisets of records give equal
/// datasets. Secondary indices hold positions into `records()`.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<InteractionRecord> records);

  std::span<const InteractionRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Sorted ids of every page referenced by a record.
  const std::vector<std::string>& pages() const { return pages_; }
  /// Sorted ids of the actors of like/comment records.
  const std::vector<std::string>& users() const { return users_; }

  std::span<const std::uint32_t> records_for_page(std::string_view page) const;
  /// All records whose actor is `user` (including post records by publishers).
  std::span<const std::uint32_t> records_for_user(std::string_view user) const;
  std::span<const std::uint32_t> records_for(Action action, Quarter quarter) const;

  const std::unordered_map<std::string, std::vector<std::uint32_t>>& page_index() const {
    return by_page_;
  }
  const std::unordered_map<std::string, std::vector<std::uint32_t>>& user_index() const {
    return by_user_;
  }
  const std::map<std::pair<Action, Quarter>, std::vector<std::uint32_t>>& action_quarter_index()
      const {
    return by_action_quarter_;
  }

 private:
  std::vector<InteractionRecord> records_;
  std::vector<std::string> pages_;
  std::vector<std::string> users_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_page_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_user_;
  std::map<std::pair<Action, Quarter>, std::vector<std::uint32_t>> by_action_quarter_;
};

enum class RecordFormat { jsonl, csv };
RecordFormat parse_record_format(std::string_view text);

enum class ParseMode { strict, lenient };

/// Thrown in strict mode; `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : std::runtime_error("line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ParseStats {
  std::size_t parsed = 0;
  std::size_t skipped = 0;
  /// First few skip reasons, for diagnostics.
  std::vector<std::string> reasons;
};

inline constexpr std::string_view kCsvRecordHeader = "user,page,post,action,ts";

/// Parses one record per non-blank line. CSV input may start with the
/// `user,page,post,action,ts` header.
Dataset parse_records(std::istream& in, RecordFormat format, ParseMode mode = ParseMode::strict,
                      ParseStats* stats = nullptr);

/// Canonical serialization: one JSON object per line with keys in the order
/// user, page, post, action, ts and timestamps as `YYYY-MM-DDTHH:MM:SSZ`.
void write_jsonl(std::ostream& out, const Dataset& dataset);
void write_csv(std::ostream& out, const Dataset& dataset);
std::string to_canonical_jsonl(const Dataset& dataset);

struct FilterOptions {
  std::size_t min_posts = 10;
  /// Inclusive day range, days since epoch.
  std::int64_t first_day = days_from_civil(2010, 1, 1);
  std::int64_t last_day = days_from_civil(2017, 5, 31);
};

/// Drops records outside the date range, then drops pages (with all of their
/// records) that have fewer than `min_posts` remaining post records.
Dataset filter_dataset(const Dataset& dataset, const FilterOptions& options = {});

struct SummaryRow {
  std::size_t pages = 0;
  std::size_t posts = 0;
  std::size_t likes = 0;
  std::size_t likers = 0;
  std::size_t comments = 0;
  std::size_t commenters = 0;
  std::size_t users = 0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct SummaryTable {
  SummaryRow pro;
  SummaryRow anti;
  /// Pages without a pro/anti label, kept apart from both rows.
  SummaryRow unlabeled;

  const SummaryRow& row(Label label) const;
};

SummaryTable dataset_summary(const Dataset& dataset, const LabelMap& labels);
void write_summary_csv(std::ostream& out, const SummaryTable& table);

/// Label file: CSV `page_id,label` with label in {pro, anti}; optional header
/// `page_id,label`. Duplicate page ids are an error.
LabelMap read_labels(std::istream& in);
void write_labels(std::ostream& out, const LabelMap& labels);

/// Label of `page`, or `unlabeled` when absent.
Label label_of(const LabelMap& labels, std::string_view page);

}  // namespace polarnet
