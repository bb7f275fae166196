#include "polarnet/ingest.hpp"

#include <algorithm>
#include <array>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include <json.hpp>

#include "polarnet/csv.hpp"

namespace polarnet {

std::string_view to_string(Action action) {
  switch (action) {
    case Action::post:
      return "post";
    case Action::like:
      return "like";
    case Action::comment:
      return "comment";
  }
  return "?";
}

Action parse_action(std::string_view text) {
  if (text == "post") return Action::post;
  if (text == "like") return Action::like;
  if (text == "comment") return Action::comment;
  throw std::invalid_argument("unknown action '" + std::string(text) + "'");
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::pro:
      return "pro";
    case Label::anti:
      return "anti";
    case Label::unlabeled:
      return "unlabeled";
  }
  return "?";
}

Label parse_label(std::string_view text) {
  if (text == "pro") return Label::pro;
  if (text == "anti") return Label::anti;
  throw std::invalid_argument("label must be pro or anti, got '" + std::string(text) + "'");
}

RecordFormat parse_record_format(std::string_view text) {
  if (text == "jsonl") return RecordFormat::jsonl;
  if (text == "csv") return RecordFormat::csv;
  throw std::invalid_argument("format must be jsonl or csv");
}

namespace {

void validate(const InteractionRecord& r) {
  if (r.user.empty()) throw std::invalid_argument("empty user id");
  if (r.page.empty()) throw std::invalid_argument("empty page id");
  if (r.post.empty()) throw std::invalid_argument("empty post id");
  if (r.action == Action::post && r.user != r.page && r.user != kPageActor) {
    throw std::invalid_argument("post record actor '" + r.user +
                                "' is neither the page nor the page sentinel");
  }
}

auto canonical_key(const InteractionRecord& r) {
  return std::tie(r.ts, r.page, r.post, r.user, r.action);
}

}  // namespace

Dataset::Dataset(std::vector<InteractionRecord> records) : records_(std::move(records)) {
  for (const auto& r : records_) validate(r);
  std::sort(records_.begin(), records_.end(),
            [](const auto& a, const auto& b) { return canonical_key(a) < canonical_key(b); });

  std::set<std::string_view> pages;
  std::set<std::string_view> users;
  for (std::uint32_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    by_page_[r.page].push_back(i);
    by_user_[r.user].push_back(i);
    by_action_quarter_[{r.action, Quarter::of(r.ts)}].push_back(i);
    pages.insert(r.page);
    if (r.action != Action::post) users.insert(r.user);
  }
  pages_.assign(pages.begin(), pages.end());
  users_.assign(users.begin(), users.end());
}

std::span<const std::uint32_t> Dataset::records_for_page(std::string_view page) const {
  auto it = by_page_.find(std::string(page));
  if (it == by_page_.end()) return {};
  return it->second;
}

std::span<const std::uint32_t> Dataset::records_for_user(std::string_view user) const {
  auto it = by_user_.find(std::string(user));
  if (it == by_user_.end()) return {};
  return it->second;
}

std::span<const std::uint32_t> Dataset::records_for(Action action, Quarter quarter) const {
  auto it = by_action_quarter_.find({action, quarter});
  if (it == by_action_quarter_.end()) return {};
  return it->second;
}

namespace {

std::string json_string_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

InteractionRecord parse_jsonl_line(const std::string& line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw std::invalid_argument("line is not a JSON object");
  InteractionRecord r;
  r.user = json_string_field(obj, "user");
  r.page = json_string_field(obj, "page");
  r.post = json_string_field(obj, "post");
  r.action = parse_action(json_string_field(obj, "action"));
  auto ts = obj.find("ts");
  if (ts == obj.end()) throw std::invalid_argument("missing field 'ts'");
  if (ts->is_number_integer()) {
    r.ts = ts->get<Timestamp>();
  } else if (ts->is_string()) {
    r.ts = parse_timestamp(ts->get<std::string>());
  } else {
    throw std::invalid_argument("field 'ts' must be an ISO-8601 string or integer epoch seconds");
  }
  return r;
}

InteractionRecord parse_csv_line(const std::string& line) {
  auto fields = csv::split_line(line);
  if (fields.size() != 5) {
    throw std::invalid_argument("expected 5 CSV fields, got " + std::to_string(fields.size()));
  }
  InteractionRecord r;
  r.user = fields[0];
  r.page = fields[1];
  r.post = fields[2];
  r.action = parse_action(fields[3]);
  r.ts = parse_timestamp(fields[4]);
  return r;
}

}  // namespace

Dataset parse_records(std::istream& in, RecordFormat format, ParseMode mode, ParseStats* stats) {
  std::vector<InteractionRecord> records;
  ParseStats local;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (format == RecordFormat::csv && line_no == 1 && line == kCsvRecordHeader) continue;
    try {
      InteractionRecord r =
          format == RecordFormat::jsonl ? parse_jsonl_line(line) : parse_csv_line(line);
      validate(r);
      records.push_back(std::move(r));
      ++local.parsed;
    } catch (const std::invalid_argument& e) {
      if (mode == ParseMode::strict) throw ParseError(line_no, e.what());
      ++local.skipped;
      if (local.reasons.size() < 10) {
        local.reasons.push_back("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  if (stats) *stats = std::move(local);
  return Dataset(std::move(records));
}

void write_jsonl(std::ostream& out, const Dataset& dataset) {
  for (const auto& r : dataset.records()) {
    out << "{\"user\":" << nlohmann::json(r.user).dump() << ",\"page\":"
        << nlohmann::json(r.page).dump() << ",\"post\":" << nlohmann::json(r.post).dump()
        << ",\"action\":\"" << to_string(r.action) << "\",\"ts\":\"" << format_timestamp(r.ts)
        << "\"}\n";
  }
}

void write_csv(std::ostream& out, const Dataset& dataset) {
  out << kCsvRecordHeader << '\n';
  for (const auto& r : dataset.records()) {
    csv::write_row(out, {r.user, r.page, r.post, std::string(to_string(r.action)),
                         format_timestamp(r.ts)});
  }
}

std::string to_canonical_jsonl(const Dataset& dataset) {
  std::ostringstream out;
  write_jsonl(out, dataset);
  return out.str();
}

Dataset filter_dataset(const Dataset& dataset, const FilterOptions& options) {
  if (options.first_day > options.last_day) {
    throw std::invalid_argument("filter range start is after its end");
  }
  const TimeWindow range = TimeWindow::from_dates(options.first_day, options.last_day);

  std::unordered_map<std::string_view, std::size_t> posts_in_range;
  for (const auto& r : dataset.records()) {
    if (r.action == Action::post && range.contains(r.ts)) ++posts_in_range[r.page];
  }
  std::vector<InteractionRecord> kept;
  for (const auto& r : dataset.records()) {
    if (!range.contains(r.ts)) continue;
    auto it = posts_in_range.find(r.page);
    if (it == posts_in_range.end() || it->second < options.min_posts) continue;
    kept.push_back(r);
  }
  return Dataset(std::move(kept));
}

const SummaryRow& SummaryTable::row(Label label) const {
  switch (label) {
    case Label::pro:
      return pro;
    case Label::anti:
      return anti;
    case Label::unlabeled:
      break;
  }
  return unlabeled;
}

SummaryTable dataset_summary(const Dataset& dataset, const LabelMap& labels) {
  SummaryTable table;
  auto row_for = [&](Label label) -> SummaryRow& {
    return label == Label::pro ? table.pro : label == Label::anti ? table.anti : table.unlabeled;
  };
  for (const auto& page : dataset.pages()) ++row_for(label_of(labels, page)).pages;

  std::array<std::unordered_set<std::string_view>, 3> likers, commenters, users;
  for (const auto& r : dataset.records()) {
    Label label = label_of(labels, r.page);
    auto idx = static_cast<std::size_t>(label);
    SummaryRow& row = row_for(label);
    switch (r.action) {
      case Action::post:
        ++row.posts;
        break;
      case Action::like:
        ++row.likes;
        likers[idx].insert(r.user);
        users[idx].insert(r.user);
        break;
      case Action::comment:
        ++row.comments;
        commenters[idx].insert(r.user);
        users[idx].insert(r.user);
        break;
    }
  }
  for (Label label : {Label::pro, Label::anti, Label::unlabeled}) {
    auto idx = static_cast<std::size_t>(label);
    SummaryRow& row = row_for(label);
    row.likers = likers[idx].size();
    row.commenters = commenters[idx].size();
    row.users = users[idx].size();
  }
  return table;
}

void write_summary_csv(std::ostream& out, const SummaryTable& table) {
  out << "label,pages,posts,likes,likers,comments,commenters,users\n";
  for (Label label : {Label::anti, Label::pro, Label::unlabeled}) {
    const SummaryRow& r = table.row(label);
    out << to_string(label) << ',' << r.pages << ',' << r.posts << ',' << r.likes << ','
        << r.likers << ',' << r.comments << ',' << r.commenters << ',' << r.users << '\n';
  }
}

LabelMap read_labels(std::istream& in) {
  LabelMap labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "page_id,label") continue;
    auto fields = csv::split_line(line);
    if (fields.size() != 2) throw ParseError(line_no, "expected page_id,label");
    try {
      Label label = parse_label(fields[1]);
      if (!labels.emplace(fields[0], label).second) {
        throw std::invalid_argument("duplicate label for page '" + fields[0] + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return labels;
}

void write_labels(std::ostream& out, const LabelMap& labels) {
  out << "page_id,label\n";
  for (const auto& [page, label] : labels) {
    if (label == Label::unlabeled) continue;
    out << csv::escape(page) << ',' << to_string(label) << '\n';
  }
}

Label label_of(const LabelMap& labels, std::string_view page) {
  auto it = labels.find(page);
  return it == labels.end() ? Label::unlabeled : it->second;
}

}  // namespace polarnet
