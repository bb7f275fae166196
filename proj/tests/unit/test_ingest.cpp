#include <doctest.h>

#include <sstream>

#include "polarnet/csv.hpp"
#include "polarnet/ingest.hpp"
#include "polarnet/synth.hpp"
#include "support.hpp"

using namespace polarnet;
using testing::comment;
using testing::like;
using testing::post;

TEST_CASE("civil date arithmetic") {
  CHECK(days_from_civil(1970, 1, 1) == 0);
  CHECK(days_from_civil(2000, 3, 1) == 11017);
  CHECK(days_from_civil(1969, 12, 31) == -1);
  for (std::int64_t d = -800000; d <= 800000; d += 997) {
    const CivilDate c = civil_from_days(d);
    CHECK(days_from_civil(c.year, c.month, c.day) == d);
  }
  CHECK(format_date(parse_date("2016-02-29")) == "2016-02-29");
  CHECK_THROWS(parse_date("2017-02-29"));
  CHECK_THROWS(parse_date("2017-13-01"));
}

TEST_CASE("timestamps parse to UTC seconds") {
  CHECK(parse_timestamp("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_timestamp("2014-03-01T00:00:00Z") == 1393632000);
  CHECK(parse_timestamp("2014-03-01T02:30:00+02:30") == 1393632000);
  CHECK(parse_timestamp("2014-02-28T21:00:00-03:00") == 1393632000);
  CHECK(parse_timestamp("2014-03-01T00:00:00.750Z") == 1393632000);
  CHECK(parse_timestamp("1393632000") == 1393632000);
  CHECK(format_timestamp(1393632000) == "2014-03-01T00:00:00Z");
  CHECK_THROWS(parse_timestamp(""));
  CHECK_THROWS(parse_timestamp("2014-03-01"));
  CHECK_THROWS(parse_timestamp("2014-03-01T25:00:00Z"));
  CHECK_THROWS(parse_timestamp("yesterday"));
}

TEST_CASE("quarters") {
  const Quarter q = Quarter::of(parse_timestamp("2014-02-10T12:00:00Z"));
  CHECK(q == Quarter{2014, 1});
  CHECK(q.to_string() == "2014Q1");
  CHECK(Quarter::parse("2014Q4").next() == Quarter{2015, 1});
  CHECK(Quarter{2014, 4} < Quarter{2015, 1});
  const TimeWindow w = Quarter{2014, 2}.window();
  CHECK(w.begin == parse_timestamp("2014-04-01T00:00:00Z"));
  CHECK(w.end == parse_timestamp("2014-07-01T00:00:00Z"));
  CHECK(Quarter::of(w.end - 1) == Quarter{2014, 2});
  CHECK_THROWS(Quarter::parse("2014Q5"));
}

TEST_CASE("calendar windows nest") {
  // A week key determines the month key, which determines the year key.
  std::map<std::int64_t, std::int64_t> week_month, month_year;
  for (Timestamp ts = parse_timestamp("2015-11-20T00:00:00Z"); ts < parse_timestamp("2017-02-10T00:00:00Z");
       ts += 3 * 3600 + 17) {
    const auto w = calendar_window_key(ts, CalendarWindow::week);
    const auto m = calendar_window_key(ts, CalendarWindow::month);
    const auto y = calendar_window_key(ts, CalendarWindow::year);
    auto [it1, in1] = week_month.emplace(w, m);
    CHECK(it1->second == m);
    auto [it2, in2] = month_year.emplace(m, y);
    CHECK(it2->second == y);
  }
  // 2016-01-01 (Friday) and 2015-12-31 share an ISO week but not a month.
  CHECK(calendar_window_key(parse_timestamp("2015-12-31T12:00:00Z"), CalendarWindow::week) !=
        calendar_window_key(parse_timestamp("2016-01-01T12:00:00Z"), CalendarWindow::week));
  // Monday starts a new week.
  CHECK(calendar_window_key(parse_timestamp("2016-03-06T23:59:59Z"), CalendarWindow::week) !=
        calendar_window_key(parse_timestamp("2016-03-07T00:00:00Z"), CalendarWindow::week));
  CHECK(calendar_window_key(parse_timestamp("2016-03-07T00:00:00Z"), CalendarWindow::week) ==
        calendar_window_key(parse_timestamp("2016-03-13T23:59:59Z"), CalendarWindow::week));
}

TEST_CASE("csv field handling") {
  CHECK(csv::split_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(csv::split_line(R"("a,b","say ""hi""",)") == std::vector<std::string>{"a,b", R"(say "hi")", ""});
  CHECK(csv::escape("plain") == "plain");
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::split_line(csv::escape(R"(x "y", z)")) == std::vector<std::string>{R"(x "y", z)"});
  CHECK(csv::format_real(0.1) == "0.1");
  CHECK(csv::format_real(1.0) == "1");
  CHECK(std::stod(csv::format_real(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("parse_records basics") {
  SUBCASE("empty stream") {
    std::istringstream in("");
    const Dataset d = parse_records(in, RecordFormat::jsonl);
    CHECK(d.size() == 0);
    CHECK(d.pages().empty());
    CHECK(d.users().empty());
  }
  SUBCASE("single record") {
    std::istringstream in(
        R"({"user":"u1","page":"p1","post":"x1","action":"like","ts":"2014-03-01T00:00:00Z"})");
    const Dataset d = parse_records(in, RecordFormat::jsonl);
    CHECK(d.size() == 1);
    CHECK(d.pages() == std::vector<std::string>{"p1"});
    CHECK(d.users() == std::vector<std::string>{"u1"});
    CHECK(d.records()[0].ts == 1393632000);
  }
  SUBCASE("epoch timestamps and csv") {
    std::istringstream in("user,page,post,action,ts\nu1,p1,x1,comment,1393632000\np1,p1,x1,post,2014-02-01T00:00:00Z\n");
    const Dataset d = parse_records(in, RecordFormat::csv);
    CHECK(d.size() == 2);
    CHECK(d.users() == std::vector<std::string>{"u1"});
  }
}

TEST_CASE("strict mode reports the line, lenient mode counts skips") {
  const std::string text =
      R"({"user":"u1","page":"p1","post":"x1","action":"like","ts":"2014-03-01T00:00:00Z"})"
      "\n\n"
      R"({"user":"u2","page":"p1","post":"x1","action":"share","ts":"2014-03-01T00:00:00Z"})"
      "\n"
      R"({"user":"u3","page":"p1","post":"x1","action":"like"})"
      "\n"
      R"({"user":"someone","page":"p1","post":"x1","action":"post","ts":"2014-03-01T00:00:00Z"})"
      "\nnot json\n";
  {
    std::istringstream in(text);
    try {
      (void)parse_records(in, RecordFormat::jsonl, ParseMode::strict);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("share") != std::string::npos);
    }
  }
  {
    std::istringstream in(text);
    ParseStats stats;
    const Dataset d = parse_records(in, RecordFormat::jsonl, ParseMode::lenient, &stats);
    CHECK(d.size() == 1);
    CHECK(stats.parsed == 1);
    CHECK(stats.skipped == 4);
  }
}

TEST_CASE("dataset order independence and index consistency") {
  std::vector<InteractionRecord> recs = {
      post("p1", "a", "2014-01-01T00:00:00Z"),    like("u1", "p1", "2014-01-02T00:00:00Z"),
      like("u1", "p1", "2014-01-02T00:00:00Z"),   comment("u2", "p2", "2014-05-02T00:00:00Z"),
      like("u3", "p2", "2015-01-02T00:00:00Z"),   post("p2", "b", "2013-12-01T00:00:00Z"),
      comment("u1", "p1", "2016-07-02T00:00:00Z")};
  const Dataset a(recs);
  std::reverse(recs.begin(), recs.end());
  const Dataset b(recs);
  CHECK(to_canonical_jsonl(a) == to_canonical_jsonl(b));
  CHECK(a.size() == 7);  // duplicates kept

  std::size_t by_page = 0, by_user = 0, by_aq = 0;
  for (const auto& [page, idx] : a.page_index()) {
    by_page += idx.size();
    for (auto i : idx) CHECK(a.records()[i].page == page);
  }
  for (const auto& [user, idx] : a.user_index()) {
    by_user += idx.size();
    for (auto i : idx) CHECK(a.records()[i].user == user);
  }
  for (const auto& [key, idx] : a.action_quarter_index()) {
    by_aq += idx.size();
    for (auto i : idx) {
      CHECK(a.records()[i].action == key.first);
      CHECK(Quarter::of(a.records()[i].ts) == key.second);
    }
  }
  CHECK(by_page == a.size());
  CHECK(by_user == a.size());
  CHECK(by_aq == a.size());
  CHECK(a.records_for(Action::like, Quarter{2014, 1}).size() == 2);
}

TEST_CASE("synthetic corpus round-trips through jsonl and csv") {
  synth::SynthConfig c;
  c.users_per_side = {40, 40};
  c.pages_per_side = {5, 4};
  c.posts_per_page = 12;
  c.actions_per_user = synth::ActivityDistribution::fixed(10);
  c.seed = 7;
  const auto out = synth::generate(c);
  REQUIRE(out.dataset.size() == 9 * 12 + 80 * 10);
  const std::string canonical = to_canonical_jsonl(out.dataset);

  std::istringstream in(canonical);
  const Dataset parsed = parse_records(in, RecordFormat::jsonl);
  CHECK(to_canonical_jsonl(parsed) == canonical);

  std::ostringstream csv_out;
  write_csv(csv_out, out.dataset);
  std::istringstream csv_in(csv_out.str());
  CHECK(to_canonical_jsonl(parse_records(csv_in, RecordFormat::csv)) == canonical);
}

TEST_CASE("filter_dataset") {
  std::vector<InteractionRecord> recs;
  auto add_posts = [&](const std::string& page, int n) {
    for (int i = 0; i < n; ++i) {
      recs.push_back(post(page, page + "_" + std::to_string(i), "2012-06-01T00:00:00Z"));
    }
  };
  add_posts("a", 12);
  add_posts("b", 10);
  add_posts("c", 9);
  recs.push_back(post("b", "b_old", "2009-12-31T23:59:59Z"));
  recs.push_back(like("u1", "a", "2009-12-31T12:00:00Z"));
  recs.push_back(like("u1", "a", "2010-01-01T00:00:00Z"));
  recs.push_back(like("u2", "c", "2013-01-01T00:00:00Z"));
  recs.push_back(like("u2", "b", "2017-05-31T23:59:59Z"));
  recs.push_back(like("u2", "b", "2017-06-01T00:00:00Z"));
  const Dataset d(recs);

  const Dataset f = filter_dataset(d);
  CHECK(f.pages() == std::vector<std::string>{"a", "b"});
  CHECK(f.users() == std::vector<std::string>{"u1", "u2"});
  CHECK(f.size() == 12 + 10 + 2);
  CHECK(to_canonical_jsonl(filter_dataset(f)) == to_canonical_jsonl(f));

  // Date filter runs first: the pre-2010 post does not rescue a 9-post page.
  std::vector<InteractionRecord> nine;
  for (int i = 0; i < 9; ++i) nine.push_back(post("d", "d" + std::to_string(i), "2011-01-01T00:00:00Z"));
  nine.push_back(post("d", "d_old", "2009-06-01T00:00:00Z"));
  CHECK(filter_dataset(Dataset(nine)).empty());

  FilterOptions bad;
  bad.first_day = bad.last_day + 1;
  CHECK_THROWS_AS(filter_dataset(d, bad), std::invalid_argument);
  CHECK(filter_dataset(Dataset{}).empty());
}

TEST_CASE("dataset_summary") {
  SUBCASE("empty") {
    const SummaryTable t = dataset_summary(Dataset{}, {});
    CHECK(t.pro == SummaryRow{});
    CHECK(t.anti == SummaryRow{});
  }
  SUBCASE("hand fixture") {
    const Dataset d({post("p1", "a", "2014-01-01T00:00:00Z"), post("p2", "b", "2014-01-01T00:00:00Z"),
                     like("u1", "p1", "2014-01-02T00:00:00Z"), like("u1", "p2", "2014-01-02T00:00:00Z"),
                     comment("u2", "p1", "2014-01-03T00:00:00Z"),
                     like("u3", "p2", "2014-01-04T00:00:00Z"),
                     comment("u3", "p2", "2014-01-04T00:00:00Z"),
                     like("u9", "q", "2014-01-04T00:00:00Z")});
    const LabelMap labels{{"p1", Label::pro}, {"p2", Label::pro}};
    const SummaryTable t = dataset_summary(d, labels);
    CHECK(t.pro.pages == 2);
    CHECK(t.pro.posts == 2);
    CHECK(t.pro.likes == 3);
    CHECK(t.pro.likers == 2);
    CHECK(t.pro.comments == 2);
    CHECK(t.pro.commenters == 2);
    CHECK(t.pro.users == 3);
    CHECK(t.anti == SummaryRow{});
    CHECK(t.unlabeled.pages == 1);
    CHECK(t.unlabeled.users == 1);

    std::ostringstream out;
    write_summary_csv(out, t);
    CHECK(out.str().rfind("label,pages,posts,likes,likers,comments,commenters,users\n", 0) == 0);
    CHECK(out.str().find("\npro,2,2,3,2,2,2,3\n") != std::string::npos);
  }
  SUBCASE("brute-force users on a generated fixture") {
    synth::SynthConfig c;
    c.users_per_side = {30, 30};
    c.pages_per_side = {4, 3};
    c.comment_fraction = 0.3;
    c.p_out = 0.2;
    c.posts_per_page = 5;
    c.actions_per_user = synth::ActivityDistribution::fixed(12);
    c.seed = 3;
    const auto g = synth::generate(c);
    REQUIRE(g.dataset.size() <= 1000);
    const SummaryTable t = dataset_summary(g.dataset, g.labels);
    for (Label label : {Label::pro, Label::anti}) {
      std::set<std::string> likers, commenters, all;
      for (const auto& r : g.dataset.records()) {
        if (label_of(g.labels, r.page) != label || r.action == Action::post) continue;
        (r.action == Action::like ? likers : commenters).insert(r.user);
        all.insert(r.user);
      }
      const SummaryRow& row = t.row(label);
      CHECK(row.likers == likers.size());
      CHECK(row.commenters == commenters.size());
      CHECK(row.users == all.size());
      CHECK(row.likers <= row.users);
      CHECK(row.commenters <= row.users);
      CHECK(row.users <= row.likers + row.commenters);
    }
  }
}

TEST_CASE("label files") {
  std::istringstream in("page_id,label\np1,pro\np2,anti\n");
  const LabelMap labels = read_labels(in);
  CHECK(labels.size() == 2);
  CHECK(label_of(labels, "p2") == Label::anti);
  CHECK(label_of(labels, "zz") == Label::unlabeled);
  std::ostringstream out;
  write_labels(out, labels);
  CHECK(out.str() == "page_id,label\np1,pro\np2,anti\n");

  std::istringstream dup("p1,pro\np1,anti\n");
  CHECK_THROWS(read_labels(dup));
  std::istringstream bad("p1,neutral\n");
  CHECK_THROWS(read_labels(bad));
}
