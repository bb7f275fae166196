// polarnet: batch analyses of polarized user-page interaction data.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polarnet/community.hpp"
#include "polarnet/csv.hpp"
#include "polarnet/graph.hpp"
#include "polarnet/ingest.hpp"
#include "polarnet/metrics.hpp"
#include "polarnet/pipeline.hpp"
#include "polarnet/rng.hpp"
#include "polarnet/synth.hpp"
#include "polarnet/temporal.hpp"

namespace fs = std::filesystem;
using namespace polarnet;

namespace {

struct Global {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out_dir = ".";
};

const std::set<std::string> kPathOptions = {"--in",       "--out",     "--labels", "--truth",
                                            "--profiles", "--dendrogram"};

fs::path out_path(const Global& g, const std::string& name) {
  fs::path p(name);
  return p.is_absolute() ? p : fs::path(g.out_dir) / p;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return in;
}

Dataset load_records(const fs::path& path, RecordFormat format = RecordFormat::jsonl) {
  auto in = open_in(path);
  return parse_records(in, format, ParseMode::strict);
}

LabelMap load_labels(const fs::path& path) {
  auto in = open_in(path);
  return read_labels(in);
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::vector<std::size_t> parse_counts(const std::string& text, std::string_view what) {
  std::vector<std::size_t> out;
  for (const auto& part : split_commas(text)) {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(part, &used);
    if (used != part.size()) throw std::invalid_argument("bad " + std::string(what) + ": " + text);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::array<std::size_t, 2> parse_pair(const std::string& text, std::string_view what) {
  const auto v = parse_counts(text, what);
  if (v.size() != 2) throw std::invalid_argument(std::string(what) + " needs two values (pro,anti)");
  return {v[0], v[1]};
}

void warn(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

/// Writes <out-dir>/<subcommand>.manifest.json.
void write_manifest(const Global& g, const CLI::App& sub, const std::vector<fs::path>& inputs,
                    const std::vector<fs::path>& outputs) {
  pipeline::Manifest m;
  m.subcommand = sub.get_name();
  m.seed = g.seed;
  m.flags["--threads"] = std::to_string(g.threads);
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_name();
    if (name.empty() || name == "--help") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
      if (opt->get_type_size() == 0 && results.empty()) value = "true";
    } else {
      value = opt->get_default_str();
    }
    if (kPathOptions.contains(name) && !value.empty()) value = fs::path(value).filename().string();
    m.flags[name] = value;
  }
  for (const auto& p : inputs) m.inputs[p.filename().string()] = pipeline::sha256_file(p);
  for (const auto& p : outputs) m.outputs.push_back(p.filename().string());
  auto out = open_out(fs::path(g.out_dir) / (sub.get_name() + ".manifest.json"));
  pipeline::write_manifest(out, m);
}

ProjectionGraph restricted_projection(const Dataset& d, Action action, const LabelMap* labels) {
  ProjectionGraph graph = project(build_bipartite(d, action));
  if (!labels) return graph;
  std::vector<std::string> keep;
  for (const auto& page : graph.nodes()) {
    if (label_of(*labels, page) != Label::unlabeled) keep.push_back(page);
  }
  return induced_subgraph(graph, keep);
}

std::string fmt(double v) { return csv::format_real(v); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization analysis of user-page interaction networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Global seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker cap")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for outputs")->capture_default_str();

  std::function<void()> action;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a planted polarized corpus");
  std::string users = "5000,5000", pages = "145,98", actions = "lognormal", blocks_pro, blocks_anti;
  std::string synth_from = "2010-01-01", synth_to = "2017-05-31";
  std::string synth_out = "data.jsonl", truth_out = "truth.csv", synth_labels = "labels.csv";
  synth::SynthConfig sc;
  synth->add_option("--users", users, "Users per side (pro,anti)")->capture_default_str();
  synth->add_option("--pages", pages, "Pages per side (pro,anti)")->capture_default_str();
  synth->add_option("--p-out", sc.p_out, "Cross-side action probability")->capture_default_str();
  synth->add_option("--comment-fraction", sc.comment_fraction)->capture_default_str();
  synth->add_option("--posts-per-page", sc.posts_per_page)->capture_default_str();
  synth->add_option("--actions", actions, "lognormal or a fixed count per user")->capture_default_str();
  synth->add_option("--mu", sc.actions_per_user.mu)->capture_default_str();
  synth->add_option("--sigma", sc.actions_per_user.sigma)->capture_default_str();
  synth->add_option("--blocks-pro", blocks_pro, "Pro page block sizes, e.g. 6,5,4");
  synth->add_option("--blocks-anti", blocks_anti, "Anti page block sizes");
  synth->add_option("--from", synth_from)->capture_default_str();
  synth->add_option("--to", synth_to)->capture_default_str();
  synth->add_option("--out", synth_out)->capture_default_str();
  synth->add_option("--truth", truth_out)->capture_default_str();
  synth->add_option("--labels", synth_labels)->capture_default_str();
  synth->callback([&] {
    action = [&] {
      sc.users_per_side = parse_pair(users, "--users");
      sc.pages_per_side = parse_pair(pages, "--pages");
      if (actions != "lognormal") {
        sc.actions_per_user = synth::ActivityDistribution::fixed(parse_counts(actions, "--actions").at(0));
      }
      sc.block_sizes[0] = parse_counts(blocks_pro, "--blocks-pro");
      sc.block_sizes[1] = parse_counts(blocks_anti, "--blocks-anti");
      sc.first_day = parse_date(synth_from);
      sc.last_day = parse_date(synth_to);
      sc.seed = derive_seed(g.seed, "synth", "generate");
      const auto result = synth::generate(sc);
      const auto data = out_path(g, synth_out), truth = out_path(g, truth_out),
                 labels = out_path(g, synth_labels);
      {
        auto out = open_out(data);
        write_jsonl(out, result.dataset);
        auto t = open_out(truth);
        synth::write_truth_csv(t, result.truth);
        auto l = open_out(labels);
        write_labels(l, result.labels);
      }
      write_manifest(g, *synth, {}, {data, truth, labels});
    };
  });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate, filter and canonicalise records");
  std::string ingest_in, ingest_format = "jsonl", ingest_out = "records.jsonl";
  std::string ingest_from = "2010-01-01", ingest_to = "2017-05-31";
  std::size_t min_posts = 10;
  bool strict = false;
  ingest->add_option("--in", ingest_in)->required();
  ingest->add_option("--format", ingest_format, "jsonl or csv")->capture_default_str();
  ingest->add_option("--min-posts", min_posts)->capture_default_str();
  ingest->add_option("--from", ingest_from)->capture_default_str();
  ingest->add_option("--to", ingest_to)->capture_default_str();
  ingest->add_flag("--strict", strict, "Fail on the first malformed record");
  ingest->add_option("--out", ingest_out)->capture_default_str();
  ingest->callback([&] {
    action = [&] {
      auto in = open_in(ingest_in);
      ParseStats stats;
      const Dataset raw = parse_records(in, parse_record_format(ingest_format),
                                        strict ? ParseMode::strict : ParseMode::lenient, &stats);
      if (stats.skipped > 0) {
        warn("skipped " + std::to_string(stats.skipped) + " malformed record(s)");
        for (const auto& r : stats.reasons) warn(r);
      }
      FilterOptions f;
      f.min_posts = min_posts;
      f.first_day = parse_date(ingest_from);
      f.last_day = parse_date(ingest_to);
      const Dataset filtered = filter_dataset(raw, f);
      const auto out_file = out_path(g, ingest_out);
      {
        auto out = open_out(out_file);
        write_jsonl(out, filtered);
      }
      write_manifest(g, *ingest, {ingest_in}, {out_file});
    };
  });

  // summary
  auto* summary = app.add_subcommand("summary", "Per-label page, post and user counts");
  std::string summary_in, summary_labels, summary_out = "summary.csv";
  summary->add_option("--in", summary_in)->required();
  summary->add_option("--labels", summary_labels)->required();
  summary->add_option("--out", summary_out)->capture_default_str();
  summary->callback([&] {
    action = [&] {
      const Dataset d = load_records(summary_in);
      const auto out_file = out_path(g, summary_out);
      {
        auto out = open_out(out_file);
        write_summary_csv(out, dataset_summary(d, load_labels(summary_labels)));
      }
      write_manifest(g, *summary, {summary_in, summary_labels}, {out_file});
    };
  });

  // project
  auto* proj = app.add_subcommand("project", "Weighted page projection of one action kind");
  std::string project_in, project_labels, project_action = "like", project_out = "projection.csv";
  proj->add_option("--in", project_in)->required();
  proj->add_option("--action", project_action)->capture_default_str();
  proj->add_option("--labels", project_labels, "Keep only labeled pages");
  proj->add_option("--out", project_out)->capture_default_str();
  proj->callback([&] {
    action = [&] {
      const Dataset d = load_records(project_in);
      std::optional<LabelMap> labels;
      std::vector<fs::path> inputs{project_in};
      if (!project_labels.empty()) {
        labels = load_labels(project_labels);
        inputs.emplace_back(project_labels);
      }
      const auto graph = restricted_projection(d, parse_action(project_action), labels ? &*labels : nullptr);
      const auto out_file = out_path(g, project_out);
      {
        auto out = open_out(out_file);
        write_projection_csv(out, graph);
      }
      write_manifest(g, *proj, inputs, {out_file});
    };
  });

  // detect
  auto* detect = app.add_subcommand("detect", "Community detection on a page projection");
  std::string detect_in, detect_labels, detect_action = "like", algorithm = "fastgreedy";
  std::string detect_out = "partition.csv", dendrogram_out;
  detect->add_option("--in", detect_in)->required();
  detect->add_option("--action", detect_action)->capture_default_str();
  detect->add_option("--algorithm", algorithm, "fastgreedy|walktrap|multilevel|labelprop")
      ->capture_default_str();
  detect->add_option("--labels", detect_labels, "Keep only labeled pages");
  detect->add_option("--out", detect_out)->capture_default_str();
  detect->add_option("--dendrogram", dendrogram_out, "Merge sequence (fastgreedy, walktrap)");
  detect->callback([&] {
    action = [&] {
      const Dataset d = load_records(detect_in);
      std::optional<LabelMap> labels;
      std::vector<fs::path> inputs{detect_in};
      if (!detect_labels.empty()) {
        labels = load_labels(detect_labels);
        inputs.emplace_back(detect_labels);
      }
      const auto graph = restricted_projection(d, parse_action(detect_action), labels ? &*labels : nullptr);
      const auto alg = community::parse_algorithm(algorithm);
      std::vector<fs::path> outputs{out_path(g, detect_out)};
      Partition partition;
      if (!dendrogram_out.empty()) {
        if (alg != community::Algorithm::fastgreedy && alg != community::Algorithm::walktrap) {
          throw std::invalid_argument("--dendrogram needs a hierarchical algorithm");
        }
        if (graph.total_weight() == 0) throw std::invalid_argument("projection has no edges");
        const auto h = alg == community::Algorithm::fastgreedy ? community::fastgreedy(graph)
                                                               : community::walktrap(graph);
        partition = h.partition;
        outputs.push_back(out_path(g, dendrogram_out));
        auto out = open_out(outputs.back());
        community::write_dendrogram_csv(out, h.dendrogram);
      } else {
        partition = community::detect(graph, alg, derive_seed(g.seed, "detect", community::to_string(alg)));
      }
      {
        auto out = open_out(outputs.front());
        write_partition_csv(out, partition);
      }
      write_manifest(g, *detect, inputs, outputs);
    };
  });

  // validate
  auto* validate = app.add_subcommand("validate", "Rand-index validation matrix");
  std::string validate_in, validate_labels, validate_out = "validation.csv";
  pipeline::ValidationOptions vo;
  validate->add_option("--in", validate_in)->required();
  validate->add_option("--labels", validate_labels)->required();
  validate->add_option("--draws", vo.draws, "Random baseline draws")->capture_default_str();
  validate->add_option("--random-k", vo.random_k, "Communities per random partition")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  validate->add_option("--out", validate_out)->capture_default_str();
  validate->callback([&] {
    action = [&] {
      vo.threads = g.threads;
      const Dataset d = load_records(validate_in);
      const auto report = pipeline::run_validation_matrix(d, load_labels(validate_labels), g.seed, vo);
      for (const auto& w : report.warnings) warn(w);
      const auto out_file = out_path(g, validate_out);
      {
        auto out = open_out(out_file);
        pipeline::write_validation_csv(out, report);
      }
      write_manifest(g, *validate, {validate_in, validate_labels}, {out_file});
    };
  });

  // polarize
  auto* polarize = app.add_subcommand("polarize", "Distribution of user polarization");
  std::string polarize_in, polarize_labels, sides = "labels", polarize_action = "like";
  std::string polarize_out = "pdf.csv", profiles_out;
  std::size_t min_actions = 10, bins = 21;
  polarize->add_option("--in", polarize_in)->required();
  polarize->add_option("--labels", polarize_labels, "Page labels (needed for --sides labels)");
  polarize->add_option("--sides", sides, "labels or detected")->capture_default_str();
  polarize->add_option("--action", polarize_action)->capture_default_str();
  polarize->add_option("--min-actions", min_actions)->capture_default_str();
  polarize->add_option("--bins", bins)->capture_default_str();
  polarize->add_option("--out", polarize_out)->capture_default_str();
  polarize->add_option("--profiles", profiles_out, "Per-user x,y,rho");
  polarize->callback([&] {
    action = [&] {
      const Dataset d = load_records(polarize_in);
      const Action act = parse_action(polarize_action);
      std::vector<fs::path> inputs{polarize_in};
      metrics::SideMap side_map;
      if (sides == "labels") {
        if (polarize_labels.empty()) throw std::invalid_argument("--sides labels needs --labels");
        side_map = metrics::sides_from_labels(load_labels(polarize_labels));
        inputs.emplace_back(polarize_labels);
      } else if (sides == "detected") {
        const auto graph = project(build_bipartite(d, act));
        side_map = metrics::sides_from_partition(
            community::detect(graph, community::Algorithm::fastgreedy, 0));
      } else {
        throw std::invalid_argument("--sides must be labels or detected");
      }
      const auto profiles = metrics::user_polarization(d, act, side_map, min_actions);
      if (profiles.empty()) throw std::runtime_error("no user reaches --min-actions");
      std::vector<fs::path> outputs{out_path(g, polarize_out)};
      {
        auto out = open_out(outputs.front());
        metrics::write_histogram_csv(out, metrics::polarization_histogram(profiles, bins));
      }
      if (!profiles_out.empty()) {
        outputs.push_back(out_path(g, profiles_out));
        auto out = open_out(outputs.back());
        out << "user,x,y,rho\n";
        for (const auto& p : profiles) {
          out << csv::escape(p.user) << ',' << p.x << ',' << p.y << ',' << fmt(p.rho) << '\n';
        }
      }
      write_manifest(g, *polarize, inputs, outputs);
    };
  });

  // exposure
  auto* exposure = app.add_subcommand("exposure", "Selective-exposure curves");
  std::string exposure_in, exposure_labels, window = "month", exposure_action = "like";
  std::string exposure_out = "curve.csv";
  metrics::ExposureOptions eo;
  exposure->add_option("--in", exposure_in)->required();
  exposure->add_option("--labels", exposure_labels)->required();
  exposure->add_option("--window", window, "week, month or year")->capture_default_str();
  exposure->add_option("--span", eo.span)->capture_default_str();
  exposure->add_option("--eval-points", eo.eval_points)->capture_default_str();
  exposure->add_flag("--standardize-pages", eo.standardize_pages);
  exposure->add_option("--action", exposure_action)->capture_default_str();
  exposure->add_option("--out", exposure_out)->capture_default_str();
  exposure->callback([&] {
    action = [&] {
      eo.window = parse_calendar_window(window);
      eo.action = parse_action(exposure_action);
      const Dataset d = load_records(exposure_in);
      const LabelMap labels = load_labels(exposure_labels);
      const auto engagement = metrics::user_engagement(d, labels, eo.action);
      if (engagement.ties_excluded > 0) {
        warn(std::to_string(engagement.ties_excluded) + " user(s) split evenly between sides; excluded");
      }
      for (Label l : engagement.degenerate) {
        warn(std::string(to_string(l)) + " community has a degenerate range; standardized to 0");
      }
      const auto rows = metrics::exposure_curves(d, labels, eo);
      for (Label l : {Label::pro, Label::anti}) {
        const bool present = std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.community == l; });
        if (!present) warn(std::string(to_string(l)) + " community has too few users for a curve; omitted");
      }
      const auto out_file = out_path(g, exposure_out);
      {
        auto out = open_out(out_file);
        metrics::write_exposure_csv(out, rows);
      }
      write_manifest(g, *exposure, {exposure_in, exposure_labels}, {out_file});
    };
  });

  // timeline
  auto* timeline = app.add_subcommand("timeline", "Quarterly activity series");
  std::string timeline_in, timeline_labels, timeline_out = "series.csv";
  timeline->add_option("--in", timeline_in)->required();
  timeline->add_option("--labels", timeline_labels)->required();
  timeline->add_option("--out", timeline_out)->capture_default_str();
  timeline->callback([&] {
    action = [&] {
      const Dataset d = load_records(timeline_in);
      const auto series = temporal::activity_series(d, load_labels(timeline_labels));
      const auto out_file = out_path(g, timeline_out);
      {
        auto out = open_out(out_file);
        temporal::write_series_csv(out, series);
      }
      write_manifest(g, *timeline, {timeline_in, timeline_labels}, {out_file});
    };
  });

  // cohesion
  auto* cohesion = app.add_subcommand("cohesion", "Quarterly largest-community sizes");
  std::string cohesion_in, cohesion_labels, cohesion_action = "like", algorithms = "all";
  std::string cohesion_out = "cohesion.csv";
  bool cumulative = false;
  cohesion->add_option("--in", cohesion_in)->required();
  cohesion->add_option("--labels", cohesion_labels)->required();
  cohesion->add_option("--action", cohesion_action)->capture_default_str();
  cohesion->add_option("--algorithms", algorithms, "all, or a list including components")
      ->capture_default_str();
  cohesion->add_flag("--cumulative", cumulative, "Windows from the first quarter to date");
  cohesion->add_option("--out", cohesion_out)->capture_default_str();
  cohesion->callback([&] {
    action = [&] {
      temporal::CohesionOptions co;
      co.action = parse_action(cohesion_action);
      co.cumulative = cumulative;
      co.seed = derive_seed(g.seed, "cohesion", "detect");
      co.threads = g.threads;
      for (const auto& name : split_commas(algorithms)) {
        if (name == "all") {
          co.methods.push_back({true});
          for (auto alg : community::kAllAlgorithms) co.methods.push_back({false, alg});
        } else if (name == "components") {
          co.methods.push_back({true});
        } else {
          co.methods.push_back({false, community::parse_algorithm(name)});
        }
      }
      if (co.methods.empty()) throw std::invalid_argument("--algorithms is empty");
      const Dataset d = load_records(cohesion_in);
      const auto points = temporal::cohesion_series(d, load_labels(cohesion_labels), co);
      std::size_t thin = 0;
      for (const auto& p : points) thin += p.degenerate;
      if (thin > 0) warn(std::to_string(thin) + " point(s) with fewer than two active pages");
      const auto out_file = out_path(g, cohesion_out);
      {
        auto out = open_out(out_file);
        temporal::write_cohesion_csv(out, points);
      }
      write_manifest(g, *cohesion, {cohesion_in, cohesion_labels}, {out_file});
    };
  });

  // anova
  auto* anova = app.add_subcommand("anova", "Sentiment x epoch tests on quarterly activity");
  std::string anova_in, anova_labels, anova_out = "anova.csv";
  std::vector<std::string> dvs, splits;
  anova->add_option("--in", anova_in)->required();
  anova->add_option("--labels", anova_labels)->required();
  anova->add_option("--dv", dvs, "Measure list per analysis, e.g. posts,likes (repeatable)");
  anova->add_option("--split", splits, "Last quarter of the first epoch per analysis");
  anova->add_option("--out", anova_out)->capture_default_str();
  anova->callback([&] {
    action = [&] {
      if (dvs.empty() && splits.empty()) {
        dvs = {"posts,likes", "comments", "users_comments,users_likes"};
        splits = {"2012Q4", "2014Q4", "2015Q4"};
      }
      if (dvs.size() != splits.size()) throw std::invalid_argument("give one --split per --dv");
      const Dataset d = load_records(anova_in);
      const auto series = temporal::activity_series(d, load_labels(anova_labels));
      const auto out_file = out_path(g, anova_out);
      {
        auto out = open_out(out_file);
        out << "split,dv,test,effect,F,df1,df2,p,partial_eta2,pillai\n";
        auto row = [&](const std::string& split, const std::string& dv, std::string_view test,
                       std::string_view effect, const temporal::AnovaResult& r, std::string pillai) {
          out << split << ',' << csv::escape(dv) << ',' << test << ',' << effect << ',' << fmt(r.F)
              << ',' << r.df1 << ',' << r.df2 << ',' << fmt(r.p) << ',' << fmt(r.partial_eta2)
              << ',' << pillai << '\n';
          if (r.degenerate) warn(dv + " @ " + split + ": degenerate " + std::string(effect) + " test");
        };
        for (std::size_t i = 0; i < dvs.size(); ++i) {
          std::vector<temporal::Measure> measures;
          for (const auto& m : split_commas(dvs[i])) measures.push_back(temporal::parse_measure(m));
          if (measures.empty()) throw std::invalid_argument("empty --dv");
          const auto obs = temporal::observations_from_series(series, measures,
                                                              Quarter::parse(splits[i]));
          if (measures.size() == 1) {
            std::vector<temporal::Observation> uni;
            for (const auto& o : obs) uni.push_back({o.sentiment, o.epoch, o.values[0]});
            const auto a = temporal::two_way_anova(uni);
            row(splits[i], dvs[i], "anova", "sentiment", a.sentiment, "");
            row(splits[i], dvs[i], "anova", "epoch", a.epoch, "");
            row(splits[i], dvs[i], "anova", "interaction", a.interaction, "");
          } else {
            const auto m = temporal::manova_pillai(obs);
            row(splits[i], dvs[i], "manova", "interaction", m.test, fmt(m.trace));
          }
        }
      }
      write_manifest(g, *anova, {anova_in, anova_labels}, {out_file});
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (action) action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
