#include "polarnet/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <tuple>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "polarnet/csv.hpp"
#include "polarnet/graph.hpp"
#include "polarnet/parallel.hpp"

namespace polarnet::temporal {

std::string_view to_string(Measure measure) {
  switch (measure) {
    case Measure::active_pages_post:
      return "active_pages_post";
    case Measure::active_pages_like:
      return "active_pages_like";
    case Measure::active_pages_comment:
      return "active_pages_comment";
    case Measure::active_users_like:
      return "active_users_like";
    case Measure::active_users_comment:
      return "active_users_comment";
  }
  return "?";
}

Measure parse_measure(std::string_view text) {
  for (Measure m : kAllMeasures) {
    if (text == to_string(m)) return m;
  }
  // Short names used on the command line.
  if (text == "posts") return Measure::active_pages_post;
  if (text == "likes") return Measure::active_pages_like;
  if (text == "comments") return Measure::active_pages_comment;
  if (text == "users_likes") return Measure::active_users_like;
  if (text == "users_comments") return Measure::active_users_comment;
  throw std::invalid_argument("unknown measure '" + std::string(text) + "'");
}

namespace {

std::vector<Quarter> quarter_range(const Dataset& dataset) {
  std::vector<Quarter> out;
  if (dataset.empty()) return out;
  const Quarter first = Quarter::of(dataset.records().front().ts);
  const Quarter last = Quarter::of(dataset.records().back().ts);
  for (Quarter q = first; q <= last; q = q.next()) out.push_back(q);
  return out;
}

}  // namespace

std::vector<SeriesPoint> activity_series(const Dataset& dataset, const LabelMap& labels) {
  const std::vector<Quarter> quarters = quarter_range(dataset);
  using Key = std::tuple<Quarter, Label, Measure>;
  std::map<Key, std::set<std::string_view>> active;
  for (const auto& r : dataset.records()) {
    const Label label = label_of(labels, r.page);
    if (label == Label::unlabeled) continue;
    const Quarter q = Quarter::of(r.ts);
    switch (r.action) {
      case Action::post:
        active[{q, label, Measure::active_pages_post}].insert(r.page);
        break;
      case Action::like:
        active[{q, label, Measure::active_pages_like}].insert(r.page);
        active[{q, label, Measure::active_users_like}].insert(r.user);
        break;
      case Action::comment:
        active[{q, label, Measure::active_pages_comment}].insert(r.page);
        active[{q, label, Measure::active_users_comment}].insert(r.user);
        break;
    }
  }
  std::vector<SeriesPoint> series;
  for (const Quarter& q : quarters) {
    for (Label label : {Label::pro, Label::anti}) {
      for (Measure m : kAllMeasures) {
        auto it = active.find({q, label, m});
        series.push_back({q, label, m, it == active.end() ? 0 : it->second.size()});
      }
    }
  }
  return series;
}

void write_series_csv(std::ostream& out, std::span<const SeriesPoint> series) {
  out << "quarter,community,measure,count\n";
  for (const auto& p : series) {
    out << p.quarter.to_string() << ',' << to_string(p.community) << ',' << to_string(p.measure)
        << ',' << p.count << '\n';
  }
}

std::string CohesionMethod::name() const {
  return components ? std::string("components") : std::string(community::to_string(algorithm));
}

std::vector<CohesionPoint> cohesion_series(const Dataset& dataset, const LabelMap& labels,
                                           const CohesionOptions& options) {
  const std::vector<Quarter> quarters = quarter_range(dataset);
  std::vector<std::vector<CohesionPoint>> per_quarter(quarters.size());

  parallel_for(quarters.size(), options.threads, [&](std::size_t qi) {
    const Quarter& quarter = quarters[qi];
    TimeWindow window = quarter.window();
    if (options.cumulative) window.begin = quarters.front().window().begin;
    const BipartiteGraph bipartite = build_bipartite(dataset, options.action, window);
    const ProjectionGraph projection = project(bipartite);

    for (Label side : {Label::pro, Label::anti}) {
      std::vector<std::string> active;
      for (const auto& page : bipartite.active_pages()) {
        if (label_of(labels, page) == side) active.push_back(page);
      }
      const ProjectionGraph sub = induced_subgraph(projection, active);
      for (const auto& method : options.methods) {
        CohesionPoint point{quarter, side, method, 0, active.size(), false};
        if (active.size() < 2) {
          point.largest = point.total;
          point.degenerate = true;
        } else {
          const Partition partition = method.components
                                          ? connected_components(sub)
                                          : community::detect(sub, method.algorithm, options.seed);
          auto sizes = partition.community_sizes();
          point.largest = *std::max_element(sizes.begin(), sizes.end());
        }
        per_quarter[qi].push_back(point);
      }
    }
  });

  std::vector<CohesionPoint> out;
  for (auto& points : per_quarter) out.insert(out.end(), points.begin(), points.end());
  return out;
}

void write_cohesion_csv(std::ostream& out, std::span<const CohesionPoint> points) {
  out << "quarter,community,algorithm,largest,total\n";
  for (const auto& p : points) {
    out << p.quarter.to_string() << ',' << to_string(p.community) << ',' << p.method.name() << ','
        << p.largest << ',' << p.total << '\n';
  }
}

// ---------------------------------------------------------------------------
// Linear models

namespace {

using Matrix = Eigen::MatrixXd;

struct Design {
  Matrix y;     // N x p
  Matrix full;  // 1, a, b, ab
  Matrix additive;
  Matrix only_a;
  Matrix only_b;
};

template <typename Obs, typename ValueFn>
Design make_design(std::span<const Obs> observations, std::size_t p, ValueFn values) {
  std::size_t cell_count[2][2] = {{0, 0}, {0, 0}};
  for (const auto& o : observations) {
    ++cell_count[static_cast<int>(o.sentiment)][static_cast<int>(o.epoch)];
  }
  for (int s = 0; s < 2; ++s) {
    for (int e = 0; e < 2; ++e) {
      if (cell_count[s][e] < 2) {
        throw std::invalid_argument(std::string("cell (") + (s == 0 ? "pro" : "anti") + ", " +
                                    (e == 0 ? "before" : "after") +
                                    ") needs at least two observations");
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(observations.size());
  Design d;
  d.y.resize(n, static_cast<Eigen::Index>(p));
  d.full.resize(n, 4);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = observations[static_cast<std::size_t>(i)];
    const double a = o.sentiment == Sentiment::pro ? 1.0 : -1.0;
    const double b = o.epoch == Epoch::before ? 1.0 : -1.0;
    d.full.row(i) << 1.0, a, b, a * b;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
      d.y(i, j) = values(o, static_cast<std::size_t>(j));
    }
  }
  d.additive = d.full.leftCols(3);
  d.only_a = d.full.leftCols(2);
  d.only_b.resize(n, 2);
  d.only_b << d.full.col(0), d.full.col(2);
  return d;
}

/// Residual sums of squares and cross-products after least-squares fit.
Matrix residual_sscp(const Matrix& x, const Matrix& y) {
  const Matrix beta = x.colPivHouseholderQr().solve(y);
  const Matrix resid = y - x * beta;
  return resid.transpose() * resid;
}

AnovaResult f_test(double ss_effect, double ss_error, std::size_t df_error) {
  AnovaResult r;
  r.df1 = 1;
  r.df2 = df_error;
  ss_effect = std::max(ss_effect, 0.0);
  ss_error = std::max(ss_error, 0.0);
  const double scale = ss_effect + ss_error;
  if (scale == 0.0 || ss_effect <= 1e-13 * scale) {
    r.degenerate = scale == 0.0;
    r.F = 0.0;
    r.p = 1.0;
    r.partial_eta2 = 0.0;
    if (scale == 0.0) return r;
    ss_effect = 0.0;
  }
  if (ss_error <= 1e-13 * scale) {
    r.degenerate = true;
    r.F = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    r.partial_eta2 = 1.0;
    return r;
  }
  r.F = (ss_effect / 1.0) / (ss_error / static_cast<double>(df_error));
  r.p = f_tail(r.F, 1.0, static_cast<double>(df_error));
  r.partial_eta2 = ss_effect / (ss_effect + ss_error);
  return r;
}

}  // namespace

TwoWayAnova two_way_anova(std::span<const Observation> observations) {
  const Design d = make_design(observations, 1, [](const Observation& o, std::size_t) {
    return o.value;
  });
  const std::size_t n = observations.size();
  TwoWayAnova out;

  const bool constant = std::all_of(observations.begin(), observations.end(), [&](const auto& o) {
    return o.value == observations.front().value;
  });
  if (constant) {
    for (AnovaResult* r : {&out.sentiment, &out.epoch, &out.interaction}) {
      r->df1 = 1;
      r->df2 = n - 4;
      r->degenerate = true;
    }
    return out;
  }

  const double rss_full = residual_sscp(d.full, d.y)(0, 0);
  const double rss_additive = residual_sscp(d.additive, d.y)(0, 0);
  const double rss_a = residual_sscp(d.only_a, d.y)(0, 0);
  const double rss_b = residual_sscp(d.only_b, d.y)(0, 0);

  const double mean = d.y.mean();
  out.ss_total = (d.y.array() - mean).square().sum();
  out.ss_error = rss_full;
  out.ss_interaction = rss_additive - rss_full;
  out.ss_sentiment = rss_b - rss_additive;
  out.ss_epoch = rss_a - rss_additive;

  out.sentiment = f_test(out.ss_sentiment, out.ss_error, n - 4);
  out.epoch = f_test(out.ss_epoch, out.ss_error, n - 4);
  out.interaction = f_test(out.ss_interaction, out.ss_error, n - 4);
  return out;
}

PillaiResult manova_pillai(std::span<const MultiObservation> observations) {
  if (observations.empty()) throw std::invalid_argument("no observations");
  const std::size_t p = observations.front().values.size();
  if (p == 0) throw std::invalid_argument("need at least one dependent variable");
  for (const auto& o : observations) {
    if (o.values.size() != p) {
      throw std::invalid_argument("observations have differing numbers of dependent variables");
    }
  }
  const Design d = make_design(observations, p, [](const MultiObservation& o, std::size_t j) {
    return o.values[j];
  });
  const std::size_t n = observations.size();
  if (n < 4 + p) throw std::invalid_argument("too few observations for the error degrees of freedom");

  PillaiResult result;
  result.test.df1 = p;
  result.test.df2 = n - 4 - p + 1;

  const Matrix error = residual_sscp(d.full, d.y);
  const Matrix hypothesis = residual_sscp(d.additive, d.y) - error;
  const Matrix both = hypothesis + error;
  const double scale = both.cwiseAbs().maxCoeff();
  const double y_scale = std::max(1.0, d.y.cwiseAbs().maxCoeff());
  if (scale <= 1e-20 * y_scale * y_scale * static_cast<double>(n)) {
    result.test.degenerate = true;
    return result;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(error);
  const double max_eig = eig.eigenvalues().maxCoeff();
  if (!(eig.eigenvalues().minCoeff() > 1e-10 * max_eig)) {
    throw std::domain_error("error SSCP matrix is singular (collinear dependent variables)");
  }

  const Matrix z = both.ldlt().solve(hypothesis);
  const double v = std::clamp(z.trace(), 0.0, 1.0);
  result.trace = v;
  result.test.partial_eta2 = v;
  if (v >= 1.0) {
    result.test.F = std::numeric_limits<double>::infinity();
    result.test.p = 0.0;
    result.test.degenerate = true;
    return result;
  }
  const double df1 = static_cast<double>(result.test.df1);
  const double df2 = static_cast<double>(result.test.df2);
  result.test.F = (df2 / df1) * v / (1.0 - v);
  result.test.p = f_tail(result.test.F, df1, df2);
  return result;
}

double f_tail(double F, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw std::invalid_argument("F degrees of freedom must be positive");
  if (std::isnan(F) || F < 0.0) throw std::invalid_argument("F statistic must be non-negative");
  if (F == 0.0) return 1.0;
  if (std::isinf(F)) return 0.0;
  // P(X > F) = I_{d2 / (d2 + d1 F)}(d2 / 2, d1 / 2)
  const double x = df2 / (df2 + df1 * F);
  return boost::math::ibeta(df2 / 2.0, df1 / 2.0, x);
}

std::vector<MultiObservation> observations_from_series(std::span<const SeriesPoint> series,
                                                       std::span<const Measure> measures,
                                                       Quarter split) {
  std::map<std::pair<Quarter, Label>, std::vector<double>> values;
  for (const auto& point : series) {
    auto it = std::find(measures.begin(), measures.end(), point.measure);
    if (it == measures.end()) continue;
    auto& v = values[{point.quarter, point.community}];
    v.resize(measures.size(), 0.0);
    v[static_cast<std::size_t>(it - measures.begin())] = static_cast<double>(point.count);
  }
  std::vector<MultiObservation> out;
  for (const auto& [key, v] : values) {
    out.push_back({key.second == Label::pro ? Sentiment::pro : Sentiment::anti,
                   key.first <= split ? Epoch::before : Epoch::after, v});
  }
  return out;
}

}  // namespace polarnet::temporal
