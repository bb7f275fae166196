#include <doctest.h>

#include <cmath>
#include <sstream>

#include "polarnet/synth.hpp"
#include "polarnet/temporal.hpp"
#include "quadrature.hpp"
#include "support.hpp"

using namespace polarnet;
using namespace polarnet::temporal;
using testing::comment;
using testing::like;
using testing::post;

namespace {

std::map<std::tuple<Quarter, Label, Measure>, std::size_t> as_map(const std::vector<SeriesPoint>& s) {
  std::map<std::tuple<Quarter, Label, Measure>, std::size_t> m;
  for (const auto& p : s) m[{p.quarter, p.community, p.measure}] = p.count;
  return m;
}

std::vector<Observation> balanced_fixture() {
  // cell means (10, 10, 10, 20), residuals (-1, 0, 1)
  std::vector<Observation> obs;
  const double means[2][2] = {{10, 10}, {10, 20}};
  for (int s = 0; s < 2; ++s) {
    for (int e = 0; e < 2; ++e) {
      for (double r : {-1.0, 0.0, 1.0}) {
        obs.push_back({static_cast<Sentiment>(s), static_cast<Epoch>(e), means[s][e] + r});
      }
    }
  }
  return obs;
}

/// Pillai V for the interaction of a 2x2 design with two DVs, written out
/// with explicit 2x2 matrix algebra from cell means.
double straight_line_pillai(const std::vector<MultiObservation>& obs) {
  double sum[2][2][2] = {}, n[2][2] = {};
  for (const auto& o : obs) {
    const int s = static_cast<int>(o.sentiment), e = static_cast<int>(o.epoch);
    n[s][e] += 1;
    sum[s][e][0] += o.values[0];
    sum[s][e][1] += o.values[1];
  }
  double mean[2][2][2];
  for (int s = 0; s < 2; ++s)
    for (int e = 0; e < 2; ++e)
      for (int k = 0; k < 2; ++k) mean[s][e][k] = sum[s][e][k] / n[s][e];
  double E[2][2] = {};
  for (const auto& o : obs) {
    const int s = static_cast<int>(o.sentiment), e = static_cast<int>(o.epoch);
    const double r0 = o.values[0] - mean[s][e][0], r1 = o.values[1] - mean[s][e][1];
    E[0][0] += r0 * r0;
    E[0][1] += r0 * r1;
    E[1][1] += r1 * r1;
  }
  E[1][0] = E[0][1];
  // Interaction contrast; in a balanced design H = c c' * n_cell / 4.
  double c[2];
  for (int k = 0; k < 2; ++k) c[k] = mean[0][0][k] - mean[0][1][k] - mean[1][0][k] + mean[1][1][k];
  const double w = 1.0 / (1.0 / n[0][0] + 1.0 / n[0][1] + 1.0 / n[1][0] + 1.0 / n[1][1]);
  const double H[2][2] = {{w * c[0] * c[0], w * c[0] * c[1]}, {w * c[1] * c[0], w * c[1] * c[1]}};
  const double T[2][2] = {{H[0][0] + E[0][0], H[0][1] + E[0][1]}, {H[1][0] + E[1][0], H[1][1] + E[1][1]}};
  const double det = T[0][0] * T[1][1] - T[0][1] * T[1][0];
  const double Ti[2][2] = {{T[1][1] / det, -T[0][1] / det}, {-T[1][0] / det, T[0][0] / det}};
  double trace = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) trace += H[i][k] * Ti[k][i];
  return trace;
}

}  // namespace

TEST_CASE("activity series single records") {
  const LabelMap labels{{"p", Label::pro}, {"a1", Label::anti}, {"a2", Label::anti}, {"a3", Label::anti}};
  const Dataset one({post("p", "x", "2014-02-10T00:00:00Z")});
  const auto s = as_map(activity_series(one, labels));
  CHECK(s.size() == 10);
  CHECK(s.at({Quarter{2014, 1}, Label::pro, Measure::active_pages_post}) == 1);
  std::size_t others = 0;
  for (const auto& [k, v] : s) others += v;
  CHECK(others == 1);

  const Dataset three({like("u", "a1", "2015-04-01T00:00:00Z"), like("u", "a2", "2015-05-01T00:00:00Z"),
                       like("u", "a3", "2015-06-30T23:59:59Z")});
  const auto t = as_map(activity_series(three, labels));
  CHECK(t.at({Quarter{2015, 2}, Label::anti, Measure::active_users_like}) == 1);
  CHECK(t.at({Quarter{2015, 2}, Label::anti, Measure::active_pages_like}) == 3);
  CHECK(activity_series(Dataset{}, labels).empty());
}

TEST_CASE("activity series matches a brute-force group-by") {
  synth::SynthConfig c;
  c.users_per_side = {15, 15};
  c.pages_per_side = {4, 3};
  c.posts_per_page = 3;
  c.p_out = 0.2;
  c.comment_fraction = 0.4;
  c.actions_per_user = synth::ActivityDistribution::fixed(6);
  c.first_day = days_from_civil(2013, 1, 1);
  c.last_day = days_from_civil(2015, 12, 31);
  c.seed = 21;
  auto g = synth::generate(c);
  auto labels = g.labels;
  labels.erase(labels.begin());  // an unlabeled page must not count anywhere
  const auto series = activity_series(g.dataset, labels);
  std::map<std::tuple<Quarter, Label, Measure>, std::set<std::string>> oracle;
  for (const auto& r : g.dataset.records()) {
    const Label l = label_of(labels, r.page);
    if (l == Label::unlabeled) continue;
    const Quarter q = Quarter::of(r.ts);
    if (r.action == Action::post) oracle[{q, l, Measure::active_pages_post}].insert(r.page);
    if (r.action == Action::like) {
      oracle[{q, l, Measure::active_pages_like}].insert(r.page);
      oracle[{q, l, Measure::active_users_like}].insert(r.user);
    }
    if (r.action == Action::comment) {
      oracle[{q, l, Measure::active_pages_comment}].insert(r.page);
      oracle[{q, l, Measure::active_users_comment}].insert(r.user);
    }
  }
  std::size_t quarters = 0;
  for (Quarter q = Quarter::of(g.dataset.records().front().ts); q <= Quarter::of(g.dataset.records().back().ts);
       q = q.next()) {
    ++quarters;
  }
  CHECK(quarters <= 12);
  CHECK(series.size() == quarters * 2 * 5);
  for (const auto& p : series) {
    auto it = oracle.find({p.quarter, p.community, p.measure});
    CHECK(p.count == (it == oracle.end() ? 0 : it->second.size()));
  }
  std::ostringstream out;
  write_series_csv(out, series);
  const std::string first = Quarter::of(g.dataset.records().front().ts).to_string();
  CHECK(out.str().rfind("quarter,community,measure,count\n" + first + ",pro,active_pages_post,", 0) == 0);
}

TEST_CASE("cohesion on hand topologies") {
  const LabelMap labels{{"p1", Label::pro}, {"p2", Label::pro}, {"p3", Label::pro}, {"p4", Label::pro},
                        {"p5", Label::pro}, {"a1", Label::anti}};
  CohesionOptions o;
  o.methods.push_back({true});
  for (auto alg : community::kAllAlgorithms) o.methods.push_back({false, alg});

  SUBCASE("one user likes every page") {
    std::vector<InteractionRecord> recs;
    for (int i = 1; i <= 5; ++i) recs.push_back(like("u", "p" + std::to_string(i), "2014-02-01T00:00:00Z"));
    recs.push_back(like("v", "a1", "2014-02-01T00:00:00Z"));
    const auto points = cohesion_series(Dataset(recs), labels, o);
    REQUIRE(points.size() == 2 * o.methods.size());
    for (const auto& p : points) {
      if (p.community == Label::pro) {
        CHECK(p.largest == 5);
        CHECK(p.total == 5);
        CHECK_FALSE(p.degenerate);
      } else {
        CHECK(p.total == 1);
        CHECK(p.largest == 1);
        CHECK(p.degenerate);
      }
    }
  }
  SUBCASE("two user-disjoint groups") {
    std::vector<InteractionRecord> recs;
    for (int i = 1; i <= 3; ++i) recs.push_back(like("u", "p" + std::to_string(i), "2014-02-01T00:00:00Z"));
    for (int i = 4; i <= 5; ++i) recs.push_back(like("v", "p" + std::to_string(i), "2014-02-01T00:00:00Z"));
    for (const auto& p : cohesion_series(Dataset(recs), labels, o)) {
      if (p.community != Label::pro) continue;
      CHECK(p.largest == 3);
      CHECK(p.total == 5);
    }
  }
  SUBCASE("windows and cumulative mode") {
    const Dataset d({like("u", "p1", "2014-02-01T00:00:00Z"), like("u", "p2", "2014-02-01T00:00:00Z"),
                     like("w", "p3", "2014-05-01T00:00:00Z"), like("w", "p4", "2014-05-01T00:00:00Z")});
    CohesionOptions c = o;
    c.methods = {{true}};
    auto per = cohesion_series(d, labels, c);
    REQUIRE(per.size() == 4);
    CHECK(per[0].quarter == Quarter{2014, 1});
    CHECK(per[2].largest == 2);
    CHECK(per[2].total == 2);
    c.cumulative = true;
    auto cum = cohesion_series(d, labels, c);
    CHECK(cum[2].total == 4);
    CHECK(cum[2].largest == 2);
  }
}

TEST_CASE("cohesion invariants and thread independence") {
  synth::SynthConfig c;
  c.users_per_side = {120, 120};
  c.pages_per_side = {9, 7};
  c.first_day = days_from_civil(2014, 1, 1);
  c.last_day = days_from_civil(2015, 6, 30);
  c.seed = 13;
  const auto g = synth::generate(c);
  CohesionOptions o;
  o.methods.push_back({true});
  for (auto alg : community::kAllAlgorithms) o.methods.push_back({false, alg});
  o.seed = 5;
  const auto one = cohesion_series(g.dataset, g.labels, o);
  o.threads = 3;
  const auto three = cohesion_series(g.dataset, g.labels, o);
  std::ostringstream a, b;
  write_cohesion_csv(a, one);
  write_cohesion_csv(b, three);
  CHECK(a.str() == b.str());
  for (const auto& p : one) CHECK(p.largest <= p.total);
  CHECK(a.str().rfind("quarter,community,algorithm,largest,total\n2014Q1,pro,components,", 0) == 0);
}

TEST_CASE("f_tail") {
  CHECK(f_tail(0.0, 3, 7) == 1.0);
  for (double d : {1.0, 2.0, 5.0, 30.0, 101.0}) CHECK(std::abs(f_tail(1.0, d, d) - 0.5) <= 1e-9);
  for (auto [F, d1, d2] : {std::tuple{5.053, 1.0, 56.0}, {12.218, 2.0, 55.0}, {2.708, 2.0, 55.0},
                           {0.3, 4.0, 9.0}, {3.0, 1.0, 3.0}}) {
    CHECK(std::abs(f_tail(F, d1, d2) - testing::f_tail_quadrature(F, d1, d2)) <= 1e-7);
  }
  double prev = 1.0;
  for (double F = 0.0; F < 20.0; F += 0.05) {
    const double p = f_tail(F, 2, 55);
    CHECK(p <= prev);
    CHECK(p >= 0.0);
    prev = p;
  }
  CHECK_THROWS(f_tail(-1.0, 1, 1));
  CHECK_THROWS(f_tail(1.0, 0, 1));
}

TEST_CASE("reported F statistics reproduce their p-values and effect sizes") {
  CHECK(std::round(f_tail(5.053, 1, 56) * 1000.0) / 1000.0 == doctest::Approx(0.029));
  CHECK(std::round(f_tail(2.708, 2, 55) * 1000.0) / 1000.0 == doctest::Approx(0.076));
  CHECK(f_tail(12.218, 2, 55) < 0.001);
  // partial eta^2 and Pillai V implied by F at these degrees of freedom
  auto implied = [](double F, double d1, double d2) { return F * d1 / (F * d1 + d2); };
  CHECK(std::round(implied(5.053, 1, 56) * 100.0) / 100.0 == doctest::Approx(0.08));
  CHECK(std::round(implied(2.708, 2, 55) * 100.0) / 100.0 == doctest::Approx(0.09));
  CHECK(std::round(implied(12.218, 2, 55) * 100.0) / 100.0 == doctest::Approx(0.31));
}

TEST_CASE("two-way anova closed form") {
  const auto a = two_way_anova(balanced_fixture());
  CHECK(a.interaction.df1 == 1);
  CHECK(a.interaction.df2 == 8);
  CHECK(std::abs(a.ss_interaction - 75.0) <= 1e-9);
  CHECK(std::abs(a.ss_error - 8.0) <= 1e-9);
  CHECK(std::abs(a.interaction.F - 75.0) <= 1e-9);
  CHECK(std::abs(a.interaction.partial_eta2 - 75.0 / 83.0) <= 1e-12);
  CHECK(a.interaction.p == doctest::Approx(f_tail(75.0, 1, 8)));
  CHECK(std::abs(a.ss_sentiment + a.ss_epoch + a.ss_interaction + a.ss_error - a.ss_total) <=
        1e-9 * a.ss_total);
}

TEST_CASE("balanced decomposition holds on random data") {
  Rng rng(31, 1);
  for (int t = 0; t < 20; ++t) {
    std::vector<Observation> obs;
    const int per_cell = 2 + static_cast<int>(rng.below(10));
    for (int s = 0; s < 2; ++s)
      for (int e = 0; e < 2; ++e)
        for (int i = 0; i < per_cell; ++i)
          obs.push_back({static_cast<Sentiment>(s), static_cast<Epoch>(e), 100.0 * rng.normal() + s * 30.0});
    const auto a = two_way_anova(obs);
    CHECK(std::abs(a.ss_sentiment + a.ss_epoch + a.ss_interaction + a.ss_error - a.ss_total) <=
          1e-9 * a.ss_total);
    for (const auto* r : {&a.sentiment, &a.epoch, &a.interaction}) {
      CHECK(r->p >= 0.0);
      CHECK(r->p <= 1.0);
      CHECK(r->df2 == obs.size() - 4);
    }
  }
}

TEST_CASE("unbalanced designs use type II sums") {
  // With a zero interaction contrast in cell means the interaction SS is 0
  // regardless of cell sizes.
  std::vector<Observation> obs;
  const double means[2][2] = {{1, 3}, {5, 7}};
  const int sizes[2][2] = {{2, 6}, {4, 10}};
  for (int s = 0; s < 2; ++s)
    for (int e = 0; e < 2; ++e)
      for (int i = 0; i < sizes[s][e]; ++i)
        obs.push_back({static_cast<Sentiment>(s), static_cast<Epoch>(e), means[s][e] + (i % 2 ? 0.5 : -0.5)});
  const auto a = two_way_anova(obs);
  CHECK(a.ss_interaction == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(a.sentiment.F > 0.0);
  CHECK(a.epoch.F > 0.0);
}

TEST_CASE("anova degenerate and invalid inputs") {
  std::vector<Observation> flat;
  for (int s = 0; s < 2; ++s)
    for (int e = 0; e < 2; ++e)
      for (int i = 0; i < 3; ++i) flat.push_back({static_cast<Sentiment>(s), static_cast<Epoch>(e), 4.2});
  const auto a = two_way_anova(flat);
  for (const auto* r : {&a.sentiment, &a.epoch, &a.interaction}) {
    CHECK(r->degenerate);
    CHECK(r->F == 0.0);
    CHECK(r->p == 1.0);
  }
  auto missing = balanced_fixture();
  missing.erase(std::remove_if(missing.begin(), missing.end(),
                               [](const Observation& o) {
                                 return o.sentiment == Sentiment::anti && o.epoch == Epoch::after;
                               }),
                missing.end());
  try {
    (void)two_way_anova(missing);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("anti, after") != std::string::npos);
  }
}

TEST_CASE("pillai with one dependent variable is the univariate F") {
  Rng rng(41, 2);
  for (int t = 0; t < 10; ++t) {
    std::vector<Observation> uni;
    std::vector<MultiObservation> multi;
    for (int s = 0; s < 2; ++s)
      for (int e = 0; e < 2; ++e)
        for (int i = 0; i < 15; ++i) {
          const double v = rng.normal() + (s == 1 && e == 1 ? 0.8 : 0.0);
          uni.push_back({static_cast<Sentiment>(s), static_cast<Epoch>(e), v});
          multi.push_back({static_cast<Sentiment>(s), static_cast<Epoch>(e), {v}});
        }
    const auto a = two_way_anova(uni);
    const auto m = manova_pillai(multi);
    CHECK(std::abs(m.test.F - a.interaction.F) <= 1e-9 * std::max(1.0, a.interaction.F));
    CHECK(m.test.df1 == 1);
    CHECK(m.test.df2 == a.interaction.df2);
    CHECK(std::abs(m.test.p - a.interaction.p) <= 1e-9);
    CHECK(std::abs(m.trace - a.interaction.partial_eta2) <= 1e-9);
  }
}

TEST_CASE("pillai matches a straight-line 2x2 evaluation") {
  Rng rng(7, 9);
  for (int t = 0; t < 10; ++t) {
    std::vector<MultiObservation> obs;
    for (int s = 0; s < 2; ++s)
      for (int e = 0; e < 2; ++e)
        for (int i = 0; i < 15; ++i) {
          const double v = 5.0 + rng.normal() + (s == e ? 1.0 : 0.0);
          obs.push_back({static_cast<Sentiment>(s), static_cast<Epoch>(e), {v, 3.0 * rng.normal()}});
        }
    const auto m = manova_pillai(obs);
    const double v = straight_line_pillai(obs);
    CHECK(std::abs(m.trace - v) <= 1e-9);
    CHECK(m.test.df1 == 2);
    CHECK(m.test.df2 == 55);
    const double F = (55.0 / 2.0) * v / (1.0 - v);
    CHECK(std::abs(m.test.F - F) <= 1e-9 * std::max(1.0, F));
    CHECK(m.test.partial_eta2 == m.trace);
  }
}

TEST_CASE("pillai degenerate and singular cases") {
  std::vector<MultiObservation> flat;
  for (int s = 0; s < 2; ++s)
    for (int e = 0; e < 2; ++e)
      for (int i = 0; i < 3; ++i) flat.push_back({static_cast<Sentiment>(s), static_cast<Epoch>(e), {2.0, 5.0}});
  const auto m = manova_pillai(flat);
  CHECK(m.trace == 0.0);
  CHECK(m.test.degenerate);

  std::vector<MultiObservation> collinear;
  Rng rng(1, 1);
  for (int s = 0; s < 2; ++s)
    for (int e = 0; e < 2; ++e)
      for (int i = 0; i < 4; ++i) {
        const double v = rng.normal();
        collinear.push_back({static_cast<Sentiment>(s), static_cast<Epoch>(e), {v, 2.0 * v + 1.0}});
      }
  CHECK_THROWS_AS(manova_pillai(collinear), std::domain_error);
}

TEST_CASE("observations from a 30-quarter series have the expected shape") {
  std::vector<SeriesPoint> series;
  for (Quarter q{2010, 1}; q <= Quarter{2017, 2}; q = q.next()) {
    for (Label l : {Label::pro, Label::anti}) {
      for (Measure m : kAllMeasures) {
        series.push_back({q, l, m, static_cast<std::size_t>(q.year * 10 + q.q + (l == Label::pro ? 3 : 0) +
                                                            static_cast<int>(m))});
      }
    }
  }
  const Measure comments[] = {Measure::active_pages_comment};
  const auto obs = observations_from_series(series, comments, Quarter{2014, 4});
  REQUIRE(obs.size() == 60);
  std::size_t before = 0;
  for (const auto& o : obs) before += o.epoch == Epoch::before;
  CHECK(before == 2 * 20);
  std::vector<Observation> uni;
  for (const auto& o : obs) uni.push_back({o.sentiment, o.epoch, o.values[0]});
  const auto a = two_way_anova(uni);
  CHECK(a.interaction.df1 == 1);
  CHECK(a.interaction.df2 == 56);

  const Measure pair[] = {Measure::active_pages_post, Measure::active_pages_like};
  std::vector<SeriesPoint> noisy = series;
  Rng rng(5, 5);
  for (auto& p : noisy) p.count += rng.below(7);
  const auto m = manova_pillai(observations_from_series(noisy, pair, Quarter{2012, 4}));
  CHECK(m.test.df1 == 2);
  CHECK(m.test.df2 == 55);
}

TEST_CASE("measure names") {
  for (Measure m : kAllMeasures) CHECK(parse_measure(to_string(m)) == m);
  CHECK(parse_measure("comments") == Measure::active_pages_comment);
  CHECK(parse_measure("users_likes") == Measure::active_users_like);
  CHECK_THROWS(parse_measure("shares"));
}
