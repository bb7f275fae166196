#include "polarnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "polarnet/csv.hpp"

namespace polarnet::metrics {

SideMap sides_from_labels(const LabelMap& labels) {
  SideMap sides;
  for (const auto& [page, label] : labels) {
    if (label == Label::pro) sides.emplace(page, 0);
    if (label == Label::anti) sides.emplace(page, 1);
  }
  return sides;
}

SideMap sides_from_partition(const Partition& partition) {
  if (partition.community_count() < 2) {
    throw std::invalid_argument("need at least two communities to define sides");
  }
  auto sizes = partition.community_sizes();
  std::vector<CommunityId> order(sizes.size());
  for (CommunityId c = 0; c < order.size(); ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(),
                   [&](CommunityId a, CommunityId b) { return sizes[a] > sizes[b]; });
  SideMap sides;
  for (NodeIndex i = 0; i < partition.size(); ++i) {
    if (partition.community_of(i) == order[0]) sides.emplace(partition.nodes()[i], 0);
    if (partition.community_of(i) == order[1]) sides.emplace(partition.nodes()[i], 1);
  }
  return sides;
}

PolarizationProfile make_profile(std::string user, std::size_t x, std::size_t y) {
  if (x + y == 0) throw std::invalid_argument("polarization undefined for a user with no actions");
  PolarizationProfile p{std::move(user), x, y, 0.0};
  p.rho = (static_cast<double>(x) - static_cast<double>(y)) / static_cast<double>(x + y);
  return p;
}

std::vector<PolarizationProfile> user_polarization(const Dataset& dataset, Action action,
                                                   const SideMap& sides,
                                                   std::size_t min_actions) {
  if (sides.empty()) throw std::invalid_argument("side map is empty");
  std::map<std::string_view, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& r : dataset.records()) {
    if (r.action != action) continue;
    auto it = sides.find(r.page);
    if (it == sides.end()) continue;
    auto& c = counts[r.user];
    (it->second == 0 ? c.first : c.second) += 1;
  }
  std::vector<PolarizationProfile> out;
  for (const auto& [user, c] : counts) {
    if (c.first + c.second < min_actions || c.first + c.second == 0) continue;
    out.push_back(make_profile(std::string(user), c.first, c.second));
  }
  return out;
}

Histogram polarization_histogram(std::span<const PolarizationProfile> profiles, std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("histogram needs at least 2 bins");
  if (profiles.empty()) throw std::invalid_argument("histogram needs at least one profile");
  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(bins);
  }
  h.counts.assign(bins, 0);
  const double width = 2.0 / static_cast<double>(bins);
  for (const auto& p : profiles) {
    auto bin = static_cast<std::ptrdiff_t>(std::floor((p.rho + 1.0) / width));
    bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  h.total = profiles.size();
  h.density.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    h.density[i] = static_cast<double>(h.counts[i]) / (static_cast<double>(h.total) * width);
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const Histogram& histogram) {
  out << "bin_lo,bin_hi,count,density\n";
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    out << csv::format_real(histogram.edges[i]) << ',' << csv::format_real(histogram.edges[i + 1])
        << ',' << histogram.counts[i] << ',' << csv::format_real(histogram.density[i]) << '\n';
  }
}

namespace {

struct UserActions {
  std::size_t pro = 0;
  std::size_t anti = 0;
  Timestamp first = 0;
  Timestamp last = 0;
  std::set<std::string_view> pro_pages;
  std::set<std::string_view> anti_pages;
};

std::map<std::string_view, UserActions> collect_user_actions(const Dataset& dataset,
                                                             const LabelMap& labels,
                                                             Action action) {
  std::map<std::string_view, UserActions> users;
  for (const auto& r : dataset.records()) {
    if (r.action != action) continue;
    Label label = label_of(labels, r.page);
    if (label == Label::unlabeled) continue;
    auto [it, inserted] = users.try_emplace(r.user);
    UserActions& u = it->second;
    if (inserted) u.first = u.last = r.ts;
    u.first = std::min(u.first, r.ts);
    u.last = std::max(u.last, r.ts);
    if (label == Label::pro) {
      ++u.pro;
      u.pro_pages.insert(r.page);
    } else {
      ++u.anti;
      u.anti_pages.insert(r.page);
    }
  }
  return users;
}

Label majority(const UserActions& u) {
  if (u.pro > u.anti) return Label::pro;
  if (u.anti > u.pro) return Label::anti;
  return Label::unlabeled;
}

double min_max(double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; }

}  // namespace

EngagementResult user_engagement(const Dataset& dataset, const LabelMap& labels, Action action) {
  EngagementResult result;
  for (const auto& [user, acts] : collect_user_actions(dataset, labels, action)) {
    Label community = majority(acts);
    if (community == Label::unlabeled) {
      ++result.ties_excluded;
      continue;
    }
    UserEngagement e;
    e.user = std::string(user);
    e.community = community;
    e.lifetime = acts.last - acts.first;
    e.activity = acts.pro + acts.anti;
    result.users.push_back(std::move(e));
  }
  if (result.users.empty()) throw std::invalid_argument("no user has actions on labeled pages");

  for (Label community : {Label::pro, Label::anti}) {
    double lt_lo = INFINITY, lt_hi = -INFINITY, ac_lo = INFINITY, ac_hi = -INFINITY;
    bool any = false;
    for (const auto& e : result.users) {
      if (e.community != community) continue;
      any = true;
      lt_lo = std::min(lt_lo, static_cast<double>(e.lifetime));
      lt_hi = std::max(lt_hi, static_cast<double>(e.lifetime));
      ac_lo = std::min(ac_lo, static_cast<double>(e.activity));
      ac_hi = std::max(ac_hi, static_cast<double>(e.activity));
    }
    if (!any) continue;
    if (!(lt_hi > lt_lo) || !(ac_hi > ac_lo)) result.degenerate.push_back(community);
    for (auto& e : result.users) {
      if (e.community != community) continue;
      e.lifetime_std = min_max(static_cast<double>(e.lifetime), lt_lo, lt_hi);
      e.activity_std = min_max(static_cast<double>(e.activity), ac_lo, ac_hi);
    }
  }
  return result;
}

std::size_t pages_per_window(const Dataset& dataset, std::string_view user, CalendarWindow window,
                             Action action) {
  std::unordered_map<std::int64_t, std::unordered_set<std::string_view>> pages;
  for (std::uint32_t idx : dataset.records_for_user(user)) {
    const auto& r = dataset.records()[idx];
    if (r.action != action) continue;
    pages[calendar_window_key(r.ts, window)].insert(r.page);
  }
  if (pages.empty()) {
    throw std::invalid_argument("user '" + std::string(user) + "' has no " +
                                std::string(to_string(action)) + " records");
  }
  std::size_t best = 0;
  for (const auto& [key, set] : pages) best = std::max(best, set.size());
  return best;
}

namespace {

struct LocalFit {
  std::vector<double> weights;  // equivalent kernel l(x0), one entry per data point
  bool local_constant = false;
};

LocalFit local_kernel(std::span<const double> x, std::size_t q, double span, double x0,
                      std::vector<double>& scratch) {
  const std::size_t n = x.size();
  scratch.resize(n);
  for (std::size_t i = 0; i < n; ++i) scratch[i] = std::abs(x[i] - x0);
  std::vector<double> dist(scratch);
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(q - 1),
                   scratch.end());
  double h = scratch[q - 1];
  if (span > 1.0) h *= span;

  LocalFit fit;
  fit.weights.assign(n, 0.0);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w;
    if (h <= 0.0) {
      w = dist[i] == 0.0 ? 1.0 : 0.0;
    } else {
      const double u = dist[i] / h;
      w = u < 1.0 ? std::pow(1.0 - u * u * u, 3) : 0.0;
    }
    fit.weights[i] = w;
    const double dx = x[i] - x0;
    s0 += w;
    s1 += w * dx;
    s2 += w * dx * dx;
  }
  const double det = s0 * s2 - s1 * s1;
  if (!(det > 1e-12 * s0 * s2) || s2 <= 0.0) {
    fit.local_constant = true;
    for (auto& w : fit.weights) w /= s0;
    return fit;
  }
  for (std::size_t i = 0; i < n; ++i) {
    fit.weights[i] *= (s2 - (x[i] - x0) * s1) / det;
  }
  return fit;
}

}  // namespace

LoessResult loess_fit(std::span<const double> x, std::span<const double> y, double span,
                      std::span<const double> eval_points) {
  if (x.size() != y.size()) throw std::invalid_argument("loess needs |x| = |y|");
  if (x.size() < 3) throw std::invalid_argument("loess needs at least 3 points");
  if (!(span > 0.0) || span * static_cast<double>(x.size()) < 2.0) {
    throw std::invalid_argument("loess span too small for the sample size");
  }
  const std::size_t n = x.size();
  const auto q = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::floor(std::min(span, 1.0) * static_cast<double>(n))), 2, n);
  std::vector<double> scratch;

  // Pooled residual variance from the smoother evaluated at the data points.
  double rss = 0.0;
  double delta1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    LocalFit fit = local_kernel(x, q, span, x[i], scratch);
    double yhat = 0.0;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      yhat += fit.weights[j] * y[j];
      norm2 += fit.weights[j] * fit.weights[j];
    }
    rss += (y[i] - yhat) * (y[i] - yhat);
    delta1 += 1.0 - 2.0 * fit.weights[i] + norm2;
  }
  LoessResult result;
  result.residual_sd = delta1 > 0.0 ? std::sqrt(rss / delta1) : 0.0;

  for (double x0 : eval_points) {
    LocalFit fit = local_kernel(x, q, span, x0, scratch);
    LoessPoint p;
    p.x = x0;
    p.local_constant = fit.local_constant;
    double norm2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      p.fit += fit.weights[j] * y[j];
      norm2 += fit.weights[j] * fit.weights[j];
    }
    const double half_width = 1.96 * result.residual_sd * std::sqrt(norm2);
    p.lower = p.fit - half_width;
    p.upper = p.fit + half_width;
    result.points.push_back(p);
  }
  return result;
}

std::map<Label, PageStats> community_page_stats(const Dataset& dataset, const LabelMap& labels,
                                                Action action) {
  std::map<Label, std::vector<double>> counts;
  for (const auto& [user, acts] : collect_user_actions(dataset, labels, action)) {
    Label community = majority(acts);
    if (community == Label::pro) counts[community].push_back(static_cast<double>(acts.pro_pages.size()));
    if (community == Label::anti) counts[community].push_back(static_cast<double>(acts.anti_pages.size()));
  }
  std::map<Label, PageStats> out;
  for (const auto& [community, values] : counts) {
    PageStats s;
    s.users = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - s.mean) * (v - s.mean);
      s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    out[community] = s;
  }
  return out;
}

std::vector<ExposureRow> exposure_curves(const Dataset& dataset, const LabelMap& labels,
                                         const ExposureOptions& options) {
  const EngagementResult engagement = user_engagement(dataset, labels, options.action);
  std::vector<double> eval(options.eval_points);
  for (std::size_t i = 0; i < eval.size(); ++i) {
    eval[i] = eval.size() == 1 ? 0.0
                               : static_cast<double>(i) / static_cast<double>(eval.size() - 1);
  }
  std::vector<ExposureRow> rows;
  for (Label community : {Label::pro, Label::anti}) {
    std::vector<double> lifetime, activity, pages;
    for (const auto& e : engagement.users) {
      if (e.community != community) continue;
      lifetime.push_back(e.lifetime_std);
      activity.push_back(e.activity_std);
      pages.push_back(static_cast<double>(
          pages_per_window(dataset, e.user, options.window, options.action)));
    }
    if (pages.size() < 3 || options.span * static_cast<double>(pages.size()) < 2.0) continue;
    if (options.standardize_pages) {
      auto [lo, hi] = std::minmax_element(pages.begin(), pages.end());
      const double l = *lo, h = *hi;
      for (auto& v : pages) v = min_max(v, l, h);
    }
    for (Covariate cov : {Covariate::lifetime, Covariate::activity}) {
      const auto& xs = cov == Covariate::lifetime ? lifetime : activity;
      LoessResult fit = loess_fit(xs, pages, options.span, eval);
      for (const auto& p : fit.points) rows.push_back({community, cov, p});
    }
  }
  return rows;
}

void write_exposure_csv(std::ostream& out, std::span<const ExposureRow> rows) {
  out << "community,covariate,x,fit,lo95,hi95\n";
  for (const auto& r : rows) {
    out << to_string(r.community) << ','
        << (r.covariate == Covariate::lifetime ? "lifetime" : "activity") << ','
        << csv::format_real(r.point.x) << ',' << csv::format_real(r.point.fit) << ','
        << csv::format_real(r.point.lower) << ',' << csv::format_real(r.point.upper) << '\n';
  }
}

}  // namespace polarnet::metrics
