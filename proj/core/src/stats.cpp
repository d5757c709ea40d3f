#include "neurogen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "neurogen/errors.hpp"

namespace neurogen {

WinStats win_rate(std::span<const double> ours, std::span<const double> control, double tie_eps) {
  if (ours.size() != control.size()) throw DimensionError("win_rate: paired arrays differ in length");
  if (ours.empty()) throw ArgumentError("win_rate: no pairs");
  WinStats w;
  for (std::size_t i = 0; i < ours.size(); ++i) {
    const double v = win_indicator(ours[i], control[i], tie_eps);
    if (v == 1.0) {
      ++w.wins;
    } else if (v == 0.5) {
      ++w.ties;
    } else {
      ++w.losses;
    }
  }
  w.rate = (static_cast<double>(w.wins) + 0.5 * static_cast<double>(w.ties)) /
           static_cast<double>(ours.size());
  return w;
}

double win_indicator(double ours, double control, double tie_eps) {
  if (ours < control - tie_eps) return 1.0;
  if (ours > control + tie_eps) return 0.0;
  return 0.5;
}

double mean(std::span<const double> x) {
  if (x.empty()) throw ArgumentError("mean of an empty list");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson_r: lists differ in length");
  if (x.size() < 2) throw ArgumentError("pearson_r: need at least two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("pearson_r: correlation undefined for zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationTest pearson_test(std::span<const double> x, std::span<const double> y) {
  CorrelationTest t;
  t.r = pearson_r(x, y);
  t.n = x.size();
  if (t.n < 3) return t;
  const double df = static_cast<double>(t.n - 2);
  if (std::abs(t.r) >= 1.0) {
    t.t = std::copysign(std::numeric_limits<double>::infinity(), t.r);
    t.p_greater = t.r > 0 ? 0.0 : 1.0;
    t.p_two_sided = 0.0;
    return t;
  }
  t.t = t.r * std::sqrt(df / (1.0 - t.r * t.r));
  const boost::math::students_t dist(df);
  t.p_greater = boost::math::cdf(boost::math::complement(dist, t.t));
  t.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t.t)));
  return t;
}

double sign_test_one_sided(std::size_t wins, std::size_t /*ties*/, std::size_t losses) {
  const std::size_t n = wins + losses;
  if (n == 0) throw ArgumentError("sign test: no untied pairs");
  if (wins == 0) return 1.0;
  const boost::math::binomial dist(static_cast<double>(n), 0.5);
  return boost::math::cdf(boost::math::complement(dist, static_cast<double>(wins - 1)));
}

std::vector<double> bh_adjust(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("bh_fdr: p-value outside [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> adj(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const std::size_t i = order[k];
    running = std::min(running, p_values[i] * static_cast<double>(m) / static_cast<double>(k + 1));
    adj[i] = running;
  }
  return adj;
}

std::vector<bool> bh_fdr(std::span<const double> p_values, double q) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("bh_fdr: p-value outside [0, 1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::size_t cutoff = 0;  // number of rejections
  for (std::size_t k = 0; k < m; ++k) {
    if (p_values[order[k]] <= q * static_cast<double>(k + 1) / static_cast<double>(m)) cutoff = k + 1;
  }
  std::vector<bool> reject(m, false);
  for (std::size_t k = 0; k < cutoff; ++k) reject[order[k]] = true;
  return reject;
}

}  // namespace neurogen
