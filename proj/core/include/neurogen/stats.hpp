#pragma once

#include <span>
#include <vector>

namespace neurogen {

inline constexpr double kTieEps = 1e-9;

struct WinStats {
  std::size_t wins = 0;
  std::size_t ties = 0;
  std::size_t losses = 0;
  double rate = 0.0;  // (wins + ties / 2) / n

  std::size_t total() const noexcept { return wins + ties + losses; }
};

/// A win is ours < control - tie_eps; |ours - control| <= tie_eps is a tie.
WinStats win_rate(std::span<const double> ours, std::span<const double> control,
                  double tie_eps = kTieEps);

/// 1 for a win, 0.5 for a tie, 0 for a loss.
double win_indicator(double ours, double control, double tie_eps = kTieEps);

double pearson_r(std::span<const double> x, std::span<const double> y);

struct CorrelationTest {
  double r = 0.0;
  double t = 0.0;
  std::size_t n = 0;
  double p_greater = 1.0;  // H1: r > 0
  double p_two_sided = 1.0;
};

/// Student-t test of the sample correlation with n - 2 degrees of freedom.
CorrelationTest pearson_test(std::span<const double> x, std::span<const double> y);

/// Exact P(X >= wins) for X ~ Binomial(wins + losses, 1/2); ties excluded.
double sign_test_one_sided(std::size_t wins, std::size_t ties, std::size_t losses);

/// Benjamini-Hochberg step-up rejections at level q.
std::vector<bool> bh_fdr(std::span<const double> p_values, double q = 0.05);
/// BH-adjusted p-values (monotone, capped at 1); rejected iff adjusted <= q.
std::vector<double> bh_adjust(std::span<const double> p_values);

double mean(std::span<const double> x);

}  // namespace neurogen
