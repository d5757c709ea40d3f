#include "neurogen/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "neurogen/errors.hpp"
#include "neurogen/random.hpp"

namespace neurogen {
namespace {

double central_difference(const std::function<double()>& loss, double& slot, double step) {
  const double saved = slot;
  slot = saved + step;
  const double plus = loss();
  slot = saved - step;
  const double minus = loss();
  slot = saved;
  return (plus - minus) / (2.0 * step);
}

}  // namespace

GradCheckResult finite_difference_check(const std::function<double()>& loss,
                                        std::span<Parameter* const> params,
                                        const GradCheckOptions& options) {
  if (!(options.eps >= 1e-7 && options.eps <= 1e-3)) {
    throw ArgumentError("finite_difference_check: eps must lie in [1e-7, 1e-3]");
  }
  const double base = loss();
  const double again = loss();
  if (base != again) {
    throw DeterminismError("finite_difference_check: loss is not deterministic (" +
                           std::to_string(base) + " vs " + std::to_string(again) + ")");
  }

  GradCheckResult result;
  Rng rng(options.seed);
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    const std::size_t n = p->value.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const bool sample = options.coords_per_param != 0 && options.coords_per_param < n;
    if (sample) rng.shuffle(std::span<std::size_t>(order));
    const std::size_t want = sample ? options.coords_per_param : n;

    std::size_t done = 0;
    for (std::size_t k = 0; k < n && done < want; ++k) {
      const std::size_t idx = order[k];
      double& slot = p->value.values()[idx];
      const double numeric = central_difference(loss, slot, options.eps);
      const double analytic = p->grad.values()[idx];
      const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
      // The half-step probe costs two more evaluations, so only suspects pay it.
      if (options.skip_nonsmooth && rel > options.smooth_tol) {
        const double half = central_difference(loss, slot, options.eps / 2.0);
        if (std::abs(numeric - half) > options.smooth_tol * std::max(1.0, std::abs(numeric))) {
          ++result.skipped_nonsmooth;
          continue;
        }
      }
      if (result.worst_coordinate.empty() || rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_coordinate = p->name + "[" + std::to_string(idx) + "]";
      }
      ++result.checked;
      ++done;
    }
  }
  return result;
}

}  // namespace neurogen
