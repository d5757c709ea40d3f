#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "neurogen/matrix.hpp"

namespace neurogen {

struct GradCheckOptions {
  double eps = 1e-6;
  /// Coordinates sampled per parameter tensor; 0 checks every coordinate.
  std::size_t coords_per_param = 0;
  std::uint64_t seed = 0;
  /// A coordinate whose central difference misses the analytic value by more
  /// than smooth_tol is re-probed at half the step. If the two differences
  /// disagree it sits on a kink (e.g. a ReLU switching) and is skipped, and
  /// another coordinate is drawn.
  bool skip_nonsmooth = true;
  double smooth_tol = 1e-6;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_nonsmooth = 0;
  std::string worst_coordinate;
};

/// Compares each parameter's analytic `grad` (already populated by the
/// caller) against central differences of `loss`. The relative error per
/// coordinate is |analytic - numeric| / max(1, |numeric|).
GradCheckResult finite_difference_check(const std::function<double()>& loss,
                                        std::span<Parameter* const> params,
                                        const GradCheckOptions& options = {});

}  // namespace neurogen
