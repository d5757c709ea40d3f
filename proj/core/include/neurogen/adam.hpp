#pragma once

#include <span>
#include <vector>

#include "neurogen/matrix.hpp"

namespace neurogen {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moment buffers are keyed by position in the
/// parameter list given at construction; non-trainable entries are skipped.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, const AdamConfig& config);

  /// One update from the gradients currently stored in the parameters.
  void step();
  void zero_grad();

  std::size_t steps() const noexcept { return step_; }
  const AdamConfig& config() const noexcept { return config_; }
  void set_lr(double lr) noexcept { config_.lr = lr; }

 private:
  std::vector<Parameter*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamConfig config_;
  std::size_t step_ = 0;
};

}  // namespace neurogen
