#pragma once

#include <span>
#include <vector>

#include "neurogen/matrix.hpp"

namespace neurogen {

/// Ridge regression from a flattened recording to the number of words
/// perceived in its frame. Features and target are centred, so the
/// intercept is the training mean and is not penalised.
struct WordRateModel {
  Matrix feature_mean;  // 1 x p
  Matrix weights;       // p x 1
  double bias = 0.0;
  double lambda = 1.0;

  double predict_raw(const Matrix& recording) const;
  /// Rounded to the nearest integer and clamped at zero.
  std::size_t predict(const Matrix& recording) const;
};

WordRateModel fit_word_rate(std::span<const Matrix> recordings, std::span<const double> budgets,
                            double lambda);

struct WordRateSelection {
  WordRateModel model;
  std::vector<double> lambdas;
  std::vector<double> valid_mse;  // per lambda, on rounded predictions
};

/// Fits one model per lambda and keeps the one with the lowest validation
/// squared error (first lambda wins ties).
WordRateSelection select_word_rate(std::span<const Matrix> train_recordings,
                                   std::span<const double> train_budgets,
                                   std::span<const Matrix> valid_recordings,
                                   std::span<const double> valid_budgets,
                                   std::span<const double> lambdas);

inline constexpr double kWordRateLambdas[] = {0.1, 1.0, 10.0, 100.0};

}  // namespace neurogen
