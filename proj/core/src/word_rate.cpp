#include "neurogen/word_rate.hpp"

#include <cmath>
#include <limits>

#include "neurogen/errors.hpp"
#include "neurogen/linalg.hpp"

namespace neurogen {

double WordRateModel::predict_raw(const Matrix& recording) const {
  if (recording.size() != weights.rows()) {
    throw DimensionError("word-rate model expects " + std::to_string(weights.rows()) +
                         " features, recording has " + std::to_string(recording.size()));
  }
  double y = bias;
  for (std::size_t k = 0; k < recording.size(); ++k) {
    y += (recording.values()[k] - feature_mean(0, k)) * weights(k, 0);
  }
  return y;
}

std::size_t WordRateModel::predict(const Matrix& recording) const {
  const double y = std::round(predict_raw(recording));
  return y > 0.0 ? static_cast<std::size_t>(y) : 0;
}

WordRateModel fit_word_rate(std::span<const Matrix> recordings, std::span<const double> budgets,
                            double lambda) {
  if (recordings.size() != budgets.size()) throw DimensionError("word rate: recordings vs budgets");
  if (recordings.size() < 2) throw ArgumentError("word rate: need at least two training pairs");
  if (!(lambda > 0.0)) throw ArgumentError("word rate: lambda must be positive");
  const std::size_t n = recordings.size();
  const std::size_t p = recordings[0].size();
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    if (recordings[i].size() != p) throw DimensionError("word rate: recordings differ in size");
    x.set_row(i, recordings[i].values());
  }
  WordRateModel m;
  m.lambda = lambda;
  m.feature_mean = column_mean(x);
  double ymean = 0.0;
  for (double b : budgets) ymean += b;
  ymean /= static_cast<double>(n);
  Matrix y(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    y(i, 0) = budgets[i] - ymean;
    for (std::size_t k = 0; k < p; ++k) x(i, k) -= m.feature_mean(0, k);
  }
  Matrix gram = matmul_tn(x, x);
  for (std::size_t k = 0; k < p; ++k) gram(k, k) += lambda;
  m.weights = solve_spd(gram, matmul_tn(x, y));
  m.bias = ymean;
  return m;
}

WordRateSelection select_word_rate(std::span<const Matrix> train_recordings,
                                   std::span<const double> train_budgets,
                                   std::span<const Matrix> valid_recordings,
                                   std::span<const double> valid_budgets,
                                   std::span<const double> lambdas) {
  if (lambdas.empty()) throw ArgumentError("word rate: no lambdas to choose from");
  if (valid_recordings.size() != valid_budgets.size() || valid_recordings.empty()) {
    throw ArgumentError("word rate: validation set is empty or inconsistent");
  }
  WordRateSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : lambdas) {
    WordRateModel m = fit_word_rate(train_recordings, train_budgets, lambda);
    double mse = 0.0;
    for (std::size_t i = 0; i < valid_recordings.size(); ++i) {
      const double e = static_cast<double>(m.predict(valid_recordings[i])) - valid_budgets[i];
      mse += e * e;
    }
    mse /= static_cast<double>(valid_recordings.size());
    sel.lambdas.push_back(lambda);
    sel.valid_mse.push_back(mse);
    if (mse < best) {
      best = mse;
      sel.model = std::move(m);
    }
  }
  return sel;
}

}  // namespace neurogen
