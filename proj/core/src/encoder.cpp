#include "neurogen/encoder.hpp"

#include <cmath>

#include "neurogen/errors.hpp"
#include "neurogen/random.hpp"

namespace neurogen {

void EncoderSpec::validate() const {
  if (c_raw == 0) throw ConfigError("encoder: c_raw must be positive");
  if (h.empty()) throw ConfigError("encoder: response weights h are empty");
  double sum = 0.0;
  for (double v : h) {
    if (!(v >= 0.0)) throw ConfigError("encoder: response weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("encoder: response weights must sum to 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("encoder: noise_sigma must be finite and >= 0");
  }
  if (!std::isfinite(signal_scale)) throw ConfigError("encoder: signal_scale must be finite");
}

std::vector<double> semantic_vector(const LanguageModel& lm, std::span<const TokenId> ids) {
  if (ids.empty()) throw ArgumentError("semantic_vector: empty continuation");
  const Matrix rows = lm.embed_tokens(ids);
  std::vector<double> mean(rows.cols(), 0.0);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    for (std::size_t j = 0; j < rows.cols(); ++j) mean[j] += rows(i, j);
  }
  for (auto& v : mean) v /= static_cast<double>(rows.rows());
  return mean;
}

double semantic_rms(const LanguageModel& lm, std::span<const std::vector<TokenId>> units) {
  double sq = 0.0;
  std::size_t n = 0;
  for (const auto& u : units) {
    for (double v : semantic_vector(lm, u)) {
      sq += v * v;
      ++n;
    }
  }
  if (n == 0) throw DataError("semantic_rms: no units");
  return std::sqrt(sq / static_cast<double>(n));
}

BrainEncoder::BrainEncoder(const EncoderSpec& spec, std::size_t d, double semantic_scale)
    : spec_(spec), projection_(spec.c_raw, d) {
  spec_.validate();
  if (!(semantic_scale > 0.0)) throw ArgumentError("encoder: semantic scale must be positive");
  Rng rng(mix_seed(spec.seed, 0xE9C));
  const double scale = spec.signal_scale / std::sqrt(static_cast<double>(d)) / semantic_scale;
  for (auto& v : projection_.values()) v = rng.normal() * scale;
}

Matrix BrainEncoder::encode_semantic(std::span<const double> semantic,
                                     std::uint64_t frame_id) const {
  if (semantic.size() != projection_.cols()) {
    throw DimensionError("encoder: semantic vector of width " + std::to_string(semantic.size()) +
                         ", projection expects " + std::to_string(projection_.cols()));
  }
  std::vector<double> signal(spec_.c_raw, 0.0);
  for (std::size_t r = 0; r < spec_.c_raw; ++r) {
    const auto row = projection_.row(r);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * semantic[j];
    signal[r] = s;
  }
  Rng rng(mix_seed(spec_.seed ^ 0x5EED, frame_id));
  Matrix out(spec_.frames(), spec_.c_raw);
  for (std::size_t i = 0; i < spec_.frames(); ++i) {
    for (std::size_t r = 0; r < spec_.c_raw; ++r) {
      out(i, r) = spec_.h[i] * signal[r] + spec_.noise_sigma * rng.normal();
    }
  }
  return out;
}

Matrix BrainEncoder::encode(std::span<const TokenId> continuation, const LanguageModel& lm,
                            std::uint64_t frame_id) const {
  return encode_semantic(semantic_vector(lm, continuation), frame_id);
}

}  // namespace neurogen
