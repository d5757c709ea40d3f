#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neurogen/matrix.hpp"
#include "neurogen/transformer.hpp"

namespace neurogen {

/// Synthetic stand-in for a BOLD response.
struct EncoderSpec {
  std::size_t c_raw = 128;
  /// Per-frame response weights; t = h.size().
  std::vector<double> h{0.1, 0.4, 0.4, 0.1};
  double noise_sigma = 0.1;
  /// Multiplies the projection; 0 yields noise-only features.
  double signal_scale = 1.0;
  std::uint64_t seed = 5;

  std::size_t frames() const noexcept { return h.size(); }
  void validate() const;
};

/// Mean of the LM embedding rows of `ids`.
std::vector<double> semantic_vector(const LanguageModel& lm, std::span<const TokenId> ids);

/// Root-mean-square entry of the semantic vectors of `units`.
double semantic_rms(const LanguageModel& lm, std::span<const std::vector<TokenId>> units);

class BrainEncoder {
 public:
  /// projection (c_raw x d) ~ N(0, 1) / sqrt(d) / semantic_scale *
  /// signal_scale, so projected signal entries have roughly unit scale.
  BrainEncoder(const EncoderSpec& spec, std::size_t d, double semantic_scale);

  const EncoderSpec& spec() const noexcept { return spec_; }
  const Matrix& projection() const noexcept { return projection_; }

  /// Frame i = h_i * projection * semantic(M) + N(0, sigma^2) noise drawn
  /// from a stream seeded by (spec.seed, frame_id).
  Matrix encode(std::span<const TokenId> continuation, const LanguageModel& lm,
                std::uint64_t frame_id) const;
  Matrix encode_semantic(std::span<const double> semantic, std::uint64_t frame_id) const;

 private:
  EncoderSpec spec_;
  Matrix projection_;
};

}  // namespace neurogen
