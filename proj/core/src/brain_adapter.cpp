#include "neurogen/brain_adapter.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "neurogen/errors.hpp"
#include "neurogen/layers.hpp"
#include "neurogen/random.hpp"

namespace neurogen {
namespace {

const char* kMagic = "neurogen-adapter 1";

Matrix uniform(Rng& rng, std::size_t r, std::size_t c, double lo, double hi) {
  Matrix m(r, c);
  for (auto& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

}  // namespace

BrainAdapter::BrainAdapter(std::size_t c, std::size_t d, std::size_t t, std::uint64_t seed,
                           std::pair<double, double> embedding_range)
    : c_(c), d_(d), t_(t) {
  if (c == 0 || d == 0 || t == 0) throw ArgumentError("BrainAdapter: c, d, t must be >= 1");
  Rng rng(mix_seed(seed, 0xADA));
  pos_ = Parameter("pos", uniform(rng, t, c, -0.1, 0.1));
  const std::size_t fan_out[3] = {c, c, d};
  for (std::size_t k = 0; k < 3; ++k) {
    const double bound = std::sqrt(6.0 / static_cast<double>(c));
    w_.emplace_back("w" + std::to_string(k), uniform(rng, c, fan_out[k], -bound, bound));
    b_.emplace_back("b" + std::to_string(k), Matrix(1, fan_out[k]));
  }
  const auto [lo, hi] = embedding_range;
  open_ = Parameter("sentinel_open", uniform(rng, 1, d, lo, hi));
  close_ = Parameter("sentinel_close", uniform(rng, 1, d, lo, hi));
}

Matrix BrainAdapter::adapt(const Matrix& recording, Trace* trace) const {
  if (recording.rows() != t_ || recording.cols() != c_) {
    throw DimensionError("BrainAdapter: recording " + shape_string(recording) +
                         " does not match adapter " + shape_string(pos_.value));
  }
  Trace local;
  Trace& tr = trace ? *trace : local;
  tr.x0 = recording;
  add_inplace(tr.x0, pos_.value);
  tr.h1_pre = affine(tr.x0, w_[0], b_[0]);
  tr.h1 = relu(tr.h1_pre);
  tr.h2_pre = affine(tr.h1, w_[1], b_[1]);
  tr.h2 = relu(tr.h2_pre);
  return affine(tr.h2, w_[2], b_[2]);
}

Matrix BrainAdapter::backward(const Trace& trace, const Matrix& d_out) {
  Matrix g = affine_backward(trace.h2, d_out, w_[2], b_[2]);
  g = affine_backward(trace.h1, relu_backward(trace.h2_pre, g), w_[1], b_[1]);
  g = affine_backward(trace.x0, relu_backward(trace.h1_pre, g), w_[0], b_[0]);
  if (pos_.trainable) add_inplace(pos_.grad, g);
  return g;
}

std::vector<Parameter*> BrainAdapter::parameters() {
  std::vector<Parameter*> out{&pos_};
  for (std::size_t k = 0; k < w_.size(); ++k) {
    out.push_back(&w_[k]);
    out.push_back(&b_[k]);
  }
  out.push_back(&open_);
  out.push_back(&close_);
  return out;
}

std::vector<const Parameter*> BrainAdapter::parameters() const {
  auto mut = const_cast<BrainAdapter*>(this)->parameters();
  return {mut.begin(), mut.end()};
}

void BrainAdapter::zero_grad() {
  for (Parameter* p : parameters()) p->zero_grad();
}

void BrainAdapter::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write adapter checkpoint " + path.string());
  out << kMagic << '\n' << "c=" << c_ << '\n' << "d=" << d_ << '\n' << "t=" << t_ << '\n' << "end\n";
  for (const Parameter* p : parameters()) write_binary(out, p->value);
  if (!out) throw IoError("failed writing adapter checkpoint " + path.string());
}

BrainAdapter BrainAdapter::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read adapter checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMagic) throw DataError(path.string() + " is not an adapter checkpoint");
  std::size_t dims[3] = {0, 0, 0};
  const char* keys[3] = {"c=", "d=", "t="};
  for (int k = 0; k < 3; ++k) {
    std::getline(in, line);
    if (line.rfind(keys[k], 0) != 0) throw DataError("adapter header: expected " + std::string(keys[k]));
    dims[k] = std::stoull(line.substr(2));
  }
  std::getline(in, line);
  if (line != "end") throw DataError("adapter header not terminated");
  BrainAdapter a(dims[0], dims[1], dims[2], 0, {0.0, 0.0});
  for (Parameter* p : a.parameters()) {
    Matrix m = read_binary(in);
    if (m.rows() != p->value.rows() || m.cols() != p->value.cols()) {
      throw DataError("adapter block " + p->name + " has shape " + shape_string(m));
    }
    p->value = std::move(m);
  }
  return a;
}

std::uint64_t adapter_param_count(std::uint64_t c, std::uint64_t d, std::uint64_t t) noexcept {
  return t * c + 2 * (c * c + c) + (c * d + d) + 2 * d;
}

std::uint64_t adapter_param_count(const BrainAdapter& adapter) {
  return adapter_param_count(adapter.channels(), adapter.width(), adapter.frames());
}

}  // namespace neurogen
