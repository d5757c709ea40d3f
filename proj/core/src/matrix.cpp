#include "neurogen/matrix.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "neurogen/errors.hpp"

namespace neurogen {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Matrix& m) { return ConstMap(m.data(), m.rows(), m.cols()); }
MutMap view(Matrix& m) { return MutMap(m.data(), m.rows(), m.cols()); }

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&v, bytes, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("truncated matrix block");
  return to_little(v);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw DimensionError("matrix value count " + std::to_string(values_.size()) +
                         " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> vals;
  vals.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged initializer for Matrix");
    vals.insert(vals.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(vals));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

Matrix Matrix::slice_rows(std::size_t first, std::size_t count) const {
  if (first + count > rows_) {
    throw DimensionError("row slice [" + std::to_string(first) + ", " +
                         std::to_string(first + count) + ") out of range for " +
                         shape_string(*this));
  }
  Matrix out(count, cols_);
  std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(first * cols_), count * cols_,
              out.values_.begin());
  return out;
}

void Matrix::set_row(std::size_t r, std::span<const double> src) {
  if (r >= rows_ || src.size() != cols_) {
    throw DimensionError("set_row: row " + std::to_string(r) + " of width " +
                         std::to_string(src.size()) + " does not fit " + shape_string(*this));
  }
  std::copy(src.begin(), src.end(), values_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
}

std::string shape_string(const Matrix& m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
  }
}

bool all_finite(const Matrix& m) noexcept {
  return std::all_of(m.values().begin(), m.values().end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix vstack(std::span<const Matrix> blocks) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool have_cols = false;
  for (const auto& b : blocks) {
    if (b.rows() == 0) continue;
    if (have_cols && b.cols() != cols) {
      throw DimensionError("vstack: column mismatch " + std::to_string(cols) + " vs " +
                           shape_string(b));
    }
    cols = b.cols();
    have_cols = true;
    rows += b.rows();
  }
  Matrix out(rows, cols);
  std::size_t at = 0;
  for (const auto& b : blocks) {
    if (b.rows() == 0) continue;
    std::copy(b.values().begin(), b.values().end(), out.values().begin() + static_cast<std::ptrdiff_t>(at));
    at += b.size();
  }
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  view(out) = view(m).transpose();
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_string(a) + " x " + shape_string(b));
  }
  Matrix out(a.rows(), b.cols());
  if (a.rows() && b.cols() && a.cols()) view(out).noalias() = view(a) * view(b);
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: " + shape_string(a) + "^T x " + shape_string(b));
  }
  Matrix out(a.cols(), b.cols());
  if (a.rows() && a.cols() && b.cols()) view(out).noalias() = view(a).transpose() * view(b);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: " + shape_string(a) + " x " + shape_string(b) + "^T");
  }
  Matrix out(a.rows(), b.rows());
  if (a.rows() && b.rows() && a.cols()) view(out).noalias() = view(a) * view(b).transpose();
  return out;
}

void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& acc) {
  if (a.rows() != b.rows() || acc.rows() != a.cols() || acc.cols() != b.cols()) {
    throw DimensionError("matmul_tn_accumulate: " + shape_string(a) + "^T x " + shape_string(b) +
                         " into " + shape_string(acc));
  }
  if (a.rows() == 0) return;
  view(acc).noalias() += view(a).transpose() * view(b);
}

void add_inplace(Matrix& acc, const Matrix& x, double scale) {
  require_same_shape(acc, x, "add_inplace");
  double* dst = acc.data();
  const double* src = x.data();
  for (std::size_t i = 0; i < acc.size(); ++i) dst[i] += scale * src[i];
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  }
  return worst;
}

void write_binary(std::ostream& os, const Matrix& m) {
  put<std::uint64_t>(os, m.rows());
  put<std::uint64_t>(os, m.cols());
  for (double v : m.values()) put<double>(os, v);
  if (!os) throw IoError("failed writing matrix block");
}

Matrix read_binary(std::istream& is) {
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 32;
  if (rows > kLimit || cols > kLimit || (rows && cols > kLimit / rows)) {
    throw IoError("implausible matrix block dimensions " + std::to_string(rows) + "x" +
                  std::to_string(cols));
  }
  Matrix m(rows, cols);
  for (auto& v : m.values()) v = get<double>(is);
  return m;
}

std::uint64_t binary_block_size(std::size_t rows, std::size_t cols) noexcept {
  return 16 + 8 * static_cast<std::uint64_t>(rows) * cols;
}

void write_csv(std::ostream& os, const Matrix& m) {
  std::ostringstream buf;
  buf.precision(17);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) buf << ',';
      buf << m(r, c);
    }
    buf << '\n';
  }
  os << buf.str();
}

Matrix read_csv(std::istream& is) {
  std::vector<double> vals;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("bad CSV matrix cell '" + cell + "'");
      }
      ++count;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw IoError("ragged CSV matrix at row " + std::to_string(rows));
    ++rows;
  }
  return Matrix(rows, cols, std::move(vals));
}

Parameter::Parameter(std::string n, Matrix v, bool train)
    : name(std::move(n)), value(std::move(v)), trainable(train) {
  grad = Matrix(value.rows(), value.cols());
}

}  // namespace neurogen
