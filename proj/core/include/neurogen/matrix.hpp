#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace neurogen {

/// Dense row-major matrix of 64-bit floats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  void fill(double v);
  /// Copies `count` rows starting at `first` into a new matrix.
  Matrix slice_rows(std::size_t first, std::size_t count) const;
  void set_row(std::size_t r, std::span<const double> src);

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

std::string shape_string(const Matrix& m);
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);
bool all_finite(const Matrix& m) noexcept;

Matrix vstack(std::span<const Matrix> blocks);
Matrix transpose(const Matrix& m);

// out = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
// out = a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// out = a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// acc += a^T * b
void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& acc);

void add_inplace(Matrix& acc, const Matrix& x, double scale = 1.0);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Little-endian binary block: u64 rows, u64 cols, rows*cols f64.
void write_binary(std::ostream& os, const Matrix& m);
Matrix read_binary(std::istream& is);
/// Byte size of a serialized block with these dimensions.
std::uint64_t binary_block_size(std::size_t rows, std::size_t cols) noexcept;

void write_csv(std::ostream& os, const Matrix& m);
Matrix read_csv(std::istream& is);

/// A trainable tensor. The gradient always has the value's shape; when
/// `trainable` is false backward passes leave `grad` at exactly zero.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Matrix v, bool train = true);

  void zero_grad() { grad.fill(0.0); }
  std::size_t size() const noexcept { return value.size(); }
};

}  // namespace neurogen
