#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace adda {

/// Dense row-major matrix of 32-bit reals.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  // Throws ShapeError when data.size() != rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  float& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  float operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<float> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const float> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }
  const std::vector<float>& storage() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

// a[m x k] * b[k x n]. Each output entry is summed over k in increasing order.
Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b, for a[k x m], b[k x n].
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T, for a[m x k], b[n x k].
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Numerically stabilized softmax of scale * v. Throws DomainError on empty input.
std::vector<float> softmax(std::span<const float> v, float scale = 1.0f);
std::vector<double> softmax(std::span<const double> v, double scale = 1.0);

inline constexpr double kNormEpsilon = 1e-12;

// v / ||v||_2. Throws DegenerateEmbeddingError when ||v|| <= 1e-12.
std::vector<float> l2_normalize(std::span<const float> v);

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps).
// Throws NumericError when f returns a non-finite value.
std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> x,
                                     double eps);

// Worker count from ADDA_THREADS (unset or invalid -> 1).
std::size_t worker_count();

// Runs body(i) for i in [0, n), split into contiguous chunks across
// worker_count() threads. Bodies must write to disjoint locations.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace adda
