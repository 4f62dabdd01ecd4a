#include "adda/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include "adda/errors.hpp"

namespace adda {

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

template <typename Real>
std::vector<Real> softmax_impl(std::span<const Real> v, Real scale) {
  if (v.empty()) throw DomainError("softmax: empty input");
  Real top = scale * v[0];
  for (Real x : v) {
    if (!std::isfinite(x)) throw DomainError("softmax: non-finite input");
    top = std::max(top, scale * x);
  }
  std::vector<Real> out(v.size());
  Real total = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(scale * v[i] - top);
    total += out[i];
  }
  for (Real& x : out) x /= total;
  return out;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " != " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0f;
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: " + dims(a) + " * " + dims(b));
  Matrix out(a.rows(), b.cols());
  const std::size_t k_dim = a.cols();
  const std::size_t n = b.cols();
  auto row_kernel = [&](std::size_t i) {
    float* o = out.row(i).data();
    const float* ar = a.row(i).data();
    // i-k-j loop: each o[j] still accumulates over k in increasing order.
    for (std::size_t k = 0; k < k_dim; ++k) {
      const float aik = ar[k];
      const float* br = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += aik * br[j];
    }
  };
  if (a.rows() * k_dim * n >= (1u << 18)) {
    parallel_for(a.rows(), row_kernel);
  } else {
    for (std::size_t i = 0; i < a.rows(); ++i) row_kernel(i);
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("matmul_tn: " + dims(a) + "^T * " + dims(b));
  Matrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  auto row_kernel = [&](std::size_t i) {
    float* o = out.row(i).data();
    for (std::size_t k = 0; k < a.rows(); ++k) {
      const float aki = a(k, i);
      const float* br = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) o[j] += aki * br[j];
    }
  };
  if (a.rows() * a.cols() * n >= (1u << 18)) {
    parallel_for(a.cols(), row_kernel);
  } else {
    for (std::size_t i = 0; i < a.cols(); ++i) row_kernel(i);
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_nt: " + dims(a) + " * " + dims(b) + "^T");
  Matrix out(a.rows(), b.rows());
  auto row_kernel = [&](std::size_t i) {
    const auto ar = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const auto br = b.row(j);
      float acc = 0.0f;
      for (std::size_t k = 0; k < ar.size(); ++k) acc += ar[k] * br[k];
      out(i, j) = acc;
    }
  };
  if (a.rows() * a.cols() * b.rows() >= (1u << 18)) {
    parallel_for(a.rows(), row_kernel);
  } else {
    for (std::size_t i = 0; i < a.rows(); ++i) row_kernel(i);
  }
  return out;
}

std::vector<float> softmax(std::span<const float> v, float scale) {
  return softmax_impl<float>(v, scale);
}

std::vector<double> softmax(std::span<const double> v, double scale) {
  return softmax_impl<double>(v, scale);
}

std::vector<float> l2_normalize(std::span<const float> v) {
  float sq = 0.0f;
  for (float x : v) sq += x * x;
  const float norm = std::sqrt(sq);
  if (!(norm > kNormEpsilon)) throw DegenerateEmbeddingError("l2_normalize: near-zero norm");
  std::vector<float> out(v.begin(), v.end());
  for (float& x : out) x /= norm;
  return out;
}

std::vector<double> finite_diff_grad(const ScalarFunction& f, std::span<const double> x,
                                     double eps) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = f(probe);
    probe[i] = orig - eps;
    const double down = f(probe);
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("finite_diff_grad: non-finite function value at coordinate " +
                         std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

std::size_t worker_count() {
  const char* env = std::getenv("ADDA_THREADS");
  if (env == nullptr) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || n < 1) return 1;
  return static_cast<std::size_t>(std::min<long>(n, 256));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([lo, hi, w, &body, &errors] {
        try {
          for (std::size_t i = lo; i < hi; ++i) body(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    try {
      for (std::size_t i = 0; i < std::min(n, chunk); ++i) body(i);
    } catch (...) {
      errors[0] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace adda
