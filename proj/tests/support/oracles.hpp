#pragma once

// Independent 64-bit reference implementations used by the tests. None of
// these call into the library's numeric code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "adda/encoder.hpp"

namespace adda::oracle {

inline std::vector<double> softmax(const std::vector<double>& v, double scale = 1.0) {
  std::vector<double> e(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += e[i] = std::exp(scale * v[i]);
  for (auto& x : e) x /= sum;
  return e;
}

// -log(exp(l0) / sum_k exp(lk)) evaluated without any shift.
inline double infonce_naive(const std::vector<double>& q, const std::vector<double>& pos,
                            const std::vector<std::vector<double>>& negatives, double tau) {
  if (negatives.empty()) return 0.0;
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  };
  const double l0 = std::exp(dot(q, pos) / tau);
  double denom = l0;
  for (const auto& n : negatives) denom += std::exp(dot(q, n) / tau);
  return -std::log(l0 / denom);
}

// Largest remainder with lowest-index tie-break, then raise each entry to
// min_size by taking single units from the current largest entry.
inline std::vector<std::size_t> largest_remainder(const std::vector<double>& p, std::size_t total,
                                                  std::size_t min_size) {
  const std::size_t n = p.size();
  std::vector<std::size_t> out(n);
  std::vector<double> rem(n);
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = p[i] * static_cast<double>(total);
    out[i] = static_cast<std::size_t>(std::floor(target));
    rem[i] = target - std::floor(target);
    used += out[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rem[a] != rem[b] ? rem[a] > rem[b] : a < b;
  });
  for (std::size_t k = 0; used < total; ++k, ++used) ++out[order[k % n]];
  for (std::size_t i = 0; i < n; ++i) {
    while (out[i] < min_size) {
      std::size_t big = 0;
      for (std::size_t j = 1; j < n; ++j) {
        if (out[j] > out[big]) big = j;
      }
      --out[big];
      ++out[i];
    }
  }
  return out;
}

// Encoder parameters as doubles, flattened in EncoderParams::kNames order.
inline std::vector<double> flatten(const EncoderParams& p) {
  std::vector<double> flat;
  for (const Matrix* m : p.tensors()) {
    for (float v : m->values()) flat.push_back(v);
  }
  return flat;
}

inline EncoderParams unflatten_grads(const EncoderParams& shape, const std::vector<double>& flat) {
  EncoderParams g = shape.zeros_like();
  std::size_t k = 0;
  for (Matrix* m : g.tensors()) {
    for (float& v : m->values()) v = static_cast<float>(flat[k++]);
  }
  return g;
}

// Double-precision encoder forward on flattened parameters: returns unit
// embeddings, one row per input.
struct EncoderShape {
  std::size_t d_in, d_h, d_z;
};

inline std::vector<std::vector<double>> encoder_forward(const std::vector<double>& theta,
                                                        const EncoderShape& s,
                                                        const std::vector<std::vector<double>>& x) {
  const double* w1 = theta.data();
  const double* b1 = w1 + s.d_in * s.d_h;
  const double* w2 = b1 + s.d_h;
  const double* b2 = w2 + s.d_h * s.d_h;
  const double* wp = b2 + s.d_h;
  const double* bp = wp + s.d_h * s.d_z;
  std::vector<std::vector<double>> z;
  for (const auto& row : x) {
    std::vector<double> h1(s.d_h), h2(s.d_h), v(s.d_z);
    for (std::size_t j = 0; j < s.d_h; ++j) {
      double a = b1[j];
      for (std::size_t i = 0; i < s.d_in; ++i) a += row[i] * w1[i * s.d_h + j];
      h1[j] = std::max(a, 0.0);
    }
    for (std::size_t j = 0; j < s.d_h; ++j) {
      double a = b2[j];
      for (std::size_t i = 0; i < s.d_h; ++i) a += h1[i] * w2[i * s.d_h + j];
      h2[j] = std::max(a, 0.0);
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < s.d_z; ++j) {
      double a = bp[j];
      for (std::size_t i = 0; i < s.d_h; ++i) a += h2[i] * wp[i * s.d_z + j];
      v[j] = a;
      norm += a * a;
    }
    norm = std::sqrt(norm);
    for (auto& e : v) e /= norm;
    z.push_back(std::move(v));
  }
  return z;
}

// Smallest |pre-activation| over both ReLU layers, used to keep finite
// differences away from kinks.
inline double min_relu_margin(const std::vector<double>& theta, const EncoderShape& s,
                              const std::vector<std::vector<double>>& x) {
  const double* w1 = theta.data();
  const double* b1 = w1 + s.d_in * s.d_h;
  const double* w2 = b1 + s.d_h;
  const double* b2 = w2 + s.d_h * s.d_h;
  double margin = INFINITY;
  for (const auto& row : x) {
    std::vector<double> h1(s.d_h);
    for (std::size_t j = 0; j < s.d_h; ++j) {
      double a = b1[j];
      for (std::size_t i = 0; i < s.d_in; ++i) a += row[i] * w1[i * s.d_h + j];
      margin = std::min(margin, std::abs(a));
      h1[j] = std::max(a, 0.0);
    }
    for (std::size_t j = 0; j < s.d_h; ++j) {
      double a = b2[j];
      for (std::size_t i = 0; i < s.d_h; ++i) a += h1[i] * w2[i * s.d_h + j];
      margin = std::min(margin, std::abs(a));
    }
  }
  return margin;
}

inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(ref), 1e-12);
}

}  // namespace adda::oracle
