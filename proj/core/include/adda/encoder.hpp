#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "adda/numerics.hpp"
#include "adda/rng.hpp"

namespace adda {

/// Two-layer ReLU backbone followed by a linear projection head.
/// Biases are stored as 1 x n matrices.
struct EncoderParams {
  Matrix w1, b1;
  Matrix w2, b2;
  Matrix wp, bp;

  std::size_t input_dim() const noexcept { return w1.rows(); }
  std::size_t hidden_dim() const noexcept { return w1.cols(); }
  std::size_t embed_dim() const noexcept { return wp.cols(); }

  static constexpr std::array<std::string_view, 6> kNames = {"w1", "b1", "w2", "b2", "wp", "bp"};

  std::array<Matrix*, 6> tensors() noexcept { return {&w1, &b1, &w2, &b2, &wp, &bp}; }
  std::array<const Matrix*, 6> tensors() const noexcept { return {&w1, &b1, &w2, &b2, &wp, &bp}; }

  // Zero-valued parameters with the same shapes.
  EncoderParams zeros_like() const;
  bool same_shape(const EncoderParams& other) const noexcept;

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
EncoderParams init_params(std::size_t d_in, std::size_t d_hidden, std::size_t d_embed,
                          RngStream rng);

struct ForwardCache {
  Matrix input;
  Matrix hidden1;     // ReLU(x W1 + b1)
  Matrix features;    // h = ReLU(hidden1 W2 + b2)
  Matrix embeddings;  // z, unit rows
  std::vector<float> norms;  // ||h Wp + bp|| per row
};

struct ForwardResult {
  Matrix features;
  Matrix embeddings;
  ForwardCache cache;
};

// Throws ShapeError on a width mismatch and DegenerateEmbeddingError when a
// projection row has (near) zero norm.
ForwardResult forward(const EncoderParams& params, const Matrix& batch);

// Backbone features only (no projection, no normalization).
Matrix forward_features(const EncoderParams& params, const Matrix& batch);

// Row-wise Jacobian-vector product of v -> v/||v||: (g - z (z.g)) / ||v||.
Matrix normalize_rows_backward(const Matrix& z, std::span<const float> norms,
                               const Matrix& grad_z);

EncoderParams backward(const EncoderParams& params, const ForwardCache& cache,
                       const Matrix& grad_z);

// p <- p - lr (g + weight_decay p). Throws NumericError if any gradient is
// non-finite; params are left untouched in that case.
void sgd_step(EncoderParams& params, const EncoderParams& grads, float lr, float weight_decay);

struct EncoderPair {
  EncoderParams query;
  EncoderParams key;
  float momentum = 0.99f;

  // Key starts as an exact copy of the query.
  static EncoderPair from_query(EncoderParams query, float momentum);
};

// key <- m key + (1 - m) query.
void momentum_update(EncoderPair& pair);

}  // namespace adda
