#include "adda/encoder.hpp"

#include <cmath>
#include <string>

#include "adda/errors.hpp"

namespace adda {

namespace {

void add_bias_relu(Matrix& m, const Matrix& bias, bool relu) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const auto b = bias.row(0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const float v = row[c] + b[c];
      row[c] = relu ? (v > 0.0f ? v : 0.0f) : v;
    }
  }
}

Matrix column_sums(const Matrix& m) {
  Matrix out(1, m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out(0, c) += row[c];
  }
  return out;
}

// grad of ReLU output -> grad of pre-activation, using the activation as mask.
void relu_backward(Matrix& grad, const Matrix& activation) {
  auto g = grad.values();
  const auto a = activation.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(a[i] > 0.0f)) g[i] = 0.0f;
  }
}

Matrix uniform_matrix(std::size_t rows, std::size_t cols, float bound, RngStream& rng) {
  Matrix m(rows, cols);
  for (float& v : m.values()) v = static_cast<float>(rng.uniform(-bound, bound));
  return m;
}

}  // namespace

EncoderParams EncoderParams::zeros_like() const {
  EncoderParams z;
  auto dst = z.tensors();
  const auto src = tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i] = Matrix(src[i]->rows(), src[i]->cols());
  return z;
}

bool EncoderParams::same_shape(const EncoderParams& other) const noexcept {
  const auto a = tensors();
  const auto b = other.tensors();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i]->rows() != b[i]->rows() || a[i]->cols() != b[i]->cols()) return false;
  }
  return true;
}

EncoderParams init_params(std::size_t d_in, std::size_t d_hidden, std::size_t d_embed,
                          RngStream rng) {
  if (d_in == 0 || d_hidden == 0 || d_embed == 0) {
    throw ParameterError("init_params: dimensions must be positive");
  }
  EncoderParams p;
  p.w1 = uniform_matrix(d_in, d_hidden, 1.0f / std::sqrt(static_cast<float>(d_in)), rng);
  p.b1 = Matrix(1, d_hidden);
  p.w2 = uniform_matrix(d_hidden, d_hidden, 1.0f / std::sqrt(static_cast<float>(d_hidden)), rng);
  p.b2 = Matrix(1, d_hidden);
  p.wp = uniform_matrix(d_hidden, d_embed, 1.0f / std::sqrt(static_cast<float>(d_hidden)), rng);
  p.bp = Matrix(1, d_embed);
  return p;
}

Matrix forward_features(const EncoderParams& params, const Matrix& batch) {
  if (batch.cols() != params.input_dim()) {
    throw ShapeError("encoder: batch width " + std::to_string(batch.cols()) +
                     " != input dim " + std::to_string(params.input_dim()));
  }
  Matrix hidden1 = matmul(batch, params.w1);
  add_bias_relu(hidden1, params.b1, true);
  Matrix features = matmul(hidden1, params.w2);
  add_bias_relu(features, params.b2, true);
  return features;
}

ForwardResult forward(const EncoderParams& params, const Matrix& batch) {
  if (batch.cols() != params.input_dim()) {
    throw ShapeError("encoder: batch width " + std::to_string(batch.cols()) +
                     " != input dim " + std::to_string(params.input_dim()));
  }
  ForwardCache cache;
  cache.input = batch;
  cache.hidden1 = matmul(batch, params.w1);
  add_bias_relu(cache.hidden1, params.b1, true);
  cache.features = matmul(cache.hidden1, params.w2);
  add_bias_relu(cache.features, params.b2, true);

  Matrix proj = matmul(cache.features, params.wp);
  add_bias_relu(proj, params.bp, false);
  cache.norms.resize(proj.rows());
  for (std::size_t r = 0; r < proj.rows(); ++r) {
    auto row = proj.row(r);
    float sq = 0.0f;
    for (float v : row) sq += v * v;
    const float norm = std::sqrt(sq);
    if (!std::isfinite(norm)) {
      throw NumericError("encoder: non-finite projection in row " + std::to_string(r) +
                         " (parameters diverged)");
    }
    if (!(norm > kNormEpsilon)) {
      throw DegenerateEmbeddingError("encoder: zero-norm projection in row " + std::to_string(r));
    }
    cache.norms[r] = norm;
    for (float& v : row) v /= norm;
  }
  cache.embeddings = std::move(proj);
  return ForwardResult{cache.features, cache.embeddings, std::move(cache)};
}

Matrix normalize_rows_backward(const Matrix& z, std::span<const float> norms,
                               const Matrix& grad_z) {
  if (z.rows() != grad_z.rows() || z.cols() != grad_z.cols() || norms.size() != z.rows()) {
    throw ShapeError("normalize_rows_backward: shape mismatch");
  }
  Matrix out(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const auto zr = z.row(r);
    const auto gr = grad_z.row(r);
    float dot = 0.0f;
    for (std::size_t c = 0; c < zr.size(); ++c) dot += zr[c] * gr[c];
    auto o = out.row(r);
    for (std::size_t c = 0; c < zr.size(); ++c) o[c] = (gr[c] - zr[c] * dot) / norms[r];
  }
  return out;
}

EncoderParams backward(const EncoderParams& params, const ForwardCache& cache,
                       const Matrix& grad_z) {
  if (grad_z.rows() != cache.embeddings.rows() || grad_z.cols() != cache.embeddings.cols()) {
    throw ShapeError("encoder backward: grad_z shape does not match cached embeddings");
  }
  EncoderParams g;
  const Matrix grad_proj = normalize_rows_backward(cache.embeddings, cache.norms, grad_z);
  g.wp = matmul_tn(cache.features, grad_proj);
  g.bp = column_sums(grad_proj);

  Matrix grad_h = matmul_nt(grad_proj, params.wp);
  relu_backward(grad_h, cache.features);
  g.w2 = matmul_tn(cache.hidden1, grad_h);
  g.b2 = column_sums(grad_h);

  Matrix grad_a1 = matmul_nt(grad_h, params.w2);
  relu_backward(grad_a1, cache.hidden1);
  g.w1 = matmul_tn(cache.input, grad_a1);
  g.b1 = column_sums(grad_a1);
  return g;
}

void sgd_step(EncoderParams& params, const EncoderParams& grads, float lr, float weight_decay) {
  if (!params.same_shape(grads)) throw ShapeError("sgd_step: gradient shapes differ from params");
  const auto gs = grads.tensors();
  for (std::size_t i = 0; i < gs.size(); ++i) {
    if (!gs[i]->all_finite()) {
      throw NumericError(std::string("sgd_step: non-finite gradient in ") +
                         std::string(EncoderParams::kNames[i]));
    }
  }
  auto ps = params.tensors();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto p = ps[i]->values();
    const auto g = gs[i]->values();
    for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * (g[j] + weight_decay * p[j]);
  }
}

EncoderPair EncoderPair::from_query(EncoderParams query, float momentum) {
  if (!(momentum >= 0.0f && momentum <= 1.0f)) {
    throw ParameterError("momentum must lie in [0,1]");
  }
  EncoderPair pair;
  pair.key = query;
  pair.query = std::move(query);
  pair.momentum = momentum;
  return pair;
}

void momentum_update(EncoderPair& pair) {
  if (!(pair.momentum >= 0.0f && pair.momentum <= 1.0f)) {
    throw ParameterError("momentum must lie in [0,1]");
  }
  const float m = pair.momentum;
  auto ks = pair.key.tensors();
  const auto qs = pair.query.tensors();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    auto k = ks[i]->values();
    const auto q = qs[i]->values();
    for (std::size_t j = 0; j < k.size(); ++j) k[j] = m * k[j] + (1.0f - m) * q[j];
  }
}

}  // namespace adda
