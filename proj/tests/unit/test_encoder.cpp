#include <gtest/gtest.h>

#include <cmath>

#include "adda/encoder.hpp"
#include "adda/errors.hpp"
#include "oracles.hpp"

using namespace adda;

namespace {

Matrix random_batch(std::size_t b, std::size_t d, std::uint64_t seed) {
  RngStream r(seed, 3);
  Matrix m(b, d);
  for (float& v : m.values()) v = static_cast<float>(r.normal());
  return m;
}

double row_norm(const Matrix& m, std::size_t r) {
  double s = 0.0;
  for (float v : m.row(r)) s += double(v) * v;
  return std::sqrt(s);
}

}  // namespace

TEST(Encoder, InitShapesAndRange) {
  const EncoderParams p = init_params(12, 16, 8, RngStream(1, 1));
  EXPECT_EQ(p.input_dim(), 12u);
  EXPECT_EQ(p.hidden_dim(), 16u);
  EXPECT_EQ(p.embed_dim(), 8u);
  const float bound = 1.0f / std::sqrt(12.0f);
  for (float v : p.w1.values()) EXPECT_LE(std::abs(v), bound);
  for (float v : p.b1.values()) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(p, init_params(12, 16, 8, RngStream(1, 1)));
  EXPECT_NE(p, init_params(12, 16, 8, RngStream(2, 1)));
}

TEST(Encoder, EmbeddingsAreUnitRows) {
  const EncoderParams p = init_params(12, 16, 8, RngStream(2, 1));
  const auto out = forward(p, random_batch(6, 12, 1));
  for (std::size_t r = 0; r < 6; ++r) EXPECT_NEAR(row_norm(out.embeddings, r), 1.0, 1e-5);
  EXPECT_EQ(out.features.cols(), 16u);
}

TEST(Encoder, IdenticalRowsGiveIdenticalEmbeddings) {
  const EncoderParams p = init_params(12, 16, 8, RngStream(3, 1));
  Matrix batch(3, 12);
  const Matrix one = random_batch(1, 12, 2);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 12; ++c) batch(r, c) = one(0, c);
  const auto out = forward(p, batch);
  for (std::size_t c = 0; c < 8; ++c) {
    EXPECT_EQ(out.embeddings(0, c), out.embeddings(1, c));
    EXPECT_EQ(out.embeddings(0, c), out.embeddings(2, c));
  }
}

TEST(Encoder, ZeroParametersAreDegenerate) {
  EncoderParams p = init_params(4, 5, 3, RngStream(4, 1)).zeros_like();
  EXPECT_THROW(forward(p, random_batch(2, 4, 3)), DegenerateEmbeddingError);
}

TEST(Encoder, WidthMismatchThrows) {
  const EncoderParams p = init_params(12, 16, 8, RngStream(5, 1));
  EXPECT_THROW(forward(p, random_batch(2, 11, 3)), ShapeError);
}

TEST(Encoder, ZeroUpstreamGradientGivesZeroGrads) {
  const EncoderParams p = init_params(12, 16, 8, RngStream(6, 1));
  const auto out = forward(p, random_batch(4, 12, 4));
  const EncoderParams g = backward(p, out.cache, Matrix(4, 8));
  EXPECT_EQ(g, p.zeros_like());
  EXPECT_THROW(backward(p, out.cache, Matrix(4, 7)), ShapeError);
}

TEST(Encoder, NormalizationGradientIsOrthogonalToZ) {
  const EncoderParams p = init_params(12, 16, 8, RngStream(7, 1));
  const auto out = forward(p, random_batch(5, 12, 5));
  const Matrix g = random_batch(5, 8, 6);
  const Matrix gv = normalize_rows_backward(out.embeddings, out.cache.norms, g);
  for (std::size_t r = 0; r < 5; ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < 8; ++c) dot += double(gv(r, c)) * out.embeddings(r, c);
    EXPECT_NEAR(dot, 0.0, 1e-5);
  }
}

TEST(Encoder, BackwardMatchesFiniteDifferences) {
  const oracle::EncoderShape shape{12, 10, 8};
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 4; ++seed) {
    const EncoderParams p = init_params(12, 10, 8, RngStream(seed, 11));
    const Matrix x = random_batch(4, 12, seed + 100);
    const Matrix c = random_batch(4, 8, seed + 200);
    std::vector<std::vector<double>> xs(4, std::vector<double>(12));
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t k = 0; k < 12; ++k) xs[r][k] = x(r, k);
    const auto theta = oracle::flatten(p);
    if (oracle::min_relu_margin(theta, shape, xs) < 1e-3) continue;
    // Objective sum_r c_r . z_r has dL/dz = c.
    auto f = [&](std::span<const double> t) {
      const auto z = oracle::encoder_forward(std::vector<double>(t.begin(), t.end()), shape, xs);
      double s = 0.0;
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t k = 0; k < 8; ++k) s += z[r][k] * c(r, k);
      return s;
    };
    const auto fd = finite_diff_grad(f, theta, 1e-6);
    const auto analytic = oracle::flatten(backward(p, forward(p, x).cache, c));
    EXPECT_LT(oracle::relative_error(analytic, fd), 1e-3) << "seed " << seed;
    ++checked;
  }
}

TEST(Sgd, ArithmeticExamples) {
  EncoderParams p = init_params(1, 1, 1, RngStream(1, 1));
  for (Matrix* m : p.tensors()) m->values()[0] = 1.0f;
  EncoderParams g = p.zeros_like();
  for (Matrix* m : g.tensors()) m->values()[0] = 2.0f;
  EncoderParams a = p;
  sgd_step(a, g, 0.1f, 0.0f);
  for (const Matrix* m : a.tensors()) EXPECT_NEAR(m->values()[0], 0.8f, 1e-7);
  EncoderParams b = p;
  sgd_step(b, p.zeros_like(), 0.1f, 0.1f);
  for (const Matrix* m : b.tensors()) EXPECT_NEAR(m->values()[0], 0.99f, 1e-7);
  EncoderParams c = p;
  sgd_step(c, g, 0.0f, 0.5f);
  EXPECT_EQ(c, p);
}

TEST(Sgd, NonFiniteGradientAborts) {
  EncoderParams p = init_params(3, 3, 2, RngStream(1, 1));
  EncoderParams g = p.zeros_like();
  g.w2.values()[1] = NAN;
  const EncoderParams before = p;
  EXPECT_THROW(sgd_step(p, g, 0.1f, 0.0f), NumericError);
  EXPECT_EQ(p, before);
}

TEST(Momentum, ExtremesAndArithmetic) {
  const EncoderParams q = init_params(3, 4, 2, RngStream(2, 1));
  EncoderParams zero = q.zeros_like();

  EncoderPair one{q, zero, 1.0f};
  momentum_update(one);
  EXPECT_EQ(one.key, zero);

  EncoderPair none{q, zero, 0.0f};
  momentum_update(none);
  EXPECT_EQ(none.key, q);

  EncoderParams twos = q.zeros_like();
  for (Matrix* m : twos.tensors())
    for (float& v : m->values()) v = 2.0f;
  EncoderPair half{twos, zero, 0.5f};
  momentum_update(half);
  for (const Matrix* m : half.key.tensors())
    for (float v : m->values()) EXPECT_EQ(v, 1.0f);
}

TEST(Momentum, DistanceContractsByFactorM) {
  const EncoderParams q = init_params(6, 5, 4, RngStream(3, 1));
  EncoderPair pair{q, init_params(6, 5, 4, RngStream(4, 1)), 0.9f};
  auto dist = [&] {
    double s = 0.0;
    const auto a = oracle::flatten(pair.query), b = oracle::flatten(pair.key);
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  };
  double d = dist();
  for (int step = 0; step < 5; ++step) {
    momentum_update(pair);
    const double next = dist();
    EXPECT_NEAR(next / d, 0.9, 1e-4);
    d = next;
  }
}

TEST(Momentum, FromQueryCopiesParameters) {
  const EncoderParams q = init_params(3, 4, 2, RngStream(5, 1));
  const EncoderPair pair = EncoderPair::from_query(q, 0.99f);
  EXPECT_EQ(pair.key, q);
  EXPECT_FLOAT_EQ(pair.momentum, 0.99f);
}
