#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <stdexcept>

#include "adda/errors.hpp"
#include "adda/numerics.hpp"
#include "adda/rng.hpp"
#include "oracles.hpp"

using namespace adda;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
  Matrix m(r, c);
  for (float& v : m.values()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return m;
}

}  // namespace

TEST(Matmul, HandExample) {
  const Matrix a(2, 2, {1, 2, 3, 4});
  const Matrix b(2, 2, {5, 6, 7, 8});
  EXPECT_EQ(matmul(a, b), Matrix(2, 2, {19, 22, 43, 50}));
}

TEST(Matmul, IdentityAndZero) {
  RngStream rng(1, 1);
  const Matrix m = random_matrix(3, 4, rng);
  EXPECT_EQ(matmul(Matrix::identity(3), m), m);
  EXPECT_EQ(matmul(Matrix(2, 3), m), Matrix(2, 4));
}

TEST(Matmul, ShapeMismatchThrows) {
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
  EXPECT_THROW(matmul_tn(Matrix(2, 3), Matrix(3, 3)), ShapeError);
  EXPECT_THROW(matmul_nt(Matrix(2, 3), Matrix(2, 4)), ShapeError);
  EXPECT_THROW(Matrix(2, 2, std::vector<float>{1, 2, 3}), ShapeError);
}

TEST(Matmul, MatchesDoubleOracle) {
  RngStream rng(2, 1);
  const Matrix a = random_matrix(7, 5, rng);
  const Matrix b = random_matrix(5, 6, rng);
  const Matrix c = matmul(a, b);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < 5; ++k) ref += double(a(i, k)) * double(b(k, j));
      EXPECT_NEAR(c(i, j), ref, 1e-5);
    }
  }
}

TEST(Matmul, TransposedVariantsAgree) {
  RngStream rng(3, 1);
  const Matrix a = random_matrix(4, 3, rng);
  const Matrix b = random_matrix(4, 5, rng);
  Matrix at(3, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) at(j, i) = a(i, j);
  EXPECT_EQ(matmul_tn(a, b), matmul(at, b));
  Matrix bt(5, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 5; ++j) bt(j, i) = b(i, j);
  EXPECT_EQ(matmul_nt(at, bt), matmul(at, b));
}

TEST(Matmul, AssociativityProperty) {
  RngStream rng(4, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(3, 4, rng);
    const Matrix b = random_matrix(4, 5, rng);
    const Matrix c = random_matrix(5, 2, rng);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < left.size(); ++i) {
      diff += std::pow(left.values()[i] - right.values()[i], 2);
      ref += std::pow(right.values()[i], 2);
    }
    EXPECT_LE(std::sqrt(diff / ref), 1e-4);
  }
}

TEST(Matmul, ParallelResultIsBitIdentical) {
  RngStream rng(5, 1);
  const Matrix a = random_matrix(128, 96, rng);
  const Matrix b = random_matrix(96, 64, rng);
  ::setenv("ADDA_THREADS", "1", 1);
  const Matrix serial = matmul(a, b);
  ::setenv("ADDA_THREADS", "4", 1);
  const Matrix parallel = matmul(a, b);
  ::unsetenv("ADDA_THREADS");
  EXPECT_EQ(serial, parallel);
}

TEST(Softmax, OracleValues) {
  const std::vector<double> v = {0.5, 0.9, 0.1};
  const auto p = softmax(std::span<const double>(v));
  EXPECT_NEAR(p[0], 0.3163, 1e-4);
  EXPECT_NEAR(p[1], 0.4718, 1e-4);
  EXPECT_NEAR(p[2], 0.2120, 1e-4);
  const auto ref = oracle::softmax(v);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], ref[i], 1e-12);
}

TEST(Softmax, ConstantAndZeroScaleAreUniform) {
  const std::vector<double> c = {2.5, 2.5, 2.5};
  for (double x : softmax(std::span<const double>(c), 7.0)) EXPECT_DOUBLE_EQ(x, 1.0 / 3.0);
  const std::vector<double> v = {0.1, 5.0, -3.0, 2.0};
  for (double x : softmax(std::span<const double>(v), 0.0)) EXPECT_DOUBLE_EQ(x, 0.25);
}

TEST(Softmax, EmptyAndNonFiniteThrow) {
  EXPECT_THROW(softmax(std::span<const double>()), DomainError);
  const std::vector<double> bad = {1.0, NAN};
  EXPECT_THROW(softmax(std::span<const double>(bad)), DomainError);
}

TEST(Softmax, StableForLargeLogits) {
  const std::vector<float> v = {1000.0f, 1001.0f, 999.0f};
  const auto p = softmax(std::span<const float>(v));
  EXPECT_TRUE(std::all_of(p.begin(), p.end(), [](float x) { return std::isfinite(x); }));
  EXPECT_NEAR(p[1], 0.6652, 1e-4);
}

TEST(Softmax, SumPermutationAndSpreadProperties) {
  RngStream rng(6, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(8);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-3.0, 3.0);
    const double scale = rng.uniform(0.1, 4.0);
    const auto p = softmax(std::span<const double>(v), scale);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-6);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<double> pv(n);
    for (std::size_t i = 0; i < n; ++i) pv[i] = v[perm[i]];
    const auto pp = softmax(std::span<const double>(pv), scale);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(pp[i], p[perm[i]], 1e-15);

    auto spread = [](const std::vector<double>& q) {
      const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
      return *hi - *lo;
    };
    const auto p2 = softmax(std::span<const double>(v), scale * 1.5);
    EXPECT_GE(spread(p2) + 1e-15, spread(p));
  }
}

TEST(L2Normalize, Examples) {
  const std::vector<float> v = {3, 4};
  const auto u = l2_normalize(v);
  EXPECT_NEAR(u[0], 0.6f, 1e-7);
  EXPECT_NEAR(u[1], 0.8f, 1e-7);
  const auto again = l2_normalize(u);
  EXPECT_NEAR(again[0], u[0], 1e-7);
  EXPECT_NEAR(again[1], u[1], 1e-7);
  const std::vector<float> zero = {0, 0};
  EXPECT_THROW(l2_normalize(zero), DegenerateEmbeddingError);
}

TEST(Rng, DeterministicByCoordinates) {
  RngStream a(42, 7, 3), b(42, 7, 3);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(Rng, DistinctStreamsShareNoPrefix) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 10; ++s) {
    RngStream r(99, stream_id(StreamPurpose::kViews, 1, s));
    for (int i = 0; i < 10000; ++i) seen.insert(r.next_u64());
  }
  EXPECT_EQ(seen.size(), 100000u);
  RngStream a(99, 1), b(99, 2);
  EXPECT_NE(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformMeanAndRange) {
  RngStream r(1234, 5);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000.0, 0.5, 0.01);
}

TEST(Rng, BelowStaysInRangeAndNormalMoments) {
  RngStream r(8, 8);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[r.below(5)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
  double m = 0, s = 0;
  for (int i = 0; i < 50000; ++i) {
    const double x = r.normal();
    m += x;
    s += x * x;
  }
  EXPECT_NEAR(m / 50000, 0.0, 0.02);
  EXPECT_NEAR(s / 50000, 1.0, 0.03);
}

TEST(Rng, ChildStreamsDifferFromParentAndSiblings) {
  const RngStream parent(5, 10);
  RngStream c0 = parent.child(0), c1 = parent.child(1), p = parent;
  const auto a = c0.next_u64(), b = c1.next_u64(), c = p.next_u64();
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(b, c);
}

TEST(Rng, StreamIdPacksFields) {
  EXPECT_NE(stream_id(StreamPurpose::kViews, 1, 0), stream_id(StreamPurpose::kViews, 2, 0));
  EXPECT_NE(stream_id(StreamPurpose::kViews, 1, 0), stream_id(StreamPurpose::kShuffle, 1, 0));
  EXPECT_NE(stream_id(StreamPurpose::kViews, 1, 0), stream_id(StreamPurpose::kViews, 1, 1));
}

TEST(FiniteDiff, QuadraticAndConstant) {
  const std::vector<double> x = {1.0, 2.0};
  const auto g = finite_diff_grad(
      [](std::span<const double> v) { return v[0] * v[0] + v[1] * v[1]; }, x, 1e-4);
  EXPECT_NEAR(g[0], 2.0, 1e-4);
  EXPECT_NEAR(g[1], 4.0, 1e-4);
  for (double v : finite_diff_grad([](std::span<const double>) { return 3.0; }, x, 1e-3)) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(FiniteDiff, SoftmaxCrossEntropyMatchesAnalytic) {
  RngStream r(11, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(5);
    for (auto& v : x) v = r.uniform(-2.0, 2.0);
    const std::size_t target = r.below(5);
    auto ce = [target](std::span<const double> v) {
      double m = *std::max_element(v.begin(), v.end()), s = 0.0;
      for (double e : v) s += std::exp(e - m);
      return m + std::log(s) - v[target];
    };
    const auto g = finite_diff_grad(ce, x, 1e-5);
    const auto p = oracle::softmax(x);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(g[i], p[i] - (i == target ? 1.0 : 0.0), 1e-3);
    }
  }
}

TEST(FiniteDiff, NonFiniteValueThrows) {
  const std::vector<double> x = {0.0};
  EXPECT_THROW(finite_diff_grad([](std::span<const double>) { return NAN; }, x, 1e-3), NumericError);
}

TEST(ParallelFor, CoversEveryIndexOnceAndPropagatesErrors) {
  ::setenv("ADDA_THREADS", "3", 1);
  std::vector<int> hits(101, 0);
  parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
  ::unsetenv("ADDA_THREADS");
  EXPECT_EQ(worker_count(), 1u);
}
