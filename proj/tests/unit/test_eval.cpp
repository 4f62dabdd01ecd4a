#include <gtest/gtest.h>

#include "adda/checkpoint.hpp"
#include "adda/errors.hpp"
#include "adda/eval.hpp"

using namespace adda;

namespace {

FeatureSet blobs(std::size_t per_class, std::uint64_t seed) {
  RngStream r(seed, 1);
  FeatureSet fs{Matrix(2 * per_class, 5), {}, 2};
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const std::uint32_t label = i % 2;
    for (std::size_t c = 0; c < 5; ++c) {
      fs.features(i, c) = static_cast<float>((label ? 3.0 : -3.0) + r.normal());
    }
    fs.labels.push_back(label);
  }
  return fs;
}

}  // namespace

TEST(Probe, SeparableBlobs) {
  const auto r = linear_probe(blobs(200, 1), ProbeOptions{});
  EXPECT_GE(r.top1, 0.95);
}

TEST(Probe, RandomLabelsAreChance) {
  RngStream rng(2, 2);
  FeatureSet fs{Matrix(4000, 6), {}, 4};
  for (float& v : fs.features.values()) v = static_cast<float>(rng.normal());
  for (std::size_t i = 0; i < 4000; ++i) fs.labels.push_back(static_cast<std::uint32_t>(rng.below(4)));
  EXPECT_NEAR(linear_probe(fs, ProbeOptions{.epochs = 10}).top1, 0.25, 0.05);
}

TEST(Probe, ZeroLearningRateKeepsUntrainedAccuracy) {
  const auto r = linear_probe(blobs(100, 3), ProbeOptions{.epochs = 5, .lr = 0.0f});
  EXPECT_EQ(r.top1, r.untrained_top1);
}

TEST(Probe, TrainingLossNonIncreasing) {
  const auto r = linear_probe(blobs(150, 4), ProbeOptions{.epochs = 30, .lr = 0.05f});
  ASSERT_EQ(r.train_loss.size(), 30u);
  for (std::size_t e = 1; e < r.train_loss.size(); ++e) {
    EXPECT_LE(r.train_loss[e], r.train_loss[e - 1] + 1e-3) << "epoch " << e;
  }
}

TEST(Probe, DeterministicAndValidated) {
  const auto data = blobs(50, 5);
  const auto a = linear_probe(data, ProbeOptions{.seed = 3});
  const auto b = linear_probe(data, ProbeOptions{.seed = 3});
  EXPECT_EQ(a.top1, b.top1);
  EXPECT_EQ(a.model.w, b.model.w);
  EXPECT_THROW(linear_probe(data, ProbeOptions{.epochs = 0}), ParameterError);
  EXPECT_THROW(linear_probe(data, ProbeOptions{.lr = -1.0f}), ParameterError);
  FeatureSet one = data;
  for (auto& l : one.labels) l = 0;
  EXPECT_THROW(linear_probe(one, ProbeOptions{}), DomainError);
}

TEST(Top1, Counting) {
  const std::vector<std::uint32_t> a = {0, 1, 2, 3}, b = {0, 1, 2, 0}, c = {1, 2, 3, 0};
  EXPECT_EQ(top1_accuracy(a, a), 1.0);
  EXPECT_EQ(top1_accuracy(a, c), 0.0);
  EXPECT_EQ(top1_accuracy(a, b), 0.75);
  EXPECT_THROW(top1_accuracy(a, std::vector<std::uint32_t>{1}), ShapeError);
}

TEST(Features, ShapeDeterminismAndImmutability) {
  const Dataset ds = generate_synthetic(SyntheticParams{.num_classes = 2, .per_class = 10, .height = 6, .width = 6}, 1);
  const EncoderParams p = init_params(ds.sample_dim(), 12, 4, RngStream(1, 1));
  const EncoderParams before = p;
  const FeatureSet a = extract_features(p, ds);
  EXPECT_EQ(a.features.rows(), ds.size());
  EXPECT_EQ(a.features.cols(), 12u);
  EXPECT_TRUE(a.features.all_finite());
  EXPECT_EQ(a.features, extract_features(p, ds).features);
  linear_probe(a, ProbeOptions{.epochs = 3});
  EXPECT_EQ(p, before);
  const EncoderParams wrong = init_params(10, 12, 4, RngStream(1, 1));
  EXPECT_THROW(extract_features(wrong, ds), ConfigError);
  EXPECT_EQ(pixel_features(ds).features.cols(), ds.sample_dim());
}
