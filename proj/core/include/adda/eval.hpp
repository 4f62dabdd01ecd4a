#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adda/data.hpp"
#include "adda/encoder.hpp"
#include "adda/numerics.hpp"

namespace adda {

struct ProbeModel {
  Matrix w;  // [d x classes]
  Matrix b;  // [1 x classes]
  // Standardization fitted on the training split.
  std::vector<float> mean;
  std::vector<float> inv_std;
};

struct FeatureSet {
  Matrix features;
  std::vector<std::uint32_t> labels;
  std::uint32_t num_classes = 0;
};

// Backbone features h of every image, un-augmented. Throws ConfigError when
// the dataset image size does not match the encoder input.
FeatureSet extract_features(const EncoderParams& params, const Dataset& dataset);

// Raw pixels as features (baseline probe).
FeatureSet pixel_features(const Dataset& dataset);

struct ProbeOptions {
  std::size_t epochs = 50;
  float lr = 0.1f;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

struct ProbeResult {
  ProbeModel model;
  double top1 = 0.0;  // on the held-out split
  double untrained_top1 = 0.0;
  // Mean cross-entropy on the training split after each epoch.
  std::vector<double> train_loss;
};

// Multinomial logistic regression by mini-batch gradient descent on
// standardized features, with a seed-deterministic train/val split. Throws
// DomainError if fewer than two classes are present and ParameterError for
// epochs == 0 or negative lr.
ProbeResult linear_probe(const FeatureSet& data, const ProbeOptions& options);

std::vector<std::uint32_t> predict(const ProbeModel& model, const Matrix& features);

// Fraction of exact matches; ShapeError on length mismatch.
double top1_accuracy(std::span<const std::uint32_t> predictions,
                     std::span<const std::uint32_t> labels);

}  // namespace adda
