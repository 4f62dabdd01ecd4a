#include "adda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "adda/errors.hpp"
#include "adda/scheduler.hpp"

namespace adda {

namespace {

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(m.row(rows[r]).begin(), m.row(rows[r]).end(), out.row(r).begin());
  }
  return out;
}

void standardize(Matrix& m, const ProbeModel& model) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - model.mean[c]) * model.inv_std[c];
  }
}

// Row-wise softmax of x W + b, computed in place on the returned logits.
Matrix class_probabilities(const ProbeModel& model, const Matrix& x) {
  Matrix logits = matmul(x, model.w);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += model.b(0, c);
    const auto p = softmax(std::span<const float>(row.data(), row.size()));
    std::copy(p.begin(), p.end(), row.begin());
  }
  return logits;
}

double mean_cross_entropy(const ProbeModel& model, const Matrix& x,
                          std::span<const std::uint32_t> y) {
  const Matrix p = class_probabilities(model, x);
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    total -= std::log(std::max(static_cast<double>(p(r, y[r])), 1e-30));
  }
  return total / static_cast<double>(x.rows());
}

std::vector<std::uint32_t> argmax_rows(const Matrix& scores) {
  std::vector<std::uint32_t> out(scores.rows());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    const auto row = scores.row(r);
    out[r] = static_cast<std::uint32_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace

FeatureSet extract_features(const EncoderParams& params, const Dataset& dataset) {
  dataset.validate();
  if (dataset.sample_dim() != params.input_dim()) {
    throw ConfigError("extract_features: images have " + std::to_string(dataset.sample_dim()) +
                      " values but the encoder expects " + std::to_string(params.input_dim()));
  }
  std::vector<std::size_t> all(dataset.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  FeatureSet fs;
  fs.features = forward_features(params, images_to_matrix(dataset, all));
  fs.labels = dataset.labels;
  fs.num_classes = dataset.num_classes;
  return fs;
}

FeatureSet pixel_features(const Dataset& dataset) {
  dataset.validate();
  std::vector<std::size_t> all(dataset.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return {images_to_matrix(dataset, all), dataset.labels, dataset.num_classes};
}

std::vector<std::uint32_t> predict(const ProbeModel& model, const Matrix& features) {
  Matrix x = features;
  standardize(x, model);
  Matrix logits = matmul(x, model.w);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    for (std::size_t c = 0; c < logits.cols(); ++c) logits(r, c) += model.b(0, c);
  }
  return argmax_rows(logits);
}

double top1_accuracy(std::span<const std::uint32_t> predictions,
                     std::span<const std::uint32_t> labels) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("top1_accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (labels.empty()) throw DomainError("top1_accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

ProbeResult linear_probe(const FeatureSet& data, const ProbeOptions& options) {
  const std::size_t n = data.features.rows();
  if (data.labels.size() != n) throw ShapeError("linear_probe: label count != feature rows");
  if (options.epochs == 0) throw ParameterError("linear_probe: epochs must be >= 1");
  if (!(options.lr >= 0.0f)) throw ParameterError("linear_probe: lr must be >= 0");
  if (options.batch_size == 0) throw ParameterError("linear_probe: batch_size must be >= 1");
  if (!data.features.all_finite()) throw NumericError("linear_probe: non-finite features");
  const std::set<std::uint32_t> classes(data.labels.begin(), data.labels.end());
  if (classes.size() < 2) throw DomainError("linear_probe: degenerate task (fewer than 2 classes)");
  const std::size_t num_classes =
      std::max<std::size_t>(data.num_classes, static_cast<std::size_t>(*classes.rbegin()) + 1);

  RngStream split_rng(options.seed, stream_id(StreamPurpose::kProbe, 0, 0));
  const std::vector<std::size_t> perm = shuffled_indices(n, split_rng);
  const auto n_train = static_cast<std::size_t>(
      std::clamp(std::llround(options.train_fraction * static_cast<double>(n)), 1LL,
                 static_cast<long long>(n) - 1));
  const std::span<const std::size_t> train_idx(perm.data(), n_train);
  const std::span<const std::size_t> val_idx(perm.data() + n_train, n - n_train);

  Matrix x_train = gather_rows(data.features, train_idx);
  Matrix x_val = gather_rows(data.features, val_idx);
  std::vector<std::uint32_t> y_train, y_val;
  for (std::size_t i : train_idx) y_train.push_back(data.labels[i]);
  for (std::size_t i : val_idx) y_val.push_back(data.labels[i]);

  const std::size_t d = data.features.cols();
  ProbeResult result;
  ProbeModel& model = result.model;
  model.w = Matrix(d, num_classes);
  model.b = Matrix(1, num_classes);
  model.mean.assign(d, 0.0f);
  model.inv_std.assign(d, 1.0f);
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < n_train; ++r) {
      sum += x_train(r, c);
      sq += static_cast<double>(x_train(r, c)) * x_train(r, c);
    }
    const double mean = sum / static_cast<double>(n_train);
    const double var = std::max(sq / static_cast<double>(n_train) - mean * mean, 0.0);
    model.mean[c] = static_cast<float>(mean);
    model.inv_std[c] = var > 1e-12 ? static_cast<float>(1.0 / std::sqrt(var)) : 1.0f;
  }
  standardize(x_train, model);
  standardize(x_val, model);

  auto val_accuracy = [&] {
    const Matrix p = class_probabilities(model, x_val);
    return top1_accuracy(argmax_rows(p), y_val);
  };
  result.untrained_top1 = val_accuracy();

  std::vector<std::size_t> order(n_train);
  for (std::size_t e = 0; e < options.epochs; ++e) {
    RngStream rng(options.seed, stream_id(StreamPurpose::kProbe, e + 1, 0));
    order = shuffled_indices(n_train, rng);
    for (std::size_t start = 0; start < n_train; start += options.batch_size) {
      const std::size_t len = std::min(options.batch_size, n_train - start);
      const std::span<const std::size_t> rows(order.data() + start, len);
      const Matrix xb = gather_rows(x_train, rows);
      Matrix grad = class_probabilities(model, xb);
      for (std::size_t r = 0; r < len; ++r) {
        grad(r, y_train[rows[r]]) -= 1.0f;
        for (float& v : grad.row(r)) v /= static_cast<float>(len);
      }
      const Matrix gw = matmul_tn(xb, grad);
      for (std::size_t i = 0; i < gw.size(); ++i) model.w.values()[i] -= options.lr * gw.values()[i];
      for (std::size_t r = 0; r < len; ++r) {
        for (std::size_t c = 0; c < num_classes; ++c) model.b(0, c) -= options.lr * grad(r, c);
      }
    }
    result.train_loss.push_back(mean_cross_entropy(model, x_train, y_train));
  }
  if (!model.w.all_finite() || !model.b.all_finite()) {
    throw NumericError("linear_probe: diverged (non-finite weights)");
  }
  result.top1 = val_accuracy();
  return result;
}

}  // namespace adda
