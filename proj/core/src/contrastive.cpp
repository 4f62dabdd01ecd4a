#include "adda/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adda/errors.hpp"

namespace adda {

namespace {

constexpr double kUnitTolerance = 1e-5;

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

}  // namespace

Queue::Queue(std::size_t capacity, std::size_t dim)
    : capacity_(capacity), dim_(dim), storage_(capacity, dim) {
  if (capacity == 0 || dim == 0) throw ParameterError("queue: capacity and dim must be positive");
}

std::span<const float> Queue::entry(std::size_t i) const noexcept {
  const std::size_t oldest = (head_ + capacity_ - filled_) % capacity_;
  return storage_.row((oldest + i) % capacity_);
}

void Queue::enqueue(const Matrix& keys) {
  if (keys.rows() > 0 && keys.cols() != dim_) {
    throw ShapeError("queue: key width " + std::to_string(keys.cols()) + " != " +
                     std::to_string(dim_));
  }
  for (std::size_t r = 0; r < keys.rows(); ++r) {
    const auto k = keys.row(r);
    const double n = std::sqrt(dot(k, k));
    if (std::abs(n - 1.0) > kUnitTolerance) {
      throw DomainError("queue: key row " + std::to_string(r) + " is not unit norm");
    }
  }
  for (std::size_t r = 0; r < keys.rows(); ++r) {
    std::copy_n(keys.row(r).begin(), dim_, storage_.row(head_).begin());
    head_ = (head_ + 1) % capacity_;
    filled_ = std::min(filled_ + 1, capacity_);
  }
}

Queue Queue::restore(Matrix storage, std::size_t head, std::size_t filled) {
  if (head >= storage.rows() || filled > storage.rows()) {
    throw ParameterError("queue: restore indices out of range");
  }
  Queue q(storage.rows(), storage.cols());
  q.storage_ = std::move(storage);
  q.head_ = head;
  q.filled_ = filled;
  return q;
}

ContrastiveOutcome infonce(std::span<const float> query, std::span<const float> positive,
                           const Queue& queue, double tau) {
  if (!(tau > 0.0)) throw ParameterError("infonce: tau must be positive");
  if (query.size() != positive.size() || (queue.filled() > 0 && query.size() != queue.dim())) {
    throw ShapeError("infonce: embedding dimensions differ");
  }
  ContrastiveOutcome out;
  const std::size_t n = queue.filled();
  out.logits.resize(n + 1);
  out.logits[0] = dot(query, positive) / tau;
  double top = out.logits[0];
  double best_negative = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    out.logits[k + 1] = dot(query, queue.entry(k)) / tau;
    top = std::max(top, out.logits[k + 1]);
    best_negative = std::max(best_negative, out.logits[k + 1]);
  }
  double total = 0.0;
  std::vector<double> weights(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    weights[k] = std::exp(out.logits[k] - top);
    total += weights[k];
  }
  const double lse = top + std::log(total);
  out.loss = lse - out.logits[0];
  if (n == 0) out.loss = 0.0;
  out.correct = out.logits[0] > best_negative;

  // d loss / d query = (sum_k w_k key_k - positive) / tau, with key_0 = positive.
  const std::size_t d = query.size();
  std::vector<double> g(d);
  for (std::size_t k = 0; k <= n; ++k) weights[k] /= total;
  for (std::size_t c = 0; c < d; ++c) g[c] = (weights[0] - 1.0) * positive[c];
  for (std::size_t k = 0; k < n; ++k) {
    const auto e = queue.entry(k);
    for (std::size_t c = 0; c < d; ++c) g[c] += weights[k + 1] * e[c];
  }
  out.grad_query.resize(d);
  out.grad_positive.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    out.grad_query[c] = static_cast<float>(g[c] / tau);
    out.grad_positive[c] = static_cast<float>((weights[0] - 1.0) * query[c] / tau);
  }
  return out;
}

std::optional<double> pretext_accuracy(std::span<const bool> correct) {
  if (correct.empty()) return std::nullopt;
  const auto hits = std::count(correct.begin(), correct.end(), true);
  return static_cast<double>(hits) / static_cast<double>(correct.size());
}

std::optional<double> pretext_accuracy(std::span<const ContrastiveOutcome> outcomes) {
  if (outcomes.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (const auto& o : outcomes) hits += o.correct ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

double weighted_epoch_loss(std::span<const double> losses, std::span<const double> p) {
  if (losses.size() != p.size()) {
    throw ShapeError("weighted_epoch_loss: " + std::to_string(losses.size()) + " losses vs " +
                     std::to_string(p.size()) + " probabilities");
  }
  double mass = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    mass += p[i];
    total += losses[i] * p[i];
  }
  if (std::abs(mass - 1.0) > 1e-6) throw DomainError("weighted_epoch_loss: p does not sum to 1");
  return total;
}

}  // namespace adda
