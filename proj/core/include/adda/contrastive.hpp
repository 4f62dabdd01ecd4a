#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "adda/numerics.hpp"

namespace adda {

/// Fixed-capacity FIFO of unit-norm key embeddings (the negative set).
class Queue {
 public:
  Queue() = default;
  Queue(std::size_t capacity, std::size_t dim);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t filled() const noexcept { return filled_; }
  std::size_t head() const noexcept { return head_; }
  bool full() const noexcept { return filled_ == capacity_; }

  // i-th entry in age order, 0 = oldest.
  std::span<const float> entry(std::size_t i) const noexcept;

  // Appends rows in order, evicting the oldest entries when over capacity.
  // Throws DomainError for rows that are not unit norm within 1e-5 and
  // ShapeError for a width mismatch.
  void enqueue(const Matrix& keys);

  // Raw ring buffer access for checkpointing.
  const Matrix& storage() const noexcept { return storage_; }
  static Queue restore(Matrix storage, std::size_t head, std::size_t filled);

  friend bool operator==(const Queue&, const Queue&) = default;

 private:
  std::size_t capacity_ = 0;
  std::size_t dim_ = 0;
  std::size_t head_ = 0;  // next write slot
  std::size_t filled_ = 0;
  Matrix storage_;
};

struct ContrastiveOutcome {
  double loss = 0.0;
  std::vector<double> logits;  // [positive, queue oldest..newest], already divided by tau
  bool correct = false;        // positive logit strictly greater than every negative
  std::vector<float> grad_query;
  std::vector<float> grad_positive;
};

// InfoNCE of one query against its positive and the filled part of the
// queue, evaluated as logsumexp(logits) - logits[0]. Throws ParameterError
// for tau <= 0 and ShapeError on dimension mismatch.
ContrastiveOutcome infonce(std::span<const float> query, std::span<const float> positive,
                           const Queue& queue, double tau);

// Fraction of correct outcomes; nullopt when there are none.
std::optional<double> pretext_accuracy(std::span<const ContrastiveOutcome> outcomes);
std::optional<double> pretext_accuracy(std::span<const bool> correct);

// Sum_i losses_i * p_i. p must sum to 1 within 1e-6.
double weighted_epoch_loss(std::span<const double> losses, std::span<const double> p);

}  // namespace adda
