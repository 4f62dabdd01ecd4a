#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "adda/rng.hpp"

namespace adda {

/// Closed-loop sampling controller.
///
/// The persistent state holds raw difficulty scores s_i = mean(1 - Acc_i);
/// probabilities are softmax(ur * s). Softmax is applied only when scores are
/// turned into probabilities, never stored back into the scores.
struct SamplerState {
  std::vector<double> scores;
  double updating_rate = 1.0;
  std::size_t epoch = 0;
  std::vector<std::optional<double>> last_acc;

  std::size_t arms() const noexcept { return scores.size(); }

  friend bool operator==(const SamplerState&, const SamplerState&) = default;
};

inline constexpr double kInitialScore = 0.5;

// Equal scores for N >= 2 compositions. Throws ParameterError otherwise, or
// when ur <= 0.
SamplerState init_uniform(std::size_t n, double updating_rate);

// Single-composition state (p = (1)); the degenerate plain-contrastive case.
SamplerState init_single(double updating_rate);

std::vector<double> probabilities(const SamplerState& state);

// Epoch-end feedback. acc[i] is composition i's mean pretext accuracy over the
// epoch, or nullopt if it received no data (its score is carried forward).
// acc may be shorter than N; missing tail entries count as nullopt. Throws
// DomainError for accuracies outside [0,1] and ShapeError if acc is longer
// than N.
SamplerState update(const SamplerState& state, std::span<const std::optional<double>> acc);

// Integer sub-batch sizes: largest remainder of p_i * num_x with lowest-index
// tie-break, then each size raised to min_size by taking from the currently
// largest sub-batch (lowest index on ties). Throws InfeasiblePlanError when
// num_x < N * min_size.
std::vector<std::size_t> subbatch_sizes(std::span<const double> p, std::size_t num_x,
                                        std::size_t min_size);

struct SubBatchPlan {
  std::vector<std::size_t> sizes;
  // Permutation of the sample indices; segment i spans
  // [offset(i), offset(i) + sizes[i]).
  std::vector<std::size_t> assignment;

  std::size_t offset(std::size_t i) const noexcept;
  std::span<const std::size_t> segment(std::size_t i) const noexcept;
};

// Fisher-Yates permutation of [0, n) drawn from rng.
std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng);

SubBatchPlan plan_epoch(const SamplerState& state, std::size_t num_x, RngStream& rng,
                        std::size_t min_size = 1);

// Splits `indices` (already shuffled) into contiguous segments of the sizes
// subbatch_sizes(p, indices.size(), min_size).
SubBatchPlan split_batch(std::span<const double> p, std::span<const std::size_t> indices,
                         std::size_t min_size);

// Population standard deviation of a probability vector.
double probability_std(std::span<const double> p);

}  // namespace adda
