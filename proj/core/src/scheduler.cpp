#include "adda/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "adda/errors.hpp"
#include "adda/numerics.hpp"

namespace adda {

SamplerState init_uniform(std::size_t n, double updating_rate) {
  if (n < 2) throw ParameterError("sampler: need at least 2 compositions, got " + std::to_string(n));
  if (!(updating_rate > 0.0)) throw ParameterError("sampler: updating rate must be positive");
  SamplerState s;
  s.scores.assign(n, kInitialScore);
  s.updating_rate = updating_rate;
  s.last_acc.assign(n, std::nullopt);
  return s;
}

SamplerState init_single(double updating_rate) {
  if (!(updating_rate > 0.0)) throw ParameterError("sampler: updating rate must be positive");
  SamplerState s;
  s.scores.assign(1, kInitialScore);
  s.updating_rate = updating_rate;
  s.last_acc.assign(1, std::nullopt);
  return s;
}

std::vector<double> probabilities(const SamplerState& state) {
  return softmax(std::span<const double>(state.scores), state.updating_rate);
}

SamplerState update(const SamplerState& state, std::span<const std::optional<double>> acc) {
  if (acc.size() > state.arms()) {
    throw ShapeError("sampler update: " + std::to_string(acc.size()) + " accuracies for " +
                     std::to_string(state.arms()) + " compositions");
  }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (acc[i] && !(*acc[i] >= 0.0 && *acc[i] <= 1.0)) {
      throw DomainError("sampler update: accuracy of composition " + std::to_string(i) +
                        " outside [0,1]");
    }
  }
  SamplerState next = state;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (!acc[i]) continue;
    next.scores[i] = 1.0 - *acc[i];
    next.last_acc[i] = acc[i];
  }
  ++next.epoch;
  return next;
}

std::vector<std::size_t> subbatch_sizes(std::span<const double> p, std::size_t num_x,
                                        std::size_t min_size) {
  const std::size_t n = p.size();
  if (n == 0) throw DomainError("subbatch_sizes: empty probability vector");
  if (num_x < n * min_size) {
    throw InfeasiblePlanError("subbatch_sizes: " + std::to_string(num_x) + " samples cannot give " +
                              std::to_string(n) + " sub-batches of at least " +
                              std::to_string(min_size));
  }
  std::vector<std::size_t> sizes(n);
  std::vector<double> remainder(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = p[i] * static_cast<double>(num_x);
    const double floor_target = std::floor(target);
    sizes[i] = static_cast<std::size_t>(floor_target);
    remainder[i] = target - floor_target;
    assigned += sizes[i];
  }
  // Rounding noise can push the floor sum past num_x; trim from the back.
  for (std::size_t i = n; assigned > num_x && i-- > 0;) {
    const std::size_t cut = std::min(sizes[i], assigned - num_x);
    sizes[i] -= cut;
    assigned -= cut;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < num_x; k = (k + 1) % n) {
    ++sizes[order[k]];
    ++assigned;
  }

  for (std::size_t i = 0; i < n; ++i) {
    while (sizes[i] < min_size) {
      std::size_t donor = 0;
      for (std::size_t j = 1; j < n; ++j) {
        if (sizes[j] > sizes[donor]) donor = j;
      }
      --sizes[donor];
      ++sizes[i];
    }
  }
  return sizes;
}

std::size_t SubBatchPlan::offset(std::size_t i) const noexcept {
  return std::accumulate(sizes.begin(), sizes.begin() + static_cast<std::ptrdiff_t>(i),
                         std::size_t{0});
}

std::span<const std::size_t> SubBatchPlan::segment(std::size_t i) const noexcept {
  return std::span<const std::size_t>(assignment).subspan(offset(i), sizes[i]);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

SubBatchPlan split_batch(std::span<const double> p, std::span<const std::size_t> indices,
                         std::size_t min_size) {
  SubBatchPlan plan;
  plan.sizes = subbatch_sizes(p, indices.size(), min_size);
  plan.assignment.assign(indices.begin(), indices.end());
  return plan;
}

SubBatchPlan plan_epoch(const SamplerState& state, std::size_t num_x, RngStream& rng,
                        std::size_t min_size) {
  if (num_x == 0) throw DomainError("plan_epoch: empty dataset");
  const std::vector<double> p = probabilities(state);
  const std::vector<std::size_t> perm = shuffled_indices(num_x, rng);
  return split_batch(p, perm, min_size);
}

double probability_std(std::span<const double> p) {
  if (p.empty()) return 0.0;
  const double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
  double var = 0.0;
  for (double v : p) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(p.size()));
}

}  // namespace adda
