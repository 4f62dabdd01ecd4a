#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adda/augment.hpp"
#include "adda/contrastive.hpp"
#include "adda/data.hpp"
#include "adda/encoder.hpp"
#include "adda/scheduler.hpp"

namespace adda {

// How per-sample gradients are weighted inside a step.
//   kProbability: sample in composition i weighs w_i / n_i, w from WeightSource.
//   kUniform:     every sample weighs 1 / B.
// Config names: "eq2" and "uniform".
enum class LossWeighting { kProbability, kUniform };
// Source of w_i for kProbability: the softmax probabilities, or realized n_i / B.
enum class WeightSource { kSoftmax, kRealized };

struct TrainConfig {
  std::vector<Composition> compositions;
  std::size_t batch_size = 128;
  std::size_t epochs = 30;
  float lr = 0.03f;
  float weight_decay = 1e-4f;
  double tau = 0.2;
  float momentum = 0.99f;
  std::size_t queue_size = 512;
  double updating_rate = 1.0;
  std::size_t min_subbatch = 1;
  std::uint64_t seed = 0;
  LossWeighting loss_weighting = LossWeighting::kProbability;
  WeightSource weight_source = WeightSource::kSoftmax;
  std::size_t hidden_dim = 64;
  std::size_t embed_dim = 32;

  std::string metrics_path;     // empty: no CSV
  std::string checkpoint_path;  // empty: no checkpoint
  std::size_t checkpoint_every = 0;  // 0: end of run only
  bool metrics_wall_time = false;    // false: "seconds" column written as 0

  // Throws ParameterError naming the offending field.
  void validate() const;
};

/// Allocation policy: feedback-driven, or frozen at one composition.
struct Allocation {
  std::optional<std::size_t> fixed_index;

  static Allocation adaptive() { return {}; }
  static Allocation fixed(std::size_t index) { return {index}; }
  bool is_fixed() const noexcept { return fixed_index.has_value(); }
};

/// Everything needed to continue a run bit-exactly.
struct TrainState {
  EncoderPair pair;
  Queue queue;
  SamplerState sampler;
  std::size_t epochs_done = 0;
  std::uint64_t seed = 0;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  std::vector<double> p;  // allocation used during this epoch
  std::vector<double> score;  // scores after this epoch's feedback
  std::vector<std::size_t> size;  // samples per composition this epoch
  std::vector<std::optional<double>> acc;
  std::vector<std::optional<double>> mean_loss;
  double total_loss = 0.0;
  double p_std = 0.0;
  double seconds = 0.0;
  std::size_t steps = 0;
};

TrainState init_state(const TrainConfig& config, std::size_t input_dim);

// Number of optimizer steps in one epoch (partial last batch dropped).
std::size_t steps_per_epoch(std::size_t num_samples, std::size_t batch_size) noexcept;

// Allocation probabilities for the coming epoch.
std::vector<double> allocation_probabilities(const SamplerState& sampler,
                                             const Allocation& allocation);

// One pass over the dataset. RNG streams are derived from (seed, epoch,
// sample index), so the result does not depend on thread count. Throws
// NumericError with a diagnostic when a step loss is not finite.
EpochStats train_epoch(TrainState& state, const Dataset& dataset, const TrainConfig& config,
                       const Allocation& allocation);

struct PretrainResult {
  TrainState state;
  std::vector<EpochStats> history;
};

// Runs epochs (state.epochs_done, config.epochs]. When `resume` is given the
// run continues from it; metrics rows are appended to an existing CSV.
PretrainResult pretrain(const TrainConfig& config, const Dataset& dataset,
                        const Allocation& allocation = Allocation::adaptive(),
                        std::optional<TrainState> resume = std::nullopt);

PretrainResult fixed_baseline(const TrainConfig& config, const Dataset& dataset,
                              std::size_t composition_index);

// Metrics CSV. Columns: epoch, comp_id_i..., p_i..., score_i..., size_i...,
// acc_i..., mean_loss_i..., total_loss, p_std, seconds. Empty cells mark
// compositions that received no data.
std::string metrics_header(std::size_t n);
std::string metrics_row(const EpochStats& stats);

// Composition with the largest sub-batch (lowest index on ties).
std::size_t final_composition(const EpochStats& last);

}  // namespace adda
