#include "adda/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "adda/checkpoint.hpp"
#include "adda/errors.hpp"

namespace adda {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

struct SampleViews {
  std::size_t composition = 0;
  Image query;
  Image key;
};

}  // namespace

void TrainConfig::validate() const {
  if (compositions.empty()) throw ParameterError("config: at least one composition is required");
  for (const auto& c : compositions) c.validate();
  if (epochs < 1) throw ParameterError("config: epochs must be >= 1");
  if (batch_size < compositions.size() * min_subbatch || batch_size == 0) {
    throw ParameterError("config: batch_size must be >= N * min_subbatch");
  }
  if (!(tau > 0.0)) throw ParameterError("config: tau must be positive");
  if (!(lr > 0.0f)) throw ParameterError("config: lr must be positive");
  if (!(weight_decay >= 0.0f)) throw ParameterError("config: weight_decay must be >= 0");
  if (!(momentum >= 0.0f && momentum <= 1.0f)) throw ParameterError("config: momentum must lie in [0,1]");
  if (queue_size == 0) throw ParameterError("config: queue_size must be positive");
  if (!(updating_rate > 0.0)) throw ParameterError("config: ur must be positive");
  if (hidden_dim == 0 || embed_dim == 0) throw ParameterError("config: model widths must be positive");
}

TrainState init_state(const TrainConfig& config, std::size_t input_dim) {
  config.validate();
  TrainState s;
  s.seed = config.seed;
  s.pair = EncoderPair::from_query(
      init_params(input_dim, config.hidden_dim, config.embed_dim,
                  RngStream(config.seed, stream_id(StreamPurpose::kInit, 0, 0))),
      config.momentum);
  s.queue = Queue(config.queue_size, config.embed_dim);
  s.sampler = config.compositions.size() == 1
                  ? init_single(config.updating_rate)
                  : init_uniform(config.compositions.size(), config.updating_rate);
  return s;
}

std::size_t steps_per_epoch(std::size_t num_samples, std::size_t batch_size) noexcept {
  return batch_size == 0 ? 0 : num_samples / batch_size;
}

std::vector<double> allocation_probabilities(const SamplerState& sampler,
                                             const Allocation& allocation) {
  if (!allocation.is_fixed()) return probabilities(sampler);
  if (*allocation.fixed_index >= sampler.arms()) {
    throw ParameterError("fixed allocation index out of range");
  }
  std::vector<double> p(sampler.arms(), 0.0);
  p[*allocation.fixed_index] = 1.0;
  return p;
}

EpochStats train_epoch(TrainState& state, const Dataset& dataset, const TrainConfig& config,
                       const Allocation& allocation) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n_comp = config.compositions.size();
  if (state.sampler.arms() != n_comp) {
    throw ConfigError("train_epoch: sampler has " + std::to_string(state.sampler.arms()) +
                      " arms but config lists " + std::to_string(n_comp) + " compositions");
  }
  if (dataset.sample_dim() != state.pair.query.input_dim()) {
    throw ConfigError("train_epoch: dataset sample size " + std::to_string(dataset.sample_dim()) +
                      " != encoder input " + std::to_string(state.pair.query.input_dim()));
  }
  const std::size_t steps = steps_per_epoch(dataset.size(), config.batch_size);
  if (steps == 0) throw ParameterError("train_epoch: batch_size exceeds dataset size");

  const std::size_t epoch = state.epochs_done;
  const std::vector<double> p = allocation_probabilities(state.sampler, allocation);
  const std::size_t min_size = allocation.is_fixed() ? 0 : config.min_subbatch;

  RngStream shuffle_rng(state.seed, stream_id(StreamPurpose::kShuffle, epoch, 0));
  const std::vector<std::size_t> perm = shuffled_indices(dataset.size(), shuffle_rng);

  EpochStats stats;
  stats.epoch = epoch + 1;
  stats.p = p;
  stats.size.assign(n_comp, 0);
  stats.steps = steps;
  std::vector<double> acc_sum(n_comp, 0.0);
  std::vector<std::size_t> acc_steps(n_comp, 0);
  std::vector<double> loss_sum(n_comp, 0.0);
  double total_loss_sum = 0.0;

  const std::size_t batch = config.batch_size;
  const std::size_t d_in = dataset.sample_dim();
  for (std::size_t step = 0; step < steps; ++step) {
    const std::span<const std::size_t> batch_idx(perm.data() + step * batch, batch);
    const SubBatchPlan plan = split_batch(p, batch_idx, min_size);

    std::vector<std::size_t> comp_of(batch);
    for (std::size_t i = 0, pos = 0; i < n_comp; ++i) {
      for (std::size_t k = 0; k < plan.sizes[i]; ++k) comp_of[pos++] = i;
    }

    Matrix xq(batch, d_in);
    Matrix xk(batch, d_in);
    parallel_for(batch, [&](std::size_t j) {
      const std::size_t idx = plan.assignment[j];
      const RngStream rng(state.seed, stream_id(StreamPurpose::kViews, epoch, idx));
      auto [view_q, view_k] = two_views(dataset.images[idx], config.compositions[comp_of[j]], rng);
      if (view_q.pixels.size() != d_in || view_k.pixels.size() != d_in) {
        throw ConfigError("train_epoch: composition output size does not match encoder input");
      }
      write_encoder_input(view_q, xq.row(j));
      write_encoder_input(view_k, xk.row(j));
    });

    ForwardResult fq = forward(state.pair.query, xq);
    const ForwardResult fk = forward(state.pair.key, xk);

    std::vector<ContrastiveOutcome> outcomes(batch);
    parallel_for(batch, [&](std::size_t j) {
      outcomes[j] = infonce(fq.embeddings.row(j), fk.embeddings.row(j), state.queue, config.tau);
    });

    // Per-composition step weights.
    std::vector<double> weight(n_comp, 0.0);
    for (std::size_t i = 0; i < n_comp; ++i) {
      if (plan.sizes[i] == 0) continue;
      const double n_i = static_cast<double>(plan.sizes[i]);
      if (config.loss_weighting == LossWeighting::kUniform) {
        weight[i] = 1.0 / static_cast<double>(batch);
      } else {
        const double w = config.weight_source == WeightSource::kSoftmax
                             ? p[i]
                             : n_i / static_cast<double>(batch);
        weight[i] = w / n_i;
      }
    }

    Matrix grad_z(batch, config.embed_dim);
    std::vector<double> step_loss(n_comp, 0.0);
    std::vector<std::size_t> step_hits(n_comp, 0);
    double objective = 0.0;
    for (std::size_t j = 0; j < batch; ++j) {
      const std::size_t i = comp_of[j];
      const auto& o = outcomes[j];
      step_loss[i] += o.loss;
      step_hits[i] += o.correct ? 1 : 0;
      objective += weight[i] * o.loss;
      auto g = grad_z.row(j);
      for (std::size_t c = 0; c < g.size(); ++c) {
        g[c] = static_cast<float>(weight[i] * o.grad_query[c]);
      }
    }
    if (!std::isfinite(objective)) {
      throw NumericError("train_epoch: non-finite loss at epoch " + std::to_string(epoch + 1) +
                         ", step " + std::to_string(step + 1) + " (queue filled " +
                         std::to_string(state.queue.filled()) + ")");
    }

    const EncoderParams grads = backward(state.pair.query, fq.cache, grad_z);
    sgd_step(state.pair.query, grads, config.lr, config.weight_decay);
    momentum_update(state.pair);
    state.queue.enqueue(fk.embeddings);

    for (std::size_t i = 0; i < n_comp; ++i) {
      stats.size[i] += plan.sizes[i];
      if (plan.sizes[i] == 0) continue;
      loss_sum[i] += step_loss[i];
      acc_sum[i] += static_cast<double>(step_hits[i]) / static_cast<double>(plan.sizes[i]);
      ++acc_steps[i];
    }
    total_loss_sum += objective;
  }

  stats.acc.resize(n_comp);
  stats.mean_loss.resize(n_comp);
  for (std::size_t i = 0; i < n_comp; ++i) {
    if (acc_steps[i] == 0) continue;
    stats.acc[i] = acc_sum[i] / static_cast<double>(acc_steps[i]);
    stats.mean_loss[i] = loss_sum[i] / static_cast<double>(stats.size[i]);
  }
  stats.total_loss = total_loss_sum / static_cast<double>(steps);
  stats.p_std = probability_std(p);

  state.sampler = update(state.sampler, stats.acc);
  state.epochs_done = epoch + 1;
  stats.score = state.sampler.scores;
  stats.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return stats;
}

PretrainResult pretrain(const TrainConfig& config, const Dataset& dataset,
                        const Allocation& allocation, std::optional<TrainState> resume) {
  config.validate();
  dataset.validate();
  if (allocation.is_fixed() && *allocation.fixed_index >= config.compositions.size()) {
    throw ParameterError("fixed baseline: composition index out of range");
  }
  PretrainResult result;
  result.state = resume ? std::move(*resume) : init_state(config, dataset.sample_dim());
  if (result.state.epochs_done >= config.epochs) {
    throw ParameterError("pretrain: checkpoint already covers " +
                         std::to_string(result.state.epochs_done) + " epochs");
  }

  std::ofstream metrics;
  if (!config.metrics_path.empty()) {
    bool has_content = false;
    if (resume) {
      std::ifstream existing(config.metrics_path);
      has_content = existing && existing.peek() != std::ifstream::traits_type::eof();
    }
    metrics.open(config.metrics_path, has_content ? std::ios::app : std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot open metrics file '" + config.metrics_path + "'");
    if (!has_content) metrics << metrics_header(config.compositions.size()) << '\n';
    metrics.flush();
  }

  while (result.state.epochs_done < config.epochs) {
    EpochStats stats = train_epoch(result.state, dataset, config, allocation);
    if (!config.metrics_wall_time) stats.seconds = 0.0;
    if (metrics.is_open()) {
      metrics << metrics_row(stats) << '\n';
      metrics.flush();
      if (!metrics) throw std::runtime_error("write failed for '" + config.metrics_path + "'");
    }
    const bool last = result.state.epochs_done == config.epochs;
    if (!config.checkpoint_path.empty() &&
        (last || (config.checkpoint_every > 0 &&
                  result.state.epochs_done % config.checkpoint_every == 0))) {
      save_checkpoint(result.state, config.checkpoint_path);
    }
    result.history.push_back(std::move(stats));
  }
  return result;
}

PretrainResult fixed_baseline(const TrainConfig& config, const Dataset& dataset,
                              std::size_t composition_index) {
  return pretrain(config, dataset, Allocation::fixed(composition_index));
}

std::string metrics_header(std::size_t n) {
  std::string h = "epoch";
  for (const char* prefix : {"comp_id_", "p_", "score_", "size_", "acc_", "mean_loss_"}) {
    for (std::size_t i = 0; i < n; ++i) h += "," + std::string(prefix) + std::to_string(i);
  }
  h += ",total_loss,p_std,seconds";
  return h;
}

std::string metrics_row(const EpochStats& s) {
  const std::size_t n = s.p.size();
  std::string row = std::to_string(s.epoch);
  for (std::size_t i = 0; i < n; ++i) row += "," + std::to_string(i);
  for (double v : s.p) row += "," + fmt(v);
  for (double v : s.score) row += "," + fmt(v);
  for (std::size_t v : s.size) row += "," + std::to_string(v);
  for (const auto& v : s.acc) row += "," + fmt_opt(v);
  for (const auto& v : s.mean_loss) row += "," + fmt_opt(v);
  row += "," + fmt(s.total_loss) + "," + fmt(s.p_std) + "," + fmt(s.seconds);
  return row;
}

std::size_t final_composition(const EpochStats& last) {
  if (last.size.empty()) throw DomainError("final_composition: no compositions");
  return static_cast<std::size_t>(
      std::max_element(last.size.begin(), last.size.end()) - last.size.begin());
}

}  // namespace adda
