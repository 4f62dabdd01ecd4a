#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adda/checkpoint.hpp"
#include "adda/errors.hpp"
#include "adda/trainer.hpp"

using namespace adda;
namespace fs = std::filesystem;

namespace {

Dataset small_dataset(std::uint64_t seed = 3) {
  return generate_synthetic(SyntheticParams{.num_classes = 4, .per_class = 40, .height = 8, .width = 8}, seed);
}

TrainConfig small_config(std::size_t n_comp = 3, std::size_t epochs = 3) {
  TrainConfig c;
  for (std::size_t i = 0; i < n_comp; ++i) {
    c.compositions.push_back(make_composition(i, CropSpec{0.3f, 1.0f, 8, 8}, 0.5f + 0.1f * i, 0.2f, 0.5f, 0.5f));
  }
  c.batch_size = 32;
  c.epochs = epochs;
  c.queue_size = 64;
  c.hidden_dim = 16;
  c.embed_dim = 8;
  c.seed = 5;
  return c;
}

std::string csv_of(const std::vector<EpochStats>& h) {
  std::string out;
  for (const auto& s : h) out += metrics_row(s) + "\n";
  return out;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream b;
  b << in.rdbuf();
  return b.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("adda_trainer_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Trainer, StepCountDropsPartialBatch) {
  EXPECT_EQ(steps_per_epoch(2000, 128), 15u);
  EXPECT_EQ(steps_per_epoch(2048, 128), 16u);
  EXPECT_EQ(steps_per_epoch(100, 128), 0u);
}

TEST(Trainer, ConfigValidation) {
  TrainConfig c = small_config();
  c.epochs = 0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = small_config();
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = small_config();
  c.compositions.clear();
  EXPECT_THROW(c.validate(), ParameterError);
  c = small_config();
  c.epochs = 0;
  EXPECT_THROW(pretrain(c, small_dataset()), ParameterError);
}

TEST(Trainer, EpochConservesSamplesAndFillsQueue) {
  const Dataset ds = small_dataset();
  const TrainConfig c = small_config();
  TrainState st = init_state(c, ds.sample_dim());
  EXPECT_EQ(st.queue.filled(), 0u);
  const EpochStats s = train_epoch(st, ds, c, Allocation::adaptive());
  EXPECT_EQ(s.steps, 5u);
  EXPECT_EQ(std::accumulate(s.size.begin(), s.size.end(), std::size_t{0}), 5u * 32u);
  EXPECT_TRUE(st.queue.full());
  EXPECT_EQ(st.epochs_done, 1u);
  EXPECT_TRUE(std::isfinite(s.total_loss));
  for (double p : s.p) EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
}

TEST(Trainer, IdenticalSeedsGiveIdenticalStats) {
  const Dataset ds = small_dataset();
  const TrainConfig c = small_config();
  const auto a = pretrain(c, ds);
  const auto b = pretrain(c, ds);
  EXPECT_EQ(csv_of(a.history), csv_of(b.history));
  EXPECT_EQ(a.state.pair.query, b.state.pair.query);
  TrainConfig other = c;
  other.seed = 6;
  EXPECT_NE(csv_of(pretrain(other, ds).history), csv_of(a.history));
}

TEST(Trainer, ThreadCountDoesNotChangeResults) {
  const Dataset ds = small_dataset();
  const TrainConfig c = small_config();
  ::setenv("ADDA_THREADS", "1", 1);
  const auto one = pretrain(c, ds);
  ::setenv("ADDA_THREADS", "3", 1);
  const auto three = pretrain(c, ds);
  ::unsetenv("ADDA_THREADS");
  EXPECT_EQ(csv_of(one.history), csv_of(three.history));
  EXPECT_EQ(encode_checkpoint(one.state), encode_checkpoint(three.state));
}

TEST(Trainer, SingleCompositionIsPlainTraining) {
  const Dataset ds = small_dataset();
  const TrainConfig c = small_config(1, 2);
  const auto r = pretrain(c, ds);
  for (const auto& s : r.history) {
    EXPECT_EQ(s.p, std::vector<double>{1.0});
    EXPECT_EQ(s.size, std::vector<std::size_t>{5u * 32u});
    EXPECT_EQ(s.p_std, 0.0);
  }
  const auto fixed = fixed_baseline(c, ds, 0);
  EXPECT_EQ(csv_of(fixed.history), csv_of(r.history));
  EXPECT_EQ(encode_checkpoint(fixed.state), encode_checkpoint(r.state));
}

TEST(Trainer, FixedBaselineStaysOneHot) {
  const Dataset ds = small_dataset();
  const TrainConfig c = small_config(3, 3);
  const auto r = fixed_baseline(c, ds, 1);
  for (const auto& s : r.history) {
    EXPECT_EQ(s.p, (std::vector<double>{0.0, 1.0, 0.0}));
    EXPECT_EQ(s.size, (std::vector<std::size_t>{0, 160, 0}));
    EXPECT_TRUE(s.acc[1].has_value());
    EXPECT_FALSE(s.acc[0].has_value());
    EXPECT_EQ(final_composition(s), 1u);
  }
  EXPECT_THROW(fixed_baseline(c, ds, 3), ParameterError);
}

TEST(Trainer, MetricsCsvHasOneRowPerEpoch) {
  const fs::path dir = temp_dir("metrics");
  TrainConfig c = small_config(3, 4);
  c.metrics_path = (dir / "m.csv").string();
  c.checkpoint_path = (dir / "c.adck").string();
  pretrain(c, small_dataset());
  std::istringstream in(read_text(c.metrics_path));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, metrics_header(3));
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4u);
  EXPECT_TRUE(fs::exists(c.checkpoint_path));
}

TEST(Trainer, ResumeReproducesContinuation) {
  const fs::path dir = temp_dir("resume");
  const Dataset ds = small_dataset();
  TrainConfig full = small_config(3, 6);
  const auto whole = pretrain(full, ds);

  TrainConfig first = full;
  first.epochs = 3;
  first.checkpoint_path = (dir / "half.adck").string();
  pretrain(first, ds);
  const auto rest = pretrain(full, ds, Allocation::adaptive(), load_checkpoint(first.checkpoint_path));
  ASSERT_EQ(rest.history.size(), 3u);
  EXPECT_EQ(csv_of(rest.history),
            csv_of(std::vector<EpochStats>(whole.history.begin() + 3, whole.history.end())));
  EXPECT_EQ(encode_checkpoint(rest.state), encode_checkpoint(whole.state));
}

TEST(Trainer, ResumeRejectsFinishedCheckpoint) {
  const Dataset ds = small_dataset();
  const TrainConfig c = small_config(3, 2);
  auto done = pretrain(c, ds).state;
  EXPECT_THROW(pretrain(c, ds, Allocation::adaptive(), done), ParameterError);
}

TEST(Trainer, DivergenceAbortsWithNumericError) {
  TrainConfig c = small_config(3, 3);
  c.lr = 1e20f;
  EXPECT_THROW(pretrain(c, small_dataset()), NumericError);
}

TEST(Trainer, UniformWeightingAndRealizedWeightsRun) {
  const Dataset ds = small_dataset();
  TrainConfig a = small_config(3, 2);
  a.loss_weighting = LossWeighting::kUniform;
  TrainConfig b = small_config(3, 2);
  b.weight_source = WeightSource::kRealized;
  const auto ra = pretrain(a, ds), rb = pretrain(b, ds), base = pretrain(small_config(3, 2), ds);
  EXPECT_NE(csv_of(ra.history), csv_of(base.history));
  EXPECT_TRUE(std::isfinite(rb.history.back().total_loss));
}

TEST(Trainer, EasyCompositionScoresHigherEarly) {
  const Scenario sc = easy_scenario(SyntheticParams{}, 1);
  TrainConfig c;
  c.compositions = sc.compositions;
  c.epochs = 2;
  c.seed = 1;
  const auto r = pretrain(c, sc.dataset);
  const auto& last = r.history.back();
  EXPECT_GT(*last.acc[0], *last.acc[1]);
  EXPECT_LT(last.p[0], 1.0 / 3.0);
}

TEST(Trainer, MetricsRowFormatsMissingCells) {
  EpochStats s;
  s.epoch = 2;
  s.p = {0.0, 1.0};
  s.score = {0.5, 0.25};
  s.size = {0, 128};
  s.acc = {std::nullopt, 0.75};
  s.mean_loss = {std::nullopt, 1.5};
  s.total_loss = 1.5;
  EXPECT_EQ(metrics_row(s), "2,0,1,0,1,0.5,0.25,0,128,,0.75,,1.5,1.5,0,0");
  EXPECT_EQ(metrics_header(1), "epoch,comp_id_0,p_0,score_0,size_0,acc_0,mean_loss_0,total_loss,p_std,seconds");
}
