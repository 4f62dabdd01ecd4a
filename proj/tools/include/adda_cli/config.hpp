#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adda/data.hpp"
#include "adda/eval.hpp"
#include "adda/trainer.hpp"

namespace adda::cli {

// Per-composition settings before the image size is known.
struct CompositionSettings {
  float crop_min = 0.2f;
  float crop_max = 1.0f;
  float jitter_freq = 0.8f;
  float gray_freq = 0.2f;
  float blur_freq = 0.5f;
  float flip_freq = 0.5f;
  JitterStrength jitter{};
  float blur_sigma_min = 0.1f;
  float blur_sigma_max = 1.0f;
};

struct DataSettings {
  std::string path;  // if set, load instead of generating
  SyntheticParams synthetic{};
  std::uint64_t seed = 0;
  bool easy_scenario = false;
};

/// Parsed run configuration.
///
/// Text format: one `key = value` per line, `#` starts a comment.
/// Composition keys take the form `comp.<i>.<field>`. Relative paths are
/// resolved against the directory of the config file. Unknown keys are
/// errors.
struct RunConfig {
  TrainConfig train{};
  std::vector<CompositionSettings> compositions;  // empty: defaults
  DataSettings data{};
  ProbeOptions probe{};
  std::string resume_path;
  std::string ablate_table;
  std::string ablate_dir;
};

RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

// Every recognized top-level key, for documentation and tests.
const std::vector<std::string>& known_keys();

// Dataset described by the config (loaded or generated).
Dataset materialize_dataset(const RunConfig& config);

// Compositions sized to the dataset images. With no comp.* keys this is the
// easy scenario's triple when data.scenario = easy, otherwise three
// compositions with jitter frequencies 0.6, 0.7, 0.8.
std::vector<Composition> build_compositions(const RunConfig& config, const Dataset& dataset);

TrainConfig build_train_config(const RunConfig& config, const Dataset& dataset);

}  // namespace adda::cli
