#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace adda::cli {

// Every command returns 0 on success. Errors are reported on `err` as
// "error: <message>" and mapped to a nonzero status by exception type.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,        // I/O and anything unexpected
  kConfigFailure = 2,  // bad config, missing input, shape mismatch
  kParameterFailure = 3,
  kFormatFailure = 4,  // malformed binary or CSV input
  kNumericFailure = 5,
};

struct PretrainArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;  // overrides the config seed
};

struct ProbeArgs {
  std::string checkpoint_path;
  std::string dataset_path;
  std::optional<std::size_t> probe_epochs;
  std::string out_path = "probe.csv";  // appended to, header written when new
};

struct AblateArgs {
  std::string config_path;
};

struct ReportArgs {
  std::string metrics_path;
  std::string out_dir;
};

struct GenDataArgs {
  std::size_t classes = 4;
  std::size_t per_class = 500;
  std::size_t height = 16;
  std::size_t width = 16;
  std::string out_path;
  std::string scenario = "standard";  // or "easy"
  std::uint64_t seed = 0;
};

int cmd_pretrain(const PretrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_probe(const ProbeArgs& args, std::ostream& out, std::ostream& err);
int cmd_ablate(const AblateArgs& args, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);
int cmd_gen_data(const GenDataArgs& args, std::ostream& out, std::ostream& err);

// "32x24" -> {32, 24}; throws ParameterError otherwise.
std::pair<std::size_t, std::size_t> parse_hw(const std::string& text);

}  // namespace adda::cli
