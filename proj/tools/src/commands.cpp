#include "adda_cli/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "adda/checkpoint.hpp"
#include "adda/data.hpp"
#include "adda/errors.hpp"
#include "adda/eval.hpp"
#include "adda/trainer.hpp"
#include "adda_cli/config.hpp"
#include "adda_cli/report.hpp"

namespace adda::cli {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Shortest form that parses back to the same float.
std::string fmt_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.7g", static_cast<double>(v));
  for (int digits = 1; digits <= 9; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, static_cast<double>(v));
    if (std::strtof(buf, nullptr) == v) break;
  }
  return buf;
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kFormatFailure;
  } catch (const MetricsParseError& e) {
    err << "error: " << e.what() << '\n';
    return kFormatFailure;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kParameterFailure;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const DegenerateEmbeddingError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

std::string config_dir(const std::string& config_path) {
  const fs::path parent = fs::path(config_path).parent_path();
  return parent.empty() ? "." : parent.string();
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " not found: '" + path + "'");
}

// A checkpoint must describe the same model, data shape, and run settings as
// the config it is resumed under.
void check_resume_compatible(const TrainState& s, const TrainConfig& tc, const Dataset& ds) {
  auto mismatch = [](const std::string& field, const std::string& ckpt, const std::string& cfg) {
    throw ConfigError("resume checkpoint does not match config: " + field + " is " + ckpt +
                      " in the checkpoint but " + cfg + " in the config");
  };
  auto check = [&](const std::string& field, auto a, auto b) {
    if (a != b) mismatch(field, fmt(static_cast<double>(a)), fmt(static_cast<double>(b)));
  };
  check("input dimension", s.pair.query.input_dim(), ds.sample_dim());
  check("hidden_dim", s.pair.query.hidden_dim(), tc.hidden_dim);
  check("embed_dim", s.pair.query.embed_dim(), tc.embed_dim);
  check("queue_size", s.queue.capacity(), tc.queue_size);
  check("composition count", s.sampler.arms(), tc.compositions.size());
  check("seed", s.seed, tc.seed);
  check("momentum", s.pair.momentum, tc.momentum);
  check("ur", s.sampler.updating_rate, tc.updating_rate);
  if (s.epochs_done >= tc.epochs) {
    throw ConfigError("resume checkpoint already covers " + std::to_string(s.epochs_done) +
                      " of " + std::to_string(tc.epochs) + " epochs");
  }
}

void require_finite_history(const std::vector<EpochStats>& history) {
  for (const auto& h : history) {
    bool ok = std::isfinite(h.total_loss) && std::isfinite(h.p_std);
    for (double p : h.p) ok = ok && std::isfinite(p);
    if (!ok) throw NumericError("epoch " + std::to_string(h.epoch) + " produced non-finite metrics");
  }
}

void append_csv(const std::string& path, const std::string& header, const std::vector<std::string>& rows) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::app);
  if (fresh) out << header << '\n';
  for (const auto& r : rows) out << r << '\n';
  out.flush();
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

double probe_top1(const EncoderParams& params, const Dataset& ds, const ProbeOptions& options) {
  const ProbeResult r = linear_probe(extract_features(params, ds), options);
  if (!std::isfinite(r.top1)) throw NumericError("probe accuracy is not finite");
  return r.top1;
}

// Largest run id already recorded in the table or present as run_<id>/.
std::size_t next_run_id(const std::string& table, const std::string& dir) {
  std::size_t best = 0;
  auto consider = [&best](const std::string& text) {
    std::size_t id = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
    if (ec == std::errc() && ptr == text.data() + text.size()) best = std::max(best, id);
  };
  if (std::ifstream in(table); in) {
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) consider(line.substr(0, line.find(',')));
  }
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_directory() && name.rfind("run_", 0) == 0) consider(name.substr(4));
    }
  }
  return best + 1;
}

float jitter_frequency(const Composition& comp) {
  for (const auto& op : comp.ops) {
    if (op.kind == AugKind::kColorJitter) return op.frequency;
  }
  return 0.0f;
}

}  // namespace

std::pair<std::size_t, std::size_t> parse_hw(const std::string& text) {
  const auto x = text.find('x');
  auto parse = [&](std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
      throw ParameterError("--hw: expected <H>x<W> with positive sizes, got '" + text + "'");
    }
    return v;
  };
  if (x == std::string::npos) throw ParameterError("--hw: expected <H>x<W>, got '" + text + "'");
  const std::string_view view(text);
  return {parse(view.substr(0, x)), parse(view.substr(x + 1))};
}

int cmd_pretrain(const PretrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_config(args.config_path);
    if (args.seed) cfg.train.seed = *args.seed;
    const Dataset ds = materialize_dataset(cfg);
    TrainConfig tc = build_train_config(cfg, ds);
    const std::string base = config_dir(args.config_path);
    if (tc.metrics_path.empty()) tc.metrics_path = (fs::path(base) / "metrics.csv").string();
    if (tc.checkpoint_path.empty()) tc.checkpoint_path = (fs::path(base) / "checkpoint.adck").string();

    std::optional<TrainState> resume;
    if (!cfg.resume_path.empty()) {
      require_file(cfg.resume_path, "resume checkpoint");
      resume = load_checkpoint(cfg.resume_path);
      check_resume_compatible(*resume, tc, ds);
    }
    const std::size_t start = resume ? resume->epochs_done : 0;
    const PretrainResult result = pretrain(tc, ds, Allocation::adaptive(), std::move(resume));
    require_finite_history(result.history);

    const EpochStats& last = result.history.back();
    out << "pretrained epochs " << start + 1 << ".." << last.epoch << " on " << ds.size()
        << " images, " << tc.compositions.size() << " compositions\n";
    out << "final p:";
    for (double p : last.p) out << ' ' << fmt(p);
    out << "\nmetrics: " << tc.metrics_path << "\ncheckpoint: " << tc.checkpoint_path << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_probe(const ProbeArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ProbeOptions options;
    if (args.probe_epochs) {
      if (*args.probe_epochs == 0) throw ParameterError("--probe-epochs must be positive");
      options.epochs = *args.probe_epochs;
    }
    require_file(args.checkpoint_path, "checkpoint");
    require_file(args.dataset_path, "dataset");
    const TrainState state = load_checkpoint(args.checkpoint_path);
    const Dataset ds = load_dataset(args.dataset_path);
    const double top1 = probe_top1(state.pair.query, ds, options);
    append_csv(args.out_path, "checkpoint,probe_epochs,top1",
               {args.checkpoint_path + "," + std::to_string(options.epochs) + "," + fmt(top1)});
    out << "top1 " << fmt(top1) << " (" << args.out_path << ")\n";
    return static_cast<int>(kOk);
  });
}

int cmd_ablate(const AblateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(args.config_path);
    if (!cfg.resume_path.empty()) throw ConfigError("config key 'resume' is not supported by ablate");
    const Dataset ds = materialize_dataset(cfg);
    const TrainConfig base = build_train_config(cfg, ds);
    const std::string dir =
        cfg.ablate_dir.empty() ? (fs::path(config_dir(args.config_path)) / "ablate").string() : cfg.ablate_dir;
    const std::string table =
        cfg.ablate_table.empty() ? (fs::path(dir) / "ablation.csv").string() : cfg.ablate_table;
    const std::size_t run_id = next_run_id(table, dir);
    const fs::path run_dir = fs::path(dir) / ("run_" + std::to_string(run_id));
    fs::create_directories(run_dir);

    std::vector<std::string> rows;
    auto run_one = [&](const std::string& method, const Allocation& allocation) {
      TrainConfig tc = base;
      tc.metrics_path = (run_dir / (method + ".metrics.csv")).string();
      tc.checkpoint_path = (run_dir / (method + ".adck")).string();
      const PretrainResult result = pretrain(tc, ds, allocation);
      require_finite_history(result.history);
      const std::size_t final_comp = final_composition(result.history.back());
      const double top1 = probe_top1(result.state.pair.query, ds, cfg.probe);
      rows.push_back(std::to_string(run_id) + "," + method + "," + std::to_string(final_comp) + "," +
                     fmt_float(jitter_frequency(tc.compositions[final_comp])) + "," + fmt(top1));
      out << method << ": final composition " << final_comp << ", top1 " << fmt(top1) << '\n';
    };
    run_one("adaptive", Allocation::adaptive());
    for (std::size_t j = 0; j < base.compositions.size(); ++j) {
      run_one("fixed_" + std::to_string(j), Allocation::fixed(j));
    }
    append_csv(table, "run_id,method,final_composition,final_jitter_freq,top1", rows);
    out << "run " << run_id << " written to " << table << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const MetricsTable table = load_metrics(args.metrics_path);
    for (const auto& path : write_report(table, args.out_dir)) out << path << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_gen_data(const GenDataArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.out_path.empty()) throw ParameterError("--out is required");
    if (args.classes < 2) throw ParameterError("--classes must be at least 2");
    if (args.per_class == 0) throw ParameterError("--per-class must be positive");
    const SyntheticParams params{.num_classes = args.classes,
                                 .per_class = args.per_class,
                                 .height = args.height,
                                 .width = args.width};
    if (args.scenario == "easy") {
      const Scenario sc = easy_scenario(params, args.seed);
      save_dataset(sc.dataset, args.out_path);
      // Composition keys reproducing the scenario, for use in a config file.
      std::ofstream conf(args.out_path + ".comps.conf", std::ios::trunc);
      conf << "dataset = " << fs::path(args.out_path).filename().string() << '\n';
      for (const auto& comp : sc.compositions) {
        const std::string k = "comp." + std::to_string(comp.id) + ".";
        conf << k << "crop_min = " << fmt_float(comp.crop.scale_min) << '\n';
        conf << k << "crop_max = " << fmt_float(comp.crop.scale_max) << '\n';
        for (const auto& op : comp.ops) {
          const char* key = op.kind == AugKind::kColorJitter  ? "jitter_freq"
                            : op.kind == AugKind::kGrayscale  ? "gray_freq"
                            : op.kind == AugKind::kGaussianBlur ? "blur_freq"
                                                                : "flip_freq";
          conf << k << key << " = " << fmt_float(op.frequency) << '\n';
        }
      }
      if (!conf) throw std::runtime_error("cannot write '" + args.out_path + ".comps.conf'");
      out << "wrote " << sc.dataset.size() << " images and " << args.out_path << ".comps.conf\n";
    } else if (args.scenario == "standard") {
      const Dataset ds = generate_synthetic(params, args.seed);
      save_dataset(ds, args.out_path);
      out << "wrote " << ds.size() << " images to " << args.out_path << '\n';
    } else {
      throw ParameterError("--scenario must be 'standard' or 'easy'");
    }
    return static_cast<int>(kOk);
  });
}

}  // namespace adda::cli
