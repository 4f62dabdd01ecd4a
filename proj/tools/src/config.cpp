#include "adda_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "adda/errors.hpp"

namespace adda::cli {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expect) {
  throw ConfigError("config key '" + key + "': invalid value '" + value + "' (expected " + expect + ")");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "non-negative integer");
  return out;
}

double to_f64(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  double out = 0;
  in >> out;
  if (!in || !in.eof() || !std::isfinite(out)) bad_value(key, v, "number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true/false");
}

std::pair<std::size_t, std::size_t> to_hw(const std::string& key, const std::string& v) {
  const auto x = v.find('x');
  if (x == std::string::npos) bad_value(key, v, "<H>x<W>");
  return {to_u64(key, v.substr(0, x)), to_u64(key, v.substr(x + 1))};
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value,
                                  const std::string& base)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.seed = to_u64(k, v); }},
      {"epochs", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.epochs = to_u64(k, v); }},
      {"batch_size", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.batch_size = to_u64(k, v); }},
      {"lr", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.lr = static_cast<float>(to_f64(k, v)); }},
      {"weight_decay", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.weight_decay = static_cast<float>(to_f64(k, v)); }},
      {"tau", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.tau = to_f64(k, v); }},
      {"momentum", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.momentum = static_cast<float>(to_f64(k, v)); }},
      {"queue_size", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.queue_size = to_u64(k, v); }},
      {"ur", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.updating_rate = to_f64(k, v); }},
      {"min_subbatch", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.min_subbatch = to_u64(k, v); }},
      {"hidden_dim", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.hidden_dim = to_u64(k, v); }},
      {"embed_dim", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.embed_dim = to_u64(k, v); }},
      {"loss_weighting", [](RunConfig& c, auto& k, auto& v, auto&) {
         if (v == "eq2") c.train.loss_weighting = LossWeighting::kProbability;
         else if (v == "uniform") c.train.loss_weighting = LossWeighting::kUniform;
         else bad_value(k, v, "eq2|uniform");
       }},
      {"eq2_weights", [](RunConfig& c, auto& k, auto& v, auto&) {
         if (v == "softmax") c.train.weight_source = WeightSource::kSoftmax;
         else if (v == "realized") c.train.weight_source = WeightSource::kRealized;
         else bad_value(k, v, "softmax|realized");
       }},
      {"metrics", [](RunConfig& c, auto&, auto& v, auto& base) { c.train.metrics_path = resolve(base, v); }},
      {"checkpoint", [](RunConfig& c, auto&, auto& v, auto& base) { c.train.checkpoint_path = resolve(base, v); }},
      {"checkpoint_every", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.checkpoint_every = to_u64(k, v); }},
      {"metrics_wall_time", [](RunConfig& c, auto& k, auto& v, auto&) { c.train.metrics_wall_time = to_bool(k, v); }},
      {"resume", [](RunConfig& c, auto&, auto& v, auto& base) { c.resume_path = resolve(base, v); }},
      {"dataset", [](RunConfig& c, auto&, auto& v, auto& base) { c.data.path = resolve(base, v); }},
      {"data.classes", [](RunConfig& c, auto& k, auto& v, auto&) { c.data.synthetic.num_classes = to_u64(k, v); }},
      {"data.per_class", [](RunConfig& c, auto& k, auto& v, auto&) { c.data.synthetic.per_class = to_u64(k, v); }},
      {"data.hw", [](RunConfig& c, auto& k, auto& v, auto&) {
         const auto [h, w] = to_hw(k, v);
         c.data.synthetic.height = h;
         c.data.synthetic.width = w;
       }},
      {"data.seed", [](RunConfig& c, auto& k, auto& v, auto&) { c.data.seed = to_u64(k, v); }},
      {"data.scenario", [](RunConfig& c, auto& k, auto& v, auto&) {
         if (v == "easy") c.data.easy_scenario = true;
         else if (v == "standard") c.data.easy_scenario = false;
         else bad_value(k, v, "standard|easy");
       }},
      {"probe.epochs", [](RunConfig& c, auto& k, auto& v, auto&) { c.probe.epochs = to_u64(k, v); }},
      {"probe.lr", [](RunConfig& c, auto& k, auto& v, auto&) { c.probe.lr = static_cast<float>(to_f64(k, v)); }},
      {"probe.batch_size", [](RunConfig& c, auto& k, auto& v, auto&) { c.probe.batch_size = to_u64(k, v); }},
      {"probe.seed", [](RunConfig& c, auto& k, auto& v, auto&) { c.probe.seed = to_u64(k, v); }},
      {"ablate.table", [](RunConfig& c, auto&, auto& v, auto& base) { c.ablate_table = resolve(base, v); }},
      {"ablate.dir", [](RunConfig& c, auto&, auto& v, auto& base) { c.ablate_dir = resolve(base, v); }},
  };
  return table;
}

using CompSetter = std::function<void(CompositionSettings&, const std::string& key, const std::string& value)>;

const std::map<std::string, CompSetter>& comp_setters() {
  auto f = [](float CompositionSettings::*field) -> CompSetter {
    return [field](CompositionSettings& s, const std::string& k, const std::string& v) {
      s.*field = static_cast<float>(to_f64(k, v));
    };
  };
  static const std::map<std::string, CompSetter> table = {
      {"crop_min", f(&CompositionSettings::crop_min)},
      {"crop_max", f(&CompositionSettings::crop_max)},
      {"jitter_freq", f(&CompositionSettings::jitter_freq)},
      {"gray_freq", f(&CompositionSettings::gray_freq)},
      {"blur_freq", f(&CompositionSettings::blur_freq)},
      {"flip_freq", f(&CompositionSettings::flip_freq)},
      {"blur_sigma_min", f(&CompositionSettings::blur_sigma_min)},
      {"blur_sigma_max", f(&CompositionSettings::blur_sigma_max)},
      {"brightness", [](CompositionSettings& s, auto& k, auto& v) { s.jitter.brightness = static_cast<float>(to_f64(k, v)); }},
      {"contrast", [](CompositionSettings& s, auto& k, auto& v) { s.jitter.contrast = static_cast<float>(to_f64(k, v)); }},
      {"saturation", [](CompositionSettings& s, auto& k, auto& v) { s.jitter.saturation = static_cast<float>(to_f64(k, v)); }},
  };
  return table;
}

Composition to_composition(std::size_t id, const CompositionSettings& s, std::size_t h, std::size_t w) {
  Composition comp = make_composition(
      id, CropSpec{.scale_min = s.crop_min, .scale_max = s.crop_max, .out_height = h, .out_width = w},
      s.jitter_freq, s.gray_freq, s.blur_freq, s.flip_freq);
  for (auto& op : comp.ops) {
    op.jitter = s.jitter;
    op.sigma_min = s.blur_sigma_min;
    op.sigma_max = s.blur_sigma_max;
  }
  return comp;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    for (const auto& [name, _] : comp_setters()) k.push_back("comp.<i>." + name);
    return k;
  }();
  return keys;
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  RunConfig cfg;
  std::map<std::size_t, CompositionSettings> comps;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("comp.", 0) == 0) {
      const auto dot = key.find('.', 5);
      if (dot == std::string::npos) throw ConfigError("config key '" + key + "': expected comp.<i>.<field>");
      const std::size_t index = to_u64(key, key.substr(5, dot - 5));
      const auto it = comp_setters().find(key.substr(dot + 1));
      if (it == comp_setters().end()) throw ConfigError("unknown config key '" + key + "'");
      it->second(comps[index], key, value);
      continue;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value, base_dir);
  }
  std::size_t expected = 0;
  for (auto& [index, settings] : comps) {
    if (index != expected++) {
      throw ConfigError("composition indices must be contiguous from 0 (missing comp." +
                        std::to_string(expected - 1) + ")");
    }
    cfg.compositions.push_back(settings);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const fs::path parent = fs::path(path).parent_path();
  return parse_config(buf.str(), parent.empty() ? "." : parent.string());
}

Dataset materialize_dataset(const RunConfig& config) {
  if (!config.data.path.empty()) return load_dataset(config.data.path);
  if (config.data.easy_scenario) return easy_scenario(config.data.synthetic, config.data.seed).dataset;
  return generate_synthetic(config.data.synthetic, config.data.seed);
}

std::vector<Composition> build_compositions(const RunConfig& config, const Dataset& dataset) {
  const std::size_t h = dataset.height();
  const std::size_t w = dataset.width();
  std::vector<Composition> out;
  if (!config.compositions.empty()) {
    for (std::size_t i = 0; i < config.compositions.size(); ++i) {
      out.push_back(to_composition(i, config.compositions[i], h, w));
    }
    return out;
  }
  if (config.data.easy_scenario) return easy_compositions(h, w);
  for (std::size_t i = 0; i < 3; ++i) {
    CompositionSettings s;
    s.jitter_freq = 0.6f + 0.1f * static_cast<float>(i);
    out.push_back(to_composition(i, s, h, w));
  }
  return out;
}

TrainConfig build_train_config(const RunConfig& config, const Dataset& dataset) {
  TrainConfig tc = config.train;
  tc.compositions = build_compositions(config, dataset);
  tc.validate();
  return tc;
}

}  // namespace adda::cli
