#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "adda_cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace adda::cli;
  CLI::App app{"adda: adaptive augmentation scheduling for contrastive pretraining"};
  app.require_subcommand(1);
  int status = 0;

  PretrainArgs pretrain;
  std::uint64_t seed = 0;
  auto* pre = app.add_subcommand("pretrain", "Run adaptive pretraining from a config file");
  pre->add_option("--config", pretrain.config_path, "Config file")->required();
  auto* seed_opt = pre->add_option("--seed", seed, "Override the config seed");
  pre->callback([&] {
    if (*seed_opt) pretrain.seed = seed;
    status = cmd_pretrain(pretrain, std::cout, std::cerr);
  });

  ProbeArgs probe;
  std::size_t probe_epochs = 0;
  auto* pr = app.add_subcommand("probe", "Linear probe on frozen features of a checkpoint");
  pr->add_option("--checkpoint", probe.checkpoint_path, "Checkpoint file")->required();
  pr->add_option("--dataset", probe.dataset_path, "Dataset file")->required();
  auto* epochs_opt = pr->add_option("--probe-epochs", probe_epochs, "Probe training epochs");
  pr->add_option("--out", probe.out_path, "probe.csv to append to")->capture_default_str();
  pr->callback([&] {
    if (*epochs_opt) probe.probe_epochs = probe_epochs;
    status = cmd_probe(probe, std::cout, std::cerr);
  });

  AblateArgs ablate;
  auto* ab = app.add_subcommand("ablate", "Adaptive run plus one fixed baseline per composition");
  ab->add_option("--config", ablate.config_path, "Config file")->required();
  ab->callback([&] { status = cmd_ablate(ablate, std::cout, std::cerr); });

  ReportArgs report;
  auto* rep = app.add_subcommand("report", "Render SVG plots from a metrics CSV");
  rep->add_option("--metrics", report.metrics_path, "Metrics CSV")->required();
  rep->add_option("--out", report.out_dir, "Output directory")->required();
  rep->callback([&] { status = cmd_report(report, std::cout, std::cerr); });

  GenDataArgs gen;
  std::string hw = "16x16";
  auto* gd = app.add_subcommand("gen-data", "Generate a synthetic labeled dataset");
  gd->add_option("--classes", gen.classes, "Number of classes")->capture_default_str();
  gd->add_option("--per-class", gen.per_class, "Images per class")->capture_default_str();
  gd->add_option("--hw", hw, "Image size <H>x<W>")->capture_default_str();
  gd->add_option("--out", gen.out_path, "Output dataset file")->required();
  gd->add_option("--scenario", gen.scenario, "standard or easy")->capture_default_str();
  gd->add_option("--seed", gen.seed, "Generation seed")->capture_default_str();
  gd->callback([&] {
    try {
      std::tie(gen.height, gen.width) = parse_hw(hw);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      status = kParameterFailure;
      return;
    }
    status = cmd_gen_data(gen, std::cout, std::cerr);
  });

  CLI11_PARSE(app, argc, argv);
  return status;
}
