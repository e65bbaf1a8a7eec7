// mag: anomaly-benchmark injection, training, scoring and view-pair sweeps.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mag/config.hpp"
#include "mag/error.hpp"
#include "mag/experiments.hpp"
#include "mag/synthetic.hpp"

namespace {

int Fail(const std::string& kind, const std::string& message) {
  nlohmann::json j = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view graph contrastive anomaly detection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mag::BuildId());

  std::string config_path;
  std::string out_dir;
  std::string dataset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> checkpoint;
  std::string table;
  bool large = false;
  bool quiet = false;
  int jobs = 1;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "run a single seed instead of the config's list");
    sub->add_option("--out", out_dir, "output directory (default: config output_dir)");
    sub->add_option("--dataset", dataset, "dataset name from the config");
    sub->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
    sub->add_flag("--large", large, "allow graphs with 10000 or more nodes");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };

  auto* inject = app.add_subcommand("inject", "inject structural and contextual anomalies");
  auto* train = app.add_subcommand("train", "train one model per seed");
  auto* score = app.add_subcommand("score", "score nodes with trained checkpoints");
  auto* sweep_single = app.add_subcommand("sweep-single", "train and score all 66 single view pairs");
  auto* sweep_aug = app.add_subcommand("sweep-augmentation", "compare augmentations on two combinations");
  auto* reproduce = app.add_subcommand("reproduce", "rerun one results table");
  for (auto* sub : {inject, train, score, sweep_single, sweep_aug, reproduce}) common(sub);
  score->add_option("--checkpoint", checkpoint, "score this checkpoint only");
  reproduce->add_option("table", table, "t2, t3, t4 or t5")->required()->check(CLI::IsMember({"t2", "t3", "t4", "t5"}));

  mag::SyntheticSpec synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic clean dataset");
  synth_cmd->add_option("--out", out_dir, "output directory")->required();
  synth_cmd->add_option("--nodes", synth.num_nodes);
  synth_cmd->add_option("--communities", synth.num_communities);
  synth_cmd->add_option("--degree", synth.avg_degree);
  synth_cmd->add_option("--features", synth.feature_dim);
  synth_cmd->add_option("--seed", synth.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return Fail("usage", e.what());
  }

  try {
    if (synth_cmd->parsed()) {
      const mag::Graph g = mag::MakeSyntheticGraph(synth);
      std::filesystem::create_directories(out_dir);
      mag::SaveEdges(g, out_dir + "/edges.csv");
      mag::SaveFeatures(g, out_dir + "/features.csv");
      return 0;
    }
    mag::RunConfig cfg = mag::LoadRunConfig(config_path);
    if (seed) cfg.seeds = {*seed};
    if (out_dir.empty()) out_dir = cfg.output_dir;
    mag::ExperimentOptions opts;
    opts.large = large;
    opts.jobs = jobs;
    opts.log = quiet ? nullptr : &std::cerr;

    if (reproduce->parsed()) {
      mag::CmdReproduce(cfg, table, out_dir, opts);
      return 0;
    }
    const std::string name = mag::PickDataset(cfg, dataset);
    if (inject->parsed()) mag::CmdInject(cfg, name, out_dir, opts);
    if (train->parsed()) mag::CmdTrain(cfg, name, out_dir, opts);
    if (score->parsed()) mag::CmdScore(cfg, name, out_dir, checkpoint, opts);
    if (sweep_single->parsed()) mag::CmdSweepSingle(cfg, name, out_dir, opts);
    if (sweep_aug->parsed()) mag::CmdSweepAugmentation(cfg, name, out_dir, opts);
  } catch (const mag::Error& e) {
    return Fail(mag::ErrorKindName(e.kind()), e.what());
  } catch (const std::exception& e) {
    return Fail("internal", e.what());
  }
  return 0;
}
