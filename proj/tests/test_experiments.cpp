#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "mag/error.hpp"
#include "mag/experiments.hpp"
#include "mag/synthetic.hpp"
#include "properties.hpp"
#include "test_util.hpp"

namespace mag {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::ReadText;
using testing::ScratchDir;
using testing::WriteText;

// Writes a small synthetic dataset under `dir` plus a config naming it `name`.
std::string TinySetup(const std::string& dir, const std::string& name = "tiny", const std::string& extra = "") {
  SyntheticSpec s;
  s.num_nodes = 100;
  s.num_communities = 4;
  s.feature_dim = 40;
  s.prototype_words = 10;
  s.words_per_node = 5;
  s.seed = 3;
  const Graph g = MakeSyntheticGraph(s);
  fs::create_directories(dir + "/data");
  SaveEdges(g, dir + "/data/edges.csv");
  SaveFeatures(g, dir + "/data/features.csv");
  return WriteText(dir, "config.json", R"({
    "datasets": {")" + name + R"(": {"edges": "data/edges.csv", "features": "data/features.csv"}},
    "injection": {"clique_size": 4, "num_cliques": 2, "contextual_count": 8, "candidate_pool": 20, "seed": 1},
    "train": {"epochs": 2, "hidden_dim": 8, "batch_size": 50},
    "rounds": 2,
    "seeds": [0, 1])" + extra + "}");
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(Experiments, InjectTrainScoreFlow) {
  const auto dir = ScratchDir();
  const RunConfig cfg = LoadRunConfig(TinySetup(dir, "tiny", R"(, "preset": "m-mag")"));
  const ExperimentOptions opts;

  CmdInject(cfg, "tiny", dir + "/inj", opts);
  const Graph injected = LoadGraph(dir + "/inj/edges.csv", dir + "/inj/features.csv", dir + "/inj/labels.csv");
  EXPECT_EQ(injected.num_anomalies(), 16u);
  const json ip = json::parse(ReadText(dir + "/inj/provenance.json"));
  EXPECT_EQ(ip["command"], "inject");
  EXPECT_EQ(ip["injection"]["clique_size"], 4);
  EXPECT_EQ(ip["graph"]["structural"], 8);
  EXPECT_EQ(ip["graph"]["contextual"], 8);

  CmdTrain(cfg, "tiny", dir + "/run", opts);
  for (int s : {0, 1}) {
    const std::string seed_dir = dir + "/run/seed_" + std::to_string(s);
    EXPECT_TRUE(fs::exists(seed_dir + "/checkpoint.bin"));
    const auto log = Lines(ReadText(seed_dir + "/train_log.csv"));
    ASSERT_EQ(log.size(), 3u);
    EXPECT_EQ(log[0], "epoch,loss,seconds");
    const Checkpoint ck = LoadCheckpoint(seed_dir + "/checkpoint.bin");
    EXPECT_EQ(ck.seed, static_cast<std::uint64_t>(s));
    const json stored = json::parse(ck.config_json);
    EXPECT_EQ(stored["combination"], json::parse("[[1,3],[4,6]]"));
    EXPECT_EQ(stored["hidden_dim"], 8);
  }
  const json tp = json::parse(ReadText(dir + "/run/provenance.json"));
  EXPECT_EQ(tp["command"], "train");
  EXPECT_EQ(tp["build"], BuildId());
  EXPECT_EQ(tp["preset"], "m-mag");
  EXPECT_EQ(tp["seeds"], json::parse("[0,1]"));
  EXPECT_EQ(tp["config"], ToJson(cfg));

  CmdScore(cfg, "tiny", dir + "/run", std::nullopt, opts);
  const json summary = json::parse(ReadText(dir + "/run/summary.json"));
  EXPECT_EQ(summary["combination"], "[1,3]+[4,6]");
  ASSERT_EQ(summary["runs"].size(), 2u);
  const double a0 = summary["runs"][0]["auc"], a1 = summary["runs"][1]["auc"];
  EXPECT_NEAR(summary["auc_mean"].get<double>(), 0.5 * (a0 + a1), 1e-12);
  EXPECT_NEAR(summary["auc_std"].get<double>(), std::abs(a0 - a1) / std::sqrt(2.0), 1e-12);
  const auto scores = Lines(ReadText(dir + "/run/seed_1/scores.csv"));
  EXPECT_EQ(scores.size(), 101u);
  const json s1 = json::parse(ReadText(dir + "/run/seed_1/summary.json"));
  EXPECT_EQ(s1["rounds"], 2);
  EXPECT_EQ(s1["auc"], summary["runs"][1]["auc"]);

  // Scoring a checkpoint against another combination is refused.
  EXPECT_MAG_ERROR(CmdScore(cfg.WithPreset("cola"), "tiny", dir + "/run", std::nullopt, opts), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(CmdScore(cfg, "tiny", dir + "/empty", std::nullopt, opts), ErrorKind::kFile);
  EXPECT_MAG_ERROR(CmdScore(cfg, "tiny", dir + "/x", dir + "/nope.bin", opts), ErrorKind::kFile);
}

TEST(Experiments, ExplicitCheckpoint) {
  const auto dir = ScratchDir();
  const RunConfig cfg = LoadRunConfig(TinySetup(dir));
  CmdTrain(cfg, "tiny", dir + "/run", {});
  CmdScore(cfg, "tiny", dir + "/other", dir + "/run/seed_1/checkpoint.bin", {});
  const json summary = json::parse(ReadText(dir + "/other/summary.json"));
  ASSERT_EQ(summary["runs"].size(), 1u);
  EXPECT_EQ(summary["runs"][0]["seed"], 1);
  EXPECT_TRUE(fs::exists(dir + "/other/seed_1/scores.csv"));
  EXPECT_EQ(json::parse(ReadText(dir + "/other/provenance.json"))["checkpoint"], dir + "/run/seed_1/checkpoint.bin");
}

TEST(Experiments, EndToEndDeterminism) {
  const auto r = testing::CheckEndToEndDeterminism(ScratchDir());
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Experiments, SweepSingleHeatmap) {
  const auto dir = ScratchDir();
  RunConfig cfg = LoadRunConfig(TinySetup(dir));
  cfg.seeds = {4};
  cfg.train.epochs = 1;
  ExperimentOptions opts;
  opts.jobs = 2;
  const auto cells = CmdSweepSingle(cfg, "tiny", dir + "/sweep", opts);
  ASSERT_EQ(cells.size(), 66u);
  const auto lines = Lines(ReadText(dir + "/sweep/heatmap.csv"));
  ASSERT_EQ(lines.size(), 67u);
  EXPECT_EQ(lines[0], "i,j,scale,auc,auc_std,runs");
  std::size_t k = 1;
  for (int i = 1; i <= 12; ++i) {
    for (int j = i + 1; j <= 12; ++j, ++k) {
      const std::string prefix = std::to_string(i) + "," + std::to_string(j) + "," +
                                 ContrastScaleName(ContrastPair(i, j).scale()) + ",";
      EXPECT_EQ(lines[k].rfind(prefix, 0), 0u) << lines[k];
      EXPECT_EQ(lines[k].substr(lines[k].rfind(',') + 1), "1");
      EXPECT_EQ(cells[k - 1].i, i);
      EXPECT_EQ(cells[k - 1].j, j);
      EXPECT_GE(cells[k - 1].auc.mean, 0.0);
      EXPECT_LE(cells[k - 1].auc.mean, 1.0);
    }
  }
  // The pair cells are independent of job count.
  opts.jobs = 1;
  const RunConfig one = cfg.WithCombination({{ContrastPair(5, 11)}, {1.0}});
  const Graph g = LoadBenchmark(cfg, "tiny", opts);
  for (const auto& c : cells) {
    if (c.i == 5 && c.j == 11) {
      EXPECT_EQ(EvaluateCombination(g, one, opts).mean, c.auc.mean);
    }
  }
  const auto avg = ScaleAverages(cells);
  EXPECT_EQ(avg.size(), 4u);
}

TEST(Experiments, SweepAugmentationTable) {
  const auto dir = ScratchDir();
  RunConfig cfg = LoadRunConfig(TinySetup(dir));
  cfg.seeds = {0};
  cfg.train.epochs = 1;
  const auto cells = CmdSweepAugmentation(cfg, "tiny", dir + "/aug", {});
  ASSERT_EQ(cells.size(), 10u);
  const auto lines = Lines(ReadText(dir + "/aug/augmentation.csv"));
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[0], "combination,augmentation,auc,auc_std,runs");
  EXPECT_EQ(lines[1].rfind("\"[1,3]+[7,9]\",MF,", 0), 0u) << lines[1];
  EXPECT_EQ(lines[5].rfind("\"[1,3]+[7,9]\",HK,", 0), 0u) << lines[5];
  EXPECT_EQ(lines[10].rfind("\"[1,3]+[10,12]\",HK,", 0), 0u) << lines[10];
  const auto variants = AugmentationVariants();
  ASSERT_EQ(variants.size(), 5u);
  EXPECT_EQ(variants[3].second.steps[0].op, AugmentOp::kPpr);
}

TEST(Experiments, ReproduceSkipsMissingDatasets) {
  const auto dir = ScratchDir();
  RunConfig cfg = LoadRunConfig(TinySetup(dir, "cora"));
  cfg.seeds = {0};
  cfg.train.epochs = 1;
  const auto rows = CmdReproduce(cfg, "t4", dir + "/t4", {});
  ASSERT_EQ(rows.size(), 8u);
  const auto csv = Lines(ReadText(dir + "/t4/report.csv"));
  ASSERT_EQ(csv.size(), 9u);
  EXPECT_EQ(csv[0], "table,dataset,model,reference,reproduced,reproduced_std,delta,runs,note");
  for (const auto& r : rows) {
    if (r.dataset == "cora") {
      EXPECT_TRUE(r.reproduced.has_value()) << r.model;
    } else {
      EXPECT_FALSE(r.reproduced.has_value());
      EXPECT_EQ(r.note, "dataset not configured");
    }
  }
  EXPECT_TRUE(fs::exists(dir + "/t4/report.md"));
  EXPECT_MAG_ERROR(CmdReproduce(cfg, "t9", dir + "/t9", {}), ErrorKind::kConfig);
}

TEST(Experiments, ReferenceValues) {
  auto find = [](const std::string& t, const std::string& d, const std::string& m) {
    for (const auto& r : ReferenceRows(t)) {
      if (r.dataset == d && r.model == m) return r.reference;
    }
    return -1.0;
  };
  EXPECT_DOUBLE_EQ(find("t2", "cora", "cola"), 90.3);
  EXPECT_DOUBLE_EQ(find("t2", "cora", "anemone"), 91.1);
  EXPECT_DOUBLE_EQ(find("t4", "citeseer", "m-g"), 92.5);
  EXPECT_DOUBLE_EQ(find("t5", "pubmed", "m-mag"), 96.6);
  EXPECT_DOUBLE_EQ(find("t5", "cora", "l-mag"), 91.4);
  EXPECT_EQ(ReferenceRows("t3").size(), 4u);
}

TEST(Experiments, LargeGraphGate) {
  const auto dir = ScratchDir();
  SyntheticSpec s;
  s.num_nodes = static_cast<int>(kLargeGraphNodes);
  s.num_communities = 10;
  s.feature_dim = 20;
  s.prototype_words = 5;
  s.words_per_node = 3;
  const Graph g = MakeSyntheticGraph(s);
  SaveEdges(g, dir + "/e.csv");
  SaveFeatures(g, dir + "/x.csv");
  const RunConfig cfg = ParseRunConfig(json::parse(R"({"datasets": {"big": {"edges": "e.csv", "features": "x.csv"}}})"), dir);
  EXPECT_MAG_ERROR(LoadBenchmark(cfg, "big", {}), ErrorKind::kConfig);
  ExperimentOptions large;
  large.large = true;
  EXPECT_EQ(LoadBenchmark(cfg, "big", large).num_anomalies(), 600u);
}

TEST(Experiments, PickDataset) {
  const auto dir = ScratchDir();
  const RunConfig one = LoadRunConfig(TinySetup(dir));
  EXPECT_EQ(PickDataset(one, ""), "tiny");
  EXPECT_MAG_ERROR(PickDataset(one, "cora"), ErrorKind::kConfig);
  const RunConfig none = ParseRunConfig(json::object());
  EXPECT_MAG_ERROR(PickDataset(none, ""), ErrorKind::kConfig);
}

TEST(Experiments, SummarizeAuc) {
  const AucSummary s = SummarizeAuc({0.8, 0.9, 1.0});
  EXPECT_NEAR(s.mean, 0.9, 1e-15);
  EXPECT_NEAR(s.std, 0.1, 1e-15);
  EXPECT_EQ(SummarizeAuc({0.7}).std, 0.0);
}

#ifdef MAG_CLI_PATH
int RunCli(const std::string& args, const std::string& err_path) {
  const std::string cmd = std::string(MAG_CLI_PATH) + " " + args + " >/dev/null 2>" + err_path;
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(Cli, ErrorsAreJson) {
  const auto dir = ScratchDir();
  const std::string cfg = TinySetup(dir);
  EXPECT_EQ(RunCli("score --config " + cfg + " --out " + dir + "/none --quiet", dir + "/err.txt"), 1);
  const json e = json::parse(ReadText(dir + "/err.txt"));
  EXPECT_EQ(e["error"]["kind"], "file");
  EXPECT_FALSE(e["error"]["message"].get<std::string>().empty());

  WriteText(dir, "bad.json", R"({"rounds": 0})");
  EXPECT_EQ(RunCli("train --config " + dir + "/bad.json --quiet", dir + "/err2.txt"), 1);
  EXPECT_EQ(json::parse(ReadText(dir + "/err2.txt"))["error"]["kind"], "config");

  EXPECT_EQ(RunCli("frobnicate", dir + "/err3.txt"), 1);
  EXPECT_EQ(json::parse(ReadText(dir + "/err3.txt"))["error"]["kind"], "usage");
}

TEST(Cli, TrainThenScoreWithSeedOverride) {
  const auto dir = ScratchDir();
  const std::string cfg = TinySetup(dir);
  ASSERT_EQ(RunCli("train --config " + cfg + " --seed 9 --out " + dir + "/run --quiet", dir + "/e1.txt"), 0)
      << ReadText(dir + "/e1.txt");
  EXPECT_TRUE(fs::exists(dir + "/run/seed_9/checkpoint.bin"));
  EXPECT_FALSE(fs::exists(dir + "/run/seed_0"));
  ASSERT_EQ(RunCli("score --config " + cfg + " --seed 9 --out " + dir + "/run --quiet", dir + "/e2.txt"), 0)
      << ReadText(dir + "/e2.txt");
  const json summary = json::parse(ReadText(dir + "/run/summary.json"));
  EXPECT_EQ(summary["runs"][0]["seed"], 9);
  const json prov = json::parse(ReadText(dir + "/run/provenance.json"));
  EXPECT_EQ(prov["seeds"], json::parse("[9]"));
}
#endif

}  // namespace
}  // namespace mag
