#include <gtest/gtest.h>

#include "mag/config.hpp"
#include "mag/error.hpp"
#include "test_util.hpp"

namespace mag {
namespace {

using nlohmann::json;
using testing::ScratchDir;
using testing::WriteText;

std::vector<std::pair<int, int>> Pairs(const CombinationConfig& c) {
  std::vector<std::pair<int, int>> out;
  for (const auto& p : c.pairs) out.emplace_back(p.first.value(), p.second.value());
  return out;
}

TEST(Presets, Combinations) {
  using P = std::vector<std::pair<int, int>>;
  EXPECT_EQ(Pairs(ResolvePreset("cola").combination), (P{{1, 3}}));
  EXPECT_EQ(Pairs(ResolvePreset("anemone").combination), (P{{1, 3}, {5, 6}}));
  EXPECT_EQ(Pairs(ResolvePreset("gradate").combination), (P{{1, 3}, {7, 9}, {2, 3}, {8, 9}, {1, 7}}));
  EXPECT_EQ(Pairs(ResolvePreset("l-mag").combination), (P{{4, 9}}));
  EXPECT_EQ(Pairs(ResolvePreset("m-mag").combination), (P{{1, 3}, {4, 6}}));
  EXPECT_EQ(Pairs(ResolvePreset("m-s").combination), (P{{1, 3}, {2, 3}}));
  EXPECT_EQ(Pairs(ResolvePreset("m-g").combination), Pairs(ResolvePreset("m-mag").combination));
  EXPECT_EQ(Pairs(ResolvePreset("m-sg").combination), Pairs(ResolvePreset("anemone").combination));
  EXPECT_EQ(ResolvePreset("m-mag").combination.weights, (std::vector<double>{0.3, 0.7}));
  EXPECT_EQ(ResolvePreset("gradate").combination.weights, std::vector<double>(5, 1.0));

  EXPECT_TRUE(ResolvePreset("cola").augmentation.empty());
  EXPECT_TRUE(ResolvePreset("m-mag").augmentation.empty());
  EXPECT_EQ(ResolvePreset("l-mag").augmentation.steps.size(), 2u);
  EXPECT_EQ(ResolvePreset("gradate").augmentation.steps.size(), 2u);
  EXPECT_EQ(PresetNames().size(), 9u);
  EXPECT_MAG_ERROR(ResolvePreset("nope"), ErrorKind::kConfig);
}

TEST(ParseRunConfig, Defaults) {
  const RunConfig c = ParseRunConfig(json::object());
  EXPECT_EQ(c.preset, "cola");
  EXPECT_EQ(Pairs(c.train.combination), (std::vector<std::pair<int, int>>{{1, 3}}));
  EXPECT_EQ(c.rounds, 256);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0}));
  EXPECT_EQ(c.train.epochs, 100);
  EXPECT_EQ(c.train.batch_size, 300);
  EXPECT_EQ(c.train.hidden_dim, 64);
  EXPECT_DOUBLE_EQ(c.train.lr, 1e-3);
  EXPECT_EQ(c.train.subgraph_size, 4);
  EXPECT_FALSE(c.freeze_inference_augmentation);
}

TEST(ParseRunConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"epochs", 3}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"train", {{"epoch", 3}}}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"preset", "cola"}, {"combination", {{1, 3}}}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"combination", {{1, 13}}}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"combination", {{2, 2}}}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"combination", {{1, 3}}}, {"weights", {1, 2}}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"seeds", {1, 1}}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"seeds", {-1}}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"rounds", 0}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"train", {{"epochs", 0}}}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"augmentation", {{{"op", "blur"}}}}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"augmentation", {{{"op", "ppr"}, {"t", 1}}}}}), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"datasets", {{"cora", {{"edges", "e"}}}}}}), ErrorKind::kConfig);
}

TEST(ParseRunConfig, AugmentedViewsNeedAugmentation) {
  // Explicitly empty augmentation with an augmented-view pair.
  EXPECT_MAG_ERROR(ParseRunConfig(json{{"combination", {{4, 9}}}, {"augmentation", json::array()}}),
                   ErrorKind::kConfig);
  const RunConfig implicit = ParseRunConfig(json{{"combination", {{4, 9}}}});
  EXPECT_EQ(implicit.train.augmentation.steps.size(), 2u);
  EXPECT_FALSE(implicit.augmentation_explicit);
}

TEST(ParseRunConfig, FullDocument) {
  const auto dir = ScratchDir();
  const json j = json::parse(R"({
    "datasets": {"cora": {"edges": "cora/edges.csv", "features": "/abs/x.csv",
                          "injection": {"clique_size": 5, "num_cliques": 2, "contextual_count": 10}}},
    "injection": {"candidate_pool": 20},
    "train": {"epochs": 7, "lr": 0.01, "hidden_dim": 32, "batch_size": 50, "subgraph_size": 5,
              "restart_p": 0.3, "depth": 2},
    "preset": "m-mag",
    "weights": [0.5, 0.5],
    "augmentation": [{"op": "ppr", "alpha": 0.2, "keep_eps": 0.001},
                     {"op": "mask_features", "p": 0.1, "per_node": true},
                     {"op": "flip_edges", "p": 0.05}],
    "rounds": 12,
    "freeze_inference_augmentation": true,
    "seeds": [3, 1, 2],
    "output_dir": "out"
  })");
  const RunConfig c = ParseRunConfig(j, dir);
  EXPECT_EQ(c.datasets.at("cora").edges, dir + "/cora/edges.csv");
  EXPECT_EQ(c.datasets.at("cora").features, "/abs/x.csv");
  EXPECT_EQ(c.output_dir, dir + "/out");
  EXPECT_EQ(c.train.combination.weights, (std::vector<double>{0.5, 0.5}));
  EXPECT_TRUE(c.augmentation_explicit);
  ASSERT_EQ(c.train.augmentation.steps.size(), 3u);
  EXPECT_EQ(c.train.augmentation.steps[0].op, AugmentOp::kPpr);
  EXPECT_DOUBLE_EQ(c.train.augmentation.steps[0].alpha, 0.2);
  EXPECT_TRUE(c.train.augmentation.steps[1].per_node);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 1, 2}));
  EXPECT_EQ(c.train.depth, 2);

  EXPECT_EQ(c.InjectionFor("cora", 2708).clique_size, 5);
  EXPECT_EQ(c.InjectionFor("citeseer", 3327).candidate_pool, 20);
  const ScoreConfig s = c.ScoringFor(9);
  EXPECT_EQ(s.rounds, 12);
  EXPECT_EQ(s.batch_size, 50);
  EXPECT_EQ(s.walk.subgraph_size, 5);
  EXPECT_TRUE(s.freeze_augmentation);
  EXPECT_EQ(s.seed, 9u);
  const TrainConfig t = c.TrainingFor(9);
  EXPECT_EQ(t.seed, 9u);
  EXPECT_EQ(t.augmentation.seed, 9u);

  // The echo parses back to the same document.
  const json echo = ToJson(c);
  EXPECT_EQ(ToJson(ParseRunConfig(echo)), echo);
}

TEST(RunConfig, WithCombinationKeepsExplicitAugmentation) {
  const RunConfig base = ParseRunConfig(json{{"preset", "cola"}});
  const RunConfig lmag = base.WithPreset("l-mag");
  EXPECT_EQ(lmag.preset, "l-mag");
  EXPECT_EQ(lmag.train.augmentation.steps.size(), 2u);
  const RunConfig back = lmag.WithCombination(ResolvePreset("cola").combination);
  EXPECT_FALSE(back.preset.has_value());
  EXPECT_TRUE(back.train.augmentation.empty());

  const RunConfig heat =
      ParseRunConfig(json{{"preset", "cola"}, {"augmentation", {{{"op", "heat"}, {"t", 2.0}}}}});
  EXPECT_EQ(heat.WithPreset("l-mag").train.augmentation.steps[0].op, AugmentOp::kHeat);
}

TEST(LoadRunConfig, FileErrors) {
  const auto dir = ScratchDir();
  EXPECT_MAG_ERROR(LoadRunConfig(WriteText(dir, "bad.json", "{\"rounds\": ")), ErrorKind::kParse);
  EXPECT_MAG_ERROR(LoadRunConfig(dir + "/missing.json"), ErrorKind::kFile);
  const RunConfig c = LoadRunConfig(WriteText(dir, "ok.json", R"({"output_dir": "r"})"));
  EXPECT_EQ(c.output_dir, dir + "/r");
}

}  // namespace
}  // namespace mag
