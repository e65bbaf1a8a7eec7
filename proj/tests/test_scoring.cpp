#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "mag/error.hpp"
#include "mag/injection.hpp"
#include "mag/scoring.hpp"
#include "mag/synthetic.hpp"
#include "mag/trainer.hpp"
#include "properties.hpp"
#include "test_util.hpp"

namespace mag {
namespace {

using testing::ReadText;
using testing::ScratchDir;

TEST(AnomalyScore, HandCases) {
  const std::vector<double> pos = {0.9, 0.7}, neg = {0.1, 0.3};
  const NodeScore s = AnomalyScore(pos, neg);
  EXPECT_NEAR(s.mean, -0.6, 1e-15);
  EXPECT_NEAR(s.std, 0.2, 1e-15);
  EXPECT_NEAR(s.score, -0.4, 1e-15);
  const std::vector<double> one_pos = {0.2}, one_neg = {0.9};
  const NodeScore r1 = AnomalyScore(one_pos, one_neg);
  EXPECT_NEAR(r1.score, 0.7, 1e-15);
  EXPECT_EQ(r1.std, 0.0);
  EXPECT_MAG_ERROR(AnomalyScore(std::vector<double>{}, std::vector<double>{}), ErrorKind::kDimension);
  const auto r = testing::CheckAnomalyScoreHandCases();
  EXPECT_TRUE(r.pass) << r.detail;
}

TEST(AnomalyScore, InvariantToRoundOrder) {
  Rng rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> pos(64), neg(64);
  for (auto& v : pos) v = u(rng);
  for (auto& v : neg) v = u(rng);
  const NodeScore a = AnomalyScore(pos, neg);
  std::vector<int> idx(64);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<double> p2(64), n2(64);
  for (int i = 0; i < 64; ++i) {
    p2[i] = pos[idx[i]];
    n2[i] = neg[idx[i]];
  }
  const NodeScore b = AnomalyScore(p2, n2);
  EXPECT_NEAR(a.mean, b.mean, 1e-14);
  EXPECT_NEAR(a.std, b.std, 1e-14);
}

TEST(CombinedScore, WeightedSum) {
  const std::vector<std::vector<double>> per = {{1.0, 2.0}, {10.0, -4.0}};
  const auto f = CombinedScore(per, std::vector<double>{0.3, 0.7});
  EXPECT_NEAR(f[0], 7.3, 1e-14);
  EXPECT_NEAR(f[1], -2.2, 1e-14);
  EXPECT_MAG_ERROR(CombinedScore(per, std::vector<double>{1.0}), ErrorKind::kDimension);
}

TEST(ComputeAuc, Examples) {
  const std::vector<int> y = {0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(ComputeAuc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, y), 1.0);
  EXPECT_DOUBLE_EQ(ComputeAuc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, y), 0.0);
  EXPECT_DOUBLE_EQ(ComputeAuc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, y), 0.5);
  // Of four pairs: two ordered, one tied, one reversed.
  EXPECT_DOUBLE_EQ(ComputeAuc(std::vector<double>{0.1, 0.6, 0.6, 0.5}, y), 0.625);
  EXPECT_MAG_ERROR(ComputeAuc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), ErrorKind::kValidation);
  EXPECT_MAG_ERROR(ComputeAuc(std::vector<double>{0.1}, std::vector<int>{1, 0}), ErrorKind::kDimension);
}

TEST(ComputeAuc, MonotoneTransformInvariance) {
  Rng rng(2);
  std::normal_distribution<double> n01;
  std::bernoulli_distribution coin(0.3);
  std::vector<double> s(300), t(300);
  std::vector<int> y(300);
  for (int i = 0; i < 300; ++i) {
    y[i] = coin(rng);
    s[i] = std::round(4.0 * (n01(rng) + y[i])) / 4.0;  // coarse, so ties occur
    t[i] = std::exp(3.0 * s[i]) - 7.0;
  }
  EXPECT_DOUBLE_EQ(ComputeAuc(s, y), ComputeAuc(t, y));
  const auto r = testing::CheckAucOracle(30, 3);
  EXPECT_TRUE(r.pass) << r.detail;
}

struct Trained {
  Graph g;
  TrainConfig cfg;
  ModelParams params;
};

const Trained& TrainedModel() {
  static const Trained t = [] {
    SyntheticSpec s;
    s.num_nodes = 240;
    s.num_communities = 4;
    s.feature_dim = 80;
    s.prototype_words = 16;
    s.words_per_node = 8;
    s.seed = 11;
    InjectionSpec inj;
    inj.clique_size = 6;
    inj.num_cliques = 2;
    inj.contextual_count = 12;
    inj.candidate_pool = 30;
    Trained out;
    out.g = InjectBenchmark(MakeSyntheticGraph(s), inj);
    out.cfg.epochs = 25;
    out.cfg.hidden_dim = 24;
    out.cfg.batch_size = 60;
    out.cfg.lr = 5e-3;
    out.cfg.combination = {{ContrastPair(1, 3), ContrastPair(4, 9)}, {0.3, 0.7}};
    out.cfg.augmentation = DefaultAugmentation();
    out.cfg.seed = 2;
    out.params = Train(out.g, out.cfg).params;
    return out;
  }();
  return t;
}

ScoreConfig Scoring(int rounds) {
  ScoreConfig sc;
  sc.rounds = rounds;
  sc.batch_size = 60;
  sc.seed = 5;
  return sc;
}

TEST(ScoreRounds, ShapesAndDeterminism) {
  const Trained& t = TrainedModel();
  const RoundScores a = ScoreRounds(t.g, t.params, t.cfg.combination, t.cfg.augmentation, Scoring(3));
  const RoundScores b = ScoreRounds(t.g, t.params, t.cfg.combination, t.cfg.augmentation, Scoring(3));
  ASSERT_EQ(a.y_pos.size(), 2u);
  EXPECT_EQ(a.num_nodes, t.g.num_nodes());
  EXPECT_EQ(a.y_pos[1].size(), t.g.num_nodes() * 3);
  EXPECT_EQ(a.y_pos, b.y_pos);
  EXPECT_EQ(a.y_neg, b.y_neg);
  for (const auto& v : a.y_pos) {
    for (double y : v) {
      EXPECT_GE(y, 0.0);
      EXPECT_LE(y, 1.0);
    }
  }
  ScoreConfig frozen = Scoring(3);
  frozen.freeze_augmentation = true;
  const RoundScores c = ScoreRounds(t.g, t.params, t.cfg.combination, t.cfg.augmentation, frozen);
  EXPECT_EQ(c.y_pos[0], a.y_pos[0]);  // original-graph pair is unaffected
  ScoreConfig zero = Scoring(0);
  EXPECT_MAG_ERROR(ScoreRounds(t.g, t.params, t.cfg.combination, t.cfg.augmentation, zero), ErrorKind::kConfig);
  EXPECT_MAG_ERROR(ScoreRounds(t.g, t.params, t.cfg.combination, {}, Scoring(1)), ErrorKind::kConfig);
}

TEST(ScoreGraph, AnomaliesScoreHigher) {
  const Trained& t = TrainedModel();
  const ScoreReport r = ScoreGraph(t.g, t.params, t.cfg.combination, t.cfg.augmentation, Scoring(16));
  ASSERT_TRUE(r.auc.has_value());
  const auto y = t.g.BinaryLabels();
  double anom = 0.0, norm = 0.0;
  int na = 0, nn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double f = 0.3 * r.pairs[0][i].score + 0.7 * r.pairs[1][i].score;
    EXPECT_NEAR(r.score[i], f, 1e-12);
    (y[i] ? anom : norm) += r.score[i];
    (y[i] ? na : nn) += 1;
  }
  EXPECT_GT(anom / na, norm / nn);
  EXPECT_DOUBLE_EQ(*r.auc, ComputeAuc(r.score, y));
  EXPECT_GT(*r.auc, 0.7);

  const ScoreReport unlabeled =
      ScoreGraph(t.g.WithoutLabels(), t.params, t.cfg.combination, t.cfg.augmentation, Scoring(16));
  EXPECT_FALSE(unlabeled.auc.has_value());
  EXPECT_EQ(unlabeled.score, r.score);
}

TEST(WriteScoresCsv, Layout) {
  const Trained& t = TrainedModel();
  const ScoreReport r = ScoreGraph(t.g, t.params, t.cfg.combination, t.cfg.augmentation, Scoring(2));
  const auto dir = ScratchDir();
  WriteScoresCsv(r, t.cfg.combination, t.g, dir + "/s.csv");
  std::istringstream in(ReadText(dir + "/s.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "node,f,mean_1_3,std_1_3,mean_4_9,std_4_9,label");
  std::size_t rows = 0, positives = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    EXPECT_EQ(line.substr(0, line.find(',')), std::to_string(rows));
    positives += line.back() == '1';
    ++rows;
  }
  EXPECT_EQ(rows, t.g.num_nodes());
  EXPECT_EQ(positives, t.g.num_anomalies());

  WriteScoresCsv(r, t.cfg.combination, t.g.WithoutLabels(), dir + "/u.csv");
  std::istringstream u(ReadText(dir + "/u.csv"));
  std::getline(u, line);
  std::getline(u, line);
  EXPECT_EQ(line.back(), ',');
}

}  // namespace
}  // namespace mag
