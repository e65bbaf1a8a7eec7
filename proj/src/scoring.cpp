#include "mag/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "mag/engine.hpp"
#include "mag/error.hpp"
#include "mag/trainer.hpp"

namespace mag {

RoundScores ScoreRounds(const Graph& g, const ModelParams& params, const CombinationConfig& combination,
                        const AugmentationSpec& augmentation, const ScoreConfig& cfg) {
  if (cfg.rounds < 1) throw Error(ErrorKind::kConfig, "rounds must be >= 1");
  combination.Validate();
  if (params.discriminators.size() != combination.pairs.size()) {
    throw Error(ErrorKind::kDimension, "checkpoint has " + std::to_string(params.discriminators.size()) +
                                           " discriminators but the combination has " +
                                           std::to_string(combination.pairs.size()) + " pairs");
  }
  if (static_cast<std::size_t>(params.input_dim()) != g.feature_dim()) {
    throw Error(ErrorKind::kDimension, "checkpoint input dimension " + std::to_string(params.input_dim()) +
                                           " differs from graph feature dimension " +
                                           std::to_string(g.feature_dim()));
  }
  if (combination.UsesAugmented() && augmentation.empty()) {
    throw Error(ErrorKind::kConfig, "combination uses augmented views but the augmentation list is empty");
  }
  const std::size_t n = g.num_nodes();
  RoundScores out;
  out.num_nodes = n;
  out.rounds = cfg.rounds;
  out.y_pos.assign(combination.pairs.size(), std::vector<double>(n * cfg.rounds));
  out.y_neg.assign(combination.pairs.size(), std::vector<double>(n * cfg.rounds));

  std::optional<Augmenter> augmenter;
  std::optional<Graph> augmented;
  if (combination.UsesAugmented()) {
    augmenter.emplace(g, augmentation);
    if (!augmenter->stochastic() || cfg.freeze_augmentation) {
      Rng rng = MakeRng(cfg.seed, {stream::kScore, stream::kAugment});
      augmented = augmenter->Draw(rng);
    }
  }

  for (int r = 0; r < cfg.rounds; ++r) {
    const auto round = static_cast<std::uint64_t>(r);
    if (augmenter && augmenter->stochastic() && !cfg.freeze_augmentation) {
      Rng rng = MakeRng(cfg.seed, {stream::kScore, stream::kAugment, round});
      augmented = augmenter->Draw(rng);
    }
    const Graph* aug = augmented ? &*augmented : nullptr;
    Rng batch_rng = MakeRng(cfg.seed, {stream::kScore, stream::kBatches, round});
    const auto batches = MakeBatches(n, cfg.batch_size, batch_rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto samples = SampleBatch(g, aug, batches[b], cfg.walk, cfg.seed, stream::kScore, round);
      const auto negatives = CyclicShift(samples.size());
      ForwardTrace trace(params, combination, g, aug, samples, negatives);
      for (std::size_t k = 0; k < combination.pairs.size(); ++k) {
        const auto& pair = trace.pairs()[k];
        for (std::size_t i = 0; i < batches[b].size(); ++i) {
          const std::size_t slot = static_cast<std::size_t>(batches[b][i]) * cfg.rounds + r;
          out.y_pos[k][slot] = pair.y_pos[i];
          out.y_neg[k][slot] = pair.y_neg[i];
        }
      }
    }
  }
  return out;
}

NodeScore AnomalyScore(std::span<const double> y_pos, std::span<const double> y_neg) {
  if (y_pos.empty() || y_pos.size() != y_neg.size()) {
    throw Error(ErrorKind::kDimension, "anomaly score needs R >= 1 paired rounds");
  }
  const auto rounds = static_cast<double>(y_pos.size());
  double sum = 0.0;
  for (std::size_t r = 0; r < y_pos.size(); ++r) sum += y_neg[r] - y_pos[r];
  NodeScore s;
  s.mean = sum / rounds;
  double sq = 0.0;
  for (std::size_t r = 0; r < y_pos.size(); ++r) {
    const double dev = (y_neg[r] - y_pos[r]) - s.mean;
    sq += dev * dev;
  }
  s.std = std::sqrt(sq / rounds);
  s.score = s.mean + s.std;
  return s;
}

std::vector<double> CombinedScore(const std::vector<std::vector<double>>& per_pair, std::span<const double> weights) {
  if (per_pair.size() != weights.size() || per_pair.empty()) {
    throw Error(ErrorKind::kDimension, "per-pair scores and weights differ in length");
  }
  const std::size_t n = per_pair.front().size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < per_pair.size(); ++k) {
    if (per_pair[k].size() != n) throw Error(ErrorKind::kDimension, "per-pair score arrays differ in length");
    for (std::size_t i = 0; i < n; ++i) out[i] += weights[k] * per_pair[k][i];
  }
  return out;
}

double ComputeAuc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::kDimension, "scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the mid-rank keeps tie handling in integers.
  std::vector<long long> rank_x2(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const auto r2 = static_cast<long long>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank_x2[order[k]] = r2;
    i = j + 1;
  }
  long long pos = 0;
  long long rank_sum_x2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0) {
      ++pos;
      rank_sum_x2 += rank_x2[i];
    }
  }
  const long long neg = static_cast<long long>(n) - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorKind::kValidation, "AUC undefined: labels contain a single class");
  const long long u_x2 = rank_sum_x2 - pos * (pos + 1);
  return static_cast<double>(u_x2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

ScoreReport ScoreGraph(const Graph& g, const ModelParams& params, const CombinationConfig& combination,
                       const AugmentationSpec& augmentation, const ScoreConfig& cfg) {
  const RoundScores rounds = ScoreRounds(g, params, combination, augmentation, cfg);
  ScoreReport report;
  report.rounds = cfg.rounds;
  report.seed = cfg.seed;
  std::vector<std::vector<double>> f(combination.pairs.size());
  report.pairs.resize(combination.pairs.size());
  for (std::size_t k = 0; k < combination.pairs.size(); ++k) {
    report.pairs[k].resize(g.num_nodes());
    f[k].resize(g.num_nodes());
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      report.pairs[k][i] = AnomalyScore(rounds.pos(k, i), rounds.neg(k, i));
      f[k][i] = report.pairs[k][i].score;
    }
  }
  report.score = CombinedScore(f, combination.weights);
  if (g.num_anomalies() > 0 && g.num_anomalies() < g.num_nodes()) {
    report.auc = ComputeAuc(report.score, g.BinaryLabels());
  }
  return report;
}

void WriteScoresCsv(const ScoreReport& report, const CombinationConfig& combination, const Graph& g,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kFile, "cannot write " + path);
  out << "node,f";
  for (const auto& p : combination.pairs) {
    const std::string tag = std::to_string(p.first.value()) + "_" + std::to_string(p.second.value());
    out << ",mean_" << tag << ",std_" << tag;
  }
  out << ",label\n";
  const auto labels = g.BinaryLabels();
  char buf[40];
  for (std::size_t i = 0; i < report.score.size(); ++i) {
    out << i;
    std::snprintf(buf, sizeof(buf), ",%.17g", report.score[i]);
    out << buf;
    for (const auto& pair : report.pairs) {
      std::snprintf(buf, sizeof(buf), ",%.17g", pair[i].mean);
      out << buf;
      std::snprintf(buf, sizeof(buf), ",%.17g", pair[i].std);
      out << buf;
    }
    out << ',';
    if (g.has_labels()) out << labels[i];
    out << '\n';
  }
}

}  // namespace mag
