#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mag/augmentation.hpp"
#include "mag/contrast.hpp"
#include "mag/nn.hpp"
#include "mag/sampling.hpp"

namespace mag {

struct ScoreConfig {
  int rounds = 256;
  int batch_size = 300;
  WalkOptions walk;
  // Draw one augmented graph for all rounds instead of one per round.
  bool freeze_augmentation = false;
  std::uint64_t seed = 0;
};

// Positive/negative consistency scores, indexed [pair][node * rounds + round].
struct RoundScores {
  std::size_t num_nodes = 0;
  int rounds = 0;
  std::vector<std::vector<double>> y_pos;
  std::vector<std::vector<double>> y_neg;

  std::span<const double> pos(std::size_t pair, std::size_t node) const {
    return {y_pos[pair].data() + node * rounds, static_cast<std::size_t>(rounds)};
  }
  std::span<const double> neg(std::size_t pair, std::size_t node) const {
    return {y_neg[pair].data() + node * rounds, static_cast<std::size_t>(rounds)};
  }
};

RoundScores ScoreRounds(const Graph& g, const ModelParams& params, const CombinationConfig& combination,
                        const AugmentationSpec& augmentation, const ScoreConfig& cfg);

struct NodeScore {
  double mean = 0.0;  // mean of (y_neg - y_pos) over rounds
  double std = 0.0;   // population standard deviation
  double score = 0.0; // mean + std
};

NodeScore AnomalyScore(std::span<const double> y_pos, std::span<const double> y_neg);

// f_all[i] = sum_k w_k * f_k[i].
std::vector<double> CombinedScore(const std::vector<std::vector<double>>& per_pair, std::span<const double> weights);

// Mann-Whitney AUC; ties count one half. labels are 0/1.
double ComputeAuc(std::span<const double> scores, std::span<const int> labels);

struct ScoreReport {
  std::vector<double> score;                  // f_all per node
  std::vector<std::vector<NodeScore>> pairs;  // [pair][node]
  int rounds = 0;
  std::optional<double> auc;
  std::uint64_t seed = 0;
};

// Scores every node, then AUC when the graph carries labels.
ScoreReport ScoreGraph(const Graph& g, const ModelParams& params, const CombinationConfig& combination,
                       const AugmentationSpec& augmentation, const ScoreConfig& cfg);

// node,f,mean_a_b,std_a_b,...,label
void WriteScoresCsv(const ScoreReport& report, const CombinationConfig& combination, const Graph& g,
                    const std::string& path);

}  // namespace mag
