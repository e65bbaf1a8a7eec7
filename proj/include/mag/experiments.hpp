#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mag/config.hpp"
#include "mag/graph.hpp"
#include "mag/scoring.hpp"
#include "mag/trainer.hpp"

namespace mag {

const char* BuildId();

struct ExperimentOptions {
  bool large = false;          // allow Pubmed-scale graphs
  int jobs = 1;                // concurrent (combination, seed) runs
  std::ostream* log = nullptr; // progress lines; null for silence
};

// Graphs at or above this size need `large`.
inline constexpr std::size_t kLargeGraphNodes = 10000;

// Loads a configured dataset. With no label file the benchmark anomalies are
// injected on the fly using the config's injection spec.
Graph LoadBenchmark(const RunConfig& cfg, const std::string& dataset, const ExperimentOptions& opts);
// The configured dataset name when `requested` is empty and exactly one exists.
std::string PickDataset(const RunConfig& cfg, const std::string& requested);

struct RunOutcome {
  std::uint64_t seed = 0;
  TrainResult train;
  ScoreReport score;
};

RunOutcome TrainAndScore(const Graph& g, const RunConfig& cfg, std::uint64_t seed);

struct AucSummary {
  std::vector<double> per_seed;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for one seed
};

AucSummary SummarizeAuc(std::vector<double> per_seed);

// Mean AUC (fraction) over the config's seeds, runs spread over `jobs` threads.
AucSummary EvaluateCombination(const Graph& g, const RunConfig& cfg, const ExperimentOptions& opts);

nlohmann::json Provenance(const std::string& command, const RunConfig& cfg, const std::string& dataset,
                          const ExperimentOptions& opts);
void WriteJson(const nlohmann::json& j, const std::string& path);

// Subcommands. Each writes provenance.json into `out_dir`.
void CmdInject(const RunConfig& cfg, const std::string& dataset, const std::string& out_dir,
               const ExperimentOptions& opts);
void CmdTrain(const RunConfig& cfg, const std::string& dataset, const std::string& out_dir,
              const ExperimentOptions& opts);
// Reads <out_dir>/seed_<s>/checkpoint.bin per seed unless `checkpoint` is given.
void CmdScore(const RunConfig& cfg, const std::string& dataset, const std::string& out_dir,
              const std::optional<std::string>& checkpoint, const ExperimentOptions& opts);

struct SweepCell {
  int i = 0;
  int j = 0;
  ContrastScale scale = ContrastScale::kNodeSubgraph;
  AucSummary auc;
};

// All 66 unordered pairs; heatmap.csv rows i,j,scale,auc,auc_std,runs (AUC in
// percent) are appended in pair order as they complete.
std::vector<SweepCell> CmdSweepSingle(const RunConfig& cfg, const std::string& dataset, const std::string& out_dir,
                                      const ExperimentOptions& opts);

struct AugmentationCell {
  std::string combination;
  std::string augmentation;  // MF, RE, MF+RE, PPR, HK
  AucSummary auc;
};

std::vector<std::pair<std::string, AugmentationSpec>> AugmentationVariants();

// augmentation.csv: combination,augmentation,auc,auc_std,runs.
std::vector<AugmentationCell> CmdSweepAugmentation(const RunConfig& cfg, const std::string& dataset,
                                                   const std::string& out_dir, const ExperimentOptions& opts);

struct ReportRow {
  std::string table;
  std::string dataset;
  std::string model;
  double reference = 0.0;                // percent
  std::optional<AucSummary> reproduced;  // fraction; empty when skipped
  std::string note;
};

// Published reference values for t2..t5.
std::vector<ReportRow> ReferenceRows(const std::string& table);

// Writes report.md and report.csv.
std::vector<ReportRow> CmdReproduce(const RunConfig& cfg, const std::string& table, const std::string& out_dir,
                                    const ExperimentOptions& opts);

// Mean of sweep cells per contrast scale, in ContrastScale order.
std::vector<std::pair<ContrastScale, double>> ScaleAverages(const std::vector<SweepCell>& cells);

}  // namespace mag
