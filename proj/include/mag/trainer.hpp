#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mag/augmentation.hpp"
#include "mag/contrast.hpp"
#include "mag/engine.hpp"
#include "mag/nn.hpp"
#include "mag/sampling.hpp"

namespace mag {

struct TrainConfig {
  int epochs = 100;
  double lr = 1e-3;
  int hidden_dim = 64;
  int batch_size = 300;
  int subgraph_size = 4;
  double restart_p = 0.5;
  int depth = 1;
  CombinationConfig combination;
  AugmentationSpec augmentation;
  std::uint64_t seed = 0;

  void Validate() const;
  WalkOptions walk() const { return {subgraph_size, restart_p, 0}; }
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::string checkpoint_path;
};

struct TrainResult {
  ModelParams params;
  TrainLog log;
};

// Random permutation of 0..n-1 cut into chunks of batch_size. A final chunk
// shorter than 2 is merged into the previous one.
std::vector<std::vector<NodeId>> MakeBatches(std::size_t n, int batch_size, Rng& rng);

// Fresh RWR subgraphs for `targets` on the original (and, if given, the
// augmented) graph. Each target draws from its own stream keyed by
// (seed, phase, round, graph slot, target).
BatchSamples SampleBatch(const Graph& original, const Graph* augmented, std::span<const NodeId> targets,
                         const WalkOptions& walk, std::uint64_t seed, std::uint64_t phase, std::uint64_t round);

// Unsupervised training; anomaly labels are never read.
TrainResult Train(const Graph& g, const TrainConfig& cfg,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

void WriteTrainLogCsv(const TrainLog& log, const std::string& path);

// Binary checkpoint; layout documented in docs/checkpoint.md.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  std::string config_json;
  std::uint64_t seed = 0;
};

void SaveCheckpoint(const ModelParams& params, const std::string& config_json, std::uint64_t seed,
                    const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path);

}  // namespace mag
