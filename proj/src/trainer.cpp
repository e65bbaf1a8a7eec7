#include "mag/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>

#include "mag/error.hpp"

namespace mag {

void TrainConfig::Validate() const {
  if (epochs < 1) throw Error(ErrorKind::kConfig, "epochs must be >= 1");
  if (!(lr > 0.0)) throw Error(ErrorKind::kConfig, "lr must be > 0");
  if (hidden_dim < 1) throw Error(ErrorKind::kConfig, "hidden_dim must be >= 1");
  if (batch_size < 2) throw Error(ErrorKind::kConfig, "batch_size must be >= 2 for within-batch negatives");
  if (subgraph_size < 1) throw Error(ErrorKind::kConfig, "subgraph_size must be >= 1");
  if (!(restart_p > 0.0 && restart_p <= 1.0)) throw Error(ErrorKind::kConfig, "restart_p must lie in (0, 1]");
  if (depth < 1) throw Error(ErrorKind::kConfig, "depth must be >= 1");
  combination.Validate();
  augmentation.Validate();
  if (combination.UsesAugmented() && augmentation.empty()) {
    throw Error(ErrorKind::kConfig, "combination " + combination.ToString() +
                                        " uses augmented views (7-12) but the augmentation list is empty");
  }
}

std::vector<std::vector<NodeId>> MakeBatches(std::size_t n, int batch_size, Rng& rng) {
  if (n < 2) throw Error(ErrorKind::kConfig, "batching needs at least two nodes");
  if (batch_size < 2) throw Error(ErrorKind::kConfig, "batch_size must be >= 2");
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<NodeId>> batches;
  const auto bs = static_cast<std::size_t>(batch_size);
  for (std::size_t begin = 0; begin < n; begin += bs) {
    const std::size_t end = std::min(n, begin + bs);
    if (end - begin < 2 && !batches.empty()) {
      batches.back().insert(batches.back().end(), order.begin() + begin, order.begin() + end);
    } else {
      batches.emplace_back(order.begin() + begin, order.begin() + end);
    }
  }
  return batches;
}

BatchSamples SampleBatch(const Graph& original, const Graph* augmented, std::span<const NodeId> targets,
                         const WalkOptions& walk, std::uint64_t seed, std::uint64_t phase, std::uint64_t round) {
  BatchSamples batch;
  batch.original.reserve(targets.size());
  for (NodeId t : targets) {
    Rng rng = MakeRng(seed, {stream::kSample, phase, round, 0, static_cast<std::uint64_t>(t)});
    batch.original.push_back(SampleSubgraph(original, t, walk, rng));
  }
  if (augmented != nullptr) {
    batch.augmented.reserve(targets.size());
    for (NodeId t : targets) {
      Rng rng = MakeRng(seed, {stream::kSample, phase, round, 1, static_cast<std::uint64_t>(t)});
      batch.augmented.push_back(SampleSubgraph(*augmented, t, walk, rng));
    }
  }
  return batch;
}

TrainResult Train(const Graph& g, const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.Validate();
  TrainResult result;
  result.params = ModelParams::Init(static_cast<int>(g.feature_dim()), cfg.hidden_dim, cfg.depth,
                                    static_cast<int>(cfg.combination.pairs.size()), cfg.seed);
  AdamState adam = AdamState::For(result.params, cfg.lr);
  const WalkOptions walk = cfg.walk();

  std::optional<Augmenter> augmenter;
  std::optional<Graph> augmented;
  if (cfg.combination.UsesAugmented()) {
    augmenter.emplace(g, cfg.augmentation);
    if (!augmenter->stochastic()) {
      Rng unused(0);
      augmented = augmenter->Draw(unused);
    }
  }

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto e = static_cast<std::uint64_t>(epoch);
    if (augmenter && augmenter->stochastic()) {
      Rng rng = MakeRng(cfg.seed, {stream::kAugment, e});
      augmented = augmenter->Draw(rng);
    }
    const Graph* aug = augmented ? &*augmented : nullptr;
    Rng batch_rng = MakeRng(cfg.seed, {stream::kBatches, e});
    const auto batches = MakeBatches(g.num_nodes(), cfg.batch_size, batch_rng);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto samples = SampleBatch(g, aug, batches[b], walk, cfg.seed, stream::kTrain, (e << 32) | b);
      const auto negatives = CyclicShift(samples.size());
      ForwardTrace trace(result.params, cfg.combination, g, aug, samples, negatives);
      if (!std::isfinite(trace.loss())) {
        throw Error(ErrorKind::kNumerical, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                               std::to_string(b));
      }
      const ModelParams grads = ComputeGradients(trace);
      AdamStep(result.params, grads, adam);
      loss_sum += trace.loss() * static_cast<double>(samples.size());
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(g.num_nodes());
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

void WriteTrainLogCsv(const TrainLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kFile, "cannot write " + path);
  out << "epoch,loss,seconds\n";
  char buf[96];
  for (const auto& r : log.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.6f\n", r.epoch, r.loss, r.seconds);
    out << buf;
  }
}

}  // namespace mag
