#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mag/augmentation.hpp"
#include "mag/contrast.hpp"
#include "mag/injection.hpp"
#include "mag/scoring.hpp"
#include "mag/trainer.hpp"

namespace mag {

struct DatasetPaths {
  std::string edges;
  std::string features;
  std::optional<std::string> labels;
  std::optional<InjectionSpec> injection;  // overrides the run-level spec
};

// Named combination with its default augmentation.
struct Preset {
  std::string name;
  CombinationConfig combination;
  AugmentationSpec augmentation;
};

// cola, anemone, gradate, l-mag, m-mag, origin, m-s, m-sg, m-g.
const std::vector<std::string>& PresetNames();
Preset ResolvePreset(const std::string& name);

struct RunConfig {
  std::map<std::string, DatasetPaths> datasets;
  std::optional<InjectionSpec> injection;
  TrainConfig train;  // combination and augmentation resolved here
  std::optional<std::string> preset;
  bool augmentation_explicit = false;
  int rounds = 256;
  bool freeze_inference_augmentation = false;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "runs";

  // Injection spec for a dataset of n nodes.
  InjectionSpec InjectionFor(const std::string& dataset, std::size_t num_nodes) const;
  ScoreConfig ScoringFor(std::uint64_t seed) const;
  TrainConfig TrainingFor(std::uint64_t seed) const;
  // The same config with another combination; augmentation falls back to the
  // masked-feature + removed-edge default when the new pairs need it and none
  // was given explicitly.
  RunConfig WithCombination(const CombinationConfig& combination) const;
  RunConfig WithPreset(const std::string& name) const;
};

// Parses and validates; unknown keys are rejected. Relative dataset paths are
// resolved against `base_dir`.
RunConfig ParseRunConfig(const nlohmann::json& j, const std::string& base_dir = "");
RunConfig LoadRunConfig(const std::string& path);

nlohmann::json ToJson(const RunConfig& cfg);
nlohmann::json ToJson(const TrainConfig& cfg);
nlohmann::json ToJson(const CombinationConfig& c);
nlohmann::json ToJson(const AugmentationSpec& a);
nlohmann::json ToJson(const InjectionSpec& s);

CombinationConfig ParseCombination(const nlohmann::json& pairs, const nlohmann::json* weights);
AugmentationSpec ParseAugmentation(const nlohmann::json& steps);
TrainConfig ParseTrainConfig(const nlohmann::json& j);

}  // namespace mag
