#include "mag/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "mag/error.hpp"

namespace mag {

using nlohmann::json;

namespace {

[[noreturn]] void Bad(const std::string& msg) { throw Error(ErrorKind::kConfig, msg); }

void CheckKeys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) Bad(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) Bad("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
T Get(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    Bad(where + "." + key + " has the wrong type");
  }
}

int GetInt(const json& j, const char* key, const std::string& where, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) Bad(where + "." + key + " must be an integer");
  return j.at(key).get<int>();
}

double GetNumber(const json& j, const char* key, const std::string& where, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) Bad(where + "." + key + " must be a number");
  return j.at(key).get<double>();
}

std::uint64_t GetSeed(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    Bad(where + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

InjectionSpec ParseInjection(const json& j, const std::string& where) {
  CheckKeys(j, where, {"clique_size", "num_cliques", "contextual_count", "candidate_pool", "seed"});
  InjectionSpec s;
  s.clique_size = GetInt(j, "clique_size", where, s.clique_size);
  s.num_cliques = GetInt(j, "num_cliques", where, s.num_cliques);
  s.contextual_count = GetInt(j, "contextual_count", where, s.contextual_count);
  s.candidate_pool = GetInt(j, "candidate_pool", where, s.candidate_pool);
  if (j.contains("seed")) s.seed = GetSeed(j.at("seed"), where + ".seed");
  return s;
}

std::string Resolve(const std::string& path, const std::string& base_dir) {
  namespace fs = std::filesystem;
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

CombinationConfig Combo(std::initializer_list<std::pair<int, int>> pairs, std::vector<double> weights) {
  CombinationConfig c;
  for (const auto& [a, b] : pairs) c.pairs.emplace_back(a, b);
  c.weights = std::move(weights);
  return c;
}

AugmentationSpec AugmentationFor(const CombinationConfig& c) {
  return c.UsesAugmented() ? DefaultAugmentation() : AugmentationSpec{};
}

}  // namespace

const std::vector<std::string>& PresetNames() {
  static const std::vector<std::string> names = {"cola", "anemone", "gradate", "l-mag", "m-mag",
                                                 "origin", "m-s", "m-sg", "m-g"};
  return names;
}

Preset ResolvePreset(const std::string& name) {
  Preset p;
  p.name = name;
  if (name == "cola" || name == "origin") {
    p.combination = Combo({{1, 3}}, {1.0});
  } else if (name == "anemone" || name == "m-sg") {
    p.combination = Combo({{1, 3}, {5, 6}}, {0.3, 0.7});
  } else if (name == "gradate") {
    p.combination = Combo({{1, 3}, {7, 9}, {2, 3}, {8, 9}, {1, 7}}, {1.0, 1.0, 1.0, 1.0, 1.0});
  } else if (name == "l-mag") {
    p.combination = Combo({{4, 9}}, {1.0});
  } else if (name == "m-mag" || name == "m-g") {
    p.combination = Combo({{1, 3}, {4, 6}}, {0.3, 0.7});
  } else if (name == "m-s") {
    p.combination = Combo({{1, 3}, {2, 3}}, {0.3, 0.7});
  } else {
    std::string known;
    for (const auto& n : PresetNames()) known += (known.empty() ? "" : ", ") + n;
    Bad("unknown preset \"" + name + "\" (known: " + known + ")");
  }
  p.augmentation = AugmentationFor(p.combination);
  return p;
}

CombinationConfig ParseCombination(const json& pairs, const json* weights) {
  if (!pairs.is_array() || pairs.empty()) Bad("combination must be a non-empty array of [i,j] pairs");
  CombinationConfig c;
  for (const auto& p : pairs) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
      Bad("combination entries must be [i,j] integer pairs, got " + p.dump());
    }
    try {
      c.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    } catch (const Error& e) {
      throw Error(ErrorKind::kConfig, std::string("combination ") + p.dump() + ": " + e.what());
    }
  }
  if (weights != nullptr) {
    if (!weights->is_array()) Bad("weights must be an array of numbers");
    for (const auto& w : *weights) {
      if (!w.is_number()) Bad("weights must be an array of numbers");
      c.weights.push_back(w.get<double>());
    }
  } else {
    c.weights.assign(c.pairs.size(), 1.0);
  }
  c.Validate();
  return c;
}

AugmentationSpec ParseAugmentation(const json& steps) {
  if (!steps.is_array()) Bad("augmentation must be an array of steps");
  AugmentationSpec spec;
  for (const auto& s : steps) {
    if (!s.is_object() || !s.contains("op") || !s.at("op").is_string()) {
      Bad("augmentation steps need a string \"op\", got " + s.dump());
    }
    const std::string op = s.at("op").get<std::string>();
    const std::string where = "augmentation step \"" + op + "\"";
    AugmentStep step;
    if (op == "mask_features") {
      CheckKeys(s, where, {"op", "p", "per_node"});
      step = AugmentStep::Mask(GetNumber(s, "p", where, 0.2));
      step.per_node = Get<bool>(s, "per_node", where, false);
    } else if (op == "remove_edges") {
      CheckKeys(s, where, {"op", "p"});
      step = AugmentStep::Remove(GetNumber(s, "p", where, 0.2));
    } else if (op == "flip_edges") {
      CheckKeys(s, where, {"op", "p"});
      step = AugmentStep::Flip(GetNumber(s, "p", where, 0.2));
    } else if (op == "ppr") {
      CheckKeys(s, where, {"op", "alpha", "keep_eps"});
      step = AugmentStep::Ppr(GetNumber(s, "alpha", where, 0.15), GetNumber(s, "keep_eps", where, 1e-4));
    } else if (op == "heat") {
      CheckKeys(s, where, {"op", "t", "keep_eps"});
      step = AugmentStep::Heat(GetNumber(s, "t", where, 5.0), GetNumber(s, "keep_eps", where, 1e-4));
    } else {
      Bad("unknown augmentation op \"" + op + "\"");
    }
    step.Validate();
    spec.steps.push_back(step);
  }
  return spec;
}

TrainConfig ParseTrainConfig(const json& j) {
  const std::string where = "train";
  CheckKeys(j, where, {"epochs", "lr", "hidden_dim", "batch_size", "subgraph_size", "restart_p", "depth"});
  TrainConfig t;
  t.epochs = GetInt(j, "epochs", where, t.epochs);
  t.lr = GetNumber(j, "lr", where, t.lr);
  t.hidden_dim = GetInt(j, "hidden_dim", where, t.hidden_dim);
  t.batch_size = GetInt(j, "batch_size", where, t.batch_size);
  t.subgraph_size = GetInt(j, "subgraph_size", where, t.subgraph_size);
  t.restart_p = GetNumber(j, "restart_p", where, t.restart_p);
  t.depth = GetInt(j, "depth", where, t.depth);
  return t;
}

RunConfig ParseRunConfig(const json& j, const std::string& base_dir) {
  CheckKeys(j, "config", {"datasets", "injection", "train", "preset", "combination", "weights", "augmentation",
                          "rounds", "freeze_inference_augmentation", "seeds", "output_dir"});
  RunConfig cfg;
  if (j.contains("datasets")) {
    const json& ds = j.at("datasets");
    if (!ds.is_object()) Bad("datasets must map names to {edges, features, labels}");
    for (const auto& [name, entry] : ds.items()) {
      const std::string where = "datasets." + name;
      CheckKeys(entry, where, {"edges", "features", "labels", "injection"});
      DatasetPaths p;
      if (!entry.contains("edges") || !entry.contains("features")) Bad(where + " needs edges and features");
      p.edges = Resolve(Get<std::string>(entry, "edges", where, ""), base_dir);
      p.features = Resolve(Get<std::string>(entry, "features", where, ""), base_dir);
      if (entry.contains("labels")) p.labels = Resolve(Get<std::string>(entry, "labels", where, ""), base_dir);
      if (entry.contains("injection")) p.injection = ParseInjection(entry.at("injection"), where + ".injection");
      cfg.datasets.emplace(name, std::move(p));
    }
  }
  if (j.contains("injection")) cfg.injection = ParseInjection(j.at("injection"), "injection");
  if (j.contains("train")) cfg.train = ParseTrainConfig(j.at("train"));

  if (j.contains("preset") && j.contains("combination")) Bad("give either preset or combination, not both");
  const json* weights = j.contains("weights") ? &j.at("weights") : nullptr;
  if (j.contains("combination")) {
    cfg.train.combination = ParseCombination(j.at("combination"), weights);
  } else {
    cfg.preset = Get<std::string>(j, "preset", "config", "cola");
    Preset p = ResolvePreset(*cfg.preset);
    if (weights != nullptr) {
      json pairs = json::array();
      for (const auto& pr : p.combination.pairs) pairs.push_back({pr.first.value(), pr.second.value()});
      p.combination = ParseCombination(pairs, weights);
    }
    cfg.train.combination = p.combination;
  }
  if (j.contains("augmentation")) {
    cfg.train.augmentation = ParseAugmentation(j.at("augmentation"));
    cfg.augmentation_explicit = true;
  } else {
    cfg.train.augmentation = AugmentationFor(cfg.train.combination);
  }

  cfg.rounds = GetInt(j, "rounds", "config", cfg.rounds);
  if (cfg.rounds < 1) Bad("rounds must be >= 1");
  cfg.freeze_inference_augmentation = Get<bool>(j, "freeze_inference_augmentation", "config", false);
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    if (!s.is_array() || s.empty()) Bad("seeds must be a non-empty array");
    cfg.seeds.clear();
    std::set<std::uint64_t> seen;
    for (const auto& v : s) {
      cfg.seeds.push_back(GetSeed(v, "seeds[]"));
      if (!seen.insert(cfg.seeds.back()).second) Bad("seeds must be distinct");
    }
  }
  cfg.output_dir = Resolve(Get<std::string>(j, "output_dir", "config", cfg.output_dir), base_dir);
  cfg.train.Validate();
  return cfg;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kFile, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, path + ": " + e.what());
  }
  return ParseRunConfig(j, std::filesystem::path(path).parent_path().string());
}

InjectionSpec RunConfig::InjectionFor(const std::string& dataset, std::size_t num_nodes) const {
  const auto it = datasets.find(dataset);
  if (it != datasets.end() && it->second.injection) return *it->second.injection;
  if (injection) return *injection;
  return DefaultInjectionSpec(num_nodes);
}

ScoreConfig RunConfig::ScoringFor(std::uint64_t seed) const {
  ScoreConfig s;
  s.rounds = rounds;
  s.batch_size = train.batch_size;
  s.walk = train.walk();
  s.freeze_augmentation = freeze_inference_augmentation;
  s.seed = seed;
  return s;
}

TrainConfig RunConfig::TrainingFor(std::uint64_t seed) const {
  TrainConfig t = train;
  t.seed = seed;
  t.augmentation.seed = seed;
  return t;
}

RunConfig RunConfig::WithCombination(const CombinationConfig& combination) const {
  RunConfig out = *this;
  out.preset.reset();
  out.train.combination = combination;
  if (!augmentation_explicit) out.train.augmentation = AugmentationFor(combination);
  out.train.Validate();
  return out;
}

RunConfig RunConfig::WithPreset(const std::string& name) const {
  RunConfig out = WithCombination(ResolvePreset(name).combination);
  out.preset = name;
  return out;
}

json ToJson(const CombinationConfig& c) {
  json pairs = json::array();
  for (const auto& p : c.pairs) pairs.push_back({p.first.value(), p.second.value()});
  return {{"combination", pairs}, {"weights", c.weights}};
}

json ToJson(const AugmentationSpec& a) {
  json steps = json::array();
  for (const auto& s : a.steps) {
    json j = {{"op", AugmentOpName(s.op)}};
    switch (s.op) {
      case AugmentOp::kMaskFeatures:
        j["p"] = s.p;
        if (s.per_node) j["per_node"] = true;
        break;
      case AugmentOp::kRemoveEdges:
      case AugmentOp::kFlipEdges: j["p"] = s.p; break;
      case AugmentOp::kPpr:
        j["alpha"] = s.alpha;
        j["keep_eps"] = s.keep_eps;
        break;
      case AugmentOp::kHeat:
        j["t"] = s.t;
        j["keep_eps"] = s.keep_eps;
        break;
    }
    steps.push_back(std::move(j));
  }
  return steps;
}

json ToJson(const InjectionSpec& s) {
  return {{"clique_size", s.clique_size},       {"num_cliques", s.num_cliques},
          {"contextual_count", s.contextual_count}, {"candidate_pool", s.candidate_pool},
          {"seed", s.seed}};
}

json ToJson(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"lr", t.lr},
          {"hidden_dim", t.hidden_dim},
          {"batch_size", t.batch_size},
          {"subgraph_size", t.subgraph_size},
          {"restart_p", t.restart_p},
          {"depth", t.depth}};
}

json ToJson(const RunConfig& cfg) {
  json j = json::object();
  if (!cfg.datasets.empty()) {
    json ds = json::object();
    for (const auto& [name, p] : cfg.datasets) {
      json e = {{"edges", p.edges}, {"features", p.features}};
      if (p.labels) e["labels"] = *p.labels;
      if (p.injection) e["injection"] = ToJson(*p.injection);
      ds[name] = std::move(e);
    }
    j["datasets"] = std::move(ds);
  }
  if (cfg.injection) j["injection"] = ToJson(*cfg.injection);
  j["train"] = ToJson(cfg.train);
  const json c = ToJson(cfg.train.combination);
  j["combination"] = c["combination"];
  j["weights"] = c["weights"];
  j["augmentation"] = ToJson(cfg.train.augmentation);
  j["rounds"] = cfg.rounds;
  j["freeze_inference_augmentation"] = cfg.freeze_inference_augmentation;
  j["seeds"] = cfg.seeds;
  j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace mag
