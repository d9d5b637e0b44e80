#include "fgl/cli/config_json.h"

#include <fstream>
#include <set>
#include <string>

#include "fgl/common/error.h"
#include "fgl/graph/propagation.h"
#include "fgl/learn/optimizer.h"

namespace fgl {
namespace {

using nlohmann::json;

[[noreturn]] void SchemaError(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kConfig, path + ": " + what);
}

// Reads the members of one JSON object and rejects any it did not consume.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) SchemaError(path_, "expected an object");
  }

  const json* Find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string Path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool Number(const std::string& key, double& out) {
    const json* v = Find(key);
    if (!v) return false;
    if (!v->is_number()) SchemaError(Path(key), "expected a number");
    out = v->get<double>();
    return true;
  }

  bool Int(const std::string& key, int& out) {
    const json* v = Find(key);
    if (!v) return false;
    if (!v->is_number_integer()) SchemaError(Path(key), "expected an integer");
    const auto x = v->get<int64_t>();
    if (x < INT32_MIN || x > INT32_MAX) SchemaError(Path(key), "integer out of range");
    out = static_cast<int>(x);
    return true;
  }

  bool Unsigned(const std::string& key, uint64_t& out) {
    const json* v = Find(key);
    if (!v) return false;
    if (!v->is_number_unsigned()) SchemaError(Path(key), "expected a non-negative integer");
    out = v->get<uint64_t>();
    return true;
  }

  bool Bool(const std::string& key, bool& out) {
    const json* v = Find(key);
    if (!v) return false;
    if (!v->is_boolean()) SchemaError(Path(key), "expected a boolean");
    out = v->get<bool>();
    return true;
  }

  bool String(const std::string& key, std::string& out) {
    const json* v = Find(key);
    if (!v) return false;
    if (!v->is_string()) SchemaError(Path(key), "expected a string");
    out = v->get<std::string>();
    return true;
  }

  // Parses an enum through `parse`, re-labelling its error with the path.
  template <typename T, typename Parse>
  bool Enum(const std::string& key, T& out, Parse parse) {
    std::string name;
    if (!String(key, name)) return false;
    try {
      out = parse(name);
    } catch (const Error& e) {
      SchemaError(Path(key), e.what());
    }
    return true;
  }

  bool NumberList(const std::string& key, std::vector<double>& out) {
    const json* v = Find(key);
    if (!v) return false;
    if (!v->is_array()) SchemaError(Path(key), "expected an array of numbers");
    out.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) {
        SchemaError(Path(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back((*v)[i].get<double>());
    }
    return true;
  }

  bool StringList(const std::string& key, std::vector<std::string>& out) {
    const json* v = Find(key);
    if (!v) return false;
    if (v->is_string()) {
      out = {v->get<std::string>()};
      return true;
    }
    if (!v->is_array()) SchemaError(Path(key), "expected a string or an array of strings");
    out.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_string()) {
        SchemaError(Path(key) + "[" + std::to_string(i) + "]", "expected a string");
      }
      out.push_back((*v)[i].get<std::string>());
    }
    return true;
  }

  // Child object reader, or nullopt when the key is absent.
  std::optional<ObjectReader> Child(const std::string& key) {
    const json* v = Find(key);
    if (!v) return std::nullopt;
    return ObjectReader(*v, Path(key));
  }

  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) SchemaError(Path(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void ReadPartition(ObjectReader r, PartitionSpec& p) {
  r.Enum("strategy", p.strategy, ParseStrategy);
  r.Int("num_clients", p.num_clients);
  r.Number("alpha", p.alpha);
  r.Number("resolution", p.resolution);
  r.Number("imbalance_eps", p.imbalance_eps);
  r.Number("capacity_beta", p.capacity_beta);
  if (auto fs = r.Child("feature_skew")) {
    fs->Enum("mode", p.feature_skew.mode, ParseFeatureSkewMode);
    fs->Number("lo", p.feature_skew.lo);
    fs->Number("hi", p.feature_skew.hi);
    fs->Finish();
  }
  r.Finish();
}

bool ReadTrain(ObjectReader r, TrainConfig& t) {
  r.Int("local_epochs", t.local_epochs);
  r.Int("batch_size", t.batch_size);
  r.Number("lr", t.lr);
  r.Number("weight_decay", t.weight_decay);
  r.Number("prox_mu", t.prox_mu);
  r.Number("proto_lambda", t.proto_lambda);
  const bool optimizer = r.Enum("optimizer", t.optimizer, ParseOptimizer);
  r.Int("k", t.k);
  r.Enum("normalization", t.normalization, ParseNormalization);
  r.Finish();
  return optimizer;
}

void ReadRobustness(ObjectReader r, RobustnessSpec& s) {
  if (auto fn = r.Child("feature_noise")) {
    fn->Enum("kind", s.feature_noise.kind, ParseNoiseKind);
    fn->Number("sigma", s.feature_noise.sigma);
    fn->Number("channel_fraction", s.feature_noise.channel_fraction);
    fn->Finish();
  }
  r.Number("label_noise_rate", s.label_noise_rate);
  r.Number("hetero_edge_fraction", s.hetero_edge_fraction);
  r.Number("feature_missing_rate", s.feature_missing_rate);
  r.Number("edge_drop_rate", s.edge_drop_rate);
  r.Number("label_keep_ratio", s.label_keep_ratio);
  r.Finish();
}

DpConfig ReadDp(ObjectReader r) {
  DpConfig dp;
  r.Number("clip_norm", dp.clip_norm);
  r.Number("epsilon", dp.epsilon);
  r.Number("delta", dp.delta);
  r.NumberList("alpha_grid", dp.alpha_grid);
  r.Enum("rule", dp.rule, ParseSensitivityRule);
  double sigma = 0.0;
  if (r.Number("sigma_override", sigma)) dp.sigma_override = sigma;
  r.Finish();
  return dp;
}

}  // namespace

ExperimentConfig ParseConfig(const json& doc) {
  ObjectReader r(doc, "");
  Scenario scenario = Scenario::kSubgraphFl;
  r.Enum("scenario", scenario, ParseScenario);
  ExperimentConfig cfg = ExperimentConfig::Defaults(scenario);

  if (auto d = r.Child("dataset")) {
    d->StringList("paths", cfg.dataset.paths);
    d->String("name", cfg.dataset.name);
    d->Finish();
  }
  r.Enum("algorithm", cfg.algorithm, ParseAlgorithm);
  r.Int("rounds", cfg.rounds);
  r.Number("client_fraction", cfg.client_fraction);
  if (auto p = r.Child("partition")) ReadPartition(*p, cfg.partition);
  if (auto s = r.Child("split")) {
    s->Number("train", cfg.split.train);
    s->Number("val", cfg.split.val);
    s->Number("test", cfg.split.test);
    s->Finish();
  }
  bool optimizer_given = false;
  if (auto t = r.Child("train")) optimizer_given = ReadTrain(*t, cfg.train);
  if (cfg.algorithm == Algorithm::kScaffold && !optimizer_given) {
    cfg.train.optimizer = OptimizerKind::kSgd;
  }
  if (auto a = r.Child("aggregation")) {
    a->Number("server_lr", cfg.aggregation.server_lr);
    a->Bool("equal_weights", cfg.aggregation.equal_weights);
    a->Bool("pin_control_variates", cfg.aggregation.pin_control_variates);
    a->Finish();
  }
  if (auto rb = r.Child("robustness")) ReadRobustness(*rb, cfg.robustness);
  if (const json* dp = r.Find("dp"); dp && !dp->is_null()) cfg.dp = ReadDp(ObjectReader(*dp, "dp"));
  r.Enum("eval_mode", cfg.eval_mode, ParseEvalMode);
  r.Int("repeats", cfg.repeats);
  r.Unsigned("seed", cfg.seed);
  r.Finish();
  cfg.Validate();
  return cfg;
}

ExperimentConfig ParseConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return ParseConfig(doc);
}

json SerializeConfig(const ExperimentConfig& cfg) {
  const auto& p = cfg.partition;
  const auto& t = cfg.train;
  const auto& rb = cfg.robustness;
  json out = {
      {"scenario", ScenarioName(cfg.scenario)},
      {"dataset", {{"paths", cfg.dataset.paths}, {"name", cfg.dataset.name}}},
      {"algorithm", AlgorithmName(cfg.algorithm)},
      {"rounds", cfg.rounds},
      {"client_fraction", cfg.client_fraction},
      {"partition",
       {{"strategy", StrategyName(p.strategy)},
        {"num_clients", p.num_clients},
        {"alpha", p.alpha},
        {"resolution", p.resolution},
        {"imbalance_eps", p.imbalance_eps},
        {"capacity_beta", p.capacity_beta},
        {"feature_skew",
         {{"mode", FeatureSkewName(p.feature_skew.mode)},
          {"lo", p.feature_skew.lo},
          {"hi", p.feature_skew.hi}}}}},
      {"split", {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}}},
      {"train",
       {{"local_epochs", t.local_epochs},
        {"batch_size", t.batch_size},
        {"lr", t.lr},
        {"weight_decay", t.weight_decay},
        {"prox_mu", t.prox_mu},
        {"proto_lambda", t.proto_lambda},
        {"optimizer", OptimizerName(t.optimizer)},
        {"k", t.k},
        {"normalization", NormalizationName(t.normalization)}}},
      {"aggregation",
       {{"server_lr", cfg.aggregation.server_lr},
        {"equal_weights", cfg.aggregation.equal_weights},
        {"pin_control_variates", cfg.aggregation.pin_control_variates}}},
      {"robustness",
       {{"feature_noise",
         {{"kind", NoiseKindName(rb.feature_noise.kind)},
          {"sigma", rb.feature_noise.sigma},
          {"channel_fraction", rb.feature_noise.channel_fraction}}},
        {"label_noise_rate", rb.label_noise_rate},
        {"hetero_edge_fraction", rb.hetero_edge_fraction},
        {"feature_missing_rate", rb.feature_missing_rate},
        {"edge_drop_rate", rb.edge_drop_rate},
        {"label_keep_ratio", rb.label_keep_ratio}}},
      {"eval_mode", EvalModeName(cfg.eval_mode)},
      {"repeats", cfg.repeats},
      {"seed", cfg.seed},
  };
  if (cfg.dp) {
    const auto& dp = *cfg.dp;
    out["dp"] = {{"clip_norm", dp.clip_norm},
                 {"epsilon", dp.epsilon},
                 {"delta", dp.delta},
                 {"alpha_grid", dp.alpha_grid},
                 {"rule", SensitivityRuleName(dp.rule)}};
    if (dp.sigma_override) out["dp"]["sigma_override"] = *dp.sigma_override;
  } else {
    out["dp"] = nullptr;
  }
  return out;
}

}  // namespace fgl
