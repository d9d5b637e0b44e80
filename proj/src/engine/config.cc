#include "fgl/engine/config.h"

#include <string>

#include "fgl/common/error.h"
#include "fgl/common/rng.h"

namespace fgl {
namespace {

[[noreturn]] void Unknown(std::string_view what, std::string_view name) {
  throw Error(ErrorCode::kConfig, "unknown " + std::string(what) + " '" + std::string(name) + "'");
}

void Require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kConfig, message);
}

}  // namespace

std::string_view ScenarioName(Scenario s) {
  return s == Scenario::kGraphFl ? "graph_fl" : "subgraph_fl";
}

Scenario ParseScenario(std::string_view name) {
  if (name == "graph_fl") return Scenario::kGraphFl;
  if (name == "subgraph_fl") return Scenario::kSubgraphFl;
  Unknown("scenario", name);
}

std::string_view AlgorithmName(Algorithm a) {
  switch (a) {
    case Algorithm::kFedAvg: return "fedavg";
    case Algorithm::kFedProx: return "fedprox";
    case Algorithm::kScaffold: return "scaffold";
    case Algorithm::kFedProto: return "fedproto";
    case Algorithm::kLocal: return "local";
  }
  return "?";
}

Algorithm ParseAlgorithm(std::string_view name) {
  for (auto a : {Algorithm::kFedAvg, Algorithm::kFedProx, Algorithm::kScaffold,
                 Algorithm::kFedProto, Algorithm::kLocal}) {
    if (AlgorithmName(a) == name) return a;
  }
  Unknown("algorithm", name);
}

std::string_view EvalModeName(EvalMode m) {
  switch (m) {
    case EvalMode::kGlobalGlobal: return "global_global";
    case EvalMode::kGlobalLocal: return "global_local";
    case EvalMode::kLocalGlobal: return "local_global";
    case EvalMode::kLocalLocal: return "local_local";
  }
  return "?";
}

EvalMode ParseEvalMode(std::string_view name) {
  for (auto m : {EvalMode::kGlobalGlobal, EvalMode::kGlobalLocal, EvalMode::kLocalGlobal,
                 EvalMode::kLocalLocal}) {
    if (EvalModeName(m) == name) return m;
  }
  Unknown("eval_mode", name);
}

void ExperimentConfig::Validate() const {
  Require(rounds >= 0, "rounds must be >= 0");
  Require(client_fraction > 0 && client_fraction <= 1, "client_fraction must be in (0,1]");
  Require(repeats >= 1, "repeats must be >= 1");
  partition.Validate();
  Require(split.train >= 0 && split.val >= 0 && split.test >= 0 &&
              split.train + split.val + split.test <= 1 + 1e-9,
          "split ratios must be non-negative and sum to at most 1");
  Require(train.local_epochs >= 0, "train.local_epochs must be >= 0");
  Require(train.batch_size >= 0, "train.batch_size must be >= 0");
  Require(train.lr > 0, "train.lr must be > 0");
  Require(train.weight_decay >= 0, "train.weight_decay must be >= 0");
  Require(train.prox_mu >= 0, "train.prox_mu must be >= 0");
  Require(train.proto_lambda >= 0, "train.proto_lambda must be >= 0");
  Require(train.k >= 0, "train.k must be >= 0");
  Require(aggregation.server_lr > 0, "aggregation.server_lr must be > 0");
  robustness.Validate();
  if (dp) dp->Validate();

  const bool has_global_model =
      algorithm != Algorithm::kFedProto && algorithm != Algorithm::kLocal;
  if (!has_global_model &&
      (eval_mode == EvalMode::kGlobalGlobal || eval_mode == EvalMode::kGlobalLocal)) {
    throw Error(ErrorCode::kConfig, std::string(AlgorithmName(algorithm)) +
                                        " has no global model; eval_mode " +
                                        std::string(EvalModeName(eval_mode)) +
                                        " is unavailable");
  }
  Require(!(algorithm == Algorithm::kFedProto && dp),
          "fedproto exchanges prototypes, not gradients; dp is unsupported");
  Require(!(scenario == Scenario::kGraphFl && robustness.active()),
          "robustness injectors apply to Subgraph-FL node data only");
}

ExperimentConfig ExperimentConfig::Defaults(Scenario scenario) {
  ExperimentConfig cfg;
  cfg.scenario = scenario;
  if (scenario == Scenario::kSubgraphFl) {
    cfg.partition.strategy = PartitionStrategy::kMetisCommunity;
    cfg.split = {0.2, 0.4, 0.4};
    cfg.train.lr = 1e-2;
    cfg.train.local_epochs = 3;
    cfg.train.batch_size = 0;
  } else {
    cfg.partition.strategy = PartitionStrategy::kLabelDirichlet;
    cfg.partition.alpha = 1.0;
    cfg.split = {0.8, 0.1, 0.1};
    cfg.train.lr = 1e-3;
    cfg.train.local_epochs = 1;
    cfg.train.batch_size = 128;
  }
  return cfg;
}

uint64_t RepeatSeed(uint64_t master_seed, int repeat) {
  return DeriveSeed(master_seed, "repeat", repeat);
}

}  // namespace fgl
