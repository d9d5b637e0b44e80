#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fgl/graph/algorithms.h"
#include "fgl/learn/train.h"
#include "fgl/partition/partition.h"
#include "fgl/privacy/dp.h"
#include "fgl/robust/robustness.h"

namespace fgl {

enum class Scenario { kGraphFl, kSubgraphFl };

// kLocal trains every client in isolation and exchanges nothing.
enum class Algorithm { kFedAvg, kFedProx, kScaffold, kFedProto, kLocal };

// global_global: global model on the unpartitioned data; global_local:
// global model on each client's data; local_global: each client's model on
// the unpartitioned data; local_local: each client's model on its own data.
enum class EvalMode { kGlobalGlobal, kGlobalLocal, kLocalGlobal, kLocalLocal };

std::string_view ScenarioName(Scenario s);
Scenario ParseScenario(std::string_view name);
std::string_view AlgorithmName(Algorithm a);
Algorithm ParseAlgorithm(std::string_view name);
std::string_view EvalModeName(EvalMode m);
EvalMode ParseEvalMode(std::string_view name);

struct DatasetSpec {
  // One directory (Subgraph-FL) or JSONL file (Graph-FL); several files for
  // the cross-domain split.
  std::vector<std::string> paths;
  std::string name;

  bool operator==(const DatasetSpec&) const = default;
};

struct AggregationOptions {
  double server_lr = 1.0;  // Scaffold global step
  // FedAvg/FedProx average with equal weights instead of sample counts.
  bool equal_weights = false;
  // Scaffold never updates its control variates (they stay zero).
  bool pin_control_variates = false;

  bool operator==(const AggregationOptions&) const = default;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kSubgraphFl;
  DatasetSpec dataset;
  Algorithm algorithm = Algorithm::kFedAvg;
  int rounds = 100;
  double client_fraction = 1.0;
  PartitionSpec partition;  // num_clients is K
  SplitRatios split;        // used when the data carries no masks
  TrainConfig train;
  AggregationOptions aggregation;
  RobustnessSpec robustness;
  std::optional<DpConfig> dp;
  EvalMode eval_mode = EvalMode::kLocalLocal;
  int repeats = 3;
  uint64_t seed = 0;

  int num_clients() const { return partition.num_clients; }

  // Throws kConfig for out-of-range values and unsupported combinations.
  void Validate() const;
  bool operator==(const ExperimentConfig&) const = default;

  // Scenario defaults: Subgraph-FL trains full-batch for 3 epochs at lr 1e-2
  // on a Metis split with a 20/40/40 node split; Graph-FL trains 1 epoch at
  // lr 1e-3 with batch 128 on a Dirichlet(1) split with an 80/10/10 split.
  static ExperimentConfig Defaults(Scenario scenario);
};

// Seed of repeat `r`.
uint64_t RepeatSeed(uint64_t master_seed, int repeat);

}  // namespace fgl
