#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fgl/common/error.h"
#include "fgl/engine/config.h"
#include "fgl/graph/graph.h"
#include "fgl/learn/dataset.h"
#include "fgl/learn/metrics.h"
#include "fgl/partition/partition.h"
#include "fgl/stats/stats.h"

namespace fgl {

// Raw inputs: one graph for Subgraph-FL, one or more collections for Graph-FL.
struct SourceData {
  std::optional<Graph> graph;
  std::vector<GraphCollection> collections;
};

SourceData LoadData(const ExperimentConfig& cfg);

struct FederatedData {
  ClientAssignment assignment;
  std::vector<Dataset> clients;
  std::vector<int> d_max;                 // per client
  std::vector<int64_t> edge_shortfall;    // heterophilous injection, per client
  Dataset global;                         // unpartitioned, unperturbed
  HeterogeneityReport stats;
  int num_classes = 0;
  bool regression = false;
};

// Generates masks when the source has none, partitions, applies feature skew
// and robustness injectors per client, and builds the model inputs.
FederatedData PrepareFederatedData(const ExperimentConfig& cfg, const SourceData& source);

struct RoundRecord {
  int round = 0;
  std::vector<int> sampled;
  std::optional<Metrics> val;
  Metrics test;
  int64_t uplink_bytes = 0;
  int64_t downlink_bytes = 0;
  double wall_ms = 0.0;
};

struct ClientDpRecord {
  int client = 0;
  int d_max = 0;
  double sigma = 0.0;
  double sensitivity = 0.0;
  int64_t releases = 0;
  std::optional<double> epsilon;
};

struct DpSummary {
  std::vector<ClientDpRecord> clients;
  // Largest per-client epsilon; empty when some client added no noise.
  std::optional<double> epsilon_max;
};

struct RepeatReport {
  int repeat = 0;
  uint64_t seed = 0;
  std::vector<RoundRecord> rounds;
  int best_round = 0;
  Metrics best_test;
  int64_t uplink_bytes = 0;
  int64_t downlink_bytes = 0;
  std::optional<DpSummary> dp;
  // Final global parameters (empty for algorithms without a global model).
  std::vector<double> final_global;
};

struct AbortInfo {
  ErrorCode code = ErrorCode::kContractViolation;
  std::string message;
  int repeat = 0;
  std::vector<RoundRecord> partial_rounds;  // rounds the failed repeat finished
};

struct RunSummary {
  std::string metric;  // "accuracy" or "mse"
  double mean = 0.0;
  double std = 0.0;    // population std over completed repeats
  int completed = 0;
};

struct RunReport {
  std::vector<RepeatReport> repeats;  // completed repeats only
  std::optional<RunSummary> summary;
  std::optional<AbortInfo> aborted;
};

// Observer for tests: called after aggregation with the round's global
// parameters (or, for fedproto and local, empty).
struct RunHooks {
  std::function<void(int repeat, int round, const std::vector<double>& global)> on_round;
};

struct RunOptions {
  int workers = 1;
  RunHooks hooks;
};

// Runs cfg.repeats repeats. An error stops the run; completed repeats and the
// error are kept in the report.
RunReport RunExperiment(const ExperimentConfig& cfg, const FederatedData& data,
                        const RunOptions& options = {});

}  // namespace fgl
