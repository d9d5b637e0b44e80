#pragma once

#include <vector>

#include "fgl/engine/config.h"
#include "fgl/engine/experiment.h"
#include "fgl/graph/algorithms.h"

namespace fgl::testing {

// Four-block SBM with 60 nodes per block and generated masks.
inline Graph EngineGraph(uint64_t seed = 3) {
  Graph g = GenerateSbm({60, 60, 60, 60}, 0.12, 0.01, 8, seed, 0.5);
  ApplyMasks(g, GenerateMasks(g.num_nodes, {0.3, 0.2, 0.5}, seed));
  return g;
}

inline ExperimentConfig EngineConfig(Algorithm algorithm, int clients = 4, int rounds = 5) {
  ExperimentConfig cfg = ExperimentConfig::Defaults(Scenario::kSubgraphFl);
  cfg.dataset.paths = {"<memory>"};
  cfg.algorithm = algorithm;
  cfg.rounds = rounds;
  cfg.repeats = 1;
  cfg.seed = 11;
  cfg.partition.strategy = PartitionStrategy::kLouvainCommunity;
  cfg.partition.num_clients = clients;
  cfg.train.local_epochs = 2;
  cfg.train.k = 2;
  return cfg;
}

inline FederatedData EngineData(const ExperimentConfig& cfg, const Graph& g) {
  SourceData src;
  src.graph = g;
  return PrepareFederatedData(cfg, src);
}

// Global parameters after every round of repeat 0.
inline std::vector<std::vector<double>> GlobalTrace(const ExperimentConfig& cfg,
                                                    const FederatedData& data,
                                                    RunReport* report = nullptr,
                                                    int workers = 1) {
  std::vector<std::vector<double>> trace;
  RunOptions opts;
  opts.workers = workers;
  opts.hooks.on_round = [&](int repeat, int, const std::vector<double>& p) {
    if (repeat == 0) trace.push_back(p);
  };
  RunReport r = RunExperiment(cfg, data, opts);
  if (report) *report = std::move(r);
  return trace;
}

}  // namespace fgl::testing
