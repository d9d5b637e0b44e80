#include "fgl/engine/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <thread>

#include <spdlog/spdlog.h>

#include "fgl/common/rng.h"
#include "fgl/engine/aggregate.h"
#include "fgl/engine/message.h"
#include "fgl/graph/algorithms.h"
#include "fgl/graph/io.h"
#include "fgl/learn/model.h"
#include "fgl/learn/optimizer.h"
#include "fgl/learn/train.h"
#include "fgl/privacy/dp.h"
#include "fgl/robust/robustness.h"

namespace fgl {
namespace {

bool HasAnyMask(const Graph& g) {
  for (const Mask* m : {&g.train_mask, &g.val_mask, &g.test_mask}) {
    if (std::any_of(m->begin(), m->end(), [](uint8_t b) { return b != 0; })) return true;
  }
  return false;
}

std::vector<int> Indices(const Mask& mask) {
  std::vector<int> out;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

Graph PadFeatures(const Graph& g, int dim) {
  if (g.feature_dim() == dim) return g;
  Graph out = g;
  out.features = Matrix(g.num_nodes, dim);
  for (int v = 0; v < g.num_nodes; ++v) {
    for (int c = 0; c < g.feature_dim(); ++c) out.features(v, c) = g.features(v, c);
  }
  return out;
}

// Concatenates collections, zero-padding features to the widest input.
GraphCollection Concatenate(const std::vector<GraphCollection>& colls) {
  if (colls.size() == 1) return colls.front();
  int dim = 0;
  bool regression = colls.front().is_regression();
  for (const auto& c : colls) {
    dim = std::max(dim, c.feature_dim());
    if (c.is_regression() != regression) {
      throw Error(ErrorCode::kConfig, "cannot mix classification and regression datasets");
    }
  }
  GraphCollection out;
  for (const auto& c : colls) {
    for (const auto& g : c.graphs) out.graphs.push_back(PadFeatures(g, dim));
    out.graph_labels.insert(out.graph_labels.end(), c.graph_labels.begin(), c.graph_labels.end());
    out.graph_targets.insert(out.graph_targets.end(), c.graph_targets.begin(),
                             c.graph_targets.end());
    out.num_classes = std::max(out.num_classes, c.num_classes);
  }
  return out;
}

FederatedData PrepareSubgraph(const ExperimentConfig& cfg, const Graph& source) {
  Graph g = source;
  g.EnsureMasks();
  if (!HasAnyMask(g)) {
    ApplyMasks(g, GenerateMasks(g.num_nodes, cfg.split, DeriveSeed(cfg.seed, "masks")));
  }

  PartitionSpec spec = cfg.partition;
  spec.seed = DeriveSeed(cfg.seed, "partition");
  FederatedData out;
  out.assignment = PartitionNodes(g, spec);
  ClientSplit split = BuildClientSubgraphs(g, out.assignment);

  std::vector<Graph> graphs;
  for (int k = 0; k < out.assignment.num_clients; ++k) {
    Graph cg = std::move(split.clients[k].graph);
    if (spec.strategy == PartitionStrategy::kFeatureSkew) {
      FeatureSkewApplyClient(std::span<Graph>(&cg, 1), spec.feature_skew, cfg.seed, k);
    }
    int64_t shortfall = 0;
    if (cfg.robustness.active()) {
      auto r = ApplyRobustness(cg, cfg.robustness, DeriveSeed(cfg.seed, "robustness"), k);
      cg = std::move(r.graph);
      shortfall = r.edge_shortfall;
    }
    out.edge_shortfall.push_back(shortfall);
    out.d_max.push_back(cg.MaxDegree());
    out.clients.push_back(BuildNodeDataset(cg, cfg.train.k, cfg.train.normalization));
    graphs.push_back(std::move(cg));
  }
  out.global = BuildNodeDataset(g, cfg.train.k, cfg.train.normalization);
  out.num_classes = g.num_classes;
  out.regression = out.global.regression();
  out.stats = BuildHeterogeneityReport(graphs, g.num_classes, split.dropped_edges);
  return out;
}

FederatedData PrepareGraphFl(const ExperimentConfig& cfg,
                             const std::vector<GraphCollection>& colls) {
  if (colls.empty()) throw Error(ErrorCode::kConfig, "graph_fl needs at least one collection");
  const bool cross = cfg.partition.strategy == PartitionStrategy::kCrossDomain;
  if (!cross && colls.size() > 1) {
    throw Error(ErrorCode::kConfig, "several datasets need the cross_domain strategy");
  }
  const GraphCollection coll = Concatenate(colls);
  coll.Validate();

  PartitionSpec spec = cfg.partition;
  spec.seed = DeriveSeed(cfg.seed, "partition");
  FederatedData out;
  if (cross) {
    std::vector<int> sizes;
    for (const auto& c : colls) sizes.push_back(static_cast<int>(c.size()));
    spec.Validate();
    out.assignment = CrossDomainSplit(sizes, spec.num_clients);
    out.assignment.Validate();
  } else {
    out.assignment = PartitionGraphs(coll, spec);
  }
  out.num_classes = coll.num_classes;
  out.regression = coll.is_regression();

  const auto members = out.assignment.Members();
  GraphSplit global_split;
  std::vector<Graph> unions;
  std::vector<std::vector<int>> sample_labels;
  for (int k = 0; k < out.assignment.num_clients; ++k) {
    std::vector<Graph> graphs;
    std::vector<int> labels;
    std::vector<double> targets;
    int d_max = 0;
    for (int i : members[k]) {
      graphs.push_back(coll.graphs[i]);
      if (out.regression) {
        targets.push_back(coll.graph_targets[i]);
      } else {
        labels.push_back(coll.graph_labels[i]);
      }
      d_max = std::max(d_max, coll.graphs[i].MaxDegree());
    }
    if (spec.strategy == PartitionStrategy::kFeatureSkew) {
      FeatureSkewApplyClient(graphs, spec.feature_skew, cfg.seed, k);
    }
    const SplitMasks masks = GenerateMasks(static_cast<int>(graphs.size()), cfg.split,
                                           DeriveSeed(cfg.seed, "graph_split", k));
    GraphSplit split{Indices(masks.train), Indices(masks.val), Indices(masks.test)};
    for (int i : split.train) global_split.train.push_back(members[k][i]);
    for (int i : split.val) global_split.val.push_back(members[k][i]);
    for (int i : split.test) global_split.test.push_back(members[k][i]);
    out.clients.push_back(BuildGraphDataset(graphs, labels, targets, coll.num_classes,
                                            cfg.train.k, cfg.train.normalization, split));
    out.d_max.push_back(d_max);
    out.edge_shortfall.push_back(0);
    unions.push_back(DisjointUnion(graphs));
    sample_labels.push_back(std::move(labels));
  }
  for (auto* rows : {&global_split.train, &global_split.val, &global_split.test}) {
    std::sort(rows->begin(), rows->end());
  }
  out.global = BuildGraphDataset(coll.graphs, coll.graph_labels, coll.graph_targets,
                                 coll.num_classes, cfg.train.k, cfg.train.normalization,
                                 global_split);
  out.stats = BuildHeterogeneityReport(unions, coll.num_classes, 0,
                                       out.regression ? nullptr : &sample_labels);
  return out;
}

struct ClientState {
  SgcModel model;
  OptimizerState opt;
  std::vector<double> control;  // Scaffold c_i
  std::unique_ptr<DpMechanism> dp;
};

Error Wrap(const Error& e, int round, int actor) {
  const std::string what = e.what();
  if (what.rfind("round ", 0) == 0) return e;
  return Error(e.code(), "round " + std::to_string(round) + ", actor " + ActorName(actor) +
                             ": " + what);
}

// Runs fn(client) for every sampled client on up to `workers` threads. The
// error of the smallest failing client id is rethrown.
template <typename Fn>
void ForEachClient(const std::vector<int>& sampled, int workers, int round, Fn fn) {
  std::vector<std::exception_ptr> errors(sampled.size());
  auto run = [&](size_t i) {
    try {
      fn(sampled[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const size_t threads = std::min<size_t>(std::max(workers, 1), sampled.size());
  if (threads <= 1) {
    for (size_t i = 0; i < sampled.size(); ++i) {
      run(i);
      if (errors[i]) break;
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < sampled.size(); i = next++) run(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (size_t i = 0; i < sampled.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Wrap(e, round, sampled[i]);
    }
  }
}

const std::vector<double>& Require(const std::optional<std::vector<double>>& v, size_t size,
                                   const char* name) {
  if (!v || v->size() != size) {
    throw Error(ErrorCode::kContractViolation,
                std::string("server message lacks a valid ") + name);
  }
  return *v;
}

class RepeatRunner {
 public:
  RepeatRunner(const ExperimentConfig& cfg, const FederatedData& data, const RunOptions& options,
               int repeat, RepeatReport& report)
      : cfg_(cfg), data_(data), options_(options), report_(report),
        seed_(RepeatSeed(cfg.seed, repeat)) {
    report_.repeat = repeat;
    report_.seed = seed_;
  }

  void Run() {
    Init();
    report_.rounds.push_back(Evaluate(0, {}, 0, 0, 0.0));
    for (int t = 1; t <= cfg_.rounds; ++t) RunRound(t);
    Finish();
  }

 private:
  bool Exchanges() const { return cfg_.algorithm != Algorithm::kLocal; }
  bool HasGlobalModel() const {
    return cfg_.algorithm != Algorithm::kLocal && cfg_.algorithm != Algorithm::kFedProto;
  }

  void Init() {
    const int in = data_.global.feature_dim();
    const int out = data_.global.num_outputs();
    global_ = SgcModel::Glorot(in, out, DeriveSeed(seed_, "init"));
    const size_t dim = global_.params().size();
    if (cfg_.algorithm == Algorithm::kScaffold) control_.assign(dim, 0.0);
    clients_.resize(data_.clients.size());
    for (size_t k = 0; k < clients_.size(); ++k) {
      const Dataset& d = data_.clients[k];
      if (d.feature_dim() != in || d.num_outputs() != out) {
        throw Error(ErrorCode::kShape, "client " + std::to_string(k) +
                                           " data shape differs from the global data");
      }
      auto& c = clients_[k];
      c.model = global_;
      if (cfg_.algorithm == Algorithm::kScaffold) c.control.assign(dim, 0.0);
      if (cfg_.dp) {
        const int64_t releases =
            static_cast<int64_t>(cfg_.rounds) * cfg_.train.local_epochs *
            BatchesPerEpoch(static_cast<int64_t>(d.train.size()), cfg_.train.batch_size);
        c.dp = std::make_unique<DpMechanism>(*cfg_.dp, data_.d_max[k], cfg_.train.k, releases,
                                             DeriveSeed(seed_, "dp", static_cast<int64_t>(k)));
      }
    }
  }

  Message ServerMessage() const {
    Message m;
    switch (cfg_.algorithm) {
      case Algorithm::kFedAvg:
      case Algorithm::kFedProx:
        m.params = global_.params();
        break;
      case Algorithm::kScaffold:
        m.params = global_.params();
        m.control = control_;
        break;
      case Algorithm::kFedProto:
        m.prototypes = prototypes_;
        break;
      case Algorithm::kLocal:
        break;
    }
    return m;
  }

  void ClientExecute(int k, int round) {
    ClientState& cs = clients_[k];
    const Dataset& d = data_.clients[k];
    const size_t dim = cs.model.params().size();
    Message in;
    if (Exchanges()) in = pool_.Read(k, kServerActor);

    TrainContext ctx;
    ctx.dp = cs.dp.get();
    std::vector<double> anchor;
    std::vector<double> correction;
    PrototypeMap protos;
    if (HasGlobalModel()) {
      anchor = Require(in.params, dim, "params");
      cs.model.params() = anchor;
    }
    if (cfg_.algorithm == Algorithm::kFedProx) {
      ctx.global_params = &anchor;
      ctx.prox_mu = cfg_.train.prox_mu;
    } else if (cfg_.algorithm == Algorithm::kScaffold) {
      const auto& c = Require(in.control, dim, "control");
      correction.resize(dim);
      for (size_t i = 0; i < dim; ++i) correction[i] = c[i] - cs.control[i];
      ctx.correction = &correction;
    } else if (cfg_.algorithm == Algorithm::kFedProto) {
      if (in.prototypes) protos = std::move(*in.prototypes);
      if (!protos.empty()) {
        ctx.global_prototypes = &protos;
        ctx.proto_lambda = cfg_.train.proto_lambda;
      }
    }

    const TrainResult result =
        LocalTrain(cs.model, cs.opt, d, cfg_.train, ctx, DeriveSeed(seed_, "train", k, round));
    if (!Exchanges()) return;

    Message reply;
    reply.num_samples = result.num_samples;
    switch (cfg_.algorithm) {
      case Algorithm::kFedAvg:
      case Algorithm::kFedProx:
        reply.params = cs.model.params();
        break;
      case Algorithm::kScaffold: {
        if (result.num_samples > 0 && result.steps == 0) {
          throw Error(ErrorCode::kContractViolation, "scaffold client ran 0 local steps");
        }
        auto delta = ScaffoldClientUpdate(anchor, cs.model.params(), *in.control, cs.control,
                                          result.steps, cfg_.train.lr,
                                          cfg_.aggregation.pin_control_variates);
        reply.params_delta = std::move(delta.params_delta);
        reply.control_delta = std::move(delta.control_delta);
        break;
      }
      case Algorithm::kFedProto:
        reply.prototypes = ComputePrototypes(cs.model, d, d.train);
        break;
      case Algorithm::kLocal:
        break;
    }
    pool_.Write(k, reply);
  }

  void ServerExecute(int round, const std::vector<int>& sampled) {
    try {
      std::vector<Message> messages;
      for (int k : sampled) messages.push_back(pool_.Read(kServerActor, k));
      switch (cfg_.algorithm) {
        case Algorithm::kFedAvg:
        case Algorithm::kFedProx:
          if (auto p = FedAvgAggregate(messages, cfg_.aggregation.equal_weights)) {
            global_.params() = std::move(*p);
          }
          break;
        case Algorithm::kScaffold:
          ScaffoldAggregate(messages, static_cast<int>(clients_.size()),
                            cfg_.aggregation.server_lr, global_.params(), control_);
          break;
        case Algorithm::kFedProto:
          prototypes_ = FedProtoAggregate(messages);
          break;
        case Algorithm::kLocal:
          break;
      }
    } catch (const Error& e) {
      throw Wrap(e, round, kServerActor);
    }
  }

  void RunRound(int t) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<int> sampled =
        SampleClients(static_cast<int>(clients_.size()), cfg_.client_fraction, t, seed_);
    int64_t up = 0, down = 0;
    if (Exchanges()) {
      pool_.BeginRound(t, sampled);
      pool_.Write(kServerActor, ServerMessage());
    }
    ForEachClient(sampled, options_.workers, t, [&](int k) { ClientExecute(k, t); });
    if (Exchanges()) {
      ServerExecute(t, sampled);
      up = pool_.UplinkBytes();
      down = pool_.DownlinkBytes();
    }
    if (options_.hooks.on_round) {
      static const std::vector<double> kNone;
      options_.hooks.on_round(report_.repeat, t, HasGlobalModel() ? global_.params() : kNone);
    }
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start).count();
    report_.rounds.push_back(Evaluate(t, std::move(sampled), up, down, ms));
    spdlog::debug("repeat {} round {}: test {:.4f}", report_.repeat, t,
                  report_.rounds.back().test.Primary());
  }

  template <typename Rows>
  std::optional<Metrics> EvaluateSplit(Rows rows_of) const {
    std::vector<Metrics> metrics;
    std::vector<double> weights;
    switch (cfg_.eval_mode) {
      case EvalMode::kLocalLocal:
      case EvalMode::kGlobalLocal:
        for (size_t k = 0; k < clients_.size(); ++k) {
          const auto& rows = rows_of(data_.clients[k]);
          if (rows.empty()) continue;
          const SgcModel& m =
              cfg_.eval_mode == EvalMode::kLocalLocal ? clients_[k].model : global_;
          metrics.push_back(fgl::Evaluate(m, data_.clients[k], rows));
          weights.push_back(static_cast<double>(rows.size()));
        }
        break;
      case EvalMode::kGlobalGlobal: {
        const auto& rows = rows_of(data_.global);
        if (rows.empty()) return std::nullopt;
        return fgl::Evaluate(global_, data_.global, rows);
      }
      case EvalMode::kLocalGlobal: {
        const auto& rows = rows_of(data_.global);
        if (rows.empty()) return std::nullopt;
        double total = 0.0;
        for (size_t k = 0; k < clients_.size(); ++k) {
          metrics.push_back(fgl::Evaluate(clients_[k].model, data_.global, rows));
          weights.push_back(static_cast<double>(data_.clients[k].train.size()));
          total += weights.back();
        }
        if (total == 0.0) std::fill(weights.begin(), weights.end(), 1.0);
        break;
      }
    }
    if (metrics.empty()) return std::nullopt;
    return WeightedMean(metrics, weights);
  }

  RoundRecord Evaluate(int round, std::vector<int> sampled, int64_t up, int64_t down,
                       double ms) const {
    RoundRecord rec;
    rec.round = round;
    rec.sampled = std::move(sampled);
    rec.uplink_bytes = up;
    rec.downlink_bytes = down;
    rec.wall_ms = ms;
    try {
      rec.val = EvaluateSplit([](const Dataset& d) -> const std::vector<int>& { return d.val; });
      auto test =
          EvaluateSplit([](const Dataset& d) -> const std::vector<int>& { return d.test; });
      if (!test) throw Error(ErrorCode::kEvaluation, "no test samples to evaluate");
      rec.test = *test;
    } catch (const Error& e) {
      throw Wrap(e, round, kServerActor);
    }
    return rec;
  }

  void Finish() {
    const auto& rounds = report_.rounds;
    size_t best = rounds.size() - 1;
    bool have_val = false;
    for (size_t i = 0; i < rounds.size(); ++i) {
      if (!rounds[i].val) continue;
      if (!have_val || rounds[i].val->BetterThan(*rounds[best].val)) best = i;
      have_val = true;
    }
    report_.best_round = rounds[best].round;
    report_.best_test = rounds[best].test;
    for (const auto& r : rounds) {
      report_.uplink_bytes += r.uplink_bytes;
      report_.downlink_bytes += r.downlink_bytes;
    }
    if (HasGlobalModel()) report_.final_global = global_.params();
    if (cfg_.dp) {
      DpSummary dp;
      bool bounded = true;
      double eps_max = 0.0;
      for (size_t k = 0; k < clients_.size(); ++k) {
        const DpMechanism& m = *clients_[k].dp;
        ClientDpRecord rec{static_cast<int>(k), m.d_max(), m.sigma(), m.sensitivity(),
                           m.releases(), m.EpsilonAchieved()};
        if (rec.epsilon) {
          eps_max = std::max(eps_max, *rec.epsilon);
        } else if (rec.releases > 0) {
          bounded = false;
        }
        dp.clients.push_back(rec);
      }
      if (bounded) dp.epsilon_max = eps_max;
      report_.dp = std::move(dp);
    }
  }

  const ExperimentConfig& cfg_;
  const FederatedData& data_;
  const RunOptions& options_;
  RepeatReport& report_;
  const uint64_t seed_;
  SgcModel global_;
  std::vector<double> control_;  // Scaffold c
  PrototypeMap prototypes_;
  std::vector<ClientState> clients_;
  MessagePool pool_;
};

}  // namespace

SourceData LoadData(const ExperimentConfig& cfg) {
  SourceData out;
  if (cfg.dataset.paths.empty()) throw Error(ErrorCode::kConfig, "dataset.paths is empty");
  if (cfg.scenario == Scenario::kSubgraphFl) {
    if (cfg.dataset.paths.size() != 1) {
      throw Error(ErrorCode::kConfig, "subgraph_fl reads exactly one dataset directory");
    }
    out.graph = LoadSubgraphDataset(cfg.dataset.paths.front());
  } else {
    for (const auto& p : cfg.dataset.paths) out.collections.push_back(LoadGraphCollection(p));
  }
  return out;
}

FederatedData PrepareFederatedData(const ExperimentConfig& cfg, const SourceData& source) {
  if (cfg.scenario == Scenario::kSubgraphFl) {
    if (!source.graph) throw Error(ErrorCode::kConfig, "subgraph_fl needs a graph");
    return PrepareSubgraph(cfg, *source.graph);
  }
  return PrepareGraphFl(cfg, source.collections);
}

RunReport RunExperiment(const ExperimentConfig& cfg, const FederatedData& data,
                        const RunOptions& options) {
  cfg.Validate();
  if (static_cast<int>(data.clients.size()) != cfg.num_clients()) {
    throw Error(ErrorCode::kConfig, "data has " + std::to_string(data.clients.size()) +
                                        " clients, config expects " +
                                        std::to_string(cfg.num_clients()));
  }
  if (cfg.algorithm == Algorithm::kFedProto && data.regression) {
    throw Error(ErrorCode::kConfig, "fedproto needs class labels");
  }
  RunReport report;
  for (int r = 0; r < cfg.repeats; ++r) {
    RepeatReport rep;
    try {
      RepeatRunner(cfg, data, options, r, rep).Run();
    } catch (const Error& e) {
      spdlog::error("repeat {} aborted: {}", r, e.what());
      report.aborted = AbortInfo{e.code(), e.what(), r, std::move(rep.rounds)};
      break;
    }
    spdlog::info("repeat {}: best round {}, test {:.4f}", r, rep.best_round,
                 rep.best_test.Primary());
    report.repeats.push_back(std::move(rep));
  }
  if (!report.repeats.empty()) {
    RunSummary s;
    s.metric = data.regression ? "mse" : "accuracy";
    s.completed = static_cast<int>(report.repeats.size());
    for (const auto& r : report.repeats) s.mean += r.best_test.Primary();
    s.mean /= s.completed;
    for (const auto& r : report.repeats) {
      const double d = r.best_test.Primary() - s.mean;
      s.std += d * d;
    }
    s.std = std::sqrt(s.std / s.completed);
    report.summary = s;
  }
  return report;
}

}  // namespace fgl
