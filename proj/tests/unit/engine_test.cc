#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fgl/common/error.h"
#include "fgl/common/rng.h"
#include "fgl/engine/aggregate.h"
#include "fgl/engine/config.h"
#include "fgl/engine/experiment.h"
#include "fgl/engine/message.h"
#include "fgl/learn/optimizer.h"
#include "fgl/learn/train.h"
#include "unit/engine_fixtures.h"

namespace fgl {
namespace {

using testing::EngineConfig;
using testing::EngineData;
using testing::EngineGraph;
using testing::GlobalTrace;

Message ParamsMessage(std::vector<double> p, int64_t n) {
  Message m;
  m.params = std::move(p);
  m.num_samples = n;
  return m;
}

double MaxAbsDiff(const std::vector<double>& a, const std::vector<double>& b) {
  EXPECT_EQ(a.size(), b.size());
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

TEST(SampleClients, CeilingRuleAndDeterminism) {
  EXPECT_EQ(SampleClients(5, 1.0, 3, 9), (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_EQ(SampleClients(10, 0.1, 1, 9).size(), 1u);
  EXPECT_EQ(SampleClients(10, 0.25, 1, 9).size(), 3u);
  for (int round = 1; round < 20; ++round) {
    auto s = SampleClients(10, 0.5, round, 4);
    EXPECT_EQ(s, SampleClients(10, 0.5, round, 4));
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<int>(s.begin(), s.end()).size(), 5u);
  }
  EXPECT_NE(SampleClients(20, 0.2, 1, 4), SampleClients(20, 0.2, 2, 4));
}

TEST(FedAvgAggregate, Examples) {
  auto avg = FedAvgAggregate({ParamsMessage({1, 1}, 1), ParamsMessage({3, 3}, 3)});
  ASSERT_TRUE(avg);
  EXPECT_DOUBLE_EQ((*avg)[0], 2.5);
  EXPECT_DOUBLE_EQ((*avg)[1], 2.5);
  EXPECT_EQ(*FedAvgAggregate({ParamsMessage({0.3, -7}, 5)}),
            (std::vector<double>{0.3, -7}));
  auto equal = FedAvgAggregate(
      {ParamsMessage({0}, 2), ParamsMessage({3}, 2), ParamsMessage({6}, 2)});
  EXPECT_DOUBLE_EQ((*equal)[0], 3.0);
  EXPECT_DOUBLE_EQ((*FedAvgAggregate({ParamsMessage({1}, 1), ParamsMessage({3}, 3)}, true))[0],
                   2.0);
}

TEST(FedAvgAggregate, ZeroSampleClientsExcluded) {
  auto avg = FedAvgAggregate({ParamsMessage({1}, 2), ParamsMessage({100}, 0)});
  EXPECT_DOUBLE_EQ((*avg)[0], 1.0);
  EXPECT_FALSE(FedAvgAggregate({ParamsMessage({1}, 0), ParamsMessage({2}, 0)}));
  EXPECT_FALSE(FedAvgAggregate({}));
}

TEST(Scaffold, ScalarHandTrace) {
  // theta_g = 0, constant gradient 1, one plain SGD step at lr 0.1.
  std::vector<double> theta{0.0};
  OptimizerState opt;
  opt.kind = OptimizerKind::kSgd;
  OptimizerStep(theta, std::vector<double>{1.0}, opt, 0.1);
  EXPECT_DOUBLE_EQ(theta[0], -0.1);
  std::vector<double> ci{0.0};
  auto d = ScaffoldClientUpdate({0.0}, theta, {0.0}, ci, 1, 0.1, false);
  EXPECT_NEAR(ci[0], 1.0, 1e-15);
  EXPECT_NEAR(d.control_delta[0], 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(d.params_delta[0], -0.1);

  std::vector<double> pinned{0.0};
  auto p = ScaffoldClientUpdate({0.0}, theta, {0.0}, pinned, 1, 0.1, true);
  EXPECT_EQ(pinned[0], 0.0);
  EXPECT_EQ(p.control_delta[0], 0.0);
}

TEST(Scaffold, ServerAggregateExamples) {
  Message a;
  a.params_delta = std::vector<double>{0.0, 0.0};
  a.control_delta = std::vector<double>{1.0, 1.0};
  a.num_samples = 4;
  std::vector<double> theta{1.0, 2.0}, c{0.0, 0.0};
  ScaffoldAggregate({a}, 2, 1.0, theta, c);
  EXPECT_EQ(theta, (std::vector<double>{1.0, 2.0}));
  EXPECT_DOUBLE_EQ(c[0], 0.5);

  Message b;
  b.params_delta = std::vector<double>{-1.0, 0.5};
  b.control_delta = std::vector<double>{0.0, 0.0};
  b.num_samples = 3;
  ScaffoldAggregate({b}, 2, 1.0, theta, c);
  EXPECT_EQ(theta, (std::vector<double>{0.0, 2.5}));

  std::vector<double> before = theta;
  ScaffoldAggregate({}, 2, 1.0, theta, c);
  EXPECT_EQ(theta, before);
}

TEST(FedProtoAggregate, Examples) {
  Message a, b;
  a.prototypes = PrototypeMap{{0, {{0, 0}, 1}}};
  b.prototypes = PrototypeMap{{0, {{2, 2}, 3}}, {2, {{5, 1}, 4}}};
  PrototypeMap g = FedProtoAggregate({a, b});
  EXPECT_EQ(g.at(0).center, (std::vector<double>{1.5, 1.5}));
  EXPECT_EQ(g.at(0).count, 4);
  EXPECT_EQ(g.at(2).center, (std::vector<double>{5, 1}));
  EXPECT_FALSE(g.count(1));
  EXPECT_EQ(FedProtoAggregate({b}), *b.prototypes);
}

TEST(Message, RoundTripAndSize) {
  Message m;
  m.params = std::vector<double>(10, 0.25);
  EXPECT_EQ(SerializeMessage(m).size(), 4u + 4 + 6 + 8 + 80);
  m.num_samples = 17;
  m.control_delta = std::vector<double>{1e300, -0.0};
  m.prototypes = PrototypeMap{{3, {{1.5, 2.5}, 9}}};
  const std::string bytes = SerializeMessage(m);
  EXPECT_EQ(DeserializeMessage(bytes), m);
  EXPECT_EQ(SerializeMessage(Message{}).size(), 4u);
  EXPECT_EQ(bytes[0], 4);  // little-endian field count
}

TEST(Message, MalformedInputIsFormatError) {
  Message m;
  m.params = std::vector<double>{1, 2, 3};
  const std::string bytes = SerializeMessage(m);
  for (size_t cut : {size_t{0}, size_t{3}, size_t{10}, bytes.size() - 1}) {
    try {
      DeserializeMessage(bytes.substr(0, cut));
      FAIL() << "cut " << cut;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kFormat);
    }
  }
  EXPECT_THROW(DeserializeMessage(bytes + "x"), Error);
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kParse;
}

TEST(MessagePool, AccessRules) {
  MessagePool pool;
  pool.BeginRound(1, {0, 2});
  Message m = ParamsMessage({1, 2}, 3);
  EXPECT_EQ(CodeOf([&] { pool.Write(0, m); }), ErrorCode::kContractViolation);
  pool.Write(kServerActor, m);
  EXPECT_EQ(CodeOf([&] { pool.Write(1, m); }), ErrorCode::kContractViolation);
  pool.Write(0, m);
  EXPECT_EQ(CodeOf([&] { pool.Write(0, m); }), ErrorCode::kContractViolation);
  EXPECT_EQ(CodeOf([&] { pool.Read(2, 0); }), ErrorCode::kContractViolation);
  EXPECT_EQ(pool.Read(2, kServerActor), m);
  EXPECT_EQ(pool.Read(kServerActor, 0), m);
  EXPECT_EQ(CodeOf([&] { pool.Read(kServerActor, 2); }), ErrorCode::kContractViolation);
  try {
    pool.Read(2, 0);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("round 1, actor client_2"), std::string::npos);
  }
  const auto size = static_cast<int64_t>(SerializeMessage(m).size());
  EXPECT_EQ(pool.UplinkBytes(), size);
  EXPECT_EQ(pool.DownlinkBytes(), 2 * size);
  pool.BeginRound(2, {1});
  EXPECT_FALSE(pool.Has(kServerActor));
  EXPECT_FALSE(pool.Has(0));
  EXPECT_EQ(pool.UplinkBytes(), 0);
  EXPECT_EQ(pool.DownlinkBytes(), 0);
}

TEST(Config, DefaultsAndValidation) {
  auto sub = ExperimentConfig::Defaults(Scenario::kSubgraphFl);
  EXPECT_EQ(sub.train.lr, 1e-2);
  EXPECT_EQ(sub.train.local_epochs, 3);
  EXPECT_EQ(sub.rounds, 100);
  EXPECT_EQ(sub.repeats, 3);
  EXPECT_EQ(sub.train.weight_decay, 5e-4);
  EXPECT_EQ(sub.eval_mode, EvalMode::kLocalLocal);
  auto graph = ExperimentConfig::Defaults(Scenario::kGraphFl);
  EXPECT_EQ(graph.train.lr, 1e-3);
  EXPECT_EQ(graph.train.local_epochs, 1);
  EXPECT_EQ(graph.train.batch_size, 128);
  EXPECT_EQ(graph.partition.alpha, 1.0);

  auto cfg = EngineConfig(Algorithm::kFedProto);
  cfg.eval_mode = EvalMode::kGlobalLocal;
  EXPECT_EQ(CodeOf([&] { cfg.Validate(); }), ErrorCode::kConfig);
  cfg.eval_mode = EvalMode::kLocalGlobal;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.client_fraction = 0.0;
  EXPECT_EQ(CodeOf([&] { cfg.Validate(); }), ErrorCode::kConfig);
  cfg = EngineConfig(Algorithm::kFedAvg);
  cfg.rounds = -1;
  EXPECT_EQ(CodeOf([&] { cfg.Validate(); }), ErrorCode::kConfig);
  for (auto a : {Algorithm::kFedAvg, Algorithm::kFedProx, Algorithm::kScaffold,
                 Algorithm::kFedProto, Algorithm::kLocal}) {
    EXPECT_EQ(ParseAlgorithm(AlgorithmName(a)), a);
  }
  EXPECT_EQ(CodeOf([] { ParseEvalMode("local"); }), ErrorCode::kConfig);
}

class EngineRun : public ::testing::Test {
 protected:
  Graph graph_ = EngineGraph();
};

TEST_F(EngineRun, ZeroRoundsReportsInitialEvaluation) {
  auto cfg = EngineConfig(Algorithm::kFedAvg, 4, 0);
  auto data = EngineData(cfg, graph_);
  RunReport r = RunExperiment(cfg, data);
  ASSERT_EQ(r.repeats.size(), 1u);
  ASSERT_EQ(r.repeats[0].rounds.size(), 1u);
  EXPECT_EQ(r.repeats[0].rounds[0].round, 0);
  EXPECT_EQ(r.repeats[0].best_round, 0);
  EXPECT_EQ(r.repeats[0].uplink_bytes, 0);
}

TEST_F(EngineRun, FedProxWithZeroMuMatchesFedAvg) {
  auto avg_cfg = EngineConfig(Algorithm::kFedAvg);
  auto prox_cfg = EngineConfig(Algorithm::kFedProx);
  prox_cfg.train.prox_mu = 0.0;
  auto data = EngineData(avg_cfg, graph_);
  auto a = GlobalTrace(avg_cfg, data);
  auto b = GlobalTrace(prox_cfg, data);
  ASSERT_EQ(a.size(), 5u);
  for (size_t t = 0; t < a.size(); ++t) EXPECT_LE(MaxAbsDiff(a[t], b[t]), 1e-12);
}

TEST_F(EngineRun, FedProxStrongMuPinsNearGlobal) {
  auto cfg = EngineConfig(Algorithm::kFedProx, 4, 1);
  cfg.train.optimizer = OptimizerKind::kSgd;
  cfg.train.lr = 0.01;
  cfg.train.local_epochs = 20;
  auto data = EngineData(cfg, graph_);
  auto drift = [&](double mu) {
    cfg.train.prox_mu = mu;
    auto initial = SgcModel::Glorot(data.global.feature_dim(), data.global.num_outputs(),
                                    DeriveSeed(RepeatSeed(cfg.seed, 0), "init"));
    return MaxAbsDiff(GlobalTrace(cfg, data)[0], initial.params());
  };
  EXPECT_LT(drift(50.0), drift(0.0));
}

TEST_F(EngineRun, PinnedScaffoldMatchesEqualWeightFedAvg) {
  auto avg_cfg = EngineConfig(Algorithm::kFedAvg);
  avg_cfg.train.optimizer = OptimizerKind::kSgd;
  avg_cfg.aggregation.equal_weights = true;
  auto sc_cfg = EngineConfig(Algorithm::kScaffold);
  sc_cfg.train.optimizer = OptimizerKind::kSgd;
  sc_cfg.aggregation.pin_control_variates = true;
  auto data = EngineData(avg_cfg, graph_);
  auto a = GlobalTrace(avg_cfg, data);
  auto b = GlobalTrace(sc_cfg, data);
  ASSERT_EQ(a.size(), b.size());
  for (size_t t = 0; t < a.size(); ++t) EXPECT_LE(MaxAbsDiff(a[t], b[t]), 1e-12) << t;

  sc_cfg.aggregation.pin_control_variates = false;
  auto c = GlobalTrace(sc_cfg, data);
  EXPECT_GT(MaxAbsDiff(a.back(), c.back()), 1e-9);
}

TEST_F(EngineRun, SingleClientFedAvgMatchesCentralizedTraining) {
  auto cfg = EngineConfig(Algorithm::kFedAvg, 1, 6);
  auto data = EngineData(cfg, graph_);
  ASSERT_EQ(data.clients[0].x, data.global.x);
  auto trace = GlobalTrace(cfg, data);

  const uint64_t rs = RepeatSeed(cfg.seed, 0);
  SgcModel model = SgcModel::Glorot(data.global.feature_dim(), data.global.num_outputs(),
                                    DeriveSeed(rs, "init"));
  OptimizerState opt;
  for (int t = 1; t <= cfg.rounds; ++t) {
    LocalTrain(model, opt, data.global, cfg.train, {}, DeriveSeed(rs, "train", 0, t));
    EXPECT_EQ(model.params(), trace[t - 1]) << "round " << t;
  }
}

TEST_F(EngineRun, SingleClientModesCoincide) {
  std::vector<double> accuracy;
  for (auto mode : {EvalMode::kGlobalGlobal, EvalMode::kGlobalLocal, EvalMode::kLocalGlobal,
                    EvalMode::kLocalLocal}) {
    auto cfg = EngineConfig(Algorithm::kFedAvg, 1, 3);
    cfg.eval_mode = mode;
    auto r = RunExperiment(cfg, EngineData(cfg, graph_));
    for (const auto& rec : r.repeats[0].rounds) accuracy.push_back(rec.test.Primary());
  }
  for (size_t i = 4; i < accuracy.size(); ++i) EXPECT_EQ(accuracy[i], accuracy[i % 4]);
}

bool SameRecords(const RunReport& a, const RunReport& b) {
  if (a.repeats.size() != b.repeats.size()) return false;
  for (size_t r = 0; r < a.repeats.size(); ++r) {
    const auto& x = a.repeats[r];
    const auto& y = b.repeats[r];
    if (x.rounds.size() != y.rounds.size() || x.best_round != y.best_round ||
        x.final_global != y.final_global || x.uplink_bytes != y.uplink_bytes) {
      return false;
    }
    for (size_t t = 0; t < x.rounds.size(); ++t) {
      const auto& p = x.rounds[t];
      const auto& q = y.rounds[t];
      if (p.sampled != q.sampled || p.test.cls.accuracy != q.test.cls.accuracy ||
          p.test.cls.f1 != q.test.cls.f1 || p.val->cls.accuracy != q.val->cls.accuracy) {
        return false;
      }
    }
  }
  return true;
}

TEST_F(EngineRun, DeterministicAcrossWorkerCounts) {
  for (auto alg : {Algorithm::kFedAvg, Algorithm::kScaffold, Algorithm::kFedProto,
                   Algorithm::kLocal}) {
    auto cfg = EngineConfig(alg, 6, 4);
    cfg.partition.strategy = PartitionStrategy::kMetisCommunity;
    cfg.client_fraction = 0.5;
    cfg.repeats = 2;
    auto data = EngineData(cfg, graph_);
    RunReport one, many;
    RunOptions o1, o8;
    o8.workers = 8;
    one = RunExperiment(cfg, data, o1);
    many = RunExperiment(cfg, data, o8);
    EXPECT_TRUE(SameRecords(one, many)) << AlgorithmName(alg);
    if (alg == Algorithm::kFedAvg || alg == Algorithm::kScaffold) {
      EXPECT_NE(one.repeats[0].final_global, one.repeats[1].final_global);
    }
  }
}

TEST_F(EngineRun, SummaryIsMeanAndPopulationStd) {
  auto cfg = EngineConfig(Algorithm::kFedAvg, 4, 3);
  cfg.repeats = 3;
  RunReport r = RunExperiment(cfg, EngineData(cfg, graph_));
  ASSERT_TRUE(r.summary);
  double mean = 0.0, var = 0.0;
  for (const auto& rep : r.repeats) mean += rep.best_test.cls.accuracy / 3;
  for (const auto& rep : r.repeats) var += std::pow(rep.best_test.cls.accuracy - mean, 2) / 3;
  EXPECT_NEAR(r.summary->mean, mean, 1e-15);
  EXPECT_NEAR(r.summary->std, std::sqrt(var), 1e-15);
  EXPECT_EQ(r.summary->metric, "accuracy");
  for (const auto& rep : r.repeats) {
    double best_val = -1;
    for (const auto& rec : rep.rounds) best_val = std::max(best_val, rec.val->cls.accuracy);
    EXPECT_EQ(rep.rounds[rep.best_round].val->cls.accuracy, best_val);
  }
}

TEST_F(EngineRun, ScaffoldWithoutLocalStepsAbortsWithActor) {
  auto cfg = EngineConfig(Algorithm::kScaffold, 4, 3);
  cfg.train.local_epochs = 0;
  RunReport r = RunExperiment(cfg, EngineData(cfg, graph_));
  ASSERT_TRUE(r.aborted);
  EXPECT_EQ(r.aborted->code, ErrorCode::kContractViolation);
  EXPECT_NE(r.aborted->message.find("round 1, actor client_0"), std::string::npos)
      << r.aborted->message;
  EXPECT_EQ(r.aborted->partial_rounds.size(), 1u);
  EXPECT_TRUE(r.repeats.empty());
  EXPECT_FALSE(r.summary);
}

TEST_F(EngineRun, CommunicationBytes) {
  auto avg_cfg = EngineConfig(Algorithm::kFedAvg, 4, 2);
  auto proto_cfg = EngineConfig(Algorithm::kFedProto, 4, 2);
  auto data = EngineData(avg_cfg, graph_);
  RunReport avg = RunExperiment(avg_cfg, data);
  RunReport proto = RunExperiment(proto_cfg, data);
  const int64_t c = data.global.num_outputs(), f = data.global.feature_dim();
  ASSERT_LT(c, f);
  EXPECT_LT(proto.repeats[0].uplink_bytes, avg.repeats[0].uplink_bytes);
  // FedAvg uplink per client: field count, params key and vector, samples key and count.
  const int64_t per_client = 4 + (4 + 6 + 8 + 8 * (f + 1) * c) + (4 + 11 + 8);
  EXPECT_EQ(avg.repeats[0].rounds[1].uplink_bytes, 4 * per_client);
  EXPECT_EQ(avg.repeats[0].rounds[1].downlink_bytes, 4 * (4 + 4 + 6 + 8 + 8 * (f + 1) * c));
  RunReport local = RunExperiment(EngineConfig(Algorithm::kLocal, 4, 2), data);
  EXPECT_EQ(local.repeats[0].uplink_bytes + local.repeats[0].downlink_bytes, 0);
}

TEST_F(EngineRun, DpRunStaysWithinBudget) {
  auto cfg = EngineConfig(Algorithm::kFedAvg, 4, 3);
  cfg.train.k = 1;
  cfg.dp = DpConfig{};
  cfg.dp->epsilon = 4.0;
  RunReport r = RunExperiment(cfg, EngineData(cfg, graph_));
  ASSERT_FALSE(r.aborted) << r.aborted->message;
  ASSERT_TRUE(r.repeats[0].dp);
  ASSERT_TRUE(r.repeats[0].dp->epsilon_max);
  EXPECT_LE(*r.repeats[0].dp->epsilon_max, 4.0 + 1e-9);
  for (const auto& c : r.repeats[0].dp->clients) EXPECT_EQ(c.releases, 3 * 2);

  cfg.train.k = 2;
  RunReport bad = RunExperiment(cfg, EngineData(cfg, graph_));
  ASSERT_TRUE(bad.aborted);
  EXPECT_EQ(bad.aborted->code, ErrorCode::kPrivacyContract);
}

TEST(GraphFlRun, DirichletSplitTrains) {
  GraphCollection coll;
  for (int i = 0; i < 120; ++i) {
    const int label = i % 3;
    Graph g = GenerateSbm({4 + label, 5}, 0.8, 0.1, 3, 100 + i);
    for (int v = 0; v < g.num_nodes; ++v) g.features(v, label) += 1.0;
    coll.graphs.push_back(std::move(g));
    coll.graph_labels.push_back(label);
  }
  coll.num_classes = 3;
  auto cfg = ExperimentConfig::Defaults(Scenario::kGraphFl);
  cfg.dataset.paths = {"<memory>"};
  cfg.partition.num_clients = 3;
  cfg.rounds = 5;
  cfg.repeats = 1;
  cfg.train.batch_size = 16;
  cfg.train.lr = 0.05;
  SourceData src;
  src.collections.push_back(coll);
  FederatedData data = PrepareFederatedData(cfg, src);
  EXPECT_EQ(data.stats.label_histograms.size(), 3u);
  size_t total = 0;
  for (const auto& d : data.clients) total += d.num_samples();
  EXPECT_EQ(total, 120u);
  EXPECT_EQ(data.global.train.size() + data.global.val.size() + data.global.test.size(), 120u);
  RunReport r = RunExperiment(cfg, data);
  ASSERT_FALSE(r.aborted);
  EXPECT_EQ(r.repeats[0].rounds.size(), 6u);

  cfg.robustness.label_noise_rate = 0.2;
  EXPECT_THROW(cfg.Validate(), Error);
}

}  // namespace
}  // namespace fgl
