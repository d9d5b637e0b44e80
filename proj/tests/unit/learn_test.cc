#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fgl/common/error.h"
#include "fgl/graph/algorithms.h"
#include "fgl/learn/dataset.h"
#include "fgl/learn/metrics.h"
#include "fgl/learn/model.h"
#include "fgl/learn/optimizer.h"
#include "fgl/learn/train.h"
#include "unit/fixtures.h"
#include "unit/gradient_oracle.h"

namespace fgl {
namespace {

Dataset TinyDataset(const std::vector<std::vector<double>>& x, const std::vector<int>& labels,
                    int classes) {
  Dataset d;
  d.x = Matrix(x.size(), x.empty() ? 0 : x[0].size());
  for (size_t i = 0; i < x.size(); ++i) {
    for (size_t j = 0; j < x[i].size(); ++j) d.x(i, j) = x[i][j];
  }
  d.labels = labels;
  d.num_classes = classes;
  for (size_t i = 0; i < x.size(); ++i) d.train.push_back(static_cast<int>(i));
  return d;
}

TEST(SgcModel, ForwardExamples) {
  SgcModel zero(3, 2);
  Matrix x(2, 3, 1.5);
  std::vector<int> rows{0, 1};
  EXPECT_EQ(zero.Forward(x, rows), Matrix(2, 2, 0.0));

  SgcModel m(1, 1);
  m.w(0, 0) = 2.0;
  m.b(0) = 1.0;
  Matrix x1(1, 1, 3.0);
  std::vector<int> row{0};
  EXPECT_EQ(m.Forward(x1, row)(0, 0), 7.0);
  EXPECT_THROW(m.Forward(Matrix(1, 2), row), Error);
}

TEST(SgcModel, ParameterNames) {
  SgcModel m(2, 3);
  EXPECT_EQ(m.ParameterName(0), "W[0,0]");
  EXPECT_EQ(m.ParameterName(5), "W[1,2]");
  EXPECT_EQ(m.ParameterName(7), "b[1]");
}

TEST(Loss, ZeroLogitsTwoClasses) {
  SgcModel m(1, 2);
  auto d = TinyDataset({{1.0}}, {0}, 2);
  std::vector<double> grad;
  const double loss = LossAndGradient(m, d, d.train, {}, &grad);
  EXPECT_DOUBLE_EQ(loss, std::log(2.0));
  // Gradient w.r.t. the bias equals the gradient w.r.t. the logits here.
  EXPECT_DOUBLE_EQ(grad[2], -0.5);
  EXPECT_DOUBLE_EQ(grad[3], 0.5);
}

TEST(Loss, CrossEntropyAtZeroLogitsIsLogC) {
  for (int c : {2, 3, 7}) {
    SgcModel m(2, c);
    auto d = TinyDataset({{1, 2}, {3, 4}, {5, 6}}, {0, 1, 0}, c);
    EXPECT_NEAR(LossAndGradient(m, d, d.train, {}, nullptr), std::log(c), 1e-15);
  }
}

TEST(Loss, UnlabeledRowIsContractViolation) {
  SgcModel m(1, 2);
  auto d = TinyDataset({{1.0}, {2.0}}, {0, kUnlabeled}, 2);
  try {
    LossAndGradient(m, d, d.train, {}, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContractViolation);
  }
}

TEST(Loss, SwitchedOffRegularizersArePureCrossEntropy) {
  testing::GradientInstance inst = testing::RandomGradientInstance(3, false, false);
  Regularization plain;
  Regularization off;
  off.global_params = &inst.global;
  off.global_prototypes = &inst.protos;
  std::vector<double> a, b;
  EXPECT_EQ(LossAndGradient(inst.model, inst.data, inst.data.train, plain, &a),
            LossAndGradient(inst.model, inst.data, inst.data.train, off, &b));
  EXPECT_EQ(a, b);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
  int worst_instance = -1;
  double worst = 0.0;
  for (int i = 0; i < 150; ++i) {
    auto inst = testing::RandomGradientInstance(static_cast<uint64_t>(i), true, i % 5 == 4);
    const double err = testing::GradientRelativeError(inst);
    if (err > worst) {
      worst = err;
      worst_instance = i;
    }
  }
  EXPECT_LT(worst, 1e-5) << "instance " << worst_instance;
}

TEST(Loss, ProximalGradientScalar) {
  SgcModel m(1, 1);
  m.w(0, 0) = 1.0;
  Dataset d;
  d.x = Matrix(1, 1, 0.0);
  d.targets = {0.0};
  d.labels = {kUnlabeled};
  d.train = {0};
  std::vector<double> global{0.0, 0.0};
  Regularization reg;
  reg.prox_mu = 0.01;
  reg.global_params = &global;
  std::vector<double> grad;
  LossAndGradient(m, d, d.train, reg, &grad);
  EXPECT_DOUBLE_EQ(grad[0], 0.01);
}

TEST(Adam, ZeroGradientLeavesParams) {
  std::vector<double> p{1.0, -2.0};
  std::vector<double> g{0.0, 0.0};
  OptimizerState s;
  AdamStep(p, g, s, 0.1);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0}));
  EXPECT_EQ(s.t, 1);
}

TEST(Adam, FirstStepHandTrace) {
  std::vector<double> p{0.0};
  std::vector<double> g{2.0};
  OptimizerState s;
  AdamStep(p, g, s, 0.1);
  // m_hat = 2, v_hat = 4, update = -0.1 * 2 / (2 + 1e-8).
  EXPECT_NEAR(p[0], -0.0999999995, 1e-15);
}

TEST(Adam, NonFiniteGradientNamesParameter) {
  auto d = TinyDataset({{1.0}}, {0}, 2);
  SgcModel m(1, 2);
  m.w(0, 1) = std::numeric_limits<double>::infinity();
  OptimizerState s;
  TrainConfig cfg;
  cfg.local_epochs = 1;
  try {
    LocalTrain(m, s, d, cfg, {}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
    EXPECT_NE(std::string(e.what()).find("W[0,"), std::string::npos) << e.what();
  }
  std::vector<double> p{0.0};
  std::vector<double> bad{std::nan("")};
  EXPECT_THROW(AdamStep(p, bad, s, 0.1), Error);
}

Graph LabeledFixture() {
  Graph g = GenerateSbm({30, 30, 30}, 0.2, 0.02, 4, 3);
  ApplyMasks(g, GenerateMasks(g.num_nodes, {0.4, 0.3, 0.3}, 3));
  return g;
}

TEST(LocalTrain, ZeroEpochsIsNoop) {
  Graph g = LabeledFixture();
  auto d = BuildNodeDataset(g, 2, NormalizationScheme::kSymmetric);
  SgcModel m = SgcModel::Glorot(d.feature_dim(), d.num_outputs(), 1);
  const auto before = m.params();
  OptimizerState s;
  TrainConfig cfg;
  cfg.local_epochs = 0;
  auto r = LocalTrain(m, s, d, cfg, {}, 5);
  EXPECT_EQ(m.params(), before);
  EXPECT_TRUE(r.loss_trace.empty());
  EXPECT_EQ(r.num_samples, static_cast<int64_t>(d.train.size()));
}

TEST(LocalTrain, DeterministicMiniBatches) {
  Graph g = LabeledFixture();
  auto d = BuildNodeDataset(g, 2, NormalizationScheme::kSymmetric);
  TrainConfig cfg;
  cfg.batch_size = 8;
  auto run = [&]() {
    SgcModel m = SgcModel::Glorot(d.feature_dim(), d.num_outputs(), 1);
    OptimizerState s;
    auto r = LocalTrain(m, s, d, cfg, {}, 77);
    EXPECT_EQ(r.steps, cfg.local_epochs * BatchesPerEpoch(d.train.size(), 8));
    return m.params();
  };
  EXPECT_EQ(run(), run());
}

TEST(LocalTrain, NoTrainingRowsSkipsClient) {
  auto d = TinyDataset({{1.0}}, {0}, 2);
  d.train.clear();
  SgcModel m(1, 2);
  OptimizerState s;
  auto r = LocalTrain(m, s, d, TrainConfig{}, {}, 0);
  EXPECT_EQ(r.num_samples, 0);
  EXPECT_EQ(r.steps, 0);
}

TEST(LocalTrain, FullBatchLossNonIncreasingOnSeparableData) {
  auto d = TinyDataset({{1, 0}, {2, 0}, {0, 1}, {0, 2}}, {0, 0, 1, 1}, 2);
  SgcModel m = SgcModel::Glorot(2, 2, 3);
  OptimizerState s;
  TrainConfig cfg;
  cfg.local_epochs = 10;
  cfg.lr = 0.05;
  cfg.optimizer = OptimizerKind::kSgd;
  auto r = LocalTrain(m, s, d, cfg, {}, 0);
  ASSERT_EQ(r.loss_trace.size(), 10u);
  for (size_t i = 1; i < r.loss_trace.size(); ++i) {
    EXPECT_LE(r.loss_trace[i], r.loss_trace[i - 1]);
  }
}

TEST(Sgc, ZeroStepsIsSoftmaxRegression) {
  Graph g = LabeledFixture();
  auto prop = BuildNodeDataset(g, 0, NormalizationScheme::kSymmetric);
  Dataset raw = prop;
  raw.x = g.features;
  EXPECT_EQ(prop.x, raw.x);
  SgcModel m = SgcModel::Glorot(raw.feature_dim(), raw.num_outputs(), 2);
  std::vector<double> ga, gb;
  EXPECT_EQ(LossAndGradient(m, prop, prop.train, {}, &ga),
            LossAndGradient(m, raw, raw.train, {}, &gb));
  EXPECT_EQ(ga, gb);
  EXPECT_EQ(Evaluate(m, prop, prop.test).cls.accuracy, Evaluate(m, raw, raw.test).cls.accuracy);
}

TEST(GraphDataset, MeanPoolsPropagatedFeatures) {
  Graph a = testing::MakeGraph(2, {{0, 1}});
  Graph b = testing::MakeGraph(1, {});
  std::vector<Graph> graphs{a, b};
  std::vector<int> labels{0, 1};
  auto d = BuildGraphDataset(graphs, labels, {}, 2, 0, NormalizationScheme::kSymmetric,
                             {{0}, {1}, {}});
  EXPECT_EQ(d.x(0, 0), 0.5);  // mean of features 0 and 1
  EXPECT_EQ(d.x(1, 0), 0.0);
  // One symmetric step on a single edge averages both endpoints.
  auto d1 = BuildGraphDataset(graphs, labels, {}, 2, 1, NormalizationScheme::kSymmetric,
                              {{0}, {1}, {}});
  EXPECT_DOUBLE_EQ(d1.x(0, 0), 0.5);
}

TEST(Metrics, Classification) {
  Matrix perfect(2, 2, 0.0);
  perfect(0, 0) = 1;
  perfect(1, 1) = 1;
  std::vector<int> labels{0, 1};
  auto m = EvaluateClassification(perfect, labels);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);

  std::vector<int> flipped{1, 0};
  EXPECT_EQ(EvaluateClassification(perfect, flipped).accuracy, 0.0);

  Matrix mixed(4, 2, 0.0);
  mixed(0, 0) = mixed(1, 1) = mixed(2, 0) = mixed(3, 1) = 1;
  std::vector<int> truth{0, 0, 1, 1};
  auto half = EvaluateClassification(mixed, truth);
  EXPECT_DOUBLE_EQ(half.f1, 0.5);
  EXPECT_DOUBLE_EQ(half.precision, 0.5);
  std::vector<int> none;
  EXPECT_THROW(EvaluateClassification(Matrix(0, 2), none), Error);
}

TEST(Metrics, Regression) {
  std::vector<double> t{1, 2};
  EXPECT_EQ(EvaluateRegression(t, t).mse, 0.0);
  std::vector<double> p{2, 1};
  EXPECT_EQ(EvaluateRegression(p, t).rmse, 1.0);
  std::vector<double> p2{4, 6}, t2{1, 2};
  auto r = EvaluateRegression(p2, t2);
  EXPECT_EQ(r.mse, 12.5);
  EXPECT_EQ(r.rmse, std::sqrt(12.5));
}

TEST(Metrics, WeightedMeanOfClients) {
  Metrics good, bad;
  good.cls.accuracy = 1.0;
  bad.cls.accuracy = 0.0;
  EXPECT_EQ(WeightedMean({good, bad}, {10, 30}).cls.accuracy, 0.25);
  EXPECT_THROW(WeightedMean({good}, {0}), Error);
}

TEST(Prototypes, MeanLogitsPerClass) {
  SgcModel m(2, 2);
  m.w(0, 0) = 1;
  m.w(1, 1) = 1;
  auto d = TinyDataset({{1, 2}, {0, 0}, {2, 2}, {5, 5}}, {0, 0, 0, 1}, 3);
  std::vector<int> first{0};
  auto single = ComputePrototypes(m, d, first);
  EXPECT_EQ(single.at(0).center, (std::vector<double>{1, 2}));
  EXPECT_EQ(single.at(0).count, 1);
  std::vector<int> pair{1, 2};
  EXPECT_EQ(ComputePrototypes(m, d, pair).at(0).center, (std::vector<double>{1, 1}));
  EXPECT_FALSE(ComputePrototypes(m, d, pair).count(1));
  EXPECT_FALSE(ComputePrototypes(m, d, d.train).count(2));
}

}  // namespace
}  // namespace fgl
