#include "fgl/learn/metrics.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "fgl/common/error.h"

namespace fgl {

ClassificationMetrics EvaluateClassification(const Matrix& logits,
                                             std::span<const int> labels) {
  if (labels.empty()) throw Error(ErrorCode::kEvaluation, "no samples to evaluate");
  if (logits.rows() != labels.size()) {
    throw Error(ErrorCode::kShape, "logit rows do not match label count");
  }
  const int c = static_cast<int>(logits.cols());
  std::vector<int64_t> tp(c, 0), fp(c, 0), fn(c, 0);
  std::set<int> present;
  int64_t correct = 0;
  for (size_t r = 0; r < labels.size(); ++r) {
    const auto z = logits.row(r);
    const int pred = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    const int y = labels[r];
    if (y < 0 || y >= c) throw Error(ErrorCode::kEvaluation, "evaluation row without a label");
    present.insert(y);
    present.insert(pred);
    if (pred == y) {
      ++correct;
      ++tp[y];
    } else {
      ++fp[pred];
      ++fn[y];
    }
  }
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
  for (int k : present) {
    const double p = tp[k] + fp[k] > 0 ? static_cast<double>(tp[k]) / (tp[k] + fp[k]) : 0.0;
    const double r = tp[k] + fn[k] > 0 ? static_cast<double>(tp[k]) / (tp[k] + fn[k]) : 0.0;
    m.precision += p;
    m.recall += r;
    m.f1 += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  const auto classes = static_cast<double>(present.size());
  m.precision /= classes;
  m.recall /= classes;
  m.f1 /= classes;
  return m;
}

RegressionMetrics EvaluateRegression(std::span<const double> preds,
                                     std::span<const double> targets) {
  if (preds.empty()) throw Error(ErrorCode::kEvaluation, "no samples to evaluate");
  if (preds.size() != targets.size()) {
    throw Error(ErrorCode::kShape, "prediction count does not match target count");
  }
  double sq = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) sq += (preds[i] - targets[i]) * (preds[i] - targets[i]);
  RegressionMetrics m;
  m.mse = sq / static_cast<double>(preds.size());
  m.rmse = std::sqrt(m.mse);
  return m;
}

Metrics Evaluate(const SgcModel& model, const Dataset& data, std::span<const int> rows) {
  if (rows.empty()) throw Error(ErrorCode::kEvaluation, "empty evaluation mask");
  const Matrix logits = model.Forward(data.x, rows);
  Metrics m;
  m.regression = data.regression();
  if (m.regression) {
    std::vector<double> targets;
    for (int r : rows) targets.push_back(data.targets[r]);
    m.reg = EvaluateRegression(logits.data(), targets);
  } else {
    std::vector<int> labels;
    for (int r : rows) labels.push_back(data.labels[r]);
    m.cls = EvaluateClassification(logits, labels);
  }
  return m;
}

Metrics WeightedMean(const std::vector<Metrics>& metrics, const std::vector<double>& weights) {
  Metrics out;
  int nonzero = 0;
  for (double w : weights) nonzero += w != 0.0;
  if (nonzero == 1) {
    for (size_t i = 0; i < metrics.size(); ++i) {
      if (weights[i] != 0.0) return metrics[i];
    }
  }
  double total = 0.0;
  for (size_t i = 0; i < metrics.size(); ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    out.regression = metrics[i].regression;
    out.cls.accuracy += w * metrics[i].cls.accuracy;
    out.cls.precision += w * metrics[i].cls.precision;
    out.cls.recall += w * metrics[i].cls.recall;
    out.cls.f1 += w * metrics[i].cls.f1;
    out.reg.mse += w * metrics[i].reg.mse;
    out.reg.rmse += w * metrics[i].reg.rmse;
    total += w;
  }
  if (total == 0.0) throw Error(ErrorCode::kEvaluation, "no client has evaluation samples");
  out.cls.accuracy /= total;
  out.cls.precision /= total;
  out.cls.recall /= total;
  out.cls.f1 /= total;
  out.reg.mse /= total;
  out.reg.rmse /= total;
  return out;
}

}  // namespace fgl
