#pragma once

#include <span>
#include <vector>

#include "fgl/common/matrix.h"
#include "fgl/learn/dataset.h"
#include "fgl/learn/model.h"

namespace fgl {

struct ClassificationMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro
};

// Argmax predictions of `logits` (one row per label). Macro averages run over
// classes that occur in the labels or the predictions.
ClassificationMetrics EvaluateClassification(const Matrix& logits, std::span<const int> labels);

struct RegressionMetrics {
  double mse = 0.0;
  double rmse = 0.0;
};

RegressionMetrics EvaluateRegression(std::span<const double> preds,
                                     std::span<const double> targets);

// Either metric family, so per-client results can be pooled uniformly.
struct Metrics {
  bool regression = false;
  ClassificationMetrics cls;
  RegressionMetrics reg;

  // Accuracy, or MSE for regression.
  double Primary() const { return regression ? reg.mse : cls.accuracy; }
  bool BetterThan(const Metrics& other) const {
    return regression ? Primary() < other.Primary() : Primary() > other.Primary();
  }
};

// Throws kEvaluation when `rows` is empty.
Metrics Evaluate(const SgcModel& model, const Dataset& data, std::span<const int> rows);

// Field-wise weighted mean; entries with weight 0 are ignored. Throws
// kEvaluation when the total weight is 0.
Metrics WeightedMean(const std::vector<Metrics>& metrics, const std::vector<double>& weights);

}  // namespace fgl
