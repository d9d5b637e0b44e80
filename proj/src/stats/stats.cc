#include "fgl/stats/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fgl/common/error.h"
#include "fgl/graph/algorithms.h"

namespace fgl {
namespace {

void Normalize(std::vector<double>& h) {
  double total = 0.0;
  for (double x : h) total += x;
  if (total == 0.0) return;
  for (double& x : h) x /= total;
}

double Kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

}  // namespace

std::vector<std::vector<double>> LabelDistribution(std::span<const Graph> clients,
                                                   int num_classes) {
  std::vector<std::vector<int>> labels;
  labels.reserve(clients.size());
  for (const auto& g : clients) labels.push_back(g.labels);
  return LabelDistribution(labels, num_classes);
}

std::vector<std::vector<double>> LabelDistribution(
    const std::vector<std::vector<int>>& sample_labels, int num_classes) {
  std::vector<std::vector<double>> out;
  for (const auto& labels : sample_labels) {
    std::vector<double> h(num_classes, 0.0);
    for (int y : labels) {
      if (y == kUnlabeled) continue;
      if (y < 0 || y >= num_classes) {
        throw Error(ErrorCode::kBounds, "label " + std::to_string(y) +
                                            " outside [0, " +
                                            std::to_string(num_classes) + ")");
      }
      h[y] += 1.0;
    }
    Normalize(h);
    out.push_back(std::move(h));
  }
  return out;
}

Matrix FeatureKlMatrix(std::span<const Graph> clients, int bins) {
  if (bins < 2) throw Error(ErrorCode::kConfig, "KL bins must be >= 2");
  const size_t k = clients.size();
  Matrix kl(k, k, 0.0);
  if (k == 0) return kl;
  const int dim = clients[0].feature_dim();
  for (const auto& g : clients) {
    if (g.feature_dim() != dim) {
      throw Error(ErrorCode::kShape, "clients disagree on feature_dim");
    }
  }
  if (dim == 0) return kl;

  std::vector<std::vector<double>> hist(k, std::vector<double>(bins));
  for (int d = 0; d < dim; ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& g : clients) {
      for (int v = 0; v < g.num_nodes; ++v) {
        lo = std::min(lo, g.features(v, d));
        hi = std::max(hi, g.features(v, d));
      }
    }
    if (!(hi > lo)) continue;
    for (size_t a = 0; a < k; ++a) {
      std::fill(hist[a].begin(), hist[a].end(), 1.0);  // add-one smoothing
      for (int v = 0; v < clients[a].num_nodes; ++v) {
        auto b = static_cast<int>((clients[a].features(v, d) - lo) / (hi - lo) * bins);
        hist[a][std::clamp(b, 0, bins - 1)] += 1.0;
      }
      Normalize(hist[a]);
    }
    for (size_t a = 0; a < k; ++a) {
      for (size_t b = a + 1; b < k; ++b) {
        const double s = 0.5 * (Kl(hist[a], hist[b]) + Kl(hist[b], hist[a]));
        kl(a, b) += s;
      }
    }
  }
  for (size_t a = 0; a < k; ++a) {
    for (size_t b = a + 1; b < k; ++b) {
      kl(a, b) = std::max(0.0, kl(a, b) / dim);
      kl(b, a) = kl(a, b);
    }
  }
  return kl;
}

std::optional<double> EdgeHomophily(const Graph& g) {
  int64_t counted = 0;
  int64_t same = 0;
  for (auto [u, v] : g.EdgeList()) {
    if (g.labels[u] == kUnlabeled || g.labels[v] == kUnlabeled) continue;
    ++counted;
    same += g.labels[u] == g.labels[v];
  }
  if (counted == 0) return std::nullopt;
  return static_cast<double>(same) / static_cast<double>(counted);
}

std::optional<double> NodeHomophily(const Graph& g) {
  double sum = 0.0;
  int qualifying = 0;
  for (int v = 0; v < g.num_nodes; ++v) {
    if (g.labels[v] == kUnlabeled) continue;
    int labeled = 0;
    int same = 0;
    for (int u : g.Neighbors(v)) {
      if (g.labels[u] == kUnlabeled) continue;
      ++labeled;
      same += g.labels[u] == g.labels[v];
    }
    if (labeled == 0) continue;
    sum += static_cast<double>(same) / labeled;
    ++qualifying;
  }
  if (qualifying == 0) return std::nullopt;
  return sum / qualifying;
}

TopologyRecord TopologyReport(const Graph& g) {
  TopologyRecord r;
  const int n = g.num_nodes;
  if (n == 0) return r;
  double sum = 0.0;
  for (int v = 0; v < n; ++v) {
    sum += g.degree(v);
    r.degree_max = std::max(r.degree_max, g.degree(v));
  }
  r.degree_mean = sum / n;
  double sq = 0.0;
  for (int v = 0; v < n; ++v) sq += (g.degree(v) - r.degree_mean) * (g.degree(v) - r.degree_mean);
  r.degree_std = std::sqrt(sq / n);
  r.centrality_mean = n > 1 ? r.degree_mean / (n - 1) : 0.0;
  r.largest_component_fraction =
      static_cast<double>(ConnectedComponents(g).largest()) / static_cast<double>(n);
  return r;
}

HeterogeneityReport BuildHeterogeneityReport(
    std::span<const Graph> clients, int num_classes, int64_t dropped_edges,
    const std::vector<std::vector<int>>* sample_labels, int bins) {
  HeterogeneityReport report;
  report.label_histograms = sample_labels != nullptr
                                ? LabelDistribution(*sample_labels, num_classes)
                                : LabelDistribution(clients, num_classes);
  report.feature_kl = FeatureKlMatrix(clients, bins);
  for (const auto& g : clients) {
    report.edge_homophily.push_back(EdgeHomophily(g));
    report.node_homophily.push_back(NodeHomophily(g));
    report.topology.push_back(TopologyReport(g));
  }
  report.dropped_edges = dropped_edges;
  return report;
}

Graph DisjointUnion(std::span<const Graph> graphs) {
  Graph out;
  const int dim = graphs.empty() ? 0 : graphs[0].feature_dim();
  std::vector<Edge> edges;
  for (const auto& g : graphs) out.num_nodes += g.num_nodes;
  out.features = Matrix(out.num_nodes, dim);
  int base = 0;
  for (const auto& g : graphs) {
    for (auto [u, v] : g.EdgeList()) edges.emplace_back(base + u, base + v);
    for (int v = 0; v < g.num_nodes; ++v) {
      std::copy(g.features.row(v).begin(), g.features.row(v).end(),
                out.features.row(base + v).begin());
      out.labels.push_back(g.labels.empty() ? kUnlabeled : g.labels[v]);
    }
    out.num_classes = std::max(out.num_classes, g.num_classes);
    base += g.num_nodes;
  }
  out.SetEdges(edges);
  out.EnsureMasks();
  return out;
}

}  // namespace fgl
