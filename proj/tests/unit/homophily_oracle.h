#pragma once

// Enumeration reference for edge and node homophily over a dense adjacency
// matrix. Shared by the unit and acceptance suites.

#include <functional>
#include <optional>
#include <vector>

namespace fgl::testing {

struct HomophilyValues {
  std::optional<double> edge;
  std::optional<double> node;
};

// Labels below zero mark unlabeled nodes; their edges are ignored.
inline HomophilyValues HomophilyByEnumeration(const std::vector<std::vector<bool>>& adj,
                                              const std::vector<int>& labels) {
  const int n = static_cast<int>(labels.size());
  int counted = 0, same = 0;
  double node_sum = 0.0;
  int qualifying = 0;
  for (int u = 0; u < n; ++u) {
    int nb = 0, nb_same = 0;
    for (int v = 0; v < n; ++v) {
      if (u == v || !adj[u][v] || labels[u] < 0 || labels[v] < 0) continue;
      if (u < v) {
        ++counted;
        same += labels[u] == labels[v];
      }
      ++nb;
      nb_same += labels[u] == labels[v];
    }
    if (nb > 0) {
      node_sum += static_cast<double>(nb_same) / nb;
      ++qualifying;
    }
  }
  HomophilyValues out;
  if (counted > 0) out.edge = static_cast<double>(same) / counted;
  if (qualifying > 0) out.node = node_sum / qualifying;
  return out;
}

// Calls fn(adj, labels) for every simple graph on 1..max_nodes nodes and every
// labeling with values drawn from `label_values` (e.g. {0, 1} or {-1, 0, 1}).
inline void ForEachSmallLabeledGraph(
    int max_nodes, const std::function<std::vector<int>(int n)>& label_values,
    const std::function<void(const std::vector<std::vector<bool>>&, const std::vector<int>&)>&
        fn) {
  for (int n = 1; n <= max_nodes; ++n) {
    std::vector<std::pair<int, int>> slots;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) slots.emplace_back(u, v);
    }
    const std::vector<int> values = label_values(n);
    const int base = static_cast<int>(values.size());
    int labelings = 1;
    for (int i = 0; i < n; ++i) labelings *= base;
    for (int mask = 0; mask < (1 << slots.size()); ++mask) {
      std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
      for (size_t e = 0; e < slots.size(); ++e) {
        if ((mask >> e) & 1) {
          adj[slots[e].first][slots[e].second] = adj[slots[e].second][slots[e].first] = true;
        }
      }
      for (int code = 0; code < labelings; ++code) {
        std::vector<int> labels(n);
        int x = code;
        for (auto& y : labels) {
          y = values[x % base];
          x /= base;
        }
        fn(adj, labels);
      }
    }
  }
}

}  // namespace fgl::testing
