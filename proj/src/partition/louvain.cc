// Two-phase Louvain modularity optimisation with a resolution parameter.

#include <algorithm>
#include <numeric>

#include "fgl/common/rng.h"
#include "fgl/partition/partition.h"

namespace fgl {
namespace {

// Weighted graph at one aggregation level. `loop[i]` counts the internal
// weight of supernode i over ordered pairs; adj excludes self entries.
struct LevelGraph {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> loop;
  std::vector<double> degree;
};

LevelGraph FromGraph(const Graph& g) {
  LevelGraph lg;
  lg.n = g.num_nodes;
  lg.adj.resize(lg.n);
  lg.loop.assign(lg.n, 0.0);
  lg.degree.assign(lg.n, 0.0);
  for (int u = 0; u < lg.n; ++u) {
    for (int v : g.Neighbors(u)) lg.adj[u].emplace_back(v, 1.0);
    lg.degree[u] = g.degree(u);
  }
  return lg;
}

// Local moving phase. Returns true if any node changed community.
bool MoveNodes(const LevelGraph& lg, double resolution, double two_m, Rng& rng,
               std::vector<int>& comm) {
  std::vector<double> total(lg.n);
  for (int i = 0; i < lg.n; ++i) {
    comm[i] = i;
    total[i] = lg.degree[i];
  }
  std::vector<double> weight_to(lg.n, 0.0);
  std::vector<int> touched;
  auto order = rng.Permutation(lg.n);

  bool any_move = false;
  constexpr int kMaxPasses = 1000;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool moved = false;
    for (auto node : order) {
      const int i = static_cast<int>(node);
      const int current = comm[i];
      const double k_i = lg.degree[i];
      touched.clear();
      touched.push_back(current);
      for (auto [j, w] : lg.adj[i]) {
        const int c = comm[j];
        if (weight_to[c] == 0.0 && c != current) touched.push_back(c);
        weight_to[c] += w;
      }
      total[current] -= k_i;

      int best = current;
      double best_gain = weight_to[current] - resolution * total[current] * k_i / two_m;
      for (int c : touched) {
        const double gain = weight_to[c] - resolution * total[c] * k_i / two_m;
        if (gain > best_gain + 1e-12) {
          best = c;
          best_gain = gain;
        }
      }
      total[best] += k_i;
      comm[i] = best;
      if (best != current) moved = true;
      for (int c : touched) weight_to[c] = 0.0;
    }
    if (!moved) break;
    any_move = true;
  }
  return any_move;
}

// Renumbers communities 0..M-1 by first appearance; returns M.
int Renumber(std::vector<int>& comm) {
  std::vector<int> map(comm.size(), -1);
  int next = 0;
  for (auto& c : comm) {
    if (map[c] < 0) map[c] = next++;
    c = map[c];
  }
  return next;
}

LevelGraph Aggregate(const LevelGraph& lg, const std::vector<int>& comm, int count) {
  LevelGraph out;
  out.n = count;
  out.adj.resize(count);
  out.loop.assign(count, 0.0);
  out.degree.assign(count, 0.0);
  std::vector<std::vector<int>> members(count);
  for (int i = 0; i < lg.n; ++i) members[comm[i]].push_back(i);
  std::vector<double> acc(count, 0.0);
  std::vector<int> touched;
  for (int c = 0; c < count; ++c) {
    touched.clear();
    for (int i : members[c]) {
      out.loop[c] += lg.loop[i];
      out.degree[c] += lg.degree[i];
      for (auto [j, w] : lg.adj[i]) {
        const int d = comm[j];
        if (d == c) {
          out.loop[c] += w;
          continue;
        }
        if (acc[d] == 0.0) touched.push_back(d);
        acc[d] += w;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int d : touched) {
      out.adj[c].emplace_back(d, acc[d]);
      acc[d] = 0.0;
    }
  }
  return out;
}

}  // namespace

CommunityDecomposition LouvainCommunities(const Graph& g, double resolution,
                                          uint64_t seed) {
  std::vector<int> node_comm(g.num_nodes);
  std::iota(node_comm.begin(), node_comm.end(), 0);
  std::vector<double> level_modularity{Modularity(g, node_comm, resolution)};

  const double two_m = 2.0 * static_cast<double>(g.num_edges());
  if (two_m > 0.0) {
    LevelGraph lg = FromGraph(g);
    for (int level = 0;; ++level) {
      Rng rng(DeriveSeed(seed, "louvain", level));
      std::vector<int> comm(lg.n);
      if (!MoveNodes(lg, resolution, two_m, rng, comm)) break;
      const int count = Renumber(comm);
      for (auto& c : node_comm) c = comm[c];
      level_modularity.push_back(Modularity(g, node_comm, resolution));
      if (count == lg.n) break;
      lg = Aggregate(lg, comm, count);
    }
  }
  CommunityDecomposition out = DecompositionFromLabels(g, node_comm);
  out.level_modularity = std::move(level_modularity);
  return out;
}

}  // namespace fgl
