// Multilevel k-way partitioning: heavy-edge matching coarsening, greedy
// recursive bisection on the coarsest graph, and boundary FM refinement with
// rebalancing while projecting back.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <tuple>

#include "fgl/common/error.h"
#include "fgl/common/rng.h"
#include "fgl/partition/partition.h"

namespace fgl {
namespace {

constexpr int kCoarsenFactor = 30;
constexpr int kBisectionTrials = 8;
constexpr int kMaxRefinePasses = 10;

struct WeightedGraph {
  int n = 0;
  std::vector<int64_t> xadj{0};
  std::vector<int> adjncy;
  std::vector<int64_t> adjwgt;
  std::vector<int64_t> vwgt;

  int64_t TotalWeight() const { return std::accumulate(vwgt.begin(), vwgt.end(), int64_t{0}); }
};

WeightedGraph FromGraph(const Graph& g) {
  WeightedGraph wg;
  wg.n = g.num_nodes;
  wg.xadj = g.offsets;
  wg.adjncy = g.neighbors;
  wg.adjwgt.assign(g.neighbors.size(), 1);
  wg.vwgt.assign(g.num_nodes, 1);
  return wg;
}

WeightedGraph InducedSubgraph(const WeightedGraph& g, const std::vector<int>& nodes) {
  std::vector<int> local(g.n, -1);
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) local[nodes[i]] = i;
  WeightedGraph sub;
  sub.n = static_cast<int>(nodes.size());
  for (int u : nodes) {
    sub.vwgt.push_back(g.vwgt[u]);
    for (int64_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) {
      const int v = local[g.adjncy[e]];
      if (v >= 0) {
        sub.adjncy.push_back(v);
        sub.adjwgt.push_back(g.adjwgt[e]);
      }
    }
    sub.xadj.push_back(static_cast<int64_t>(sub.adjncy.size()));
  }
  return sub;
}

// Heavy-edge matching. Returns the coarse graph and fills cmap (fine->coarse).
WeightedGraph Coarsen(const WeightedGraph& g, int64_t max_vertex_weight, Rng& rng,
                      std::vector<int>& cmap) {
  std::vector<int> match(g.n, -1);
  for (auto node : rng.Permutation(g.n)) {
    const int u = static_cast<int>(node);
    if (match[u] >= 0) continue;
    int best = -1;
    int64_t best_w = -1;
    for (int64_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) {
      const int v = g.adjncy[e];
      if (match[v] >= 0 || v == u) continue;
      if (g.vwgt[u] + g.vwgt[v] > max_vertex_weight) continue;
      if (g.adjwgt[e] > best_w || (g.adjwgt[e] == best_w && v < best)) {
        best = v;
        best_w = g.adjwgt[e];
      }
    }
    if (best >= 0) {
      match[u] = best;
      match[best] = u;
    } else {
      match[u] = u;
    }
  }
  cmap.assign(g.n, -1);
  int coarse_n = 0;
  for (int u = 0; u < g.n; ++u) {
    if (cmap[u] >= 0) continue;
    cmap[u] = coarse_n;
    cmap[match[u]] = coarse_n;
    ++coarse_n;
  }

  WeightedGraph coarse;
  coarse.n = coarse_n;
  coarse.vwgt.assign(coarse_n, 0);
  std::vector<std::vector<int>> members(coarse_n);
  for (int u = 0; u < g.n; ++u) {
    members[cmap[u]].push_back(u);
    coarse.vwgt[cmap[u]] += g.vwgt[u];
  }
  std::vector<int64_t> acc(coarse_n, 0);
  std::vector<int> touched;
  for (int c = 0; c < coarse_n; ++c) {
    touched.clear();
    for (int u : members[c]) {
      for (int64_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) {
        const int d = cmap[g.adjncy[e]];
        if (d == c) continue;
        if (acc[d] == 0) touched.push_back(d);
        acc[d] += g.adjwgt[e];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int d : touched) {
      coarse.adjncy.push_back(d);
      coarse.adjwgt.push_back(acc[d]);
      acc[d] = 0;
    }
    coarse.xadj.push_back(static_cast<int64_t>(coarse.adjncy.size()));
  }
  return coarse;
}

int64_t Cut(const WeightedGraph& g, const std::vector<int>& part) {
  int64_t cut = 0;
  for (int u = 0; u < g.n; ++u) {
    for (int64_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) {
      if (part[u] != part[g.adjncy[e]]) cut += g.adjwgt[e];
    }
  }
  return cut / 2;
}

std::vector<int64_t> PartWeights(const WeightedGraph& g, const std::vector<int>& part,
                                 int k) {
  std::vector<int64_t> w(k, 0);
  for (int u = 0; u < g.n; ++u) w[part[u]] += g.vwgt[u];
  return w;
}

// Connection weight from u to every part, written into conn (size k) with the
// parts touched listed in `touched`.
void Connectivity(const WeightedGraph& g, const std::vector<int>& part, int u,
                  std::vector<int64_t>& conn, std::vector<int>& touched) {
  for (int p : touched) conn[p] = 0;
  touched.clear();
  touched.push_back(part[u]);
  for (int64_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) {
    const int p = part[g.adjncy[e]];
    if (conn[p] == 0 && p != part[u]) touched.push_back(p);
    conn[p] += g.adjwgt[e];
  }
}

struct Move {
  int target = -1;
  int64_t gain = 0;
};

// Best weight-feasible move of u to an adjacent part; target -1 if none.
Move BestMove(const WeightedGraph& g, const std::vector<int>& part,
              const std::vector<int64_t>& part_weight,
              const std::vector<int64_t>& max_weight, int u,
              std::vector<int64_t>& conn, std::vector<int>& touched) {
  Connectivity(g, part, u, conn, touched);
  const int own = part[u];
  Move best;
  if (part_weight[own] - g.vwgt[u] <= 0) return best;
  for (int p : touched) {
    if (p == own || conn[p] == 0) continue;
    if (part_weight[p] + g.vwgt[u] > max_weight[p]) continue;
    const int64_t gain = conn[p] - conn[own];
    if (best.target < 0 || gain > best.gain || (gain == best.gain && p < best.target)) {
      best = {p, gain};
    }
  }
  return best;
}

// Fiduccia-Mattheyses passes over boundary vertices with hill climbing and
// rollback to the best prefix of each pass.
void RefineFm(const WeightedGraph& g, std::vector<int>& part, int k,
              const std::vector<int64_t>& max_weight) {
  std::vector<int64_t> conn(k, 0);
  std::vector<int> touched;
  const int stall_limit = std::max(25, g.n / 20);
  for (int pass = 0; pass < kMaxRefinePasses; ++pass) {
    auto part_weight = PartWeights(g, part, k);
    std::vector<uint8_t> locked(g.n, 0);
    std::vector<int> version(g.n, 0);
    // (gain, -node, version, target); max-heap prefers lower node ids on ties.
    using Entry = std::tuple<int64_t, int, int, int>;
    std::priority_queue<Entry> heap;
    auto push = [&](int u) {
      Move m = BestMove(g, part, part_weight, max_weight, u, conn, touched);
      ++version[u];
      if (m.target >= 0) heap.emplace(m.gain, -u, version[u], m.target);
    };
    for (int u = 0; u < g.n; ++u) push(u);

    std::vector<std::pair<int, int>> log;  // (node, previous part)
    int64_t cumulative = 0;
    int64_t best_gain = 0;
    size_t best_prefix = 0;
    int since_best = 0;
    while (!heap.empty() && since_best < stall_limit) {
      auto [gain, neg_u, ver, target] = heap.top();
      heap.pop();
      const int u = -neg_u;
      if (locked[u] || ver != version[u]) continue;
      Move m = BestMove(g, part, part_weight, max_weight, u, conn, touched);
      if (m.target != target || m.gain != gain) {
        ++version[u];
        if (m.target >= 0) heap.emplace(m.gain, -u, version[u], m.target);
        continue;
      }
      log.emplace_back(u, part[u]);
      part_weight[part[u]] -= g.vwgt[u];
      part_weight[target] += g.vwgt[u];
      part[u] = target;
      locked[u] = 1;
      cumulative += gain;
      if (cumulative > best_gain) {
        best_gain = cumulative;
        best_prefix = log.size();
        since_best = 0;
      } else {
        ++since_best;
      }
      for (int64_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) {
        const int v = g.adjncy[e];
        if (!locked[v]) push(v);
      }
    }
    for (size_t i = log.size(); i > best_prefix; --i) part[log[i - 1].first] = log[i - 1].second;
    if (best_gain <= 0) break;
  }
}

// Moves vertices out of overweight parts (least cut damage first) and fills
// empty parts. Best effort on coarse graphs with heavy vertices.
void Rebalance(const WeightedGraph& g, std::vector<int>& part, int k,
               const std::vector<int64_t>& max_weight) {
  auto part_weight = PartWeights(g, part, k);
  std::vector<int64_t> conn(k, 0);
  std::vector<int> touched;

  auto relocate = [&](int source, auto target_ok) {
    int best_u = -1;
    int best_p = -1;
    int64_t best_gain = 0;
    for (int u = 0; u < g.n; ++u) {
      if (part[u] != source) continue;
      Connectivity(g, part, u, conn, touched);
      for (int p = 0; p < k; ++p) {
        if (p == source || !target_ok(p, u)) continue;
        const int64_t gain = conn[p] - conn[source];
        if (best_u < 0 || gain > best_gain) {
          best_u = u;
          best_p = p;
          best_gain = gain;
        }
      }
    }
    if (best_u < 0) return false;
    part_weight[source] -= g.vwgt[best_u];
    part_weight[best_p] += g.vwgt[best_u];
    part[best_u] = best_p;
    return true;
  };

  for (int guard = 0; guard < g.n; ++guard) {
    int over = -1;
    for (int p = 0; p < k; ++p) {
      if (part_weight[p] > max_weight[p] && (over < 0 || part_weight[p] > part_weight[over])) {
        over = p;
      }
    }
    if (over < 0) break;
    const bool moved = relocate(over, [&](int p, int u) {
      return part_weight[p] + g.vwgt[u] <= max_weight[p];
    });
    if (!moved) break;
  }
  for (int p = 0; p < k; ++p) {
    if (part_weight[p] > 0) continue;
    const int donor = static_cast<int>(
        std::distance(part_weight.begin(), std::max_element(part_weight.begin(), part_weight.end())));
    bool moved = false;
    int best_u = -1;
    int64_t best_gain = 0;
    for (int u = 0; u < g.n; ++u) {
      if (part[u] != donor) continue;
      Connectivity(g, part, u, conn, touched);
      const int64_t gain = conn[p] - conn[donor];
      if (best_u < 0 || gain > best_gain) {
        best_u = u;
        best_gain = gain;
      }
    }
    if (best_u >= 0 && part_weight[donor] > g.vwgt[best_u]) {
      part_weight[donor] -= g.vwgt[best_u];
      part_weight[p] += g.vwgt[best_u];
      part[best_u] = p;
      moved = true;
    }
    if (!moved) break;
  }
}

// Greedy graph growing from `start` until side 0 reaches target weight.
std::vector<int> GrowBisection(const WeightedGraph& g, int start, int64_t target,
                               Rng& rng) {
  std::vector<int> side(g.n, 1);
  std::vector<int64_t> gain(g.n, 0);
  for (int u = 0; u < g.n; ++u) {
    for (int64_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) gain[u] -= g.adjwgt[e];
  }
  using Entry = std::tuple<int64_t, int, int64_t>;  // gain, -node, stamp
  std::priority_queue<Entry> frontier;
  std::vector<int64_t> stamp(g.n, 0);
  int64_t grown = 0;
  auto add = [&](int u) {
    side[u] = 0;
    grown += g.vwgt[u];
    for (int64_t e = g.xadj[u]; e < g.xadj[u + 1]; ++e) {
      const int v = g.adjncy[e];
      if (side[v] == 0) continue;
      gain[v] += 2 * g.adjwgt[e];
      frontier.emplace(gain[v], -v, ++stamp[v]);
    }
  };
  add(start);
  while (grown < target) {
    int next = -1;
    while (!frontier.empty()) {
      auto [gv, neg_v, st] = frontier.top();
      frontier.pop();
      const int v = -neg_v;
      if (side[v] == 0 || st != stamp[v]) continue;
      next = v;
      break;
    }
    if (next < 0) {
      std::vector<int> rest;
      for (int u = 0; u < g.n; ++u) {
        if (side[u] == 1) rest.push_back(u);
      }
      if (rest.empty()) break;
      next = rest[rng.UniformIndex(rest.size())];
    }
    // Stop rather than overshoot when the next vertex lands further from target.
    if (grown + g.vwgt[next] > target &&
        (grown + g.vwgt[next] - target) > (target - grown)) {
      break;
    }
    add(next);
  }
  return side;
}

void RecursiveBisection(const WeightedGraph& g, const std::vector<int>& nodes, int k,
                        int first_part, double eps, Rng& rng, std::vector<int>& part) {
  if (k == 1 || nodes.size() <= 1) {
    for (int u : nodes) part[u] = first_part;
    return;
  }
  WeightedGraph sub = InducedSubgraph(g, nodes);
  const int k0 = k / 2;
  const int64_t total = sub.TotalWeight();
  const auto target0 = static_cast<int64_t>(std::llround(static_cast<double>(total) * k0 / k));
  const int64_t target1 = total - target0;
  const int64_t max_vw = *std::max_element(sub.vwgt.begin(), sub.vwgt.end());
  const std::vector<int64_t> limits = {
      std::max(static_cast<int64_t>(std::floor((1.0 + eps) * target0)), target0 + max_vw - 1),
      std::max(static_cast<int64_t>(std::floor((1.0 + eps) * target1)), target1 + max_vw - 1)};

  std::vector<int> best_side;
  int64_t best_cut = 0;
  int64_t best_excess = 0;
  for (int trial = 0; trial < kBisectionTrials; ++trial) {
    const int start = static_cast<int>(rng.UniformIndex(sub.n));
    auto side = GrowBisection(sub, start, target0, rng);
    RefineFm(sub, side, 2, limits);
    const auto w = PartWeights(sub, side, 2);
    const int64_t excess = std::max<int64_t>(0, w[0] - limits[0]) +
                           std::max<int64_t>(0, w[1] - limits[1]);
    const int64_t cut = Cut(sub, side);
    if (best_side.empty() || excess < best_excess ||
        (excess == best_excess && cut < best_cut)) {
      best_side = side;
      best_cut = cut;
      best_excess = excess;
    }
  }
  std::vector<int> left;
  std::vector<int> right;
  for (int i = 0; i < sub.n; ++i) (best_side[i] == 0 ? left : right).push_back(nodes[i]);
  if (left.empty() || right.empty()) {
    // Degenerate split; fall back to an even split by order.
    left.assign(nodes.begin(), nodes.begin() + nodes.size() / 2);
    right.assign(nodes.begin() + nodes.size() / 2, nodes.end());
  }
  RecursiveBisection(g, left, k0, first_part, eps, rng, part);
  RecursiveBisection(g, right, k - k0, first_part + k0, eps, rng, part);
}

}  // namespace

ClientAssignment MetisKway(const Graph& graph, int num_clients, double imbalance_eps,
                           uint64_t seed) {
  const int k = num_clients;
  if (k < 1 || k > graph.num_nodes) {
    throw Error(ErrorCode::kInfeasiblePartition,
                "cannot split " + std::to_string(graph.num_nodes) + " nodes into " +
                    std::to_string(k) + " non-empty parts");
  }
  if (imbalance_eps < 0) throw Error(ErrorCode::kConfig, "imbalance_eps must be >= 0");
  ClientAssignment out;
  out.num_clients = k;
  if (k == 1) {
    out.owner.assign(graph.num_nodes, 0);
    return out;
  }

  Rng rng(DeriveSeed(seed, "kway"));
  const int64_t n = graph.num_nodes;
  const int64_t ceil_share = (n + k - 1) / k;
  const auto limit = std::max<int64_t>(
      ceil_share, static_cast<int64_t>(std::floor((1.0 + imbalance_eps) * ceil_share + 1e-9)));
  const std::vector<int64_t> max_weight(k, limit);

  std::vector<WeightedGraph> levels{FromGraph(graph)};
  std::vector<std::vector<int>> cmaps;
  const int64_t coarsen_to = static_cast<int64_t>(kCoarsenFactor) * k;
  const int64_t max_vertex_weight =
      std::max<int64_t>(1, static_cast<int64_t>(1.5 * static_cast<double>(n) / coarsen_to));
  while (levels.back().n > coarsen_to) {
    std::vector<int> cmap;
    WeightedGraph coarse = Coarsen(levels.back(), max_vertex_weight, rng, cmap);
    if (coarse.n > 0.95 * levels.back().n) break;
    cmaps.push_back(std::move(cmap));
    levels.push_back(std::move(coarse));
  }

  const WeightedGraph& coarsest = levels.back();
  std::vector<int> part(coarsest.n, 0);
  std::vector<int> all(coarsest.n);
  std::iota(all.begin(), all.end(), 0);
  RecursiveBisection(coarsest, all, k, 0, imbalance_eps, rng, part);
  Rebalance(coarsest, part, k, max_weight);
  RefineFm(coarsest, part, k, max_weight);

  for (int level = static_cast<int>(cmaps.size()) - 1; level >= 0; --level) {
    const WeightedGraph& fine = levels[level];
    std::vector<int> fine_part(fine.n);
    for (int u = 0; u < fine.n; ++u) fine_part[u] = part[cmaps[level][u]];
    part = std::move(fine_part);
    Rebalance(fine, part, k, max_weight);
    RefineFm(fine, part, k, max_weight);
  }
  Rebalance(levels.front(), part, k, max_weight);

  out.owner = std::move(part);
  const auto sizes = out.Sizes();
  for (int p = 0; p < k; ++p) {
    if (sizes[p] == 0 || sizes[p] > limit) {
      throw Error(ErrorCode::kInfeasiblePartition,
                  "k-way partition failed balance: part " + std::to_string(p) +
                      " has " + std::to_string(sizes[p]) + " nodes, limit " +
                      std::to_string(limit));
    }
  }
  return out;
}

}  // namespace fgl
