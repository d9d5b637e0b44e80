#include "fgl/partition/partition.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "fgl/common/error.h"
#include "fgl/common/rng.h"

namespace fgl {
namespace {

constexpr int kDirichletAttempts = 50;

[[noreturn]] void Infeasible(const std::string& message) {
  throw Error(ErrorCode::kInfeasiblePartition, message);
}

// Sizes of `count` contiguous chunks of `total` items differing by at most one,
// larger chunks first.
std::vector<int> ChunkSizes(int total, int count) {
  std::vector<int> sizes(count, total / count);
  for (int i = 0; i < total % count; ++i) ++sizes[i];
  return sizes;
}

}  // namespace

std::string_view StrategyName(PartitionStrategy strategy) {
  switch (strategy) {
    case PartitionStrategy::kFeatureSkew: return "feature_skew";
    case PartitionStrategy::kLabelDirichlet: return "label_dirichlet";
    case PartitionStrategy::kCrossDomain: return "cross_domain";
    case PartitionStrategy::kTopologySkew: return "topology_skew";
    case PartitionStrategy::kMetisCommunity: return "metis_community";
    case PartitionStrategy::kLouvainCommunity: return "louvain_community";
    case PartitionStrategy::kMetisLabelImbalance: return "metis_label_imbalance";
    case PartitionStrategy::kLouvainLabelImbalance: return "louvain_label_imbalance";
  }
  return "unknown";
}

PartitionStrategy ParseStrategy(std::string_view name) {
  for (auto s : {PartitionStrategy::kFeatureSkew, PartitionStrategy::kLabelDirichlet,
                 PartitionStrategy::kCrossDomain, PartitionStrategy::kTopologySkew,
                 PartitionStrategy::kMetisCommunity, PartitionStrategy::kLouvainCommunity,
                 PartitionStrategy::kMetisLabelImbalance,
                 PartitionStrategy::kLouvainLabelImbalance}) {
    if (StrategyName(s) == name) return s;
  }
  throw Error(ErrorCode::kConfig, "unknown partition strategy '" + std::string(name) + "'");
}

std::string_view FeatureSkewName(FeatureSkewMode mode) {
  switch (mode) {
    case FeatureSkewMode::kGaussian: return "gaussian";
    case FeatureSkewMode::kLaplacian: return "laplacian";
    case FeatureSkewMode::kScale: return "scale";
  }
  return "unknown";
}

FeatureSkewMode ParseFeatureSkewMode(std::string_view name) {
  for (auto m : {FeatureSkewMode::kGaussian, FeatureSkewMode::kLaplacian,
                 FeatureSkewMode::kScale}) {
    if (FeatureSkewName(m) == name) return m;
  }
  throw Error(ErrorCode::kConfig, "unknown feature skew mode '" + std::string(name) + "'");
}

void PartitionSpec::Validate() const {
  if (num_clients < 1) throw Error(ErrorCode::kConfig, "num_clients must be >= 1");
  if (!(alpha > 0)) throw Error(ErrorCode::kConfig, "alpha must be > 0");
  if (!(resolution > 0)) throw Error(ErrorCode::kConfig, "resolution must be > 0");
  if (!(imbalance_eps >= 0)) throw Error(ErrorCode::kConfig, "imbalance_eps must be >= 0");
  if (!(capacity_beta >= 0)) throw Error(ErrorCode::kConfig, "capacity_beta must be >= 0");
}

std::vector<std::vector<int>> ClientAssignment::Members() const {
  std::vector<std::vector<int>> members(num_clients);
  for (int i = 0; i < static_cast<int>(owner.size()); ++i) members[owner[i]].push_back(i);
  return members;
}

std::vector<int> ClientAssignment::Sizes() const {
  std::vector<int> sizes(num_clients, 0);
  for (int o : owner) ++sizes[o];
  return sizes;
}

void ClientAssignment::Validate() const {
  std::vector<int> sizes(num_clients, 0);
  for (int o : owner) {
    if (o < 0 || o >= num_clients) Infeasible("owner index outside [0, K)");
    ++sizes[o];
  }
  for (int k = 0; k < num_clients; ++k) {
    if (sizes[k] == 0) Infeasible("client " + std::to_string(k) + " owns no samples");
  }
}

CommunityDecomposition DecompositionFromLabels(const Graph& g,
                                               std::span<const int> community) {
  CommunityDecomposition out;
  out.community.assign(g.num_nodes, -1);
  std::unordered_map<int, int> renumber;
  for (int v = 0; v < g.num_nodes; ++v) {
    auto [it, inserted] = renumber.try_emplace(community[v], static_cast<int>(renumber.size()));
    if (inserted) out.members.emplace_back();
    out.community[v] = it->second;
    out.members[it->second].push_back(v);
  }
  const int classes = g.num_classes;
  out.label_histograms.assign(out.count(), std::vector<double>(classes, 0.0));
  for (int c = 0; c < out.count(); ++c) {
    double labeled = 0;
    for (int v : out.members[c]) {
      if (g.labels[v] != kUnlabeled) {
        out.label_histograms[c][g.labels[v]] += 1.0;
        labeled += 1.0;
      }
    }
    if (labeled > 0) {
      for (auto& h : out.label_histograms[c]) h /= labeled;
    }
  }
  return out;
}

double Modularity(const Graph& g, std::span<const int> community, double resolution) {
  const double two_m = 2.0 * static_cast<double>(g.num_edges());
  if (two_m == 0.0) return 0.0;
  const int max_id = community.empty()
                         ? 0
                         : *std::max_element(community.begin(), community.end()) + 1;
  std::vector<double> internal(max_id, 0.0);
  std::vector<double> total(max_id, 0.0);
  for (int u = 0; u < g.num_nodes; ++u) {
    total[community[u]] += g.degree(u);
    for (int v : g.Neighbors(u)) {
      if (community[u] == community[v]) internal[community[u]] += 1.0;
    }
  }
  double q = 0.0;
  for (int c = 0; c < max_id; ++c) {
    q += internal[c] / two_m - resolution * (total[c] / two_m) * (total[c] / two_m);
  }
  return q;
}

int64_t EdgeCut(const Graph& g, std::span<const int> part) {
  int64_t cut = 0;
  for (auto [u, v] : g.EdgeList()) cut += part[u] != part[v];
  return cut;
}

ClientAssignment DirichletLabelSplit(std::span<const int> labels, int num_clients,
                                     double alpha, uint64_t seed) {
  if (num_clients < 1) throw Error(ErrorCode::kConfig, "num_clients must be >= 1");
  if (!(alpha > 0)) throw Error(ErrorCode::kConfig, "alpha must be > 0");
  const int n = static_cast<int>(labels.size());
  if (num_clients > n) {
    Infeasible(std::to_string(num_clients) + " clients for " + std::to_string(n) +
               " samples");
  }
  int num_classes = 0;
  for (int y : labels) {
    if (y < 0) throw Error(ErrorCode::kConfig, "Dirichlet split requires every sample labeled");
    num_classes = std::max(num_classes, y + 1);
  }
  std::vector<std::vector<int>> by_class(num_classes);
  for (int i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

  ClientAssignment out;
  out.num_clients = num_clients;
  out.owner.assign(n, 0);
  for (int attempt = 0; attempt < kDirichletAttempts; ++attempt) {
    Rng rng(DeriveSeed(seed, "dirichlet", -1, attempt));
    std::vector<int> sizes(num_clients, 0);
    for (const auto& cls : by_class) {
      std::vector<int> members = cls;
      rng.Shuffle(members);
      const auto props = rng.SymmetricDirichlet(alpha, num_clients);
      const int count = static_cast<int>(members.size());
      double cumulative = 0.0;
      int begin = 0;
      for (int k = 0; k < num_clients; ++k) {
        cumulative += props[k];
        const int end = (k + 1 == num_clients)
                            ? count
                            : std::min(count, static_cast<int>(std::floor(cumulative * count)));
        for (int i = begin; i < end; ++i) out.owner[members[i]] = k;
        sizes[k] += std::max(0, end - begin);
        begin = std::max(begin, end);
      }
    }
    if (std::all_of(sizes.begin(), sizes.end(), [](int s) { return s > 0; })) return out;
  }
  Infeasible("Dirichlet split left a client empty after " +
             std::to_string(kDirichletAttempts) + " draws (alpha=" +
             std::to_string(alpha) + ", K=" + std::to_string(num_clients) + ")");
}

ClientAssignment UniformSplit(int num_samples, int num_clients, uint64_t seed) {
  if (num_clients < 1 || num_clients > num_samples) {
    Infeasible(std::to_string(num_clients) + " clients for " +
               std::to_string(num_samples) + " samples");
  }
  Rng rng(DeriveSeed(seed, "uniform_split"));
  auto perm = rng.Permutation(num_samples);
  ClientAssignment out;
  out.num_clients = num_clients;
  out.owner.assign(num_samples, 0);
  for (int i = 0; i < num_samples; ++i) out.owner[perm[i]] = i % num_clients;
  return out;
}

ClientAssignment CommunitiesToClientsAverage(const CommunityDecomposition& comms,
                                             int num_clients) {
  const int m = comms.count();
  if (m < num_clients) {
    Infeasible(std::to_string(m) + " communities cannot fill " +
               std::to_string(num_clients) + " clients");
  }
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return comms.members[a].size() > comms.members[b].size();
  });
  std::vector<int64_t> load(num_clients, 0);
  ClientAssignment out;
  out.num_clients = num_clients;
  out.owner.assign(comms.community.size(), -1);
  for (int c : order) {
    const int target = static_cast<int>(
        std::distance(load.begin(), std::min_element(load.begin(), load.end())));
    load[target] += static_cast<int64_t>(comms.members[c].size());
    for (int v : comms.members[c]) out.owner[v] = target;
  }
  return out;
}

ClientAssignment TopologySkewSplit(const GraphCollection& coll, int num_clients) {
  const int count = static_cast<int>(coll.size());
  if (num_clients < 1 || num_clients > count) {
    Infeasible(std::to_string(num_clients) + " clients for " + std::to_string(count) +
               " graphs");
  }
  std::vector<double> avg_degree(count);
  for (int i = 0; i < count; ++i) {
    const auto& g = coll.graphs[i];
    avg_degree[i] = g.num_nodes == 0 ? 0.0 : 2.0 * g.num_edges() / g.num_nodes;
  }
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return avg_degree[a] < avg_degree[b]; });
  ClientAssignment out;
  out.num_clients = num_clients;
  out.owner.assign(count, 0);
  int pos = 0;
  const auto sizes = ChunkSizes(count, num_clients);
  for (int k = 0; k < num_clients; ++k) {
    for (int i = 0; i < sizes[k]; ++i) out.owner[order[pos++]] = k;
  }
  return out;
}

ClientAssignment CrossDomainSplit(std::span<const int> dataset_sizes, int num_clients) {
  const int datasets = static_cast<int>(dataset_sizes.size());
  if (num_clients < datasets) {
    Infeasible(std::to_string(num_clients) + " clients for " + std::to_string(datasets) +
               " datasets; a client may not mix domains");
  }
  ClientAssignment out;
  out.num_clients = num_clients;
  int offset = 0;
  for (int d = 0; d < datasets; ++d) {
    std::vector<int> clients;
    for (int k = d; k < num_clients; k += datasets) clients.push_back(k);
    if (dataset_sizes[d] < static_cast<int>(clients.size())) {
      Infeasible("dataset " + std::to_string(d) + " has fewer samples than its " +
                 std::to_string(clients.size()) + " clients");
    }
    const auto sizes = ChunkSizes(dataset_sizes[d], static_cast<int>(clients.size()));
    for (size_t j = 0; j < clients.size(); ++j) {
      out.owner.insert(out.owner.end(), sizes[j], clients[j]);
    }
    offset += dataset_sizes[d];
  }
  return out;
}

ClientSplit BuildClientSubgraphs(const Graph& g, const ClientAssignment& assignment) {
  ClientSplit split;
  const auto members = assignment.Members();
  std::vector<int> local_index(g.num_nodes, -1);
  for (const auto& nodes : members) {
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) local_index[nodes[i]] = i;
  }
  for (auto [u, v] : g.EdgeList()) {
    split.dropped_edges += assignment.owner[u] != assignment.owner[v];
  }
  for (int k = 0; k < assignment.num_clients; ++k) {
    const auto& nodes = members[k];
    ClientSubgraph client;
    client.global_ids = nodes;
    Graph& sub = client.graph;
    sub.num_nodes = static_cast<int>(nodes.size());
    sub.num_classes = g.num_classes;
    std::vector<Edge> edges;
    for (int u : nodes) {
      for (int v : g.Neighbors(u)) {
        if (u < v && assignment.owner[v] == k) {
          edges.emplace_back(local_index[u], local_index[v]);
        }
      }
    }
    sub.SetEdges(edges);
    sub.features = Matrix(nodes.size(), g.features.cols());
    sub.labels.resize(nodes.size());
    sub.train_mask.resize(nodes.size());
    sub.val_mask.resize(nodes.size());
    sub.test_mask.resize(nodes.size());
    if (g.targets) sub.targets.emplace(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) {
      const int v = nodes[i];
      std::copy(g.features.row(v).begin(), g.features.row(v).end(),
                sub.features.row(i).begin());
      sub.labels[i] = g.labels[v];
      sub.train_mask[i] = g.train_mask[v];
      sub.val_mask[i] = g.val_mask[v];
      sub.test_mask[i] = g.test_mask[v];
      if (g.targets) (*sub.targets)[i] = (*g.targets)[v];
    }
    split.clients.push_back(std::move(client));
  }
  if (split.dropped_edges > 0) {
    spdlog::info("dropped {} cross-client edges", split.dropped_edges);
  }
  return split;
}

void FeatureSkewApplyClient(std::span<Graph> graphs, const FeatureSkewSpec& skew,
                            uint64_t seed, int client) {
  if (skew.lo > skew.hi) throw Error(ErrorCode::kConfig, "feature skew range lo > hi");
  if (skew.mode != FeatureSkewMode::kScale && skew.lo < 0) {
    throw Error(ErrorCode::kConfig, "feature skew noise scale must be >= 0");
  }
  Rng rng(DeriveSeed(seed, "feature_skew", client));
  const double param = rng.Uniform(skew.lo, skew.hi);
  for (auto& g : graphs) {
    for (auto& x : g.features.data()) {
      switch (skew.mode) {
        case FeatureSkewMode::kGaussian: x += param * rng.Normal(); break;
        case FeatureSkewMode::kLaplacian: x += rng.Laplace(param); break;
        case FeatureSkewMode::kScale: x *= param; break;
      }
    }
  }
}

std::vector<Graph> FeatureSkewApply(std::span<const Graph> client_graphs,
                                    const FeatureSkewSpec& skew, uint64_t seed) {
  std::vector<Graph> out(client_graphs.begin(), client_graphs.end());
  for (size_t k = 0; k < out.size(); ++k) {
    FeatureSkewApplyClient(std::span<Graph>(&out[k], 1), skew, seed, static_cast<int>(k));
  }
  return out;
}

ClientAssignment PartitionNodes(const Graph& g, const PartitionSpec& spec,
                                std::vector<int>* community) {
  spec.Validate();
  const int k = spec.num_clients;
  if (k > g.num_nodes) {
    Infeasible(std::to_string(k) + " clients for " + std::to_string(g.num_nodes) +
               " nodes");
  }
  ClientAssignment out;
  switch (spec.strategy) {
    case PartitionStrategy::kFeatureSkew:
      out = UniformSplit(g.num_nodes, k, spec.seed);
      break;
    case PartitionStrategy::kLabelDirichlet:
      out = DirichletLabelSplit(g.labels, k, spec.alpha, spec.seed);
      break;
    case PartitionStrategy::kLouvainCommunity:
    case PartitionStrategy::kLouvainLabelImbalance: {
      auto comms = LouvainCommunities(g, spec.resolution, spec.seed);
      if (community != nullptr) *community = comms.community;
      out = spec.strategy == PartitionStrategy::kLouvainCommunity
                ? CommunitiesToClientsAverage(comms, k)
                : CommunitiesToClientsLabelCluster(comms, k, spec.capacity_beta);
      break;
    }
    case PartitionStrategy::kMetisCommunity:
      out = MetisKway(g, k, spec.imbalance_eps, spec.seed);
      if (community != nullptr) *community = out.owner;
      break;
    case PartitionStrategy::kMetisLabelImbalance: {
      // Over-partition so that several communities are available per client.
      const int parts = std::min(g.num_nodes, 4 * k);
      auto kway = MetisKway(g, parts, spec.imbalance_eps, spec.seed);
      auto comms = DecompositionFromLabels(g, kway.owner);
      if (community != nullptr) *community = comms.community;
      out = CommunitiesToClientsLabelCluster(comms, k, spec.capacity_beta);
      break;
    }
    case PartitionStrategy::kCrossDomain:
    case PartitionStrategy::kTopologySkew:
      throw Error(ErrorCode::kConfig, std::string(StrategyName(spec.strategy)) +
                                          " applies to graph collections only");
  }
  out.Validate();
  return out;
}

ClientAssignment PartitionGraphs(const GraphCollection& coll, const PartitionSpec& spec) {
  spec.Validate();
  ClientAssignment out;
  switch (spec.strategy) {
    case PartitionStrategy::kTopologySkew:
      out = TopologySkewSplit(coll, spec.num_clients);
      break;
    case PartitionStrategy::kLabelDirichlet:
      if (coll.is_regression()) {
        throw Error(ErrorCode::kConfig, "label_dirichlet needs graph labels");
      }
      out = DirichletLabelSplit(coll.graph_labels, spec.num_clients, spec.alpha, spec.seed);
      break;
    case PartitionStrategy::kFeatureSkew:
      out = UniformSplit(static_cast<int>(coll.size()), spec.num_clients, spec.seed);
      break;
    case PartitionStrategy::kCrossDomain: {
      const int sizes[] = {static_cast<int>(coll.size())};
      out = CrossDomainSplit(sizes, spec.num_clients);
      break;
    }
    default:
      throw Error(ErrorCode::kConfig, std::string(StrategyName(spec.strategy)) +
                                          " applies to a single graph only");
  }
  out.Validate();
  return out;
}

}  // namespace fgl
