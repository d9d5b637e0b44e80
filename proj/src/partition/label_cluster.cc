#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fgl/common/error.h"
#include "fgl/partition/partition.h"

namespace fgl {
namespace {

using Vec = std::vector<double>;

double Dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Cosine(const Vec& a, const Vec& b) {
  const double na = std::sqrt(Dot(a, a));
  const double nb = std::sqrt(Dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return Dot(a, b) / (na * nb);
}

struct Group {
  std::vector<int> communities;
  int64_t size = 0;
  Vec vector;  // size-weighted label histogram sum
};

// Packs `sizes` into exactly `bins` non-empty bins of `capacity`, placing
// items largest first into the least-loaded bin, then first-fit if that fails.
// Returns the bin of each item, or empty if neither heuristic succeeds.
std::vector<int> PackDecreasing(const std::vector<int64_t>& sizes, int bins,
                                int64_t capacity) {
  std::vector<int> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return sizes[a] > sizes[b]; });
  for (bool least_loaded : {true, false}) {
    std::vector<int64_t> load(bins, 0);
    std::vector<int> bin_of(sizes.size(), -1);
    bool ok = true;
    for (int item : order) {
      int chosen = -1;
      for (int b = 0; b < bins; ++b) {
        if (load[b] + sizes[item] > capacity) continue;
        if (chosen < 0 || (least_loaded && load[b] < load[chosen])) chosen = b;
        if (!least_loaded) break;
      }
      if (chosen < 0) {
        ok = false;
        break;
      }
      load[chosen] += sizes[item];
      bin_of[item] = chosen;
    }
    if (ok && std::find(load.begin(), load.end(), 0) == load.end()) return bin_of;
  }
  return {};
}

struct ExactSearch {
  const CommunityDecomposition& comms;
  int k;
  int64_t capacity;
  std::vector<int64_t> sizes;
  std::vector<int> current;
  std::vector<int> best;
  double best_score = -1.0;

  void Run(int index, int used, std::vector<int64_t>& load) {
    const int m = comms.count();
    if (m - index < k - used) return;  // not enough communities left to open groups
    if (index == m) {
      if (used != k) return;
      const double score = GroupingCohesion(comms, current);
      if (best.empty() || score > best_score + 1e-12) {
        best = current;
        best_score = score;
      }
      return;
    }
    for (int g = 0; g <= std::min(used, k - 1); ++g) {
      if (load[g] + sizes[index] > capacity) continue;
      current[index] = g;
      load[g] += sizes[index];
      Run(index + 1, std::max(used, g + 1), load);
      load[g] -= sizes[index];
    }
  }
};

ClientAssignment FromGrouping(const CommunityDecomposition& comms,
                              const std::vector<int>& group_of, int k) {
  ClientAssignment out;
  out.num_clients = k;
  out.owner.assign(comms.community.size(), -1);
  for (int c = 0; c < comms.count(); ++c) {
    for (int v : comms.members[c]) out.owner[v] = group_of[c];
  }
  return out;
}

}  // namespace

double GroupingCohesion(const CommunityDecomposition& comms,
                        std::span<const int> group_of_community) {
  const int m = comms.count();
  const int groups = m == 0 ? 0
                            : *std::max_element(group_of_community.begin(),
                                                group_of_community.end()) + 1;
  const size_t classes = comms.label_histograms.empty() ? 0 : comms.label_histograms[0].size();
  std::vector<Vec> group_vec(groups, Vec(classes, 0.0));
  for (int c = 0; c < m; ++c) {
    const double s = static_cast<double>(comms.members[c].size());
    for (size_t j = 0; j < classes; ++j) {
      group_vec[group_of_community[c]][j] += s * comms.label_histograms[c][j];
    }
  }
  double total = 0.0;
  for (int c = 0; c < m; ++c) {
    total += static_cast<double>(comms.members[c].size()) *
             Cosine(comms.label_histograms[c], group_vec[group_of_community[c]]);
  }
  return total;
}

ClientAssignment CommunitiesToClientsLabelCluster(const CommunityDecomposition& comms,
                                                  int num_clients,
                                                  double capacity_beta) {
  const int m = comms.count();
  const int k = num_clients;
  if (m < k) {
    throw Error(ErrorCode::kInfeasiblePartition,
                std::to_string(m) + " communities cannot fill " + std::to_string(k) +
                    " clients");
  }
  int64_t n = 0;
  std::vector<int64_t> sizes(m);
  for (int c = 0; c < m; ++c) {
    sizes[c] = static_cast<int64_t>(comms.members[c].size());
    n += sizes[c];
  }
  const int64_t ceil_share = (n + k - 1) / k;
  const auto capacity = static_cast<int64_t>(
      std::floor((1.0 + capacity_beta) * static_cast<double>(ceil_share) + 1e-9));
  auto capacity_error = [&]() {
    return Error(ErrorCode::kInfeasiblePartition,
                 "capacity (1+capacity_beta)*ceil(n/K) = " + std::to_string(capacity) +
                     " nodes cannot hold " + std::to_string(m) + " communities in " +
                     std::to_string(k) + " groups; raise capacity_beta");
  };

  if (m <= kExactGroupingLimit) {
    ExactSearch search{comms, k, capacity, sizes, std::vector<int>(m, 0), {}, -1.0};
    std::vector<int64_t> load(k, 0);
    search.Run(0, 0, load);
    if (search.best.empty()) throw capacity_error();
    return FromGrouping(comms, search.best, k);
  }

  const size_t classes = comms.label_histograms.empty() ? 0 : comms.label_histograms[0].size();
  std::vector<Group> groups(m);
  for (int c = 0; c < m; ++c) {
    groups[c].communities = {c};
    groups[c].size = sizes[c];
    groups[c].vector.assign(classes, 0.0);
    for (size_t j = 0; j < classes; ++j) {
      groups[c].vector[j] = static_cast<double>(sizes[c]) * comms.label_histograms[c][j];
    }
  }
  auto packing_of = [&](const std::vector<Group>& gs) {
    std::vector<int64_t> s;
    for (const auto& g : gs) s.push_back(g.size);
    return PackDecreasing(s, k, capacity);
  };
  std::vector<int> fallback = packing_of(groups);
  if (fallback.empty()) throw capacity_error();

  while (static_cast<int>(groups.size()) > k) {
    // Candidate merges by descending cosine, ties by lowest (i, j).
    struct Candidate {
      double cosine;
      int i;
      int j;
    };
    std::vector<Candidate> candidates;
    for (int i = 0; i < static_cast<int>(groups.size()); ++i) {
      for (int j = i + 1; j < static_cast<int>(groups.size()); ++j) {
        if (groups[i].size + groups[j].size > capacity) continue;
        candidates.push_back({Cosine(groups[i].vector, groups[j].vector), i, j});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.cosine > b.cosine; });
    bool merged = false;
    for (const auto& cand : candidates) {
      std::vector<Group> next = groups;
      Group& into = next[cand.i];
      const Group& from = next[cand.j];
      into.communities.insert(into.communities.end(), from.communities.begin(),
                              from.communities.end());
      into.size += from.size;
      for (size_t t = 0; t < classes; ++t) into.vector[t] += from.vector[t];
      next.erase(next.begin() + cand.j);
      // Reject merges after which the remaining groups cannot be packed into K.
      auto packing = packing_of(next);
      if (packing.empty()) continue;
      groups = std::move(next);
      fallback = std::move(packing);
      merged = true;
      break;
    }
    if (!merged) {
      // Finish along the last verified packing.
      std::vector<Group> packed(k);
      for (size_t g = 0; g < groups.size(); ++g) {
        auto& bin = packed[fallback[g]];
        bin.communities.insert(bin.communities.end(), groups[g].communities.begin(),
                               groups[g].communities.end());
        bin.size += groups[g].size;
      }
      groups = std::move(packed);
    }
  }

  std::vector<int> group_of(m, -1);
  // Client ids ordered by each group's smallest community index.
  std::vector<int> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return *std::min_element(groups[a].communities.begin(), groups[a].communities.end()) <
           *std::min_element(groups[b].communities.begin(), groups[b].communities.end());
  });
  for (int client = 0; client < static_cast<int>(order.size()); ++client) {
    for (int c : groups[order[client]].communities) group_of[c] = client;
  }
  return FromGrouping(comms, group_of, k);
}

}  // namespace fgl
