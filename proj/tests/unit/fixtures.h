#pragma once

#include <unistd.h>

#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "fgl/graph/graph.h"

namespace fgl::testing {

inline Graph MakeGraph(int n, const std::vector<Edge>& edges,
                       std::vector<int> labels = {}, int feature_dim = 1) {
  Graph g;
  g.num_nodes = n;
  g.SetEdges(edges);
  g.features = Matrix(n, feature_dim);
  for (int v = 0; v < n; ++v) {
    for (int c = 0; c < feature_dim; ++c) g.features(v, c) = v + 0.5 * c;
  }
  g.labels = labels.empty() ? std::vector<int>(n, kUnlabeled) : std::move(labels);
  for (int y : g.labels) g.num_classes = std::max(g.num_classes, y + 1);
  g.EnsureMasks();
  return g;
}

// Two cliques of `size` nodes each, nodes [0,size) and [size,2*size),
// joined by the single bridge (size-1, size).
inline Graph TwoCliquesBridge(int size) {
  std::vector<Edge> edges;
  for (int base : {0, size}) {
    for (int i = 0; i < size; ++i) {
      for (int j = i + 1; j < size; ++j) edges.emplace_back(base + i, base + j);
    }
  }
  edges.emplace_back(size - 1, size);
  std::vector<int> labels(2 * size);
  for (int v = 0; v < 2 * size; ++v) labels[v] = v < size ? 0 : 1;
  return MakeGraph(2 * size, edges, labels);
}

inline Graph RandomGraph(int n, double p, uint64_t seed, int num_classes = 2,
                         int feature_dim = 3) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      if (unit(gen) < p) edges.emplace_back(u, v);
    }
  }
  std::vector<int> labels(n);
  for (auto& y : labels) y = static_cast<int>(gen() % num_classes);
  Graph g = MakeGraph(n, edges, labels, feature_dim);
  for (auto& x : g.features.data()) x = unit(gen) * 2.0 - 1.0;
  return g;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fgl_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void WriteText(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file);
  out << text;
}

}  // namespace fgl::testing
