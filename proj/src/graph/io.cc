#include "fgl/graph/io.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <fstream>
#include "json.hpp"
#include <string>
#include <string_view>

#include "fgl/common/error.h"

namespace fgl {
namespace {

using nlohmann::json;

std::string Location(const std::filesystem::path& file, size_t line) {
  return file.filename().string() + ":" + std::to_string(line);
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

template <typename T>
bool ParseNumber(std::string_view text, T& out) {
  text = Trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

template <typename T>
std::vector<T> ParseRow(std::string_view line, const std::filesystem::path& file,
                        size_t line_no) {
  std::vector<T> values;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    std::string_view field = line.substr(
        start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    T value{};
    if (!ParseNumber(field, value)) {
      throw Error(ErrorCode::kParse, Location(file, line_no) + ": malformed field '" +
                                         std::string(Trim(field)) + "'");
    }
    values.push_back(value);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

std::ifstream OpenInput(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + file.string());
  return in;
}

std::ofstream OpenOutput(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + file.string());
  return out;
}

// Calls fn(line, line_no) for every non-blank line.
template <typename Fn>
void ForEachLine(const std::filesystem::path& file, Fn&& fn) {
  auto in = OpenInput(file);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    fn(std::string_view(line), line_no);
  }
}

Mask MaskFromJson(const json& doc, const char* key, int n,
                  const std::filesystem::path& file) {
  Mask mask(n, 0);
  if (!doc.contains(key)) return mask;
  for (const auto& idx : doc.at(key)) {
    if (!idx.is_number_integer()) {
      throw Error(ErrorCode::kParse, file.filename().string() + ": " + key +
                                         " entries must be integers");
    }
    const auto v = idx.get<int64_t>();
    if (v < 0 || v >= n) {
      throw Error(ErrorCode::kBounds, file.filename().string() + ": " + key +
                                          " index " + std::to_string(v) +
                                          " out of range");
    }
    mask[v] = 1;
  }
  return mask;
}

json IndicesJson(const Graph& g, const Mask& mask) {
  return json(g.MaskIndices(mask));
}

}  // namespace

Graph LoadSubgraphDataset(const std::filesystem::path& dir, IngestReport* report) {
  Graph g;

  const auto labels_file = dir / "labels.csv";
  ForEachLine(labels_file, [&](std::string_view line, size_t line_no) {
    int y = 0;
    if (!ParseNumber(line, y) || y < kUnlabeled) {
      throw Error(ErrorCode::kParse, Location(labels_file, line_no) +
                                         ": malformed label '" +
                                         std::string(Trim(line)) + "'");
    }
    g.labels.push_back(y);
  });
  g.num_nodes = static_cast<int>(g.labels.size());
  for (int y : g.labels) g.num_classes = std::max(g.num_classes, y + 1);

  const auto features_file = dir / "features.csv";
  std::vector<double> values;
  size_t rows = 0;
  size_t dim = 0;
  ForEachLine(features_file, [&](std::string_view line, size_t line_no) {
    auto row = ParseRow<double>(line, features_file, line_no);
    if (rows == 0) {
      dim = row.size();
    } else if (row.size() != dim) {
      throw Error(ErrorCode::kShape, Location(features_file, line_no) + ": row has " +
                                         std::to_string(row.size()) +
                                         " columns, expected " + std::to_string(dim));
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  });
  if (rows != static_cast<size_t>(g.num_nodes)) {
    throw Error(ErrorCode::kShape, "features.csv has " + std::to_string(rows) +
                                       " rows but labels.csv has " +
                                       std::to_string(g.num_nodes));
  }
  g.features = Matrix(rows, dim);
  g.features.data() = std::move(values);

  const auto edges_file = dir / "edges.csv";
  std::vector<Edge> edges;
  ForEachLine(edges_file, [&](std::string_view line, size_t line_no) {
    auto row = ParseRow<int64_t>(line, edges_file, line_no);
    if (row.size() != 2) {
      throw Error(ErrorCode::kParse,
                  Location(edges_file, line_no) + ": expected 'src,dst'");
    }
    for (auto idx : row) {
      if (idx < 0 || idx >= g.num_nodes) {
        throw Error(ErrorCode::kBounds, Location(edges_file, line_no) + ": node " +
                                            std::to_string(idx) +
                                            " out of range for " +
                                            std::to_string(g.num_nodes) + " nodes");
      }
    }
    edges.emplace_back(static_cast<int>(row[0]), static_cast<int>(row[1]));
  });
  EdgeBuildStats stats = g.SetEdges(edges);
  if (stats.warnings() > 0) {
    spdlog::warn("{}: dropped {} duplicate edges and {} self-loops",
                 edges_file.string(), stats.duplicate_edges, stats.self_loops);
  }
  if (report != nullptr) report->edges = stats;

  const auto masks_file = dir / "masks.json";
  if (std::filesystem::exists(masks_file)) {
    json doc;
    try {
      doc = json::parse(OpenInput(masks_file));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, "masks.json: " + std::string(e.what()));
    }
    g.train_mask = MaskFromJson(doc, "train", g.num_nodes, masks_file);
    g.val_mask = MaskFromJson(doc, "val", g.num_nodes, masks_file);
    g.test_mask = MaskFromJson(doc, "test", g.num_nodes, masks_file);
  }
  g.EnsureMasks();
  g.Validate();
  return g;
}

void WriteSubgraphDataset(const std::filesystem::path& dir, const Graph& g) {
  std::filesystem::create_directories(dir);
  {
    auto out = OpenOutput(dir / "edges.csv");
    for (auto [u, v] : g.EdgeList()) out << u << ',' << v << '\n';
  }
  {
    auto out = OpenOutput(dir / "features.csv");
    for (size_t r = 0; r < g.features.rows(); ++r) {
      auto row = g.features.row(r);
      out << fmt::format("{}", fmt::join(row, ",")) << '\n';
    }
  }
  {
    auto out = OpenOutput(dir / "labels.csv");
    for (int y : g.labels) out << y << '\n';
  }
  json masks = {{"train", IndicesJson(g, g.train_mask)},
                {"val", IndicesJson(g, g.val_mask)},
                {"test", IndicesJson(g, g.test_mask)}};
  OpenOutput(dir / "masks.json") << masks.dump() << '\n';
}

GraphCollection LoadGraphCollection(const std::filesystem::path& file) {
  GraphCollection coll;
  enum class Kind { kUnknown, kLabel, kTarget } kind = Kind::kUnknown;
  ForEachLine(file, [&](std::string_view line, size_t line_no) {
    const std::string where = Location(file, line_no);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, where + ": " + e.what());
    }
    try {
      Graph g;
      g.num_nodes = doc.at("num_nodes").get<int>();
      if (g.num_nodes < 0) throw Error(ErrorCode::kFormat, where + ": negative num_nodes");
      const auto& feats = doc.at("features");
      if (feats.size() != static_cast<size_t>(g.num_nodes)) {
        throw Error(ErrorCode::kShape, where + ": features has " +
                                           std::to_string(feats.size()) +
                                           " rows, expected " +
                                           std::to_string(g.num_nodes));
      }
      const size_t dim = feats.empty() ? 0 : feats.front().size();
      g.features = Matrix(g.num_nodes, dim);
      for (size_t r = 0; r < feats.size(); ++r) {
        if (feats[r].size() != dim) {
          throw Error(ErrorCode::kShape, where + ": ragged feature rows");
        }
        for (size_t c = 0; c < dim; ++c) g.features(r, c) = feats[r][c].get<double>();
      }
      if (!coll.graphs.empty() && static_cast<int>(dim) != coll.feature_dim()) {
        throw Error(ErrorCode::kShape, where + ": feature_dim " + std::to_string(dim) +
                                           " differs from " +
                                           std::to_string(coll.feature_dim()));
      }
      std::vector<Edge> edges;
      for (const auto& e : doc.at("edges")) {
        edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      }
      try {
        g.SetEdges(edges);
      } catch (const Error& e) {
        throw Error(e.code(), where + ": " + e.what());
      }
      g.EnsureMasks();

      const bool has_label = doc.contains("label");
      const bool has_target = doc.contains("target");
      if (has_label == has_target) {
        throw Error(ErrorCode::kFormat, where + ": need exactly one of label/target");
      }
      const Kind line_kind = has_label ? Kind::kLabel : Kind::kTarget;
      if (kind != Kind::kUnknown && kind != line_kind) {
        throw Error(ErrorCode::kFormat, where + ": mixes label and target lines");
      }
      kind = line_kind;
      if (has_label) {
        const int y = doc.at("label").get<int>();
        if (y < 0) throw Error(ErrorCode::kFormat, where + ": negative graph label");
        coll.graph_labels.push_back(y);
        coll.num_classes = std::max(coll.num_classes, y + 1);
      } else {
        coll.graph_targets.push_back(doc.at("target").get<double>());
      }
      coll.graphs.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, where + ": " + e.what());
    }
  });
  coll.Validate();
  return coll;
}

void WriteGraphCollection(const std::filesystem::path& file,
                          const GraphCollection& collection) {
  auto out = OpenOutput(file);
  for (size_t i = 0; i < collection.size(); ++i) {
    const Graph& g = collection.graphs[i];
    json doc;
    json edges = json::array();
    for (auto [u, v] : g.EdgeList()) edges.push_back({u, v});
    doc["edges"] = std::move(edges);
    doc["num_nodes"] = g.num_nodes;
    json feats = json::array();
    for (size_t r = 0; r < g.features.rows(); ++r) {
      auto row = g.features.row(r);
      feats.push_back(std::vector<double>(row.begin(), row.end()));
    }
    doc["features"] = std::move(feats);
    if (collection.is_regression()) {
      doc["target"] = collection.graph_targets[i];
    } else {
      doc["label"] = collection.graph_labels[i];
    }
    out << doc.dump() << '\n';
  }
}

}  // namespace fgl
