#pragma once

#include <filesystem>

#include "fgl/graph/graph.h"

namespace fgl {

struct IngestReport {
  EdgeBuildStats edges;
};

// Reads edges.csv, features.csv, labels.csv and the optional masks.json from
// `dir`. Labels may be -1 (unlabeled); num_classes is max label + 1.
Graph LoadSubgraphDataset(const std::filesystem::path& dir,
                          IngestReport* report = nullptr);

// Writes the layout read by LoadSubgraphDataset. masks.json is always written.
void WriteSubgraphDataset(const std::filesystem::path& dir, const Graph& g);

// One JSON object per line: {"edges": [[u,v],...], "num_nodes": n,
// "features": [[...],...], "label": int} or "target": real.
GraphCollection LoadGraphCollection(const std::filesystem::path& file);

void WriteGraphCollection(const std::filesystem::path& file,
                          const GraphCollection& collection);

}  // namespace fgl
