#pragma once
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gadnr/matrix.hpp"
#include "gadnr/tape.hpp"

namespace gadnr {

// Undirected, unweighted attributed graph. Immutable after construction;
// safe for concurrent reads.
struct AttributedGraph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // canonical: u < v, sorted, unique
  Matrix features;                         // Nxk
  std::optional<std::vector<int>> labels;  // 0/1 anomaly flags

  int feature_dim() const { return features.cols; }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_anomalies() const;
};

struct GraphBuildStats {
  int dropped_self_loops = 0;
  int dropped_duplicates = 0;
};

// Validates invariants, symmetrizes directed input, drops self-loops and
// duplicates. Every other constructor funnels through here.
AttributedGraph make_graph(int num_nodes, std::vector<std::pair<int, int>> raw_edges,
                           Matrix features, std::optional<std::vector<int>> labels,
                           GraphBuildStats* stats = nullptr);

AttributedGraph load_graph(const std::filesystem::path& edge_path,
                           const std::filesystem::path& feature_path,
                           const std::optional<std::filesystem::path>& label_path = std::nullopt,
                           GraphBuildStats* stats = nullptr);

// Writes edges.txt / features.csv / labels.txt (when present) plus
// manifest.json; returns the written paths. Reloading round-trips to an
// identical graph.
std::vector<std::filesystem::path> save_bundle(const AttributedGraph& g,
                                               const std::filesystem::path& dir);

// Loads a directory written by save_bundle.
AttributedGraph load_bundle(const std::filesystem::path& dir, GraphBuildStats* stats = nullptr);

// Per-node sorted adjacency in CSR layout.
struct NeighborIndex {
  std::vector<int> offsets;    // num_nodes + 1
  std::vector<int> neighbors;  // sorted within each node's range

  int degree(int u) const { return offsets[u + 1] - offsets[u]; }
  const int* begin(int u) const { return neighbors.data() + offsets[u]; }
  const int* end(int u) const { return neighbors.data() + offsets[u + 1]; }
};

NeighborIndex build_index(const AttributedGraph& g);

enum class AdjacencyMode { symmetric, row_mean };

// symmetric: D^{-1/2} (A + I) D^{-1/2} with D from A + I.
// row_mean:  rows average over the neighbor set; isolated nodes get a zero row.
ad::SparseMatrix normalized_adjacency(const AttributedGraph& g, AdjacencyMode mode);

}  // namespace gadnr
