#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infomotif/common.hpp"

namespace infomotif {

using Edge = std::pair<NodeId, NodeId>;

/// Compressed adjacency: neighbors of v are targets[offsets[v] .. offsets[v+1]), sorted.
struct Csr {
  std::vector<std::int64_t> offsets;
  std::vector<NodeId> targets;

  std::span<const NodeId> neighbors(NodeId v) const {
    return {targets.data() + offsets[v], static_cast<std::size_t>(offsets[v + 1] - offsets[v])};
  }
  std::size_t degree(NodeId v) const { return static_cast<std::size_t>(offsets[v + 1] - offsets[v]); }
  bool contains(NodeId u, NodeId v) const;

  static Csr from_pairs(std::size_t num_nodes, std::span<const Edge> pairs);
};

struct LoadReport {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
  std::size_t nodes_outside_component = 0;
};

/// Immutable simple graph with node attributes and optional labels.
///
/// Undirected graphs store each edge once as (min, max). Directed graphs store
/// (source, target); a reciprocal pair is two distinct edges. The undirected
/// view (`neighbors`) is always available and is what message passing uses.
class AttributedGraph {
 public:
  static constexpr int kUnlabeled = -1;

  AttributedGraph() = default;

  /// Validates and canonicalizes raw input. Self-loops and duplicate edges are
  /// dropped and counted in `report`.
  static AttributedGraph build(std::string name, std::size_t num_nodes, bool directed,
                               std::vector<Edge> edges, SparseMatrix features,
                               std::vector<int> labels, int num_classes,
                               LoadReport* report = nullptr);

  const std::string& name() const noexcept { return name_; }
  std::size_t num_nodes() const noexcept { return num_nodes_; }
  bool directed() const noexcept { return directed_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  /// Number of node pairs joined by at least one edge.
  std::size_t num_undirected_edges() const noexcept { return undirected_.targets.size() / 2; }

  std::span<const NodeId> neighbors(NodeId v) const { return undirected_.neighbors(v); }
  std::span<const NodeId> out_neighbors(NodeId v) const { return out_.neighbors(v); }
  std::span<const NodeId> in_neighbors(NodeId v) const { return in_.neighbors(v); }
  std::size_t degree(NodeId v) const { return undirected_.degree(v); }

  /// Directed edge test (for undirected graphs, symmetric).
  bool has_edge(NodeId u, NodeId v) const;
  bool adjacent(NodeId u, NodeId v) const { return undirected_.contains(u, v); }

  const SparseMatrix& features() const noexcept { return features_; }
  std::size_t num_features() const noexcept { return static_cast<std::size_t>(features_.cols()); }

  std::span<const int> labels() const noexcept { return labels_; }
  int label(NodeId v) const { return labels_[static_cast<std::size_t>(v)]; }
  int num_classes() const noexcept { return num_classes_; }
  std::vector<NodeId> labeled_nodes() const;

  /// Induced subgraph on `nodes` (relabelled in the given order).
  AttributedGraph induced_subgraph(std::span<const NodeId> nodes) const;

  /// Copy of this graph with a replaced feature matrix (same shape rows).
  AttributedGraph with_features(SparseMatrix features) const;

  bool operator==(const AttributedGraph& other) const;

 private:
  std::string name_;
  std::size_t num_nodes_ = 0;
  bool directed_ = false;
  std::vector<Edge> edges_;
  Csr out_, in_, undirected_;
  SparseMatrix features_;
  std::vector<int> labels_;
  int num_classes_ = 0;
};

/// Weakly connected components; returns the component id per node and the count.
std::pair<std::vector<int>, int> connected_components(const AttributedGraph& g);

/// Nodes of the largest (weakly) connected component, ascending. Ties go to the
/// component containing the smallest node id.
std::vector<NodeId> largest_component(const AttributedGraph& g);

/// Reads a canonical dataset directory (meta.json, edges.tsv, features.tsv |
/// features.csv | identity, labels.tsv) and restricts it to the largest
/// connected component.
AttributedGraph load_dataset(const std::filesystem::path& dir, LoadReport* report = nullptr);

/// Writes a graph in the canonical layout; load_dataset reads it back identically.
void save_dataset(const AttributedGraph& g, const std::filesystem::path& dir);

/// D^{-1/2} (A + I) D^{-1/2} over the undirected view, d = degree + 1.
struct NormalizedAdjacency {
  enum class Kind { kSymNormWithSelfLoops };
  SparseMatrix matrix;
  Kind kind = Kind::kSymNormWithSelfLoops;
};

NormalizedAdjacency normalized_adjacency(const AttributedGraph& g);

struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
  std::uint64_t seed = 0;
  double train_ratio = 0.0;
};

/// Fraction of labeled nodes held out for validation.
inline constexpr double kValidationFraction = 0.2;

/// Class-stratified split of the labeled nodes. |train| = round(ratio * L),
/// |val| = round(0.2 * L), test gets the rest.
Split generate_split(const AttributedGraph& g, double train_ratio, std::uint64_t seed);

void save_split(const Split& split, const std::filesystem::path& file);
Split load_split(const std::filesystem::path& file);

/// BFS ball of radius k around v over the undirected view (includes v), ascending.
std::vector<NodeId> khop_neighborhood(const AttributedGraph& g, NodeId v, std::size_t k);

/// Union of k-hop balls around every source, ascending.
std::vector<NodeId> khop_neighborhood(const AttributedGraph& g, std::span<const NodeId> sources,
                                      std::size_t k);

/// FNV-1a over the canonical serialization; stable across runs and platforms.
std::uint64_t graph_checksum(const AttributedGraph& g);

}  // namespace infomotif
