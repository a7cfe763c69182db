#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "infomotif/common.hpp"
#include "infomotif/graph.hpp"

namespace infomotif {

using Triple = std::array<NodeId, 3>;

/// 6-bit adjacency code of a 3-node pattern. Bit k is set when the ordered
/// position pair kPositionPairs[k] is an edge; undirected patterns set both
/// directions.
using MotifCode = std::uint8_t;

inline constexpr std::array<std::pair<int, int>, 6> kPositionPairs = {
    {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}};

/// Lexicographically minimal code over all 6 position permutations.
MotifCode canonical_code(MotifCode code);

struct MotifPattern {
  std::string id;    // "M1" ...
  std::string name;  // human-readable, e.g. "feed-forward loop"
  bool directed = false;
  std::vector<std::pair<int, int>> edges;  // over positions {0,1,2}
  MotifCode code = 0;                      // canonical

  /// Builds a pattern, validating positions and connectivity.
  static MotifPattern make(std::string id, std::string name, bool directed,
                           std::vector<std::pair<int, int>> edges);
};

/// Ordered set of pairwise non-isomorphic 3-node patterns of one directedness,
/// sorted by canonical code.
class MotifRegistry {
 public:
  MotifRegistry() = default;
  explicit MotifRegistry(std::vector<MotifPattern> patterns);

  std::size_t size() const noexcept { return patterns_.size(); }
  bool directed() const noexcept { return directed_; }
  const MotifPattern& operator[](std::size_t t) const { return patterns_[t]; }
  std::span<const MotifPattern> patterns() const noexcept { return patterns_; }

  /// Index of the pattern with this canonical code, or -1.
  int find(MotifCode canonical) const { return lookup_[canonical]; }

 private:
  std::vector<MotifPattern> patterns_;
  std::array<int, 64> lookup_{};
  bool directed_ = false;
};

/// directed: {chain, convergent, divergent, feed-forward loop, 3-cycle};
/// undirected: {wedge, triangle}.
MotifRegistry default_registry(bool directed);

/// JSON array of {"id", "directed", "edges": [[i, j], ...]} (optional "name").
MotifRegistry load_registry(const std::filesystem::path& file);
void save_registry(const MotifRegistry& reg, const std::filesystem::path& file);
std::uint64_t registry_checksum(const MotifRegistry& reg);

struct MotifInstance {
  Triple nodes;  // ascending
  int motif = 0;
  bool operator==(const MotifInstance&) const = default;
};

/// Code of the subgraph induced on a sorted triple, in registry directedness.
MotifCode triple_code(const AttributedGraph& g, const Triple& sorted, bool directed);

/// All enumerated instances with per-node lookup.
class InstanceIndex {
 public:
  InstanceIndex() = default;
  InstanceIndex(std::size_t num_nodes, std::vector<std::vector<Triple>> per_motif);

  std::size_t num_motifs() const noexcept { return triples_.size(); }
  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t count(int motif) const { return triples_[static_cast<std::size_t>(motif)].size(); }

  /// Sorted instance triples of a motif.
  std::span<const Triple> triples(int motif) const { return triples_[static_cast<std::size_t>(motif)]; }

  /// Indices (into triples(motif)) of the instances containing v.
  std::span<const std::uint32_t> instance_ids(int motif, NodeId v) const;
  std::size_t degree(int motif, NodeId v) const { return instance_ids(motif, v).size(); }
  std::vector<MotifInstance> instances(int motif, NodeId v) const;

  /// Membership test for a sorted triple.
  bool contains(int motif, const Triple& sorted) const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<std::vector<Triple>> triples_;
  std::vector<std::vector<std::uint32_t>> offsets_;
  std::vector<std::vector<std::uint32_t>> ids_;
};

/// Edge-centred enumeration of every connected induced 3-node subgraph matching
/// a registry pattern. Output is identical for any thread count.
InstanceIndex enumerate_instances(const AttributedGraph& g, const MotifRegistry& reg,
                                  unsigned threads = 1);

/// O(n^3) reference enumeration used as a test oracle (n <= 200).
std::vector<std::vector<Triple>> brute_force_instances(const AttributedGraph& g,
                                                        const MotifRegistry& reg);
std::vector<std::size_t> brute_force_count(const AttributedGraph& g, const MotifRegistry& reg);

inline constexpr std::size_t kBruteForceMaxNodes = 200;

/// min(q, |I_v|) distinct instances drawn uniformly without replacement.
std::vector<MotifInstance> sample_positive(const InstanceIndex& index, int motif, NodeId v,
                                           std::size_t q, Rng& rng);

struct NegativeSample {
  Triple nodes;  // {anchor, r1, r2}
  bool exhausted = false;  // every try hit a recorded instance; last draw kept
  int attempts = 0;
};

inline constexpr int kNegativeMaxTries = 10;

/// Replaces the two non-anchor nodes of `positive` with distinct uniform draws
/// from V \ {v}, resampling when the result is itself an instance of the motif.
NegativeSample sample_negative(const AttributedGraph& g, const InstanceIndex& index, int motif,
                               NodeId v, const MotifInstance& positive, Rng& rng);

}  // namespace infomotif
