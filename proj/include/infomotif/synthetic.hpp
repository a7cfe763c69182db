#pragma once

#include <cstdint>

#include "infomotif/graph.hpp"

namespace infomotif::synthetic {

struct FeatureSpec {
  std::size_t dim = 64;
  std::size_t active = 8;  // nonzeros per row (binary bag of words)
  int num_classes = 4;
};

/// Preferential attachment: each new node links to m distinct earlier nodes.
/// Labels and bag-of-words features are random (only structure matters here).
AttributedGraph barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed, const FeatureSpec& fs = {});

/// G(n, p); directed graphs draw each ordered pair independently.
AttributedGraph erdos_renyi(std::size_t n, double p, bool directed, std::uint64_t seed,
                            const FeatureSpec& fs = {});

/// Two-block stochastic block model with class-correlated but noisy features.
/// Intra-block edge probability p_in, inter-block p_out.
AttributedGraph homophilous(std::size_t n, std::uint64_t seed, double p_in = 0.25, double p_out = 0.02);

/// Two structure-attribute classes far apart, plus a mirror node that sits
/// next to the near class but copies the distant class's attributed motif.
struct MirrorGraph {
  AttributedGraph graph;
  Split split;  // test = {mirror}
  NodeId mirror = 0;
  int near_class = 0;
  int distant_class = 1;
  std::size_t class_distance = 0;  // hops between the mirror and the closest distant-class labeled node
};

MirrorGraph mirror_graph(std::uint64_t seed);

/// Fixed 12-node graph with triangles, wedges, and a pendant path; 5 real
/// features drawn from `seed`, 3 classes. Directed edges follow the listed
/// orientation when `directed`.
AttributedGraph toy_graph(std::uint64_t seed = 0, bool directed = false);

}  // namespace infomotif::synthetic
