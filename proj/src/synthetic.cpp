#include "infomotif/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace infomotif::synthetic {
namespace {

SparseMatrix random_features(std::size_t n, const FeatureSpec& fs, Rng& rng) {
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<std::size_t> cols(fs.dim);
  std::iota(cols.begin(), cols.end(), 0);
  const std::size_t k = std::min(fs.active, fs.dim);
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<std::size_t> pick;
    std::sample(cols.begin(), cols.end(), std::back_inserter(pick), k, rng);
    for (std::size_t c : pick)
      trip.emplace_back(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(c), 1.0);
  }
  SparseMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(fs.dim));
  x.setFromTriplets(trip.begin(), trip.end());
  return x;
}

std::vector<int> random_labels(std::size_t n, int classes, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, classes - 1);
  std::vector<int> y(n);
  for (int& c : y) c = pick(rng);
  return y;
}

SparseMatrix from_rows(const std::vector<std::vector<int>>& rows, std::size_t dim) {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t v = 0; v < rows.size(); ++v)
    for (int c : rows[v]) trip.emplace_back(static_cast<Eigen::Index>(v), c, 1.0);
  SparseMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  x.setFromTriplets(trip.begin(), trip.end());
  return x;
}

}  // namespace

AttributedGraph barabasi_albert(std::size_t n, std::size_t m, std::uint64_t seed, const FeatureSpec& fs) {
  if (m == 0 || n <= m) throw ContractError("barabasi_albert: need 0 < m < n");
  Rng rng(seed);
  std::vector<Edge> edges;
  // endpoint list doubles as the degree-proportional sampling urn
  std::vector<NodeId> urn;
  for (std::size_t v = 0; v < m; ++v) urn.push_back(static_cast<NodeId>(v));  // seed nodes, weight 1 each
  for (std::size_t v = m; v < n; ++v) {
    std::set<NodeId> targets;
    std::uniform_int_distribution<std::size_t> pick(0, urn.size() - 1);
    while (targets.size() < m) targets.insert(urn[pick(rng)]);
    for (NodeId u : targets) {
      edges.emplace_back(u, static_cast<NodeId>(v));
      urn.push_back(u);
      urn.push_back(static_cast<NodeId>(v));
    }
  }
  SparseMatrix x = random_features(n, fs, rng);
  auto y = random_labels(n, fs.num_classes, rng);
  return AttributedGraph::build("ba-" + std::to_string(n) + "-" + std::to_string(m), n, false, std::move(edges),
                                std::move(x), std::move(y), fs.num_classes);
}

AttributedGraph erdos_renyi(std::size_t n, double p, bool directed, std::uint64_t seed, const FeatureSpec& fs) {
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = directed ? 0 : u + 1; v < n; ++v)
      if (u != v && coin(rng)) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  SparseMatrix x = random_features(n, fs, rng);
  auto y = random_labels(n, fs.num_classes, rng);
  return AttributedGraph::build("er", n, directed, std::move(edges), std::move(x), std::move(y), fs.num_classes);
}

AttributedGraph homophilous(std::size_t n, std::uint64_t seed, double p_in, double p_out) {
  Rng rng(seed);
  constexpr std::size_t kDim = 16;
  std::vector<int> y(n);
  for (std::size_t v = 0; v < n; ++v) y[v] = v < n / 2 ? 0 : 1;
  std::shuffle(y.begin(), y.end(), rng);
  std::bernoulli_distribution in(p_in), out(p_out);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (y[u] == y[v] ? in(rng) : out(rng)) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  // class c owns columns [8c, 8c+8); rows draw 3 bits, each from the own block with prob 0.7
  std::bernoulli_distribution own(0.7);
  std::uniform_int_distribution<int> bit(0, 7);
  std::vector<std::vector<int>> rows(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::set<int> s;
    while (s.size() < 3) s.insert(8 * (own(rng) ? y[v] : 1 - y[v]) + bit(rng));
    rows[v].assign(s.begin(), s.end());
  }
  return AttributedGraph::build("homophilous-" + std::to_string(n), n, false, std::move(edges), from_rows(rows, kDim),
                                std::move(y), 2);
}

MirrorGraph mirror_graph(std::uint64_t seed) {
  // both classes use the same two colours (columns 0, 1); only their
  // arrangement differs. column 2 marks bridge nodes, 3-5 are noise.
  constexpr std::size_t kDim = 6;
  constexpr int kRed = 0, kBlue = 1;
  Rng rng(seed);
  std::bernoulli_distribution noisy(0.3);
  std::uniform_int_distribution<int> noise_col(3, 5);
  std::vector<std::vector<int>> rows;
  std::vector<int> y;
  std::vector<Edge> edges;
  auto node = [&](int colour, int label) {
    std::vector<int> cols{colour};
    if (noisy(rng)) cols.push_back(noise_col(rng));
    rows.push_back(std::move(cols));
    y.push_back(label);
    return static_cast<NodeId>(rows.size() - 1);
  };
  MirrorGraph out;
  const int near = out.near_class, far = out.distant_class;
  std::vector<NodeId> near_nodes, far_nodes;

  // near class: chain of stars, red hub with blue leaves (wedges only)
  std::vector<NodeId> hubs;
  for (int s = 0; s < 5; ++s) {
    NodeId hub = node(kRed, near);
    near_nodes.push_back(hub);
    if (!hubs.empty()) edges.emplace_back(hubs.back(), hub);
    hubs.push_back(hub);
    for (int l = 0; l < 4; ++l) {
      NodeId leaf = node(kBlue, near);
      near_nodes.push_back(leaf);
      edges.emplace_back(hub, leaf);
    }
  }
  // bridge path to the far region
  NodeId prev = hubs.back();
  for (int b = 0; b < 3; ++b) {
    NodeId v = node(2, near);
    edges.emplace_back(prev, v);
    prev = v;
  }
  // far class: red hubs closing blue pairs into triangles
  auto windmill = [&](NodeId hub, int blades, std::vector<NodeId>* members) {
    for (int t = 0; t < blades; ++t) {
      NodeId a = node(kBlue, far), b = node(kBlue, far);
      if (members) {
        members->push_back(a);
        members->push_back(b);
      }
      edges.emplace_back(hub, a);
      edges.emplace_back(hub, b);
      edges.emplace_back(a, b);
    }
  };
  NodeId last_hub = prev;
  for (int w = 0; w < 4; ++w) {
    NodeId hub = node(kRed, far);
    far_nodes.push_back(hub);
    edges.emplace_back(last_hub, hub);
    last_hub = hub;
    windmill(hub, 2, &far_nodes);
  }
  // mirror: a far-style red hub with triangles, wired into the near stars
  NodeId c = node(kRed, far);
  windmill(c, 2, nullptr);
  edges.emplace_back(c, hubs[0]);
  edges.emplace_back(c, hubs[1]);

  const std::size_t n = rows.size();
  out.graph = AttributedGraph::build("mirror-" + std::to_string(seed), n, false, std::move(edges),
                                     from_rows(rows, kDim), std::move(y), 2);
  out.mirror = c;

  // two thirds of each region train, the rest validate
  for (auto* region : {&near_nodes, &far_nodes}) {
    std::shuffle(region->begin(), region->end(), rng);
    const std::size_t k = region->size() * 2 / 3;
    out.split.train.insert(out.split.train.end(), region->begin(), region->begin() + static_cast<long>(k));
    out.split.val.insert(out.split.val.end(), region->begin() + static_cast<long>(k), region->end());
  }
  std::sort(out.split.train.begin(), out.split.train.end());
  std::sort(out.split.val.begin(), out.split.val.end());
  out.split.test = {c};
  out.split.seed = seed;
  out.split.train_ratio = static_cast<double>(out.split.train.size()) / static_cast<double>(n);

  // hops from the mirror to the nearest far-class training node
  for (std::size_t k = 1; k <= n; ++k) {
    auto ball = khop_neighborhood(out.graph, c, k);
    bool hit = std::any_of(out.split.train.begin(), out.split.train.end(), [&](NodeId v) {
      return out.graph.label(v) == far && std::binary_search(ball.begin(), ball.end(), v);
    });
    if (hit) {
      out.class_distance = k;
      break;
    }
  }
  return out;
}

AttributedGraph toy_graph(std::uint64_t seed, bool directed) {
  constexpr std::size_t kNodes = 12, kDim = 5;
  std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}, {4, 5}, {5, 3}, {5, 6},
                          {6, 7}, {7, 8}, {8, 6}, {8, 9}, {9, 10}, {10, 11}, {1, 4}, {0, 11}};
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t v = 0; v < kNodes; ++v)
    for (std::size_t c = 0; c < kDim; ++c)
      trip.emplace_back(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(c), gauss(rng));
  SparseMatrix x(kNodes, kDim);
  x.setFromTriplets(trip.begin(), trip.end());
  std::vector<int> y{0, 0, 0, 1, 1, 1, 2, 2, 2, 0, 1, 2};
  return AttributedGraph::build("toy", kNodes, directed, std::move(edges), std::move(x), std::move(y), 3);
}

}  // namespace infomotif::synthetic
