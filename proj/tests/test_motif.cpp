#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "infomotif/motif.hpp"

using namespace infomotif;

namespace {

AttributedGraph make_graph(std::size_t n, std::vector<Edge> edges, bool directed) {
  SparseMatrix x(static_cast<Eigen::Index>(n), 1);
  return AttributedGraph::build("t", n, directed, std::move(edges), std::move(x), std::vector<int>(n, 0), 1);
}

AttributedGraph erdos_renyi(std::size_t n, double p, std::uint64_t seed, bool directed) {
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> e;
  for (NodeId u = 0; u < static_cast<NodeId>(n); ++u)
    for (NodeId v = 0; v < static_cast<NodeId>(n); ++v)
      if (u != v && (directed || u < v) && coin(rng)) e.emplace_back(u, v);
  return make_graph(n, std::move(e), directed);
}

// Test-side isomorphism: does some bijection of pattern positions onto the
// triple make pattern edges coincide exactly with induced graph edges?
bool matches(const AttributedGraph& g, const Triple& t, const MotifPattern& pat) {
  std::array<int, 3> perm{0, 1, 2};
  do {
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i)
      for (int j = 0; j < 3 && ok; ++j) {
        if (i == j) continue;
        bool in_pattern = false;
        for (auto [a, b] : pat.edges)
          if ((a == i && b == j) || (!pat.directed && a == j && b == i)) in_pattern = true;
        const NodeId u = t[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        const NodeId w = t[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
        const bool in_graph = pat.directed ? g.has_edge(u, w) : g.adjacent(u, w);
        ok = in_pattern == in_graph;
      }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

std::vector<std::vector<Triple>> independent_oracle(const AttributedGraph& g, const MotifRegistry& reg) {
  std::vector<std::vector<Triple>> out(reg.size());
  const auto n = static_cast<NodeId>(g.num_nodes());
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      for (NodeId c = b + 1; c < n; ++c)
        for (std::size_t t = 0; t < reg.size(); ++t)
          if (matches(g, {a, b, c}, reg[t])) out[t].push_back({a, b, c});
  return out;
}

std::vector<std::vector<Triple>> as_lists(const InstanceIndex& idx) {
  std::vector<std::vector<Triple>> out;
  for (std::size_t t = 0; t < idx.num_motifs(); ++t) {
    auto s = idx.triples(static_cast<int>(t));
    out.emplace_back(s.begin(), s.end());
  }
  return out;
}

int motif_named(const MotifRegistry& reg, const std::string& name) {
  for (std::size_t t = 0; t < reg.size(); ++t)
    if (reg[t].name == name) return static_cast<int>(t);
  return -1;
}

}  // namespace

TEST(Registry, Defaults) {
  auto u = default_registry(false);
  EXPECT_EQ(u.size(), 2u);
  EXPECT_FALSE(u.directed());
  auto d = default_registry(true);
  EXPECT_EQ(d.size(), 5u);
  EXPECT_TRUE(d.directed());
  for (const auto* reg : {&u, &d}) {
    for (std::size_t t = 1; t < reg->size(); ++t) EXPECT_LT((*reg)[t - 1].code, (*reg)[t].code);
    for (std::size_t t = 0; t < reg->size(); ++t) EXPECT_EQ(canonical_code((*reg)[t].code), (*reg)[t].code);
  }
}

TEST(Registry, RejectsIsomorphicDuplicatesAndDisconnected) {
  auto a = MotifPattern::make("A", "chain", true, {{0, 1}, {1, 2}});
  auto b = MotifPattern::make("B", "chain2", true, {{2, 1}, {1, 0}});
  EXPECT_THROW(MotifRegistry({a, b}), ContractError);
  EXPECT_THROW(MotifPattern::make("C", "x", true, {{0, 1}}), ContractError);
  auto w = MotifPattern::make("W", "wedge", false, {{0, 1}, {1, 2}});
  EXPECT_THROW(MotifRegistry({a, w}), ContractError);
}

TEST(Registry, FileRoundTrip) {
  auto reg = default_registry(true);
  auto file = std::filesystem::temp_directory_path() / "infomotif_registry_test.json";
  save_registry(reg, file);
  auto back = load_registry(file);
  EXPECT_EQ(registry_checksum(reg), registry_checksum(back));
  ASSERT_EQ(back.size(), reg.size());
  for (std::size_t t = 0; t < reg.size(); ++t) EXPECT_EQ(back[t].code, reg[t].code);
  std::ofstream(file) << R"([{"id":"M1","directed":true,"edges":[[0,1],[1,2]]}])";
  EXPECT_EQ(load_registry(file).size(), 1u);
  std::filesystem::remove(file);
}

TEST(Enumerate, UndirectedTriangle) {
  auto g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, false);
  auto reg = default_registry(false);
  auto idx = enumerate_instances(g, reg);
  const int tri = motif_named(reg, "triangle");
  EXPECT_EQ(idx.count(tri), 1u);
  EXPECT_EQ(idx.count(1 - tri), 0u);
  for (NodeId v = 0; v < 3; ++v) EXPECT_EQ(idx.degree(tri, v), 1u);
}

TEST(Enumerate, FourCycle) {
  auto g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, false);
  auto reg = default_registry(false);
  auto idx = enumerate_instances(g, reg);
  EXPECT_EQ(idx.count(motif_named(reg, "wedge")), 4u);
  EXPECT_EQ(idx.count(motif_named(reg, "triangle")), 0u);
}

TEST(Enumerate, DirectedChainOnly) {
  auto g = make_graph(3, {{0, 1}, {1, 2}}, true);
  auto reg = default_registry(true);
  auto idx = enumerate_instances(g, reg);
  const int chain = motif_named(reg, "chain");
  ASSERT_GE(chain, 0);
  for (std::size_t t = 0; t < reg.size(); ++t)
    EXPECT_EQ(idx.count(static_cast<int>(t)), static_cast<int>(t) == chain ? 1u : 0u);
  EXPECT_EQ(independent_oracle(g, reg), as_lists(idx));
}

TEST(Enumerate, DirectedRegistryOnUndirectedGraphRefused) {
  auto g = make_graph(3, {{0, 1}}, false);
  EXPECT_THROW(enumerate_instances(g, default_registry(true)), ContractError);
}

TEST(BruteForce, K4AndEmpty) {
  auto k4 = make_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, false);
  auto reg = default_registry(false);
  auto c = brute_force_count(k4, reg);
  EXPECT_EQ(c[static_cast<std::size_t>(motif_named(reg, "triangle"))], 4u);
  EXPECT_EQ(c[static_cast<std::size_t>(motif_named(reg, "wedge"))], 0u);  // induced: K4 has no open wedge
  auto empty = make_graph(5, {}, false);
  for (auto x : brute_force_count(empty, reg)) EXPECT_EQ(x, 0u);
  EXPECT_THROW(brute_force_count(make_graph(kBruteForceMaxNodes + 1, {}, false), reg), ContractError);
}

// K4 has 12 non-induced wedges (paths of length 2). Induced census counts 0.
TEST(BruteForce, K4NonInducedWedgeCountForReference) {
  auto k4 = make_graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, false);
  std::size_t paths = 0;
  for (NodeId v = 0; v < 4; ++v) paths += k4.degree(v) * (k4.degree(v) - 1) / 2;
  EXPECT_EQ(paths, 12u);
}

TEST(Enumerate, MatchesOraclesOnRandomGraphs) {
  std::size_t checked = 0;
  for (bool directed : {false, true}) {
    auto reg = default_registry(directed);
    for (double p : {0.05, 0.1, 0.3}) {
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t n = 10 + seed % 51;  // 10..60
        auto g = erdos_renyi(n, p, seed * 31 + static_cast<std::uint64_t>(p * 100) + directed, directed);
        auto idx = enumerate_instances(g, reg);
        auto lists = as_lists(idx);
        EXPECT_EQ(lists, brute_force_instances(g, reg));
        if (seed % 5 == 0) EXPECT_EQ(lists, independent_oracle(g, reg));
        ++checked;
      }
    }
  }
  EXPECT_EQ(checked, 300u);
}

TEST(Enumerate, PerNodeSumsAreThreeTimesTotals) {
  auto g = erdos_renyi(60, 0.15, 5, false);
  auto reg = default_registry(false);
  auto idx = enumerate_instances(g, reg);
  for (std::size_t t = 0; t < reg.size(); ++t) {
    std::size_t s = 0;
    for (NodeId v = 0; v < 60; ++v) {
      s += idx.degree(static_cast<int>(t), v);
      for (const auto& inst : idx.instances(static_cast<int>(t), v)) {
        EXPECT_TRUE(std::find(inst.nodes.begin(), inst.nodes.end(), v) != inst.nodes.end());
        EXPECT_TRUE(idx.contains(static_cast<int>(t), inst.nodes));
      }
    }
    EXPECT_EQ(s, 3 * idx.count(static_cast<int>(t)));
  }
}

TEST(Enumerate, RelabelingInvariance) {
  for (bool directed : {false, true}) {
    auto reg = default_registry(directed);
    auto g = erdos_renyi(50, 0.1, 77, directed);
    std::vector<NodeId> pi(50);
    std::iota(pi.begin(), pi.end(), 0);
    Rng rng(3);
    std::shuffle(pi.begin(), pi.end(), rng);
    std::vector<Edge> e2;
    for (auto [u, v] : g.edges()) e2.emplace_back(pi[static_cast<std::size_t>(u)], pi[static_cast<std::size_t>(v)]);
    auto h = make_graph(50, e2, directed);
    auto a = enumerate_instances(g, reg);
    auto b = enumerate_instances(h, reg);
    for (std::size_t t = 0; t < reg.size(); ++t) {
      ASSERT_EQ(a.count(static_cast<int>(t)), b.count(static_cast<int>(t)));
      for (const Triple& tr : a.triples(static_cast<int>(t))) {
        Triple m{pi[static_cast<std::size_t>(tr[0])], pi[static_cast<std::size_t>(tr[1])],
                 pi[static_cast<std::size_t>(tr[2])]};
        std::sort(m.begin(), m.end());
        EXPECT_TRUE(b.contains(static_cast<int>(t), m));
      }
    }
  }
}

TEST(Enumerate, ThreadCountDoesNotChangeOutput) {
  auto g = erdos_renyi(200, 0.05, 9, true);
  auto reg = default_registry(true);
  auto one = as_lists(enumerate_instances(g, reg, 1));
  for (unsigned th : {2u, 3u, 8u}) EXPECT_EQ(as_lists(enumerate_instances(g, reg, th)), one);
}

TEST(SamplePositive, SmallAndEmpty) {
  auto g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, false);
  auto reg = default_registry(false);
  auto idx = enumerate_instances(g, reg);
  Rng rng(1);
  const int wedge = motif_named(reg, "wedge");
  EXPECT_EQ(sample_positive(idx, wedge, 0, 20, rng).size(), 3u);
  EXPECT_TRUE(sample_positive(idx, 1 - wedge, 0, 20, rng).empty());
  EXPECT_THROW(sample_positive(idx, wedge, 0, 0, rng), ContractError);
}

TEST(SamplePositive, UniformWithoutReplacement) {
  // star with 15 leaves: centre is in C(15,2) = 105 wedges
  std::vector<Edge> e;
  for (NodeId i = 1; i <= 15; ++i) e.emplace_back(0, i);
  auto g = make_graph(16, e, false);
  auto reg = default_registry(false);
  auto idx = enumerate_instances(g, reg);
  const int wedge = motif_named(reg, "wedge");
  ASSERT_EQ(idx.degree(wedge, 0), 105u);
  std::map<Triple, int> freq;
  Rng rng(42);
  const int draws = 2000;
  for (int r = 0; r < draws; ++r) {
    auto s = sample_positive(idx, wedge, 0, 20, rng);
    ASSERT_EQ(s.size(), 20u);
    std::set<Triple> uniq;
    for (auto& m : s) uniq.insert(m.nodes);
    EXPECT_EQ(uniq.size(), 20u);
    for (auto& t : uniq) ++freq[t];
  }
  ASSERT_EQ(freq.size(), 105u);
  const double expected = draws * 20.0 / 105.0;
  double chi2 = 0;
  for (auto& [t, f] : freq) chi2 += (f - expected) * (f - expected) / expected;
  // df = 104; the 0.999 quantile is about 157. Without-replacement sampling
  // only shrinks the variance.
  EXPECT_LT(chi2, 157.0);
}

TEST(SampleNegative, TriangleExhausts) {
  auto g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}}, false);
  auto reg = default_registry(false);
  auto idx = enumerate_instances(g, reg);
  const int tri = motif_named(reg, "triangle");
  Rng rng(0);
  auto pos = idx.instances(tri, 1).front();
  auto neg = sample_negative(g, idx, tri, 1, pos, rng);
  EXPECT_TRUE(neg.exhausted);
  EXPECT_EQ(neg.attempts, kNegativeMaxTries);
  EXPECT_EQ(neg.nodes[0], 1);
}

TEST(SampleNegative, Contracts) {
  auto g2 = make_graph(2, {{0, 1}}, false);
  auto reg = default_registry(false);
  auto idx2 = enumerate_instances(g2, reg);
  Rng rng(0);
  EXPECT_THROW(sample_negative(g2, idx2, 0, 0, MotifInstance{{0, 1, 1}, 0}, rng), ContractError);
  auto g = make_graph(4, {{0, 1}, {1, 2}}, false);
  auto idx = enumerate_instances(g, reg);
  EXPECT_THROW(sample_negative(g, idx, 0, 3, MotifInstance{{0, 1, 2}, 0}, rng), ContractError);
}

TEST(SampleNegative, AnchorKeptAndRejectionRateBounded) {
  auto g = erdos_renyi(400, 0.02, 5, false);
  auto reg = default_registry(false);
  auto idx = enumerate_instances(g, reg);
  const int wedge = motif_named(reg, "wedge");
  Rng rng(8);
  std::size_t draws = 0, rejected = 0;
  for (NodeId v = 0; v < 400; ++v) {
    for (const auto& pos : sample_positive(idx, wedge, v, 5, rng)) {
      auto neg = sample_negative(g, idx, wedge, v, pos, rng);
      EXPECT_EQ(neg.nodes[0], v);
      EXPECT_NE(neg.nodes[1], v);
      EXPECT_NE(neg.nodes[2], v);
      EXPECT_NE(neg.nodes[1], neg.nodes[2]);
      draws += static_cast<std::size_t>(neg.attempts);
      rejected += static_cast<std::size_t>(neg.attempts - (neg.exhausted ? 0 : 1));
    }
  }
  // probability a uniform triple anchored at v is a wedge, averaged over v
  double density = 0;
  for (NodeId v = 0; v < 400; ++v) density += static_cast<double>(idx.degree(wedge, v)) / (399.0 * 398.0 / 2.0);
  density /= 400.0;
  ASSERT_GT(draws, 0u);
  EXPECT_LT(static_cast<double>(rejected) / static_cast<double>(draws), density + 0.01);
}
