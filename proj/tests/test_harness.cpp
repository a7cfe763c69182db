#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "infomotif/harness.hpp"
#include "infomotif/synthetic.hpp"

using namespace infomotif;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("infomotif_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// path 0-1-2-3-4 plus isolated node 5
AttributedGraph path_graph(SparseMatrix x) {
  std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
  return AttributedGraph::build("path", 6, false, e, std::move(x), {0, 1, 0, 1, 0, 1}, 2);
}

SparseMatrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix d(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (auto row : r) {
    Eigen::Index j = 0;
    for (double v : row) d(i, j++) = v;
    ++i;
  }
  return d.sparseView();
}

}  // namespace

TEST(Synthetic, BarabasiAlbertEdgeCountAndDegrees) {
  for (std::size_t m : {1u, 2u, 4u}) {
    auto g = synthetic::barabasi_albert(300, m, 7);
    EXPECT_EQ(g.num_undirected_edges(), 300 * m - m * m) << m;
    for (NodeId v = static_cast<NodeId>(m); v < 300; ++v) EXPECT_GE(g.degree(v), m);
    EXPECT_EQ(g.num_features(), 64u);
  }
  EXPECT_THROW(synthetic::barabasi_albert(5, 5, 0), ContractError);
  EXPECT_THROW(synthetic::barabasi_albert(5, 0, 0), ContractError);
}

TEST(Synthetic, BarabasiAlbertIsSeedDeterministic) {
  auto a = synthetic::barabasi_albert(200, 3, 1), b = synthetic::barabasi_albert(200, 3, 1);
  auto c = synthetic::barabasi_albert(200, 3, 2);
  EXPECT_TRUE(std::equal(a.edges().begin(), a.edges().end(), b.edges().begin(), b.edges().end()));
  EXPECT_FALSE(std::equal(a.edges().begin(), a.edges().end(), c.edges().begin(), c.edges().end()));
}

TEST(Synthetic, ErdosRenyiDensityNearP) {
  auto g = synthetic::erdos_renyi(200, 0.1, true, 3);
  const double pairs = 200.0 * 199.0;
  EXPECT_NEAR(static_cast<double>(g.num_edges()) / pairs, 0.1, 0.01);
  EXPECT_TRUE(g.directed());
}

TEST(Synthetic, HomophilousGraphIsAssortative) {
  auto g = synthetic::homophilous(200, 4);
  std::size_t same = 0, total = 0;
  for (auto [u, v] : g.edges()) {
    same += g.label(u) == g.label(v);
    ++total;
  }
  EXPECT_GT(static_cast<double>(same) / static_cast<double>(total), 0.8);
  EXPECT_EQ(g.num_classes(), 2);
}

TEST(Synthetic, MirrorGraphLayout) {
  auto mg = synthetic::mirror_graph(0);
  EXPECT_EQ(mg.split.test, std::vector<NodeId>{mg.mirror});
  EXPECT_EQ(mg.graph.label(mg.mirror), mg.distant_class);
  EXPECT_GE(mg.class_distance, 4u);
  // the mirror touches the near class but no labeled distant node
  bool near = false;
  std::set<NodeId> labeled(mg.split.train.begin(), mg.split.train.end());
  labeled.insert(mg.split.val.begin(), mg.split.val.end());
  for (NodeId u : mg.graph.neighbors(mg.mirror)) {
    if (!labeled.count(u)) continue;
    near |= mg.graph.label(u) == mg.near_class;
    EXPECT_NE(mg.graph.label(u), mg.distant_class);
  }
  EXPECT_TRUE(near);
}

TEST(ToyGradCheck, BelowTolerance) {
  for (bool directed : {false, true}) {
    auto r = harness::toy_gradcheck(0, directed);
    EXPECT_LT(r.max_rel_error, 1e-4) << directed;
    EXPECT_GE(r.parts.size(), 3u);
    EXPECT_EQ(r.parts.front().name, "L_S");
    EXPECT_EQ(r.parts.back().name, "combined");
  }
}

TEST(Stats, PopulationMeanAndStd) {
  auto s = harness::summarize({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0});
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.std, 2.0);
  auto one = harness::summarize({3.5});
  EXPECT_EQ(one.std, 0.0);
}

TEST(Manifest, RoundTrip) {
  harness::RunManifest m;
  m.config.lr = 0.005;
  m.config.q = 7;
  m.config.gcn.hidden = {32, 8};
  m.config.no_novelty = true;
  m.dataset = "toy";
  m.dataset_checksum = 0xdeadbeefcafeULL;
  m.registry_checksum = 42;
  m.train_ratio = 0.3;
  m.seeds = {0, 1, 9};
  m.out = "runs/x";
  auto dir = scratch("manifest");
  harness::write_manifest(m, dir / "manifest.json");
  auto r = harness::read_manifest(dir / "manifest.json");
  EXPECT_EQ(r.to_json(), m.to_json());
  EXPECT_EQ(r.config.gcn.hidden, m.config.gcn.hidden);
  EXPECT_EQ(r.dataset_checksum, m.dataset_checksum);
  EXPECT_TRUE(r.config.no_novelty);
}

TEST(Manifest, WrongFormatIsRejected) {
  auto dir = scratch("manifest_bad");
  std::ofstream(dir / "m.json") << R"({"format":"something.else","version":1})";
  EXPECT_THROW(harness::read_manifest(dir / "m.json"), FormatError);
}

TEST(Variants, AblationFlags) {
  auto v = harness::ablation_variants();
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v[0].name, "full");
  TrainConfig cfg;
  for (const auto& x : v) {
    auto c = harness::apply(cfg, x);
    EXPECT_EQ(c.no_novelty, x.no_novelty);
    EXPECT_EQ(c.no_task_weights, x.no_task_weights);
    EXPECT_FALSE(c.base_only);
  }
  EXPECT_TRUE(v[3].no_novelty && v[3].no_task_weights);
}

TEST(Quartiles, LabelFractionCountsTwoHopBall) {
  auto g = path_graph(rows({{1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}}));
  Split s;
  s.train = {1, 4};
  std::vector<NodeId> nodes{0, 2, 5};
  auto f = harness::label_fraction(g, s, nodes);
  EXPECT_DOUBLE_EQ(f[0], 0.5);        // ball {1,2}
  EXPECT_DOUBLE_EQ(f[1], 2.0 / 4.0);  // ball {0,1,3,4}
  EXPECT_EQ(f[2], 0.0);               // isolated
}

TEST(Quartiles, DiversityZeroRowsAndIdenticalRows) {
  auto g = path_graph(rows({{1, 0}, {1, 0}, {0, 0}, {0, 1}, {0, 1}, {1, 1}}));
  std::vector<NodeId> nodes{0, 2, 4, 5};
  auto d = harness::attribute_diversity(g, nodes);
  EXPECT_DOUBLE_EQ(d[0], 0.5);  // identical to 1, zero row at 2
  EXPECT_DOUBLE_EQ(d[1], 1.0);  // itself zero
  EXPECT_DOUBLE_EQ(d[2], 0.5);  // identical to 3, zero row at 2
  EXPECT_EQ(d[3], 0.0);
}

TEST(Quartiles, BucketSizesDifferByAtMostOne) {
  auto g = synthetic::barabasi_albert(103, 2, 5);
  std::vector<NodeId> nodes(103);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::vector<double> vals(103);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = static_cast<double>((i * 37) % 11);
  std::vector<int> pred(g.labels().begin(), g.labels().end()), wrong(pred);
  for (int& p : wrong) p = (p + 1) % g.num_classes();
  auto r = harness::quartile_analysis("x", vals, nodes, g, pred, wrong);
  ASSERT_EQ(r.buckets.size(), 4u);
  std::size_t total = 0, mn = 1000, mx = 0;
  for (std::size_t b = 0; b < 4; ++b) {
    const auto& q = r.buckets[b];
    total += q.count;
    mn = std::min(mn, q.count);
    mx = std::max(mx, q.count);
    EXPECT_EQ(q.acc_full, 1.0);
    EXPECT_EQ(q.acc_base, 0.0);
    EXPECT_LE(q.lo, q.hi);
    if (b) EXPECT_LE(r.buckets[b - 1].hi, q.lo);
  }
  EXPECT_EQ(total, 103u);
  EXPECT_LE(mx - mn, 1u);
}

TEST(Quartiles, ConstantStatisticIsDegenerate) {
  auto g = path_graph(rows({{1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}}));
  Split s;  // nobody trains: every fraction is 0
  std::vector<NodeId> nodes{0, 1, 2, 3, 4, 5};
  auto f = harness::label_fraction(g, s, nodes);
  std::vector<int> pred(g.labels().begin(), g.labels().end());
  auto r = harness::quartile_analysis("label_fraction", f, nodes, g, pred, pred);
  EXPECT_TRUE(r.degenerate);
  ASSERT_EQ(r.buckets.size(), 1u);
  EXPECT_EQ(r.buckets[0].count, 6u);
}

TEST(Runs, RunOnceWritesArtifactsAndReloads) {
  auto ds = harness::wrap_graph(synthetic::homophilous(60, 8));
  TrainConfig cfg;
  cfg.gcn.hidden = {8, 8};
  cfg.epochs = 4;
  cfg.q = 3;
  auto dir = scratch("run");
  auto out = harness::run_once(ds, 0.4, 2, cfg, "full", dir);
  EXPECT_EQ(out.summary.epochs_run, static_cast<int>(out.result.history.size()));
  EXPECT_TRUE(fs::exists(dir / "full-seed2.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "full-seed2.split.json"));
  ASSERT_TRUE(fs::exists(dir / "full-seed2.ckpt.json"));

  std::ifstream log(dir / "full-seed2.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(log, line)) {
    auto j = harness::json::parse(line);
    EXPECT_TRUE(j.contains("L_S") && j.contains("L_MI") && j.contains("val_acc"));
    ++n;
  }
  EXPECT_EQ(n, out.result.history.size());

  // checkpoint restores the selected model exactly
  harness::json meta;
  ModelState m = init_model(ds.graph, ds.index.num_motifs(), cfg);
  m.params.restore(ad::load_checkpoint(dir / "full-seed2.ckpt.json", &meta));
  auto e = evaluate(m, ds.graph, ds.ops, load_split(dir / "full-seed2.split.json"));
  EXPECT_EQ(e.test_acc, out.summary.test_acc);
  EXPECT_EQ(meta["test_acc"].get<double>(), out.summary.test_acc);
}
