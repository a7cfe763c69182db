#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "infomotif/optim.hpp"
#include "infomotif/regularizer.hpp"
#include "infomotif/synthetic.hpp"

using namespace infomotif;
using namespace infomotif::ad;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One motif's parameters with random values, D = 4.
ParameterSet motif_params(std::uint64_t seed, Eigen::Index d = 4, std::size_t motifs = 1) {
  ParameterSet ps;
  Rng rng(seed);
  init_motif_params(ps, motifs, d, rng);
  ps.at("gate.0.b").value = random_matrix(1, d, seed + 1, 0.3);
  return ps;
}

std::vector<NodeId> identity_local(std::size_t n) {
  std::vector<NodeId> l(n);
  std::iota(l.begin(), l.end(), 0);
  return l;
}

struct ToyBatch {
  AttributedGraph g = synthetic::toy_graph(2);
  InstanceIndex index = enumerate_instances(g, default_registry(false));
  MotifBatch batch;
  ToyBatch(std::size_t motif, std::size_t q, std::uint64_t seed) {
    std::vector<NodeId> all(g.num_nodes());
    std::iota(all.begin(), all.end(), 0);
    Rng rng(seed);
    batch = sample_motif_batch(g, index, motif, all, q, rng);
  }
};

// Straight transcription of the per-node loss with explicit loops.
std::vector<double> per_node_oracle(const Matrix& h, const MotifBatch& b, const Matrix& a, const Matrix& wd) {
  const Eigen::Index d = h.cols();
  auto encode = [&](NodeId anchor, const Triple& tri) {
    double score[3], mx = -1e300;
    for (int i = 0; i < 3; ++i) {
      score[i] = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) score[i] += a(k, 0) * h(tri[i], k) + a(d + k, 0) * h(anchor, k);
      mx = std::max(mx, score[i]);
    }
    double z = 0.0;
    for (double& s : score) z += (s = std::exp(s - mx));
    std::vector<double> e(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < 3; ++i)
      for (Eigen::Index k = 0; k < d; ++k) e[static_cast<std::size_t>(k)] += score[i] / z * h(tri[i], k);
    return e;
  };
  auto disc = [&](const std::vector<double>& e, const std::vector<double>& s) {
    double x = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) x += e[static_cast<std::size_t>(i)] * wd(i, j) * s[static_cast<std::size_t>(j)];
    return sigma(x);
  };
  std::vector<double> out;
  for (std::size_t gi = 0; gi < b.anchors.size(); ++gi) {
    const NodeId v = b.anchors[gi];
    std::vector<std::vector<double>> pos, neg;
    for (std::size_t k = 0; k < b.group.size(); ++k)
      if (b.group[k] == gi) {
        pos.push_back(encode(v, b.positives[k]));
        neg.push_back(encode(v, b.negatives[k]));
      }
    std::vector<double> s(static_cast<std::size_t>(d), 0.0);
    for (const auto& e : pos)
      for (std::size_t k = 0; k < s.size(); ++k) s[k] += e[k] / static_cast<double>(pos.size());
    for (double& x : s) x = sigma(x);
    double total = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i)
      total += std::log(disc(pos[i], s)) + std::log(1.0 - disc(neg[i], s));
    out.push_back(-total / (2.0 * static_cast<double>(pos.size())));
  }
  return out;
}

}  // namespace

TEST(Gate, ZeroWeightsHalveInput) {
  ParameterSet ps = motif_params(1);
  ps.at("gate.0.W").value.setZero();
  ps.at("gate.0.b").value.setZero();
  Matrix h = random_matrix(5, 4, 2);
  Tape t;
  EXPECT_TRUE(gate(t, t.constant(h), ps, 0).value().isApprox(0.5 * h, 1e-15));
}

TEST(Gate, SaturatedBiasPassesInput) {
  ParameterSet ps = motif_params(1);
  ps.at("gate.0.W").value.setZero();
  ps.at("gate.0.b").value.setConstant(20.0);
  Matrix h = random_matrix(5, 4, 3);
  Tape t;
  EXPECT_LT((gate(t, t.constant(h), ps, 0).value() - h).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Gate, NeverAmplifies) {
  ParameterSet ps = motif_params(4);
  Matrix h = random_matrix(20, 4, 5, 3.0);
  Tape t;
  Matrix out = gate(t, t.constant(h), ps, 0).value();
  EXPECT_TRUE((out.cwiseAbs().array() <= h.cwiseAbs().array()).all());
}

TEST(Encoder, IdenticalRowsReproduceTheRow) {
  ParameterSet ps = motif_params(6);
  Matrix h(3, 4);
  h.rowwise() = random_matrix(1, 4, 7).row(0);
  InstanceRows rows;
  rows.push(0, {0, 1, 2});
  Tape t;
  Matrix e = encode_instances(t, t.constant(h), rows, ps, 0).value();
  EXPECT_TRUE(e.row(0).isApprox(h.row(0), 1e-14));
}

TEST(Encoder, ZeroAttentionGivesMean) {
  ParameterSet ps = motif_params(8);
  ps.at("enc.0.a").value.setZero();
  Matrix h = random_matrix(6, 4, 9);
  InstanceRows rows;
  rows.push(4, {4, 1, 5});
  rows.push(2, {0, 2, 3});
  Tape t;
  Matrix e = encode_instances(t, t.constant(h), rows, ps, 0).value();
  EXPECT_TRUE(e.row(0).isApprox((h.row(4) + h.row(1) + h.row(5)) / 3.0, 1e-14));
  EXPECT_TRUE(e.row(1).isApprox((h.row(0) + h.row(2) + h.row(3)) / 3.0, 1e-14));
}

TEST(Encoder, OutputInsideConvexHull) {
  ParameterSet ps = motif_params(10);
  ps.at("enc.0.a").value *= 5.0;
  Matrix h = random_matrix(9, 4, 11, 2.0);
  InstanceRows rows;
  for (NodeId k = 0; k < 3; ++k) rows.push(3 * k, {3 * k, 3 * k + 1, 3 * k + 2});
  Tape t;
  Matrix e = encode_instances(t, t.constant(h), rows, ps, 0).value();
  for (Eigen::Index r = 0; r < 3; ++r) {
    Matrix tri = h.middleRows(3 * r, 3);
    for (Eigen::Index c = 0; c < 4; ++c) {
      EXPECT_GE(e(r, c), tri.col(c).minCoeff() - 1e-14);
      EXPECT_LE(e(r, c), tri.col(c).maxCoeff() + 1e-14);
    }
  }
}

TEST(Readout, SingleInstanceIsSigmoid) {
  Matrix e = random_matrix(1, 4, 12);
  std::vector<std::size_t> group{0};
  Tape t;
  Matrix s = readout(t, t.constant(e), group, 1).value();
  for (Eigen::Index c = 0; c < 4; ++c) EXPECT_NEAR(s(0, c), sigma(e(0, c)), 1e-15);
}

TEST(Readout, OppositeInstancesGiveHalf) {
  Matrix x = random_matrix(1, 4, 13);
  Matrix e(2, 4);
  e << x, -x;
  std::vector<std::size_t> group{0, 0};
  Tape t;
  EXPECT_TRUE(readout(t, t.constant(e), group, 1).value().isApprox(Matrix::Constant(1, 4, 0.5), 1e-15));
}

TEST(Readout, OrderInvariant) {
  Matrix e = random_matrix(5, 4, 14);
  Matrix rev = e.colwise().reverse();
  std::vector<std::size_t> group{0, 0, 1, 1, 1}, group_rev{1, 1, 1, 0, 0};
  Tape t;
  Matrix a = readout(t, t.constant(e), group, 2).value();
  Matrix b = readout(t, t.constant(rev), group_rev, 2).value();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Readout, EmptyGroupIsContractError) {
  Matrix e = random_matrix(2, 4, 15);
  std::vector<std::size_t> group{0, 0};
  Tape t;
  EXPECT_THROW(readout(t, t.constant(e), group, 2), ContractError);
}

TEST(Discriminator, IdentityOnUnitVector) {
  ParameterSet ps = motif_params(16);
  ps.at("disc.0.W").value.setIdentity();
  Matrix u = Matrix::Zero(1, 4);
  u(0, 2) = 1.0;
  std::vector<NodeId> group{0};
  Tape t;
  EXPECT_NEAR(discriminate(t, t.constant(u), t.constant(u), group, ps, 0).scalar(), 0.7310585786300049, 1e-15);
}

TEST(Discriminator, ZeroMatrixGivesHalf) {
  ParameterSet ps = motif_params(17);
  ps.at("disc.0.W").value.setZero();
  std::vector<NodeId> group{0, 1, 0};
  Tape t;
  Matrix p = discriminate(t, t.constant(random_matrix(3, 4, 18)), t.constant(random_matrix(2, 4, 19)), group, ps, 0)
                 .value();
  EXPECT_TRUE(p.isApprox(Matrix::Constant(3, 1, 0.5), 1e-15));
}

TEST(Discriminator, BilinearGradientMatchesFiniteDifferences) {
  ParameterSet ps = motif_params(20);
  Matrix e = random_matrix(3, 4, 21), s = random_matrix(2, 4, 22);
  std::vector<NodeId> group{1, 0, 1};
  Matrix y(3, 1);
  y << 1, 0, 1;
  auto params = ps.select({"disc."});
  auto rep = grad_check(
      [&](Tape& t) { return sum(bce_prob(discriminate(t, t.constant(e), t.constant(s), group, ps, 0), y)); }, params);
  EXPECT_LT(rep.max_rel_error, 1e-7);
}

TEST(SampleBatch, PairsAndSkips) {
  ToyBatch tb(1, 2, 23);  // triangles
  const auto& b = tb.batch;
  std::size_t with = 0;
  for (std::size_t v = 0; v < tb.g.num_nodes(); ++v) with += tb.index.degree(1, static_cast<NodeId>(v)) > 0;
  EXPECT_EQ(b.anchors.size(), with);
  EXPECT_EQ(b.skipped, tb.g.num_nodes() - with);
  for (std::size_t i = 0; i < b.anchors.size(); ++i)
    EXPECT_EQ(b.pairs[i], std::min<std::size_t>(2, tb.index.degree(1, b.anchors[i])));
  for (std::size_t k = 0; k < b.positives.size(); ++k) {
    const NodeId v = b.anchors[b.group[k]];
    EXPECT_TRUE(tb.index.contains(1, b.positives[k]));
    EXPECT_EQ(b.negatives[k][0], v);
  }
}

TEST(MiLoss, ZeroDiscriminatorGivesLogTwo) {
  ToyBatch tb(0, 3, 24);
  ParameterSet ps = motif_params(25);
  ps.at("disc.0.W").value.setZero();
  std::vector<double> w(tb.batch.anchors.size(), 1.0);
  auto local = identity_local(tb.g.num_nodes());
  Tape t;
  auto term = mi_loss(t, t.constant(random_matrix(12, 4, 26)), tb.batch, local, w, ps);
  for (Eigen::Index i = 0; i < term.per_node.rows(); ++i) EXPECT_NEAR(term.per_node.value()(i, 0), std::log(2.0), 1e-15);
  EXPECT_NEAR(term.loss.scalar(), std::log(2.0) * static_cast<double>(w.size()), 1e-12);
}

TEST(MiLoss, MatchesScalarLoopOracle) {
  for (std::size_t motif : {0u, 1u}) {
    ToyBatch tb(motif, 3, 27 + motif);
    ParameterSet ps = motif_params(28, 4, 2);
    const std::string id = std::to_string(motif);
    Matrix& a = ps.at("enc." + id + ".a").value;
    Matrix& wd = ps.at("disc." + id + ".W").value;
    a = random_matrix(8, 1, 29);
    wd = random_matrix(4, 4, 30);
    Matrix h = random_matrix(12, 4, 31);
    std::vector<double> w(tb.batch.anchors.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.1 * static_cast<double>(i + 1);
    auto local = identity_local(tb.g.num_nodes());
    Tape t;
    auto term = mi_loss(t, t.constant(h), tb.batch, local, w, ps);
    auto oracle = per_node_oracle(h, tb.batch, a, wd);
    ASSERT_EQ(oracle.size(), static_cast<std::size_t>(term.per_node.rows()));
    double weighted = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      EXPECT_NEAR(term.per_node.value()(static_cast<Eigen::Index>(i), 0), oracle[i], 1e-12);
      weighted += w[i] * oracle[i];
    }
    EXPECT_NEAR(term.loss.scalar(), weighted, 1e-12);
  }
}

TEST(MiLoss, InvariantToPairOrder) {
  ToyBatch tb(0, 3, 32);
  ParameterSet ps = motif_params(33);
  Matrix h = random_matrix(12, 4, 34);
  MotifBatch rev = tb.batch;
  std::reverse(rev.group.begin(), rev.group.end());
  std::reverse(rev.positives.begin(), rev.positives.end());
  std::reverse(rev.negatives.begin(), rev.negatives.end());
  std::vector<double> w(tb.batch.anchors.size(), 1.0);
  auto local = identity_local(12);
  Tape t;
  Matrix a = mi_loss(t, t.constant(h), tb.batch, local, w, ps).per_node.value();
  Matrix b = mi_loss(t, t.constant(h), rev, local, w, ps).per_node.value();
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(MiLoss, FiniteAndNonNegative) {
  ToyBatch tb(0, 5, 35);
  ParameterSet ps = motif_params(36);
  ps.at("disc.0.W").value *= 50.0;  // push probabilities into the clamp
  std::vector<double> w(tb.batch.anchors.size(), 1.0);
  auto local = identity_local(12);
  Tape t;
  auto term = mi_loss(t, t.constant(random_matrix(12, 4, 37, 5.0)), tb.batch, local, w, ps);
  EXPECT_TRUE(term.per_node.value().allFinite());
  EXPECT_GE(term.per_node.value().minCoeff(), 0.0);
}

TEST(MiLoss, GradientMatchesFiniteDifferences) {
  ToyBatch tb(0, 3, 38);
  ParameterSet ps = motif_params(39);
  ps.add("h", random_matrix(12, 4, 40));
  std::vector<double> w(tb.batch.anchors.size(), 0.25);
  auto local = identity_local(12);
  auto params = ps.select();
  auto rep = grad_check(
      [&](Tape& t) { return mi_loss(t, gate(t, t.param(ps.at("h")), ps, 0), tb.batch, local, w, ps).loss; }, params);
  EXPECT_LT(rep.max_rel_error, 1e-6) << rep.worst_param;
}

// The discriminator is shared: its gradient is the sum of every anchor's share.
TEST(MiLoss, SharedDiscriminatorAccumulatesEveryNode) {
  ToyBatch tb(0, 3, 41);
  ParameterSet ps = motif_params(42);
  Matrix h = random_matrix(12, 4, 43);
  auto local = identity_local(12);
  const std::size_t m = tb.batch.anchors.size();
  ASSERT_GT(m, 1u);
  auto grad_with = [&](std::vector<double> w) {
    Tape t;
    auto term = mi_loss(t, t.constant(h), tb.batch, local, w, ps);
    return gradients(t, term.loss, ps)["disc.0.W"];
  };
  Matrix total = grad_with(std::vector<double>(m, 1.0));
  Matrix summed = Matrix::Zero(4, 4);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> w(m, 0.0);
    w[i] = 1.0;
    Matrix gi = grad_with(w);
    nonzero += gi.cwiseAbs().maxCoeff() > 0.0;
    summed += gi;
  }
  EXPECT_EQ(nonzero, m);
  EXPECT_LT((total - summed).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(MiLoss, MissingLocalRowIsContractError) {
  ToyBatch tb(0, 3, 44);
  ParameterSet ps = motif_params(45);
  auto local = identity_local(12);
  local[static_cast<std::size_t>(tb.batch.positives[0][1])] = -1;
  std::vector<double> w(tb.batch.anchors.size(), 1.0);
  Tape t;
  EXPECT_THROW(mi_loss(t, t.constant(random_matrix(12, 4, 46)), tb.batch, local, w, ps), ContractError);
}

TEST(MiLoss, NoAnchorsContributesZero) {
  MotifBatch empty;
  ParameterSet ps = motif_params(47);
  std::vector<double> w;
  auto local = identity_local(12);
  Tape t;
  auto term = mi_loss(t, t.constant(random_matrix(12, 4, 48)), empty, local, w, ps);
  EXPECT_EQ(term.loss.scalar(), 0.0);
  EXPECT_EQ(term.per_node.rows(), 0);
}
