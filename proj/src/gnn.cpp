#include "infomotif/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace infomotif {

using namespace ad;

GraphOperators make_operators(const AttributedGraph& g) {
  GraphOperators ops;
  ops.adjacency = std::make_shared<const SparseMatrix>(normalized_adjacency(g).matrix);
  ops.features = std::make_shared<const SparseMatrix>(g.features());
  ops.num_nodes = g.num_nodes();
  ops.num_features = g.num_features();
  return ops;
}

Matrix glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-r, r);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

void init_gcn(ParameterSet& ps, std::size_t num_features, const GcnConfig& cfg, Rng& rng) {
  if (cfg.hidden.empty()) throw ContractError("GCN needs at least one layer");
  auto in = static_cast<Eigen::Index>(num_features);
  for (std::size_t l = 0; l < cfg.hidden.size(); ++l) {
    ps.add("gcn.W" + std::to_string(l + 1), glorot(in, cfg.hidden[l], rng));
    in = cfg.hidden[l];
  }
}

void init_classifier(ParameterSet& ps, Eigen::Index dim, int num_classes, Rng& rng) {
  ps.add("cls.W", glorot(dim, num_classes, rng));
  ps.add("cls.b", Matrix::Zero(1, num_classes));
}

SparseMatrix select_rows(const SparseMatrix& m, std::span<const NodeId> rows) {
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (SparseMatrix::InnerIterator it(m, rows[i]); it; ++it)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
  SparseMatrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

namespace {

// Inverted dropout on the stored nonzeros of a constant sparse input.
SparsePtr sparse_dropout(Tape& tape, const SparsePtr& x, double rate) {
  if (!tape.train() || rate == 0.0) return x;
  tape.mark_stochastic();
  auto out = std::make_shared<SparseMatrix>(*x);
  std::bernoulli_distribution keep(1.0 - rate);
  const double inv = 1.0 / (1.0 - rate);
  double* v = out->valuePtr();
  for (Eigen::Index i = 0; i < out->nonZeros(); ++i) v[i] = keep(tape.rng()) ? v[i] * inv : 0.0;
  return out;
}

// Rows of `m`, with columns renumbered onto the sorted set of columns they touch.
struct Block {
  SparsePtr m;
  std::vector<NodeId> cols;
};

Block restrict_block(const SparseMatrix& m, std::span<const NodeId> rows) {
  Block b;
  for (NodeId r : rows)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) b.cols.push_back(static_cast<NodeId>(it.col()));
  std::sort(b.cols.begin(), b.cols.end());
  b.cols.erase(std::unique(b.cols.begin(), b.cols.end()), b.cols.end());
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (SparseMatrix::InnerIterator it(m, rows[i]); it; ++it) {
      const auto j = std::lower_bound(b.cols.begin(), b.cols.end(), static_cast<NodeId>(it.col())) - b.cols.begin();
      trip.emplace_back(static_cast<int>(i), static_cast<int>(j), it.value());
    }
  auto out = std::make_shared<SparseMatrix>(static_cast<Eigen::Index>(rows.size()),
                                            static_cast<Eigen::Index>(b.cols.size()));
  out->setFromTriplets(trip.begin(), trip.end());
  b.m = std::move(out);
  return b;
}

}  // namespace

Var forward_base(Tape& tape, const GraphOperators& ops, ParameterSet& ps, const GcnConfig& cfg,
                 std::optional<std::span<const NodeId>> rows) {
  const std::size_t k = cfg.hidden.size();
  Parameter& w1 = ps.at("gcn.W1");
  if (static_cast<std::size_t>(w1.value.rows()) != ops.num_features)
    throw ShapeError("forward_base: gcn.W1 expects " + std::to_string(w1.value.rows()) + " features, graph has " +
                     std::to_string(ops.num_features));
  if (!rows) {
    // layer 1 on sparse X: Â (X W1)
    Var h = spmm(ops.adjacency, spmm(sparse_dropout(tape, ops.features, cfg.dropout), tape.param(w1)));
    for (std::size_t l = 2; l <= k; ++l) {
      h = dropout(relu(h), cfg.dropout);
      h = matmul(spmm(ops.adjacency, h), tape.param(ps.at("gcn.W" + std::to_string(l))));
    }
    return h;
  }

  // Only the receptive field of the requested rows is computed, so a batch
  // costs what its k-hop ball costs rather than what the graph costs.
  std::vector<Block> blocks(k);
  std::vector<NodeId> need(rows->begin(), rows->end());
  for (std::size_t l = k; l >= 1; --l) {
    blocks[l - 1] = restrict_block(*ops.adjacency, need);
    need = blocks[l - 1].cols;
  }
  auto x = std::make_shared<const SparseMatrix>(select_rows(*ops.features, need));
  Var h = spmm(blocks[0].m, spmm(sparse_dropout(tape, x, cfg.dropout), tape.param(w1)));
  for (std::size_t l = 2; l <= k; ++l) {
    h = dropout(relu(h), cfg.dropout);
    // aggregate first: the block has no more rows than columns
    h = matmul(spmm(blocks[l - 1].m, h), tape.param(ps.at("gcn.W" + std::to_string(l))));
  }
  return h;
}

Var classifier_logits(Tape& tape, const Var& z, ParameterSet& ps) {
  return add_row(matmul(z, tape.param(ps.at("cls.W"))), tape.param(ps.at("cls.b")));
}

Var classify(Tape& tape, const Var& z, ParameterSet& ps) { return row_softmax(classifier_logits(tape, z, ps)); }

}  // namespace infomotif
