#include "infomotif/regularizer.hpp"

#include <string>

#include "infomotif/gnn.hpp"

namespace infomotif {

using namespace ad;

namespace {
std::string key(const char* kind, std::size_t t, const char* leaf) {
  return std::string(kind) + "." + std::to_string(t) + "." + leaf;
}
}  // namespace

void init_motif_params(ParameterSet& ps, std::size_t num_motifs, Eigen::Index dim, Rng& rng) {
  for (std::size_t t = 0; t < num_motifs; ++t) {
    ps.add(key("gate", t, "W"), glorot(dim, dim, rng));
    ps.add(key("gate", t, "b"), Matrix::Zero(1, dim));
    ps.add(key("enc", t, "a"), glorot(2 * dim, 1, rng));
    ps.add(key("disc", t, "W"), glorot(dim, dim, rng));
  }
}

Var gate(Tape& tape, const Var& h, ParameterSet& ps, std::size_t t) {
  Var pre = add_row(matmul(h, tape.param(ps.at(key("gate", t, "W")))), tape.param(ps.at(key("gate", t, "b"))));
  return mul(h, sigmoid(pre));
}

Var encode_instances(Tape& tape, const Var& gated, const InstanceRows& rows, ParameterSet& ps, std::size_t t) {
  if (rows.size() == 0) throw ContractError("encode_instances: no instances");
  const Eigen::Index d = gated.cols();
  Var a = tape.param(ps.at(key("enc", t, "a")));
  Var a_member = slice_rows(a, 0, d);
  Var a_anchor = slice_rows(a, d, d);
  Var s_member = matmul(gated, a_member);  // rows x 1
  Var s_anchor = gather_rows(matmul(gated, a_anchor), rows.anchor);
  std::vector<Var> scores;
  for (std::size_t i = 0; i < 3; ++i) scores.push_back(add(gather_rows(s_member, rows.nodes[i]), s_anchor));
  Var alpha = row_softmax(concat_cols(scores));
  return gather_combine(gated, rows.nodes, alpha);
}

Var readout(Tape& tape, const Var& e, std::span<const std::size_t> group, std::size_t num_groups) {
  (void)tape;
  if (group.size() != static_cast<std::size_t>(e.rows())) throw ShapeError("readout: group size mismatch");
  std::vector<std::size_t> count(num_groups, 0);
  for (auto gi : group) {
    if (gi >= num_groups) throw ContractError("readout: group id out of range");
    ++count[gi];
  }
  for (std::size_t gi = 0; gi < num_groups; ++gi)
    if (count[gi] == 0) throw ContractError("readout: group " + std::to_string(gi) + " has no instances");
  std::vector<Triplet> trip;
  trip.reserve(group.size());
  for (std::size_t k = 0; k < group.size(); ++k)
    trip.emplace_back(static_cast<int>(group[k]), static_cast<int>(k), 1.0 / static_cast<double>(count[group[k]]));
  auto seg = std::make_shared<SparseMatrix>(static_cast<Eigen::Index>(num_groups), e.rows());
  seg->setFromTriplets(trip.begin(), trip.end());
  return sigmoid(spmm(seg, e));
}

Var discriminate(Tape& tape, const Var& e, const Var& s, std::span<const NodeId> group, ParameterSet& ps,
                 std::size_t t) {
  // e·(W s): apply W once per summary, then gather
  Var ws = matmul(s, transpose(tape.param(ps.at(key("disc", t, "W")))));
  return sigmoid(row_dot(e, gather_rows(ws, group)));
}

MotifBatch sample_motif_batch(const AttributedGraph& g, const InstanceIndex& index, std::size_t motif,
                              std::span<const NodeId> candidates, std::size_t q, Rng& rng) {
  MotifBatch b;
  b.motif = motif;
  const int m = static_cast<int>(motif);
  for (NodeId v : candidates) {
    auto pos = sample_positive(index, m, v, q, rng);
    if (pos.empty()) {
      ++b.skipped;
      continue;
    }
    const std::size_t gi = b.anchors.size();
    b.anchors.push_back(v);
    b.pairs.push_back(pos.size());
    for (const auto& p : pos) {
      auto neg = sample_negative(g, index, m, v, p, rng);
      b.exhausted += neg.exhausted ? 1 : 0;
      b.group.push_back(gi);
      b.positives.push_back(p.nodes);
      b.negatives.push_back(neg.nodes);
    }
  }
  return b;
}

MiTerm mi_loss(Tape& tape, const Var& gated, const MotifBatch& batch, std::span<const NodeId> local,
               std::span<const double> weight, ParameterSet& ps) {
  if (weight.size() != batch.anchors.size()) throw ShapeError("mi_loss: one weight per anchor expected");
  if (batch.anchors.empty()) {
    Var zero = tape.constant(Matrix::Zero(1, 1));
    return {zero, tape.constant(Matrix::Zero(0, 1))};
  }
  auto loc = [&](NodeId u) {
    const NodeId r = local[static_cast<std::size_t>(u)];
    if (r < 0) throw ContractError("mi_loss: node " + std::to_string(u) + " missing from gated rows");
    return r;
  };
  InstanceRows pos, neg;
  for (std::size_t k = 0; k < batch.positives.size(); ++k) {
    const NodeId anchor = loc(batch.anchors[batch.group[k]]);
    const Triple& p = batch.positives[k];
    const Triple& n = batch.negatives[k];
    pos.push(anchor, {loc(p[0]), loc(p[1]), loc(p[2])});
    neg.push(anchor, {loc(n[0]), loc(n[1]), loc(n[2])});
  }
  const std::size_t t = batch.motif;
  Var e_pos = encode_instances(tape, gated, pos, ps, t);
  Var e_neg = encode_instances(tape, gated, neg, ps, t);
  Var s = readout(tape, e_pos, batch.group, batch.anchors.size());
  std::vector<NodeId> grp(batch.group.begin(), batch.group.end());
  std::array<Var, 2> probs{discriminate(tape, e_pos, s, grp, ps, t), discriminate(tape, e_neg, s, grp, ps, t)};
  Var p_all = concat_rows(probs);
  const auto m = static_cast<Eigen::Index>(batch.positives.size());
  Matrix target(2 * m, 1);
  target.topRows(m).setOnes();
  target.bottomRows(m).setZero();
  Var terms = bce_prob(p_all, target);

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(2 * m));
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto gi = batch.group[static_cast<std::size_t>(k)];
    const double c = 1.0 / (2.0 * static_cast<double>(batch.pairs[gi]));
    trip.emplace_back(static_cast<int>(gi), static_cast<int>(k), c);
    trip.emplace_back(static_cast<int>(gi), static_cast<int>(k + m), c);
  }
  auto seg = std::make_shared<SparseMatrix>(static_cast<Eigen::Index>(batch.anchors.size()), 2 * m);
  seg->setFromTriplets(trip.begin(), trip.end());
  Var per_node = spmm(seg, terms);
  Matrix w(1, static_cast<Eigen::Index>(weight.size()));
  for (std::size_t i = 0; i < weight.size(); ++i) w(0, static_cast<Eigen::Index>(i)) = weight[i];
  return {matmul(tape.constant(std::move(w)), per_node), per_node};
}

}  // namespace infomotif
