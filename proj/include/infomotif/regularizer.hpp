#pragma once

#include <array>
#include <span>
#include <vector>

#include "infomotif/autodiff.hpp"
#include "infomotif/motif.hpp"

namespace infomotif {

/// Per motif t: "gate.t.W" (D x D, applied as H W), "gate.t.b" (1 x D),
/// "enc.t.a" (2D x 1), "disc.t.W" (D x D).
void init_motif_params(ad::ParameterSet& ps, std::size_t num_motifs, Eigen::Index dim, Rng& rng);

/// h^t = h ⊙ σ(h W + b), rowwise.
ad::Var gate(ad::Tape& tape, const ad::Var& h, ad::ParameterSet& ps, std::size_t t);

/// Instance rows against a gated matrix G: row k is anchored at G row
/// anchor[k] and mixes G rows nodes[0][k], nodes[1][k], nodes[2][k].
struct InstanceRows {
  std::vector<NodeId> anchor;
  std::array<std::vector<NodeId>, 3> nodes;
  std::size_t size() const noexcept { return anchor.size(); }
  void push(NodeId a, const Triple& tri) {
    anchor.push_back(a);
    for (std::size_t i = 0; i < 3; ++i) nodes[i].push_back(tri[i]);
  }
};

/// e = Σ_u α_u h_u^t with α = softmax_u(a · [h_u^t ‖ h_v^t]); m x D.
ad::Var encode_instances(ad::Tape& tape, const ad::Var& gated, const InstanceRows& rows, ad::ParameterSet& ps,
                         std::size_t t);

/// s_g = σ(mean of the rows of `e` in group g); num_groups x D. Throws
/// ContractError when a group is empty.
ad::Var readout(ad::Tape& tape, const ad::Var& e, std::span<const std::size_t> group, std::size_t num_groups);

/// σ(e_k · W_d s_{group[k]}) per row, m x 1. `s` holds one summary per group.
ad::Var discriminate(ad::Tape& tape, const ad::Var& e, const ad::Var& s, std::span<const NodeId> group,
                     ad::ParameterSet& ps, std::size_t t);

/// Sampled positives and corrupted negatives for one motif over a set of anchors.
struct MotifBatch {
  std::size_t motif = 0;
  std::vector<NodeId> anchors;           // anchors with at least one instance (global ids)
  std::vector<std::size_t> group;        // anchor index per pair
  std::vector<Triple> positives;         // sorted instance triples
  std::vector<Triple> negatives;         // {anchor, r1, r2}
  std::vector<std::size_t> pairs;        // Q_v per anchor
  std::size_t exhausted = 0;             // negatives kept after exhausting rejections
  std::size_t skipped = 0;               // candidates without instances (masked)
};

MotifBatch sample_motif_batch(const AttributedGraph& g, const InstanceIndex& index, std::size_t motif,
                              std::span<const NodeId> candidates, std::size_t q, Rng& rng);

struct MiTerm {
  ad::Var loss;      // Σ_v w_v L^t(v), 1 x 1
  ad::Var per_node;  // L^t(v) per batch anchor, |anchors| x 1
};

/// L^t(v) = -1/(2Q_v) Σ_i [log D(e_i⁺, s_v) + log(1 - D(e_i⁻, s_v))], with s_v read
/// out from the positives only. `local[u]` maps a global node id to its row in
/// `gated`; `weight[i]` multiplies anchor i's loss.
MiTerm mi_loss(ad::Tape& tape, const ad::Var& gated, const MotifBatch& batch, std::span<const NodeId> local,
               std::span<const double> weight, ad::ParameterSet& ps);

}  // namespace infomotif
