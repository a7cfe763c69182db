#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "infomotif/autodiff.hpp"
#include "infomotif/gnn.hpp"
#include "infomotif/graph.hpp"
#include "infomotif/motif.hpp"
#include "infomotif/regularizer.hpp"

namespace infomotif {

struct Attention {
  ad::Var alpha;  // m x T, rows on the simplex
  ad::Var z;      // m x D
};

/// α_vt = softmax_t(p · h_v^t), z_v = Σ_t α_vt h_v^t. `p` is D x 1.
Attention motif_attention(ad::Tape& tape, std::span<const ad::Var> gated, const ad::Var& p);

/// (1/nT) Σ_t Σ_v α_vt L^t(v) on plain matrices. `mask(v,t)` = 0 drops a term
/// (node without instances) while n and T stay in the normalizer.
double weighted_mi_loss(const Matrix& alpha, const Matrix& losses, const Matrix& mask);

/// μ = mean α over `labeled`; β = softmax over labeled of ||α_v - μ||².
std::vector<double> novelty_weights(const Matrix& alpha, std::span<const NodeId> labeled);

/// -Σ_batch β_v log softmax(logits_v)[y_v]; ContractError for unlabeled nodes.
/// logits row i belongs to batch[i].
ad::Var weighted_supervised_loss(const ad::Var& logits, std::span<const NodeId> batch, std::span<const int> labels,
                                 std::span<const double> beta);

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 256;
  double lr = 1e-3;
  std::size_t q = 20;
  std::uint64_t seed = 0;
  int patience = 10;
  bool no_novelty = false;       // β_v fixed uniform
  bool no_task_weights = false;  // α_vt = 1 inside the MI loss only
  bool base_only = false;        // GCN + classifier on h, L_B only
  bool deterministic = true;
  unsigned threads = 1;
  GcnConfig gcn;
};

struct EpochMetrics {
  int epoch = 0;
  double loss_s = 0.0;
  double loss_mi = 0.0;
  double val_acc = 0.0;
  double val_loss = 0.0;  // mean cross-entropy on the validation nodes
  double test_acc = 0.0;
  double wallclock_ms = 0.0;
  double sup_ms = 0.0;
  double mi_ms = 0.0;
};

struct ModelState {
  ad::ParameterSet params;
  GcnConfig gcn;
  std::size_t num_motifs = 0;
  bool base_only = false;
};

/// Parameters of a fresh model; deterministic in `seed`.
ModelState init_model(const AttributedGraph& g, std::size_t num_motifs, const TrainConfig& cfg);

struct Predictions {
  std::vector<int> label;
  Matrix probs;  // n x C
  Matrix alpha;  // n x T (empty for base_only)
};

Predictions predict(ModelState& model, const GraphOperators& ops);

/// Mean -log probs(v, y_v) over `nodes` (0 when empty).
double mean_log_loss(const Matrix& probs, const AttributedGraph& g, std::span<const NodeId> nodes);

double accuracy(std::span<const int> predicted, const AttributedGraph& g, std::span<const NodeId> nodes);

struct Evaluation {
  double train_acc = 0, val_acc = 0, test_acc = 0;
  std::vector<double> per_class_test;  // NaN for classes absent from test
};

Evaluation evaluate(ModelState& model, const AttributedGraph& g, const GraphOperators& ops, const Split& split);

struct TrainResult {
  ModelState model;
  std::vector<EpochMetrics> history;
  int best_epoch = 0;
  double best_val = 0.0;
  double test_acc = 0.0;  // at the restored best epoch
  std::vector<double> beta;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Alternating curriculum: per epoch (1) supervised batches over V_L with β
/// fixed, (2) α from the current model, (3) MI batches over V with α fixed,
/// (4) α and β recomputed. Early stopping on validation accuracy, ties broken
/// by lower validation loss.
TrainResult train(const AttributedGraph& g, const GraphOperators& ops, const InstanceIndex& index,
                  const Split& split, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Names of parameters updated by each phase.
std::vector<ad::Parameter*> supervised_params(ad::ParameterSet& ps);
std::vector<ad::Parameter*> mi_params(ad::ParameterSet& ps);

/// Builds the supervised-phase loss for a batch: (1/|B|) Σ_v w_v CE_v.
ad::Var supervised_batch_loss(ad::Tape& tape, ModelState& model, const GraphOperators& ops,
                              const AttributedGraph& g, std::span<const NodeId> batch, std::span<const double> w);

/// Builds the MI-phase loss for a batch of anchors with fixed α (n x T).
/// Returns the scalar and fills per-motif batches for diagnostics.
ad::Var mi_batch_loss(ad::Tape& tape, ModelState& model, const GraphOperators& ops,
                      std::span<const MotifBatch> batches, const Matrix& alpha, bool no_task_weights);

}  // namespace infomotif
