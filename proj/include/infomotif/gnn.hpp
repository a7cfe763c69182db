#pragma once

#include <optional>
#include <span>
#include <vector>

#include "infomotif/autodiff.hpp"
#include "infomotif/graph.hpp"

namespace infomotif {

/// Sparse constants shared by every forward pass over one graph.
struct GraphOperators {
  ad::SparsePtr adjacency;  // normalized, n x n
  ad::SparsePtr features;   // n x F
  std::size_t num_nodes = 0;
  std::size_t num_features = 0;
};

GraphOperators make_operators(const AttributedGraph& g);

struct GcnConfig {
  std::vector<Eigen::Index> hidden{256, 256};  // last entry is D
  double dropout = 0.5;                         // on layer inputs, train mode only
};

/// Uniform Glorot: U(-r, r), r = sqrt(6 / (fan_in + fan_out)).
Matrix glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Adds "gcn.W1".."gcn.Wk".
void init_gcn(ad::ParameterSet& ps, std::size_t num_features, const GcnConfig& cfg, Rng& rng);
/// Adds "cls.W" (D x C) and "cls.b" (1 x C).
void init_classifier(ad::ParameterSet& ps, Eigen::Index dim, int num_classes, Rng& rng);

/// H_l = ReLU(Â H_{l-1} W_l) for l < k, linear at l = k, H_0 = X. When `rows`
/// is given only those rows of the last layer are produced (in that order).
ad::Var forward_base(ad::Tape& tape, const GraphOperators& ops, ad::ParameterSet& ps, const GcnConfig& cfg,
                     std::optional<std::span<const NodeId>> rows = std::nullopt);

/// Z W + b.
ad::Var classifier_logits(ad::Tape& tape, const ad::Var& z, ad::ParameterSet& ps);
/// Row-softmax of Z W + b.
ad::Var classify(ad::Tape& tape, const ad::Var& z, ad::ParameterSet& ps);

/// Rows of a row-major sparse matrix, in the given order.
SparseMatrix select_rows(const SparseMatrix& m, std::span<const NodeId> rows);

}  // namespace infomotif
