#pragma once

// Define-by-run reverse-mode differentiation over dense row-major matrices.
//
// Every op evaluates eagerly and records a closure computing its adjoint, so a
// Tape doubles as the expression graph: nodes are appended in topological
// order and backward() walks them in reverse. Sparse matrices only appear as
// constant left operands (adjacency, features).

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "infomotif/common.hpp"

namespace infomotif::ad {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

/// Named trainable tensors in insertion order. Copies are deep.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet& other);
  ParameterSet& operator=(const ParameterSet& other);
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;

  Parameter& add(std::string name, Matrix init);
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::size_t size() const noexcept { return params_.size(); }
  /// Parameters whose name starts with any of the prefixes (all when empty).
  std::vector<Parameter*> select(std::initializer_list<std::string_view> prefixes = {});
  std::vector<const Parameter*> all() const;

  void zero_grad();
  std::map<std::string, Matrix> snapshot() const;
  void restore(const std::map<std::string, Matrix>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

class Tape;

/// Handle to a tape node. Cheap to copy; valid while its Tape lives.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
  Tape* tape() const noexcept { return tape_; }
  std::size_t id() const noexcept { return id_; }

 private:
  friend class Tape;
  Var(Tape* t, std::size_t id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

struct TapeOptions {
  bool train = false;       // enables dropout
  std::uint64_t seed = 0;   // dropout mask stream
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  explicit Tape(TapeOptions opts = {});
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool train() const noexcept { return opts_.train; }
  Rng& rng() noexcept { return rng_; }

  Var constant(Matrix value);
  /// Leaf reading p.value by reference; p must not change while the tape lives.
  Var param(Parameter& p);

  /// Appends a node. `backward` runs only when some input requires a gradient.
  Var record(Matrix value, std::span<const Var> inputs, BackwardFn backward, const char* op);
  Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward, const char* op) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward), op);
  }

  bool requires_grad(const Var& v) const { return nodes_[v.id()].requires_grad; }
  const Matrix& value(const Var& v) const { return value_at(v.id()); }
  const Matrix& value_at(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.param ? n.param->value : n.value;
  }

  /// Adds g into v's adjoint (no-op when v needs no gradient).
  template <typename Derived>
  void accumulate(const Var& v, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[v.id()];
    if (!n.requires_grad) return;
    // g never aliases this node's adjoint: closures read their output's adjoint
    if (n.adjoint.size() == 0)
      n.adjoint.noalias() = g;
    else
      n.adjoint.noalias() += g;
  }

  /// Reverse sweep from a 1x1 loss; parameter gradients are added to
  /// Parameter::grad.
  void backward(const Var& loss);

  /// Adjoint of v after backward() (zeros if unreached).
  Matrix grad(const Var& v) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t stochastic_ops() const noexcept { return stochastic_ops_; }
  void mark_stochastic() noexcept { ++stochastic_ops_; }

 private:
  struct Node {
    Matrix value;    // unused for parameter leaves, which read param->value
    Matrix adjoint;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
    const char* op = "";
  };
  TapeOptions opts_;
  Rng rng_;
  std::vector<Node> nodes_;
  std::size_t stochastic_ops_ = 0;
};

using SparsePtr = std::shared_ptr<const SparseMatrix>;

// --- primitives -----------------------------------------------------------

Var matmul(const Var& a, const Var& b);
/// Constant sparse (m x k) times dense (k x n).
Var spmm(SparsePtr a, const Var& b);
Var add(const Var& a, const Var& b);
/// a (m x n) + broadcast row (1 x n).
Var add_row(const Var& a, const Var& row);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var row_softmax(const Var& a);
Var transpose(const Var& a);
/// out_k = Σ_j w(k, j) a[idx[j][k]]: K weighted row gathers fused (m x cols(a)).
Var gather_combine(const Var& a, std::span<const std::vector<NodeId>> idx, const Var& w);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(const Var& a, std::span<const NodeId> rows);
Var slice_cols(const Var& a, Eigen::Index begin, Eigen::Index count);
Var slice_rows(const Var& a, Eigen::Index begin, Eigen::Index count);
/// Scales row i of a (m x n) by c(i) where c is m x 1.
Var mul_col(const Var& a, const Var& c);
/// Row-wise inner products, m x 1.
Var row_dot(const Var& a, const Var& b);
Var sum(const Var& a);
Var mean(const Var& a);

inline constexpr double kProbClamp = 1e-12;

/// Elementwise -[y log p + (1-y) log(1-p)] with p clamped to [1e-12, 1-1e-12].
Var bce_prob(const Var& p, const Matrix& targets);
/// sum_i w_i * (-log softmax(logits_i)[label_i]), 1 x 1.
Var cross_entropy_logits(const Var& logits, std::span<const int> labels, std::span<const double> weights);
/// Inverted dropout; identity outside train mode or when rate == 0.
Var dropout(const Var& a, double rate);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }

/// Zeroes parameter gradients, runs backward from `loss`, and returns copies
/// of every parameter gradient by name (unreached parameters are zero).
std::map<std::string, Matrix> gradients(Tape& tape, const Var& loss, ParameterSet& params);

}  // namespace infomotif::ad
