#include "infomotif/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace infomotif::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  throw ShapeError(std::string(op) + ": " + detail);
}

std::string dims(const Var& v) { return std::to_string(v.rows()) + "x" + std::to_string(v.cols()); }

void same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, dims(a) + " vs " + dims(b));
}

Tape& tape_of(const Var& a) {
  if (!a.tape()) throw ContractError("operation on an empty Var");
  return *a.tape();
}

// Large tapes allocate and free many multi-megabyte buffers per batch. glibc
// serves those with fresh mmaps by default, and the page faults cost more
// than the arithmetic; keep freed blocks on the heap instead.
void tune_allocator() {
#ifdef __GLIBC__
  static const bool done = [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    return true;
  }();
  (void)done;
#endif
}

}  // namespace

// --- ParameterSet ---------------------------------------------------------

ParameterSet::ParameterSet(const ParameterSet& other) { *this = other; }

ParameterSet& ParameterSet::operator=(const ParameterSet& other) {
  if (this == &other) return *this;
  params_.clear();
  index_.clear();
  for (const auto& p : other.params_) {
    params_.push_back(std::make_unique<Parameter>(*p));
    index_[p->name] = params_.size() - 1;
  }
  return *this;
}

Parameter& ParameterSet::add(std::string name, Matrix init) {
  if (index_.count(name)) throw ContractError("duplicate parameter '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Matrix::Zero(init.rows(), init.cols());
  p->value = std::move(init);
  params_.push_back(std::move(p));
  index_[name] = params_.size() - 1;
  return *params_.back();
}

Parameter& ParameterSet::at(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw ContractError("unknown parameter '" + std::string(name) + "'");
  return *params_[it->second];
}

const Parameter& ParameterSet::at(std::string_view name) const {
  return const_cast<ParameterSet*>(this)->at(name);
}

bool ParameterSet::contains(std::string_view name) const { return index_.count(std::string(name)) > 0; }

std::vector<Parameter*> ParameterSet::select(std::initializer_list<std::string_view> prefixes) {
  std::vector<Parameter*> out;
  for (auto& p : params_) {
    bool keep = prefixes.size() == 0;
    for (auto pre : prefixes) keep = keep || std::string_view(p->name).starts_with(pre);
    if (keep) out.push_back(p.get());
  }
  return out;
}

std::vector<const Parameter*> ParameterSet::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->grad.setZero(p->value.rows(), p->value.cols());
}

std::map<std::string, Matrix> ParameterSet::snapshot() const {
  std::map<std::string, Matrix> out;
  for (const auto& p : params_) out[p->name] = p->value;
  return out;
}

void ParameterSet::restore(const std::map<std::string, Matrix>& values) {
  for (const auto& [name, m] : values) {
    Parameter& p = at(name);
    if (p.value.rows() != m.rows() || p.value.cols() != m.cols())
      throw ShapeError("restore: shape mismatch for '" + name + "'");
    p.value = m;
  }
}

// --- Var / Tape -------------------------------------------------------------

const Matrix& Var::value() const { return tape_of(*this).value(*this); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ContractError("scalar() on a " + dims(*this) + " value");
  return v(0, 0);
}

Tape::Tape(TapeOptions opts) : opts_(opts), rng_(opts.seed) {
  tune_allocator();
  nodes_.reserve(256);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.op = "constant";
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
  Node n;
  n.param = &p;
  n.requires_grad = true;
  n.op = "param";
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, std::span<const Var> inputs, BackwardFn backward, const char* op) {
  Node n;
  n.value = std::move(value);
  n.op = op;
  for (const Var& in : inputs) {
    if (in.tape() != this) throw ContractError(std::string(op) + ": operand from a different tape");
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) throw ContractError("backward: loss from a different tape");
  if (value(loss).size() != 1)
    throw ContractError("backward: loss must be scalar, got " + dims(loss));
  for (auto& n : nodes_) n.adjoint.resize(0, 0);
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].adjoint = Matrix::Ones(1, 1);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.adjoint.size() == 0) continue;
    if (n.backward) n.backward(*this, n.adjoint);
    if (n.param) n.param->grad += n.adjoint;
  }
}

Matrix Tape::grad(const Var& v) const {
  const Node& n = nodes_[v.id()];
  const Matrix& val = value_at(v.id());
  if (n.adjoint.size() == 0) return Matrix::Zero(val.rows(), val.cols());
  return n.adjoint;
}

// --- primitives -----------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) shape_error("matmul", dims(a) + " * " + dims(b));
  Matrix out = a.value() * b.value();
  return tape_of(a).record(std::move(out), {a, b},
                           [a, b](Tape& t, const Matrix& g) {
                             if (t.requires_grad(a)) t.accumulate(a, g * b.value().transpose());
                             if (t.requires_grad(b)) t.accumulate(b, a.value().transpose() * g);
                           },
                           "matmul");
}

Var spmm(SparsePtr a, const Var& b) {
  if (!a) throw ContractError("spmm: null sparse operand");
  if (a->cols() != b.rows()) shape_error("spmm", std::to_string(a->rows()) + "x" + std::to_string(a->cols()) + " * " + dims(b));
  Matrix out = (*a) * b.value();
  return tape_of(b).record(std::move(out), {b},
                           [a, b](Tape& t, const Matrix& g) {
                             Matrix gb = a->transpose() * g;
                             t.accumulate(b, gb);
                           },
                           "spmm");
}

Var add(const Var& a, const Var& b) {
  same_shape("add", a, b);
  return tape_of(a).record(a.value() + b.value(), {a, b},
                           [a, b](Tape& t, const Matrix& g) {
                             t.accumulate(a, g);
                             t.accumulate(b, g);
                           },
                           "add");
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error("add_row", dims(a) + " + row " + dims(row));
  Matrix out = a.value().rowwise() + row.value().row(0);
  return tape_of(a).record(std::move(out), {a, row},
                           [a, row](Tape& t, const Matrix& g) {
                             t.accumulate(a, g);
                             if (t.requires_grad(row)) t.accumulate(row, g.colwise().sum());
                           },
                           "add_row");
}

Var sub(const Var& a, const Var& b) {
  same_shape("sub", a, b);
  return tape_of(a).record(a.value() - b.value(), {a, b},
                           [a, b](Tape& t, const Matrix& g) {
                             t.accumulate(a, g);
                             if (t.requires_grad(b)) t.accumulate(b, -g);
                           },
                           "sub");
}

Var mul(const Var& a, const Var& b) {
  same_shape("mul", a, b);
  Matrix out = a.value().cwiseProduct(b.value());
  return tape_of(a).record(std::move(out), {a, b},
                           [a, b](Tape& t, const Matrix& g) {
                             if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(b.value()));
                             if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(a.value()));
                           },
                           "mul");
}

Var scale(const Var& a, double s) {
  return tape_of(a).record(a.value() * s, {a},
                           [a, s](Tape& t, const Matrix& g) { t.accumulate(a, g * s); }, "scale");
}

Var add_scalar(const Var& a, double s) {
  Matrix out = a.value().array() + s;
  return tape_of(a).record(std::move(out), {a},
                           [a](Tape& t, const Matrix& g) { t.accumulate(a, g); }, "add_scalar");
}

Var sigmoid(const Var& a) {
  // 1/(1+e^{-x}) saturates cleanly: e^{-x} = inf gives exactly 0
  Matrix out = (1.0 + (-a.value().array()).exp()).inverse().matrix();
  Tape& tape = tape_of(a);
  const std::size_t self = tape.size();
  return tape.record(std::move(out), {a},
                     [a, self](Tape& t, const Matrix& g) {
                       const Matrix& y = t.value_at(self);
                       t.accumulate(a, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
                     },
                     "sigmoid");
}

Var relu(const Var& a) {
  Matrix out = a.value().cwiseMax(0.0);
  return tape_of(a).record(std::move(out), {a},
                           [a](Tape& t, const Matrix& g) {
                             t.accumulate(a, (a.value().array() > 0.0).select(g, 0.0));
                           },
                           "relu");
}

Var row_softmax(const Var& a) {
  Matrix out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    r.array() -= r.maxCoeff();
    r = r.array().exp().matrix();
    r /= r.sum();
  }
  Tape& tape = tape_of(a);
  const std::size_t self = tape.size();
  return tape.record(std::move(out), {a},
                     [a, self](Tape& t, const Matrix& g) {
                       const Matrix& y = t.value_at(self);
                       Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
                       Matrix ga = y.cwiseProduct((g.colwise() - dots).eval());
                       t.accumulate(a, ga);
                     },
                     "row_softmax");
}

Var transpose(const Var& a) {
  Matrix out = a.value().transpose();
  return tape_of(a).record(std::move(out), {a},
                           [a](Tape& t, const Matrix& g) { t.accumulate(a, g.transpose()); }, "transpose");
}

Var gather_combine(const Var& a, std::span<const std::vector<NodeId>> idx, const Var& w) {
  const auto k = static_cast<Eigen::Index>(idx.size());
  if (k == 0 || w.cols() != k) shape_error("gather_combine", "weights " + dims(w) + " for " + std::to_string(k) + " index lists");
  const Eigen::Index m = w.rows();
  const Matrix& av = a.value();
  for (const auto& col : idx) {
    if (static_cast<Eigen::Index>(col.size()) != m) shape_error("gather_combine", "index list length differs from weight rows");
    for (NodeId r : col)
      if (r < 0 || r >= av.rows()) shape_error("gather_combine", "row " + std::to_string(r) + " outside " + dims(a));
  }
  const Matrix& wv = w.value();
  Matrix out = Matrix::Zero(m, av.cols());
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < k; ++j) out.row(i) += wv(i, j) * av.row(idx[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
  std::vector<std::vector<NodeId>> lists(idx.begin(), idx.end());
  return tape_of(a).record(std::move(out), {a, w},
                           [a, w, lists = std::move(lists)](Tape& t, const Matrix& g) {
                             const Matrix& av2 = t.value(a);
                             const Matrix& wv2 = t.value(w);
                             const Eigen::Index rows = wv2.rows(), kk = wv2.cols();
                             if (t.requires_grad(a)) {
                               Matrix ga = Matrix::Zero(av2.rows(), av2.cols());
                               for (Eigen::Index i = 0; i < rows; ++i)
                                 for (Eigen::Index j = 0; j < kk; ++j)
                                   ga.row(lists[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) += wv2(i, j) * g.row(i);
                               t.accumulate(a, ga);
                             }
                             if (t.requires_grad(w)) {
                               Matrix gw(rows, kk);
                               for (Eigen::Index i = 0; i < rows; ++i)
                                 for (Eigen::Index j = 0; j < kk; ++j)
                                   gw(i, j) = g.row(i).dot(av2.row(lists[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]));
                               t.accumulate(w, gw);
                             }
                           },
                           "gather_combine");
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no operands");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) shape_error("concat_cols", dims(parts[0]) + " vs " + dims(p));
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return tape_of(parts[0]).record(std::move(out), parts,
                                  [ins](Tape& t, const Matrix& g) {
                                    Eigen::Index c0 = 0;
                                    for (const Var& p : ins) {
                                      const Eigen::Index w = t.value(p).cols();
                                      if (t.requires_grad(p)) t.accumulate(p, g.middleCols(c0, w));
                                      c0 += w;
                                    }
                                  },
                                  "concat_cols");
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_rows: no operands");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) shape_error("concat_rows", dims(parts[0]) + " vs " + dims(p));
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return tape_of(parts[0]).record(std::move(out), parts,
                                  [ins](Tape& t, const Matrix& g) {
                                    Eigen::Index r0 = 0;
                                    for (const Var& p : ins) {
                                      const Eigen::Index h = t.value(p).rows();
                                      if (t.requires_grad(p)) t.accumulate(p, g.middleRows(r0, h));
                                      r0 += h;
                                    }
                                  },
                                  "concat_rows");
}

Var gather_rows(const Var& a, std::span<const NodeId> rows) {
  const Matrix& av = a.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= av.rows())
      shape_error("gather_rows", "row " + std::to_string(rows[i]) + " outside " + dims(a));
    out.row(static_cast<Eigen::Index>(i)) = av.row(rows[i]);
  }
  std::vector<NodeId> idx(rows.begin(), rows.end());
  return tape_of(a).record(std::move(out), {a},
                           [a, idx = std::move(idx)](Tape& t, const Matrix& g) {
                             const Matrix& av2 = t.value(a);
                             Matrix ga = Matrix::Zero(av2.rows(), av2.cols());
                             for (std::size_t i = 0; i < idx.size(); ++i)
                               ga.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
                             t.accumulate(a, ga);
                           },
                           "gather_rows");
}

Var slice_cols(const Var& a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a.cols())
    shape_error("slice_cols", "[" + std::to_string(begin) + ", +" + std::to_string(count) + ") of " + dims(a));
  Matrix out = a.value().middleCols(begin, count);
  return tape_of(a).record(std::move(out), {a},
                           [a, begin, count](Tape& t, const Matrix& g) {
                             const Matrix& av = t.value(a);
                             Matrix ga = Matrix::Zero(av.rows(), av.cols());
                             ga.middleCols(begin, count) = g;
                             t.accumulate(a, ga);
                           },
                           "slice_cols");
}

Var slice_rows(const Var& a, Eigen::Index begin, Eigen::Index count) {
  if (begin < 0 || count < 0 || begin + count > a.rows())
    shape_error("slice_rows", "[" + std::to_string(begin) + ", +" + std::to_string(count) + ") of " + dims(a));
  Matrix out = a.value().middleRows(begin, count);
  return tape_of(a).record(std::move(out), {a},
                           [a, begin, count](Tape& t, const Matrix& g) {
                             const Matrix& av = t.value(a);
                             Matrix ga = Matrix::Zero(av.rows(), av.cols());
                             ga.middleRows(begin, count) = g;
                             t.accumulate(a, ga);
                           },
                           "slice_rows");
}

Var mul_col(const Var& a, const Var& c) {
  if (c.cols() != 1 || c.rows() != a.rows()) shape_error("mul_col", dims(a) + " by " + dims(c));
  Matrix out = a.value().array().colwise() * c.value().col(0).array();
  return tape_of(a).record(std::move(out), {a, c},
                           [a, c](Tape& t, const Matrix& g) {
                             if (t.requires_grad(a))
                               t.accumulate(a, (g.array().colwise() * c.value().col(0).array()).matrix());
                             if (t.requires_grad(c))
                               t.accumulate(c, g.cwiseProduct(a.value()).rowwise().sum());
                           },
                           "mul_col");
}

Var row_dot(const Var& a, const Var& b) {
  same_shape("row_dot", a, b);
  Matrix out = a.value().cwiseProduct(b.value()).rowwise().sum();
  return tape_of(a).record(std::move(out), {a, b},
                           [a, b](Tape& t, const Matrix& g) {
                             if (t.requires_grad(a))
                               t.accumulate(a, (b.value().array().colwise() * g.col(0).array()).matrix());
                             if (t.requires_grad(b))
                               t.accumulate(b, (a.value().array().colwise() * g.col(0).array()).matrix());
                           },
                           "row_dot");
}

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return tape_of(a).record(std::move(out), {a},
                           [a](Tape& t, const Matrix& g) {
                             const Matrix& av = t.value(a);
                             t.accumulate(a, Matrix::Constant(av.rows(), av.cols(), g(0, 0)));
                           },
                           "sum");
}

Var mean(const Var& a) {
  if (a.value().size() == 0) throw ContractError("mean of an empty matrix");
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var bce_prob(const Var& p, const Matrix& targets) {
  if (p.rows() != targets.rows() || p.cols() != targets.cols())
    shape_error("bce_prob", dims(p) + " vs targets " + std::to_string(targets.rows()) + "x" +
                                std::to_string(targets.cols()));
  const Matrix& pv = p.value();
  Matrix out(pv.rows(), pv.cols());
  for (Eigen::Index i = 0; i < pv.size(); ++i) {
    const double c = std::clamp(pv.data()[i], kProbClamp, 1.0 - kProbClamp);
    const double y = targets.data()[i];
    out.data()[i] = -(y * std::log(c) + (1.0 - y) * std::log(1.0 - c));
  }
  return tape_of(p).record(std::move(out), {p},
                           [p, targets](Tape& t, const Matrix& g) {
                             const Matrix& pv2 = t.value(p);
                             Matrix gp(pv2.rows(), pv2.cols());
                             for (Eigen::Index i = 0; i < pv2.size(); ++i) {
                               const double x = pv2.data()[i];
                               if (x < kProbClamp || x > 1.0 - kProbClamp) {
                                 gp.data()[i] = 0.0;  // clamped: flat
                                 continue;
                               }
                               const double y = targets.data()[i];
                               gp.data()[i] = g.data()[i] * (-y / x + (1.0 - y) / (1.0 - x));
                             }
                             t.accumulate(p, gp);
                           },
                           "bce_prob");
}

Var cross_entropy_logits(const Var& logits, std::span<const int> labels, std::span<const double> weights) {
  const Matrix& z = logits.value();
  if (static_cast<std::size_t>(z.rows()) != labels.size() || labels.size() != weights.size())
    shape_error("cross_entropy_logits", dims(logits) + " with " + std::to_string(labels.size()) +
                                            " labels and " + std::to_string(weights.size()) + " weights");
  Matrix probs(z.rows(), z.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= z.cols()) throw ContractError("cross_entropy_logits: label out of range");
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    probs.row(i) = (z.row(i).array() - lse).exp().matrix();
    loss += weights[static_cast<std::size_t>(i)] * (lse - z(i, y));
  }
  Matrix out(1, 1);
  out(0, 0) = loss;
  std::vector<int> ys(labels.begin(), labels.end());
  std::vector<double> ws(weights.begin(), weights.end());
  return tape_of(logits).record(std::move(out), {logits},
                                [logits, probs = std::move(probs), ys = std::move(ys), ws = std::move(ws)](
                                    Tape& t, const Matrix& g) {
                                  Matrix gz = probs;
                                  for (Eigen::Index i = 0; i < gz.rows(); ++i) {
                                    gz(i, ys[static_cast<std::size_t>(i)]) -= 1.0;
                                    gz.row(i) *= ws[static_cast<std::size_t>(i)] * g(0, 0);
                                  }
                                  t.accumulate(logits, gz);
                                },
                                "cross_entropy_logits");
}

Var dropout(const Var& a, double rate) {
  if (rate < 0.0 || rate >= 1.0) throw ContractError("dropout rate must lie in [0, 1)");
  Tape& tape = tape_of(a);
  if (!tape.train() || rate == 0.0) return a;
  tape.mark_stochastic();
  std::bernoulli_distribution keep(1.0 - rate);
  const double inv = 1.0 / (1.0 - rate);
  Matrix mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(tape.rng()) ? inv : 0.0;
  Matrix out = a.value().cwiseProduct(mask);
  return tape.record(std::move(out), {a},
                     [a, mask = std::move(mask)](Tape& t, const Matrix& g) {
                       t.accumulate(a, g.cwiseProduct(mask));
                     },
                     "dropout");
}

std::map<std::string, Matrix> gradients(Tape& tape, const Var& loss, ParameterSet& params) {
  params.zero_grad();
  tape.backward(loss);
  std::map<std::string, Matrix> out;
  for (const Parameter* p : params.all()) out[p->name] = p->grad;
  return out;
}

}  // namespace infomotif::ad
