#include "infomotif/curriculum.hpp"

#include "infomotif/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace infomotif {

using namespace ad;

Attention motif_attention(Tape& tape, std::span<const Var> gated, const Var& p) {
  (void)tape;
  if (gated.empty()) throw ContractError("motif_attention: no motifs");
  std::vector<Var> scores;
  scores.reserve(gated.size());
  for (const Var& g : gated) scores.push_back(matmul(g, p));
  Var alpha = row_softmax(concat_cols(scores));
  Var z = mul_col(gated[0], slice_cols(alpha, 0, 1));
  for (std::size_t t = 1; t < gated.size(); ++t)
    z = add(z, mul_col(gated[t], slice_cols(alpha, static_cast<Eigen::Index>(t), 1)));
  return {alpha, z};
}

double weighted_mi_loss(const Matrix& alpha, const Matrix& losses, const Matrix& mask) {
  if (alpha.rows() != losses.rows() || alpha.cols() != losses.cols() || mask.rows() != alpha.rows() ||
      mask.cols() != alpha.cols())
    throw ShapeError("weighted_mi_loss: alpha, losses and mask must share a shape");
  double total = 0.0;
  for (Eigen::Index t = 0; t < alpha.cols(); ++t)
    for (Eigen::Index v = 0; v < alpha.rows(); ++v)
      if (mask(v, t) != 0.0) total += alpha(v, t) * losses(v, t);
  return total / static_cast<double>(alpha.rows() * alpha.cols());
}

std::vector<double> novelty_weights(const Matrix& alpha, std::span<const NodeId> labeled) {
  if (labeled.empty()) throw ContractError("novelty_weights: empty labeled set");
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(alpha.cols());
  for (NodeId v : labeled) mu += alpha.row(v);
  mu /= static_cast<double>(labeled.size());
  std::vector<double> d(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i) d[i] = (alpha.row(labeled[i]) - mu).squaredNorm();
  const double mx = *std::max_element(d.begin(), d.end());
  double z = 0.0;
  for (double& x : d) z += (x = std::exp(x - mx));
  for (double& x : d) x /= z;
  return d;
}

Var weighted_supervised_loss(const Var& logits, std::span<const NodeId> batch, std::span<const int> labels,
                             std::span<const double> beta) {
  std::vector<int> ys(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int y = labels[static_cast<std::size_t>(batch[i])];
    if (y == AttributedGraph::kUnlabeled)
      throw ContractError("weighted_supervised_loss: node " + std::to_string(batch[i]) + " is unlabeled");
    ys[i] = y;
  }
  return cross_entropy_logits(logits, ys, beta);
}

std::vector<Parameter*> supervised_params(ParameterSet& ps) { return ps.select({"gcn.", "gate.", "att.", "cls."}); }
std::vector<Parameter*> mi_params(ParameterSet& ps) { return ps.select({"gcn.", "gate.", "enc.", "disc."}); }

ModelState init_model(const AttributedGraph& g, std::size_t num_motifs, const TrainConfig& cfg) {
  ModelState m;
  m.gcn = cfg.gcn;
  m.base_only = cfg.base_only;
  m.num_motifs = cfg.base_only ? 0 : num_motifs;
  Rng rng(derive_seed(cfg.seed, {0x1417u}));
  init_gcn(m.params, g.num_features(), cfg.gcn, rng);
  const Eigen::Index d = cfg.gcn.hidden.back();
  if (!cfg.base_only) {
    if (num_motifs == 0) throw ContractError("InfoMotif needs at least one motif");
    init_motif_params(m.params, num_motifs, d, rng);
    m.params.add("att.p", glorot(d, 1, rng));
  }
  init_classifier(m.params, d, g.num_classes(), rng);
  return m;
}

namespace {

struct Heads {
  Var logits;
  Var alpha;  // invalid for base_only
};

Heads heads(Tape& tape, ModelState& model, const Var& h) {
  if (model.base_only) return {classifier_logits(tape, h, model.params), Var{}};
  std::vector<Var> gated;
  for (std::size_t t = 0; t < model.num_motifs; ++t) gated.push_back(gate(tape, h, model.params, t));
  Attention att = motif_attention(tape, gated, tape.param(model.params.at("att.p")));
  return {classifier_logits(tape, att.z, model.params), att.alpha};
}

}  // namespace

Var supervised_batch_loss(Tape& tape, ModelState& model, const GraphOperators& ops, const AttributedGraph& g,
                          std::span<const NodeId> batch, std::span<const double> w) {
  Var h = forward_base(tape, ops, model.params, model.gcn, batch);
  Heads out = heads(tape, model, h);
  return scale(weighted_supervised_loss(out.logits, batch, g.labels(), w), 1.0 / static_cast<double>(batch.size()));
}

namespace {

void collect_rows(const MotifBatch& b, std::vector<NodeId>& rows) {
  rows.insert(rows.end(), b.anchors.begin(), b.anchors.end());
  for (const auto& tri : b.positives) rows.insert(rows.end(), tri.begin(), tri.end());
  for (const auto& tri : b.negatives) rows.insert(rows.end(), tri.begin(), tri.end());
}

void sort_unique(std::vector<NodeId>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Var mi_batch_loss(Tape& tape, ModelState& model, const GraphOperators& ops, std::span<const MotifBatch> batches,
                  const Matrix& alpha, bool no_task_weights) {
  std::vector<NodeId> rows;
  for (const auto& b : batches) collect_rows(b, rows);
  sort_unique(rows);
  if (rows.empty()) return tape.constant(Matrix::Zero(1, 1));
  std::vector<NodeId> in_h(ops.num_nodes, -1);
  for (std::size_t i = 0; i < rows.size(); ++i) in_h[static_cast<std::size_t>(rows[i])] = static_cast<NodeId>(i);

  Var h = forward_base(tape, ops, model.params, model.gcn, std::span<const NodeId>(rows));
  const double norm = 1.0 / static_cast<double>(ops.num_nodes * model.num_motifs);
  Var total = tape.constant(Matrix::Zero(1, 1));
  std::vector<NodeId> local(ops.num_nodes, -1);
  for (const auto& b : batches) {
    if (b.anchors.empty()) continue;
    // gate only the rows this motif touches
    std::vector<NodeId> mine;
    collect_rows(b, mine);
    sort_unique(mine);
    std::vector<NodeId> pick(mine.size());
    for (std::size_t i = 0; i < mine.size(); ++i) {
      pick[i] = in_h[static_cast<std::size_t>(mine[i])];
      local[static_cast<std::size_t>(mine[i])] = static_cast<NodeId>(i);
    }
    std::vector<double> w(b.anchors.size());
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] = norm * (no_task_weights ? 1.0 : alpha(b.anchors[i], static_cast<Eigen::Index>(b.motif)));
    Var gated = gate(tape, pick.size() == rows.size() ? h : gather_rows(h, pick), model.params, b.motif);
    total = add(total, mi_loss(tape, gated, b, local, w, model.params).loss);
    for (NodeId u : mine) local[static_cast<std::size_t>(u)] = -1;
  }
  return total;
}

Predictions predict(ModelState& model, const GraphOperators& ops) {
  Tape tape;
  Var h = forward_base(tape, ops, model.params, model.gcn);
  Heads out = heads(tape, model, h);
  Predictions p;
  p.probs = row_softmax(out.logits).value();
  p.label.resize(static_cast<std::size_t>(p.probs.rows()));
  for (Eigen::Index i = 0; i < p.probs.rows(); ++i) {
    Eigen::Index arg;
    p.probs.row(i).maxCoeff(&arg);
    p.label[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  if (!model.base_only) p.alpha = out.alpha.value();
  return p;
}

double accuracy(std::span<const int> predicted, const AttributedGraph& g, std::span<const NodeId> nodes) {
  if (nodes.empty()) return 0.0;
  std::size_t ok = 0;
  for (NodeId v : nodes) ok += predicted[static_cast<std::size_t>(v)] == g.label(v) ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(nodes.size());
}

double mean_log_loss(const Matrix& probs, const AttributedGraph& g, std::span<const NodeId> nodes) {
  if (nodes.empty()) return 0.0;
  double total = 0.0;
  for (NodeId v : nodes) total -= std::log(std::max(probs(v, g.label(v)), ad::kProbClamp));
  return total / static_cast<double>(nodes.size());
}

Evaluation evaluate(ModelState& model, const AttributedGraph& g, const GraphOperators& ops, const Split& split) {
  Predictions p = predict(model, ops);
  Evaluation e;
  e.train_acc = accuracy(p.label, g, split.train);
  e.val_acc = accuracy(p.label, g, split.val);
  e.test_acc = accuracy(p.label, g, split.test);
  std::vector<std::size_t> hit(static_cast<std::size_t>(g.num_classes())), tot(hit.size());
  for (NodeId v : split.test) {
    const auto c = static_cast<std::size_t>(g.label(v));
    ++tot[c];
    hit[c] += p.label[static_cast<std::size_t>(v)] == g.label(v) ? 1 : 0;
  }
  for (std::size_t c = 0; c < hit.size(); ++c)
    e.per_class_test.push_back(tot[c] ? static_cast<double>(hit[c]) / static_cast<double>(tot[c])
                                      : std::numeric_limits<double>::quiet_NaN());
  return e;
}

namespace {

using Clock = std::chrono::steady_clock;
double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void step_checked(Adam& opt, std::span<Parameter* const> params, const Var& loss, Tape& tape, ParameterSet& ps,
                  const std::string& where) {
  if (!std::isfinite(loss.scalar())) throw NumericError(where + ": non-finite loss");
  ps.zero_grad();
  tape.backward(loss);
  try {
    opt.step(params);
  } catch (const NumericError& e) {
    throw NumericError(where + ": " + e.what());
  }
}

}  // namespace

TrainResult train(const AttributedGraph& g, const GraphOperators& ops, const InstanceIndex& index, const Split& split,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (split.train.empty()) throw ContractError("train: empty training set");
  if (cfg.batch_size == 0 || cfg.q == 0 || cfg.epochs <= 0) throw ContractError("train: config values must be positive");
  TrainResult res;
  res.model = init_model(g, index.num_motifs(), cfg);
  ModelState& model = res.model;
  ParameterSet& ps = model.params;
  const std::size_t n = g.num_nodes();
  const std::size_t T = model.num_motifs;

  // one optimizer: shared parameters keep a single set of moments across phases
  Adam opt({.lr = cfg.lr});
  Adam& sup_opt = opt;
  Adam& mi_opt = opt;
  auto sup_params = supervised_params(ps);
  auto reg_params = mi_params(ps);

  const std::vector<NodeId>& labeled = split.train;
  std::vector<double> beta(labeled.size(), 1.0 / static_cast<double>(labeled.size()));
  std::vector<double> weight_of(n, 0.0);
  Matrix alpha;

  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), 0);

  auto best = ps.snapshot();
  double best_val = -1.0;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  double best_test = 0.0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = Clock::now();
    EpochMetrics m;
    m.epoch = epoch;
    const auto ep = static_cast<std::uint64_t>(epoch);

    // (1) supervised phase, β fixed
    for (std::size_t i = 0; i < labeled.size(); ++i)
      weight_of[static_cast<std::size_t>(labeled[i])] =
          cfg.no_novelty || cfg.base_only ? 1.0 : static_cast<double>(labeled.size()) * beta[i];
    std::vector<NodeId> order = labeled;
    {
      Rng rng(derive_seed(cfg.seed, {ep, 1}));
      std::shuffle(order.begin(), order.end(), rng);
    }
    std::size_t nb = 0;
    for (std::size_t s = 0; s < order.size(); s += cfg.batch_size, ++nb) {
      std::span<const NodeId> batch(order.data() + s, std::min(cfg.batch_size, order.size() - s));
      std::vector<double> w(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) w[i] = weight_of[static_cast<std::size_t>(batch[i])];
      Tape tape({.train = true, .seed = derive_seed(cfg.seed, {ep, 1, nb, 7})});
      Var loss = supervised_batch_loss(tape, model, ops, g, batch, w);
      m.loss_s += loss.scalar();
      step_checked(sup_opt, sup_params, loss, tape, ps,
                   "epoch " + std::to_string(epoch) + ", supervised batch " + std::to_string(nb));
    }
    m.loss_s /= static_cast<double>(nb);
    m.sup_ms = ms_since(t0);

    Predictions pred;
    if (!model.base_only) {
      const auto t1 = Clock::now();
      // (2) attention with the updated model
      alpha = predict(model, ops).alpha;
      // (3) MI phase over all nodes, α fixed
      order = all;
      {
        Rng rng(derive_seed(cfg.seed, {ep, 2}));
        std::shuffle(order.begin(), order.end(), rng);
      }
      nb = 0;
      for (std::size_t s = 0; s < order.size(); s += cfg.batch_size, ++nb) {
        std::span<const NodeId> cand(order.data() + s, std::min(cfg.batch_size, order.size() - s));
        std::vector<MotifBatch> batches;
        for (std::size_t t = 0; t < T; ++t) {
          Rng rng(derive_seed(cfg.seed, {ep, 3, nb, t}));
          batches.push_back(sample_motif_batch(g, index, t, cand, cfg.q, rng));
        }
        Tape tape({.train = true, .seed = derive_seed(cfg.seed, {ep, 2, nb, 7})});
        Var loss = mi_batch_loss(tape, model, ops, batches, alpha, cfg.no_task_weights);
        m.loss_mi += loss.scalar();
        step_checked(mi_opt, reg_params, loss, tape, ps,
                     "epoch " + std::to_string(epoch) + ", MI batch " + std::to_string(nb));
      }
      m.mi_ms = ms_since(t1);
      // (4) α and β from the updated model
      pred = predict(model, ops);
      alpha = pred.alpha;
      beta = novelty_weights(alpha, labeled);
    } else {
      pred = predict(model, ops);
    }

    m.val_acc = accuracy(pred.label, g, split.val);
    m.val_loss = mean_log_loss(pred.probs, g, split.val);
    m.test_acc = accuracy(pred.label, g, split.test);
    m.wallclock_ms = ms_since(t0);
    res.history.push_back(m);
    if (on_epoch) on_epoch(m);

    // accuracy saturates on small validation sets; the loss breaks ties
    if (m.val_acc > best_val || (m.val_acc == best_val && m.val_loss < best_loss)) {
      best_val = m.val_acc;
      best_loss = m.val_loss;
      best_epoch = epoch;
      best_test = m.test_acc;
      best = ps.snapshot();
    } else if (epoch - best_epoch >= cfg.patience) {
      break;
    }
  }
  ps.restore(best);
  res.best_epoch = best_epoch;
  res.best_val = best_val;
  res.test_acc = best_test;
  res.beta = beta;
  return res;
}

}  // namespace infomotif
