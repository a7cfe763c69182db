#include "infomotif/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "infomotif/optim.hpp"
#include "infomotif/synthetic.hpp"

namespace infomotif::harness {

using namespace ad;

ToyGradCheck toy_gradcheck(std::uint64_t seed, bool directed) {
  AttributedGraph g = synthetic::toy_graph(seed, directed);
  MotifRegistry reg = default_registry(directed);
  InstanceIndex index = enumerate_instances(g, reg);
  GraphOperators ops = make_operators(g);
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.gcn.hidden = {6, 4};
  ModelState model = init_model(g, index.num_motifs(), cfg);

  // fixed samples and weights, as within one epoch
  std::vector<NodeId> all(g.num_nodes());
  std::iota(all.begin(), all.end(), 0);
  std::vector<MotifBatch> batches;
  for (std::size_t t = 0; t < index.num_motifs(); ++t) {
    Rng rng(derive_seed(seed, {0x6c, t}));
    batches.push_back(sample_motif_batch(g, index, t, all, 3, rng));
  }
  const Matrix alpha = predict(model, ops).alpha;
  const std::vector<NodeId> labeled{0, 3, 4, 6, 8, 9, 10};
  const auto beta = novelty_weights(alpha, labeled);
  std::vector<double> w(beta.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(labeled.size()) * beta[i];

  auto sup = [&](Tape& tape) { return supervised_batch_loss(tape, model, ops, g, labeled, w); };
  auto mi = [&](std::size_t t) {
    return [&, t](Tape& tape) {
      return mi_batch_loss(tape, model, ops, std::span<const MotifBatch>(&batches[t], 1), alpha, false);
    };
  };

  std::vector<std::pair<std::string, std::function<Var(Tape&)>>> losses;
  losses.emplace_back("L_S", sup);
  for (std::size_t t = 0; t < batches.size(); ++t)
    if (!batches[t].anchors.empty()) losses.emplace_back("L_MI^" + std::to_string(t), mi(t));
  losses.emplace_back("combined", [&](Tape& tape) {
    Var total = sup(tape);
    return add(total, mi_batch_loss(tape, model, ops, batches, alpha, false));
  });

  ToyGradCheck out;
  auto params = model.params.select();
  for (auto& [name, fn] : losses) {
    GradCheckReport r = grad_check(fn, params, {.seed = seed});
    out.max_rel_error = std::max(out.max_rel_error, r.max_rel_error);
    out.parts.push_back({name, r});
  }
  return out;
}

Dataset open_dataset(const std::filesystem::path& dir, const std::optional<std::filesystem::path>& registry) {
  AttributedGraph g = load_dataset(dir);
  Dataset ds = wrap_graph(std::move(g), registry ? std::optional(load_registry(*registry)) : std::nullopt);
  ds.dir = dir;
  return ds;
}

Dataset wrap_graph(AttributedGraph g, std::optional<MotifRegistry> registry) {
  Dataset ds;
  ds.registry = registry ? std::move(*registry) : default_registry(g.directed());
  ds.index = enumerate_instances(g, ds.registry);
  ds.ops = make_operators(g);
  ds.graph = std::move(g);
  return ds;
}

json config_to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"q", c.q},
          {"seed", c.seed},
          {"patience", c.patience},
          {"no_novelty", c.no_novelty},
          {"no_task_weights", c.no_task_weights},
          {"base_only", c.base_only},
          {"deterministic", c.deterministic},
          {"threads", c.threads},
          {"hidden", c.gcn.hidden},
          {"dropout", c.gcn.dropout}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.q = j.value("q", c.q);
  c.seed = j.value("seed", c.seed);
  c.patience = j.value("patience", c.patience);
  c.no_novelty = j.value("no_novelty", c.no_novelty);
  c.no_task_weights = j.value("no_task_weights", c.no_task_weights);
  c.base_only = j.value("base_only", c.base_only);
  c.deterministic = j.value("deterministic", c.deterministic);
  c.threads = j.value("threads", c.threads);
  if (j.contains("hidden")) c.gcn.hidden = j.at("hidden").get<std::vector<Eigen::Index>>();
  c.gcn.dropout = j.value("dropout", c.gcn.dropout);
  return c;
}

json RunManifest::to_json() const {
  return {{"format", "infomotif.manifest"},
          {"version", 1},
          {"config", config_to_json(config)},
          {"dataset", dataset},
          {"dataset_checksum", dataset_checksum},
          {"registry_checksum", registry_checksum},
          {"train_ratio", train_ratio},
          {"seeds", seeds},
          {"out", out.string()}};
}

RunManifest RunManifest::from_json(const json& j) {
  if (j.value("format", "") != "infomotif.manifest") throw FormatError("manifest", 0, "not a run manifest");
  RunManifest m;
  m.config = config_from_json(j.at("config"));
  m.dataset = j.at("dataset").get<std::string>();
  m.dataset_checksum = j.at("dataset_checksum").get<std::uint64_t>();
  m.registry_checksum = j.at("registry_checksum").get<std::uint64_t>();
  m.train_ratio = j.at("train_ratio").get<double>();
  m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  m.out = j.at("out").get<std::string>();
  return m;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw FormatError(file.string(), 0, "cannot write");
  os << m.to_json().dump(2) << "\n";
}

RunManifest read_manifest(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw FormatError(file.string(), 0, "cannot read");
  try {
    return RunManifest::from_json(json::parse(is));
  } catch (const json::exception& e) {
    throw FormatError(file.string(), 0, e.what());
  }
}

json epoch_to_json(const EpochMetrics& m) {
  return {{"epoch", m.epoch},       {"L_S", m.loss_s},         {"L_MI", m.loss_mi},
          {"val_acc", m.val_acc},   {"val_loss", m.val_loss},  {"test_acc", m.test_acc},
          {"wallclock_ms", m.wallclock_ms}, {"sup_ms", m.sup_ms}, {"mi_ms", m.mi_ms}};
}

Stats summarize(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(xs.size()));
  return s;
}

RunOutput run_once(const Dataset& ds, double ratio, std::uint64_t seed, const TrainConfig& base_cfg,
                   const std::string& variant, const std::optional<std::filesystem::path>& out) {
  TrainConfig cfg = base_cfg;
  cfg.seed = seed;
  RunOutput r;
  r.split = generate_split(ds.graph, ratio, seed);
  std::ofstream log;
  const std::string stem = variant + "-seed" + std::to_string(seed);
  if (out) {
    std::filesystem::create_directories(*out);
    log.open(*out / (stem + ".jsonl"));
  }
  double total_ms = 0.0;
  r.result = train(ds.graph, ds.ops, ds.index, r.split, cfg, [&](const EpochMetrics& m) {
    total_ms += m.wallclock_ms;
    if (log) log << epoch_to_json(m).dump() << "\n";
  });
  auto& s = r.summary;
  s.variant = variant;
  s.seed = seed;
  s.test_acc = r.result.test_acc;
  s.val_acc = r.result.best_val;
  s.best_epoch = r.result.best_epoch;
  s.epochs_run = static_cast<int>(r.result.history.size());
  s.ms_per_epoch = s.epochs_run ? total_ms / s.epochs_run : 0.0;
  if (out) {
    save_split(r.split, *out / (stem + ".split.json"));
    save_checkpoint(r.result.model.params, *out / (stem + ".ckpt.json"),
                    {{"variant", variant},
                     {"seed", seed},
                     {"train_ratio", ratio},
                     {"test_acc", s.test_acc},
                     {"val_acc", s.val_acc},
                     {"best_epoch", s.best_epoch},
                     {"config", config_to_json(cfg)}});
  }
  return r;
}

ExperimentResult run_experiment(const Dataset& ds, double ratio, const std::vector<std::uint64_t>& seeds,
                                const TrainConfig& cfg, const std::string& variant,
                                const std::optional<std::filesystem::path>& out) {
  ExperimentResult res;
  std::vector<double> acc;
  for (auto seed : seeds) {
    auto r = run_once(ds, ratio, seed, cfg, variant, out);
    acc.push_back(r.summary.test_acc);
    res.runs.push_back(r.summary);
  }
  res.test = summarize(acc);
  return res;
}

void write_summary_csv(const std::vector<RunSummary>& runs, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw FormatError(file.string(), 0, "cannot write");
  os << "variant,seed,test_acc,val_acc,best_epoch,epochs_run,ms_per_epoch\n";
  os.precision(17);
  for (const auto& r : runs)
    os << r.variant << ',' << r.seed << ',' << r.test_acc << ',' << r.val_acc << ',' << r.best_epoch << ','
       << r.epochs_run << ',' << r.ms_per_epoch << '\n';
}

std::vector<Variant> ablation_variants() {
  return {{"full", false, false, false},
          {"no_novelty", true, false, false},
          {"no_task", false, true, false},
          {"neither", true, true, false}};
}

TrainConfig apply(TrainConfig cfg, const Variant& v) {
  cfg.no_novelty = v.no_novelty;
  cfg.no_task_weights = v.no_task_weights;
  cfg.base_only = v.base_only;
  return cfg;
}

namespace {

std::vector<NodeId> ball_without(const AttributedGraph& g, NodeId v) {
  auto ball = khop_neighborhood(g, v, 2);
  ball.erase(std::remove(ball.begin(), ball.end(), v), ball.end());
  return ball;
}

}  // namespace

std::vector<double> label_fraction(const AttributedGraph& g, const Split& split, std::span<const NodeId> nodes) {
  std::vector<char> is_train(g.num_nodes(), 0);
  for (NodeId v : split.train) is_train[static_cast<std::size_t>(v)] = 1;
  std::vector<double> out;
  out.reserve(nodes.size());
  for (NodeId v : nodes) {
    auto ball = ball_without(g, v);
    std::size_t hit = 0;
    for (NodeId u : ball) hit += is_train[static_cast<std::size_t>(u)];
    out.push_back(ball.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(ball.size()));
  }
  return out;
}

std::vector<double> attribute_diversity(const AttributedGraph& g, std::span<const NodeId> nodes) {
  const SparseMatrix& x = g.features();
  std::vector<double> norm(g.num_nodes());
  for (std::size_t v = 0; v < norm.size(); ++v) norm[v] = x.row(static_cast<Eigen::Index>(v)).norm();
  std::vector<double> out;
  out.reserve(nodes.size());
  for (NodeId v : nodes) {
    auto ball = ball_without(g, v);
    double total = 0.0;
    for (NodeId u : ball) {
      const double nv = norm[static_cast<std::size_t>(v)], nu = norm[static_cast<std::size_t>(u)];
      if (nv == 0.0 || nu == 0.0) {
        total += 1.0;
        continue;
      }
      const double dot = x.row(v).dot(x.row(u));
      total += 1.0 - dot / (nv * nu);
    }
    out.push_back(ball.empty() ? 0.0 : total / static_cast<double>(ball.size()));
  }
  return out;
}

QuartileReport quartile_analysis(const std::string& statistic, std::span<const double> values,
                                 std::span<const NodeId> nodes, const AttributedGraph& g,
                                 std::span<const int> pred_full, std::span<const int> pred_base) {
  if (values.size() != nodes.size()) throw ShapeError("quartile_analysis: one value per node expected");
  QuartileReport rep;
  rep.statistic = statistic;
  if (nodes.empty()) return rep;
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] != values[b] ? values[a] < values[b] : nodes[a] < nodes[b];
  });
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  rep.degenerate = *lo == *hi;
  const std::size_t k = rep.degenerate ? 1 : 4;
  const std::size_t n = nodes.size();
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t begin = b * n / k, end = (b + 1) * n / k;
    Quartile q;
    q.count = end - begin;
    if (q.count == 0) {
      rep.buckets.push_back(q);
      continue;
    }
    q.lo = values[order[begin]];
    q.hi = values[order[end - 1]];
    std::size_t ok_full = 0, ok_base = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const NodeId v = nodes[order[i]];
      ok_full += pred_full[static_cast<std::size_t>(v)] == g.label(v) ? 1 : 0;
      ok_base += pred_base[static_cast<std::size_t>(v)] == g.label(v) ? 1 : 0;
    }
    q.acc_full = static_cast<double>(ok_full) / static_cast<double>(q.count);
    q.acc_base = static_cast<double>(ok_base) / static_cast<double>(q.count);
    rep.buckets.push_back(q);
  }
  return rep;
}

void write_quartile_csv(const std::vector<QuartileReport>& reports, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw FormatError(file.string(), 0, "cannot write");
  os << "statistic,quartile,count,lo,hi,acc_full,acc_base\n";
  for (const auto& r : reports)
    for (std::size_t b = 0; b < r.buckets.size(); ++b) {
      const auto& q = r.buckets[b];
      os << r.statistic << ",Q" << b + 1 << ',' << q.count << ',' << q.lo << ',' << q.hi << ',' << q.acc_full << ','
         << q.acc_base << '\n';
    }
}

namespace {

struct PhaseTimes {
  double epoch = 0.0, mi = 0.0;
};

PhaseTimes steady_state(const Dataset& ds, const Split& split, TrainConfig cfg, const BenchOptions& opts) {
  cfg.epochs = static_cast<int>(opts.epochs);
  cfg.patience = cfg.epochs + 1;  // never stop early while timing
  PhaseTimes t;
  std::size_t counted = 0;
  train(ds.graph, ds.ops, ds.index, split, cfg, [&](const EpochMetrics& m) {
    if (static_cast<std::size_t>(m.epoch) <= opts.warmup) return;
    t.epoch += m.wallclock_ms;
    t.mi += m.mi_ms;
    ++counted;
  });
  if (counted) {
    t.epoch /= static_cast<double>(counted);
    t.mi /= static_cast<double>(counted);
  }
  return t;
}

}  // namespace

BenchRow bench_runtime(std::size_t nodes, std::size_t attach, const BenchOptions& opts) {
  if (opts.epochs <= opts.warmup) throw ContractError("bench_runtime: epochs must exceed warmup");
  synthetic::FeatureSpec fs{.dim = 1000, .active = 10, .num_classes = 5};
  Dataset ds = wrap_graph(synthetic::barabasi_albert(nodes, attach, opts.seed, fs));
  Split split = generate_split(ds.graph, 0.4, opts.seed);
  TrainConfig cfg;
  cfg.seed = opts.seed;
  cfg.q = opts.q;
  cfg.gcn = opts.gcn;
  BenchRow row{.nodes = nodes, .attach = attach, .q = opts.q};
  TrainConfig base = cfg;
  base.base_only = true;
  row.base_ms = steady_state(ds, split, base, opts).epoch;
  auto full = steady_state(ds, split, cfg, opts);
  row.full_ms = full.epoch;
  row.mi_ms = full.mi;
  return row;
}

void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream os(file);
  if (!os) throw FormatError(file.string(), 0, "cannot write");
  os << "nodes,attach,q,base_ms,full_ms,mi_ms,gap_ms\n";
  for (const auto& r : rows)
    os << r.nodes << ',' << r.attach << ',' << r.q << ',' << r.base_ms << ',' << r.full_ms << ',' << r.mi_ms << ','
       << r.full_ms - r.base_ms << '\n';
}

}  // namespace infomotif::harness
