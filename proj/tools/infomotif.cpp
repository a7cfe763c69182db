// infomotif command-line front end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infomotif/harness.hpp"
#include "infomotif/optim.hpp"

namespace fs = std::filesystem;
using namespace infomotif;
using harness::json;

namespace {

struct Common {
  std::string dataset;
  std::string registry;
  std::string out = "runs";
  double ratio = 0.4;
  std::uint64_t seed = 0;
  std::size_t seeds = 0;  // 0: just --seed
  std::size_t q = 20;
  double lr = 1e-3;
  int epochs = 100;
  bool deterministic = true;
  bool no_novelty = false;
  bool no_task_weights = false;
  bool base_only = false;
  std::vector<Eigen::Index> hidden{256, 256};

  TrainConfig config() const {
    TrainConfig c;
    c.q = q;
    c.lr = lr;
    c.epochs = epochs;
    c.seed = seed;
    c.deterministic = deterministic;
    c.no_novelty = no_novelty;
    c.no_task_weights = no_task_weights;
    c.base_only = base_only;
    c.gcn.hidden = hidden;
    return c;
  }

  std::vector<std::uint64_t> seed_list() const {
    if (seeds == 0) return {seed};
    std::vector<std::uint64_t> s(seeds);
    std::iota(s.begin(), s.end(), seed);
    return s;
  }

  std::optional<fs::path> registry_path() const {
    return registry.empty() ? std::nullopt : std::optional<fs::path>(registry);
  }
};

void add_dataset(CLI::App* app, Common& c) {
  app->add_option("--dataset", c.dataset, "dataset directory")->required();
  app->add_option("--registry", c.registry, "motif registry JSON (default: by graph directedness)");
  app->add_option("--out", c.out, "output directory");
}

void add_split(CLI::App* app, Common& c) {
  app->add_option("--ratio", c.ratio, "training ratio of labeled nodes")->check(CLI::Range(0.0, 0.8));
  app->add_option("--seed", c.seed, "split and model seed (first seed with --seeds)");
  app->add_option("--seeds", c.seeds, "number of consecutive seeds");
}

void add_training(CLI::App* app, Common& c) {
  app->add_option("--q", c.q, "sampled instances per node and motif")->check(CLI::PositiveNumber);
  app->add_option("--lr", c.lr, "learning rate")->check(CLI::PositiveNumber);
  app->add_option("--epochs", c.epochs, "maximum epochs")->check(CLI::Range(1, 100));
  app->add_option("--hidden", c.hidden, "GCN layer sizes")->expected(1, 8);
  app->add_flag("--deterministic,!--no-deterministic", c.deterministic, "single-threaded fixed-order run");
  app->add_flag("--no-novelty", c.no_novelty, "uniform sample weights");
  app->add_flag("--no-task-weights", c.no_task_weights, "alpha = 1 inside the MI loss");
  app->add_flag("--base-only", c.base_only, "plain GCN, no regularizer");
}

harness::RunManifest manifest_for(const harness::Dataset& ds, const Common& c, const TrainConfig& cfg) {
  harness::RunManifest m;
  m.config = cfg;
  m.dataset = c.dataset;
  m.dataset_checksum = graph_checksum(ds.graph);
  m.registry_checksum = registry_checksum(ds.registry);
  m.train_ratio = c.ratio;
  m.seeds = c.seed_list();
  m.out = c.out;
  return m;
}

std::string variant_name(const Common& c) {
  if (c.base_only) return "base";
  if (c.no_novelty && c.no_task_weights) return "neither";
  if (c.no_novelty) return "no_novelty";
  if (c.no_task_weights) return "no_task";
  return "full";
}

int cmd_train(const Common& c) {
  auto ds = harness::open_dataset(c.dataset, c.registry_path());
  const TrainConfig cfg = c.config();
  harness::write_manifest(manifest_for(ds, c, cfg), fs::path(c.out) / "manifest.json");
  const std::string variant = variant_name(c);
  std::vector<harness::RunSummary> runs;
  std::vector<double> acc;
  for (auto seed : c.seed_list()) {
    auto r = harness::run_once(ds, c.ratio, seed, cfg, variant, fs::path(c.out));
    std::printf("%s seed %llu: test %.4f val %.4f (best epoch %d of %d, %.0f ms/epoch)\n", variant.c_str(),
                static_cast<unsigned long long>(seed), r.summary.test_acc, r.summary.val_acc, r.summary.best_epoch,
                r.summary.epochs_run, r.summary.ms_per_epoch);
    runs.push_back(r.summary);
    acc.push_back(r.summary.test_acc);
  }
  auto st = harness::summarize(acc);
  harness::write_summary_csv(runs, fs::path(c.out) / "summary.csv");
  std::printf("%s: mean test %.4f +- %.4f over %zu run(s)\n", variant.c_str(), st.mean, st.std, runs.size());
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& checkpoint, const std::string& split_file) {
  auto ds = harness::open_dataset(c.dataset, c.registry_path());
  json meta;
  auto tensors = ad::load_checkpoint(checkpoint, &meta);
  TrainConfig cfg = meta.contains("config") ? harness::config_from_json(meta["config"]) : c.config();
  Split split;
  if (!split_file.empty())
    split = load_split(split_file);
  else
    split = generate_split(ds.graph, meta.value("train_ratio", c.ratio), meta.value("seed", c.seed));
  ModelState model = init_model(ds.graph, ds.index.num_motifs(), cfg);
  model.params.restore(tensors);
  auto e = evaluate(model, ds.graph, ds.ops, split);
  harness::RunManifest m = manifest_for(ds, c, cfg);
  m.train_ratio = split.train_ratio;
  m.seeds = {split.seed};
  harness::write_manifest(m, fs::path(c.out) / "manifest.json");
  std::printf("train %.4f val %.4f test %.4f\n", e.train_acc, e.val_acc, e.test_acc);
  for (std::size_t k = 0; k < e.per_class_test.size(); ++k) std::printf("  class %zu: %.4f\n", k, e.per_class_test[k]);
  if (meta.contains("test_acc")) {
    const double recorded = meta["test_acc"].get<double>();
    std::printf("recorded test %.4f (%s)\n", recorded, recorded == e.test_acc ? "identical" : "differs");
  }
  return 0;
}

int cmd_split(const Common& c) {
  auto g = load_dataset(c.dataset);
  fs::create_directories(c.out);
  for (auto seed : c.seed_list()) {
    auto s = generate_split(g, c.ratio, seed);
    auto file = fs::path(c.out) / ("split-" + std::to_string(seed) + ".json");
    save_split(s, file);
    std::printf("%s: train %zu val %zu test %zu\n", file.string().c_str(), s.train.size(), s.val.size(),
                s.test.size());
  }
  harness::RunManifest m;
  m.config = c.config();
  m.dataset = c.dataset;
  m.dataset_checksum = graph_checksum(g);
  m.train_ratio = c.ratio;
  m.seeds = c.seed_list();
  m.out = c.out;
  harness::write_manifest(m, fs::path(c.out) / "manifest.json");
  return 0;
}

int cmd_motifs(const Common& c) {
  auto ds = harness::open_dataset(c.dataset, c.registry_path());
  fs::create_directories(c.out);
  std::ofstream os(fs::path(c.out) / "motifs.csv");
  os << "id,name,directed,instances,nodes_covered\n";
  for (std::size_t t = 0; t < ds.registry.size(); ++t) {
    const auto& p = ds.registry[t];
    std::size_t covered = 0;
    for (std::size_t v = 0; v < ds.graph.num_nodes(); ++v)
      covered += ds.index.degree(static_cast<int>(t), static_cast<NodeId>(v)) > 0 ? 1 : 0;
    std::printf("%-4s %-18s %10zu instances, %6zu nodes covered\n", p.id.c_str(), p.name.c_str(),
                ds.index.count(static_cast<int>(t)), covered);
    os << p.id << ',' << p.name << ',' << p.directed << ',' << ds.index.count(static_cast<int>(t)) << ',' << covered
       << '\n';
  }
  harness::write_manifest(manifest_for(ds, c, c.config()), fs::path(c.out) / "manifest.json");
  return 0;
}

int cmd_ablate(const Common& c) {
  auto ds = harness::open_dataset(c.dataset, c.registry_path());
  auto seeds = c.seeds ? c.seed_list() : std::vector<std::uint64_t>{};
  if (seeds.empty()) {
    seeds.resize(10);
    std::iota(seeds.begin(), seeds.end(), c.seed);
  }
  Common mc = c;
  mc.seeds = seeds.size();
  harness::write_manifest(manifest_for(ds, mc, c.config()), fs::path(c.out) / "manifest.json");
  std::vector<harness::RunSummary> all;
  std::ofstream table(fs::path(c.out) / "ablation.csv");
  table << "variant,mean_test_acc,std_test_acc,runs\n";
  for (const auto& v : harness::ablation_variants()) {
    auto res = harness::run_experiment(ds, c.ratio, seeds, harness::apply(c.config(), v), v.name, fs::path(c.out));
    all.insert(all.end(), res.runs.begin(), res.runs.end());
    table << v.name << ',' << res.test.mean << ',' << res.test.std << ',' << res.runs.size() << '\n';
    table.flush();
    std::printf("%-11s %.4f +- %.4f\n", v.name.c_str(), res.test.mean, res.test.std);
    std::fflush(stdout);
  }
  harness::write_summary_csv(all, fs::path(c.out) / "summary.csv");
  return 0;
}

int cmd_quartiles(const Common& c) {
  auto ds = harness::open_dataset(c.dataset, c.registry_path());
  harness::write_manifest(manifest_for(ds, c, c.config()), fs::path(c.out) / "manifest.json");
  std::vector<harness::QuartileReport> reports;
  for (auto seed : c.seed_list()) {
    TrainConfig full = c.config();
    full.base_only = false;
    TrainConfig base = full;
    base.base_only = true;
    auto rf = harness::run_once(ds, c.ratio, seed, full, "full", fs::path(c.out));
    auto rb = harness::run_once(ds, c.ratio, seed, base, "base", fs::path(c.out));
    auto pf = predict(rf.result.model, ds.ops);
    auto pb = predict(rb.result.model, ds.ops);
    const auto& test = rf.split.test;
    for (const char* stat : {"label_fraction", "attribute_diversity"}) {
      auto values = std::string(stat) == "label_fraction" ? harness::label_fraction(ds.graph, rf.split, test)
                                                          : harness::attribute_diversity(ds.graph, test);
      auto rep = harness::quartile_analysis(stat, values, test, ds.graph, pf.label, pb.label);
      rep.statistic += "-seed" + std::to_string(seed);
      if (rep.degenerate) std::fprintf(stderr, "warning: %s is constant on the test set\n", stat);
      for (std::size_t b = 0; b < rep.buckets.size(); ++b)
        std::printf("%s Q%zu n=%zu full %.4f base %.4f\n", rep.statistic.c_str(), b + 1, rep.buckets[b].count,
                    rep.buckets[b].acc_full, rep.buckets[b].acc_base);
      reports.push_back(rep);
    }
  }
  harness::write_quartile_csv(reports, fs::path(c.out) / "quartiles.csv");
  return 0;
}

int cmd_bench(const std::string& out, const std::vector<std::size_t>& nodes, const std::vector<std::size_t>& attach,
              std::size_t q, std::size_t epochs, std::uint64_t seed) {
  harness::BenchOptions opts;
  opts.q = q;
  opts.epochs = epochs;
  opts.seed = seed;
  std::vector<harness::BenchRow> rows;
  for (auto n : nodes)
    for (auto m : attach) {
      auto r = harness::bench_runtime(n, m, opts);
      std::printf("n=%zu m=%zu q=%zu: base %.1f ms, full %.1f ms (regularizer %.1f ms), gap %.1f ms\n", n, m, q,
                  r.base_ms, r.full_ms, r.mi_ms, r.full_ms - r.base_ms);
      std::fflush(stdout);
      rows.push_back(r);
    }
  harness::write_bench_csv(rows, fs::path(out) / "bench.csv");
  harness::RunManifest man;
  man.config.q = q;
  man.config.epochs = static_cast<int>(epochs);
  man.config.seed = seed;
  man.dataset = "barabasi-albert";
  man.seeds = {seed};
  man.out = out;
  harness::write_manifest(man, fs::path(out) / "manifest.json");
  return 0;
}

int cmd_gradcheck(bool directed, const std::string& out) {
  auto r = harness::toy_gradcheck(0, directed);
  for (const auto& p : r.parts)
    std::printf("%-9s max rel error %.3e (%s[%ld,%ld], %zu coords)\n", p.name.c_str(), p.report.max_rel_error,
                p.report.worst_param.c_str(), static_cast<long>(p.report.worst_row),
                static_cast<long>(p.report.worst_col), p.report.coords_checked);
  std::printf("max relative error: %.3e\n", r.max_rel_error);
  harness::RunManifest man;
  man.dataset = "toy";
  man.out = out;
  harness::write_manifest(man, fs::path(out) / "manifest.json");
  return r.max_rel_error < 1e-4 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"motif-regularized graph neural network training"};
  app.require_subcommand(1);
  Common c;

  auto* train = app.add_subcommand("train", "train on one or more splits");
  add_dataset(train, c);
  add_split(train, c);
  add_training(train, c);

  std::string checkpoint, split_file;
  auto* evaluate = app.add_subcommand("evaluate", "evaluate a saved checkpoint");
  add_dataset(evaluate, c);
  add_split(evaluate, c);
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--split", split_file, "split file (default: regenerate from checkpoint metadata)")
      ->check(CLI::ExistingFile);

  auto* split = app.add_subcommand("split", "write class-stratified splits");
  add_dataset(split, c);
  add_split(split, c);

  auto* motifs = app.add_subcommand("motifs", "enumerate motif instances");
  add_dataset(motifs, c);

  auto* ablate = app.add_subcommand("ablate", "four-variant ablation table");
  add_dataset(ablate, c);
  add_split(ablate, c);
  add_training(ablate, c);

  auto* quartiles = app.add_subcommand("quartiles", "accuracy by label-fraction and attribute-diversity quartile");
  add_dataset(quartiles, c);
  add_split(quartiles, c);
  add_training(quartiles, c);

  std::vector<std::size_t> bench_nodes{5000}, bench_attach{1, 2, 4, 8};
  std::size_t bench_epochs = 6;
  auto* bench = app.add_subcommand("bench", "epoch time on Barabasi-Albert graphs");
  bench->add_option("--nodes", bench_nodes, "node counts");
  bench->add_option("--attach", bench_attach, "attachment parameters");
  bench->add_option("--q", c.q, "sampled instances per node and motif")->check(CLI::PositiveNumber);
  bench->add_option("--epochs", bench_epochs, "epochs per run (first 3 are not timed)")->check(CLI::Range(4, 100));
  bench->add_option("--seed", c.seed, "generator seed");
  bench->add_option("--out", c.out, "output directory");

  bool toy = false, directed = false;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the full loss");
  gradcheck->add_flag("--toy", toy, "12-node toy graph")->required();
  gradcheck->add_flag("--directed", directed, "directed toy graph with the five directed motifs");
  gradcheck->add_option("--out", c.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return 2;
  }

  try {
    if (*train) return cmd_train(c);
    if (*evaluate) return cmd_evaluate(c, checkpoint, split_file);
    if (*split) return cmd_split(c);
    if (*motifs) return cmd_motifs(c);
    if (*ablate) return cmd_ablate(c);
    if (*quartiles) return cmd_quartiles(c);
    if (*bench) return cmd_bench(c.out, bench_nodes, bench_attach, c.q, bench_epochs, c.seed);
    if (*gradcheck) return cmd_gradcheck(directed, c.out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
