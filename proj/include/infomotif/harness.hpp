#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "infomotif/curriculum.hpp"
#include "infomotif/gnn.hpp"
#include "infomotif/graph.hpp"
#include "infomotif/motif.hpp"
#include "infomotif/optim.hpp"

namespace infomotif::harness {

using json = nlohmann::json;

// --- gradient fidelity on the toy graph ------------------------------------

struct GradCheckPart {
  std::string name;  // "L_S", "L_MI^t", "combined"
  ad::GradCheckReport report;
};

struct ToyGradCheck {
  std::vector<GradCheckPart> parts;
  double max_rel_error = 0.0;
};

/// Finite-difference check of L_S, each per-motif L_MI^t, and their sum on the
/// 12-node toy graph (dropout off, fixed samples).
ToyGradCheck toy_gradcheck(std::uint64_t seed = 0, bool directed = false);

// --- datasets and runs ----------------------------------------------------

struct Dataset {
  AttributedGraph graph;
  MotifRegistry registry;
  InstanceIndex index;
  GraphOperators ops;
  std::filesystem::path dir;
};

/// Loads a canonical dataset directory; the registry defaults to the graph's
/// directedness.
Dataset open_dataset(const std::filesystem::path& dir, const std::optional<std::filesystem::path>& registry = {});
/// Wraps an in-memory graph.
Dataset wrap_graph(AttributedGraph g, std::optional<MotifRegistry> registry = {});

json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const json& j);

struct RunManifest {
  TrainConfig config;
  std::string dataset;
  std::uint64_t dataset_checksum = 0;
  std::uint64_t registry_checksum = 0;
  double train_ratio = 0.0;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out;

  json to_json() const;
  static RunManifest from_json(const json& j);
};

void write_manifest(const RunManifest& m, const std::filesystem::path& file);
RunManifest read_manifest(const std::filesystem::path& file);

json epoch_to_json(const EpochMetrics& m);

struct RunSummary {
  std::string variant;
  std::uint64_t seed = 0;
  double test_acc = 0.0;
  double val_acc = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  double ms_per_epoch = 0.0;
};

struct Stats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};
Stats summarize(const std::vector<double>& xs);

/// One training run on split `seed` (class-stratified at `ratio`). When
/// `out` is set, writes <out>/<variant>-seed<k>.jsonl and a checkpoint.
struct RunOutput {
  RunSummary summary;
  TrainResult result;
  Split split;
};
RunOutput run_once(const Dataset& ds, double ratio, std::uint64_t seed, const TrainConfig& cfg,
                   const std::string& variant, const std::optional<std::filesystem::path>& out = {});

struct ExperimentResult {
  std::vector<RunSummary> runs;
  Stats test;
};

ExperimentResult run_experiment(const Dataset& ds, double ratio, const std::vector<std::uint64_t>& seeds,
                                const TrainConfig& cfg, const std::string& variant,
                                const std::optional<std::filesystem::path>& out = {});

void write_summary_csv(const std::vector<RunSummary>& runs, const std::filesystem::path& file);

struct Variant {
  std::string name;
  bool no_novelty = false;
  bool no_task_weights = false;
  bool base_only = false;
};

/// full, no_novelty, no_task, neither (the four ablation rows).
std::vector<Variant> ablation_variants();
TrainConfig apply(TrainConfig cfg, const Variant& v);

// --- quartile analyses -----------------------------------------------------

/// Per node: fraction of the nodes within 2 hops (excluding the node) that are
/// training nodes; 0 without neighbors.
std::vector<double> label_fraction(const AttributedGraph& g, const Split& split, std::span<const NodeId> nodes);

/// Per node: mean cosine distance between its features and those of each node
/// within 2 hops (excluding itself). A zero feature row is at distance 1 from
/// everything; 0 without neighbors.
std::vector<double> attribute_diversity(const AttributedGraph& g, std::span<const NodeId> nodes);

struct Quartile {
  std::size_t count = 0;
  double lo = 0.0, hi = 0.0;  // statistic range in the bucket
  double acc_full = 0.0;
  double acc_base = 0.0;
};

struct QuartileReport {
  std::string statistic;
  std::vector<Quartile> buckets;  // 4, or 1 when the statistic is constant
  bool degenerate = false;
};

/// Buckets `nodes` by ascending statistic (ties by node id) into four groups
/// whose sizes differ by at most one.
QuartileReport quartile_analysis(const std::string& statistic, std::span<const double> values,
                                 std::span<const NodeId> nodes, const AttributedGraph& g,
                                 std::span<const int> pred_full, std::span<const int> pred_base);

void write_quartile_csv(const std::vector<QuartileReport>& reports, const std::filesystem::path& file);

// --- runtime benchmark ----------------------------------------------------

struct BenchRow {
  std::size_t nodes = 0;
  std::size_t attach = 0;
  std::size_t q = 0;
  double base_ms = 0.0;  // steady-state epoch, base GCN
  double full_ms = 0.0;  // steady-state epoch, full model
  double mi_ms = 0.0;    // regularizer phase within full_ms
};

struct BenchOptions {
  std::size_t epochs = 6;
  std::size_t warmup = 3;  // skipped epochs
  std::size_t q = 20;
  std::uint64_t seed = 0;
  GcnConfig gcn;
};

BenchRow bench_runtime(std::size_t nodes, std::size_t attach, const BenchOptions& opts = {});
void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& file);

}  // namespace infomotif::harness
