#include "infomotif/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace infomotif {

namespace fs = std::filesystem;
using nlohmann::json;

bool Csr::contains(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

Csr Csr::from_pairs(std::size_t num_nodes, std::span<const Edge> pairs) {
  Csr csr;
  csr.offsets.assign(num_nodes + 1, 0);
  for (const auto& [u, v] : pairs) ++csr.offsets[static_cast<std::size_t>(u) + 1];
  std::partial_sum(csr.offsets.begin(), csr.offsets.end(), csr.offsets.begin());
  csr.targets.resize(pairs.size());
  std::vector<std::int64_t> cursor(csr.offsets.begin(), csr.offsets.end() - 1);
  for (const auto& [u, v] : pairs) csr.targets[static_cast<std::size_t>(cursor[u]++)] = v;
  for (std::size_t v = 0; v < num_nodes; ++v)
    std::sort(csr.targets.begin() + csr.offsets[v], csr.targets.begin() + csr.offsets[v + 1]);
  return csr;
}

AttributedGraph AttributedGraph::build(std::string name, std::size_t num_nodes, bool directed,
                                       std::vector<Edge> edges, SparseMatrix features,
                                       std::vector<int> labels, int num_classes,
                                       LoadReport* report) {
  AttributedGraph g;
  g.name_ = std::move(name);
  g.num_nodes_ = num_nodes;
  g.directed_ = directed;
  g.num_classes_ = num_classes;

  if (static_cast<std::size_t>(features.rows()) != num_nodes)
    throw IntegrityError("feature matrix has " + std::to_string(features.rows()) +
                         " rows, expected " + std::to_string(num_nodes));
  if (labels.empty()) labels.assign(num_nodes, kUnlabeled);
  if (labels.size() != num_nodes) throw IntegrityError("label vector length mismatch");
  for (std::size_t v = 0; v < num_nodes; ++v) {
    int y = labels[v];
    if (y != kUnlabeled && (y < 0 || y >= num_classes))
      throw IntegrityError("node " + std::to_string(v) + " has class " + std::to_string(y) +
                           " outside [0, " + std::to_string(num_classes) + ")");
  }

  std::size_t self_loops = 0;
  std::vector<Edge> kept;
  kept.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= num_nodes ||
        static_cast<std::size_t>(v) >= num_nodes)
      throw IntegrityError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                           ") references a node outside [0, " + std::to_string(num_nodes) + ")");
    if (u == v) {
      ++self_loops;
      continue;
    }
    if (!directed && u > v) std::swap(u, v);
    kept.emplace_back(u, v);
  }
  std::sort(kept.begin(), kept.end());
  auto last = std::unique(kept.begin(), kept.end());
  std::size_t duplicates = static_cast<std::size_t>(kept.end() - last);
  kept.erase(last, kept.end());
  g.edges_ = std::move(kept);

  if (report) {
    report->self_loops_dropped += self_loops;
    report->duplicates_dropped += duplicates;
  }
  if (self_loops + duplicates > 0)
    std::cerr << "warning: " << g.name_ << ": dropped " << self_loops << " self-loop(s) and "
              << duplicates << " duplicate edge(s)\n";

  std::vector<Edge> sym;
  sym.reserve(2 * g.edges_.size());
  for (auto [u, v] : g.edges_) {
    sym.emplace_back(u, v);
    sym.emplace_back(v, u);
  }
  std::sort(sym.begin(), sym.end());
  sym.erase(std::unique(sym.begin(), sym.end()), sym.end());
  g.undirected_ = Csr::from_pairs(num_nodes, sym);

  if (directed) {
    g.out_ = Csr::from_pairs(num_nodes, g.edges_);
    std::vector<Edge> rev;
    rev.reserve(g.edges_.size());
    for (auto [u, v] : g.edges_) rev.emplace_back(v, u);
    g.in_ = Csr::from_pairs(num_nodes, rev);
  } else {
    g.out_ = g.undirected_;
    g.in_ = g.undirected_;
  }

  features.makeCompressed();
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);
  return g;
}

bool AttributedGraph::has_edge(NodeId u, NodeId v) const { return out_.contains(u, v); }

std::vector<NodeId> AttributedGraph::labeled_nodes() const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < num_nodes_; ++v)
    if (labels_[v] != kUnlabeled) out.push_back(static_cast<NodeId>(v));
  return out;
}

AttributedGraph AttributedGraph::induced_subgraph(std::span<const NodeId> nodes) const {
  std::vector<NodeId> remap(num_nodes_, -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) remap[static_cast<std::size_t>(nodes[i])] = static_cast<NodeId>(i);

  std::vector<Edge> edges;
  for (auto [u, v] : edges_)
    if (remap[u] >= 0 && remap[v] >= 0) edges.emplace_back(remap[u], remap[v]);

  std::vector<Triplet> trip;
  std::vector<int> labels(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    NodeId v = nodes[i];
    for (SparseMatrix::InnerIterator it(features_, v); it; ++it)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(it.col()), it.value());
    labels[i] = labels_[static_cast<std::size_t>(v)];
  }
  SparseMatrix x(static_cast<Eigen::Index>(nodes.size()), features_.cols());
  x.setFromTriplets(trip.begin(), trip.end());
  return build(name_, nodes.size(), directed_, std::move(edges), std::move(x), std::move(labels),
               num_classes_);
}

AttributedGraph AttributedGraph::with_features(SparseMatrix features) const {
  if (static_cast<std::size_t>(features.rows()) != num_nodes_)
    throw ShapeError("with_features: row count mismatch");
  AttributedGraph g = *this;
  features.makeCompressed();
  g.features_ = std::move(features);
  return g;
}

bool AttributedGraph::operator==(const AttributedGraph& o) const {
  if (name_ != o.name_ || num_nodes_ != o.num_nodes_ || directed_ != o.directed_ ||
      edges_ != o.edges_ || labels_ != o.labels_ || num_classes_ != o.num_classes_ ||
      features_.rows() != o.features_.rows() || features_.cols() != o.features_.cols() ||
      features_.nonZeros() != o.features_.nonZeros())
    return false;
  for (Eigen::Index r = 0; r < features_.outerSize(); ++r) {
    SparseMatrix::InnerIterator a(features_, r), b(o.features_, r);
    for (; a && b; ++a, ++b)
      if (a.col() != b.col() || std::bit_cast<std::uint64_t>(a.value()) !=
                                    std::bit_cast<std::uint64_t>(b.value()))
        return false;
    if (a || b) return false;
  }
  return true;
}

std::pair<std::vector<int>, int> connected_components(const AttributedGraph& g) {
  std::vector<int> comp(g.num_nodes(), -1);
  int count = 0;
  std::vector<NodeId> stack;
  for (std::size_t s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = count;
    stack.push_back(static_cast<NodeId>(s));
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(u))
        if (comp[w] < 0) {
          comp[w] = count;
          stack.push_back(w);
        }
    }
    ++count;
  }
  return {comp, count};
}

std::vector<NodeId> largest_component(const AttributedGraph& g) {
  auto [comp, count] = connected_components(g);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(count), 0);
  for (int c : comp) ++sizes[static_cast<std::size_t>(c)];
  // Component ids are assigned in order of their smallest node, so max_element
  // breaks ties toward the smallest node id.
  int best = count == 0 ? 0 : static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<NodeId> nodes;
  for (std::size_t v = 0; v < comp.size(); ++v)
    if (comp[v] == best) nodes.push_back(static_cast<NodeId>(v));
  return nodes;
}

// ---------------------------------------------------------------------------
// Dataset IO

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char extra_sep = '\0') {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [&](char c) { return c == ' ' || c == '\t' || c == '\r' || (extra_sep && c == extra_sep); };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, const std::string& file, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw FormatError(file, line, "cannot parse '" + std::string(s) + "' as a number");
  return value;
}

/// Calls fn(fields, line_number) for every non-empty, non-comment line.
template <typename Fn>
void for_each_record(const fs::path& path, Fn&& fn, char extra_sep = '\0') {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string(), 0, "cannot open file");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_fields(line, extra_sep);
    if (fields.empty()) continue;
    fn(fields, lineno);
  }
}

}  // namespace

AttributedGraph load_dataset(const fs::path& dir, LoadReport* report) {
  const fs::path meta_path = dir / "meta.json";
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw FormatError(meta_path.string(), 0, "cannot open file");
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::parse_error& e) {
    throw FormatError(meta_path.string(), 1, e.what());
  }
  for (const char* key : {"name", "directed", "num_classes"})
    if (!meta.contains(key)) throw FormatError(meta_path.string(), 1, std::string("missing key '") + key + "'");
  const std::string name = meta["name"].get<std::string>();
  const bool directed = meta["directed"].get<bool>();
  const int num_classes = meta["num_classes"].get<int>();
  const bool identity = meta.value("identity_features", false);
  std::int64_t declared_nodes = meta.value("num_nodes", std::int64_t{-1});
  std::int64_t max_id = -1;

  auto check_id = [&](std::int64_t id, const fs::path& file, std::size_t line) {
    if (id < 0) throw FormatError(file.string(), line, "negative node id");
    if (declared_nodes >= 0 && id >= declared_nodes)
      throw IntegrityError(file.string() + ":" + std::to_string(line) + ": dangling node id " +
                           std::to_string(id) + " (num_nodes = " + std::to_string(declared_nodes) + ")");
    max_id = std::max(max_id, id);
  };

  std::vector<Edge> edges;
  const fs::path edge_path = dir / "edges.tsv";
  for_each_record(edge_path, [&](auto& f, std::size_t line) {
    if (f.size() != 2) throw FormatError(edge_path.string(), line, "expected 2 columns");
    auto u = parse_number<std::int64_t>(f[0], edge_path.string(), line);
    auto v = parse_number<std::int64_t>(f[1], edge_path.string(), line);
    check_id(u, edge_path, line);
    check_id(v, edge_path, line);
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  });

  std::vector<std::pair<NodeId, int>> label_rows;
  const fs::path label_path = dir / "labels.tsv";
  for_each_record(label_path, [&](auto& f, std::size_t line) {
    if (f.size() != 2) throw FormatError(label_path.string(), line, "expected 2 columns");
    auto v = parse_number<std::int64_t>(f[0], label_path.string(), line);
    auto c = parse_number<int>(f[1], label_path.string(), line);
    check_id(v, label_path, line);
    if (c < 0 || c >= num_classes)
      throw IntegrityError(label_path.string() + ":" + std::to_string(line) + ": class " +
                           std::to_string(c) + " outside [0, " + std::to_string(num_classes) + ")");
    label_rows.emplace_back(static_cast<NodeId>(v), c);
  });

  std::vector<Triplet> trip;
  std::int64_t num_features = meta.value("num_features", std::int64_t{-1});
  std::int64_t max_col = -1;
  const fs::path sparse_path = dir / "features.tsv";
  const fs::path dense_path = dir / "features.csv";
  if (fs::exists(sparse_path)) {
    for_each_record(sparse_path, [&](auto& f, std::size_t line) {
      if (f.size() != 3) throw FormatError(sparse_path.string(), line, "expected row, col, value");
      auto r = parse_number<std::int64_t>(f[0], sparse_path.string(), line);
      auto c = parse_number<std::int64_t>(f[1], sparse_path.string(), line);
      auto x = parse_number<double>(f[2], sparse_path.string(), line);
      check_id(r, sparse_path, line);
      if (c < 0) throw FormatError(sparse_path.string(), line, "negative column");
      max_col = std::max(max_col, c);
      trip.emplace_back(static_cast<int>(r), static_cast<int>(c), x);
    });
  } else if (fs::exists(dense_path)) {
    std::int64_t row = 0;
    for_each_record(dense_path, [&](auto& f, std::size_t line) {
      check_id(row, dense_path, line);
      if (max_col >= 0 && static_cast<std::int64_t>(f.size()) != max_col + 1)
        throw FormatError(dense_path.string(), line, "ragged row");
      for (std::size_t c = 0; c < f.size(); ++c) {
        double x = parse_number<double>(f[c], dense_path.string(), line);
        if (x != 0.0) trip.emplace_back(static_cast<int>(row), static_cast<int>(c), x);
      }
      max_col = static_cast<std::int64_t>(f.size()) - 1;
      ++row;
    }, ',');
  } else if (!identity) {
    throw FormatError(sparse_path.string(), 0, "no feature file (features.tsv or features.csv)");
  }

  const std::size_t n = static_cast<std::size_t>(declared_nodes >= 0 ? declared_nodes : max_id + 1);
  if (identity) {
    trip.clear();
    for (std::size_t v = 0; v < n; ++v) trip.emplace_back(static_cast<int>(v), static_cast<int>(v), 1.0);
    num_features = static_cast<std::int64_t>(n);
  }
  if (num_features < 0) num_features = max_col + 1;
  if (max_col >= num_features)
    throw IntegrityError("feature column " + std::to_string(max_col) + " exceeds num_features");

  SparseMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(num_features));
  x.setFromTriplets(trip.begin(), trip.end());

  std::vector<int> labels(n, AttributedGraph::kUnlabeled);
  for (auto [v, c] : label_rows) labels[static_cast<std::size_t>(v)] = c;

  AttributedGraph full = AttributedGraph::build(name, n, directed, std::move(edges), std::move(x),
                                                std::move(labels), num_classes, report);
  auto keep = largest_component(full);
  if (report) report->nodes_outside_component = n - keep.size();
  if (keep.size() == n) return full;
  return full.induced_subgraph(keep);
}

void save_dataset(const AttributedGraph& g, const fs::path& dir) {
  fs::create_directories(dir);
  json meta = {{"name", g.name()},
               {"directed", g.directed()},
               {"num_classes", g.num_classes()},
               {"num_nodes", g.num_nodes()},
               {"num_features", g.num_features()}};
  std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";

  std::ofstream edges(dir / "edges.tsv");
  for (auto [u, v] : g.edges()) edges << u << '\t' << v << '\n';

  std::ofstream feats(dir / "features.tsv");
  char buf[64];
  const SparseMatrix& x = g.features();
  for (Eigen::Index r = 0; r < x.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(x, r); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      feats << r << '\t' << it.col() << '\t' << buf << '\n';
    }

  std::ofstream labels(dir / "labels.tsv");
  for (std::size_t v = 0; v < g.num_nodes(); ++v)
    if (g.labels()[v] != AttributedGraph::kUnlabeled) labels << v << '\t' << g.labels()[v] << '\n';
}

NormalizedAdjacency normalized_adjacency(const AttributedGraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<double> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v)
    inv_sqrt[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(static_cast<NodeId>(v)) + 1));
  std::vector<Triplet> trip;
  trip.reserve(n + 2 * g.num_undirected_edges());
  for (std::size_t v = 0; v < n; ++v) {
    trip.emplace_back(static_cast<int>(v), static_cast<int>(v), inv_sqrt[v] * inv_sqrt[v]);
    for (NodeId u : g.neighbors(static_cast<NodeId>(v)))
      trip.emplace_back(static_cast<int>(v), u, inv_sqrt[v] * inv_sqrt[static_cast<std::size_t>(u)]);
  }
  NormalizedAdjacency out;
  out.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.matrix.makeCompressed();
  return out;
}

// ---------------------------------------------------------------------------
// Splits

namespace {

/// Largest-remainder apportionment of `total` items across quotas.
std::vector<std::size_t> apportion(const std::vector<double>& quotas, std::size_t total) {
  std::vector<std::size_t> out(quotas.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < quotas.size(); ++i) {
    out[i] = static_cast<std::size_t>(std::floor(quotas[i]));
    assigned += out[i];
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a] - std::floor(quotas[a]) > quotas[b] - std::floor(quotas[b]);
  });
  for (std::size_t k = 0; assigned < total && k < order.size(); ++k, ++assigned) ++out[order[k]];
  return out;
}

}  // namespace

Split generate_split(const AttributedGraph& g, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0 - kValidationFraction))
    throw ContractError("train_ratio must lie in (0, 0.8)");
  const auto C = static_cast<std::size_t>(g.num_classes());
  std::vector<std::vector<NodeId>> by_class(C);
  for (NodeId v : g.labeled_nodes()) by_class[static_cast<std::size_t>(g.label(v))].push_back(v);
  std::size_t labeled = 0;
  for (std::size_t c = 0; c < C; ++c) {
    if (!by_class[c].empty() && by_class[c].size() < 3)
      throw ContractError("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                          " labeled node(s); stratification needs at least 3");
    labeled += by_class[c].size();
  }

  std::vector<double> train_q(C), val_q(C);
  for (std::size_t c = 0; c < C; ++c) {
    train_q[c] = train_ratio * static_cast<double>(by_class[c].size());
    val_q[c] = kValidationFraction * static_cast<double>(by_class[c].size());
  }
  auto n_train = apportion(train_q, static_cast<std::size_t>(std::llround(train_ratio * static_cast<double>(labeled))));
  auto n_val = apportion(val_q, static_cast<std::size_t>(std::llround(kValidationFraction * static_cast<double>(labeled))));
  // Move validation slots away from classes that would have no room left.
  for (std::size_t c = 0; c < C; ++c) {
    while (n_train[c] + n_val[c] > by_class[c].size()) {
      --n_val[c];
      for (std::size_t d = 0; d < C; ++d)
        if (n_train[d] + n_val[d] < by_class[d].size()) {
          ++n_val[d];
          break;
        }
    }
  }

  Split split;
  split.seed = seed;
  split.train_ratio = train_ratio;
  Rng rng(derive_seed(seed, {0x5b11u}));
  for (std::size_t c = 0; c < C; ++c) {
    auto nodes = by_class[c];
    std::shuffle(nodes.begin(), nodes.end(), rng);
    auto it = nodes.begin();
    split.train.insert(split.train.end(), it, it + static_cast<std::ptrdiff_t>(n_train[c]));
    it += static_cast<std::ptrdiff_t>(n_train[c]);
    split.val.insert(split.val.end(), it, it + static_cast<std::ptrdiff_t>(n_val[c]));
    it += static_cast<std::ptrdiff_t>(n_val[c]);
    split.test.insert(split.test.end(), it, nodes.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void save_split(const Split& split, const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  json j = {{"seed", split.seed},
            {"train_ratio", split.train_ratio},
            {"train", split.train},
            {"val", split.val},
            {"test", split.test}};
  std::ofstream(file) << j.dump() << "\n";
}

Split load_split(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError(file.string(), 0, "cannot open file");
  json j;
  try {
    j = json::parse(in);
    Split s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train_ratio = j.at("train_ratio").get<double>();
    s.train = j.at("train").get<std::vector<NodeId>>();
    s.val = j.at("val").get<std::vector<NodeId>>();
    s.test = j.at("test").get<std::vector<NodeId>>();
    return s;
  } catch (const json::exception& e) {
    throw FormatError(file.string(), 1, e.what());
  }
}

// ---------------------------------------------------------------------------

std::vector<NodeId> khop_neighborhood(const AttributedGraph& g, std::span<const NodeId> sources,
                                      std::size_t k) {
  std::vector<int> dist(g.num_nodes(), -1);
  std::queue<NodeId> q;
  for (NodeId s : sources) {
    if (s < 0 || static_cast<std::size_t>(s) >= g.num_nodes())
      throw std::out_of_range("khop_neighborhood: node " + std::to_string(s) + " out of range");
    if (dist[s] < 0) {
      dist[s] = 0;
      q.push(s);
    }
  }
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    if (static_cast<std::size_t>(dist[u]) == k) continue;
    for (NodeId w : g.neighbors(u))
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        q.push(w);
      }
  }
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (dist[v] >= 0) out.push_back(static_cast<NodeId>(v));
  return out;
}

std::vector<NodeId> khop_neighborhood(const AttributedGraph& g, NodeId v, std::size_t k) {
  const NodeId src[] = {v};
  return khop_neighborhood(g, std::span<const NodeId>(src), k);
}

std::uint64_t graph_checksum(const AttributedGraph& g) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  };
  mix(g.num_nodes());
  mix(g.directed());
  mix(static_cast<std::uint64_t>(g.num_classes()));
  for (auto [u, v] : g.edges()) {
    mix(static_cast<std::uint64_t>(u));
    mix(static_cast<std::uint64_t>(v));
  }
  const SparseMatrix& x = g.features();
  mix(static_cast<std::uint64_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(x, r); it; ++it) {
      mix(static_cast<std::uint64_t>(r));
      mix(static_cast<std::uint64_t>(it.col()));
      mix(std::bit_cast<std::uint64_t>(it.value()));
    }
  for (int y : g.labels()) mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(y)));
  return h;
}

}  // namespace infomotif
