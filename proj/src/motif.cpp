#include "infomotif/motif.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace infomotif {

namespace {

constexpr int pair_bit(int i, int j) {
  for (int k = 0; k < 6; ++k)
    if (kPositionPairs[k].first == i && kPositionPairs[k].second == j) return k;
  return -1;
}

constexpr std::array<std::array<int, 3>, 6> kPermutations = {
    {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

MotifCode permute(MotifCode code, const std::array<int, 3>& p) {
  MotifCode out = 0;
  for (int k = 0; k < 6; ++k)
    if (code & (1u << k)) {
      auto [i, j] = kPositionPairs[k];
      out |= static_cast<MotifCode>(1u << pair_bit(p[i], p[j]));
    }
  return out;
}

const std::array<MotifCode, 64>& canonical_table() {
  static const std::array<MotifCode, 64> table = [] {
    std::array<MotifCode, 64> t{};
    for (int c = 0; c < 64; ++c) {
      MotifCode best = 0xff;
      for (const auto& p : kPermutations) best = std::min(best, permute(static_cast<MotifCode>(c), p));
      t[static_cast<std::size_t>(c)] = best;
    }
    return t;
  }();
  return table;
}

bool code_connected(MotifCode code) {
  int pairs = 0;
  for (auto [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}})
    if (code & ((1u << pair_bit(i, j)) | (1u << pair_bit(j, i)))) ++pairs;
  return pairs >= 2;
}

}  // namespace

MotifCode canonical_code(MotifCode code) { return canonical_table()[code & 63u]; }

MotifPattern MotifPattern::make(std::string id, std::string name, bool directed,
                                std::vector<std::pair<int, int>> edges) {
  MotifCode code = 0;
  for (auto [i, j] : edges) {
    if (i < 0 || i > 2 || j < 0 || j > 2 || i == j)
      throw ContractError("motif " + id + ": invalid position pair (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
    code |= static_cast<MotifCode>(1u << pair_bit(i, j));
    if (!directed) code |= static_cast<MotifCode>(1u << pair_bit(j, i));
  }
  if (!code_connected(code)) throw ContractError("motif " + id + " is not connected");
  MotifPattern p;
  p.id = std::move(id);
  p.name = std::move(name);
  p.directed = directed;
  p.edges = std::move(edges);
  p.code = canonical_code(code);
  return p;
}

MotifRegistry::MotifRegistry(std::vector<MotifPattern> patterns) : patterns_(std::move(patterns)) {
  lookup_.fill(-1);
  if (patterns_.empty()) return;
  directed_ = patterns_.front().directed;
  std::sort(patterns_.begin(), patterns_.end(),
            [](const MotifPattern& a, const MotifPattern& b) { return a.code < b.code; });
  for (std::size_t t = 0; t < patterns_.size(); ++t) {
    const auto& p = patterns_[t];
    if (p.directed != directed_) throw ContractError("registry mixes directed and undirected motifs");
    if (lookup_[p.code] >= 0)
      throw ContractError("motifs " + patterns_[static_cast<std::size_t>(lookup_[p.code])].id + " and " +
                          p.id + " are isomorphic");
    lookup_[p.code] = static_cast<int>(t);
  }
}

MotifRegistry default_registry(bool directed) {
  std::vector<MotifPattern> ps;
  if (directed) {
    ps.push_back(MotifPattern::make("", "chain", true, {{0, 1}, {1, 2}}));
    ps.push_back(MotifPattern::make("", "convergent", true, {{0, 1}, {2, 1}}));
    ps.push_back(MotifPattern::make("", "divergent", true, {{1, 0}, {1, 2}}));
    ps.push_back(MotifPattern::make("", "feed-forward loop", true, {{0, 1}, {1, 2}, {0, 2}}));
    ps.push_back(MotifPattern::make("", "3-cycle", true, {{0, 1}, {1, 2}, {2, 0}}));
  } else {
    ps.push_back(MotifPattern::make("", "wedge", false, {{0, 1}, {1, 2}}));
    ps.push_back(MotifPattern::make("", "triangle", false, {{0, 1}, {1, 2}, {0, 2}}));
  }
  std::sort(ps.begin(), ps.end(), [](const auto& a, const auto& b) { return a.code < b.code; });
  int first = directed ? 1 : 6;
  for (std::size_t t = 0; t < ps.size(); ++t) ps[t].id = "M" + std::to_string(first + static_cast<int>(t));
  return MotifRegistry(std::move(ps));
}

MotifRegistry load_registry(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError(file.string(), 0, "cannot open file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    std::vector<MotifPattern> ps;
    for (const auto& e : j) {
      std::vector<std::pair<int, int>> edges;
      for (const auto& pr : e.at("edges")) edges.emplace_back(pr.at(0).get<int>(), pr.at(1).get<int>());
      ps.push_back(MotifPattern::make(e.at("id").get<std::string>(), e.value("name", std::string{}),
                                      e.at("directed").get<bool>(), std::move(edges)));
    }
    return MotifRegistry(std::move(ps));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(file.string(), 1, e.what());
  }
}

void save_registry(const MotifRegistry& reg, const std::filesystem::path& file) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : reg.patterns()) {
    nlohmann::json edges = nlohmann::json::array();
    for (auto [a, b] : p.edges) edges.push_back({a, b});
    j.push_back({{"id", p.id}, {"name", p.name}, {"directed", p.directed}, {"edges", edges}});
  }
  std::ofstream(file) << j.dump(2) << "\n";
}

std::uint64_t registry_checksum(const MotifRegistry& reg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t x) {
    h ^= x;
    h *= 0x100000001b3ULL;
  };
  mix(reg.directed());
  for (const auto& p : reg.patterns()) mix(p.code);
  return h;
}

MotifCode triple_code(const AttributedGraph& g, const Triple& t, bool directed) {
  MotifCode code = 0;
  for (int k = 0; k < 6; ++k) {
    auto [i, j] = kPositionPairs[k];
    bool e = directed ? g.has_edge(t[i], t[j]) : g.adjacent(t[i], t[j]);
    if (e) code |= static_cast<MotifCode>(1u << k);
  }
  return code;
}

// ---------------------------------------------------------------------------

InstanceIndex::InstanceIndex(std::size_t num_nodes, std::vector<std::vector<Triple>> per_motif)
    : num_nodes_(num_nodes), triples_(std::move(per_motif)) {
  offsets_.resize(triples_.size());
  ids_.resize(triples_.size());
  for (std::size_t t = 0; t < triples_.size(); ++t) {
    auto& tri = triples_[t];
    std::sort(tri.begin(), tri.end());
    auto& off = offsets_[t];
    off.assign(num_nodes + 1, 0);
    for (const auto& x : tri)
      for (NodeId v : x) ++off[static_cast<std::size_t>(v) + 1];
    for (std::size_t v = 0; v < num_nodes; ++v) off[v + 1] += off[v];
    auto& ids = ids_[t];
    ids.resize(off[num_nodes]);
    std::vector<std::uint32_t> cursor(off.begin(), off.end() - 1);
    for (std::uint32_t i = 0; i < tri.size(); ++i)
      for (NodeId v : tri[i]) ids[cursor[static_cast<std::size_t>(v)]++] = i;
  }
}

std::span<const std::uint32_t> InstanceIndex::instance_ids(int motif, NodeId v) const {
  const auto& off = offsets_[static_cast<std::size_t>(motif)];
  const auto b = off[static_cast<std::size_t>(v)], e = off[static_cast<std::size_t>(v) + 1];
  return {ids_[static_cast<std::size_t>(motif)].data() + b, e - b};
}

std::vector<MotifInstance> InstanceIndex::instances(int motif, NodeId v) const {
  std::vector<MotifInstance> out;
  for (auto i : instance_ids(motif, v)) out.push_back({triples(motif)[i], motif});
  return out;
}

bool InstanceIndex::contains(int motif, const Triple& sorted) const {
  auto tri = triples(motif);
  return std::binary_search(tri.begin(), tri.end(), sorted);
}

namespace {

void check_registry_fits(const AttributedGraph& g, const MotifRegistry& reg) {
  if (reg.directed() && !g.directed())
    throw ContractError("directed motif registry applied to an undirected graph");
}

void enumerate_range(const AttributedGraph& g, const MotifRegistry& reg, NodeId begin, NodeId end,
                     std::vector<std::vector<Triple>>& out) {
  const auto& canon = canonical_table();
  for (NodeId v = begin; v < end; ++v) {
    auto nb = g.neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        NodeId u = nb[i], w = nb[j];
        // A triangle is reachable from each of its corners; keep the smallest.
        if (g.adjacent(u, w) && !(v < u && v < w)) continue;
        Triple t{v, u, w};
        std::sort(t.begin(), t.end());
        int m = reg.find(canon[triple_code(g, t, reg.directed())]);
        if (m >= 0) out[static_cast<std::size_t>(m)].push_back(t);
      }
    }
  }
}

}  // namespace

InstanceIndex enumerate_instances(const AttributedGraph& g, const MotifRegistry& reg, unsigned threads) {
  check_registry_fits(g, reg);
  const auto n = static_cast<NodeId>(g.num_nodes());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<NodeId>(n, 1))));
  std::vector<std::vector<std::vector<Triple>>> shards(threads,
                                                       std::vector<std::vector<Triple>>(reg.size()));
  if (threads == 1) {
    enumerate_range(g, reg, 0, n, shards[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned s = 0; s < threads; ++s) {
      NodeId b = static_cast<NodeId>(static_cast<std::int64_t>(n) * s / threads);
      NodeId e = static_cast<NodeId>(static_cast<std::int64_t>(n) * (s + 1) / threads);
      pool.emplace_back([&, b, e, s] { enumerate_range(g, reg, b, e, shards[s]); });
    }
    for (auto& t : pool) t.join();
  }
  std::vector<std::vector<Triple>> merged(reg.size());
  for (auto& shard : shards)
    for (std::size_t m = 0; m < reg.size(); ++m)
      merged[m].insert(merged[m].end(), shard[m].begin(), shard[m].end());
  return InstanceIndex(g.num_nodes(), std::move(merged));
}

std::vector<std::vector<Triple>> brute_force_instances(const AttributedGraph& g, const MotifRegistry& reg) {
  check_registry_fits(g, reg);
  const auto n = static_cast<NodeId>(g.num_nodes());
  if (g.num_nodes() > kBruteForceMaxNodes)
    throw ContractError("brute_force_count refuses graphs with more than " +
                        std::to_string(kBruteForceMaxNodes) + " nodes");
  std::vector<std::vector<Triple>> out(reg.size());
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      for (NodeId c = b + 1; c < n; ++c) {
        Triple t{a, b, c};
        int m = reg.find(canonical_code(triple_code(g, t, reg.directed())));
        if (m >= 0) out[static_cast<std::size_t>(m)].push_back(t);
      }
  return out;
}

std::vector<std::size_t> brute_force_count(const AttributedGraph& g, const MotifRegistry& reg) {
  auto inst = brute_force_instances(g, reg);
  std::vector<std::size_t> counts;
  for (const auto& v : inst) counts.push_back(v.size());
  return counts;
}

// ---------------------------------------------------------------------------

std::vector<MotifInstance> sample_positive(const InstanceIndex& index, int motif, NodeId v,
                                           std::size_t q, Rng& rng) {
  if (q == 0) throw ContractError("sample_positive: q must be >= 1");
  auto ids = index.instance_ids(motif, v);
  std::vector<std::uint32_t> chosen;
  if (ids.size() <= q) {
    chosen.assign(ids.begin(), ids.end());
  } else {
    chosen.reserve(q);
    std::sample(ids.begin(), ids.end(), std::back_inserter(chosen), q, rng);
  }
  std::vector<MotifInstance> out;
  out.reserve(chosen.size());
  for (auto i : chosen) out.push_back({index.triples(motif)[i], motif});
  return out;
}

NegativeSample sample_negative(const AttributedGraph& g, const InstanceIndex& index, int motif,
                               NodeId v, const MotifInstance& positive, Rng& rng) {
  const auto n = static_cast<NodeId>(g.num_nodes());
  if (n < 3) throw ContractError("sample_negative: graph needs at least 3 nodes");
  if (std::find(positive.nodes.begin(), positive.nodes.end(), v) == positive.nodes.end())
    throw ContractError("sample_negative: positive instance does not contain the anchor");

  NegativeSample s;
  for (s.attempts = 1; s.attempts <= kNegativeMaxTries; ++s.attempts) {
    // Uniform over V \ {v}, then over V \ {v, r1}.
    std::uniform_int_distribution<NodeId> first(0, n - 2), second(0, n - 3);
    NodeId r1 = first(rng);
    if (r1 >= v) ++r1;
    NodeId r2 = second(rng);
    NodeId lo = std::min(v, r1), hi = std::max(v, r1);
    if (r2 >= lo) ++r2;
    if (r2 >= hi) ++r2;
    s.nodes = {v, r1, r2};
    Triple sorted = s.nodes;
    std::sort(sorted.begin(), sorted.end());
    if (!index.contains(motif, sorted)) return s;
  }
  s.attempts = kNegativeMaxTries;
  s.exhausted = true;
  return s;
}

}  // namespace infomotif
