#include "deepim/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "deepim/hash.hpp"

namespace deepim {

Graph Graph::from_edges(NodeId node_count,
                        std::vector<std::pair<NodeId, NodeId>> edges,
                        bool loaded_undirected) {
  for (auto& [u, v] : edges) {
    if (u >= node_count || v >= node_count) {
      throw std::out_of_range("edge endpoint out of range");
    }
  }
  // Drop self-loops, sort, dedupe.
  std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  Graph g;
  g.node_count_ = node_count;
  g.loaded_undirected_ = loaded_undirected;
  g.out_offsets_.assign(node_count + 1, 0);
  g.in_offsets_.assign(node_count + 1, 0);
  g.out_targets_.resize(edges.size());
  g.in_sources_.resize(edges.size());

  for (const auto& [u, v] : edges) {
    ++g.out_offsets_[u + 1];
    ++g.in_offsets_[v + 1];
  }
  for (NodeId i = 0; i < node_count; ++i) {
    g.out_offsets_[i + 1] += g.out_offsets_[i];
    g.in_offsets_[i + 1] += g.in_offsets_[i];
  }
  std::vector<std::uint32_t> out_pos(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
  std::vector<std::uint32_t> in_pos(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
  for (const auto& [u, v] : edges) {
    g.out_targets_[out_pos[u]++] = v;
    g.in_sources_[in_pos[v]++] = u;
  }
  // edges was sorted, so per-node neighbor lists are already sorted for the
  // out side; the in side needs a per-node sort.
  for (NodeId v = 0; v < node_count; ++v) {
    std::sort(g.in_sources_.begin() + g.in_offsets_[v],
              g.in_sources_.begin() + g.in_offsets_[v + 1]);
  }
  return g;
}

std::uint64_t Graph::structure_hash() const {
  Fnv1a h;
  h.add(node_count_);
  h.add_span<std::uint32_t>(out_offsets_);
  h.add_span<NodeId>(out_targets_);
  h.add(static_cast<std::uint8_t>(loaded_undirected_));
  return h.state;
}

Graph load_edge_list(std::istream& in, bool directed, EdgeListStats* stats) {
  std::unordered_map<std::string, NodeId> id_of;
  std::vector<std::string> labels;
  std::vector<std::pair<NodeId, NodeId>> edges;
  EdgeListStats local;

  auto intern = [&](const std::string& tok) -> NodeId {
    auto [it, inserted] = id_of.try_emplace(tok, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(tok);
    return it->second;
  };

  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    ++local.lines_read;
    auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;  // blank / comment-only line
    if (!(ls >> b) || (ls >> extra)) {
      throw std::runtime_error("edge list parse error at line " +
                               std::to_string(line_no) +
                               ": expected exactly two tokens");
    }
    NodeId u = intern(a), v = intern(b);
    edges.emplace_back(u, v);
    if (!directed) edges.emplace_back(v, u);
  }
  if (edges.empty()) {
    throw std::runtime_error("edge list is empty");
  }

  // Count drops before from_edges dedupes them.
  {
    std::vector<std::pair<NodeId, NodeId>> kept;
    kept.reserve(edges.size());
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(edges.size() * 2);
    for (auto [u, v] : edges) {
      if (u == v) {
        ++local.dropped_self_loops;
        continue;
      }
      std::uint64_t key = (std::uint64_t(u) << 32) | v;
      if (!seen.insert(key).second) {
        ++local.dropped_duplicates;
        continue;
      }
      kept.emplace_back(u, v);
    }
    edges = std::move(kept);
  }
  if (edges.empty()) {
    throw std::runtime_error("edge list holds no usable edges");
  }

  Graph g = Graph::from_edges(static_cast<NodeId>(labels.size()), std::move(edges),
                              /*loaded_undirected=*/!directed);
  g.set_labels(std::move(labels));
  if (stats) *stats = local;
  return g;
}

Graph load_edge_list_file(const std::filesystem::path& path, bool directed,
                          EdgeListStats* stats) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path.string());
  return load_edge_list(in, directed, stats);
}

Graph erdos_renyi(NodeId n, std::uint64_t m, std::uint64_t rng_seed) {
  const std::uint64_t max_edges = std::uint64_t(n) * (n > 0 ? n - 1 : 0);
  if (m > max_edges) {
    throw std::invalid_argument("erdos_renyi: m exceeds n*(n-1)");
  }
  std::mt19937_64 rng(splitmix64(rng_seed));
  std::uniform_int_distribution<NodeId> pick(0, n ? n - 1 : 0);
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(m * 2);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(m);
  while (edges.size() < m) {
    NodeId u = pick(rng), v = pick(rng);
    if (u == v) continue;
    std::uint64_t key = (std::uint64_t(u) << 32) | v;
    if (chosen.insert(key).second) edges.emplace_back(u, v);
  }
  return Graph::from_edges(n, std::move(edges), /*loaded_undirected=*/false);
}

std::vector<double> degree_costs(const Graph& g) {
  std::vector<double> cost(g.node_count());
  // Undirected inputs store each edge in both directions, so the natural
  // degree is already the out-degree; adding in-degrees would double it.
  for (NodeId i = 0; i < g.node_count(); ++i) {
    cost[i] = double(g.out_degree(i));
  }
  return cost;
}

namespace {
constexpr std::uint32_t kGraphMagic = 0x444D4947;  // "GIMD"
constexpr std::uint32_t kGraphVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("graph snapshot truncated");
  return v;
}
}  // namespace

void save_graph(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write graph snapshot: " + path.string());
  write_pod(out, kGraphMagic);
  write_pod(out, kGraphVersion);
  write_pod(out, g.node_count());
  write_pod(out, g.edge_count());
  write_pod(out, static_cast<std::uint8_t>(g.loaded_undirected()));
  out.write(reinterpret_cast<const char*>(g.out_offsets().data()),
            std::streamsize(g.out_offsets().size() * sizeof(std::uint32_t)));
  out.write(reinterpret_cast<const char*>(g.out_targets().data()),
            std::streamsize(g.out_targets().size() * sizeof(NodeId)));
  write_pod(out, std::uint64_t(g.labels().size()));
  for (const auto& label : g.labels()) {
    write_pod(out, std::uint32_t(label.size()));
    out.write(label.data(), std::streamsize(label.size()));
  }
  if (!out) throw std::runtime_error("graph snapshot write failed");
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open graph snapshot: " + path.string());
  if (read_pod<std::uint32_t>(in) != kGraphMagic) {
    throw std::runtime_error("not a graph snapshot: " + path.string());
  }
  if (read_pod<std::uint32_t>(in) != kGraphVersion) {
    throw std::runtime_error("unsupported graph snapshot version");
  }
  NodeId n = read_pod<NodeId>(in);
  std::uint64_t m = read_pod<std::uint64_t>(in);
  bool undirected = read_pod<std::uint8_t>(in) != 0;
  std::vector<std::uint32_t> offsets(n + 1);
  in.read(reinterpret_cast<char*>(offsets.data()),
          std::streamsize(offsets.size() * sizeof(std::uint32_t)));
  std::vector<NodeId> targets(m);
  in.read(reinterpret_cast<char*>(targets.data()),
          std::streamsize(targets.size() * sizeof(NodeId)));
  if (!in) throw std::runtime_error("graph snapshot truncated");

  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(m);
  for (NodeId u = 0; u < n; ++u) {
    for (std::uint32_t i = offsets[u]; i < offsets[u + 1]; ++i) {
      edges.emplace_back(u, targets[i]);
    }
  }
  Graph g = Graph::from_edges(n, std::move(edges), undirected);

  std::uint64_t label_count = read_pod<std::uint64_t>(in);
  std::vector<std::string> labels;
  labels.reserve(label_count);
  for (std::uint64_t i = 0; i < label_count; ++i) {
    std::uint32_t len = read_pod<std::uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    labels.push_back(std::move(s));
  }
  if (!in) throw std::runtime_error("graph snapshot truncated");
  g.set_labels(std::move(labels));
  return g;
}

}  // namespace deepim
