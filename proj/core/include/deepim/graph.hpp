#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace deepim {

using NodeId = std::uint32_t;

/// Immutable directed graph in compressed adjacency form with both
/// orientations materialized. Neighbor lists are sorted; no self-loops,
/// no duplicate directed edges. Safe for unsynchronized concurrent reads.
class Graph {
 public:
  Graph() = default;

  /// Builds from a directed edge list. Self-loops and duplicates are
  /// dropped; the counts are available through the optional stats struct
  /// on the load path. Node ids must lie in [0, node_count).
  static Graph from_edges(NodeId node_count,
                          std::vector<std::pair<NodeId, NodeId>> edges,
                          bool loaded_undirected = false);

  NodeId node_count() const { return node_count_; }
  std::uint64_t edge_count() const { return out_targets_.size(); }

  std::span<const NodeId> out_neighbors(NodeId u) const {
    return {out_targets_.data() + out_offsets_[u],
            out_targets_.data() + out_offsets_[u + 1]};
  }
  std::span<const NodeId> in_neighbors(NodeId v) const {
    return {in_sources_.data() + in_offsets_[v],
            in_sources_.data() + in_offsets_[v + 1]};
  }

  NodeId out_degree(NodeId u) const { return out_offsets_[u + 1] - out_offsets_[u]; }
  NodeId in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }

  /// Index of the directed edge (u, v) within the out-CSR, i.e. a stable
  /// dense edge id. Used to key per-edge random coins.
  std::uint64_t out_edge_begin(NodeId u) const { return out_offsets_[u]; }

  const std::vector<std::uint32_t>& out_offsets() const { return out_offsets_; }
  const std::vector<NodeId>& out_targets() const { return out_targets_; }
  const std::vector<std::uint32_t>& in_offsets() const { return in_offsets_; }
  const std::vector<NodeId>& in_sources() const { return in_sources_; }

  /// True when the source dataset was an undirected edge list stored as
  /// two directed edges.
  bool loaded_undirected() const { return loaded_undirected_; }

  /// Original node labels (dense id -> label); empty for generated graphs.
  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels) { labels_ = std::move(labels); }

  /// Structural fingerprint over the out-CSR. Stable across save/load.
  std::uint64_t structure_hash() const;

 private:
  NodeId node_count_ = 0;
  std::vector<std::uint32_t> out_offsets_{0};
  std::vector<NodeId> out_targets_;
  std::vector<std::uint32_t> in_offsets_{0};
  std::vector<NodeId> in_sources_;
  bool loaded_undirected_ = false;
  std::vector<std::string> labels_;
};

struct EdgeListStats {
  std::uint64_t dropped_self_loops = 0;
  std::uint64_t dropped_duplicates = 0;
  std::uint64_t lines_read = 0;
};

/// Parses "src dst" pairs, one per line; '#' starts a comment. Tokens are
/// arbitrary labels, remapped to dense zero-based ids in first-seen order.
/// Undirected mode inserts both directions.
/// Throws std::runtime_error naming the line on malformed input or if the
/// stream holds no edges.
Graph load_edge_list(std::istream& in, bool directed, EdgeListStats* stats = nullptr);
Graph load_edge_list_file(const std::filesystem::path& path, bool directed,
                          EdgeListStats* stats = nullptr);

/// Uniform random directed graph with exactly m distinct non-self-loop
/// edges. Deterministic for a fixed seed. Throws if m > n*(n-1).
Graph erdos_renyi(NodeId n, std::uint64_t m, std::uint64_t rng_seed);

/// Per-node selection cost under the degree-budget variant: the node's
/// out-degree (for undirected inputs both directions are stored, so this
/// is the natural degree).
std::vector<double> degree_costs(const Graph& g);

/// Versioned binary snapshot (magic header) for fast reload.
void save_graph(const Graph& g, const std::filesystem::path& path);
Graph load_graph(const std::filesystem::path& path);

}  // namespace deepim
