#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace vgb {

using NodeId = int;
using Edge = std::pair<NodeId, NodeId>;

// Simple undirected graph on nodes 0..n-1. Immutable once built; every
// constructor path validates, so a Graph value always satisfies its
// invariants (no self-loops, no duplicates, symmetric adjacency).
class Graph {
public:
  Graph() = default;

  // Throws InputError on self-loops, duplicate edges or out-of-range IDs.
  Graph(int node_count, std::span<const Edge> edges);
  Graph(int node_count, std::initializer_list<Edge> edges)
      : Graph(node_count, std::span<const Edge>(edges.begin(), edges.size())) {}

  int node_count() const noexcept { return n_; }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }

  // Edges with first < second, sorted lexicographically. Edge indices used by
  // drawings refer to positions in this list.
  const std::vector<Edge> &edges() const noexcept { return edges_; }

  // Sorted neighbor list.
  std::span<const NodeId> neighbors(NodeId v) const;
  int degree(NodeId v) const { return static_cast<int>(neighbors(v).size()); }

  bool valid_node(std::int64_t v) const noexcept { return v >= 0 && v < n_; }
  // False for unknown IDs rather than throwing; witnesses may name nodes
  // that do not exist.
  bool has_edge(std::int64_t u, std::int64_t v) const;

  bool connected() const;
  int max_degree() const;

  friend bool operator==(const Graph &a, const Graph &b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adj_;
};

// Common textual constructors used across tests and fixtures.
Graph complete_graph(int n);
Graph path_graph(int n);
Graph cycle_graph(int n);
Graph star_graph(int leaves); // center is node 0

enum class WitnessKind { NodeSet, Path, Clique, Cover };

// A node list claimed by a model (or produced by an oracle). IDs may be out of
// range or repeated; validators treat such entries as contributing no edges.
struct Witness {
  WitnessKind kind = WitnessKind::NodeSet;
  std::vector<std::int64_t> nodes;
};

// Exact solvers refuse graphs larger than this unless told otherwise.
inline constexpr int kDefaultExactCap = 64;

std::vector<NodeId> common_neighbors(const Graph &g, NodeId u, NodeId v);

struct ShortestPath {
  bool reachable = false;
  int length = 0; // in edges
  std::vector<NodeId> path;
};

// BFS distance; the witness is the lexicographically smallest shortest path.
ShortestPath shortest_path(const Graph &g, NodeId u, NodeId v);

struct SolverResult {
  int size = 0;
  std::vector<NodeId> witness; // sorted, lexicographically smallest optimum
};

SolverResult max_clique_exact(const Graph &g, int cap = kDefaultExactCap);
SolverResult max_independent_set_exact(const Graph &g, int cap = kDefaultExactCap);
SolverResult min_vertex_cover_exact(const Graph &g, int cap = kDefaultExactCap);

// Witness validators. All return edge counts (never fractions).
int validate_path(const Graph &g, const Witness &w);   // real consecutive pairs
int validate_clique(const Graph &g, const Witness &w); // real node pairs
int validate_cover(const Graph &g, const Witness &w);  // uncovered edges

} // namespace vgb
