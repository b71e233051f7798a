#include "vgb/graph.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <set>
#include <string>

#include "vgb/error.hpp"

namespace vgb {

Graph::Graph(int node_count, std::span<const Edge> edges) : n_(node_count) {
  if (node_count < 0)
    throw InputError("negative node count");
  adj_.resize(static_cast<std::size_t>(n_));
  edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (!valid_node(a) || !valid_node(b))
      throw InputError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                       ") names a node outside 0.." + std::to_string(n_ - 1));
    if (a == b)
      throw InputError("self-loop at node " + std::to_string(a));
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end())
    throw InputError("duplicate edge (" + std::to_string(dup->first) + "," +
                     std::to_string(dup->second) + ")");
  for (auto [a, b] : edges_) {
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto &list : adj_)
    std::sort(list.begin(), list.end());
}

std::span<const NodeId> Graph::neighbors(NodeId v) const {
  if (!valid_node(v))
    throw InputError("unknown node " + std::to_string(v));
  return adj_[v];
}

bool Graph::has_edge(std::int64_t u, std::int64_t v) const {
  if (!valid_node(u) || !valid_node(v) || u == v)
    return false;
  const auto &list = adj_[static_cast<std::size_t>(u)];
  return std::binary_search(list.begin(), list.end(), static_cast<NodeId>(v));
}

bool Graph::connected() const {
  if (n_ <= 1)
    return true;
  std::vector<char> seen(n_, 0);
  std::vector<NodeId> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : adj_[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
  }
  return count == n_;
}

int Graph::max_degree() const {
  int best = 0;
  for (const auto &list : adj_)
    best = std::max(best, static_cast<int>(list.size()));
  return best;
}

Graph complete_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      e.emplace_back(i, j);
  return Graph(n, e);
}

Graph path_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i)
    e.emplace_back(i, i + 1);
  return Graph(n, e);
}

Graph cycle_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    e.emplace_back(i, (i + 1) % n);
  return Graph(n, e);
}

Graph star_graph(int leaves) {
  std::vector<Edge> e;
  for (int i = 1; i <= leaves; ++i)
    e.emplace_back(0, i);
  return Graph(leaves + 1, e);
}

namespace {

void require_node(const Graph &g, NodeId v) {
  if (!g.valid_node(v))
    throw InputError("unknown node " + std::to_string(v));
}

} // namespace

std::vector<NodeId> common_neighbors(const Graph &g, NodeId u, NodeId v) {
  require_node(g, u);
  require_node(g, v);
  if (u == v)
    throw InputError("common_neighbors needs two distinct nodes");
  auto a = g.neighbors(u), b = g.neighbors(v);
  std::vector<NodeId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

ShortestPath shortest_path(const Graph &g, NodeId u, NodeId v) {
  require_node(g, u);
  require_node(g, v);
  if (u == v)
    throw InputError("shortest_path needs two distinct nodes");

  // Distances to v, then walk from u taking the smallest neighbor that gets
  // one step closer: yields the lexicographically smallest shortest path.
  std::vector<int> dist(g.node_count(), -1);
  std::deque<NodeId> queue{v};
  dist[v] = 0;
  while (!queue.empty()) {
    NodeId x = queue.front();
    queue.pop_front();
    for (NodeId y : g.neighbors(x))
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
  }
  ShortestPath result;
  if (dist[u] < 0)
    return result;
  result.reachable = true;
  result.length = dist[u];
  result.path.push_back(u);
  NodeId cur = u;
  while (cur != v) {
    for (NodeId y : g.neighbors(cur))
      if (dist[y] == dist[cur] - 1) {
        cur = y;
        break;
      }
    result.path.push_back(cur);
  }
  return result;
}

namespace {

using Mask = std::uint64_t;

constexpr Mask bit(int v) { return Mask{1} << v; }
inline int lowest(Mask m) { return std::countr_zero(m); }

// Branch-and-bound maximum clique over 64-bit vertex masks, with greedy
// colouring bounds (MCQ-style: vertices are expanded in reverse colour order
// and a branch is cut once |current| + colour <= best).
class CliqueSearch {
public:
  explicit CliqueSearch(std::span<const Mask> adj) : adj_(adj) {}

  // Largest clique inside `candidates`.
  int max_size(Mask candidates) {
    best_ = 0;
    stop_at_ = 65;
    expand(0, candidates);
    return best_;
  }

  // Whether `candidates` contains a clique of `need` vertices.
  bool has_clique(Mask candidates, int need) {
    if (need <= 0)
      return true;
    if (std::popcount(candidates) < need)
      return false;
    best_ = need - 1;
    stop_at_ = need;
    expand(0, candidates);
    return best_ >= need;
  }

private:
  void expand(int depth, Mask p) {
    int order[64];
    int colour[64];
    int count = 0;
    Mask uncoloured = p;
    int c = 0;
    while (uncoloured) {
      ++c;
      Mask q = uncoloured;
      while (q) {
        int v = lowest(q);
        q &= ~bit(v) & ~adj_[v];
        uncoloured &= ~bit(v);
        order[count] = v;
        colour[count] = c;
        ++count;
      }
    }
    for (int i = count - 1; i >= 0; --i) {
      if (depth + colour[i] <= best_ || best_ >= stop_at_)
        return;
      int v = order[i];
      Mask next = p & adj_[v];
      if (next == 0) {
        if (depth + 1 > best_)
          best_ = depth + 1;
      } else {
        expand(depth + 1, next);
      }
      p &= ~bit(v);
    }
  }

  std::span<const Mask> adj_;
  int best_ = 0;
  int stop_at_ = 65;
};

std::vector<Mask> adjacency_masks(const Graph &g, bool complement) {
  const int n = g.node_count();
  const Mask all = n == 64 ? ~Mask{0} : bit(n) - 1;
  std::vector<Mask> adj(n, 0);
  for (auto [a, b] : g.edges()) {
    adj[a] |= bit(b);
    adj[b] |= bit(a);
  }
  if (complement)
    for (int v = 0; v < n; ++v)
      adj[v] = ~adj[v] & all & ~bit(v);
  return adj;
}

void check_cap(const Graph &g, int cap) {
  const int limit = std::min(cap, 64);
  if (g.node_count() > limit)
    throw CapacityError("exact solver cap is " + std::to_string(limit) + " nodes, graph has " +
                        std::to_string(g.node_count()));
}

// Lexicographically smallest maximum clique: fix vertices in increasing order,
// keeping v only if a clique of the optimal size still exists with v as the
// next-smallest member.
SolverResult lexmin_max_clique(std::span<const Mask> adj, int n) {
  SolverResult out;
  if (n == 0)
    return out;
  CliqueSearch search(adj);
  const Mask all = n == 64 ? ~Mask{0} : bit(n) - 1;
  out.size = search.max_size(all);
  Mask candidates = all;
  int remaining = out.size;
  while (remaining > 0) {
    for (Mask scan = candidates; scan; scan &= scan - 1) {
      int v = lowest(scan);
      Mask above = v == 63 ? 0 : ~(bit(v + 1) - 1);
      Mask rest = candidates & adj[v] & above;
      if (search.has_clique(rest, remaining - 1)) {
        out.witness.push_back(v);
        candidates = rest;
        --remaining;
        break;
      }
    }
  }
  return out;
}

} // namespace

SolverResult max_clique_exact(const Graph &g, int cap) {
  check_cap(g, cap);
  auto adj = adjacency_masks(g, false);
  return lexmin_max_clique(adj, g.node_count());
}

SolverResult max_independent_set_exact(const Graph &g, int cap) {
  check_cap(g, cap);
  auto adj = adjacency_masks(g, true);
  return lexmin_max_clique(adj, g.node_count());
}

SolverResult min_vertex_cover_exact(const Graph &g, int cap) {
  check_cap(g, cap);
  const int n = g.node_count();
  auto comp = adjacency_masks(g, true);
  CliqueSearch search(comp);
  const Mask all = n == 0 ? 0 : (n == 64 ? ~Mask{0} : bit(n) - 1);
  const int mis = n == 0 ? 0 : search.max_size(all);

  SolverResult out;
  out.size = n - mis;
  // Decide nodes in increasing order, putting each in the cover whenever an
  // optimal cover remains reachable. A node left out joins the independent
  // side, which shrinks the feasible independent-set pool to its non-neighbors.
  Mask pool = all;    // nodes still eligible for the independent side
  int need = mis;     // independent-side nodes still to place
  int budget = out.size;
  for (int v = 0; v < n; ++v) {
    if (!(pool & bit(v))) {
      // Forced into the cover by a left-out neighbor.
      out.witness.push_back(v);
      --budget;
      continue;
    }
    Mask without_v = pool & ~bit(v);
    if (budget > 0 && search.has_clique(without_v, need)) {
      out.witness.push_back(v);
      pool = without_v;
      --budget;
    } else {
      pool = without_v & comp[v];
      --need;
    }
  }
  return out;
}

int validate_path(const Graph &g, const Witness &w) {
  int sigma = 0;
  for (std::size_t i = 1; i < w.nodes.size(); ++i)
    if (g.has_edge(w.nodes[i - 1], w.nodes[i]))
      ++sigma;
  return sigma;
}

int validate_clique(const Graph &g, const Witness &w) {
  std::vector<std::int64_t> distinct = w.nodes;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  int sigma = 0;
  for (std::size_t i = 0; i < distinct.size(); ++i)
    for (std::size_t j = i + 1; j < distinct.size(); ++j)
      if (g.has_edge(distinct[i], distinct[j]))
        ++sigma;
  return sigma;
}

int validate_cover(const Graph &g, const Witness &w) {
  std::vector<char> in(g.node_count(), 0);
  for (auto v : w.nodes)
    if (g.valid_node(v))
      in[static_cast<std::size_t>(v)] = 1;
  int uncovered = 0;
  for (auto [a, b] : g.edges())
    if (!in[a] && !in[b])
      ++uncovered;
  return uncovered;
}

} // namespace vgb
