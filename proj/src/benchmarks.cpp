#include "vgb/benchmarks.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vgb/error.hpp"
#include "vgb/rng.hpp"

namespace vgb {

using json = nlohmann::json;

// ---- graph6 ---------------------------------------------------------------

Graph parse_graph6(std::string_view line) {
  constexpr std::string_view header = ">>graph6<<";
  if (line.starts_with(header))
    line.remove_prefix(header.size());
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n' || line.back() == ' '))
    line.remove_suffix(1);
  if (line.empty())
    throw InputError("empty graph6 string");
  for (char c : line)
    if (c < 63 || c > 126)
      throw InputError(std::string("invalid graph6 byte '") + c + "'");

  std::size_t pos = 0;
  long n = 0;
  if (line[0] != 126) {
    n = line[0] - 63;
    pos = 1;
  } else {
    if (line.size() >= 2 && line[1] == 126)
      throw InputError("graph6 graphs with more than 258047 nodes are not supported");
    if (line.size() < 4)
      throw InputError("truncated graph6 size field");
    n = ((line[1] - 63) << 12) | ((line[2] - 63) << 6) | (line[3] - 63);
    pos = 4;
  }
  const std::size_t bits = static_cast<std::size_t>(n) * (n - 1) / 2;
  const std::size_t need = (bits + 5) / 6;
  if (line.size() - pos != need)
    throw InputError("graph6 body has " + std::to_string(line.size() - pos) + " bytes, expected " +
                     std::to_string(need) + " for n=" + std::to_string(n));
  std::vector<Edge> edges;
  std::size_t k = 0;
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i, ++k) {
      const int byte = line[pos + k / 6] - 63;
      if ((byte >> (5 - k % 6)) & 1)
        edges.emplace_back(i, j);
    }
  return Graph(static_cast<int>(n), edges);
}

std::string to_graph6(const Graph &g) {
  const int n = g.node_count();
  std::string out;
  if (n <= 62) {
    out.push_back(static_cast<char>(n + 63));
  } else {
    out.push_back(126);
    out.push_back(static_cast<char>(((n >> 12) & 63) + 63));
    out.push_back(static_cast<char>(((n >> 6) & 63) + 63));
    out.push_back(static_cast<char>((n & 63) + 63));
  }
  int acc = 0, nbits = 0;
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i) {
      acc = (acc << 1) | (g.has_edge(i, j) ? 1 : 0);
      if (++nbits == 6) {
        out.push_back(static_cast<char>(acc + 63));
        acc = nbits = 0;
      }
    }
  if (nbits > 0)
    out.push_back(static_cast<char>((acc << (6 - nbits)) + 63));
  return out;
}

// ---- adjacency lists --------------------------------------------------------

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos)
      break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

bool parse_int(std::string_view tok, long &out) {
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && p == tok.data() + tok.size();
}

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ','))
      ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != ',')
      ++j;
    if (j > i)
      out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

Graph adjacency_block(const std::vector<std::pair<std::size_t, std::string_view>> &block) {
  std::map<long, std::pair<std::size_t, std::vector<long>>> rows;
  for (auto [lineno, line] : block) {
    auto colon = line.find(':');
    if (colon == std::string_view::npos)
      throw ParseError("expected 'node: neighbors'", lineno);
    long u;
    auto head = tokens(line.substr(0, colon));
    if (head.size() != 1 || !parse_int(head[0], u) || u < 0)
      throw ParseError("bad node id before ':'", lineno);
    if (rows.count(u))
      throw ParseError("node " + std::to_string(u) + " listed twice", lineno);
    std::vector<long> nbrs;
    for (auto tok : tokens(line.substr(colon + 1))) {
      long v;
      if (!parse_int(tok, v) || v < 0)
        throw ParseError("bad neighbor '" + std::string(tok) + "'", lineno);
      nbrs.push_back(v);
    }
    rows[u] = {lineno, std::move(nbrs)};
  }
  const long n = static_cast<long>(rows.size());
  if (rows.rbegin()->first != n - 1)
    throw ParseError("node ids must be exactly 0.." + std::to_string(n - 1), block.front().first);
  std::set<Edge> edges;
  for (const auto &[u, row] : rows) {
    const auto &[lineno, nbrs] = row;
    std::set<long> seen;
    for (long v : nbrs) {
      if (v >= n)
        throw ParseError("neighbor " + std::to_string(v) + " out of range", lineno);
      if (v == u)
        throw ParseError("self-loop at node " + std::to_string(u), lineno);
      if (!seen.insert(v).second)
        throw ParseError("duplicate neighbor " + std::to_string(v), lineno);
      const auto &back = rows.at(v).second;
      if (std::find(back.begin(), back.end(), u) == back.end())
        throw ParseError("asymmetric adjacency: " + std::to_string(u) + " lists " +
                             std::to_string(v) + " but not vice versa",
                         lineno);
      edges.emplace(static_cast<NodeId>(std::min(u, v)), static_cast<NodeId>(std::max(u, v)));
    }
  }
  std::vector<Edge> list(edges.begin(), edges.end());
  return Graph(static_cast<int>(n), list);
}

} // namespace

std::vector<Graph> parse_adjacency_lists(std::string_view text) {
  std::vector<Graph> graphs;
  std::vector<std::pair<std::size_t, std::string_view>> block;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i <= lines.size(); ++i) {
    if (i == lines.size() || blank(lines[i])) {
      if (!block.empty())
        graphs.push_back(adjacency_block(block));
      block.clear();
      continue;
    }
    if (lines[i].front() == '#')
      continue;
    block.emplace_back(i + 1, lines[i]);
  }
  return graphs;
}

std::string to_adjacency_list(const Graph &g) {
  std::string out;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    out += std::to_string(v) + ":";
    for (NodeId w : g.neighbors(v))
      out += " " + std::to_string(w);
    out += "\n";
  }
  return out;
}

std::vector<Graph> parse_graphs(std::string_view text, GraphFormat format) {
  if (format == GraphFormat::AdjacencyList)
    return parse_adjacency_lists(text);
  std::vector<Graph> graphs;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i]))
      continue;
    try {
      graphs.push_back(parse_graph6(lines[i]));
    } catch (const InputError &e) {
      throw ParseError(e.what(), i + 1);
    }
  }
  return graphs;
}

std::vector<Graph> load_graphs(const std::filesystem::path &path, GraphFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graphs(buf.str(), format);
}

// ---- tasks ------------------------------------------------------------------

std::string_view to_string(Task t) {
  switch (t) {
  case Task::CoNe:
    return "CoNe";
  case Task::ShPa:
    return "ShPa";
  case Task::MaxC:
    return "MaxC";
  case Task::MinVC:
    return "MinVC";
  }
  return "?";
}

Task parse_task(std::string_view s) {
  for (Task t : {Task::CoNe, Task::ShPa, Task::MaxC, Task::MinVC})
    if (s == to_string(t))
      return t;
  throw InputError("unknown task '" + std::string(s) + "'");
}

GroundTruth compute_truth(const Graph &g, Task task, std::optional<Edge> pair) {
  if (is_pair_task(task) && !pair)
    throw InputError(std::string(to_string(task)) + " needs a node pair");
  if (!is_pair_task(task) && pair)
    throw InputError(std::string(to_string(task)) + " takes no node pair");
  switch (task) {
  case Task::CoNe: {
    auto common = common_neighbors(g, pair->first, pair->second);
    return {static_cast<int>(common.size()), std::move(common)};
  }
  case Task::ShPa: {
    auto sp = shortest_path(g, pair->first, pair->second);
    if (!sp.reachable)
      throw InputError("nodes " + std::to_string(pair->first) + " and " +
                       std::to_string(pair->second) + " are not connected");
    return {sp.length, std::move(sp.path)};
  }
  case Task::MaxC: {
    auto r = max_clique_exact(g);
    return {r.size, std::move(r.witness)};
  }
  case Task::MinVC: {
    auto r = min_vertex_cover_exact(g);
    return {r.size, std::move(r.witness)};
  }
  }
  return {};
}

std::vector<TaskInstance> sample_instances(const Graph &g, Task task, int pairs_per_graph,
                                           std::uint64_t seed) {
  std::vector<TaskInstance> out;
  auto make = [&](std::optional<Edge> pair) {
    TaskInstance inst;
    inst.id = std::string(to_string(task)) + "/" + std::to_string(out.size());
    inst.graph = &g;
    inst.task = task;
    inst.pair = pair;
    inst.truth = compute_truth(g, task, pair);
    out.push_back(std::move(inst));
  };
  if (!is_pair_task(task)) {
    make(std::nullopt);
    return out;
  }
  if (g.node_count() < 2)
    throw SamplingError("pair tasks need at least 2 nodes");

  // Component labels so only connected pairs are eligible.
  std::vector<int> comp(g.node_count(), -1);
  for (NodeId s = 0, label = 0; s < g.node_count(); ++s) {
    if (comp[s] >= 0)
      continue;
    std::vector<NodeId> stack{s};
    comp[s] = label;
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(v))
        if (comp[w] < 0) {
          comp[w] = label;
          stack.push_back(w);
        }
    }
    ++label;
  }
  std::vector<Edge> pairs;
  for (NodeId u = 0; u < g.node_count(); ++u)
    for (NodeId v = u + 1; v < g.node_count(); ++v)
      if (comp[u] == comp[v])
        pairs.emplace_back(u, v);
  if (pairs.empty())
    throw SamplingError("graph has no connected node pair");

  Rng rng(seed);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(std::max(pairs_per_graph, 0)),
                                          pairs.size());
  // Partial Fisher-Yates: the first `take` slots are a uniform sample.
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pairs.size() - i));
    std::swap(pairs[i], pairs[j]);
    make(pairs[i]);
  }
  return out;
}

// ---- generators -------------------------------------------------------------

namespace {

// Adds edges between components until the edge set is connected.
void connect_components(int n, std::set<Edge> &edges, Rng &rng) {
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i)
    parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [a, b] : edges)
    parent[find(a)] = find(b);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i)
    order[i] = i;
  rng.shuffle(order);
  for (int i = 1; i < n; ++i) {
    int a = order[i];
    int b = order[rng.below(static_cast<std::uint64_t>(i))];
    if (find(a) != find(b)) {
      edges.emplace(std::min(a, b), std::max(a, b));
      parent[find(a)] = find(b);
    }
  }
}

Graph from_set(int n, const std::set<Edge> &edges) {
  std::vector<Edge> list(edges.begin(), edges.end());
  return Graph(n, list);
}

// Relabels nodes with a random permutation.
Graph relabel(const Graph &g, Rng &rng) {
  std::vector<int> perm(g.node_count());
  for (int i = 0; i < g.node_count(); ++i)
    perm[i] = i;
  rng.shuffle(perm);
  std::vector<Edge> edges;
  for (auto [a, b] : g.edges())
    edges.emplace_back(perm[a], perm[b]);
  return Graph(g.node_count(), edges);
}

} // namespace

Graph generate_gnp_connected(int n, double p, std::uint64_t seed) {
  if (n < 1)
    throw GenerationError("need at least one node");
  Rng rng(seed);
  std::set<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p))
        edges.emplace(i, j);
  connect_components(n, edges, rng);
  return from_set(n, edges);
}

Graph generate_planted_clique(int n, int k, double edge_prob, std::uint64_t seed,
                              int max_retries) {
  if (k < 2 || k > n)
    throw GenerationError("planted clique needs 2 <= k <= n");
  if (n > kDefaultExactCap)
    throw GenerationError("n exceeds the exact-solver cap");
  double p = edge_prob;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt == max_retries)
      p = 0.0;
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i)
      perm[i] = i;
    rng.shuffle(perm);
    std::set<Edge> edges;
    auto add = [&](int a, int b) { edges.emplace(std::min(a, b), std::max(a, b)); };
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        add(perm[i], perm[j]);
    // Each later node hangs off exactly one earlier node, so no node outside
    // the clique gains two clique neighbors from the tree.
    for (int i = k; i < n; ++i)
      add(perm[i], perm[rng.below(static_cast<std::uint64_t>(i))]);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (p > 0 && rng.bernoulli(p))
          add(a, b);
    Graph g = from_set(n, edges);
    if (max_clique_exact(g).size == k)
      return g;
    p *= 0.6;
  }
  throw GenerationError("could not confirm a maximum clique of size " + std::to_string(k));
}

Graph generate_controlled_vc(int n, int target_vc, std::uint64_t seed, double edge_prob,
                             int max_retries) {
  if (target_vc < 1 || target_vc >= n)
    throw GenerationError("controlled vertex cover needs 1 <= target < n");
  if (n > kDefaultExactCap)
    throw GenerationError("n exceeds the exact-solver cap");
  const int groups = n - target_vc;
  double p = edge_prob;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    if (attempt == max_retries)
      p = 0.0;
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i)
      perm[i] = i;
    rng.shuffle(perm);
    // perm[0..groups) are the representatives; the rest join random groups.
    std::vector<std::vector<int>> members(groups);
    std::vector<char> is_rep(n, 0);
    for (int gi = 0; gi < groups; ++gi) {
      members[gi].push_back(perm[gi]);
      is_rep[perm[gi]] = 1;
    }
    for (int i = groups; i < n; ++i)
      members[rng.below(static_cast<std::uint64_t>(groups))].push_back(perm[i]);

    std::set<Edge> edges;
    auto add = [&](int a, int b) { edges.emplace(std::min(a, b), std::max(a, b)); };
    for (const auto &grp : members)
      for (std::size_t i = 0; i < grp.size(); ++i)
        for (std::size_t j = i + 1; j < grp.size(); ++j)
          add(grp[i], grp[j]);

    // Spanning structure over groups, never joining two representatives.
    std::vector<int> order(groups);
    for (int i = 0; i < groups; ++i)
      order[i] = i;
    rng.shuffle(order);
    std::stable_partition(order.begin(), order.end(),
                          [&](int gi) { return members[gi].size() > 1; });
    std::vector<int> seen_nonreps, seen_all;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
      const auto &grp = members[order[oi]];
      if (oi > 0) {
        if (grp.size() > 1) {
          int x = grp[1 + rng.below(grp.size() - 1)];
          int y = seen_all[rng.below(seen_all.size())];
          add(x, y);
        } else {
          add(grp[0], seen_nonreps[rng.below(seen_nonreps.size())]);
        }
      }
      for (std::size_t i = 0; i < grp.size(); ++i) {
        seen_all.push_back(grp[i]);
        if (i > 0)
          seen_nonreps.push_back(grp[i]);
      }
    }
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (!(is_rep[a] && is_rep[b]) && p > 0 && rng.bernoulli(p))
          add(a, b);

    Graph g = from_set(n, edges);
    if (g.connected() && min_vertex_cover_exact(g).size == target_vc)
      return g;
    p *= 0.6;
  }
  throw GenerationError("could not confirm a minimum vertex cover of size " +
                        std::to_string(target_vc));
}

Graph generate_communities(int n, int blocks, double p_in, double p_out, std::uint64_t seed) {
  if (n < 1 || blocks < 1)
    throw GenerationError("communities need n >= 1 and blocks >= 1");
  Rng rng(seed);
  std::set<Edge> edges;
  auto block_of = [&](int v) { return v * blocks / n; };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(block_of(i) == block_of(j) ? p_in : p_out))
        edges.emplace(i, j);
  connect_components(n, edges, rng);
  return relabel(from_set(n, edges), rng);
}

Graph generate_planar_grid(int rows, int cols, double diagonal_prob, std::uint64_t seed) {
  if (rows < 1 || cols < 1)
    throw GenerationError("grid needs positive dimensions");
  Rng rng(seed);
  std::set<Edge> edges;
  auto id = [&](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols)
        edges.emplace(id(r, c), id(r, c + 1));
      if (r + 1 < rows)
        edges.emplace(id(r, c), id(r + 1, c));
      if (r + 1 < rows && c + 1 < cols && rng.bernoulli(diagonal_prob)) {
        if (rng.bernoulli(0.5))
          edges.emplace(id(r, c), id(r + 1, c + 1));
        else
          edges.emplace(id(r, c + 1), id(r + 1, c));
      }
    }
  return relabel(from_set(rows * cols, edges), rng);
}

namespace {

// Cycle with random non-crossing chords: outerplanar, so planar.
Graph generate_outerplanar(int n, int chords, Rng &rng) {
  std::set<Edge> edges;
  for (int i = 0; i < n; ++i)
    edges.emplace(std::min(i, (i + 1) % n), std::max(i, (i + 1) % n));
  std::vector<Edge> added;
  for (int tries = 0; tries < chords * 20 && static_cast<int>(added.size()) < chords; ++tries) {
    int a = static_cast<int>(rng.below(n)), b = static_cast<int>(rng.below(n));
    if (a > b)
      std::swap(a, b);
    if (b - a < 2 || (a == 0 && b == n - 1) || edges.count({a, b}))
      continue;
    bool crosses = std::any_of(added.begin(), added.end(), [&](Edge e) {
      return (a < e.first && e.first < b && b < e.second) ||
             (e.first < a && a < e.second && e.second < b);
    });
    if (crosses)
      continue;
    added.emplace_back(a, b);
    edges.emplace(a, b);
  }
  return relabel(from_set(n, edges), rng);
}

// Mixed-topology graph on exactly n nodes: outerplanar, sparse random,
// community-structured or tree-like, chosen by `style`.
Graph mixed_topology(int n, int style, std::uint64_t seed) {
  Rng rng(seed);
  switch (style % 4) {
  case 0:
    return generate_outerplanar(n, n / 3, rng);
  case 1:
    return relabel(generate_gnp_connected(n, std::min(0.5, 2.5 / n), rng.next()), rng);
  case 2:
    return generate_communities(n, std::max(2, n / 8), 0.6, 0.04, rng.next());
  default:
    return relabel(generate_gnp_connected(n, 1.0 / n, rng.next()), rng);
  }
}

struct BenchContract {
  std::size_t count;
  int min_n, max_n;
  std::optional<Task> task;
  int min_value, max_value;
};

std::optional<BenchContract> contract_for(std::string_view name) {
  if (name == "Bench-1")
    return BenchContract{20, 6, 50, std::nullopt, 0, 0};
  if (name == "Bench-2")
    return BenchContract{20, 2, 64, Task::MaxC, 2, 7};
  if (name == "Bench-3")
    return BenchContract{20, 2, 64, Task::MinVC, 1, 26};
  if (name == "Bench-4")
    return BenchContract{28, 7, 50, std::nullopt, 0, 0};
  return std::nullopt;
}

void check_truth(const Graph &g, const StoredInstance &inst, const std::string &where) {
  auto fail = [&](const std::string &why) {
    throw InputError(where + " " + std::string(to_string(inst.task)) + ": " + why);
  };
  const auto oracle = compute_truth(g, inst.task, inst.pair);
  if (inst.truth.value != oracle.value)
    fail("cached value " + std::to_string(inst.truth.value) + " != oracle " +
         std::to_string(oracle.value));
  Witness w;
  w.nodes.assign(inst.truth.witness.begin(), inst.truth.witness.end());
  const auto k = static_cast<int>(w.nodes.size());
  switch (inst.task) {
  case Task::CoNe:
    if (inst.truth.witness != oracle.witness)
      fail("cached common-neighbor set differs from oracle");
    break;
  case Task::ShPa:
    w.kind = WitnessKind::Path;
    if (k != oracle.value + 1 || w.nodes.front() != inst.pair->first ||
        w.nodes.back() != inst.pair->second || validate_path(g, w) != oracle.value)
      fail("cached path is not a shortest path");
    break;
  case Task::MaxC:
    w.kind = WitnessKind::Clique;
    if (k != oracle.value || validate_clique(g, w) != k * (k - 1) / 2)
      fail("cached witness is not a maximum clique");
    break;
  case Task::MinVC:
    w.kind = WitnessKind::Cover;
    if (k != oracle.value || validate_cover(g, w) != 0)
      fail("cached witness is not a minimum vertex cover");
    break;
  }
}

} // namespace

void validate_manifest(const BenchmarkManifest &m) {
  for (const auto &e : m.entries) {
    if (!e.graph.connected())
      throw InputError(m.name + "/" + e.id + ": graph is not connected");
    for (const auto &inst : e.instances)
      check_truth(e.graph, inst, m.name + "/" + e.id);
  }
  auto c = contract_for(m.name);
  if (!c)
    return;
  if (m.entries.size() != c->count)
    throw InputError(m.name + " must have " + std::to_string(c->count) + " graphs, has " +
                     std::to_string(m.entries.size()));
  for (const auto &e : m.entries) {
    const int n = e.graph.node_count();
    if (n < c->min_n || n > c->max_n)
      throw InputError(m.name + "/" + e.id + ": node count " + std::to_string(n) +
                       " outside [" + std::to_string(c->min_n) + "," + std::to_string(c->max_n) +
                       "]");
    if (c->task) {
      const int value = compute_truth(e.graph, *c->task).value;
      if (value < c->min_value || value > c->max_value)
        throw InputError(m.name + "/" + e.id + ": " + std::string(to_string(*c->task)) + " = " +
                         std::to_string(value) + " outside [" + std::to_string(c->min_value) +
                         "," + std::to_string(c->max_value) + "]");
    }
  }
}

// ---- manifest (de)serialization -------------------------------------------

std::string manifest_to_json(const BenchmarkManifest &m) {
  json j;
  j["format_version"] = 1;
  j["name"] = m.name;
  j["seed"] = m.seed;
  j["entries"] = json::array();
  for (const auto &e : m.entries) {
    json je;
    je["id"] = e.id;
    je["origin"] = e.origin;
    je["graph6"] = to_graph6(e.graph);
    je["instances"] = json::array();
    for (const auto &inst : e.instances) {
      json ji;
      ji["task"] = to_string(inst.task);
      if (inst.pair)
        ji["pair"] = {inst.pair->first, inst.pair->second};
      ji["value"] = inst.truth.value;
      ji["witness"] = inst.truth.witness;
      je["instances"].push_back(std::move(ji));
    }
    j["entries"].push_back(std::move(je));
  }
  return j.dump(2) + "\n";
}

namespace {

BenchmarkManifest manifest_from_json_impl(std::string_view text,
                                          const std::filesystem::path &base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw InputError(std::string("manifest is not valid JSON: ") + e.what());
  }
  try {
    BenchmarkManifest m;
    m.name = j.at("name").get<std::string>();
    m.seed = j.value("seed", std::uint64_t{0});
    for (const auto &je : j.at("entries")) {
      ManifestEntry e;
      e.id = je.at("id").get<std::string>();
      e.origin = je.value("origin", std::string{});
      if (je.contains("graph6")) {
        e.graph = parse_graph6(je.at("graph6").get<std::string>());
      } else {
        const auto file = base_dir / je.at("file").get<std::string>();
        const auto fmt = je.value("format", std::string("graph6"));
        const auto graphs = load_graphs(file, fmt == "adjacency-list" ? GraphFormat::AdjacencyList
                                                                      : GraphFormat::Graph6);
        const auto index = je.value("index", std::size_t{0});
        if (index >= graphs.size())
          throw InputError(file.string() + " has no graph at index " + std::to_string(index));
        e.graph = graphs[index];
        if (e.origin.empty())
          e.origin = file.filename().string();
      }
      for (const auto &ji : je.value("instances", json::array())) {
        StoredInstance inst;
        inst.task = parse_task(ji.at("task").get<std::string>());
        if (ji.contains("pair"))
          inst.pair = Edge{ji.at("pair").at(0).get<int>(), ji.at("pair").at(1).get<int>()};
        inst.truth.value = ji.at("value").get<int>();
        inst.truth.witness = ji.at("witness").get<std::vector<NodeId>>();
        e.instances.push_back(std::move(inst));
      }
      m.entries.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception &e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
}

} // namespace

BenchmarkManifest manifest_from_json(std::string_view text) {
  return manifest_from_json_impl(text, std::filesystem::current_path());
}

void save_manifest(const BenchmarkManifest &m, const std::filesystem::path &path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InputError("cannot write " + path.string());
  out << manifest_to_json(m);
}

BenchmarkManifest load_manifest(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto m = manifest_from_json_impl(buf.str(), path.parent_path());
  validate_manifest(m);
  return m;
}

// ---- named benchmarks -------------------------------------------------------

std::vector<Task> benchmark_tasks(std::string_view name) {
  if (name == "Bench-2")
    return {Task::MaxC};
  if (name == "Bench-3")
    return {Task::MinVC};
  return {Task::CoNe, Task::ShPa};
}

namespace {

std::string entry_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "g%02zu", i);
  return buf;
}

void attach_instances(BenchmarkManifest &m, const std::vector<Task> &tasks, int pairs_per_graph) {
  for (auto &e : m.entries)
    for (Task t : tasks) {
      const auto seed = mix_seed(m.seed, hash_label(e.id + "/" + std::string(to_string(t))));
      for (auto &inst : sample_instances(e.graph, t, pairs_per_graph, seed))
        e.instances.push_back({inst.task, inst.pair, std::move(inst.truth)});
    }
}

} // namespace

BenchmarkManifest build_benchmark(std::string_view name, std::uint64_t seed) {
  BenchmarkManifest m;
  m.name = std::string(name);
  m.seed = seed;
  auto add = [&](Graph g, std::string origin) {
    m.entries.push_back({entry_id(m.entries.size()), std::move(origin), std::move(g), {}});
  };
  if (name == "Bench-1" || name == "Bench-4") {
    const int count = name == "Bench-1" ? 20 : 28;
    const int lo = name == "Bench-1" ? 6 : 7;
    for (int i = 0; i < count; ++i) {
      const int n = lo + static_cast<int>(std::lround(i * (50.0 - lo) / (count - 1)));
      const auto s = mix_seed(seed, static_cast<std::uint64_t>(i));
      static constexpr const char *styles[] = {"outerplanar", "sparse-random", "communities",
                                               "tree-like"};
      add(mixed_topology(n, i, s), std::string(styles[i % 4]) + " n=" + std::to_string(n));
    }
  } else if (name == "Bench-2") {
    for (int i = 0; i < 20; ++i) {
      const int k = 2 + i % 6;
      const int n = 8 + (i * 22) / 19;
      const double p = 0.08 + 0.04 * (i % 5);
      add(generate_planted_clique(n, k, p, mix_seed(seed, static_cast<std::uint64_t>(i))),
          "planted-clique n=" + std::to_string(n) + " k=" + std::to_string(k));
    }
  } else if (name == "Bench-3") {
    for (int i = 0; i < 20; ++i) {
      const int t = 1 + static_cast<int>(std::lround(i * 25.0 / 19.0));
      const int n = std::max(t + 5, std::min(50, 2 * t - 2));
      add(generate_controlled_vc(n, t, mix_seed(seed, static_cast<std::uint64_t>(i))),
          "controlled-vc n=" + std::to_string(n) + " target=" + std::to_string(t));
    }
  } else {
    throw InputError("unknown benchmark '" + std::string(name) + "'");
  }
  attach_instances(m, benchmark_tasks(name), 2);
  return m;
}

BenchmarkManifest manifest_from_graphs(std::string name, const std::vector<Graph> &graphs,
                                       const std::vector<Task> &tasks, std::string origin,
                                       std::uint64_t seed, int pairs_per_graph) {
  BenchmarkManifest m;
  m.name = std::move(name);
  m.seed = seed;
  for (std::size_t i = 0; i < graphs.size(); ++i)
    m.entries.push_back({entry_id(i), origin + "#" + std::to_string(i), graphs[i], {}});
  attach_instances(m, tasks, pairs_per_graph);
  return m;
}

std::vector<TaskInstance> entry_instances(const BenchmarkManifest &m, const ManifestEntry &entry,
                                          Task task) {
  std::vector<TaskInstance> out;
  for (const auto &inst : entry.instances) {
    if (inst.task != task)
      continue;
    TaskInstance ti;
    ti.graph_id = entry.id;
    ti.graph = &entry.graph;
    ti.task = task;
    ti.pair = inst.pair;
    ti.truth = inst.truth;
    ti.id = m.name + "/" + entry.id + "/" + std::string(to_string(task));
    if (is_pair_task(task))
      ti.id += "/" + std::to_string(out.size());
    out.push_back(std::move(ti));
  }
  return out;
}

} // namespace vgb
