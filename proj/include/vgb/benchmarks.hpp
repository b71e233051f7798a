#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vgb/graph.hpp"

namespace vgb {

// ---- graph file formats -------------------------------------------------

enum class GraphFormat { Graph6, AdjacencyList };

// Standard graph6 (optional ">>graph6<<" header, n < 258048).
Graph parse_graph6(std::string_view line);
std::string to_graph6(const Graph &g);

// One graph per block of "u: v1 v2 ..." lines; blocks separated by blank
// lines. The listed adjacency must be symmetric.
std::vector<Graph> parse_adjacency_lists(std::string_view text);
std::string to_adjacency_list(const Graph &g);

// Reads a whole file. graph6: one graph per non-empty line. Errors carry the
// 1-based line number (ParseError).
std::vector<Graph> load_graphs(const std::filesystem::path &path, GraphFormat format);
std::vector<Graph> parse_graphs(std::string_view text, GraphFormat format);

// ---- tasks and instances --------------------------------------------------

enum class Task { CoNe, ShPa, MaxC, MinVC };

std::string_view to_string(Task t);
Task parse_task(std::string_view s);
inline bool is_pair_task(Task t) { return t == Task::CoNe || t == Task::ShPa; }

struct GroundTruth {
  int value = 0;
  std::vector<NodeId> witness;
};

GroundTruth compute_truth(const Graph &g, Task task, std::optional<Edge> pair = std::nullopt);

struct TaskInstance {
  std::string id; // "<bench>/<graph-id>/<task>[/<pair index>]"
  std::string graph_id;
  const Graph *graph = nullptr; // owned by the manifest/benchmark
  Task task = Task::CoNe;
  std::optional<Edge> pair;
  GroundTruth truth;
};

// Pairs are drawn without replacement from the connected unordered pairs;
// returns min(pairs_per_graph, #connected pairs) instances for pair tasks and
// exactly one for MaxC/MinVC. Throws SamplingError if a pair task has no pair.
std::vector<TaskInstance> sample_instances(const Graph &g, Task task, int pairs_per_graph,
                                           std::uint64_t seed);

// ---- generators -------------------------------------------------------------

Graph generate_gnp_connected(int n, double p, std::uint64_t seed);

// Connected graph whose maximum clique is exactly k. A k-clique is planted on
// a random recursive tree (clique number k by construction) and background
// edges are sprinkled at edge_prob; the density is backed off until the exact
// solver confirms k. Throws GenerationError after the retry budget.
Graph generate_planted_clique(int n, int k, double edge_prob, std::uint64_t seed,
                              int max_retries = 24);

// Connected graph whose minimum vertex cover is exactly target_vc (1 <= target
// < n). Nodes are split into n - target_vc clique groups, each with one
// representative; representatives stay pairwise non-adjacent, which pins the
// independence number to the group count.
Graph generate_controlled_vc(int n, int target_vc, std::uint64_t seed, double edge_prob = 0.15,
                             int max_retries = 24);

// Planted-partition graph: dense blocks joined by sparse inter-block edges.
Graph generate_communities(int n, int blocks, double p_in, double p_out, std::uint64_t seed);

// Triangulated grid-like planar graph (rows x cols with random diagonals).
Graph generate_planar_grid(int rows, int cols, double diagonal_prob, std::uint64_t seed);

// ---- manifests --------------------------------------------------------------

// A cached task instance: the query pair (pair tasks only) and its truth.
struct StoredInstance {
  Task task = Task::CoNe;
  std::optional<Edge> pair;
  GroundTruth truth;
};

struct ManifestEntry {
  std::string id;
  std::string origin; // free text: generator parameters or source file
  Graph graph;
  std::vector<StoredInstance> instances;
};

struct BenchmarkManifest {
  std::string name; // Bench-1 .. Bench-4, or a custom name
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;
};

// Re-runs the oracles and checks every cached ground truth. For the four
// named benchmarks, also checks the size/range contract of that benchmark.
// Throws InputError describing the first violation.
void validate_manifest(const BenchmarkManifest &m);

std::string manifest_to_json(const BenchmarkManifest &m);
BenchmarkManifest manifest_from_json(std::string_view text);
void save_manifest(const BenchmarkManifest &m, const std::filesystem::path &path);
BenchmarkManifest load_manifest(const std::filesystem::path &path);

// Builds one of the four named benchmarks ("Bench-1".."Bench-4") from a seed.
BenchmarkManifest build_benchmark(std::string_view name, std::uint64_t seed);

// Tasks each named benchmark is used for (Bench-1/4: CoNe+ShPa, Bench-2:
// MaxC, Bench-3: MinVC).
std::vector<Task> benchmark_tasks(std::string_view name);

// Manifest from an external graph list (e.g. a House of Graphs export).
// Instances are sampled for `tasks` with the manifest seed.
BenchmarkManifest manifest_from_graphs(std::string name, const std::vector<Graph> &graphs,
                                       const std::vector<Task> &tasks, std::string origin,
                                       std::uint64_t seed, int pairs_per_graph = 2);

// Instances of `entry` for `task`, as TaskInstances pointing at entry.graph.
std::vector<TaskInstance> entry_instances(const BenchmarkManifest &m, const ManifestEntry &entry,
                                          Task task);

} // namespace vgb
