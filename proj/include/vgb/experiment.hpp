#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vgb/benchmarks.hpp"
#include "vgb/eval.hpp"
#include "vgb/llm_client.hpp"
#include "vgb/prompts.hpp"
#include "vgb/render.hpp"

namespace vgb {

// ---- benchmark specs ----------------------------------------------------------------

// JSON benchmark description, either a named benchmark
//   {"name": "Bench-1", "seed": 2025}
// a stored manifest
//   {"manifest": "path/to/manifest.json"}
// or a custom generated set
//   {"name": "tiny", "seed": 3, "tasks": ["CoNe", ...], "pairs_per_graph": 2,
//    "graphs": [{"generator": "gnp", "n": 8, "p": 0.4, "seed": 1}, ...]}
// Generators: gnp(n,p), planted_clique(n,k,p), controlled_vc(n,target),
// communities(n,blocks,p_in,p_out), planar_grid(rows,cols,p). Relative
// manifest paths resolve against base_dir.
BenchmarkManifest benchmark_from_spec(std::string_view spec_json, const std::filesystem::path &base_dir = {});

// ---- experiment configuration ----------------------------------------------------

enum class Experiment { Exp1, Exp2, Exp3 };
std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view s);

struct BackendSpec {
  std::string kind = "oracle-mock"; // oracle-mock | http | replay
  double corruption_rate = 0;
  std::uint64_t seed = 1;
  HttpConfig http;
  std::string replays; // replay: id of the backend that filled the cache
};

// Id of the backend the spec describes, without constructing it.
std::string backend_id(const BackendSpec &spec);
// Replay specs need `replays`; http specs need the key variable set.
std::shared_ptr<Backend> make_backend(const BackendSpec &spec);

struct ExperimentConfig {
  Experiment experiment = Experiment::Exp1;
  std::vector<BenchmarkManifest> benchmarks;
  std::vector<Task> tasks;
  std::vector<Modality> modalities;
  std::vector<Technique> techniques;
  BackendSpec backend;
  std::string model = "mock";
  double temperature = 0;
  int max_tokens = 2048;
  std::uint64_t seed = 1;
  int workers = 4;
  int max_in_flight = 4;
  int improve_budget = 500;
  RenderStyle style;
  std::filesystem::path output_dir = "runs/out";
  std::filesystem::path cache_dir; // empty: <output_dir>/cache
  std::filesystem::path templates_dir; // empty: embedded templates
};

// Allowed matrix of each experiment.
std::vector<Task> experiment_tasks(Experiment e);
std::vector<Modality> experiment_modalities(Experiment e);
std::vector<Technique> experiment_techniques(Experiment e);
std::vector<std::string> experiment_default_benchmarks(Experiment e);

// Parses a JSON config. Omitted tasks/modalities/techniques/benchmarks take
// the experiment's full matrix; listed ones must lie inside it. Throws
// ConfigError otherwise. Relative paths resolve against base_dir.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path &base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path &path);
void validate_config(const ExperimentConfig &cfg);

// ---- running ---------------------------------------------------------------------------

struct Job {
  const BenchmarkManifest *bench = nullptr;
  const ManifestEntry *entry = nullptr;
  TaskInstance instance;
  Modality modality = Modality::Txt;
  Technique technique;
};

// Every (instance, modality, technique) job in a fixed order: benchmark,
// graph, task, instance, modality, technique.
std::vector<Job> plan_jobs(const ExperimentConfig &cfg);

struct JobFailure {
  std::string instance_id;
  Modality modality = Modality::Txt;
  Technique technique;
  std::string kind; // error class
  std::string message;
};

struct RunOptions {
  bool resume = false;      // reuse an existing output directory
  bool allow_spend = false; // required for backends that cost money
};

struct RunResult {
  std::vector<EvalRecord> records; // job order
  std::vector<JobFailure> failures;
  ClientStats stats;
  std::vector<std::filesystem::path> report_files;
};

// Writes <output_dir>/records.jsonl, failures.json, images/ and report/.
// Per-job errors are collected, not thrown; ConfigError is thrown for an
// unusable config, a spending backend without allow_spend, or an existing
// run without resume.
RunResult run_experiment(const ExperimentConfig &cfg, const RunOptions &opt = {});

} // namespace vgb
