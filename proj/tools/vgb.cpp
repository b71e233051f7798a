// vgb: benchmark generation, rendering, experiment runs and reports.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vgb/error.hpp"
#include "vgb/experiment.hpp"
#include "vgb/layout.hpp"

using namespace vgb;

namespace {

std::string read_text(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw InputError("cannot read " + p.string());
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int cmd_run(const std::string &config_path, const std::string &backend, const std::string &output, int workers,
            bool resume, bool allow_spend) {
  auto cfg = load_experiment_config(config_path);
  if (!output.empty())
    cfg.output_dir = output;
  if (workers > 0)
    cfg.workers = workers;
  if (!backend.empty()) {
    const std::string kind = backend == "mock" ? "oracle-mock" : backend;
    if (kind == "replay" && cfg.backend.kind != "replay")
      cfg.backend.replays = backend_id(cfg.backend);
    cfg.backend.kind = kind;
    backend_id(cfg.backend); // rejects unknown kinds early
  }
  const auto jobs = plan_jobs(cfg);
  std::cerr << "vgb: " << to_string(cfg.experiment) << ", " << jobs.size() << " jobs on " << backend_id(cfg.backend)
            << "\n";
  const auto result = run_experiment(cfg, {resume, allow_spend});
  std::cout << "records:       " << result.records.size() << "\n"
            << "failures:      " << result.failures.size() << "\n"
            << "backend calls: " << result.stats.backend_calls << "\n"
            << "cache hits:    " << result.stats.cache_hits << "\n"
            << "output:        " << cfg.output_dir.string() << "\n";
  for (const auto &f : result.failures)
    std::cerr << "failed " << f.instance_id << " " << to_string(f.modality) << " " << to_string(f.technique) << " ["
              << f.kind << "] " << f.message << "\n";
  return result.failures.empty() ? 0 : 1;
}

int cmd_report(const std::filesystem::path &records, std::filesystem::path out) {
  const auto file = std::filesystem::is_directory(records) ? records / "records.jsonl" : records;
  if (out.empty())
    out = file.parent_path() / "report";
  const auto recs = read_records(file);
  for (const auto &p : emit_report(recs, out))
    std::cout << p.string() << "\n";
  return 0;
}

int cmd_gen_bench(const std::filesystem::path &spec, const std::filesystem::path &out) {
  auto m = benchmark_from_spec(read_text(spec), spec.parent_path());
  validate_manifest(m);
  if (out.empty()) {
    std::cout << manifest_to_json(m) << "\n";
  } else {
    save_manifest(m, out);
    std::cerr << "vgb: wrote " << m.entries.size() << " graphs of " << m.name << " to " << out.string() << "\n";
  }
  return 0;
}

int cmd_render(const std::filesystem::path &graph_file, const std::string &paradigm, const std::string &format,
               std::size_t index, std::uint64_t seed, int improve, const std::filesystem::path &out, int width) {
  const std::string text = read_text(graph_file);
  GraphFormat fmt;
  if (format == "graph6")
    fmt = GraphFormat::Graph6;
  else if (format == "adjacency")
    fmt = GraphFormat::AdjacencyList;
  else // auto: adjacency lists always contain "u:" lines, graph6 never has ':'
    fmt = text.find(':') != std::string::npos && text.rfind(">>graph6<<", 0) != 0 ? GraphFormat::AdjacencyList
                                                                                    : GraphFormat::Graph6;
  const auto graphs = parse_graphs(text, fmt);
  if (index >= graphs.size())
    throw InputError("graph index " + std::to_string(index) + " out of range (file holds " +
                     std::to_string(graphs.size()) + ")");
  const Graph &g = graphs[index];
  Drawing d = parse_paradigm(paradigm) == Paradigm::Orthogonal ? layout_orthogonal(g, seed)
                                                                : layout_force_directed(g, seed);
  if (improve > 0)
    d = improve_drawing(d, improve, seed);
  RenderStyle style;
  style.raster_width = width;
  const std::string svg = render_svg(d, style);
  const auto q = quality_report(d);
  std::cerr << "vgb: " << g.node_count() << " nodes, " << g.edge_count() << " edges, " << q.crossings
            << " crossings\n";
  if (out.empty()) {
    std::cout << svg;
  } else if (out.extension() == ".png") {
    const auto r = rasterize(svg, style);
    write_file(out, std::string_view(reinterpret_cast<const char *>(r.png.data()), r.png.size()));
  } else {
    write_file(out, svg);
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Graph drawing benchmarks and LLM evaluation harness"};
  app.require_subcommand(1);

  std::string config, backend, output;
  int workers = 0;
  bool resume = false, allow_spend = false;
  auto *run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--backend", backend, "Override the backend: oracle-mock (or mock), replay, http");
  run->add_option("--output", output, "Override the output directory");
  run->add_option("--workers", workers, "Override the worker count");
  run->add_flag("--resume", resume, "Continue a run in an existing output directory");
  run->add_flag("--allow-spend", allow_spend, "Allow paid provider calls");

  std::string records, report_out;
  auto *report = app.add_subcommand("report", "Rebuild report files from records");
  report->add_option("--records", records, "records.jsonl or the run directory holding it")->required();
  report->add_option("--out", report_out, "Report directory (default: <run>/report)");

  std::string spec, bench_out;
  auto *gen = app.add_subcommand("gen-bench", "Build a benchmark manifest from a spec");
  gen->add_option("--spec", spec, "Benchmark spec (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", bench_out, "Manifest path (default: stdout)");

  std::string graph_file, paradigm = "straight-line", format = "auto", render_out;
  std::size_t index = 0;
  std::uint64_t seed = 1;
  int improve = 0, width = 1024;
  auto *render = app.add_subcommand("render", "Draw one graph as SVG or PNG");
  render->add_option("--graph", graph_file, "Graph file (graph6 or adjacency list)")->required()->check(CLI::ExistingFile);
  render->add_option("--paradigm", paradigm, "straight-line or orthogonal")->capture_default_str();
  render->add_option("--format", format, "auto, graph6 or adjacency")->capture_default_str();
  render->add_option("--index", index, "Which graph of the file")->capture_default_str();
  render->add_option("--seed", seed, "Layout seed")->capture_default_str();
  render->add_option("--improve", improve, "Local-search budget for an improved drawing")->capture_default_str();
  render->add_option("--width", width, "Raster width in pixels")->capture_default_str();
  render->add_option("--out", render_out, "Output .svg or .png (default: SVG on stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run)
      return cmd_run(config, backend, output, workers, resume, allow_spend);
    if (*report)
      return cmd_report(records, report_out);
    if (*gen)
      return cmd_gen_bench(spec, bench_out);
    if (*render)
      return cmd_render(graph_file, paradigm, format, index, seed, improve, render_out, width);
  } catch (const Error &e) {
    std::cerr << "vgb: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "vgb: unexpected error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
