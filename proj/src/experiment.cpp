#include "vgb/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "vgb/error.hpp"
#include "vgb/layout.hpp"
#include "vgb/rng.hpp"

namespace vgb {

using json = nlohmann::json;

namespace {

json parse_json(std::string_view text, const char *what) {
  try {
    return json::parse(text);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("unreadable ") + what + ": " + e.what());
  }
}

std::string read_text(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in)
    throw ConfigError("cannot read " + p.string());
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where) {
  for (const auto &[k, _] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char *a) { return k == a; }))
      throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T> T get_or(const json &j, const char *key, T fallback) {
  try {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
  } catch (const json::exception &e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

Graph generate_from(const json &g) {
  check_keys(g, {"generator", "n", "p", "k", "target", "blocks", "p_in", "p_out", "rows", "cols", "seed"},
             "graph generator");
  const auto kind = get_or<std::string>(g, "generator", "");
  const auto seed = get_or<std::uint64_t>(g, "seed", 1);
  if (kind == "gnp")
    return generate_gnp_connected(get_or(g, "n", 8), get_or(g, "p", 0.3), seed);
  if (kind == "planted_clique")
    return generate_planted_clique(get_or(g, "n", 10), get_or(g, "k", 3), get_or(g, "p", 0.2), seed);
  if (kind == "controlled_vc")
    return generate_controlled_vc(get_or(g, "n", 10), get_or(g, "target", 3), seed);
  if (kind == "communities")
    return generate_communities(get_or(g, "n", 12), get_or(g, "blocks", 2), get_or(g, "p_in", 0.6),
                                get_or(g, "p_out", 0.1), seed);
  if (kind == "planar_grid")
    return generate_planar_grid(get_or(g, "rows", 3), get_or(g, "cols", 3), get_or(g, "p", 0.5), seed);
  throw ConfigError("unknown graph generator '" + kind + "'");
}

std::vector<Task> parse_tasks(const json &arr) {
  std::vector<Task> out;
  try {
    for (const auto &t : arr)
      out.push_back(parse_task(t.get<std::string>()));
  } catch (const InputError &e) {
    throw ConfigError(e.what());
  }
  return out;
}

BenchmarkManifest benchmark_from_json(const json &j, const std::filesystem::path &base) {
  if (!j.is_object())
    throw ConfigError("a benchmark spec must be an object");
  check_keys(j, {"name", "seed", "manifest", "tasks", "pairs_per_graph", "graphs"}, "benchmark spec");
  try {
    if (j.contains("manifest")) {
      auto m = load_manifest(resolve(base, j.at("manifest").get<std::string>()));
      validate_manifest(m);
      return m;
    }
    const auto name = get_or<std::string>(j, "name", "");
    const auto seed = get_or<std::uint64_t>(j, "seed", 2025);
    if (!j.contains("graphs")) {
      if (name != "Bench-1" && name != "Bench-2" && name != "Bench-3" && name != "Bench-4")
        throw ConfigError("benchmark '" + name + "' is neither a named benchmark nor has a graph list");
      return build_benchmark(name, seed);
    }
    if (name.empty() || name.rfind("Bench-", 0) == 0)
      throw ConfigError("a custom benchmark needs a name not starting with 'Bench-'");
    std::vector<Graph> graphs;
    for (const auto &g : j.at("graphs"))
      graphs.push_back(generate_from(g));
    const auto tasks = j.contains("tasks") ? parse_tasks(j.at("tasks"))
                                           : std::vector<Task>{Task::CoNe, Task::ShPa, Task::MaxC, Task::MinVC};
    return manifest_from_graphs(name, graphs, tasks, "generated", seed, get_or(j, "pairs_per_graph", 2));
  } catch (const json::exception &e) {
    throw ConfigError(std::string("bad benchmark spec: ") + e.what());
  }
}

} // namespace

BenchmarkManifest benchmark_from_spec(std::string_view spec_json, const std::filesystem::path &base_dir) {
  return benchmark_from_json(parse_json(spec_json, "benchmark spec"), base_dir);
}

// ---- configuration ---------------------------------------------------------------------

std::string_view to_string(Experiment e) {
  switch (e) {
  case Experiment::Exp1: return "exp1";
  case Experiment::Exp2: return "exp2";
  case Experiment::Exp3: return "exp3";
  }
  return "?";
}

Experiment parse_experiment(std::string_view s) {
  for (auto e : {Experiment::Exp1, Experiment::Exp2, Experiment::Exp3})
    if (to_string(e) == s)
      return e;
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

std::vector<Task> experiment_tasks(Experiment e) {
  if (e == Experiment::Exp3)
    return {Task::ShPa};
  return {Task::CoNe, Task::ShPa, Task::MaxC, Task::MinVC};
}

std::vector<Modality> experiment_modalities(Experiment e) {
  switch (e) {
  case Experiment::Exp1: return {Modality::Txt, Modality::SlV, Modality::OrV, Modality::SlM, Modality::OrM};
  case Experiment::Exp2: return {Modality::SlV, Modality::OrV};
  case Experiment::Exp3: return {Modality::SlV, Modality::ISlV, Modality::SlM, Modality::ISlM};
  }
  return {};
}

std::vector<Technique> experiment_techniques(Experiment e) {
  std::vector<Style> styles{Style::Std, Style::CoT};
  if (e == Experiment::Exp2)
    styles.push_back(Style::SoAL);
  std::vector<Technique> out;
  for (Style s : styles)
    for (Shots sh : {Shots::Zero, Shots::Few})
      out.push_back({s, sh});
  return out;
}

std::vector<std::string> experiment_default_benchmarks(Experiment e) {
  if (e == Experiment::Exp3)
    return {"Bench-4"};
  return {"Bench-1", "Bench-2", "Bench-3"};
}

std::string backend_id(const BackendSpec &spec) {
  if (spec.kind == "oracle-mock")
    return OracleMockBackend(spec.corruption_rate, spec.seed).id();
  if (spec.kind == "http")
    return spec.http.provider + "/" + spec.http.model;
  if (spec.kind == "replay") {
    if (spec.replays.empty())
      throw ConfigError("a replay backend needs the id of the backend it replays");
    return spec.replays;
  }
  throw ConfigError("unknown backend kind '" + spec.kind + "'");
}

std::shared_ptr<Backend> make_backend(const BackendSpec &spec) {
  if (spec.kind == "oracle-mock")
    return std::make_shared<OracleMockBackend>(spec.corruption_rate, spec.seed);
  if (spec.kind == "http")
    return std::make_shared<HttpBackend>(spec.http);
  if (spec.kind == "replay")
    return std::make_shared<ReplayBackend>(backend_id(spec));
  throw ConfigError("unknown backend kind '" + spec.kind + "'");
}

ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path &base_dir) {
  const json j = parse_json(json_text, "experiment config");
  if (!j.is_object())
    throw ConfigError("experiment config must be an object");
  check_keys(j, {"experiment", "benchmarks", "tasks", "modalities", "techniques", "backend", "model", "temperature",
                 "max_tokens", "seed", "workers", "max_in_flight", "improve_budget", "render", "output_dir",
                 "cache_dir", "templates_dir"},
             "experiment config");
  ExperimentConfig c;
  c.experiment = parse_experiment(get_or<std::string>(j, "experiment", ""));
  c.model = get_or<std::string>(j, "model", c.model);
  c.temperature = get_or(j, "temperature", c.temperature);
  c.max_tokens = get_or(j, "max_tokens", c.max_tokens);
  c.seed = get_or(j, "seed", c.seed);
  c.workers = get_or(j, "workers", c.workers);
  c.max_in_flight = get_or(j, "max_in_flight", c.max_in_flight);
  c.improve_budget = get_or(j, "improve_budget", c.improve_budget);
  c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", c.output_dir.string()));
  if (j.contains("cache_dir"))
    c.cache_dir = resolve(base_dir, j.at("cache_dir").get<std::string>());
  if (j.contains("templates_dir"))
    c.templates_dir = resolve(base_dir, j.at("templates_dir").get<std::string>());

  if (j.contains("render")) {
    const auto &r = j.at("render");
    check_keys(r, {"raster_width", "node_radius", "font_size", "min_font_size", "edge_stroke", "node_stroke",
                   "padding", "foreground", "background"},
               "render");
    auto &s = c.style;
    s.raster_width = get_or(r, "raster_width", s.raster_width);
    s.node_radius = get_or(r, "node_radius", s.node_radius);
    s.font_size = get_or(r, "font_size", s.font_size);
    s.min_font_size = get_or(r, "min_font_size", s.min_font_size);
    s.edge_stroke = get_or(r, "edge_stroke", s.edge_stroke);
    s.node_stroke = get_or(r, "node_stroke", s.node_stroke);
    s.padding = get_or(r, "padding", s.padding);
    s.foreground = get_or(r, "foreground", s.foreground);
    s.background = get_or(r, "background", s.background);
  }

  if (j.contains("backend")) {
    const auto &b = j.at("backend");
    check_keys(b, {"kind", "corruption_rate", "seed", "replays", "provider", "api", "endpoint", "model",
                   "max_retries", "backoff_initial_ms", "backoff_factor", "timeout_s", "requests_per_minute"},
               "backend");
    auto &s = c.backend;
    s.kind = get_or(b, "kind", s.kind);
    s.corruption_rate = get_or(b, "corruption_rate", s.corruption_rate);
    s.seed = get_or(b, "seed", s.seed);
    s.replays = get_or(b, "replays", s.replays);
    auto &h = s.http;
    h.provider = get_or(b, "provider", h.provider);
    h.api = get_or(b, "api", h.api);
    h.endpoint = get_or(b, "endpoint", h.endpoint);
    h.model = get_or(b, "model", c.model);
    h.max_retries = get_or(b, "max_retries", h.max_retries);
    h.backoff_initial_ms = get_or(b, "backoff_initial_ms", h.backoff_initial_ms);
    h.backoff_factor = get_or(b, "backoff_factor", h.backoff_factor);
    h.timeout_s = get_or(b, "timeout_s", h.timeout_s);
    h.requests_per_minute = get_or(b, "requests_per_minute", h.requests_per_minute);
  }
  c.backend.http.model = c.backend.http.model.empty() ? c.model : c.backend.http.model;

  c.tasks = j.contains("tasks") ? parse_tasks(j.at("tasks")) : experiment_tasks(c.experiment);
  if (j.contains("modalities")) {
    for (const auto &m : j.at("modalities"))
      c.modalities.push_back(parse_modality(m.get<std::string>()));
  } else {
    c.modalities = experiment_modalities(c.experiment);
  }
  if (j.contains("techniques")) {
    for (const auto &t : j.at("techniques"))
      c.techniques.push_back(parse_technique(t.get<std::string>()));
  } else {
    c.techniques = experiment_techniques(c.experiment);
  }
  if (j.contains("benchmarks")) {
    for (const auto &b : j.at("benchmarks"))
      c.benchmarks.push_back(benchmark_from_json(b, base_dir));
  } else {
    for (const auto &name : experiment_default_benchmarks(c.experiment))
      c.benchmarks.push_back(build_benchmark(name, c.seed));
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path &path) {
  return parse_experiment_config(read_text(path), path.parent_path());
}

void validate_config(const ExperimentConfig &c) {
  const std::string exp(to_string(c.experiment));
  auto inside = [](const auto &xs, const auto &allowed) {
    return std::all_of(xs.begin(), xs.end(),
                       [&](const auto &x) { return std::find(allowed.begin(), allowed.end(), x) != allowed.end(); });
  };
  if (c.tasks.empty() || !inside(c.tasks, experiment_tasks(c.experiment)))
    throw ConfigError(exp + " does not cover the configured tasks");
  if (c.modalities.empty() || !inside(c.modalities, experiment_modalities(c.experiment)))
    throw ConfigError(exp + " does not cover the configured modalities");
  if (c.techniques.empty() || !inside(c.techniques, experiment_techniques(c.experiment)))
    throw ConfigError(exp + " does not cover the configured techniques");
  if (c.benchmarks.empty())
    throw ConfigError("no benchmarks configured");
  for (const auto &b : c.benchmarks)
    if (c.experiment == Experiment::Exp3 && b.name.rfind("Bench-", 0) == 0 && b.name != "Bench-4")
      throw ConfigError("exp3 runs on Bench-4, not " + b.name);
  if (c.workers < 1 || c.max_in_flight < 1)
    throw ConfigError("workers and max_in_flight must be at least 1");
  if (c.improve_budget < 0)
    throw ConfigError("improve_budget must be non-negative");
  backend_id(c.backend);
}

// ---- running ----------------------------------------------------------------------------

std::vector<Job> plan_jobs(const ExperimentConfig &cfg) {
  std::vector<Job> jobs;
  for (const auto &b : cfg.benchmarks)
    for (const auto &e : b.entries)
      for (Task task : cfg.tasks)
        for (const auto &inst : entry_instances(b, e, task))
          for (Modality m : cfg.modalities)
            for (Technique t : cfg.techniques)
              if (is_valid_cell(m, t))
                jobs.push_back({&b, &e, inst, m, t});
  return jobs;
}

namespace {

std::string error_kind(const std::exception &e) {
  if (dynamic_cast<const AuthError *>(&e)) return "auth";
  if (dynamic_cast<const RateLimitError *>(&e)) return "rate-limit";
  if (dynamic_cast<const ReplayMissError *>(&e)) return "replay-miss";
  if (dynamic_cast<const TransportError *>(&e)) return "transport";
  if (dynamic_cast<const ConfigError *>(&e)) return "config";
  if (dynamic_cast<const LayoutError *>(&e)) return "layout";
  if (dynamic_cast<const RenderError *>(&e)) return "render";
  if (dynamic_cast<const InputError *>(&e)) return "input";
  return "error";
}

std::string variant_of(Modality m) {
  const std::string p(to_string(paradigm_of(m)));
  return is_improved(m) ? "improved-" + p : p;
}

struct Picture {
  Drawing drawing;
  std::vector<std::uint8_t> png;
};

// Drawings and images of every graph in the variants the run needs, written
// under <output_dir>/images as they are made.
std::map<std::string, Picture> draw_all(const ExperimentConfig &cfg, const std::vector<Job> &jobs,
                                        std::vector<JobFailure> &failures, std::set<std::string> &broken) {
  std::map<std::string, Picture> out;
  std::map<std::string, const Job *> wanted;
  for (const auto &j : jobs)
    if (has_image(j.modality))
      wanted.emplace(j.bench->name + "/" + j.entry->id + "/" + variant_of(j.modality), &j);
  for (const auto &[key, job] : wanted) {
    const auto &g = job->entry->graph;
    const std::uint64_t seed = cfg.seed ^ hash_label(job->bench->name + "/" + job->entry->id);
    try {
      Picture p;
      if (paradigm_of(job->modality) == Paradigm::Orthogonal) {
        p.drawing = layout_orthogonal(g, seed);
      } else {
        p.drawing = layout_force_directed(g, seed);
        if (is_improved(job->modality))
          p.drawing = improve_drawing(p.drawing, cfg.improve_budget, seed);
      }
      p.png = render_png(p.drawing, cfg.style).png;
      write_file(image_path(cfg.output_dir / "images", job->bench->name, job->entry->id, variant_of(job->modality)),
                 std::string_view(reinterpret_cast<const char *>(p.png.data()), p.png.size()));
      out.emplace(key, std::move(p));
    } catch (const Error &e) {
      broken.insert(key);
      failures.push_back({job->bench->name + "/" + job->entry->id, job->modality, job->technique, error_kind(e),
                          std::string("drawing failed: ") + e.what()});
    }
  }
  return out;
}

std::string failures_json(const std::vector<JobFailure> &fs) {
  json arr = json::array();
  for (const auto &f : fs)
    arr.push_back({{"instance_id", f.instance_id},
                   {"modality", to_string(f.modality)},
                   {"technique", to_string(f.technique)},
                   {"kind", f.kind},
                   {"message", f.message}});
  return arr.dump(1) + "\n";
}

} // namespace

RunResult run_experiment(const ExperimentConfig &cfg, const RunOptions &opt) {
  validate_config(cfg);
  const auto records_path = cfg.output_dir / "records.jsonl";
  if (std::filesystem::exists(records_path) && !opt.resume)
    throw ConfigError(cfg.output_dir.string() + " already holds a run; pass --resume to continue it");
  auto backend = make_backend(cfg.backend);
  if (backend->spends() && !opt.allow_spend)
    throw ConfigError("backend " + backend->id() + " makes paid calls; pass --allow-spend to run it");
  std::optional<TemplateSet> templates;
  if (!cfg.templates_dir.empty())
    templates = TemplateSet::from_directory(cfg.templates_dir);
  std::filesystem::create_directories(cfg.output_dir);

  const auto jobs = plan_jobs(cfg);
  RunResult result;
  std::set<std::string> broken;
  const auto pictures = draw_all(cfg, jobs, result.failures, broken);

  LlmClient client(backend, cfg.cache_dir.empty() ? cfg.output_dir / "cache" : cfg.cache_dir, cfg.max_in_flight);
  PromptOptions popt;
  popt.templates = templates ? &*templates : nullptr;
  popt.style = cfg.style;
  popt.improve_budget = cfg.improve_budget;

  std::vector<std::optional<EvalRecord>> slots(jobs.size());
  std::mutex fail_mu;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job &job = jobs[i];
      const std::string key = job.bench->name + "/" + job.entry->id + "/" + variant_of(job.modality);
      if (has_image(job.modality) && broken.count(key))
        continue; // already listed as a drawing failure
      try {
        const Picture *pic = has_image(job.modality) ? &pictures.at(key) : nullptr;
        const auto bundle = build_prompt(job.instance, job.modality, job.technique, pic ? &pic->drawing : nullptr,
                                         pic ? &pic->png : nullptr, popt);
        auto req = make_chat_request(bundle, cfg.model,
                                     AnswerKey{job.instance.task, job.instance.truth, job.entry->graph.node_count()});
        req.temperature = cfg.temperature;
        req.max_tokens = cfg.max_tokens;
        const auto resp = client.send(req);
        const auto answer = parse_answer(resp.text, job.instance.task);
        const auto score =
            score_answer(job.entry->graph, job.instance.task, job.instance.pair, job.instance.truth, answer);
        EvalRecord r;
        r.instance_id = job.instance.id;
        r.benchmark = job.bench->name;
        r.graph_id = job.entry->id;
        r.task = job.instance.task;
        r.pair = job.instance.pair;
        r.modality = job.modality;
        r.technique = job.technique;
        r.backend = backend->id();
        r.model = cfg.model;
        r.reply = resp.text;
        r.parse_status = answer.status;
        r.alpha = score.alpha;
        r.delta_out = score.delta_out;
        r.delta_true = score.delta_true;
        r.sigma = score.sigma;
        r.input_tokens = resp.input_tokens;
        r.output_tokens = resp.output_tokens;
        r.latency_ms = resp.latency_ms;
        r.cached = resp.cached;
        slots[i] = std::move(r);
      } catch (const std::exception &e) {
        std::lock_guard lock(fail_mu);
        result.failures.push_back({job.instance.id, job.modality, job.technique, error_kind(e), e.what()});
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(jobs.size())));
  for (int w = 0; w < n_workers; ++w)
    pool.emplace_back(work);
  for (auto &t : pool)
    t.join();

  for (auto &s : slots)
    if (s)
      result.records.push_back(std::move(*s));
  std::stable_sort(result.failures.begin(), result.failures.end(), [](const JobFailure &a, const JobFailure &b) {
    return std::tie(a.instance_id, a.modality, a.technique) < std::tie(b.instance_id, b.modality, b.technique);
  });
  result.stats = client.stats();

  write_records(records_path, result.records);
  write_file(cfg.output_dir / "failures.json", failures_json(result.failures));
  if (!result.records.empty())
    result.report_files = emit_report(result.records, cfg.output_dir / "report");
  const json summary{{"experiment", to_string(cfg.experiment)},
                     {"jobs", jobs.size()},
                     {"records", result.records.size()},
                     {"failures", result.failures.size()},
                     {"backend", backend->id()},
                     {"backend_calls", result.stats.backend_calls},
                     {"cache_hits", result.stats.cache_hits}};
  write_file(cfg.output_dir / "run.json", summary.dump(1) + "\n");
  return result;
}

} // namespace vgb
