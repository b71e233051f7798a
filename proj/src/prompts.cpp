#include "vgb/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <queue>
#include <regex>
#include <sstream>

#include "vgb/error.hpp"

namespace vgb {

namespace detail {
const std::map<std::string, std::string> &embedded_templates();
}

// ---- enums ---------------------------------------------------------------------

std::string_view to_string(Modality m) {
  switch (m) {
  case Modality::Txt: return "Txt";
  case Modality::SlV: return "SlV";
  case Modality::OrV: return "OrV";
  case Modality::SlM: return "SlM";
  case Modality::OrM: return "OrM";
  case Modality::ISlV: return "I-SlV";
  case Modality::ISlM: return "I-SlM";
  }
  return "?";
}

Modality parse_modality(std::string_view s) {
  for (auto m : kAllModalities)
    if (to_string(m) == s)
      return m;
  throw ConfigError("unknown modality '" + std::string(s) + "'");
}

bool has_image(Modality m) { return m != Modality::Txt; }

bool has_text(Modality m) {
  return m == Modality::Txt || m == Modality::SlM || m == Modality::OrM || m == Modality::ISlM;
}

Paradigm paradigm_of(Modality m) {
  return m == Modality::OrV || m == Modality::OrM ? Paradigm::Orthogonal : Paradigm::StraightLine;
}

bool is_improved(Modality m) { return m == Modality::ISlV || m == Modality::ISlM; }

std::string_view to_string(Style s) {
  switch (s) {
  case Style::Std: return "Std";
  case Style::CoT: return "CoT";
  case Style::SoAL: return "SoAL";
  }
  return "?";
}

std::string_view to_string(Shots s) { return s == Shots::Zero ? "Zero" : "Few"; }

Style parse_style(std::string_view s) {
  for (auto st : {Style::Std, Style::CoT, Style::SoAL})
    if (to_string(st) == s)
      return st;
  throw ConfigError("unknown prompting technique '" + std::string(s) + "'");
}

Shots parse_shots(std::string_view s) {
  if (s == "Zero")
    return Shots::Zero;
  if (s == "Few")
    return Shots::Few;
  throw ConfigError("unknown shot setting '" + std::string(s) + "'");
}

std::string to_string(Technique t) {
  return std::string(to_string(t.style)) + "-" + std::string(to_string(t.shots));
}

Technique parse_technique(std::string_view s) {
  const auto dash = s.find('-');
  if (dash == std::string_view::npos)
    throw ConfigError("technique must look like Std-Zero, got '" + std::string(s) + "'");
  return {parse_style(s.substr(0, dash)), parse_shots(s.substr(dash + 1))};
}

bool is_valid_cell(Modality m, Technique t) { return t.style != Style::SoAL || has_image(m); }

std::string_view to_string(Role r) {
  switch (r) {
  case Role::System: return "system";
  case Role::User: return "user";
  case Role::Assistant: return "assistant";
  }
  return "?";
}

// ---- templates -------------------------------------------------------------------

namespace {

std::string rstrip(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.pop_back();
  return s;
}

} // namespace

const TemplateSet &TemplateSet::embedded() {
  static const TemplateSet set = [] {
    TemplateSet t;
    for (const auto &[name, text] : detail::embedded_templates())
      t.text_[name] = rstrip(text);
    return t;
  }();
  return set;
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path &dir) {
  if (!std::filesystem::is_directory(dir))
    throw ConfigError("template directory not found: " + dir.string());
  TemplateSet t = embedded();
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt")
      continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    t.text_[entry.path().stem().string()] = rstrip(ss.str());
  }
  return t;
}

const std::string &TemplateSet::raw(const std::string &name) const {
  auto it = text_.find(name);
  if (it == text_.end())
    throw ConfigError("missing prompt template '" + name + "'");
  return it->second;
}

std::string TemplateSet::render(const std::string &name, const std::map<std::string, std::string> &vars) const {
  const std::string &src = raw(name);
  std::string out;
  std::size_t i = 0;
  while (i < src.size()) {
    const auto open = src.find("{{", i);
    if (open == std::string::npos) {
      out.append(src, i, std::string::npos);
      break;
    }
    const auto close = src.find("}}", open + 2);
    if (close == std::string::npos)
      throw ConfigError("unterminated placeholder in template '" + name + "'");
    out.append(src, i, open - i);
    const std::string key = src.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it == vars.end())
      throw ConfigError("template '" + name + "' needs a value for {{" + key + "}}");
    out += it->second;
    i = close + 2;
  }
  return out;
}

// ---- helpers -----------------------------------------------------------------------

std::string format_answer_line(std::int64_t value, std::span<const NodeId> nodes) {
  std::string s = "ANSWER value=" + std::to_string(value) + " nodes=[";
  for (std::size_t i = 0; i < nodes.size(); ++i)
    s += (i ? "," : "") + std::to_string(nodes[i]);
  return s + "]";
}

std::string bundle_text(const PromptBundle &b) {
  std::string out;
  for (const auto &s : b.segments)
    if (s.kind == Segment::Kind::Text)
      out += s.text + "\n\n";
  return out;
}

namespace {

std::string list_text(std::span<const NodeId> nodes) {
  if (nodes.empty())
    return "none";
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    s += (i ? ", " : "") + std::to_string(nodes[i]);
  return s;
}

std::string edge_text(NodeId a, NodeId b) { return std::to_string(a) + "-" + std::to_string(b); }

int max_value(Task task, int n) {
  switch (task) {
  case Task::CoNe: return std::max(0, n - 2);
  case Task::ShPa: return std::max(1, n - 1);
  case Task::MaxC: return n;
  case Task::MinVC: return std::max(1, n - 1);
  }
  return n;
}

std::map<std::string, std::string> base_vars(const Graph &g, Task task, std::optional<Edge> pair) {
  std::map<std::string, std::string> v;
  v["last_node"] = std::to_string(g.node_count() - 1);
  v["max_value"] = std::to_string(max_value(task, g.node_count()));
  v["adjacency"] = rstrip(to_adjacency_list(g));
  if (pair) {
    v["u"] = std::to_string(pair->first);
    v["v"] = std::to_string(pair->second);
  }
  return v;
}

std::string task_text(const TemplateSet &t, const Graph &g, Task task, std::optional<Edge> pair,
                      Modality modality) {
  auto vars = base_vars(g, task, pair);
  if (has_image(modality)) {
    const std::string paradigm(to_string(paradigm_of(modality)));
    vars["paradigm"] = paradigm;
    vars["edge_shape"] = t.render("edge_shape_" + paradigm, {});
  }
  const char *kind = !has_image(modality) ? "graph_text" : has_text(modality) ? "graph_mixed" : "graph_image";
  vars["graph_description"] = t.render(kind, vars);
  return t.render("task_" + std::string(to_string(task)), vars);
}

// BFS layers from u up to (and including) the layer holding v.
std::string bfs_layers(const Graph &g, NodeId u, NodeId v) {
  std::vector<int> dist(g.node_count(), -1);
  std::queue<NodeId> q;
  dist[u] = 0;
  q.push(u);
  while (!q.empty()) {
    const NodeId x = q.front();
    q.pop();
    for (NodeId y : g.neighbors(x))
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        q.push(y);
      }
  }
  std::string s;
  for (int d = 1; d <= dist[v]; ++d) {
    std::vector<NodeId> layer;
    for (NodeId x = 0; x < g.node_count(); ++x)
      if (dist[x] == d)
        layer.push_back(x);
    s += (d > 1 ? "; " : "") + std::string("distance ") + std::to_string(d) + ": " + list_text(layer);
  }
  return s;
}

std::string worked_reply(const TemplateSet &t, const Graph &g, Task task, std::optional<Edge> pair,
                         const GroundTruth &truth, Style style) {
  auto vars = base_vars(g, task, pair);
  vars["value"] = std::to_string(truth.value);
  vars["nodes_text"] = list_text(truth.witness);
  const std::string name(to_string(task));
  std::string body;
  if (style == Style::CoT) {
    switch (task) {
    case Task::CoNe:
      vars["u_neighbors"] = list_text(g.neighbors(pair->first));
      vars["v_neighbors"] = list_text(g.neighbors(pair->second));
      break;
    case Task::ShPa:
      vars["layers"] = bfs_layers(g, pair->first, pair->second);
      break;
    case Task::MaxC: {
      const auto &c = truth.witness;
      vars["pair_count"] = std::to_string(c.size() * (c.size() - 1) / 2);
      vars["value_plus_one"] = std::to_string(truth.value + 1);
      std::string blockers;
      for (NodeId x = 0; x < g.node_count(); ++x) {
        if (std::find(c.begin(), c.end(), x) != c.end())
          continue;
        for (NodeId y : c)
          if (!g.has_edge(x, y)) {
            blockers += (blockers.empty() ? "" : "; ") + std::string("node ") + std::to_string(x) +
                        " is not adjacent to node " + std::to_string(y);
            break;
          }
      }
      vars["blockers"] = blockers.empty() ? "there are no other nodes" : blockers;
      break;
    }
    case Task::MinVC: {
      std::string edges;
      for (auto [a, b] : g.edges())
        edges += (edges.empty() ? "" : ", ") + edge_text(a, b);
      vars["edges_text"] = edges;
      vars["value_minus_one"] = std::to_string(truth.value - 1);
      const auto &c = truth.witness;
      std::string wit;
      for (NodeId x : c)
        for (NodeId y : g.neighbors(x))
          if (std::find(c.begin(), c.end(), y) == c.end()) {
            wit += (wit.empty() ? "" : "; ") + std::string("without node ") + std::to_string(x) + ", edge " +
                   edge_text(std::min(x, y), std::max(x, y)) + " is uncovered";
            break;
          }
      vars["witness_edges"] = wit;
      break;
    }
    }
    body = t.render("reasoning_" + name, vars);
  } else {
    body = t.render("solution_" + name, vars);
    if (style == Style::SoAL)
      body = t.render("soal_reply", vars) + "\n\n" + body;
  }
  return body + "\n" + format_answer_line(truth.value, truth.witness);
}

Segment text_segment(Role role, std::string text, std::string tag) {
  Segment s;
  s.role = role;
  s.text = std::move(text);
  s.tag = std::move(tag);
  return s;
}

Segment image_segment(std::vector<std::uint8_t> png, std::string tag) {
  Segment s;
  s.role = Role::User;
  s.kind = Segment::Kind::Image;
  s.png = std::move(png);
  s.tag = std::move(tag);
  return s;
}

// Parts of one question, in order: image, SoAL request, task (graph
// description, adjacency list for text modalities, question), CoT suggestion.
void question_segments(std::vector<Segment> &out, const TemplateSet &t, const Graph &g, Task task,
                       std::optional<Edge> pair, Modality modality, Style style,
                       const std::vector<std::uint8_t> *png, const std::string &scope, const std::string &prefix) {
  auto vars = base_vars(g, task, pair);
  auto tag = [&](const char *part) { return scope.empty() ? std::string(part) : scope + ":" + part; };
  if (has_image(modality))
    out.push_back(image_segment(*png, tag("image")));
  if (style == Style::SoAL)
    out.push_back(text_segment(Role::User, t.render("soal", vars), tag("soal")));
  out.push_back(text_segment(Role::User, prefix + task_text(t, g, task, pair, modality), tag("task")));
  if (style == Style::CoT)
    out.push_back(text_segment(Role::User, t.render("cot_" + std::string(to_string(task)), vars), tag("cot")));
}

const std::regex &code_request_pattern() {
  static const std::regex re(R"(\b(code|coding|program|programs|programming|script|python|implement\w*)\b)",
                             std::regex::icase);
  return re;
}

struct ExemplarSpec {
  Edge cone_pair;
  Edge shpa_pair;
};

const std::vector<ExemplarSpec> &exemplar_specs() {
  static const std::vector<ExemplarSpec> specs{{{0, 3}, {0, 4}}, {{1, 6}, {0, 3}}};
  return specs;
}

} // namespace

void validate_bundle(const PromptBundle &b) {
  auto fail = [&](const std::string &why) { throw ConfigError("invalid prompt bundle " + b.instance_id + ": " + why); };
  if (!is_valid_cell(b.modality, b.technique))
    fail("SoAL requires an image-bearing modality");
  if (b.segments.empty() || b.segments.front().role != Role::System || b.segments.front().tag != "role")
    fail("first segment must be the system role");
  if (b.segments.back().role != Role::User)
    fail("last segment must be a user turn");
  int schema = 0, images = 0, adjacency = 0, soal = 0, replies = 0;
  std::ptrdiff_t soal_at = -1, task_at = -1, schema_at = -1;
  for (std::size_t i = 0; i < b.segments.size(); ++i) {
    const auto &s = b.segments[i];
    if (s.kind == Segment::Kind::Image) {
      ++images;
      if (s.png.empty())
        fail("empty image attachment");
    } else if (std::regex_search(s.text, code_request_pattern())) {
      fail("prompt text asks for code");
    }
    if (s.tag == "schema") {
      ++schema;
      schema_at = static_cast<std::ptrdiff_t>(i);
      if (s.text != b.answer_schema)
        fail("answer_schema does not match the schema segment");
    }
    if (s.tag == "task" && !b.adjacency_list.empty() && s.text.find(b.adjacency_list) != std::string::npos)
      ++adjacency;
    if (s.tag == "soal") {
      ++soal;
      soal_at = static_cast<std::ptrdiff_t>(i);
    }
    if (s.tag == "task")
      task_at = static_cast<std::ptrdiff_t>(i);
    if (s.role == Role::Assistant)
      ++replies;
  }
  if (schema != 1)
    fail("expected exactly one answer-schema instruction, found " + std::to_string(schema));
  if (task_at < 0 || schema_at < task_at)
    fail("the schema must follow the task");
  const int expected_exemplars = b.technique.shots == Shots::Few ? 2 : 0;
  if (b.exemplar_count != expected_exemplars || replies != expected_exemplars)
    fail("expected " + std::to_string(expected_exemplars) + " worked exemplars");
  if (images != (has_image(b.modality) ? 1 + expected_exemplars : 0))
    fail("image count does not match the modality");
  if (has_text(b.modality) != (adjacency == 1))
    fail(has_text(b.modality) ? "the task lacks the adjacency list" : "adjacency list given to an image-only modality");
  if ((b.technique.style == Style::SoAL) != (soal == 1))
    fail("SoAL instruction presence does not match the technique");
  if (soal == 1 && soal_at > task_at)
    fail("SoAL instruction must precede the task");
}

const std::vector<Graph> &exemplar_graphs() {
  static const std::vector<Graph> graphs{
      Graph(5, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}, {3, 4}}),
      Graph(7, {{0, 1}, {0, 5}, {1, 2}, {1, 5}, {2, 3}, {2, 6}, {3, 4}, {4, 5}, {4, 6}, {5, 6}}),
  };
  return graphs;
}

namespace {

Drawing exemplar_drawing(const Graph &g, Modality modality, const PromptOptions &opt) {
  if (paradigm_of(modality) == Paradigm::Orthogonal)
    return layout_orthogonal(g, opt.exemplar_seed);
  auto d = layout_force_directed(g, opt.exemplar_seed);
  if (is_improved(modality))
    d = improve_drawing(d, opt.improve_budget, opt.exemplar_seed);
  return d;
}

std::string style_key(const RenderStyle &s) {
  std::ostringstream o;
  o << s.raster_width << '/' << s.node_radius << '/' << s.font_size << '/' << s.min_font_size << '/'
    << s.edge_stroke << '/' << s.node_stroke << '/' << s.padding << '/' << s.foreground << '/' << s.background;
  return o.str();
}

// Exemplar drawings and images are pure functions of their inputs; cache them
// because every Few prompt needs them.
std::pair<Drawing, std::vector<std::uint8_t>> exemplar_image(std::size_t index, Modality modality,
                                                             const PromptOptions &opt) {
  static std::mutex mu;
  static std::map<std::string, std::pair<Drawing, std::vector<std::uint8_t>>> cache;
  const std::string key = std::to_string(index) + "|" + std::string(to_string(paradigm_of(modality))) + "|" +
                          std::to_string(is_improved(modality)) + "|" + std::to_string(opt.improve_budget) + "|" +
                          std::to_string(opt.exemplar_seed) + "|" + style_key(opt.style);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end())
      return it->second;
  }
  auto d = exemplar_drawing(exemplar_graphs()[index], modality, opt);
  auto png = render_png(d, opt.style).png;
  std::lock_guard lock(mu);
  return cache.emplace(key, std::make_pair(std::move(d), std::move(png))).first->second;
}

} // namespace

std::vector<Exemplar> few_shot_exemplars(Task task, Modality modality, Technique technique,
                                         const PromptOptions &opt) {
  if (!is_valid_cell(modality, technique))
    throw ConfigError("technique " + to_string(technique) + " is not valid for modality " +
                      std::string(to_string(modality)));
  std::vector<Exemplar> out;
  if (technique.shots == Shots::Zero)
    return out;
  const TemplateSet &t = opt.templates ? *opt.templates : TemplateSet::embedded();
  for (std::size_t i = 0; i < exemplar_graphs().size(); ++i) {
    Exemplar e{exemplar_graphs()[i], std::nullopt, {}, std::nullopt, {}, {}};
    if (task == Task::CoNe)
      e.pair = exemplar_specs()[i].cone_pair;
    else if (task == Task::ShPa)
      e.pair = exemplar_specs()[i].shpa_pair;
    e.truth = compute_truth(e.graph, task, e.pair);
    if (has_image(modality)) {
      auto [d, png] = exemplar_image(i, modality, opt);
      e.drawing = std::move(d);
      e.png = std::move(png);
    }
    e.reply = worked_reply(t, e.graph, task, e.pair, e.truth, technique.style);
    out.push_back(std::move(e));
  }
  return out;
}

PromptBundle build_prompt(const TaskInstance &instance, Modality modality, Technique technique,
                          const Drawing *drawing, const std::vector<std::uint8_t> *image,
                          const PromptOptions &opt) {
  if (instance.graph == nullptr)
    throw ConfigError("task instance " + instance.id + " has no graph");
  const Graph &g = *instance.graph;
  if (is_pair_task(instance.task) != instance.pair.has_value())
    throw ConfigError("task instance " + instance.id + " has the wrong number of query nodes");
  if (!is_valid_cell(modality, technique))
    throw ConfigError("technique " + to_string(technique) + " is not valid for modality " +
                      std::string(to_string(modality)));
  if (has_image(modality) != (image != nullptr && !image->empty()))
    throw ConfigError("modality " + std::string(to_string(modality)) +
                      (has_image(modality) ? " needs an image" : " takes no image"));
  if (drawing != nullptr && has_image(modality) && drawing->paradigm != paradigm_of(modality))
    throw ConfigError("drawing paradigm does not match modality " + std::string(to_string(modality)));

  const TemplateSet &t = opt.templates ? *opt.templates : TemplateSet::embedded();
  PromptBundle b;
  b.task = instance.task;
  b.modality = modality;
  b.technique = technique;
  b.instance_id = instance.id;
  if (has_text(modality))
    b.adjacency_list = rstrip(to_adjacency_list(g));

  b.segments.push_back(text_segment(Role::System, t.render("role", {}), "role"));
  const auto exemplars = few_shot_exemplars(instance.task, modality, technique, opt);
  if (!exemplars.empty()) {
    b.segments.push_back(text_segment(Role::User, t.render("exemplars_intro", {}), "exemplars"));
    for (std::size_t i = 0; i < exemplars.size(); ++i) {
      const auto &e = exemplars[i];
      const std::string tag = "exemplar-" + std::to_string(i + 1);
      const std::string header = t.render("example_header", {{"index", std::to_string(i + 1)}}) + "\n\n";
      question_segments(b.segments, t, e.graph, instance.task, e.pair, modality, technique.style, &e.png, tag,
                        header);
      b.segments.push_back(text_segment(Role::Assistant, e.reply, tag + ":reply"));
    }
    b.segments.push_back(text_segment(Role::User, t.render("final_header", {}), "header"));
    b.exemplar_count = static_cast<int>(exemplars.size());
  }
  question_segments(b.segments, t, g, instance.task, instance.pair, modality, technique.style, image, "", "");
  b.answer_schema = t.render("schema_" + std::string(to_string(instance.task)), base_vars(g, instance.task, instance.pair));
  b.segments.push_back(text_segment(Role::User, b.answer_schema, "schema"));
  validate_bundle(b);
  return b;
}

} // namespace vgb
