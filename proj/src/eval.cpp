#include "vgb/eval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vgb/error.hpp"
#include "vgb/render.hpp"

namespace vgb {

using json = nlohmann::json;

std::string_view to_string(ParseStatus s) { return s == ParseStatus::Ok ? "ok" : "malformed"; }

namespace {

WitnessKind witness_kind(Task t) {
  switch (t) {
  case Task::CoNe: return WitnessKind::NodeSet;
  case Task::ShPa: return WitnessKind::Path;
  case Task::MaxC: return WitnessKind::Clique;
  case Task::MinVC: return WitnessKind::Cover;
  }
  return WitnessKind::NodeSet;
}

bool parse_int(std::string_view s, std::int64_t &out) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  if (s.empty())
    return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

double ratio(double a, double b) { return std::min(a / b, b / a); }

} // namespace

StructuredAnswer parse_answer(std::string_view text, Task task) {
  static const std::regex line_re(R"(ANSWER\s*:?\s*value\s*=\s*(\d+)\s*,?\s*nodes\s*=\s*\[([^\]\n]*)\])");
  StructuredAnswer out;
  out.witness.kind = witness_kind(task);
  std::string last_value, last_nodes;
  bool found = false;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    std::smatch m;
    std::string rest = line;
    while (std::regex_search(rest, m, line_re)) {
      found = true;
      last_value = m[1];
      last_nodes = m[2];
      rest = m.suffix();
    }
  }
  if (!found)
    return out;
  if (!parse_int(last_value, out.value))
    return out;
  std::string_view list = last_nodes;
  bool blank = std::all_of(list.begin(), list.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
  if (!blank) {
    std::size_t start = 0;
    while (true) {
      const auto comma = list.find(',', start);
      std::int64_t v = 0;
      if (!parse_int(list.substr(start, comma == std::string_view::npos ? list.npos : comma - start), v)) {
        out.witness.nodes.clear();
        return out;
      }
      out.witness.nodes.push_back(v);
      if (comma == std::string_view::npos)
        break;
      start = comma + 1;
    }
  }
  out.status = ParseStatus::Ok;
  return out;
}

// ---- scorers ----------------------------------------------------------------------

double score_cone(std::span<const std::int64_t> answered, std::span<const std::int64_t> truth) {
  const std::set<std::int64_t> a(answered.begin(), answered.end()), b(truth.begin(), truth.end());
  if (a.empty() && b.empty())
    return 1.0;
  std::size_t common = 0;
  for (auto x : a)
    common += b.count(x);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

double score_shpa(std::int64_t delta_out, int delta_true, int sigma) {
  if (delta_true < 1)
    throw InputError("shortest-path score needs a reachable pair (true length >= 1)");
  if (delta_out <= 0 || sigma <= 0)
    return 0.0;
  const double d = static_cast<double>(delta_true);
  return std::clamp(ratio(static_cast<double>(delta_out), d) * ratio(static_cast<double>(sigma), d), 0.0, 1.0);
}

double score_maxc(std::int64_t delta_out, int delta_true, int sigma) {
  if (delta_true < 1)
    throw InputError("clique score needs a true clique size >= 1");
  if (delta_out <= 0)
    return 0.0;
  const double d = static_cast<double>(delta_true);
  const double size = ratio(static_cast<double>(delta_out), d);
  if (delta_true == 1)
    return std::clamp(size, 0.0, 1.0);
  const double edges = std::min(1.0, 2.0 * std::max(0, sigma) / (d * (d - 1)));
  return std::clamp(size * edges, 0.0, 1.0);
}

double score_minvc(std::int64_t delta_out, int delta_true, int sigma_uncovered, int m) {
  if (m < 1)
    throw InputError("vertex-cover score needs a graph with at least one edge");
  if (delta_true < 1)
    throw InputError("vertex-cover score needs a true cover size >= 1");
  if (sigma_uncovered < 0 || sigma_uncovered > m)
    throw InputError("uncovered edge count outside [0, m]");
  if (delta_out <= 0)
    return 0.0;
  const double size = ratio(static_cast<double>(delta_out), static_cast<double>(delta_true));
  return std::clamp(size * (1.0 - static_cast<double>(sigma_uncovered) / m), 0.0, 1.0);
}

Score score_answer(const Graph &g, Task task, std::optional<Edge> pair, const GroundTruth &truth,
                   const StructuredAnswer &answer) {
  Score s;
  s.delta_true = truth.value;
  s.delta_out = answer.value;
  s.sigma = task == Task::CoNe ? -1 : 0;
  if (task == Task::ShPa && truth.value < 1)
    throw InputError("shortest-path instance without a reachable pair");
  if (answer.status != ParseStatus::Ok)
    return s;
  switch (task) {
  case Task::CoNe: {
    (void)pair;
    const std::vector<std::int64_t> t(truth.witness.begin(), truth.witness.end());
    s.alpha = score_cone(answer.witness.nodes, t);
    break;
  }
  case Task::ShPa:
    s.sigma = validate_path(g, answer.witness);
    s.alpha = score_shpa(answer.value, truth.value, s.sigma);
    break;
  case Task::MaxC:
    s.sigma = validate_clique(g, answer.witness);
    s.alpha = score_maxc(answer.value, truth.value, s.sigma);
    break;
  case Task::MinVC:
    s.sigma = validate_cover(g, answer.witness);
    s.alpha = score_minvc(answer.value, truth.value, s.sigma, g.edge_count());
    break;
  }
  return s;
}

// ---- records ----------------------------------------------------------------------

std::string record_to_json(const EvalRecord &r) {
  json j{{"instance_id", r.instance_id},
         {"benchmark", r.benchmark},
         {"graph_id", r.graph_id},
         {"task", to_string(r.task)},
         {"modality", to_string(r.modality)},
         {"technique", to_string(r.technique.style)},
         {"shots", to_string(r.technique.shots)},
         {"backend", r.backend},
         {"model", r.model},
         {"reply", r.reply},
         {"parse_status", to_string(r.parse_status)},
         {"alpha", r.alpha},
         {"delta_out", r.delta_out},
         {"delta_true", r.delta_true},
         {"sigma", r.sigma},
         {"input_tokens", r.input_tokens},
         {"output_tokens", r.output_tokens},
         {"total_tokens", r.total_tokens()},
         {"latency_ms", r.latency_ms},
         {"cached", r.cached}};
  j["pair"] = r.pair ? json::array({r.pair->first, r.pair->second}) : json();
  return j.dump();
}

EvalRecord record_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    EvalRecord r;
    r.instance_id = j.at("instance_id").get<std::string>();
    r.benchmark = j.at("benchmark").get<std::string>();
    r.graph_id = j.at("graph_id").get<std::string>();
    r.task = parse_task(j.at("task").get<std::string>());
    if (!j.at("pair").is_null())
      r.pair = Edge{j["pair"].at(0).get<NodeId>(), j["pair"].at(1).get<NodeId>()};
    r.modality = parse_modality(j.at("modality").get<std::string>());
    r.technique = {parse_style(j.at("technique").get<std::string>()), parse_shots(j.at("shots").get<std::string>())};
    r.backend = j.at("backend").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.reply = j.at("reply").get<std::string>();
    const auto status = j.at("parse_status").get<std::string>();
    if (status != "ok" && status != "malformed")
      throw InputError("unknown parse_status '" + status + "'");
    r.parse_status = status == "ok" ? ParseStatus::Ok : ParseStatus::Malformed;
    r.alpha = j.at("alpha").get<double>();
    r.delta_out = j.at("delta_out").get<std::int64_t>();
    r.delta_true = j.at("delta_true").get<int>();
    r.sigma = j.at("sigma").get<int>();
    r.input_tokens = j.at("input_tokens").get<std::int64_t>();
    r.output_tokens = j.at("output_tokens").get<std::int64_t>();
    r.latency_ms = j.at("latency_ms").get<double>();
    r.cached = j.at("cached").get<bool>();
    if (!(r.alpha >= 0 && r.alpha <= 1))
      throw InputError("alpha outside [0, 1]");
    return r;
  } catch (const json::exception &e) {
    throw InputError(std::string("bad evaluation record: ") + e.what());
  } catch (const ConfigError &e) {
    throw InputError(std::string("bad evaluation record: ") + e.what());
  }
}

void write_records(const std::filesystem::path &path, const std::vector<EvalRecord> &records) {
  std::string out;
  for (const auto &r : records)
    out += record_to_json(r) + "\n";
  write_file(path, out);
}

std::vector<EvalRecord> read_records(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InputError("cannot read " + path.string());
  std::vector<EvalRecord> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const InputError &e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

// ---- aggregation -------------------------------------------------------------------

namespace {

int modality_rank(Modality m) {
  for (std::size_t i = 0; i < std::size(kAllModalities); ++i)
    if (kAllModalities[i] == m)
      return static_cast<int>(i);
  return 99;
}

using CellKey = std::tuple<Task, int, Technique>;

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

} // namespace

std::vector<AggregateRow> aggregate(const std::vector<EvalRecord> &records) {
  if (records.empty())
    throw InputError("no evaluation records to aggregate");
  struct Acc {
    double alpha = 0, tokens = 0;
    int n = 0;
  };
  std::map<CellKey, std::map<std::string, Acc>> cells;
  std::map<CellKey, std::pair<int, int>> counts; // n, malformed
  for (const auto &r : records) {
    const CellKey key{r.task, modality_rank(r.modality), r.technique};
    auto &acc = cells[key][r.benchmark + "/" + r.graph_id];
    acc.alpha += r.alpha;
    acc.tokens += static_cast<double>(r.total_tokens());
    ++acc.n;
    auto &c = counts[key];
    ++c.first;
    c.second += r.parse_status == ParseStatus::Malformed;
  }
  std::vector<AggregateRow> out;
  for (const auto &[key, graphs] : cells) {
    AggregateRow row;
    row.task = std::get<0>(key);
    row.modality = kAllModalities[std::get<1>(key)];
    row.technique = std::get<2>(key);
    for (const auto &[_, acc] : graphs) {
      row.mean_alpha += acc.alpha / acc.n;
      row.mean_total_tokens += acc.tokens / acc.n;
    }
    row.mean_alpha /= static_cast<double>(graphs.size());
    row.mean_total_tokens /= static_cast<double>(graphs.size());
    row.n = counts[key].first;
    row.malformed = counts[key].second;
    out.push_back(row);
  }
  return out;
}

namespace {

template <class KeyFn>
std::vector<RollupRow> rollup(const std::vector<AggregateRow> &rows, KeyFn key_of, const std::vector<std::string> &order) {
  struct Acc {
    double alpha = 0, tokens = 0;
    int cells = 0, n = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const auto &r : rows)
    for (const std::string &task : {std::string(to_string(r.task)), std::string()}) {
      auto &a = acc[{task, key_of(r)}];
      a.alpha += r.mean_alpha;
      a.tokens += r.mean_total_tokens;
      ++a.cells;
      a.n += r.n;
    }
  std::vector<RollupRow> out;
  for (const auto &[k, a] : acc)
    out.push_back({k.first, k.second, a.alpha / a.cells, a.tokens / a.cells, a.n});
  auto rank = [&](const std::string &key) {
    return std::find(order.begin(), order.end(), key) - order.begin();
  };
  std::stable_sort(out.begin(), out.end(), [&](const RollupRow &a, const RollupRow &b) {
    if (a.task != b.task)
      return a.task.empty() ? false : b.task.empty() ? true : a.task < b.task;
    return rank(a.key) < rank(b.key);
  });
  return out;
}

std::vector<std::string> modality_order() {
  std::vector<std::string> o;
  for (auto m : kAllModalities)
    o.emplace_back(to_string(m));
  return o;
}

std::vector<Technique> all_techniques() {
  std::vector<Technique> o;
  for (Style s : {Style::Std, Style::CoT, Style::SoAL})
    for (Shots sh : {Shots::Zero, Shots::Few})
      o.push_back({s, sh});
  return o;
}

std::vector<std::string> technique_order() {
  std::vector<std::string> o;
  for (auto t : all_techniques())
    o.push_back(to_string(t));
  return o;
}

} // namespace

std::vector<RollupRow> rollup_by_modality(const std::vector<AggregateRow> &rows) {
  return rollup(rows, [](const AggregateRow &r) { return std::string(to_string(r.modality)); }, modality_order());
}

std::vector<RollupRow> rollup_by_technique(const std::vector<AggregateRow> &rows) {
  return rollup(rows, [](const AggregateRow &r) { return to_string(r.technique); }, technique_order());
}

std::string summary_csv(const std::vector<AggregateRow> &rows) {
  std::string out = std::string(kSummaryCsvHeader) + "\n";
  for (const auto &r : rows)
    out += std::string(to_string(r.task)) + "," + std::string(to_string(r.modality)) + "," +
           std::string(to_string(r.technique.style)) + "," + std::string(to_string(r.technique.shots)) + "," +
           fmt(r.mean_alpha) + "," + fmt(r.mean_total_tokens, 2) + "," + std::to_string(r.n) + "," +
           std::to_string(r.malformed) + "\n";
  return out;
}

std::string markdown_tables(const std::vector<AggregateRow> &rows) {
  std::string out;
  for (Task task : {Task::CoNe, Task::ShPa, Task::MaxC, Task::MinVC}) {
    std::vector<const AggregateRow *> mine;
    for (const auto &r : rows)
      if (r.task == task)
        mine.push_back(&r);
    if (mine.empty())
      continue;
    std::vector<Technique> techs;
    std::vector<Modality> mods;
    for (auto t : all_techniques())
      if (std::any_of(mine.begin(), mine.end(), [&](auto *r) { return r->technique == t; }))
        techs.push_back(t);
    for (auto m : kAllModalities)
      if (std::any_of(mine.begin(), mine.end(), [&](auto *r) { return r->modality == m; }))
        mods.push_back(m);

    out += "### " + std::string(to_string(task)) + "\n\n| Modality |";
    for (auto t : techs)
      out += " " + to_string(t) + " Accuracy | " + to_string(t) + " Total Tokens |";
    out += "\n|---|";
    for (std::size_t i = 0; i < techs.size(); ++i)
      out += "---:|---:|";
    out += "\n";
    for (auto m : mods) {
      out += "| " + std::string(to_string(m)) + " |";
      for (auto t : techs) {
        auto it = std::find_if(mine.begin(), mine.end(), [&](auto *r) { return r->modality == m && r->technique == t; });
        if (it == mine.end())
          out += " - | - |";
        else
          out += " " + fmt((*it)->mean_alpha, 2) + " | " + fmt((*it)->mean_total_tokens, 0) + " |";
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const std::vector<EvalRecord> &records,
                                               const std::filesystem::path &dir) {
  const auto rows = aggregate(records);
  std::filesystem::create_directories(dir / "plot-data");
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::filesystem::path &p, const std::string &text) {
    write_file(p, text);
    written.push_back(p);
  };
  put(dir / "summary.csv", summary_csv(rows));
  put(dir / "tables.md", markdown_tables(rows));
  auto rollup_csv = [](const std::vector<RollupRow> &rs, const char *key) {
    std::string s = std::string("task,") + key + ",mean_alpha,mean_total_tokens,n\n";
    for (const auto &r : rs)
      s += (r.task.empty() ? "all" : r.task) + "," + r.key + "," + fmt(r.mean_alpha) + "," +
           fmt(r.mean_total_tokens, 2) + "," + std::to_string(r.n) + "\n";
    return s;
  };
  put(dir / "plot-data" / "by_modality.csv", rollup_csv(rollup_by_modality(rows), "modality"));
  put(dir / "plot-data" / "by_technique.csv", rollup_csv(rollup_by_technique(rows), "technique"));
  return written;
}

} // namespace vgb
