#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "vgb/benchmarks.hpp"
#include "vgb/error.hpp"
#include "vgb/prompts.hpp"

using namespace vgb;

namespace {

const std::filesystem::path kData = VGB_TEST_DATA_DIR;

TaskInstance make_instance(const Graph &g, Task task, std::optional<Edge> pair, std::string id = "t/g/x") {
  TaskInstance inst;
  inst.id = std::move(id);
  inst.graph_id = "g";
  inst.graph = &g;
  inst.task = task;
  inst.pair = pair;
  inst.truth = compute_truth(g, task, pair);
  return inst;
}

std::string dump(const PromptBundle &b) {
  std::ostringstream o;
  for (const auto &s : b.segments) {
    o << "=== " << to_string(s.role) << " " << s.tag << "\n";
    if (s.kind == Segment::Kind::Image)
      o << "<image>\n";
    else
      o << s.text << "\n";
  }
  return o.str();
}

std::vector<std::string> tags(const PromptBundle &b) {
  std::vector<std::string> out;
  for (const auto &s : b.segments)
    out.push_back(s.tag);
  return out;
}

const std::vector<std::uint8_t> kFakePng{0x89, 'P', 'N', 'G'};

// Last ANSWER line of a reply.
std::pair<long, std::vector<NodeId>> answer_of(const std::string &reply) {
  std::regex re(R"(ANSWER value=(-?\d+) nodes=\[([0-9,]*)\])");
  std::smatch m;
  std::string rest = reply;
  std::pair<long, std::vector<NodeId>> out{-1, {}};
  while (std::regex_search(rest, m, re)) {
    out.first = std::stol(m[1]);
    out.second.clear();
    std::stringstream ss(m[2]);
    for (std::string tok; std::getline(ss, tok, ',');)
      out.second.push_back(std::stoi(tok));
    rest = m.suffix();
  }
  return out;
}

} // namespace

TEST(Prompts, TextOnlyCommonNeighbors) {
  Graph g(6, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {1, 5}});
  auto b = build_prompt(make_instance(g, Task::CoNe, Edge{0, 3}), Modality::Txt, {Style::Std, Shots::Zero},
                        nullptr, nullptr);
  int text_with_all = 0;
  for (const auto &s : b.segments) {
    EXPECT_EQ(s.kind, Segment::Kind::Text);
    if (s.role == Role::User && s.text.find(to_adjacency_list(g).substr(0, 10)) != std::string::npos &&
        s.text.find("node 0") != std::string::npos && s.text.find("node 3") != std::string::npos)
      ++text_with_all;
  }
  EXPECT_EQ(text_with_all, 1);
  EXPECT_NE(bundle_text(b).find(b.adjacency_list), std::string::npos);
  EXPECT_EQ(tags(b), (std::vector<std::string>{"role", "task", "schema"}));
  EXPECT_EQ(b.segments.back().text, b.answer_schema);
  EXPECT_NE(b.answer_schema.find("ANSWER value="), std::string::npos);
}

TEST(Prompts, SoalGoldenSnapshot) {
  Graph g(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 3}});
  auto b = build_prompt(make_instance(g, Task::ShPa, Edge{0, 3}), Modality::SlV, {Style::SoAL, Shots::Zero},
                        nullptr, &kFakePng);
  EXPECT_EQ(tags(b), (std::vector<std::string>{"role", "image", "soal", "task", "schema"}));
  const auto golden = kData / "golden" / "shpa_slv_soal_zero.txt";
  const std::string got = dump(b);
  if (std::getenv("VGB_UPDATE_GOLDEN")) {
    std::ofstream(golden, std::ios::binary) << got;
    GTEST_SKIP() << "golden file rewritten";
  }
  std::ifstream in(golden, std::ios::binary);
  ASSERT_TRUE(in) << golden;
  std::stringstream want;
  want << in.rdbuf();
  EXPECT_EQ(got, want.str());
}

TEST(Prompts, CotFewShotMixedOrthogonal) {
  auto g = generate_planted_clique(10, 4, 0.2, 3);
  auto d = layout_orthogonal(g, 1);
  auto png = render_png(d).png;
  auto b = build_prompt(make_instance(g, Task::MaxC, std::nullopt), Modality::OrM, {Style::CoT, Shots::Few}, &d,
                        &png);
  EXPECT_EQ(b.exemplar_count, 2);
  for (int i = 1; i <= 2; ++i) {
    const std::string p = "exemplar-" + std::to_string(i) + ":";
    int image = 0, task_with_adj = 0, reply = 0, cot = 0;
    for (const auto &s : b.segments) {
      if (s.tag == p + "image")
        image += s.kind == Segment::Kind::Image && !s.png.empty();
      if (s.tag == p + "task")
        task_with_adj += s.text.find("Adjacency list:") != std::string::npos;
      if (s.tag == p + "cot")
        ++cot;
      if (s.tag == p + "reply") {
        EXPECT_EQ(s.role, Role::Assistant);
        EXPECT_GT(std::count(s.text.begin(), s.text.end(), '\n'), 1) << "reasoning steps expected";
        ++reply;
      }
    }
    EXPECT_EQ(image, 1);
    EXPECT_EQ(task_with_adj, 1);
    EXPECT_EQ(cot, 1);
    EXPECT_EQ(reply, 1);
  }
  // The real question comes after both exemplars and ends with the schema.
  auto t = tags(b);
  EXPECT_EQ(t.back(), "schema");
  EXPECT_EQ(t[t.size() - 2], "cot");
  EXPECT_EQ(t[t.size() - 3], "task");
  EXPECT_EQ(t[t.size() - 4], "image");
}

TEST(Prompts, ExemplarAnswersMatchOracles) {
  for (Task task : {Task::CoNe, Task::ShPa, Task::MaxC, Task::MinVC})
    for (Style style : {Style::Std, Style::CoT, Style::SoAL}) {
      auto ex = few_shot_exemplars(task, Modality::SlM, {style, Shots::Few});
      ASSERT_EQ(ex.size(), 2u);
      for (const auto &e : ex) {
        auto [value, nodes] = answer_of(e.reply);
        auto m = oracle::matrix(e.graph);
        switch (task) {
        case Task::CoNe: {
          auto want = oracle::common_neighbors_bruteforce(e.graph, e.pair->first, e.pair->second);
          EXPECT_EQ(value, static_cast<long>(want.size()));
          EXPECT_EQ(std::vector<int>(nodes.begin(), nodes.end()), want);
          break;
        }
        case Task::ShPa: {
          auto dist = oracle::floyd_warshall(e.graph);
          EXPECT_EQ(value, dist[e.pair->first][e.pair->second]);
          ASSERT_EQ(static_cast<long>(nodes.size()), value + 1);
          EXPECT_EQ(nodes.front(), e.pair->first);
          EXPECT_EQ(nodes.back(), e.pair->second);
          for (std::size_t i = 1; i < nodes.size(); ++i)
            EXPECT_TRUE(m[nodes[i - 1]][nodes[i]]);
          break;
        }
        case Task::MaxC:
          EXPECT_EQ(value, oracle::max_clique_bruteforce(e.graph));
          ASSERT_EQ(static_cast<long>(nodes.size()), value);
          for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t j = i + 1; j < nodes.size(); ++j)
              EXPECT_TRUE(m[nodes[i]][nodes[j]]);
          break;
        case Task::MinVC: {
          EXPECT_EQ(value, oracle::min_vertex_cover_bruteforce(e.graph));
          ASSERT_EQ(static_cast<long>(nodes.size()), value);
          std::set<NodeId> c(nodes.begin(), nodes.end());
          for (auto [a, bb] : e.graph.edges())
            EXPECT_TRUE(c.count(a) || c.count(bb));
          break;
        }
        }
      }
    }
}

TEST(Prompts, ExemplarGraphsAreNotBenchmarkGraphs) {
  std::set<std::string> forms;
  for (const auto &g : exemplar_graphs())
    forms.insert(oracle::canonical_form_bruteforce(g));
  ASSERT_EQ(forms.size(), exemplar_graphs().size());
  std::set<int> sizes;
  for (const auto &g : exemplar_graphs())
    sizes.insert(g.node_count());
  for (std::uint64_t seed : {2025ull, 1ull, 7ull})
    for (const char *name : {"Bench-1", "Bench-2", "Bench-3", "Bench-4"})
      for (const auto &e : build_benchmark(name, seed).entries)
        if (sizes.count(e.graph.node_count()))
          EXPECT_EQ(forms.count(oracle::canonical_form_bruteforce(e.graph)), 0u) << name << " " << e.id;
}

TEST(Prompts, ZeroShotHasNoExemplars) {
  EXPECT_TRUE(few_shot_exemplars(Task::MinVC, Modality::SlV, {Style::CoT, Shots::Zero}).empty());
  EXPECT_TRUE(few_shot_exemplars(Task::CoNe, Modality::Txt, {Style::Std, Shots::Zero}).empty());
}

TEST(Prompts, FullMatrixBuildsAndValidates) {
  auto g = generate_gnp_connected(9, 0.35, 4);
  const std::regex code(R"(\b(code|coding|program|programs|programming|script|python|implement\w*)\b)",
                        std::regex::icase);
  int cells = 0;
  for (Task task : {Task::CoNe, Task::ShPa, Task::MaxC, Task::MinVC}) {
    auto inst = sample_instances(g, task, 1, 3).front();
    for (Modality m : kAllModalities) {
      std::optional<Drawing> d;
      std::vector<std::uint8_t> png;
      if (has_image(m)) {
        d = paradigm_of(m) == Paradigm::Orthogonal ? layout_orthogonal(g, 1) : layout_force_directed(g, 1);
        png = render_png(*d).png;
      }
      for (Style s : {Style::Std, Style::CoT, Style::SoAL})
        for (Shots sh : {Shots::Zero, Shots::Few}) {
          Technique t{s, sh};
          if (!is_valid_cell(m, t)) {
            EXPECT_THROW(build_prompt(inst, m, t, d ? &*d : nullptr, d ? &png : nullptr), ConfigError);
            continue;
          }
          auto b = build_prompt(inst, m, t, d ? &*d : nullptr, d ? &png : nullptr);
          EXPECT_NO_THROW(validate_bundle(b));
          EXPECT_FALSE(std::regex_search(bundle_text(b), code)) << to_string(m) << " " << to_string(t);
          ++cells;
        }
    }
  }
  // 4 tasks x (Txt: 4 techniques + 6 image modalities x 6 techniques).
  EXPECT_EQ(cells, 4 * (4 + 6 * 6));
}

TEST(Prompts, MismatchesRaiseConfigError) {
  Graph g(4, {{0, 1}, {1, 2}, {2, 3}});
  auto inst = make_instance(g, Task::ShPa, Edge{0, 3});
  auto d = layout_force_directed(g, 1);
  auto png = render_png(d).png;
  EXPECT_THROW(build_prompt(inst, Modality::SlV, {}, nullptr, nullptr), ConfigError);
  EXPECT_THROW(build_prompt(inst, Modality::Txt, {}, nullptr, &png), ConfigError);
  EXPECT_THROW(build_prompt(inst, Modality::OrV, {}, &d, &png), ConfigError);
  EXPECT_THROW(build_prompt(inst, Modality::Txt, {Style::SoAL, Shots::Zero}, nullptr, nullptr), ConfigError);
  auto bad = inst;
  bad.pair.reset();
  EXPECT_THROW(build_prompt(bad, Modality::Txt, {}, nullptr, nullptr), ConfigError);

  auto b = build_prompt(inst, Modality::SlV, {}, &d, &png);
  auto twice = b;
  twice.segments.push_back(twice.segments.back());
  EXPECT_THROW(validate_bundle(twice), ConfigError);
  auto asks = b;
  asks.segments[2].text += " Write a Python script for it.";
  EXPECT_THROW(validate_bundle(asks), ConfigError);
}

TEST(Prompts, TemplateOverrideDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "vgb_tpl_override";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "role.txt") << "You are a careful graph analyst.\n";
  auto set = TemplateSet::from_directory(dir);
  EXPECT_EQ(set.raw("role"), "You are a careful graph analyst.");
  EXPECT_EQ(set.raw("soal"), TemplateSet::embedded().raw("soal"));
  Graph g(3, {{0, 1}, {1, 2}});
  PromptOptions opt;
  opt.templates = &set;
  auto b = build_prompt(make_instance(g, Task::MinVC, std::nullopt), Modality::Txt, {}, nullptr, nullptr, opt);
  EXPECT_EQ(b.segments.front().text, "You are a careful graph analyst.");

  std::ofstream(dir / "role.txt") << "Hello {{missing}}\n";
  auto broken = TemplateSet::from_directory(dir);
  opt.templates = &broken;
  EXPECT_THROW(build_prompt(make_instance(g, Task::MinVC, std::nullopt), Modality::Txt, {}, nullptr, nullptr, opt),
               ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Prompts, AnswerLineAndNames) {
  std::vector<NodeId> n{0, 4, 7, 9};
  EXPECT_EQ(format_answer_line(3, n), "ANSWER value=3 nodes=[0,4,7,9]");
  EXPECT_EQ(format_answer_line(0, {}), "ANSWER value=0 nodes=[]");
  EXPECT_EQ(parse_modality("I-SlM"), Modality::ISlM);
  EXPECT_EQ(to_string(parse_technique("CoT-Few")), "CoT-Few");
  EXPECT_THROW(parse_technique("CoT-Many"), ConfigError);
  EXPECT_THROW(parse_modality("Img"), ConfigError);
}
