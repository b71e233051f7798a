#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "vgb/error.hpp"
#include "vgb/eval.hpp"

using namespace vgb;

namespace {

constexpr double kTol = 1e-12;

std::vector<std::int64_t> ids(std::initializer_list<std::int64_t> v) { return v; }

EvalRecord record(Task task, Modality m, Technique t, std::string graph, double alpha, std::int64_t tokens,
                  bool malformed = false) {
  EvalRecord r;
  r.instance_id = "B/" + graph + "/" + std::string(to_string(task));
  r.benchmark = "B";
  r.graph_id = std::move(graph);
  r.task = task;
  r.modality = m;
  r.technique = t;
  r.alpha = alpha;
  r.input_tokens = tokens;
  r.parse_status = malformed ? ParseStatus::Malformed : ParseStatus::Ok;
  return r;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

TEST(ParseAnswer, Examples) {
  auto a = parse_answer("Let me think.\nThe clique is big.\nANSWER value=3 nodes=[0,4,7,9]\n", Task::MaxC);
  ASSERT_EQ(a.status, ParseStatus::Ok);
  EXPECT_EQ(a.value, 3);
  EXPECT_EQ(a.witness.nodes, ids({0, 4, 7, 9}));
  EXPECT_EQ(a.witness.kind, WitnessKind::Clique);

  EXPECT_EQ(parse_answer("I think the answer is 3.", Task::MaxC).status, ParseStatus::Malformed);
  EXPECT_EQ(parse_answer("", Task::CoNe).status, ParseStatus::Malformed);

  auto two = parse_answer("ANSWER value=1 nodes=[2]\nwait, no\nANSWER value=2 nodes=[5, 6]", Task::CoNe);
  EXPECT_EQ(two.value, 2);
  EXPECT_EQ(two.witness.nodes, ids({5, 6}));

  auto inline_two = parse_answer("x ANSWER value=1 nodes=[2] then ANSWER value=4 nodes=[]", Task::CoNe);
  EXPECT_EQ(inline_two.value, 4);
  EXPECT_TRUE(inline_two.witness.nodes.empty());
}

TEST(ParseAnswer, ToleratesDecorationRejectsGarbage) {
  auto a = parse_answer("**ANSWER value = 2 nodes = [ 1 , 3 ]**", Task::ShPa);
  EXPECT_EQ(a.status, ParseStatus::Ok);
  EXPECT_EQ(a.witness.nodes, ids({1, 3}));
  EXPECT_EQ(a.witness.kind, WitnessKind::Path);
  // Hallucinated IDs are kept; the validators deal with them.
  EXPECT_EQ(parse_answer("ANSWER value=2 nodes=[99,100]", Task::MinVC).witness.nodes, ids({99, 100}));
  EXPECT_EQ(parse_answer("ANSWER value=2 nodes=[a,b]", Task::MinVC).status, ParseStatus::Malformed);
  EXPECT_EQ(parse_answer("ANSWER value=-2 nodes=[1]", Task::MinVC).status, ParseStatus::Malformed);
  EXPECT_EQ(parse_answer("ANSWER value=2 nodes=[1,,2]", Task::MinVC).status, ParseStatus::Malformed);
  EXPECT_EQ(parse_answer("ANSWER value=99999999999999999999 nodes=[1]", Task::MinVC).status,
            ParseStatus::Malformed);
}

TEST(Scorers, CommonNeighborsJaccard) {
  EXPECT_NEAR(score_cone(ids({1, 2, 3}), ids({1, 2, 3})), 1.0, kTol);
  EXPECT_NEAR(score_cone(ids({1}), ids({2})), 0.0, kTol);
  EXPECT_NEAR(score_cone(ids({1, 2, 3}), ids({2, 3, 4})), 0.5, kTol);
  EXPECT_NEAR(score_cone({}, {}), 1.0, kTol);
  EXPECT_NEAR(score_cone(ids({1, 1, 2}), ids({1, 2})), 1.0, kTol);
  for (auto [a, b] : {std::pair{ids({1, 5}), ids({5, 7, 9})}, std::pair{ids({}), ids({3})}})
    EXPECT_EQ(score_cone(a, b), score_cone(b, a));
}

TEST(Scorers, ShortestPathWorkedCases) {
  EXPECT_NEAR(score_shpa(4, 4, 4), 1.0, kTol);
  EXPECT_NEAR(score_shpa(4, 4, 2), 0.5, kTol);
  EXPECT_NEAR(score_shpa(8, 4, 4), 0.5, kTol);
  EXPECT_NEAR(score_shpa(0, 4, 4), 0.0, kTol);
  EXPECT_NEAR(score_shpa(4, 4, 0), 0.0, kTol);
  EXPECT_THROW(score_shpa(1, 0, 1), InputError);
}

TEST(Scorers, CliqueWorkedCases) {
  EXPECT_NEAR(score_maxc(5, 5, 10), 1.0, kTol);
  EXPECT_NEAR(score_maxc(5, 5, 5), 0.5, kTol);
  EXPECT_NEAR(score_maxc(6, 5, 15), 5.0 / 6.0, kTol); // edge factor clamped at 1
  EXPECT_NEAR(score_maxc(2, 1, 1), 0.5, kTol);         // size ratio only
  EXPECT_NEAR(score_maxc(1, 1, 0), 1.0, kTol);
  EXPECT_NEAR(score_maxc(0, 3, 0), 0.0, kTol);
}

TEST(Scorers, VertexCoverWorkedCases) {
  EXPECT_NEAR(score_minvc(3, 3, 0, 10), 1.0, kTol);
  EXPECT_NEAR(score_minvc(3, 3, 5, 10), 0.5, kTol);
  EXPECT_NEAR(score_minvc(3, 3, 10, 10), 0.0, kTol);
  EXPECT_NEAR(score_minvc(6, 3, 0, 10), 0.5, kTol);
  EXPECT_THROW(score_minvc(1, 1, 0, 0), InputError);
  EXPECT_THROW(score_minvc(1, 1, 11, 10), InputError);
}

TEST(Scorers, MonotoneInWitnessValidity) {
  for (int d = 2; d <= 8; ++d) {
    double prev_p = -1, prev_c = -1, prev_v = -1;
    for (int s = 0; s <= d * (d - 1) / 2; ++s) {
      const double p = score_shpa(d, d, std::min(s, d));
      const double c = score_maxc(d, d, s);
      EXPECT_GE(p, prev_p);
      EXPECT_GE(c, prev_c);
      prev_p = p;
      prev_c = c;
    }
    for (int covered = 0; covered <= 20; ++covered) {
      const double v = score_minvc(d, d, 20 - covered, 20);
      EXPECT_GE(v, prev_v);
      prev_v = v;
    }
  }
}

TEST(Scorers, InRangeOnRandomInputs) {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const int d = rng.between(1, 10);
    const std::int64_t o = rng.between(0, 20);
    for (double a : {score_shpa(o, d, rng.between(0, 20)), score_maxc(o, d, rng.between(0, 60)),
                     score_minvc(o, d, rng.between(0, 15), 15)}) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
  }
}

TEST(ScoreAnswer, OracleWitnessScoresOneOnEveryBenchmarkGraph) {
  for (const char *name : {"Bench-1", "Bench-2", "Bench-3", "Bench-4"}) {
    const auto m = build_benchmark(name, 2025);
    for (const auto &e : m.entries)
      for (Task task : benchmark_tasks(name))
        for (const auto &inst : entry_instances(m, e, task)) {
          const auto text = format_answer_line(inst.truth.value, inst.truth.witness);
          const auto s = score_answer(e.graph, task, inst.pair, inst.truth, parse_answer(text, task));
          EXPECT_NEAR(s.alpha, 1.0, kTol) << inst.id;
        }
  }
}

TEST(ScoreAnswer, HalfValidWitnesses) {
  // Two of the four claimed steps are real edges.
  Graph path = path_graph(5);
  auto shpa = score_answer(path, Task::ShPa, Edge{0, 4}, compute_truth(path, Task::ShPa, Edge{0, 4}),
                           parse_answer("ANSWER value=4 nodes=[0,1,3,2,4]", Task::ShPa));
  EXPECT_EQ(shpa.sigma, 2);
  EXPECT_NEAR(shpa.alpha, 0.5, kTol);

  // Right-size claim with three of its six pairs real.
  Graph g(6, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {3, 4}, {4, 5}, {0, 4}, {1, 4}});
  const auto truth = compute_truth(g, Task::MaxC);
  ASSERT_EQ(truth.value, 4);
  auto c = score_answer(g, Task::MaxC, std::nullopt, truth, parse_answer("ANSWER value=4 nodes=[2,3,4,5]", Task::MaxC));
  EXPECT_EQ(c.sigma, 3); // 2-3, 3-4, 4-5
  EXPECT_NEAR(c.alpha, 0.5, kTol);

  Graph star = star_graph(4); // 4 edges, cover {0}
  auto v = score_answer(star, Task::MinVC, std::nullopt, compute_truth(star, Task::MinVC),
                        parse_answer("ANSWER value=1 nodes=[1]", Task::MinVC));
  EXPECT_EQ(v.sigma, 3);
  EXPECT_NEAR(v.alpha, 0.25, kTol);
  auto empty = score_answer(star, Task::MinVC, std::nullopt, compute_truth(star, Task::MinVC),
                            parse_answer("ANSWER value=1 nodes=[]", Task::MinVC));
  EXPECT_NEAR(empty.alpha, 0.0, kTol);

  auto bad = score_answer(star, Task::MinVC, std::nullopt, compute_truth(star, Task::MinVC),
                          parse_answer("no idea", Task::MinVC));
  EXPECT_EQ(bad.alpha, 0.0);
}

TEST(Records, JsonLinesRoundTrip) {
  auto r = record(Task::ShPa, Modality::ISlM, {Style::SoAL, Shots::Few}, "g7", 0.75, 1234);
  r.pair = Edge{2, 5};
  r.reply = "multi\nline \"quoted\" reply";
  r.output_tokens = 66;
  r.latency_ms = 12.5;
  r.cached = true;
  r.sigma = 3;
  const auto dir = std::filesystem::temp_directory_path() / "vgb_eval_rt";
  std::filesystem::create_directories(dir);
  write_records(dir / "r.jsonl", {r, record(Task::CoNe, Modality::Txt, {}, "g1", 1, 5)});
  auto back = read_records(dir / "r.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(record_to_json(back[0]), record_to_json(r));
  EXPECT_EQ(back[0].pair, r.pair);
  EXPECT_FALSE(back[1].pair.has_value());
  std::ofstream(dir / "bad.jsonl") << record_to_json(r) << "\n{\"nope\":1}\n";
  try {
    read_records(dir / "bad.jsonl");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::filesystem::remove_all(dir);
}

TEST(Aggregate, KnownMeansWithPerGraphWeighting) {
  const Technique std0{Style::Std, Shots::Zero}, cot1{Style::CoT, Shots::Few};
  std::vector<EvalRecord> rs{
      // Cell A: graph g1 has two pairs (0.2 and 0.6 -> 0.4), g2 one (1.0). Mean 0.7.
      record(Task::ShPa, Modality::SlV, std0, "g1", 0.2, 100),
      record(Task::ShPa, Modality::SlV, std0, "g1", 0.6, 300),
      record(Task::ShPa, Modality::SlV, std0, "g2", 1.0, 50, false),
      // Cell B: single malformed record.
      record(Task::ShPa, Modality::Txt, cot1, "g1", 0.0, 10, true),
      record(Task::MaxC, Modality::OrM, std0, "g3", 1.0, 40),
  };
  auto rows = aggregate(rs);
  ASSERT_EQ(rows.size(), 3u);
  // Ordered by task, then modality, then technique.
  EXPECT_EQ(rows[0].task, Task::ShPa);
  EXPECT_EQ(rows[0].modality, Modality::Txt);
  EXPECT_EQ(rows[0].malformed, 1);
  EXPECT_EQ(rows[0].n, 1);
  EXPECT_EQ(rows[1].modality, Modality::SlV);
  EXPECT_NEAR(rows[1].mean_alpha, 0.7, kTol);
  EXPECT_NEAR(rows[1].mean_total_tokens, (200 + 50) / 2.0, kTol);
  EXPECT_EQ(rows[1].n, 3);
  EXPECT_EQ(rows[2].task, Task::MaxC);

  auto csv = summary_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kSummaryCsvHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3);
  EXPECT_NE(csv.find("ShPa,SlV,Std,Zero,0.700000,125.00,3,0"), std::string::npos);

  auto by_mod = rollup_by_modality(rows);
  auto all_slv = std::find_if(by_mod.begin(), by_mod.end(), [](auto &r) { return r.task.empty() && r.key == "SlV"; });
  ASSERT_NE(all_slv, by_mod.end());
  EXPECT_NEAR(all_slv->mean_alpha, 0.7, kTol);

  EXPECT_THROW(aggregate({}), InputError);
}

TEST(Aggregate, AllPerfectRecordsGiveOne) {
  std::vector<EvalRecord> rs;
  for (auto m : kAllModalities)
    for (int g = 0; g < 3; ++g)
      rs.push_back(record(Task::CoNe, m, {Style::CoT, Shots::Zero}, "g" + std::to_string(g), 1.0, 10));
  for (const auto &r : aggregate(rs))
    EXPECT_EQ(r.mean_alpha, 1.0);
}

TEST(Report, MarkdownShapeAndFiles) {
  std::vector<EvalRecord> rs;
  for (Modality m : {Modality::Txt, Modality::SlV, Modality::OrV, Modality::SlM, Modality::OrM})
    for (Style s : {Style::Std, Style::CoT})
      for (Shots sh : {Shots::Zero, Shots::Few})
        rs.push_back(record(Task::MinVC, m, {s, sh}, "g", 0.5, 100));
  auto md = markdown_tables(aggregate(rs));
  EXPECT_NE(md.find("### MinVC"), std::string::npos);
  EXPECT_NE(md.find("| Modality | Std-Zero Accuracy | Std-Zero Total Tokens | Std-Few Accuracy |"), std::string::npos);
  int rows = 0;
  std::istringstream in(md);
  for (std::string line; std::getline(in, line);)
    rows += line.rfind("| ", 0) == 0 && line.find("Modality") == std::string::npos;
  EXPECT_EQ(rows, 5);

  const auto dir = std::filesystem::temp_directory_path() / "vgb_report";
  std::filesystem::remove_all(dir);
  auto files = emit_report(rs, dir);
  EXPECT_EQ(files.size(), 4u);
  EXPECT_NE(slurp(dir / "plot-data" / "by_modality.csv").find("all,OrM,0.500000,100.00,4"), std::string::npos);
  EXPECT_THROW(emit_report({}, dir), InputError);
  std::filesystem::remove_all(dir);
}
