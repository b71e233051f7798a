#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vgb/benchmarks.hpp"
#include "vgb/graph.hpp"
#include "vgb/prompts.hpp"

namespace vgb {

enum class ParseStatus { Ok, Malformed };
std::string_view to_string(ParseStatus s);

struct StructuredAnswer {
  std::int64_t value = 0; // δ
  Witness witness;
  ParseStatus status = ParseStatus::Malformed;
};

// The last line holding "ANSWER value=<int> nodes=[<ints>]" wins; text around
// it is ignored. Anything else yields Malformed.
StructuredAnswer parse_answer(std::string_view text, Task task);

// ---- scorers ----------------------------------------------------------------------
// All return values in [0, 1].

// Jaccard index of the two sets; two empty sets score 1.
double score_cone(std::span<const std::int64_t> answered, std::span<const std::int64_t> truth);
// min(δ/Δ, Δ/δ) · min(σ/Δ, Δ/σ). Δ < 1 (unreachable pair) throws InputError.
double score_shpa(std::int64_t delta_out, int delta_true, int sigma);
// min(δ/Δ, Δ/δ) · min(1, 2σ/(Δ(Δ−1))); for Δ = 1 only the size ratio counts.
double score_maxc(std::int64_t delta_out, int delta_true, int sigma);
// min(δ/Δ, Δ/δ) · (1 − σ_uncovered/m). Requires m ≥ 1.
double score_minvc(std::int64_t delta_out, int delta_true, int sigma_uncovered, int m);

struct Score {
  double alpha = 0;
  std::int64_t delta_out = 0; // δ
  int delta_true = 0;         // Δ
  int sigma = 0;              // validator count; -1 where the task has none
};

// Malformed answers score 0.
Score score_answer(const Graph &g, Task task, std::optional<Edge> pair, const GroundTruth &truth,
                   const StructuredAnswer &answer);

// ---- records ----------------------------------------------------------------------

struct EvalRecord {
  std::string instance_id;
  std::string benchmark;
  std::string graph_id;
  Task task = Task::CoNe;
  std::optional<Edge> pair;
  Modality modality = Modality::Txt;
  Technique technique;
  std::string backend;
  std::string model;
  std::string reply;
  ParseStatus parse_status = ParseStatus::Malformed;
  double alpha = 0;
  std::int64_t delta_out = 0;
  int delta_true = 0;
  int sigma = 0;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double latency_ms = 0;
  bool cached = false;

  std::int64_t total_tokens() const { return input_tokens + output_tokens; }
};

std::string record_to_json(const EvalRecord &r); // one line, no newline
EvalRecord record_from_json(std::string_view line);
void write_records(const std::filesystem::path &path, const std::vector<EvalRecord> &records);
std::vector<EvalRecord> read_records(const std::filesystem::path &path);

// ---- aggregation -------------------------------------------------------------------

struct AggregateRow {
  Task task = Task::CoNe;
  Modality modality = Modality::Txt;
  Technique technique;
  double mean_alpha = 0;
  double mean_total_tokens = 0;
  int n = 0;
  int malformed = 0;
};

// One row per (task, modality, technique, shots), ordered by that key. Within
// a cell, records of one graph are averaged first, so each graph weighs the
// same however many query pairs it contributed. Throws InputError when empty.
std::vector<AggregateRow> aggregate(const std::vector<EvalRecord> &records);

// Rollup of a metric across cells: key is a modality or technique name, task
// is empty for the all-task rollup.
struct RollupRow {
  std::string task;
  std::string key;
  double mean_alpha = 0;
  double mean_total_tokens = 0;
  int n = 0;
};
std::vector<RollupRow> rollup_by_modality(const std::vector<AggregateRow> &rows);
std::vector<RollupRow> rollup_by_technique(const std::vector<AggregateRow> &rows);

inline constexpr const char *kSummaryCsvHeader =
    "task,modality,technique,shots,mean_alpha,mean_total_tokens,n,malformed_count";
std::string summary_csv(const std::vector<AggregateRow> &rows);
// Per task: one row per modality, an accuracy and tokens column per technique.
std::string markdown_tables(const std::vector<AggregateRow> &rows);

// Writes summary.csv, tables.md and plot-data files under dir; returns the
// paths written. Throws InputError when records is empty.
std::vector<std::filesystem::path> emit_report(const std::vector<EvalRecord> &records,
                                               const std::filesystem::path &dir);

} // namespace vgb
