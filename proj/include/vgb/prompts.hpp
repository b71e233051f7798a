#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vgb/benchmarks.hpp"
#include "vgb/layout.hpp"
#include "vgb/render.hpp"

namespace vgb {

enum class Modality { Txt, SlV, OrV, SlM, OrM, ISlV, ISlM };

inline constexpr Modality kAllModalities[] = {Modality::Txt, Modality::SlV,  Modality::OrV, Modality::SlM,
                                              Modality::OrM, Modality::ISlV, Modality::ISlM};

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view s);
bool has_image(Modality m);
bool has_text(Modality m);
// Drawing convention of an image-bearing modality.
Paradigm paradigm_of(Modality m);
// I-SlV and I-SlM use drawings improved by local search.
bool is_improved(Modality m);

enum class Style { Std, CoT, SoAL };
enum class Shots { Zero, Few };

struct Technique {
  Style style = Style::Std;
  Shots shots = Shots::Zero;
  friend bool operator==(const Technique &, const Technique &) = default;
  friend auto operator<=>(const Technique &, const Technique &) = default;
};

std::string_view to_string(Style s);
std::string_view to_string(Shots s);
Style parse_style(std::string_view s);
Shots parse_shots(std::string_view s);
std::string to_string(Technique t); // e.g. "CoT-Few"
Technique parse_technique(std::string_view s);

// True if the (modality, technique) cell is meaningful: SoAL needs an image.
bool is_valid_cell(Modality m, Technique t);

enum class Role { System, User, Assistant };
std::string_view to_string(Role r);

struct Segment {
  enum class Kind { Text, Image };
  Role role = Role::User;
  Kind kind = Kind::Text;
  std::string text;              // Kind::Text
  std::vector<std::uint8_t> png; // Kind::Image
  // What the segment is for: role, image, soal, task, cot, schema,
  // exemplars or header. Parts of a worked example are tagged
  // exemplar-<i>:<part>, its answer exemplar-<i>:reply.
  std::string tag;
};

struct PromptBundle {
  std::vector<Segment> segments;
  std::string answer_schema; // copy of the single schema instruction
  Task task = Task::CoNe;
  Modality modality = Modality::Txt;
  Technique technique;
  std::string instance_id;
  int exemplar_count = 0;
  std::string adjacency_list; // as embedded in the task text; empty for image-only modalities
};

// Throws ConfigError if a structural invariant is broken.
void validate_bundle(const PromptBundle &b);

// Named templates with {{placeholder}} expansion. Trailing whitespace of each
// template is dropped.
class TemplateSet {
public:
  static const TemplateSet &embedded();
  // Files <name>.txt from dir override the embedded set; names absent from
  // dir fall back to it.
  static TemplateSet from_directory(const std::filesystem::path &dir);

  bool contains(const std::string &name) const { return text_.count(name) != 0; }
  const std::string &raw(const std::string &name) const;
  // Throws ConfigError for an unknown template or an unfilled placeholder.
  std::string render(const std::string &name, const std::map<std::string, std::string> &vars) const;

private:
  std::map<std::string, std::string> text_;
};

// One worked example shown before the actual question.
struct Exemplar {
  Graph graph;
  std::optional<Edge> pair;
  GroundTruth truth;
  std::optional<Drawing> drawing;
  std::vector<std::uint8_t> png;
  std::string reply; // assistant turn ending in the ANSWER line
};

struct PromptOptions {
  const TemplateSet *templates = nullptr; // null: embedded set
  RenderStyle style;
  int improve_budget = 500;
  std::uint64_t exemplar_seed = 7;
};

// The two fixed exemplar graphs (5 and 7 nodes).
const std::vector<Graph> &exemplar_graphs();

// Two exemplars for Few techniques, none for Zero. Images use the modality's
// paradigm; answers come from the exact oracles.
std::vector<Exemplar> few_shot_exemplars(Task task, Modality modality, Technique technique,
                                         const PromptOptions &opt = {});

// `image` is the rendered drawing of instance.graph and must be given exactly
// when the modality carries an image; `drawing`, if given, must match the
// modality's paradigm. Throws ConfigError on any mismatch.
PromptBundle build_prompt(const TaskInstance &instance, Modality modality, Technique technique,
                          const Drawing *drawing, const std::vector<std::uint8_t> *image,
                          const PromptOptions &opt = {});

// "ANSWER value=<v> nodes=[a,b,...]"
std::string format_answer_line(std::int64_t value, std::span<const NodeId> nodes);

// Concatenated text of all text segments, for inspection.
std::string bundle_text(const PromptBundle &b);

} // namespace vgb
