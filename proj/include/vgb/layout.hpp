#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vgb/graph.hpp"

namespace vgb {

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point &, const Point &) = default;
};

enum class Paradigm { StraightLine, Orthogonal };

std::string_view to_string(Paradigm p);
Paradigm parse_paradigm(std::string_view s);

struct BoundingBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

// A drawing of a graph. Routes are indexed like Graph::edges(); every route
// starts at its first endpoint's position and ends at the second's.
//
// node_half_extent is the half-width of the square box reserved around each
// node. Orthogonal drawings route edges outside foreign boxes; intersections
// between two edges inside the box of a node they share are not crossings.
struct Drawing {
  Paradigm paradigm = Paradigm::StraightLine;
  std::vector<Edge> edges;
  std::vector<Point> positions;
  std::vector<std::vector<Point>> routes;
  double node_half_extent = 0;

  int node_count() const { return static_cast<int>(positions.size()); }
  BoundingBox bounding_box() const;
};

// Structural invariants (route endpoints, axis-parallel segments for
// orthogonal drawings, distinct node positions). Throws LayoutError.
void check_drawing(const Drawing &d);

struct ForceDirectedOptions {
  int iterations = 500;
  double edge_length = 100.0; // ideal edge length in layout units
};

// Fruchterman-Reingold with linear cooling, seeded initial placement.
Drawing layout_force_directed(const Graph &g, std::uint64_t seed,
                              const ForceDirectedOptions &opt = {});

struct OrthogonalOptions {
  int max_bends = 4;
  int expansion_rounds = 8;
  int force_iterations = 300;
};

// Nodes snapped to distinct cells of a ceil(sqrt n) grid (placement taken from
// a force-directed run), edges routed as axis-parallel polylines on an integer
// lattice. Throws LayoutError if routing still fails after grid expansion.
Drawing layout_orthogonal(const Graph &g, std::uint64_t seed, const OrthogonalOptions &opt = {});

struct QualityReport {
  int crossings = 0;
  double min_node_distance = 0;
  double angular_resolution = 0; // radians
  double edge_length_cv = 0;
};

QualityReport quality_report(const Drawing &d);
int count_crossings(const Drawing &d);

// Hill climbing on node positions. A move is kept only if it lexicographically
// improves (crossings, min node distance, angular resolution) and keeps the
// minimum node distance above half its initial value.
Drawing improve_drawing(const Drawing &d, int budget, std::uint64_t seed);

std::string drawing_to_json(const Drawing &d);
Drawing drawing_from_json(std::string_view text);

} // namespace vgb
