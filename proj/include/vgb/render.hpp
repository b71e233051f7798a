#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vgb/layout.hpp"

namespace vgb {

// Pixel sizes refer to a raster of width 1024 and scale linearly with
// raster_width.
struct RenderStyle {
  int raster_width = 1024;
  double node_radius = 16;
  double font_size = 18;
  double min_font_size = 9;
  double edge_stroke = 2;
  double node_stroke = 2;
  double padding = 12; // clear space between the outermost glyphs and the border
  std::string foreground = "#000000";
  std::string background = "#ffffff";
};

// Counts of drawn primitives, for inspection.
struct SvgSummary {
  int width = 0, height = 0;
  int circles = 0, lines = 0, polylines = 0, texts = 0;
  std::vector<std::string> labels;
};

// SVG 1.1 document: white background, edges first, then one labelled circle
// per node so orthogonal port stubs are hidden under the node glyph. Output
// bytes depend only on the inputs. Throws RenderError for an empty drawing,
// non-finite coordinates or an unusable style.
std::string render_svg(const Drawing &d, const RenderStyle &style = {});

SvgSummary inspect_svg(std::string_view svg);

// Raster of an SVG produced by render_svg. Width is exactly
// style.raster_width; height is round(width * svg_height / svg_width).
struct Raster {
  int width = 0, height = 0;
  std::vector<std::uint8_t> png; // encoded, lossless
};

Raster rasterize(std::string_view svg, const RenderStyle &style = {});

inline Raster render_png(const Drawing &d, const RenderStyle &style = {}) {
  return rasterize(render_svg(d, style), style);
}

// <root>/<bench>/<graph-id>/<variant>.png, variant being a paradigm name or
// an improved-drawing tag.
std::filesystem::path image_path(const std::filesystem::path &root, std::string_view bench,
                                 std::string_view graph_id, std::string_view variant);

void write_file(const std::filesystem::path &path, std::string_view bytes);

} // namespace vgb
