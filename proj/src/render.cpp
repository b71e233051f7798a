#include "vgb/render.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "vgb/error.hpp"

namespace vgb {

namespace {

// Fraction of the node box half-extent covered by an orthogonal node glyph;
// ports sit at most sqrt(1 + 1/4) box half-extents from the center.
constexpr double kBoxCover = 1.15;
// Neither side of the rendered extent is allowed below this share of the other.
constexpr double kMinAspect = 0.25;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00")
    s = "0.00";
  return s;
}

void check_color(const std::string &c) {
  const bool ok = c.size() == 7 && c[0] == '#' &&
                  std::all_of(c.begin() + 1, c.end(), [](char ch) { return std::isxdigit(static_cast<unsigned char>(ch)); });
  if (!ok)
    throw RenderError("colors must be #rrggbb, got '" + c + "'");
}

struct Frame {
  double scale = 1;           // px per layout unit
  double ox = 0, oy = 0;      // layout coordinates of the content origin
  double pad = 0;             // px
  int width = 0, height = 0;  // px
  double glyph_radius = 0;    // px
  double font = 0;            // px
  double edge_stroke = 0, node_stroke = 0;

  double px(double x) const { return pad + (x - ox) * scale; }
  double py(double y) const { return pad + (y - oy) * scale; }
};

Frame make_frame(const Drawing &d, const RenderStyle &style) {
  if (style.raster_width <= 0)
    throw RenderError("raster_width must be positive");
  if (!(style.node_radius > 0) || !(style.font_size > 0) || style.edge_stroke < 0 ||
      style.node_stroke < 0 || style.padding < 0)
    throw RenderError("invalid render style");
  check_color(style.foreground);
  check_color(style.background);
  if (d.node_count() == 0)
    throw RenderError("nothing to render: drawing has no nodes");
  auto finite = [](Point p) { return std::isfinite(p.x) && std::isfinite(p.y); };
  for (auto p : d.positions)
    if (!finite(p))
      throw RenderError("non-finite node position");
  for (const auto &r : d.routes)
    for (auto p : r)
      if (!finite(p))
        throw RenderError("non-finite route point");

  Frame f;
  const double k = style.raster_width / 1024.0;
  f.font = style.font_size * k;
  if (f.font < style.min_font_size)
    throw RenderError("label font " + fmt(f.font) + "px is below the legibility minimum " +
                      fmt(style.min_font_size) + "px");
  const double base_radius = style.node_radius * k;
  f.edge_stroke = style.edge_stroke * k;
  f.node_stroke = style.node_stroke * k;
  f.pad = base_radius + f.node_stroke + style.padding * k;

  auto box = d.bounding_box();
  const double e = d.paradigm == Paradigm::Orthogonal ? kBoxCover * d.node_half_extent : 0.0;
  double x0 = box.min_x - e, x1 = box.max_x + e, y0 = box.min_y - e, y1 = box.max_y + e;
  double w = x1 - x0, h = y1 - y0;
  if (w <= 0 && h <= 0) {
    x0 -= 0.5, x1 += 0.5, y0 -= 0.5, y1 += 0.5;
    w = h = 1;
  }
  if (w < kMinAspect * h) {
    const double grow = (kMinAspect * h - w) / 2;
    x0 -= grow, x1 += grow, w = x1 - x0;
  } else if (h < kMinAspect * w) {
    const double grow = (kMinAspect * w - h) / 2;
    y0 -= grow, y1 += grow, h = y1 - y0;
  }
  const double content = style.raster_width - 2 * f.pad;
  if (content <= 0)
    throw RenderError("raster_width too small for the node glyphs");
  f.scale = content / w;
  f.ox = x0;
  f.oy = y0;
  f.width = style.raster_width;
  f.height = static_cast<int>(std::lround(h * f.scale + 2 * f.pad));
  f.glyph_radius = std::max(base_radius, e * f.scale);
  return f;
}

// ---- minimal reader for the SVG subset written above --------------------------

struct Element {
  std::string tag;
  std::map<std::string, std::string> attr;
  std::string text;
};

std::vector<Element> parse_svg(std::string_view s) {
  std::vector<Element> out;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string_view::npos) {
    if (s.substr(i, 2) == "<?" || s.substr(i, 2) == "<!" || s.substr(i, 2) == "</") {
      i = s.find('>', i);
      if (i == std::string_view::npos)
        throw RenderError("unterminated SVG markup");
      continue;
    }
    Element el;
    std::size_t j = i + 1;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) != 0))
      el.tag.push_back(s[j++]);
    bool self_closing = false;
    for (;;) {
      while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j])))
        ++j;
      if (j >= s.size())
        throw RenderError("unterminated SVG element <" + el.tag + ">");
      if (s[j] == '/') {
        self_closing = true;
        ++j;
        continue;
      }
      if (s[j] == '>') {
        ++j;
        break;
      }
      const std::size_t eq = s.find('=', j);
      if (eq == std::string_view::npos || eq + 1 >= s.size() || s[eq + 1] != '"')
        throw RenderError("malformed SVG attribute in <" + el.tag + ">");
      const std::size_t close = s.find('"', eq + 2);
      if (close == std::string_view::npos)
        throw RenderError("unterminated SVG attribute in <" + el.tag + ">");
      el.attr.emplace(std::string(s.substr(j, eq - j)), std::string(s.substr(eq + 2, close - eq - 2)));
      j = close + 1;
    }
    if (!self_closing && el.tag == "text") {
      const std::size_t end = s.find('<', j);
      el.text = std::string(s.substr(j, end - j));
      j = end;
    }
    out.push_back(std::move(el));
    i = j;
  }
  if (out.empty() || out.front().tag != "svg")
    throw RenderError("not an SVG document");
  return out;
}

double num(const Element &el, const std::string &key) {
  auto it = el.attr.find(key);
  if (it == el.attr.end())
    throw RenderError("<" + el.tag + "> lacks attribute " + key);
  char *end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || !std::isfinite(v))
    throw RenderError("bad number in <" + el.tag + "> " + key);
  return v;
}

cv::Scalar color(const Element &el, const std::string &key) {
  auto it = el.attr.find(key);
  if (it == el.attr.end() || it->second == "none")
    return cv::Scalar(-1, -1, -1);
  check_color(it->second);
  const auto v = std::strtoul(it->second.c_str() + 1, nullptr, 16);
  return cv::Scalar(v & 0xff, (v >> 8) & 0xff, (v >> 16) & 0xff);
}

bool visible(const cv::Scalar &c) { return c[0] >= 0; }

// Sub-pixel coordinates for OpenCV drawing calls.
constexpr int kShift = 4;
cv::Point fixed(double x, double y) {
  return {static_cast<int>(std::lround(x * (1 << kShift))), static_cast<int>(std::lround(y * (1 << kShift)))};
}

int thickness(double w) { return std::max(1, static_cast<int>(std::lround(w))); }

} // namespace

std::string render_svg(const Drawing &d, const RenderStyle &style) {
  const Frame f = make_frame(d, style);
  check_drawing(d);
  const std::string fg = style.foreground, bg = style.background;
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << f.width
    << "\" height=\"" << f.height << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << f.width << "\" height=\"" << f.height << "\" fill=\""
    << bg << "\"/>\n";
  const std::string stroke = "\" fill=\"none\" stroke=\"" + fg + "\" stroke-width=\"" + fmt(f.edge_stroke) +
                             "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"/>\n";
  for (const auto &r : d.routes) {
    if (r.size() == 2) {
      o << "<line x1=\"" << fmt(f.px(r[0].x)) << "\" y1=\"" << fmt(f.py(r[0].y)) << "\" x2=\""
        << fmt(f.px(r[1].x)) << "\" y2=\"" << fmt(f.py(r[1].y)) << stroke;
    } else {
      o << "<polyline points=\"";
      for (std::size_t i = 0; i < r.size(); ++i)
        o << (i ? " " : "") << fmt(f.px(r[i].x)) << ',' << fmt(f.py(r[i].y));
      o << stroke;
    }
  }
  for (int v = 0; v < d.node_count(); ++v) {
    const auto cx = fmt(f.px(d.positions[v].x)), cy = fmt(f.py(d.positions[v].y));
    o << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << fmt(f.glyph_radius) << "\" fill=\""
      << bg << "\" stroke=\"" << fg << "\" stroke-width=\"" << fmt(f.node_stroke) << "\"/>\n";
    o << "<text x=\"" << cx << "\" y=\"" << cy << "\" font-family=\"DejaVu Sans, Arial, sans-serif\" font-size=\""
      << fmt(f.font) << "\" fill=\"" << fg
      << "\" text-anchor=\"middle\" dominant-baseline=\"central\">" << v << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

SvgSummary inspect_svg(std::string_view svg) {
  SvgSummary s;
  auto els = parse_svg(svg);
  s.width = static_cast<int>(num(els.front(), "width"));
  s.height = static_cast<int>(num(els.front(), "height"));
  for (const auto &el : els) {
    s.circles += el.tag == "circle";
    s.lines += el.tag == "line";
    s.polylines += el.tag == "polyline";
    if (el.tag == "text") {
      ++s.texts;
      s.labels.push_back(el.text);
    }
  }
  return s;
}

Raster rasterize(std::string_view svg, const RenderStyle &style) {
  if (style.raster_width <= 0)
    throw RenderError("raster_width must be positive");
  const auto els = parse_svg(svg);
  const double sw = num(els.front(), "width"), sh = num(els.front(), "height");
  if (!(sw > 0) || !(sh > 0))
    throw RenderError("SVG has no area");
  Raster out;
  out.width = style.raster_width;
  out.height = static_cast<int>(std::lround(out.width * sh / sw));
  if (out.height <= 0)
    throw RenderError("raster height rounds to zero");
  const double k = out.width / sw;

  cv::Mat img(out.height, out.width, CV_8UC3, cv::Scalar(255, 255, 255));
  for (std::size_t i = 1; i < els.size(); ++i) {
    const auto &el = els[i];
    if (el.tag == "rect") {
      const auto fill = color(el, "fill");
      if (visible(fill))
        cv::rectangle(img, cv::Rect2d(num(el, "x") * k, num(el, "y") * k, num(el, "width") * k, num(el, "height") * k),
                      fill, cv::FILLED);
    } else if (el.tag == "line") {
      cv::line(img, fixed(num(el, "x1") * k, num(el, "y1") * k), fixed(num(el, "x2") * k, num(el, "y2") * k),
               color(el, "stroke"), thickness(num(el, "stroke-width") * k), cv::LINE_AA, kShift);
    } else if (el.tag == "polyline") {
      std::vector<cv::Point> pts;
      std::istringstream in(el.attr.at("points"));
      double x = 0, y = 0;
      char comma = 0;
      while (in >> x >> comma >> y)
        pts.push_back(fixed(x * k, y * k));
      if (pts.size() < 2)
        throw RenderError("polyline with fewer than two points");
      cv::polylines(img, pts, false, color(el, "stroke"), thickness(num(el, "stroke-width") * k), cv::LINE_AA,
                    kShift);
    } else if (el.tag == "circle") {
      const auto c = fixed(num(el, "cx") * k, num(el, "cy") * k);
      const int r = static_cast<int>(std::lround(num(el, "r") * k * (1 << kShift)));
      const auto fill = color(el, "fill");
      if (visible(fill))
        cv::circle(img, c, r, fill, cv::FILLED, cv::LINE_AA, kShift);
      const auto stroke = color(el, "stroke");
      if (visible(stroke))
        cv::circle(img, c, r, stroke, thickness(num(el, "stroke-width") * k), cv::LINE_AA, kShift);
    } else if (el.tag == "text") {
      // Hershey glyph height is roughly the cap height; 0.7 em approximates it.
      const double cap = 0.7 * num(el, "font-size") * k;
      const int face = cv::FONT_HERSHEY_SIMPLEX;
      const int weight = std::max(1, static_cast<int>(std::lround(cap / 8)));
      const double scale = cv::getFontScaleFromHeight(face, static_cast<int>(std::lround(cap)), weight);
      int baseline = 0;
      const auto size = cv::getTextSize(el.text, face, scale, weight, &baseline);
      const double x = num(el, "x") * k - size.width / 2.0;
      const double y = num(el, "y") * k + size.height / 2.0;
      cv::putText(img, el.text, cv::Point(static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))), face,
                  scale, color(el, "fill"), weight, cv::LINE_AA);
    }
  }
  if (!cv::imencode(".png", img, out.png))
    throw RenderError("PNG encoding failed");
  return out;
}

std::filesystem::path image_path(const std::filesystem::path &root, std::string_view bench,
                                 std::string_view graph_id, std::string_view variant) {
  return root / std::string(bench) / std::string(graph_id) / (std::string(variant) + ".png");
}

void write_file(const std::filesystem::path &path, std::string_view bytes) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out)
      throw RenderError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
      throw RenderError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

} // namespace vgb
