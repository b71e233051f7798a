#include "vgb/layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <set>

#include <nlohmann/json.hpp>

#include "vgb/error.hpp"
#include "vgb/rng.hpp"

namespace vgb {

std::string_view to_string(Paradigm p) {
  return p == Paradigm::StraightLine ? "straight-line" : "orthogonal";
}

Paradigm parse_paradigm(std::string_view s) {
  if (s == "straight-line" || s == "sl")
    return Paradigm::StraightLine;
  if (s == "orthogonal" || s == "or")
    return Paradigm::Orthogonal;
  throw InputError("unknown paradigm '" + std::string(s) + "'");
}

BoundingBox Drawing::bounding_box() const {
  BoundingBox b;
  bool first = true;
  auto grow = [&](Point p) {
    if (first) {
      b = {p.x, p.y, p.x, p.y};
      first = false;
      return;
    }
    b.min_x = std::min(b.min_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_x = std::max(b.max_x, p.x);
    b.max_y = std::max(b.max_y, p.y);
  };
  for (auto p : positions)
    grow(p);
  for (const auto &r : routes)
    for (auto p : r)
      grow(p);
  return b;
}

void check_drawing(const Drawing &d) {
  if (d.routes.size() != d.edges.size())
    throw LayoutError("route count does not match edge count");
  for (auto p : d.positions)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw LayoutError("non-finite node position");
  std::set<std::pair<double, double>> seen;
  for (auto p : d.positions)
    if (!seen.emplace(p.x, p.y).second)
      throw LayoutError("two nodes share a position");
  for (std::size_t i = 0; i < d.edges.size(); ++i) {
    const auto &r = d.routes[i];
    auto [a, b] = d.edges[i];
    if (a < 0 || b < 0 || a >= d.node_count() || b >= d.node_count())
      throw LayoutError("edge names an unknown node");
    if (r.size() < 2 || r.front() != d.positions[a] || r.back() != d.positions[b])
      throw LayoutError("route " + std::to_string(i) + " does not join its endpoints");
    if (d.paradigm == Paradigm::StraightLine && r.size() != 2)
      throw LayoutError("straight-line route with bends");
    if (d.paradigm == Paradigm::Orthogonal)
      for (std::size_t k = 1; k < r.size(); ++k)
        if (r[k].x != r[k - 1].x && r[k].y != r[k - 1].y)
          throw LayoutError("orthogonal route " + std::to_string(i) + " has a slanted segment");
  }
}

namespace {

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

void straight_routes(Drawing &d) {
  d.routes.clear();
  for (auto [a, b] : d.edges)
    d.routes.push_back({d.positions[a], d.positions[b]});
}

// Separates exactly coincident nodes with a deterministic nudge.
void separate_coincident(std::vector<Point> &pos, double nudge) {
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = i + 1; j < pos.size(); ++j)
      if (pos[i] == pos[j]) {
        const double angle = 2.399963 * static_cast<double>(j); // golden angle
        pos[j].x += nudge * std::cos(angle);
        pos[j].y += nudge * std::sin(angle);
        j = i; // re-check against everything after i
      }
}

} // namespace

Drawing layout_force_directed(const Graph &g, std::uint64_t seed, const ForceDirectedOptions &opt) {
  const int n = g.node_count();
  Drawing d;
  d.paradigm = Paradigm::StraightLine;
  d.edges = g.edges();
  d.positions.assign(n, Point{});
  if (n == 0)
    return d;

  const double k = opt.edge_length;
  const double frame = k * std::sqrt(static_cast<double>(n));
  Rng rng(seed);
  auto &pos = d.positions;
  for (auto &p : pos)
    p = {rng.uniform(0, frame), rng.uniform(0, frame)};

  std::vector<Point> disp(n);
  const double t0 = frame / 10.0;
  const int iters = std::max(opt.iterations, 0);
  for (int it = 0; it < iters; ++it) {
    const double temp = t0 * (1.0 - static_cast<double>(it) / iters) + 1e-3 * k;
    std::fill(disp.begin(), disp.end(), Point{});
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double dx = pos[i].x - pos[j].x, dy = pos[i].y - pos[j].y;
        double len = std::hypot(dx, dy);
        if (len < 1e-9) {
          dx = 1e-3 * k * (1 + i);
          dy = 1e-3 * k * (1 + j);
          len = std::hypot(dx, dy);
        }
        const double f = k * k / len;
        disp[i].x += dx / len * f;
        disp[i].y += dy / len * f;
        disp[j].x -= dx / len * f;
        disp[j].y -= dy / len * f;
      }
    for (auto [a, b] : g.edges()) {
      const double dx = pos[a].x - pos[b].x, dy = pos[a].y - pos[b].y;
      const double len = std::hypot(dx, dy);
      if (len < 1e-9)
        continue;
      const double f = len * len / k;
      disp[a].x -= dx / len * f;
      disp[a].y -= dy / len * f;
      disp[b].x += dx / len * f;
      disp[b].y += dy / len * f;
    }
    for (int v = 0; v < n; ++v) {
      const double len = std::hypot(disp[v].x, disp[v].y);
      if (len > 0) {
        const double step = std::min(len, temp);
        pos[v].x += disp[v].x / len * step;
        pos[v].y += disp[v].y / len * step;
      }
    }
  }
  separate_coincident(pos, 1e-2 * k);
  const auto box = [&] {
    Drawing tmp;
    tmp.positions = pos;
    return tmp.bounding_box();
  }();
  for (auto &p : pos)
    p = {p.x - box.min_x, p.y - box.min_y};
  straight_routes(d);
  return d;
}

// ---- orthogonal router --------------------------------------------------------

namespace {

constexpr int kDx[4] = {1, 0, -1, 0}; // right, down, left, up
constexpr int kDy[4] = {0, 1, 0, -1};

struct Port {
  int x, y;
  int dir;    // outward direction
  int offset; // along the side; non-zero offsets need one bend inside the box
};

class OrthogonalRouter {
public:
  OrthogonalRouter(const Graph &g, std::vector<std::pair<int, int>> centers, int half, int width,
                   int height, int max_bends)
      : g_(g), centers_(std::move(centers)), h_(half), w_(width), hgt_(height),
        max_bends_(max_bends), usage_(static_cast<std::size_t>(width) * height, 0),
        box_owner_(static_cast<std::size_t>(width) * height, -1) {
    for (int v = 0; v < g.node_count(); ++v) {
      auto [cx, cy] = centers_[v];
      for (int y = cy - h_; y <= cy + h_; ++y)
        for (int x = cx - h_; x <= cx + h_; ++x)
          box_owner_[idx(x, y)] = v;
    }
    const int reach = h_ / 2;
    ports_.resize(g.node_count());
    port_used_.resize(g.node_count());
    for (int v = 0; v < g.node_count(); ++v) {
      auto [cx, cy] = centers_[v];
      // Offset 0 first so straight exits are preferred on ties.
      std::vector<int> offsets{0};
      for (int off = 1; off <= reach; ++off) {
        offsets.push_back(off);
        offsets.push_back(-off);
      }
      for (int off : offsets)
        for (int dir = 0; dir < 4; ++dir) {
          const int px = cx + kDx[dir] * h_ + (kDx[dir] == 0 ? off : 0);
          const int py = cy + kDy[dir] * h_ + (kDy[dir] == 0 ? off : 0);
          ports_[v].push_back({px, py, dir, off});
        }
      port_used_[v].assign(ports_[v].size(), 0);
    }
  }

  // Returns false if some edge cannot be routed.
  bool route_all(std::vector<std::vector<Point>> &routes) {
    const auto &edges = g_.edges();
    std::vector<std::size_t> order(edges.size());
    for (std::size_t i = 0; i < order.size(); ++i)
      order[i] = i;
    auto span = [&](std::size_t i) {
      auto [a, b] = edges[i];
      return std::abs(centers_[a].first - centers_[b].first) +
             std::abs(centers_[a].second - centers_[b].second);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return span(l) < span(r); });
    routes.assign(edges.size(), {});
    for (auto i : order)
      if (!route_edge(edges[i].first, edges[i].second, routes[i]))
        return false;
    return true;
  }

private:
  static constexpr std::uint8_t kH = 1, kV = 2;
  static constexpr int kBendCost = 4;
  static constexpr int kCrossCost = 6;

  std::size_t idx(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x);
  }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < w_ && y < hgt_; }
  static std::uint8_t axis(int dir) { return dir % 2 == 0 ? kH : kV; }

  std::size_t state(int x, int y, int dir, int bends) const {
    return (idx(x, y) * 4 + static_cast<std::size_t>(dir)) * static_cast<std::size_t>(max_bends_ + 1) +
           static_cast<std::size_t>(bends);
  }

  int heuristic(int x, int y, int target) const {
    auto [cx, cy] = centers_[target];
    return std::max(0, std::abs(x - cx) - h_) + std::max(0, std::abs(y - cy) - h_);
  }

  bool route_edge(int a, int b, std::vector<Point> &out) {
    struct Item {
      int f, g;
      std::size_t s;
      bool operator>(const Item &o) const { return f != o.f ? f > o.f : s > o.s; }
    };
    const std::size_t nstates = static_cast<std::size_t>(w_) * hgt_ * 4 * (max_bends_ + 1);
    std::vector<int> best(nstates, std::numeric_limits<int>::max());
    std::vector<std::int64_t> parent(nstates, -1);
    std::vector<int> start_port(nstates, -1);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;

    for (std::size_t pi = 0; pi < ports_[a].size(); ++pi) {
      if (port_used_[a][pi])
        continue;
      const auto &p = ports_[a][pi];
      // Stub bends sit inside the node box and are not counted.
      const int bends = 0;
      const int cost = (p.offset != 0) * kBendCost;
      const auto s = state(p.x, p.y, p.dir, bends);
      if (cost < best[s]) {
        best[s] = cost;
        start_port[s] = static_cast<int>(pi);
        open.push({cost + heuristic(p.x, p.y, b), cost, s});
      }
    }

    // Target ports: entered by moving against their outward direction.
    std::vector<int> target_at(static_cast<std::size_t>(w_) * hgt_, -1);
    for (std::size_t pi = 0; pi < ports_[b].size(); ++pi)
      if (!port_used_[b][pi])
        target_at[idx(ports_[b][pi].x, ports_[b][pi].y)] = static_cast<int>(pi);

    std::int64_t found = -1;
    int found_port = -1;
    while (!open.empty()) {
      auto [f, cost, s] = open.top();
      open.pop();
      if (cost != best[s])
        continue;
      const int bends = static_cast<int>(s % (max_bends_ + 1));
      const int dir = static_cast<int>((s / (max_bends_ + 1)) % 4);
      const std::size_t cell = s / (max_bends_ + 1) / 4;
      const int x = static_cast<int>(cell % w_), y = static_cast<int>(cell / w_);

      const int tp = target_at[cell];
      if (tp >= 0 && box_owner_[cell] == b) {
        const auto &p = ports_[b][tp];
        if (dir == (p.dir + 2) % 4) {
          found = static_cast<std::int64_t>(s);
          found_port = tp;
          break;
        }
        continue;
      }
      const bool at_start = parent[s] < 0;
      for (int nd = 0; nd < 4; ++nd) {
        if (nd == (dir + 2) % 4)
          continue;
        const bool turn = nd != dir;
        if (turn && at_start)
          continue; // leave the box straight out of the port
        const int nb = bends + (turn ? 1 : 0);
        if (nb > max_bends_)
          continue;
        if (turn && usage_[cell] != 0)
          continue; // no bends on points other routes use
        if (!at_start && (usage_[cell] & axis(nd)))
          continue;
        const int nx = x + kDx[nd], ny = y + kDy[nd];
        if (!inside(nx, ny))
          continue;
        const auto ncell = idx(nx, ny);
        if (box_owner_[ncell] >= 0 && !(box_owner_[ncell] == b && target_at[ncell] >= 0))
          continue;
        if (usage_[ncell] & axis(nd))
          continue;
        int ncost = cost + 1 + (turn ? kBendCost : 0);
        if (usage_[ncell] != 0)
          ncost += kCrossCost;
        const auto ns = state(nx, ny, nd, nb);
        if (ncost < best[ns]) {
          best[ns] = ncost;
          parent[ns] = static_cast<std::int64_t>(s);
          open.push({ncost + heuristic(nx, ny, b), ncost, ns});
        }
      }
    }
    if (found < 0)
      return false;

    // Walk back to the start port.
    std::vector<std::pair<int, int>> lattice;
    std::int64_t s = found;
    std::int64_t first = found;
    while (s >= 0) {
      const std::size_t cell = static_cast<std::size_t>(s) / (max_bends_ + 1) / 4;
      lattice.emplace_back(static_cast<int>(cell % w_), static_cast<int>(cell / w_));
      first = s;
      s = parent[static_cast<std::size_t>(s)];
    }
    std::reverse(lattice.begin(), lattice.end());
    const int sp = start_port[static_cast<std::size_t>(first)];
    port_used_[a][sp] = 1;
    port_used_[b][found_port] = 1;

    // Usage marks on the outer path. Interior turns block both axes.
    for (std::size_t i = 0; i + 1 < lattice.size(); ++i) {
      auto [x0, y0] = lattice[i];
      auto [x1, y1] = lattice[i + 1];
      const std::uint8_t ax = y0 == y1 ? kH : kV;
      usage_[idx(x0, y0)] |= ax;
      usage_[idx(x1, y1)] |= ax;
    }
    for (std::size_t i = 1; i + 1 < lattice.size(); ++i) {
      auto [x0, y0] = lattice[i - 1];
      auto [x2, y2] = lattice[i + 1];
      if (x0 != x2 && y0 != y2)
        usage_[idx(lattice[i].first, lattice[i].second)] = kH | kV;
    }

    auto stub = [&](int v, const Port &p, bool outward) {
      auto [cx, cy] = centers_[v];
      std::vector<std::pair<int, int>> pts{{cx, cy}};
      if (p.offset != 0)
        pts.emplace_back(kDx[p.dir] == 0 ? p.x : cx, kDy[p.dir] == 0 ? p.y : cy);
      if (!outward)
        std::reverse(pts.begin(), pts.end());
      return pts;
    };
    std::vector<std::pair<int, int>> full = stub(a, ports_[a][sp], true);
    full.insert(full.end(), lattice.begin(), lattice.end());
    auto tail = stub(b, ports_[b][found_port], false);
    full.insert(full.end(), tail.begin(), tail.end());

    // Drop repeated and collinear interior points.
    out.clear();
    for (auto [x, y] : full) {
      Point p{static_cast<double>(x), static_cast<double>(y)};
      if (!out.empty() && out.back() == p)
        continue;
      if (out.size() >= 2) {
        const Point &q = out[out.size() - 2], &r = out.back();
        if ((q.x == r.x && r.x == p.x) || (q.y == r.y && r.y == p.y)) {
          out.back() = p;
          continue;
        }
      }
      out.push_back(p);
    }
    return true;
  }

  const Graph &g_;
  std::vector<std::pair<int, int>> centers_;
  int h_, w_, hgt_, max_bends_;
  std::vector<std::uint8_t> usage_;
  std::vector<int> box_owner_;
  std::vector<std::vector<Port>> ports_;
  std::vector<std::vector<char>> port_used_;
};

// Greedy snapping of continuous positions to distinct cells of a cols x rows
// grid; high-degree nodes choose first.
std::vector<std::pair<int, int>> snap_to_grid(const Graph &g, const std::vector<Point> &pos,
                                              int cols, int rows) {
  const int n = g.node_count();
  Drawing tmp;
  tmp.positions = pos;
  const auto box = tmp.bounding_box();
  const double sx = box.width() > 0 ? (cols - 1) / box.width() : 0;
  const double sy = box.height() > 0 ? (rows - 1) / box.height() : 0;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i)
    order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g.degree(a) > g.degree(b); });
  std::vector<char> taken(static_cast<std::size_t>(cols) * rows, 0);
  std::vector<std::pair<int, int>> cell(n);
  for (int v : order) {
    const double tx = (pos[v].x - box.min_x) * sx, ty = (pos[v].y - box.min_y) * sy;
    double best = std::numeric_limits<double>::max();
    int bi = 0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        if (taken[static_cast<std::size_t>(r) * cols + c])
          continue;
        const double d2 = (c - tx) * (c - tx) + (r - ty) * (r - ty);
        if (d2 < best) {
          best = d2;
          bi = r * cols + c;
        }
      }
    taken[bi] = 1;
    cell[v] = {bi % cols, bi / cols};
  }
  return cell;
}

} // namespace

Drawing layout_orthogonal(const Graph &g, std::uint64_t seed, const OrthogonalOptions &opt) {
  const int n = g.node_count();
  Drawing d;
  d.paradigm = Paradigm::Orthogonal;
  d.edges = g.edges();
  if (n == 0)
    return d;

  ForceDirectedOptions fd;
  fd.iterations = opt.force_iterations;
  const auto seedpos = layout_force_directed(g, seed, fd).positions;

  // Smallest box whose ports (4 sides, 2 * (half / 2) + 1 each) leave slack
  // beyond the highest degree.
  int half = 2;
  while (4 * (2 * (half / 2) + 1) < g.max_degree() + 4)
    ++half;
  int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  int extra = 4;
  for (int round = 0; round < std::max(1, opt.expansion_rounds); ++round) {
    const int cols = grid, rows = grid;
    const auto cells = snap_to_grid(g, seedpos, cols, rows);
    const int spacing = 2 * half + 2 + extra;
    const int margin = half + 3;
    std::vector<std::pair<int, int>> centers(n);
    for (int v = 0; v < n; ++v)
      centers[v] = {margin + spacing * cells[v].first, margin + spacing * cells[v].second};
    const int width = 2 * margin + spacing * (cols - 1) + 1;
    const int height = 2 * margin + spacing * (rows - 1) + 1;

    OrthogonalRouter router(g, centers, half, width, height, opt.max_bends);
    std::vector<std::vector<Point>> routes;
    if (router.route_all(routes)) {
      d.positions.resize(n);
      for (int v = 0; v < n; ++v)
        d.positions[v] = {static_cast<double>(centers[v].first),
                          static_cast<double>(centers[v].second)};
      d.routes = std::move(routes);
      d.node_half_extent = half;
      return d;
    }
    extra += 2;
    if (round % 2 == 1)
      ++grid;
  }
  throw LayoutError("orthogonal routing failed after " + std::to_string(opt.expansion_rounds) +
                    " grid expansions");
}

// ---- quality metrics -----------------------------------------------------------

namespace {

struct Seg {
  Point a, b;
};

double orient(Point a, Point b, Point c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool on_segment(Point p, const Seg &s) {
  return std::min(s.a.x, s.b.x) <= p.x && p.x <= std::max(s.a.x, s.b.x) &&
         std::min(s.a.y, s.b.y) <= p.y && p.y <= std::max(s.a.y, s.b.y);
}

// Intersection of two closed segments: none, a point, or a collinear overlap
// reported by its two extreme points.
struct Meet {
  int kind = 0; // 0 none, 1 point, 2 overlap
  Point p, q;
};

Meet intersect(const Seg &s, const Seg &t) {
  const double d1 = orient(t.a, t.b, s.a), d2 = orient(t.a, t.b, s.b);
  const double d3 = orient(s.a, s.b, t.a), d4 = orient(s.a, s.b, t.b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    const double u = d1 / (d1 - d2);
    return {1, {s.a.x + u * (s.b.x - s.a.x), s.a.y + u * (s.b.y - s.a.y)}, {}};
  }
  if (d1 == 0 && d2 == 0 && d3 == 0 && d4 == 0) {
    // Collinear: overlap along the dominant axis.
    const bool use_x = std::abs(s.b.x - s.a.x) + std::abs(t.b.x - t.a.x) >=
                       std::abs(s.b.y - s.a.y) + std::abs(t.b.y - t.a.y);
    auto key = [&](Point p) { return use_x ? p.x : p.y; };
    Point s0 = s.a, s1 = s.b, t0 = t.a, t1 = t.b;
    if (key(s0) > key(s1))
      std::swap(s0, s1);
    if (key(t0) > key(t1))
      std::swap(t0, t1);
    Point lo = key(s0) >= key(t0) ? s0 : t0;
    Point hi = key(s1) <= key(t1) ? s1 : t1;
    if (key(lo) > key(hi))
      return {};
    if (lo == hi)
      return {1, lo, {}};
    return {2, lo, hi};
  }
  if (d1 == 0 && on_segment(s.a, t))
    return {1, s.a, {}};
  if (d2 == 0 && on_segment(s.b, t))
    return {1, s.b, {}};
  if (d3 == 0 && on_segment(t.a, s))
    return {1, t.a, {}};
  if (d4 == 0 && on_segment(t.b, s))
    return {1, t.b, {}};
  return {};
}

bool in_box(Point p, Point c, double half) {
  return std::abs(p.x - c.x) <= half && std::abs(p.y - c.y) <= half;
}

// Crossings between the routes of edges i and j.
int crossings_between(const Drawing &d, std::size_t i, std::size_t j) {
  auto [a1, b1] = d.edges[i];
  auto [a2, b2] = d.edges[j];
  std::vector<Point> shared;
  for (int u : {a1, b1})
    if (u == a2 || u == b2)
      shared.push_back(d.positions[u]);
  const auto &r = d.routes[i];
  const auto &q = d.routes[j];
  int count = 0;
  for (std::size_t x = 0; x + 1 < r.size(); ++x)
    for (std::size_t y = 0; y + 1 < q.size(); ++y) {
      const auto m = intersect({r[x], r[x + 1]}, {q[y], q[y + 1]});
      if (m.kind == 0)
        continue;
      bool excluded = false;
      for (auto c : shared)
        if (in_box(m.p, c, d.node_half_extent) &&
            (m.kind == 1 || in_box(m.q, c, d.node_half_extent)))
          excluded = true;
      if (!excluded)
        ++count;
    }
  return count;
}

double min_node_distance(const std::vector<Point> &pos) {
  if (pos.size() < 2)
    return 0;
  double best = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = i + 1; j < pos.size(); ++j)
      best = std::min(best, dist(pos[i], pos[j]));
  return best;
}

double angular_resolution(const Drawing &d) {
  std::vector<std::vector<double>> angles(d.node_count());
  for (std::size_t i = 0; i < d.edges.size(); ++i) {
    const auto &r = d.routes[i];
    if (r.size() < 2)
      continue;
    auto [a, b] = d.edges[i];
    Point fa = r[1], fb = r[r.size() - 2];
    angles[a].push_back(std::atan2(fa.y - r.front().y, fa.x - r.front().x));
    angles[b].push_back(std::atan2(fb.y - r.back().y, fb.x - r.back().x));
  }
  double best = 2 * std::numbers::pi;
  for (auto &list : angles) {
    if (list.size() < 2)
      continue;
    std::sort(list.begin(), list.end());
    for (std::size_t k = 0; k < list.size(); ++k) {
      const double next = k + 1 < list.size() ? list[k + 1] : list[0] + 2 * std::numbers::pi;
      best = std::min(best, next - list[k]);
    }
  }
  return best;
}

double route_length(const std::vector<Point> &r) {
  double len = 0;
  for (std::size_t k = 1; k < r.size(); ++k)
    len += dist(r[k - 1], r[k]);
  return len;
}

} // namespace

int count_crossings(const Drawing &d) {
  int total = 0;
  for (std::size_t i = 0; i < d.edges.size(); ++i)
    for (std::size_t j = i + 1; j < d.edges.size(); ++j)
      total += crossings_between(d, i, j);
  return total;
}

QualityReport quality_report(const Drawing &d) {
  check_drawing(d);
  QualityReport q;
  q.crossings = count_crossings(d);
  q.min_node_distance = min_node_distance(d.positions);
  q.angular_resolution = angular_resolution(d);
  if (!d.routes.empty()) {
    double sum = 0, sq = 0;
    for (const auto &r : d.routes) {
      const double len = route_length(r);
      sum += len;
      sq += len * len;
    }
    const double m = static_cast<double>(d.routes.size());
    const double mean = sum / m;
    const double var = std::max(0.0, sq / m - mean * mean);
    q.edge_length_cv = mean > 0 ? std::sqrt(var) / mean : 0;
  }
  return q;
}

// ---- improvement ------------------------------------------------------------------

Drawing improve_drawing(const Drawing &input, int budget, std::uint64_t seed) {
  if (input.paradigm != Paradigm::StraightLine)
    throw InputError("improve_drawing expects a straight-line drawing");
  check_drawing(input);
  Drawing cur = input;
  const int n = cur.node_count();
  if (budget <= 0 || n < 2)
    return cur;

  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t i = 0; i < cur.edges.size(); ++i) {
    incident[cur.edges[i].first].push_back(i);
    incident[cur.edges[i].second].push_back(i);
  }
  auto node_crossings = [&](const Drawing &d, int v) {
    int c = 0;
    for (auto i : incident[v])
      for (std::size_t j = 0; j < d.edges.size(); ++j) {
        if (j == i)
          continue;
        // Pairs with both edges incident to v are seen twice.
        const bool both = d.edges[j].first == v || d.edges[j].second == v;
        if (both && j < i)
          continue;
        c += crossings_between(d, i, j);
      }
    return c;
  };

  int crossings = count_crossings(cur);
  double mind = min_node_distance(cur.positions);
  double angres = angular_resolution(cur);
  const double floor = 0.5 * mind;
  const auto box0 = cur.bounding_box();
  const double pad = 0.1 * std::max(box0.width(), box0.height());
  const BoundingBox box{box0.min_x - pad, box0.min_y - pad, box0.max_x + pad, box0.max_y + pad};
  const double step0 = std::max(box.width(), box.height()) / 4;

  Rng rng(seed);
  Drawing trial = cur;
  for (int it = 0; it < budget; ++it) {
    const int v = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    Point p;
    if (rng.bernoulli(0.25)) {
      p = {rng.uniform(box.min_x, box.max_x), rng.uniform(box.min_y, box.max_y)};
    } else {
      const double radius = step0 * (1.0 - static_cast<double>(it) / budget) + 1e-3 * step0;
      const double ang = rng.uniform(0, 2 * std::numbers::pi);
      const double r = radius * std::sqrt(rng.uniform());
      p = {cur.positions[v].x + r * std::cos(ang), cur.positions[v].y + r * std::sin(ang)};
      p.x = std::clamp(p.x, box.min_x, box.max_x);
      p.y = std::clamp(p.y, box.min_y, box.max_y);
    }
    const int before = node_crossings(cur, v);
    trial.positions[v] = p;
    for (auto i : incident[v])
      trial.routes[i] = {trial.positions[trial.edges[i].first],
                         trial.positions[trial.edges[i].second]};
    const int new_crossings = crossings - before + node_crossings(trial, v);
    double new_mind = 0, new_ang = 0;
    bool accept = false;
    if (new_crossings < crossings) {
      new_mind = min_node_distance(trial.positions);
      accept = new_mind >= floor && new_mind > 0;
    } else if (new_crossings == crossings) {
      new_mind = min_node_distance(trial.positions);
      if (new_mind >= floor && new_mind > mind) {
        accept = true;
      } else if (new_mind == mind) {
        new_ang = angular_resolution(trial);
        accept = new_ang > angres;
      }
    }
    if (accept) {
      crossings = new_crossings;
      mind = new_mind;
      angres = angular_resolution(trial);
      cur.positions[v] = p;
      for (auto i : incident[v])
        cur.routes[i] = trial.routes[i];
    } else {
      trial.positions[v] = cur.positions[v];
      for (auto i : incident[v])
        trial.routes[i] = cur.routes[i];
    }
  }
  return cur;
}

// ---- serialization -------------------------------------------------------------------

std::string drawing_to_json(const Drawing &d) {
  using nlohmann::json;
  json j;
  j["paradigm"] = to_string(d.paradigm);
  j["node_half_extent"] = d.node_half_extent;
  j["edges"] = json::array();
  for (auto [a, b] : d.edges)
    j["edges"].push_back({a, b});
  j["positions"] = json::array();
  for (auto p : d.positions)
    j["positions"].push_back({p.x, p.y});
  j["routes"] = json::array();
  for (const auto &r : d.routes) {
    json jr = json::array();
    for (auto p : r)
      jr.push_back({p.x, p.y});
    j["routes"].push_back(std::move(jr));
  }
  return j.dump() + "\n";
}

Drawing drawing_from_json(std::string_view text) {
  using nlohmann::json;
  try {
    const auto j = json::parse(text);
    Drawing d;
    d.paradigm = parse_paradigm(j.at("paradigm").get<std::string>());
    d.node_half_extent = j.value("node_half_extent", 0.0);
    for (const auto &e : j.at("edges"))
      d.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    for (const auto &p : j.at("positions"))
      d.positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    for (const auto &r : j.at("routes")) {
      std::vector<Point> route;
      for (const auto &p : r)
        route.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      d.routes.push_back(std::move(route));
    }
    check_drawing(d);
    return d;
  } catch (const json::exception &e) {
    throw InputError(std::string("malformed drawing: ") + e.what());
  }
}

} // namespace vgb
