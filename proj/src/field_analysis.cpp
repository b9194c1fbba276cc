#include "tokuq/field_analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace tokuq {

std::string to_string(BoundaryType t) {
  switch (t) {
    case BoundaryType::diverted: return "diverted";
    case BoundaryType::limited: return "limited";
    case BoundaryType::wall_contact: return "wall_contact";
    case BoundaryType::no_confinement: return "no_confinement";
  }
  return "no_confinement";
}

BoundaryType boundary_type_from_string(const std::string& s) {
  for (auto t : {BoundaryType::diverted, BoundaryType::limited, BoundaryType::wall_contact,
                 BoundaryType::no_confinement})
    if (to_string(t) == s) return t;
  throw std::invalid_argument("unknown boundary type '" + s + "'");
}

std::vector<char> inside_limiter_vertices(const TriMesh& m) {
  std::vector<char> in(m.num_vertices(), 0);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    const auto& tris = m.vertex_triangles(static_cast<int>(v));
    in[v] = !tris.empty() && std::all_of(tris.begin(), tris.end(), [&](int t) {
      return m.region(t).kind == RegionKind::inside_limiter;
    });
  }
  return in;
}

std::vector<int> saddle_candidates(const NodalField& f) {
  const TriMesh& m = *f.mesh;
  std::vector<int> out;
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    const int iv = static_cast<int>(v);
    if (m.on_boundary(iv)) continue;
    const auto& tris = m.vertex_triangles(iv);
    if (!std::all_of(tris.begin(), tris.end(), [&](int t) { return inside_vessel(m.region(t)); })) continue;
    const auto& nb = m.neighbors(iv);
    // zero differences are skipped, so they keep the sign before them
    std::vector<int> signs;
    for (int u : nb) {
      const double d = f[v] - f[u];
      if (d != 0.0) signs.push_back(d > 0 ? 1 : -1);
    }
    int changes = 0;
    for (std::size_t k = 0; k < signs.size(); ++k) changes += signs[k] != signs[(k + 1) % signs.size()];
    if (changes >= 4) out.push_back(iv);
  }
  return out;
}

namespace {

Point triangle_gradient(const TriMesh& m, const std::vector<double>& f, int t) {
  const auto& tri = m.triangle(t);
  const Point p0 = m.point(tri[0]), p1 = m.point(tri[1]), p2 = m.point(tri[2]);
  const double a2 = 2.0 * m.area(t);
  const double f0 = f[tri[0]], f1 = f[tri[1]], f2 = f[tri[2]];
  return {(f0 * (p1.y - p2.y) + f1 * (p2.y - p0.y) + f2 * (p0.y - p1.y)) / a2,
          (f0 * (p2.x - p1.x) + f1 * (p0.x - p2.x) + f2 * (p1.x - p0.x)) / a2};
}

}  // namespace

RecoveredGradient recover_gradient(const NodalField& f) {
  const TriMesh& m = *f.mesh;
  std::vector<Point> tg(m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) tg[t] = triangle_gradient(m, f.values, static_cast<int>(t));

  RecoveredGradient out;
  out.grad.resize(m.num_vertices());
  out.fallback.assign(m.num_vertices(), 0);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    const auto& tris = m.vertex_triangles(static_cast<int>(v));
    const Point pv = m.point(static_cast<int>(v));
    bool done = false;
    if (tris.size() >= 3) {
      Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
      Eigen::Vector3d bx = Eigen::Vector3d::Zero(), by = Eigen::Vector3d::Zero();
      double scale = 0.0;
      for (int t : tris) scale = std::max(scale, m.max_edge_length(t));
      for (int t : tris) {
        const Point c = m.centroid(t) - pv;
        const Eigen::Vector3d row(1.0, c.x / scale, c.y / scale);
        ata += row * row.transpose();
        bx += row * tg[t].x;
        by += row * tg[t].y;
      }
      Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
      if (lu.rank() == 3 && lu.rcond() > 1e-10) {
        out.grad[v] = {lu.solve(bx)[0], lu.solve(by)[0]};
        done = true;
      }
    }
    if (!done) {
      double wsum = 0.0;
      Point g{};
      for (int t : tris) {
        const double a = m.area(t);
        g = g + a * tg[t];
        wsum += a;
      }
      out.grad[v] = wsum > 0 ? (1.0 / wsum) * g : Point{};
      out.fallback[v] = 1;
    }
  }
  return out;
}

std::optional<int> select_xpoint(const NodalField& f, const std::vector<int>& candidates,
                                 const RecoveredGradient& grad) {
  const TriMesh& m = *f.mesh;
  std::optional<int> best;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<int> sorted = candidates;
  std::sort(sorted.begin(), sorted.end());
  for (int c : sorted) {
    double sum = std::hypot(grad.grad[c].x, grad.grad[c].y);
    for (int u : m.neighbors(c)) sum += std::hypot(grad.grad[u].x, grad.grad[u].y);
    const double avg = sum / static_cast<double>(m.neighbors(c).size() + 1);
    if (!best || avg < best_val - 1e-14 * std::max(1.0, std::abs(best_val))) {
      best = c;
      best_val = avg;
    }
  }
  return best;
}

AxisResult find_axis(const NodalField& f) {
  const TriMesh& m = *f.mesh;
  const auto inside = inside_limiter_vertices(m);
  AxisResult best, global;
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    if (!inside[v]) continue;
    const int iv = static_cast<int>(v);
    if (global.vertex < 0 || f[v] > global.value) global = {iv, m.point(iv), f[v], true};
    bool local_max = !m.on_boundary(iv);
    for (int u : m.neighbors(iv))
      if (f[v] - f[u] < 0.0) local_max = false;
    // a plateau is not a maximum
    bool flat = true;
    for (int u : m.neighbors(iv))
      if (f[u] != f[v]) flat = false;
    if (local_max && !flat && (best.vertex < 0 || f[v] > best.value)) best = {iv, m.point(iv), f[v], false};
  }
  if (global.vertex < 0) throw MeshError("find_axis: no vertex inside the limiter");
  return best.vertex >= 0 ? best : global;
}

namespace {

// Maximin path values from the axis: the highest level c such that v is
// connected to the axis through vertices with f >= c.
std::vector<double> widest_path(const TriMesh& m, const std::vector<double>& f, int source) {
  std::vector<double> w(m.num_vertices(), -std::numeric_limits<double>::infinity());
  std::vector<char> done(m.num_vertices(), 0);
  using Item = std::pair<double, int>;
  auto cmp = [](const Item& a, const Item& b) { return a.first < b.first || (a.first == b.first && a.second > b.second); };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> heap(cmp);
  w[source] = f[source];
  heap.push({w[source], source});
  while (!heap.empty()) {
    const auto [wv, v] = heap.top();
    heap.pop();
    if (done[v]) continue;
    done[v] = 1;
    for (int u : m.neighbors(v)) {
      const double cand = std::min(wv, f[u]);
      if (!done[u] && cand > w[u]) {
        w[u] = cand;
        heap.push({cand, u});
      }
    }
  }
  return w;
}

struct Sample {
  Point p;
  double reach;
};

std::vector<Sample> structure_reach(const NodalField& f, const ReactorGeometry& g, const std::vector<double>& w) {
  constexpr int kPerSegment = 8;
  std::vector<Sample> out;
  auto add = [&](Point p) {
    const auto loc = f.mesh->locate(p);
    if (!loc) return;
    const auto& tri = f.mesh->triangle(loc->triangle);
    const double wmax = std::max({w[tri[0]], w[tri[1]], w[tri[2]]});
    out.push_back({p, std::min(f.at(*loc), wmax)});
  };
  auto sample_poly = [&](const Polyline& poly, bool closed) {
    const std::size_t n = poly.size();
    const std::size_t segs = closed ? n : n - 1;
    for (std::size_t i = 0; i < segs; ++i) {
      const Point a = poly[i], b = poly[(i + 1) % n];
      for (int k = 0; k < kPerSegment; ++k) add(a + (static_cast<double>(k) / kPerSegment) * (b - a));
    }
    if (!closed && n > 0) add(poly.back());
  };
  if (g.limiter.size() >= 3) {
    sample_poly(g.limiter, true);
    // vertices on the limiter interface, where the piecewise linear maximum sits
    const TriMesh& m = *f.mesh;
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
      bool in = false, out_side = false;
      for (int t : m.vertex_triangles(static_cast<int>(v))) (m.region(t).kind == RegionKind::inside_limiter ? in : out_side) = true;
      if (in && out_side) out.push_back({m.point(static_cast<int>(v)), std::min(f[v], w[v])});
    }
  }
  for (const auto& d : g.divertor)
    if (d.size() >= 2) sample_poly(d, false);
  return out;
}

double loop_area(const std::vector<Point>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) a += cross(pts[i], pts[i + 1]);
  return 0.5 * std::abs(a);
}

}  // namespace

BoundaryAnalysis classify_boundary(const NodalField& f, const ReactorGeometry& g) {
  const TriMesh& m = *f.mesh;
  BoundaryAnalysis out;
  out.axis = find_axis(f);
  out.core_level = widest_path(m, f.values, out.axis.vertex);
  const auto& w = out.core_level;

  const auto samples = structure_reach(f, g, w);
  out.psi_limiter = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples)
    if (s.reach > out.psi_limiter) {
      out.psi_limiter = s.reach;
      out.touch = s.p;
    }

  if (samples.empty()) {
    out.message = "no structure to limit the plasma";
    return out;
  }

  // A saddle sitting exactly at the bottleneck level is where the core first
  // opens up: the separatrix closes before any structure is reached.
  const auto inside = inside_limiter_vertices(m);
  std::vector<int> bottleneck, below;
  for (int c : saddle_candidates(f)) {
    if (!inside[c] || !(f[c] < out.axis.value) || w[c] != f[c]) continue;
    if (f[c] == out.psi_limiter) bottleneck.push_back(c);
    else if (f[c] < out.psi_limiter) below.push_back(c);
  }
  out.psi_bd = out.psi_limiter;
  if (!bottleneck.empty()) {
    out.kind = BoundaryType::diverted;
    out.xpoint = select_xpoint(f, bottleneck, recover_gradient(f));
  } else if (!below.empty()) {
    out.kind = BoundaryType::wall_contact;
    out.xpoint = select_xpoint(f, below, recover_gradient(f));
  } else {
    out.kind = BoundaryType::limited;
  }
  if (out.xpoint) out.psi_x = f[*out.xpoint];

  if (!(out.psi_bd < out.axis.value)) {
    out.kind = BoundaryType::no_confinement;
    out.message = "boundary level not below the magnetic axis value";
    return out;
  }

  const std::vector<Point> axis_pt{out.axis.point};
  double best_area = std::numeric_limits<double>::infinity();
  for (auto& line : extract_contour(f, out.psi_bd)) {
    if (!line.closed || line.points.size() < 4) continue;
    if (!point_in_polygon(line.points, out.axis.point)) continue;
    const double a = loop_area(line.points);
    if (a < best_area) {
      best_area = a;
      out.boundary.points = std::move(line.points);
    }
  }
  if (out.boundary.points.empty()) {
    out.message = "no closed flux surface around the magnetic axis at the boundary level";
    out.kind = BoundaryType::no_confinement;
    return out;
  }
  out.boundary.psi_level = out.psi_bd;
  out.boundary.kind = out.kind;
  return out;
}

std::vector<char> core_triangles(const TriMesh& m, const BoundaryAnalysis& b) {
  std::vector<char> out(m.num_triangles(), 0);
  if (b.kind == BoundaryType::no_confinement) return out;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (m.region(static_cast<int>(t)).kind != RegionKind::inside_limiter) continue;
    const auto& tri = m.triangle(static_cast<int>(t));
    out[t] = b.core_level[tri[0]] > b.psi_bd && b.core_level[tri[1]] > b.psi_bd && b.core_level[tri[2]] > b.psi_bd;
  }
  return out;
}

namespace {

std::optional<Point> first_crossing(const std::vector<Point>& pts, std::size_t start, int dir,
                                    const std::vector<Polyline>& divertor) {
  const auto n = static_cast<long>(pts.size());
  for (long i = static_cast<long>(start); i + dir >= 0 && i + dir < n; i += dir) {
    const Point a = pts[i], b = pts[i + dir];
    double best_t = std::numeric_limits<double>::infinity();
    for (const auto& plate : divertor)
      for (std::size_t k = 0; k + 1 < plate.size(); ++k) {
        double t;
        if (segment_intersection(a, b, plate[k], plate[k + 1], t) && t < best_t) best_t = t;
      }
    if (best_t <= 1.0) return a + best_t * (b - a);
  }
  return std::nullopt;
}

}  // namespace

std::vector<Point> strike_points(const NodalField& f, double psi_bd, const std::vector<Polyline>& divertor,
                                 std::optional<Point> xpoint) {
  std::vector<Point> out;
  const auto lines = extract_contour(f, psi_bd);
  if (xpoint) {
    // the legs are the lines through the x-point vertex other than the core loop,
    // so each passes within one edge of it
    double h = 0.0;
    if (auto loc = f.mesh->locate(*xpoint)) {
      for (int v : f.mesh->triangle(loc->triangle))
        for (int t : f.mesh->vertex_triangles(v)) h = std::max(h, f.mesh->max_edge_length(t));
    }
    for (const auto& line : lines) {
      std::size_t near = 0;
      double dmin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < line.points.size(); ++i) {
        const double d = distance(line.points[i], *xpoint);
        if (d < dmin) {
          dmin = d;
          near = i;
        }
      }
      if (dmin > h) continue;
      for (int dir : {1, -1}) {
        std::vector<Point> pts = line.points;
        std::size_t start = near;
        if (line.closed) {
          // unroll the loop so the walk starts at the x-point and covers it once
          pts.clear();
          const std::size_t n = line.points.size() - 1;
          for (std::size_t k = 0; k <= n; ++k) pts.push_back(line.points[(near + k) % n]);
          start = dir > 0 ? 0 : n;
        }
        if (auto p = first_crossing(pts, start, dir, divertor)) out.push_back(*p);
      }
    }
  } else {
    for (const auto& line : lines) {
      if (line.closed) continue;
      for (std::size_t i = 0; i + 1 < line.points.size(); ++i)
        for (const auto& plate : divertor)
          for (std::size_t k = 0; k + 1 < plate.size(); ++k) {
            double t;
            if (segment_intersection(line.points[i], line.points[i + 1], plate[k], plate[k + 1], t))
              out.push_back(line.points[i] + t * (line.points[i + 1] - line.points[i]));
          }
    }
  }
  std::sort(out.begin(), out.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  out.erase(std::unique(out.begin(), out.end(), [](Point a, Point b) { return distance(a, b) < 1e-12; }), out.end());
  return out;
}

ShapingParams shaping(const std::vector<Point>& boundary) {
  std::vector<Point> pts = boundary;
  if (pts.size() >= 2 && pts.front() == pts.back()) pts.pop_back();
  if (pts.size() < 3 || !(polygon_area(pts) != 0.0)) throw std::invalid_argument("shaping: degenerate boundary");
  double xmin = pts[0].x, xmax = pts[0].x, ymin = pts[0].y, ymax = pts[0].y;
  for (const Point& p : pts) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  auto x_at = [&](double y) {
    double s = 0.0;
    int n = 0;
    for (const Point& p : pts)
      if (p.y == y) {
        s += p.x;
        ++n;
      }
    return s / n;
  };
  ShapingParams s;
  s.r_geo = 0.5 * (xmax + xmin);
  s.a_minor = 0.5 * (xmax - xmin);
  if (!(s.a_minor > 0.0)) throw std::invalid_argument("shaping: degenerate boundary");
  s.eps = s.a_minor / s.r_geo;
  s.kappa_e = (ymax - ymin) / (2.0 * s.a_minor);
  s.delta_u = (s.r_geo - x_at(ymax)) / s.a_minor;
  s.delta_l = (s.r_geo - x_at(ymin)) / s.a_minor;
  return s;
}

FieldFeatures analyze_field(const NodalField& f, const ReactorGeometry& g) {
  FieldFeatures out;
  const BoundaryAnalysis b = classify_boundary(f, g);
  out.kind = b.kind;
  out.psi_ma = b.axis.value;
  out.psi_bd = b.psi_bd;
  out.axis = b.axis.point;
  if (b.xpoint) out.xpoint = f.mesh->point(*b.xpoint);
  if (b.kind == BoundaryType::no_confinement) return out;
  out.boundary = b.boundary;
  if (b.kind == BoundaryType::wall_contact) out.contact = b.touch;
  if (b.kind == BoundaryType::diverted) out.strike = strike_points(f, b.psi_bd, g.divertor, out.xpoint);
  out.shape = shaping(b.boundary.points);
  return out;
}

}  // namespace tokuq
