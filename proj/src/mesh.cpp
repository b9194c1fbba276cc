#include "tokuq/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace tokuq {

namespace {

std::array<double, 3> barycentric(Point a, Point b, Point c, Point p) {
  const double det = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  const double l1 = ((b.x - p.x) * (c.y - p.y) - (b.y - p.y) * (c.x - p.x)) / det;
  const double l2 = ((c.x - p.x) * (a.y - p.y) - (c.y - p.y) * (a.x - p.x)) / det;
  return {l1, l2, 1.0 - l1 - l2};
}

constexpr double kBaryTol = 1e-12;

}  // namespace

TriMesh::TriMesh(std::vector<Vertex> vertices, std::vector<Triangle> triangles, std::vector<RegionTag> regions,
                 double gamma_radius)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      regions_(std::move(regions)),
      gamma_radius_(gamma_radius) {
  if (regions_.size() != triangles_.size()) throw MeshError("region tag count differs from triangle count");
  for (const auto& t : triangles_)
    for (int v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) throw MeshError("triangle vertex out of range");
  build_connectivity();
  build_locator();
}

double TriMesh::area(int t) const {
  const auto& tri = triangles_[t];
  const Point a = point(tri[0]), b = point(tri[1]), c = point(tri[2]);
  return 0.5 * cross(b - a, c - a);
}

Point TriMesh::centroid(int t) const {
  const auto& tri = triangles_[t];
  const Point a = point(tri[0]), b = point(tri[1]), c = point(tri[2]);
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

double TriMesh::max_edge_length(int t) const {
  const auto& tri = triangles_[t];
  double h = 0.0;
  for (int k = 0; k < 3; ++k) h = std::max(h, distance(point(tri[k]), point(tri[(k + 1) % 3])));
  return h;
}

double TriMesh::gamma_angle(int v) const {
  const Point p = point(v);
  return std::atan2(p.y, p.x);
}

void TriMesh::build_connectivity() {
  const std::size_t nv = vertices_.size();
  const std::size_t nt = triangles_.size();
  vertex_triangles_.assign(nv, {});
  for (std::size_t t = 0; t < nt; ++t)
    for (int v : triangles_[t]) vertex_triangles_[v].push_back(static_cast<int>(t));

  std::map<Edge, std::pair<int, int>> first;  // edge -> (triangle, local index)
  tri_neighbors_.assign(nt, {-1, -1, -1});
  std::map<Edge, int> count;
  for (std::size_t t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const Edge e = make_edge(triangles_[t][(k + 1) % 3], triangles_[t][(k + 2) % 3]);
      auto [it, inserted] = first.try_emplace(e, static_cast<int>(t), k);
      ++count[e];
      if (!inserted) {
        tri_neighbors_[t][k] = it->second.first;
        tri_neighbors_[it->second.first][it->second.second] = static_cast<int>(t);
      }
    }
  }
  num_edges_ = count.size();

  boundary_vertex_.assign(nv, 0);
  gamma_edges_.clear();
  for (const auto& [e, c] : count) {
    if (c != 1) continue;
    boundary_vertex_[e.a] = boundary_vertex_[e.b] = 1;
    const auto& va = vertices_[e.a];
    const auto& vb = vertices_[e.b];
    if (va.gamma && vb.gamma && !(va.axis && vb.axis)) {
      Edge g = e;
      if (gamma_angle(g.a) > gamma_angle(g.b)) std::swap(g.a, g.b);
      gamma_edges_.push_back(g);
    }
  }
  std::sort(gamma_edges_.begin(), gamma_edges_.end(),
            [&](const Edge& l, const Edge& r) { return gamma_angle(l.a) < gamma_angle(r.a); });
  gamma_vertices_.clear();
  for (const auto& e : gamma_edges_) {
    if (gamma_vertices_.empty() || gamma_vertices_.back() != e.a) gamma_vertices_.push_back(e.a);
    gamma_vertices_.push_back(e.b);
  }

  neighbors_.assign(nv, {});
  for (std::size_t v = 0; v < nv; ++v) {
    auto& nb = neighbors_[v];
    for (int t : vertex_triangles_[v])
      for (int w : triangles_[t])
        if (w != static_cast<int>(v)) nb.push_back(w);
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    const Point c = vertices_[v].p;
    std::sort(nb.begin(), nb.end(), [&](int a, int b) {
      const double ta = std::atan2(vertices_[a].p.y - c.y, vertices_[a].p.x - c.x);
      const double tb = std::atan2(vertices_[b].p.y - c.y, vertices_[b].p.x - c.x);
      return ta < tb || (ta == tb && a < b);
    });
  }
}

void TriMesh::build_locator() {
  buckets_.clear();
  if (triangles_.empty()) return;
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (const auto& v : vertices_) {
    xmin = std::min(xmin, v.p.x);
    xmax = std::max(xmax, v.p.x);
    ymin = std::min(ymin, v.p.y);
    ymax = std::max(ymax, v.p.y);
  }
  const double w = std::max(xmax - xmin, 1e-300), h = std::max(ymax - ymin, 1e-300);
  const double cells = std::max<double>(1.0, static_cast<double>(triangles_.size()) / 2.0);
  grid_h_ = std::sqrt(w * h / cells);
  grid_x0_ = xmin;
  grid_y0_ = ymin;
  grid_nx_ = std::max(1, static_cast<int>(std::ceil(w / grid_h_)));
  grid_ny_ = std::max(1, static_cast<int>(std::ceil(h / grid_h_)));
  buckets_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, {});
  auto cell = [&](double v, double v0, int n) {
    return std::clamp(static_cast<int>(std::floor((v - v0) / grid_h_)), 0, n - 1);
  };
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    double bx0 = std::numeric_limits<double>::infinity(), by0 = bx0, bx1 = -bx0, by1 = -bx0;
    for (int v : triangles_[t]) {
      bx0 = std::min(bx0, vertices_[v].p.x);
      bx1 = std::max(bx1, vertices_[v].p.x);
      by0 = std::min(by0, vertices_[v].p.y);
      by1 = std::max(by1, vertices_[v].p.y);
    }
    const double pad = 1e-9 * grid_h_;
    const int i0 = cell(bx0 - pad, grid_x0_, grid_nx_), i1 = cell(bx1 + pad, grid_x0_, grid_nx_);
    const int j0 = cell(by0 - pad, grid_y0_, grid_ny_), j1 = cell(by1 + pad, grid_y0_, grid_ny_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * grid_nx_ + i].push_back(static_cast<int>(t));
  }
}

std::optional<TriMesh::Location> TriMesh::locate(Point p) const {
  auto try_triangle = [&](int t) -> std::optional<Location> {
    const auto& tri = triangles_[t];
    auto l = barycentric(point(tri[0]), point(tri[1]), point(tri[2]), p);
    if (l[0] < -kBaryTol || l[1] < -kBaryTol || l[2] < -kBaryTol) return std::nullopt;
    for (auto& v : l) v = std::clamp(v, 0.0, 1.0);
    const double s = l[0] + l[1] + l[2];
    for (auto& v : l) v /= s;
    return Location{t, l};
  };
  if (buckets_.empty()) return std::nullopt;
  const double fx = (p.x - grid_x0_) / grid_h_, fy = (p.y - grid_y0_) / grid_h_;
  if (fx >= -1e-9 && fy >= -1e-9 && fx <= grid_nx_ + 1e-9 && fy <= grid_ny_ + 1e-9) {
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, grid_nx_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, grid_ny_ - 1);
    for (int t : buckets_[static_cast<std::size_t>(j) * grid_nx_ + i])
      if (auto loc = try_triangle(t)) return loc;
  } else {
    return std::nullopt;
  }
  // brute-force fallback for points on bucket seams
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    if (auto loc = try_triangle(static_cast<int>(t))) return loc;
  return std::nullopt;
}

std::uint64_t TriMesh::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& v : vertices_) {
    mix(&v.p.x, sizeof(double));
    mix(&v.p.y, sizeof(double));
  }
  for (const auto& t : triangles_) mix(t.data(), sizeof(int) * 3);
  return h;
}

NodalField::NodalField(MeshPtr m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v)) {
  if (mesh && values.size() != mesh->num_vertices()) throw MeshError("field length differs from vertex count");
}

NodalField NodalField::zeros(MeshPtr m) {
  const std::size_t n = m->num_vertices();
  return NodalField(std::move(m), std::vector<double>(n, 0.0));
}

double NodalField::at(const TriMesh::Location& loc) const {
  const auto& tri = mesh->triangle(loc.triangle);
  return loc.bary[0] * values[tri[0]] + loc.bary[1] * values[tri[1]] + loc.bary[2] * values[tri[2]];
}

std::optional<double> NodalField::evaluate(Point p) const {
  auto loc = mesh->locate(p);
  if (!loc) return std::nullopt;
  return at(*loc);
}

// --- I/O ---------------------------------------------------------------------

int encode_region(RegionTag tag) {
  switch (tag.kind) {
    case RegionKind::vacuum: return 0;
    case RegionKind::inside_limiter: return 1;
    case RegionKind::between_walls: return 2;
    case RegionKind::exterior: return 3;
    case RegionKind::on_structure: return 4;
    case RegionKind::coil: return 10 + tag.coil;
  }
  return 0;
}

RegionTag decode_region(int code) {
  if (code >= 10) return {RegionKind::coil, code - 10};
  switch (code) {
    case 1: return {RegionKind::inside_limiter, -1};
    case 2: return {RegionKind::between_walls, -1};
    case 3: return {RegionKind::exterior, -1};
    case 4: return {RegionKind::on_structure, -1};
    default: return {RegionKind::vacuum, -1};
  }
}

TriMesh parse_mesh(const std::string& text, double gamma_radius, const ReactorGeometry* geometry) {
  std::istringstream in(text);
  std::string line, word;
  std::vector<TriMesh::Vertex> verts;
  std::vector<Triangle> tris;
  std::vector<RegionTag> regions;
  auto next_content = [&](std::string& out) {
    while (std::getline(in, out)) {
      const auto pos = out.find_first_not_of(" \t\r");
      if (pos == std::string::npos || out[pos] == '#') continue;
      return true;
    }
    return false;
  };
  auto expect_header = [&](const char* key) -> std::size_t {
    if (!next_content(line)) throw MeshError(std::string("mesh: missing '") + key + "' header");
    std::istringstream ls(line);
    std::size_t n = 0;
    if (!(ls >> word >> n) || word != key) throw MeshError(std::string("mesh: expected '") + key + " N', got: " + line);
    return n;
  };
  const std::size_t nv = expect_header("nodes");
  verts.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_content(line)) throw MeshError("mesh: truncated node list");
    std::istringstream ls(line);
    TriMesh::Vertex v;
    int axis = 0, gamma = 0;
    if (!(ls >> v.p.x >> v.p.y >> axis >> gamma)) throw MeshError("mesh: bad node line: " + line);
    v.axis = axis != 0;
    v.gamma = gamma != 0;
    verts.push_back(v);
  }
  const std::size_t nt = expect_header("elements");
  tris.reserve(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    if (!next_content(line)) throw MeshError("mesh: truncated element list");
    std::istringstream ls(line);
    Triangle t;
    int code = 0;
    if (!(ls >> t[0] >> t[1] >> t[2] >> code)) throw MeshError("mesh: bad element line: " + line);
    tris.push_back(t);
    regions.push_back(decode_region(code));
  }
  if (gamma_radius <= 0.0) {
    for (const auto& v : verts)
      if (v.gamma) gamma_radius = std::max(gamma_radius, std::hypot(v.p.x, v.p.y));
  }
  // orient counter-clockwise
  for (auto& t : tris) {
    const Point a = verts[t[0]].p, b = verts[t[1]].p, c = verts[t[2]].p;
    if (cross(b - a, c - a) < 0.0) std::swap(t[1], t[2]);
  }
  if (geometry) {
    for (std::size_t i = 0; i < tris.size(); ++i) {
      const auto& t = tris[i];
      const Point c{(verts[t[0]].p.x + verts[t[1]].p.x + verts[t[2]].p.x) / 3.0,
                    (verts[t[0]].p.y + verts[t[1]].p.y + verts[t[2]].p.y) / 3.0};
      regions[i] = classify_region(*geometry, c);
    }
  }
  return TriMesh(std::move(verts), std::move(tris), std::move(regions), gamma_radius);
}

TriMesh read_mesh(const std::filesystem::path& path, const ReactorGeometry* geometry) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mesh(ss.str(), geometry ? geometry->gamma_radius : 0.0, geometry);
}

std::string mesh_to_string(const TriMesh& m) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# tokuq mesh v1\n";
  out << "nodes " << m.num_vertices() << '\n';
  for (const auto& v : m.vertices()) out << v.p.x << ' ' << v.p.y << ' ' << int(v.axis) << ' ' << int(v.gamma) << '\n';
  out << "elements " << m.num_triangles() << '\n';
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangle(static_cast<int>(t));
    out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << encode_region(m.region(static_cast<int>(t))) << '\n';
  }
  return out.str();
}

void write_mesh(const TriMesh& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file: " + path.string());
  out << mesh_to_string(m);
}

void write_field_csv(const NodalField& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write field file: " + path.string());
  out << std::setprecision(17) << "vertex_id,x,y,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point p = f.mesh->point(static_cast<int>(i));
    out << i << ',' << p.x << ',' << p.y << ',' << f[i] << '\n';
  }
}

void write_field_vtk(const NodalField& f, const std::filesystem::path& path, const std::string& name) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write field file: " + path.string());
  const auto& m = *f.mesh;
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\n" << name << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << m.num_vertices() << " double\n";
  for (const auto& v : m.vertices()) out << v.p.x << ' ' << v.p.y << " 0\n";
  out << "CELLS " << m.num_triangles() << ' ' << 4 * m.num_triangles() << '\n';
  for (const auto& t : m.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << m.num_triangles() << '\n';
  for (std::size_t t = 0; t < m.num_triangles(); ++t) out << "5\n";
  out << "POINT_DATA " << m.num_vertices() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double v : f.values) out << v << '\n';
}

TriMesh structured_rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
  std::vector<TriMesh::Vertex> verts;
  std::vector<Triangle> tris;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      TriMesh::Vertex v;
      v.p = {i == nx ? x1 : x0 + (x1 - x0) * i / nx, j == ny ? y1 : y0 + (y1 - y0) * j / ny};
      v.axis = v.p.x == 0.0;
      verts.push_back(v);
    }
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  std::vector<RegionTag> regions(tris.size(), RegionTag{RegionKind::inside_limiter, -1});
  return TriMesh(std::move(verts), std::move(tris), std::move(regions), 0.0);
}

std::string audit_mesh(const TriMesh& m) {
  std::ostringstream err;
  std::map<Edge, int> count;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (!(m.area(static_cast<int>(t)) > 0.0)) {
      err << "triangle " << t << " has non-positive signed area";
      return err.str();
    }
    const auto& tri = m.triangle(static_cast<int>(t));
    for (int k = 0; k < 3; ++k) ++count[make_edge(tri[k], tri[(k + 1) % 3])];
  }
  for (std::size_t v = 0; v < m.num_vertices(); ++v) {
    const auto& vx = m.vertex(static_cast<int>(v));
    if ((vx.p.x == 0.0) != vx.axis) {
      err << "vertex " << v << " axis flag inconsistent with x = " << vx.p.x;
      return err.str();
    }
    if (vx.gamma && std::abs(std::hypot(vx.p.x, vx.p.y) - m.gamma_radius()) > 1e-9 * m.gamma_radius()) {
      err << "vertex " << v << " flagged on Gamma but off the circle";
      return err.str();
    }
  }
  for (const auto& [e, c] : count) {
    if (c > 2) {
      err << "edge (" << e.a << "," << e.b << ") shared by " << c << " triangles";
      return err.str();
    }
    if (c == 1) {
      const auto& a = m.vertex(e.a);
      const auto& b = m.vertex(e.b);
      if (m.gamma_radius() > 0.0 && !(a.axis && b.axis) && !(a.gamma && b.gamma)) {
        err << "boundary edge (" << e.a << "," << e.b << ") is neither on the axis nor on Gamma";
        return err.str();
      }
      // hanging node: a vertex strictly inside a boundary edge
      for (std::size_t v = 0; v < m.num_vertices(); ++v) {
        if (static_cast<int>(v) == e.a || static_cast<int>(v) == e.b) continue;
        const Point p = m.point(static_cast<int>(v));
        const double len = distance(a.p, b.p);
        if (distance_to_segment(p, a.p, b.p) < 1e-12 * len) {
          err << "hanging vertex " << v << " on edge (" << e.a << "," << e.b << ")";
          return err.str();
        }
      }
    }
  }
  return {};
}

std::set<int> mark_near_separatrix(const NodalField& f, double psi_star, double alpha) {
  if (psi_star == 0.0) throw MeshError("degenerate marking level");
  if (!(alpha > 0.0 && alpha < 1.0)) throw MeshError("marking parameter must lie in (0,1)");
  const double band = alpha * std::abs(psi_star);
  std::set<int> out;
  const auto& m = *f.mesh;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    for (int v : m.triangle(static_cast<int>(t))) {
      if (std::abs(f[v] - psi_star) <= band) {
        out.insert(static_cast<int>(t));
        break;
      }
    }
  }
  return out;
}

}  // namespace tokuq
