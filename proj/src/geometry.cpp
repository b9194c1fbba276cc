#include "tokuq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tokuq {

using nlohmann::json;

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }

bool Coil::contains(Point p) const {
  return std::abs(p.x - center.x) <= 0.5 * width && std::abs(p.y - center.y) <= 0.5 * height;
}

CurrentVector ReactorGeometry::reference_currents() const {
  CurrentVector out;
  out.values.reserve(coils.size());
  for (const auto& c : coils) out.values.push_back(c.reference_current);
  return out;
}

namespace {

Point parse_point(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw GeometryError(what + ": expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Polyline parse_polyline(const json& j, const std::string& what) {
  Polyline out;
  if (!j.is_array()) throw GeometryError(what + ": expected a list of points");
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(parse_point(j[i], what + "[" + std::to_string(i) + "]"));
  return out;
}

void drop_closing_point(Polyline& p) {
  if (p.size() > 1 && p.front() == p.back()) p.pop_back();
}

json to_json(const Polyline& p) {
  json out = json::array();
  for (const auto& q : p) out.push_back({q.x, q.y});
  return out;
}

}  // namespace

ReactorGeometry parse_geometry(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GeometryError(std::string("geometry parse error: ") + e.what());
  }
  if (!doc.is_object()) throw GeometryError("geometry document must be an object");
  if (!doc.contains("gamma_radius") || !doc["gamma_radius"].is_number())
    throw GeometryError("geometry: missing numeric field 'gamma_radius'");

  ReactorGeometry g;
  g.gamma_radius = doc["gamma_radius"].get<double>();

  if (doc.contains("coils")) {
    const auto& coils = doc["coils"];
    if (!coils.is_array()) throw GeometryError("geometry: 'coils' must be a list");
    for (std::size_t i = 0; i < coils.size(); ++i) {
      const auto& c = coils[i];
      const std::string what = "coil[" + std::to_string(i) + "]";
      Coil coil;
      try {
        coil.id = c.value("id", static_cast<int>(i + 1));
        coil.name = c.value("name", std::string{});
        coil.center = parse_point(c.at("center"), what + ".center");
        coil.width = c.at("width").get<double>();
        coil.height = c.at("height").get<double>();
        coil.reference_current = c.value("current", 0.0);
      } catch (const json::exception& e) {
        throw GeometryError(what + ": " + e.what());
      }
      g.coils.push_back(std::move(coil));
    }
  }
  if (doc.contains("limiter")) g.limiter = parse_polyline(doc["limiter"], "limiter");
  if (doc.contains("vessel_outer"))
    g.vessel_outer = parse_polyline(doc["vessel_outer"], "vessel_outer");
  if (doc.contains("divertor")) {
    const auto& d = doc["divertor"];
    // either one polyline or a list of polylines
    if (d.is_array() && !d.empty() && d[0].is_array() && !d[0].empty() && d[0][0].is_array()) {
      for (std::size_t i = 0; i < d.size(); ++i)
        g.divertor.push_back(parse_polyline(d[i], "divertor[" + std::to_string(i) + "]"));
    } else if (d.is_array() && !d.empty()) {
      g.divertor.push_back(parse_polyline(d, "divertor"));
    }
  }
  drop_closing_point(g.limiter);
  drop_closing_point(g.vessel_outer);

  validate_geometry(g);
  return g;
}

ReactorGeometry load_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GeometryError("cannot open geometry file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_geometry(ss.str());
}

std::string geometry_to_string(const ReactorGeometry& g) {
  json doc;
  doc["gamma_radius"] = g.gamma_radius;
  doc["coils"] = json::array();
  for (const auto& c : g.coils) {
    doc["coils"].push_back({{"id", c.id},
                            {"name", c.name},
                            {"center", {c.center.x, c.center.y}},
                            {"width", c.width},
                            {"height", c.height},
                            {"current", c.reference_current}});
  }
  doc["limiter"] = to_json(g.limiter);
  json div = json::array();
  for (const auto& d : g.divertor) div.push_back(to_json(d));
  doc["divertor"] = div;
  doc["vessel_outer"] = to_json(g.vessel_outer);
  return doc.dump(2);
}

void write_geometry(const ReactorGeometry& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw GeometryError("cannot write geometry file: " + path.string());
  out << geometry_to_string(g) << '\n';
}

void validate_geometry(const ReactorGeometry& g) {
  const double rho = g.gamma_radius;
  if (!(rho > 0.0)) throw GeometryError("gamma_radius must be positive");

  for (const auto& c : g.coils) {
    const std::string name = "coil " + std::to_string(c.id) + (c.name.empty() ? "" : " (" + c.name + ")");
    if (!(c.width > 0.0) || !(c.height > 0.0))
      throw GeometryError(name + ": width and height must be positive");
    const double xmin = c.center.x - 0.5 * c.width;
    if (xmin <= 0.0) throw GeometryError(name + ": coil in x <= 0 half-plane");
    for (double sx : {-0.5, 0.5})
      for (double sy : {-0.5, 0.5}) {
        const Point corner{c.center.x + sx * c.width, c.center.y + sy * c.height};
        if (std::hypot(corner.x, corner.y) >= rho)
          throw GeometryError(name + ": coil not strictly inside Gamma");
      }
  }

  auto check_wall = [&](const Polyline& p, const std::string& name) {
    for (const auto& q : p) {
      if (q.x < 0.0) throw GeometryError(name + ": vertex in x < 0 half-plane");
      if (std::hypot(q.x, q.y) >= rho) throw GeometryError(name + ": vertex not strictly inside Gamma");
    }
  };
  check_wall(g.limiter, "limiter");
  check_wall(g.vessel_outer, "vessel_outer");
  for (std::size_t i = 0; i < g.divertor.size(); ++i)
    check_wall(g.divertor[i], "divertor[" + std::to_string(i) + "]");

  if (!g.limiter.empty()) {
    if (g.limiter.size() < 3) throw GeometryError("limiter: needs at least 3 points");
    if (!polyline_is_simple(g.limiter, true)) throw GeometryError("limiter: polyline self-intersects");
  }
  if (!g.vessel_outer.empty() && g.vessel_outer.size() < 3)
    throw GeometryError("vessel_outer: needs at least 3 points");
}

std::vector<double> coil_current_density(const ReactorGeometry& g, const CurrentVector& currents) {
  if (currents.size() != g.coils.size())
    throw GeometryError("current vector has " + std::to_string(currents.size()) + " entries, geometry has " +
                        std::to_string(g.coils.size()) + " coils");
  std::vector<double> out(g.coils.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = currents[i] / g.coils[i].area();
  return out;
}

bool point_in_polygon(std::span<const Point> poly, Point p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xc) inside = !inside;
    }
  }
  return inside;
}

double polygon_area(std::span<const Point> poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

double distance_to_segment(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  double t = len2 > 0.0 ? ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

double distance_to_polyline(std::span<const Point> poly, Point p, bool closed) {
  double best = std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return distance(p, poly[0]);
  const std::size_t n = poly.size();
  const std::size_t segs = closed ? n : n - 1;
  for (std::size_t i = 0; i < segs; ++i) best = std::min(best, distance_to_segment(p, poly[i], poly[(i + 1) % n]));
  return best;
}

bool segment_intersection(Point a, Point b, Point c, Point d, double& t) {
  const Point r = b - a, s = d - c;
  const double denom = cross(r, s);
  if (denom == 0.0) return false;
  const Point ac = c - a;
  const double tt = cross(ac, s) / denom;
  const double uu = cross(ac, r) / denom;
  if (tt < 0.0 || tt > 1.0 || uu < 0.0 || uu > 1.0) return false;
  t = tt;
  return true;
}

bool polyline_is_simple(std::span<const Point> poly, bool closed) {
  const std::size_t n = poly.size();
  const std::size_t segs = closed ? n : n - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    for (std::size_t j = i + 1; j < segs; ++j) {
      const bool adjacent = (j == i + 1) || (closed && i == 0 && j == segs - 1);
      if (adjacent) continue;
      double t;
      if (segment_intersection(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n], t)) return false;
    }
  }
  return true;
}

std::vector<std::pair<Point, Point>> structure_segments(const ReactorGeometry& g) {
  std::vector<std::pair<Point, Point>> out;
  const std::size_t n = g.limiter.size();
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(g.limiter[i], g.limiter[(i + 1) % n]);
  for (const auto& d : g.divertor)
    for (std::size_t i = 0; i + 1 < d.size(); ++i) out.emplace_back(d[i], d[i + 1]);
  return out;
}

RegionTag classify_region(const ReactorGeometry& g, Point p) {
  if (std::hypot(p.x, p.y) > g.gamma_radius) return {RegionKind::exterior, -1};
  for (std::size_t i = 0; i < g.coils.size(); ++i)
    if (g.coils[i].contains(p)) return {RegionKind::coil, static_cast<int>(i)};
  if (!g.limiter.empty() && point_in_polygon(g.limiter, p)) return {RegionKind::inside_limiter, -1};
  if (!g.vessel_outer.empty() && point_in_polygon(g.vessel_outer, p)) return {RegionKind::between_walls, -1};
  return {RegionKind::vacuum, -1};
}

RegionTag classify_point(const ReactorGeometry& g, Point p) {
  if (std::hypot(p.x, p.y) > g.gamma_radius) return {RegionKind::exterior, -1};
  const auto near = [&](const Polyline& poly, bool closed) {
    return !poly.empty() && distance_to_polyline(poly, p, closed) <= kSnapTolerance;
  };
  if (near(g.limiter, true) || near(g.vessel_outer, true)) return {RegionKind::on_structure, -1};
  for (const auto& d : g.divertor)
    if (near(d, false)) return {RegionKind::on_structure, -1};
  return classify_region(g, p);
}

bool inside_vessel(RegionTag tag) {
  return tag.kind == RegionKind::inside_limiter || tag.kind == RegionKind::between_walls;
}

}  // namespace tokuq
