#include "tokuq/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace tokuq {

using nlohmann::ordered_json;

namespace {

ordered_json point_json(Point p) { return ordered_json::array({p.x, p.y}); }

ordered_json optional_point(const std::optional<Point>& p) { return p ? point_json(*p) : ordered_json(nullptr); }

}  // namespace

ordered_json features_json(const FieldFeatures& f) {
  ordered_json j;
  j["boundary_type"] = to_string(f.kind);
  j["psi_ma"] = f.psi_ma;
  j["psi_bd"] = f.psi_bd;
  j["axis"] = point_json(f.axis);
  j["xpoint"] = optional_point(f.xpoint);
  j["strike_points"] = ordered_json::array();
  for (const Point& p : f.strike) j["strike_points"].push_back(point_json(p));
  j["contact_point"] = optional_point(f.contact);
  if (f.shape) {
    const auto& s = *f.shape;
    j["shaping"] = {{"r_geo", s.r_geo}, {"a_minor", s.a_minor}, {"eps", s.eps},
                    {"kappa", s.kappa_e}, {"delta_u", s.delta_u}, {"delta_l", s.delta_l}};
  } else {
    j["shaping"] = nullptr;
  }
  return j;
}

ordered_json solution_json(const EquilibriumSolution& sol, const FieldFeatures& f) {
  ordered_json j;
  j["status"] = to_string(sol.status);
  if (!sol.message.empty()) j["message"] = sol.message;
  j["iterations"] = sol.iterations;
  j["plasma_current"] = sol.plasma_current;
  j["mesh_vertices"] = ordered_json::array();
  for (const auto& m : sol.mesh_sequence) j["mesh_vertices"].push_back(m->num_vertices());
  j["features"] = features_json(f);
  j["residual_history"] = sol.residual_history;
  return j;
}

ordered_json mc_report_json(const McReport& r, bool with_timing) {
  ordered_json j;
  j["seed"] = r.seed;
  j["noise_fraction"] = r.fraction;
  j["n_samples"] = r.n_samples;
  j["n_failed"] = r.n_failed;
  j["converged"] = r.converged;
  j["stop_eps"] = r.stop_eps;
  j["final_margin"] = r.final_margin;
  j["stopping_history"] = r.stopping_history;
  j["categories"] = ordered_json::object();
  for (const auto& [k, n] : r.categories) j["categories"][k] = n;
  j["features"] = ordered_json::object();
  for (const auto& [k, s] : r.features) j["features"][k] = {{"n", s.n}, {"mean", s.mean}, {"variance", s.variance}};
  j["reference_xpoint"] = optional_point(r.reference_xpoint);
  j["annuli"] = {{"radii", r.radii},
                 {"counts", r.xpoint_annuli.count},
                 {"frequencies", r.xpoint_annuli.frequency},
                 {"beyond", r.xpoint_annuli.beyond},
                 {"total", r.xpoint_annuli.total}};
  if (with_timing) j["mean_seconds_per_sample"] = r.mean_seconds;
  return j;
}

void write_samples_csv(const McReport& r, const std::filesystem::path& path, bool with_timing) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setprecision(17);
  const std::size_t nc = r.samples.empty() ? 0 : r.samples.front().currents.size();
  os << "index,status,boundary_type";
  for (std::size_t c = 0; c < nc; ++c) os << ",I" << c + 1;
  os << ",psi_ma,psi_bd,axis_x,axis_y,xpoint_x,xpoint_y,strike1_x,strike1_y,strike2_x,strike2_y,contact_x,contact_y,"
        "r_geo,a_minor,eps,kappa,delta_u,delta_l";
  os << (with_timing ? ",seconds\n" : "\n");
  auto opt = [&](bool has, double v) {
    os << ',';
    if (has) os << v;
  };
  for (const auto& s : r.samples) {
    const auto& f = s.features;
    os << s.index << ',' << (s.ok ? "ok" : s.failure) << ',' << (s.ok ? to_string(f.kind) : "");
    for (std::size_t c = 0; c < nc; ++c) os << ',' << s.currents[c];
    opt(s.ok, f.psi_ma);
    opt(s.ok, f.psi_bd);
    opt(s.ok, f.axis.x);
    opt(s.ok, f.axis.y);
    opt(s.ok && f.xpoint, f.xpoint ? f.xpoint->x : 0.0);
    opt(s.ok && f.xpoint, f.xpoint ? f.xpoint->y : 0.0);
    for (std::size_t k = 0; k < 2; ++k) {
      opt(s.ok && f.strike.size() > k, f.strike.size() > k ? f.strike[k].x : 0.0);
      opt(s.ok && f.strike.size() > k, f.strike.size() > k ? f.strike[k].y : 0.0);
    }
    opt(s.ok && f.contact, f.contact ? f.contact->x : 0.0);
    opt(s.ok && f.contact, f.contact ? f.contact->y : 0.0);
    const bool sh = s.ok && f.shape.has_value();
    opt(sh, sh ? f.shape->r_geo : 0.0);
    opt(sh, sh ? f.shape->a_minor : 0.0);
    opt(sh, sh ? f.shape->eps : 0.0);
    opt(sh, sh ? f.shape->kappa_e : 0.0);
    opt(sh, sh ? f.shape->delta_u : 0.0);
    opt(sh, sh ? f.shape->delta_l : 0.0);
    if (with_timing) os << ',' << s.seconds;
    os << '\n';
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

namespace {

class Svg {
 public:
  explicit Svg(const ReactorGeometry& g) {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    auto grow = [&](Point p) {
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    };
    for (const Point& p : g.vessel_outer) grow(p);
    for (const auto& c : g.coils) {
      grow({c.center.x + c.width / 2, c.center.y + c.height / 2});
      grow({c.center.x - c.width / 2, c.center.y - c.height / 2});
    }
    const double pad = 0.5;
    x0_ = x0 - pad;
    y1_ = y1 + pad;
    w_ = (x1 - x0 + 2 * pad) * kScale;
    h_ = (y1 - y0 + 2 * pad) * kScale;
    os_ << std::setprecision(6);
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\" viewBox=\"0 0 "
        << w_ << ' ' << h_ << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& c : g.coils) {
      const Point tl = map({c.center.x - c.width / 2, c.center.y + c.height / 2});
      os_ << "<rect x=\"" << tl.x << "\" y=\"" << tl.y << "\" width=\"" << c.width * kScale << "\" height=\""
          << c.height * kScale << "\" fill=\"#d9d9d9\" stroke=\"#555\"/>\n";
    }
    polyline(g.vessel_outer, true, "#444", 1.5);
    polyline(g.limiter, true, "#222", 2.0);
    for (const auto& d : g.divertor) polyline(d, false, "#8b4513", 2.5);
  }

  Point map(Point p) const { return {(p.x - x0_) * kScale, (y1_ - p.y) * kScale}; }

  void polyline(const std::vector<Point>& pts, bool closed, const char* color, double width) {
    if (pts.size() < 2) return;
    os_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << "\" points=\"";
    for (const Point& p : pts) {
      const Point q = map(p);
      os_ << q.x << ',' << q.y << ' ';
    }
    if (closed) {
      const Point q = map(pts.front());
      os_ << q.x << ',' << q.y;
    }
    os_ << "\"/>\n";
  }

  void dot(Point p, const char* color, double r) {
    const Point q = map(p);
    os_ << "<circle cx=\"" << q.x << "\" cy=\"" << q.y << "\" r=\"" << r << "\" fill=\"" << color << "\"/>\n";
  }

  void title(const std::string& text) {
    os_ << "<text x=\"10\" y=\"22\" font-family=\"sans-serif\" font-size=\"16\">" << text << "</text>\n";
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  static constexpr double kScale = 60.0;
  double x0_ = 0.0, y1_ = 0.0, w_ = 0.0, h_ = 0.0;
  std::ostringstream os_;
};

}  // namespace

std::string equilibrium_svg(const ReactorGeometry& g, const NodalField& psi, const FieldFeatures& f, int contours) {
  Svg svg(g);
  const TriMesh& m = *psi.mesh;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (!inside_vessel(m.region(static_cast<int>(t)))) continue;
    for (int v : m.triangle(static_cast<int>(t))) {
      lo = std::min(lo, psi[v]);
      hi = std::max(hi, psi[v]);
    }
  }
  if (lo < hi && contours > 0) {
    for (int k = 1; k <= contours; ++k) {
      const double level = lo + (hi - lo) * k / (contours + 1.0);
      for (const auto& line : extract_contour(psi, level)) svg.polyline(line.points, false, "#7fa7d9", 0.8);
    }
  }
  if (f.kind != BoundaryType::no_confinement) {
    for (const auto& line : extract_contour(psi, f.psi_bd)) svg.polyline(line.points, false, "#1f4e9c", 1.2);
    svg.polyline(f.boundary.points, false, "#d62728", 2.5);
    svg.dot(f.axis, "black", 4);
  }
  if (f.xpoint) svg.dot(*f.xpoint, "#2ca02c", 5);
  for (const Point& p : f.strike) svg.dot(p, "#ff7f0e", 5);
  if (f.contact) svg.dot(*f.contact, "#1f77b4", 5);
  svg.title(to_string(f.kind));
  return svg.finish();
}

std::string scatter_svg(const ReactorGeometry& g, const McReport& r) {
  Svg svg(g);
  for (const auto& s : r.samples) {
    if (!s.ok) continue;
    if (s.features.xpoint) svg.dot(*s.features.xpoint, "#2ca02c", 2);
    for (const Point& p : s.features.strike) svg.dot(p, "#ff7f0e", 2);
    if (s.features.contact) svg.dot(*s.features.contact, "#1f77b4", 2);
  }
  if (r.reference_xpoint) svg.dot(*r.reference_xpoint, "black", 3);
  return svg.finish();
}

}  // namespace tokuq
