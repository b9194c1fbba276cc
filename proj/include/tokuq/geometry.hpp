#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tokuq {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }

double distance(Point a, Point b);
double cross(Point a, Point b);

using Polyline = std::vector<Point>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned rectangular poloidal-field coil.
struct Coil {
  int id = 0;
  std::string name;
  Point center;
  double width = 0.0;
  double height = 0.0;
  double reference_current = 0.0;  // amperes

  double area() const { return width * height; }
  bool contains(Point p) const;
};

/// Coil currents in amperes, one entry per coil of the paired geometry.
struct CurrentVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  friend bool operator==(const CurrentVector&, const CurrentVector&) = default;
};

/// Reactor cross-section in the half-plane x >= 0. The artificial coupling
/// boundary is the half circle of radius gamma_radius centred at the origin.
struct ReactorGeometry {
  double gamma_radius = 0.0;
  std::vector<Coil> coils;
  Polyline limiter;                 // closed, first point not repeated
  std::vector<Polyline> divertor;   // open plates
  Polyline vessel_outer;            // closed, first point not repeated

  CurrentVector reference_currents() const;
};

enum class RegionKind {
  coil,
  inside_limiter,
  between_walls,  // inside the outer vessel wall but outside the limiter
  vacuum,         // inside Gamma, outside the vessel and the coils
  exterior,       // outside Gamma
  on_structure,   // within snap tolerance of a wall or divertor polyline
};

struct RegionTag {
  RegionKind kind = RegionKind::vacuum;
  int coil = -1;  // coil index when kind == coil

  friend bool operator==(const RegionTag&, const RegionTag&) = default;
};

inline constexpr double kSnapTolerance = 1e-9;

ReactorGeometry load_geometry(const std::filesystem::path& path);
ReactorGeometry parse_geometry(const std::string& text);
std::string geometry_to_string(const ReactorGeometry& g);
void write_geometry(const ReactorGeometry& g, const std::filesystem::path& path);

/// Throws GeometryError naming the offending entity.
void validate_geometry(const ReactorGeometry& g);

/// Entry i is I_i / S_i in A/m^2.
std::vector<double> coil_current_density(const ReactorGeometry& g, const CurrentVector& currents);

RegionTag classify_point(const ReactorGeometry& g, Point p);

/// Tag for mesh triangles: like classify_point but never on_structure, since
/// a centroid always lies strictly on one side of a fitted wall.
RegionTag classify_region(const ReactorGeometry& g, Point p);

bool inside_vessel(RegionTag tag);

// polygon helpers
bool point_in_polygon(std::span<const Point> poly, Point p);
double polygon_area(std::span<const Point> poly);
double distance_to_segment(Point p, Point a, Point b);
double distance_to_polyline(std::span<const Point> poly, Point p, bool closed);
bool polyline_is_simple(std::span<const Point> poly, bool closed);

/// Proper or touching intersection of segments [a,b] and [c,d]; returns the
/// parameter along [a,b] through `t`.
bool segment_intersection(Point a, Point b, Point c, Point d, double& t);

/// All structure segments that count as walls for the plasma boundary.
std::vector<std::pair<Point, Point>> structure_segments(const ReactorGeometry& g);

}  // namespace tokuq
