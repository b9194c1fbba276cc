#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tokuq/geometry.hpp"
#include "tokuq/mesh.hpp"

namespace tokuq {

enum class BoundaryType { diverted, limited, wall_contact, no_confinement };

std::string to_string(BoundaryType t);
BoundaryType boundary_type_from_string(const std::string& s);

struct ContourLine {
  std::vector<Point> points;  // closed lines repeat the first point at the end
  bool closed = false;
};

/// Closed plasma boundary at psi_level; first point equals last point.
struct BoundaryPolyline {
  std::vector<Point> points;
  double psi_level = 0.0;
  BoundaryType kind = BoundaryType::no_confinement;
};

struct ShapingParams {
  double r_geo = 0.0;
  double a_minor = 0.0;
  double eps = 0.0;
  double kappa_e = 0.0;
  double delta_u = 0.0;
  double delta_l = 0.0;
};

struct AxisResult {
  int vertex = -1;
  Point point;
  double value = 0.0;
  bool degenerate = false;  // no strict local maximum, global maximum used
};

struct RecoveredGradient {
  std::vector<Point> grad;
  std::vector<char> fallback;  // plain patch average used at this vertex
};

/// Vertices whose incident triangles are all tagged inside_limiter.
std::vector<char> inside_limiter_vertices(const TriMesh& m);

/// Interior vertices (off the mesh boundary, inside the vessel) around which
/// f(v) - f(neighbour) changes sign at least four times cyclically.
std::vector<int> saddle_candidates(const NodalField& f);

/// Zienkiewicz-Zhu recovery: least-squares linear fit of the element
/// gradients at the patch centroids, evaluated at the vertex.
RecoveredGradient recover_gradient(const NodalField& f);

/// Candidate with the smallest |grad| averaged over itself and its
/// neighbours; ties go to the lower vertex index.
std::optional<int> select_xpoint(const NodalField& f, const std::vector<int>& candidates,
                                 const RecoveredGradient& grad);

/// Highest discrete local maximum inside the limiter. Throws MeshError if no
/// vertex lies inside the limiter.
AxisResult find_axis(const NodalField& f);

/// Marching triangles. A vertex value equal to the level counts as below it.
/// Lines are ordered by their leftmost point.
std::vector<ContourLine> extract_contour(const NodalField& f, double level);

/// Result of the plasma boundary search.
struct BoundaryAnalysis {
  BoundaryType kind = BoundaryType::no_confinement;
  double psi_bd = 0.0;
  AxisResult axis;
  std::optional<int> xpoint;      // selected saddle vertex
  double psi_x = 0.0;
  double psi_limiter = 0.0;       // highest level at which the core reaches a structure
  std::optional<Point> touch;     // where the core first reaches a structure
  BoundaryPolyline boundary;
  std::vector<double> core_level; // bottleneck level from the axis, per vertex
  std::string message;
};

BoundaryAnalysis classify_boundary(const NodalField& f, const ReactorGeometry& g);

/// Triangles with every vertex connected to the axis above psi_bd.
std::vector<char> core_triangles(const TriMesh& m, const BoundaryAnalysis& b);

/// Crossings of the psi_bd contour legs with the divertor, sorted by x. With
/// an x-point, the legs are walked away from it and the first crossing in each
/// direction is kept; otherwise every open contour line is intersected.
std::vector<Point> strike_points(const NodalField& f, double psi_bd, const std::vector<Polyline>& divertor,
                                 std::optional<Point> xpoint = std::nullopt);

/// Throws std::invalid_argument for a degenerate polyline.
ShapingParams shaping(const std::vector<Point>& boundary);

/// Everything reported for one psi field.
struct FieldFeatures {
  BoundaryType kind = BoundaryType::no_confinement;
  double psi_ma = 0.0;
  double psi_bd = 0.0;
  Point axis;
  std::optional<Point> xpoint;
  std::vector<Point> strike;
  std::optional<Point> contact;
  std::optional<ShapingParams> shape;
  BoundaryPolyline boundary;
};

FieldFeatures analyze_field(const NodalField& f, const ReactorGeometry& g);

}  // namespace tokuq
