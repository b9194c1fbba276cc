#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tokuq/geometry.hpp"

namespace tokuq {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Triangle = std::array<int, 3>;

struct Edge {
  int a = 0;  // a < b
  int b = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

inline Edge make_edge(int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; }

/// Conforming P1 triangulation of the half-disk inside Gamma. Immutable once
/// built; derived connectivity is computed in the constructor.
class TriMesh {
 public:
  struct Vertex {
    Point p;
    bool axis = false;   // x == 0, Dirichlet psi = 0
    bool gamma = false;  // lies on the coupling circle
  };

  TriMesh() = default;
  TriMesh(std::vector<Vertex> vertices, std::vector<Triangle> triangles, std::vector<RegionTag> regions,
          double gamma_radius);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  double gamma_radius() const { return gamma_radius_; }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const Vertex& vertex(int i) const { return vertices_[i]; }
  Point point(int i) const { return vertices_[i].p; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  const std::vector<RegionTag>& regions() const { return regions_; }
  RegionTag region(int t) const { return regions_[t]; }

  double area(int t) const;
  Point centroid(int t) const;
  double max_edge_length(int t) const;

  /// Edges on Gamma, ordered by increasing polar angle; endpoints stored so
  /// that angle(a) < angle(b).
  const std::vector<Edge>& gamma_edges() const { return gamma_edges_; }
  /// Gamma vertices ordered by angle from -pi/2 to pi/2.
  const std::vector<int>& gamma_vertices() const { return gamma_vertices_; }
  /// Polar angle of a Gamma vertex.
  double gamma_angle(int v) const;

  const std::vector<int>& vertex_triangles(int v) const { return vertex_triangles_[v]; }
  /// Neighbours ordered counter-clockwise by angle around v.
  const std::vector<int>& neighbors(int v) const { return neighbors_[v]; }
  bool on_boundary(int v) const { return boundary_vertex_[v] != 0; }
  /// Neighbouring triangle across local edge k (opposite local vertex k), or -1.
  int triangle_neighbor(int t, int k) const { return tri_neighbors_[t][k]; }
  std::size_t num_edges() const { return num_edges_; }

  /// Location result: triangle index and barycentric coordinates.
  struct Location {
    int triangle = -1;
    std::array<double, 3> bary{};
  };
  std::optional<Location> locate(Point p) const;

  std::uint64_t hash() const;

 private:
  void build_connectivity();
  void build_locator();

  std::vector<Vertex> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<RegionTag> regions_;
  double gamma_radius_ = 0.0;

  std::vector<std::vector<int>> vertex_triangles_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::array<int, 3>> tri_neighbors_;
  std::vector<char> boundary_vertex_;
  std::vector<Edge> gamma_edges_;
  std::vector<int> gamma_vertices_;
  std::size_t num_edges_ = 0;

  // uniform bucket grid for point location
  double grid_x0_ = 0.0, grid_y0_ = 0.0, grid_h_ = 1.0;
  int grid_nx_ = 0, grid_ny_ = 0;
  std::vector<std::vector<int>> buckets_;
};

using MeshPtr = std::shared_ptr<const TriMesh>;

/// Piecewise-linear scalar field: one value per mesh vertex.
struct NodalField {
  MeshPtr mesh;
  std::vector<double> values;

  NodalField() = default;
  NodalField(MeshPtr m, std::vector<double> v);
  static NodalField zeros(MeshPtr m);

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }

  /// Linear interpolation at p, nullopt outside the mesh.
  std::optional<double> evaluate(Point p) const;
  double at(const TriMesh::Location& loc) const;
};

// --- I/O -------------------------------------------------------------------

/// Reads the node/element text format. Region tags stored in the file are
/// replaced by classify_region at each centroid when a geometry is given.
TriMesh read_mesh(const std::filesystem::path& path, const ReactorGeometry* geometry = nullptr);
TriMesh parse_mesh(const std::string& text, double gamma_radius, const ReactorGeometry* geometry = nullptr);
void write_mesh(const TriMesh& m, const std::filesystem::path& path);
std::string mesh_to_string(const TriMesh& m);

int encode_region(RegionTag tag);
RegionTag decode_region(int code);

void write_field_csv(const NodalField& f, const std::filesystem::path& path);
void write_field_vtk(const NodalField& f, const std::filesystem::path& path, const std::string& name);

// --- structured helpers (tests, manufactured problems) ----------------------

/// Structured right-triangle mesh of [x0,x1] x [y0,y1] with nx by ny cells.
/// Vertices with x == 0 are flagged axis. All triangles tagged inside_limiter.
TriMesh structured_rectangle(double x0, double x1, double y0, double y1, int nx, int ny);

// --- audits and refinement ---------------------------------------------------

/// Empty string when the mesh is conforming, consistently oriented and its
/// flags are consistent; otherwise a description of the first problem found.
std::string audit_mesh(const TriMesh& m);

std::set<int> mark_near_separatrix(const NodalField& f, double psi_star, double alpha);

/// Red refinement of marked triangles with green closure of the neighbours.
TriMesh refine_marked(const TriMesh& m, const std::set<int>& marked);

/// Red-refines every triangle inside the vessel `levels` times.
TriMesh uniform_refine_interior(const TriMesh& m, int levels);

/// Value of f at the vertices of `fine`, where fine is a refinement of f's mesh
/// or any mesh covering the same region (linear interpolation).
NodalField interpolate_field(const NodalField& f, MeshPtr fine);

}  // namespace tokuq
