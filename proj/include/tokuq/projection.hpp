#pragma once

#include <memory>
#include <vector>

#include "tokuq/mesh.hpp"

namespace tokuq {

struct ProjectionResult {
  NodalField field;
  std::vector<int> outside_vertices;  // dst vertices not covered by the source mesh
};

/// L2 projection onto the P1 space of a fixed destination mesh. The mass
/// matrix is factored once, so repeated projections onto the same mesh only
/// pay for the load vector and a triangular solve.
class L2Projector {
 public:
  explicit L2Projector(MeshPtr dst);
  ~L2Projector();
  L2Projector(L2Projector&&) noexcept;
  L2Projector& operator=(L2Projector&&) noexcept;

  ProjectionResult project(const NodalField& src) const;
  const MeshPtr& mesh() const { return dst_; }

 private:
  struct Impl;
  MeshPtr dst_;
  std::unique_ptr<Impl> impl_;
};

ProjectionResult project_field(const NodalField& src, MeshPtr dst_mesh);

/// Degree-2 exact three-point rule on the reference triangle: barycentric
/// points and weights (weights sum to 1, multiply by the triangle area).
struct TriangleRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weight;
};
const TriangleRule& triangle_rule_deg2();
const TriangleRule& triangle_rule_deg5();

}  // namespace tokuq
