#pragma once

#include <memory>
#include <vector>

#include "tokuq/projection.hpp"
#include "tokuq/solver.hpp"
#include "tokuq/sparse_grid.hpp"
#include "tokuq/uq.hpp"

namespace tokuq {

/// Uniformly refined interior mesh shared by every solution of a campaign.
/// Fields are compared and interpolated through their values at the vertices
/// of vessel triangles ("interior" vertices).
class CommonSpace {
 public:
  CommonSpace(ReactorGeometry g, MeshPtr coarse, int levels);

  const ReactorGeometry& geometry() const { return geometry_; }
  const MeshPtr& coarse() const { return coarse_; }
  const MeshPtr& mesh() const { return projector_.mesh(); }
  const std::vector<int>& interior() const { return interior_; }

  std::vector<double> restrict_field(const NodalField& f) const;
  /// Full field from interior values; other vertices get the interior minimum,
  /// so they never lift a boundary level.
  NodalField expand(const std::vector<double>& interior_values) const;
  /// L2 projection onto the common mesh, restricted to the interior.
  std::vector<double> project(const NodalField& f) const;

 private:
  ReactorGeometry geometry_;
  MeshPtr coarse_;
  L2Projector projector_;
  std::vector<int> interior_;
};

using CommonSpacePtr = std::shared_ptr<const CommonSpace>;

/// Features of an interior vector; not ok when no confined plasma is found.
Evaluation evaluate_interior(const CommonSpace& space, std::vector<double> psi);

/// Adaptive solve, projected onto the common mesh. A warm start (on the
/// coarse mesh) replaces the ellipse guess for every solve.
Evaluator direct_evaluator(CommonSpacePtr space, ProfileParams profile, SolverOptions opts,
                           std::shared_ptr<const NodalField> warm_start = nullptr);

/// Converged field restricted to the coarse mesh, for use as a warm start.
/// Empty when the reference solve fails.
std::shared_ptr<const NodalField> warm_start_from(const EquilibriumSolution& sol, const MeshPtr& coarse);

/// Surrogate lookup over the noise model's active coils.
Evaluator surrogate_evaluator(CommonSpacePtr space, std::shared_ptr<const Surrogate> s, NoiseModel nm);

/// Sample function for the sparse grid: box point to interior vector.
VectorFunction surrogate_target(const Evaluator& direct, NoiseModel nm);

}  // namespace tokuq
