#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "tokuq/mesh.hpp"

namespace tokuq {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Numbering of the unknowns: every vertex not held by a Dirichlet constraint.
struct DofMap {
  std::vector<int> dof_of_vertex;  // -1 for constrained vertices
  std::vector<int> vertex_of_dof;

  std::size_t size() const { return vertex_of_dof.size(); }
  static DofMap axis_eliminated(const TriMesh& m);
  static DofMap from_constraints(const std::vector<char>& constrained);
};

/// P1 stiffness with coefficient 1/(mu x), degree-2 quadrature, indexed by
/// vertex. Throws if a quadrature point has x <= 0.
SparseMatrix assemble_stiffness(const TriMesh& m, double mu);

/// Restriction of a vertex-indexed matrix to the free dofs.
SparseMatrix restrict_to_dofs(const SparseMatrix& a, const DofMap& dofs);

/// Stiffness with the axis rows and columns eliminated (psi = 0 on x = 0).
SparseMatrix assemble_interior(const TriMesh& m, double mu);

/// Boundary coupling on Gamma, indexed by position in mesh.gamma_vertices().
struct BoundaryOperator {
  std::vector<int> vertices;
  Eigen::MatrixXd mass_N;       // int_Gamma psi N phi
  Eigen::MatrixXd double_layer; // int int (psi1 - psi2) M (phi1 - phi2)

  /// Combined form entering the discrete equation (units of the interior
  /// stiffness, i.e. including the 1/mu0 scaling).
  Eigen::MatrixXd coupled(double mu0) const;
};

/// `order` Gauss points per edge parameter; coincident and touching edge
/// pairs use a graded substitution that removes the logarithmic singularity.
BoundaryOperator assemble_boundary(const TriMesh& m, double rho, int order = 8);

/// Full free-boundary operator: stiffness + boundary coupling, axis eliminated.
SparseMatrix assemble_free_boundary_operator(const TriMesh& m, double mu0, int boundary_order = 8);

/// Load vector b_i = int f phi_i over triangles selected by `weight(t)` != 0,
/// with the density evaluated at quadrature points; vertex-indexed.
Eigen::VectorXd assemble_load(const TriMesh& m, const std::function<double(int tri, Point p)>& density,
                              int degree = 2);

/// Coil source I_i/S_i on coil triangles, vertex-indexed.
Eigen::VectorXd assemble_coil_load(const TriMesh& m, const std::vector<double>& coil_density);

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace tokuq
