#pragma once

#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>

#include "support.hpp"
#include "tokuq/assembly.hpp"
#include "tokuq/projection.hpp"

namespace tokuq::test {

// -div(1/(mu x) grad psi) = f on [1,2] x [0,1] with psi = sin(pi x) sin(pi y),
// homogeneous Dirichlet data on the whole boundary.
inline double manufactured_exact(Point p) { return std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y); }

inline double manufactured_rhs(Point p, double mu) {
  const double pi = std::numbers::pi;
  const double sx = std::sin(pi * p.x), cx = std::cos(pi * p.x), sy = std::sin(pi * p.y);
  return sy * (2 * pi * pi * sx / p.x + pi * cx / (p.x * p.x)) / mu;
}

/// L2 error of the P1 solution on an n x n structured mesh.
inline double manufactured_l2_error(int n, double mu) {
  const MeshPtr m = rectangle(1, 2, 0, 1, n, n);
  std::vector<char> fixed(m->num_vertices());
  for (std::size_t v = 0; v < m->num_vertices(); ++v) fixed[v] = m->on_boundary(static_cast<int>(v));
  const DofMap dofs = DofMap::from_constraints(fixed);
  const SparseMatrix a = restrict_to_dofs(assemble_stiffness(*m, mu), dofs);
  const Eigen::VectorXd load = assemble_load(*m, [mu](int, Point p) { return manufactured_rhs(p, mu); }, 5);
  Eigen::VectorXd rhs(dofs.size());
  for (std::size_t d = 0; d < dofs.size(); ++d) rhs[d] = load[dofs.vertex_of_dof[d]];
  Eigen::SimplicialLDLT<SparseMatrix> solver(a);
  const Eigen::VectorXd x = solver.solve(rhs);
  NodalField u = NodalField::zeros(m);
  for (std::size_t d = 0; d < dofs.size(); ++d) u[dofs.vertex_of_dof[d]] = x[d];

  const TriangleRule& rule = triangle_rule_deg5();
  double err2 = 0.0;
  for (std::size_t t = 0; t < m->num_triangles(); ++t) {
    const auto& tri = m->triangle(static_cast<int>(t));
    for (std::size_t q = 0; q < rule.weight.size(); ++q) {
      const auto& b = rule.bary[q];
      Point p{0, 0};
      double uh = 0.0;
      for (int k = 0; k < 3; ++k) {
        p = p + b[k] * m->point(tri[k]);
        uh += b[k] * u[tri[k]];
      }
      const double e = uh - manufactured_exact(p);
      err2 += rule.weight[q] * m->area(static_cast<int>(t)) * e * e;
    }
  }
  return std::sqrt(err2);
}

}  // namespace tokuq::test
