#include <doctest.h>

#include <Eigen/SparseCholesky>
#include <cmath>

#include "manufactured.hpp"
#include "tokuq/kernels.hpp"

using namespace tokuq;

namespace {

// Flux of the coil as a sum of filaments, 8 x 8 Gauss points over its cross-section.
double coil_flux(const Coil& c, Point p) {
  std::vector<double> gx, gw;
  gauss_legendre01(8, gx, gw);
  double s = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      s += gw[i] * gw[j] *
           greens_psi({c.center.x - c.width / 2 + gx[i] * c.width, c.center.y - c.height / 2 + gx[j] * c.height}, p);
  return s * c.reference_current;
}

// Relative max error of the free-boundary vacuum field of a single coil,
// measured away from the coil.
double vacuum_error(const char* mesh_file) {
  const ReactorGeometry g = load_geometry(TOKUQ_TEST_DATA "/one_coil.geom");
  const TriMesh m = read_mesh(std::string(TOKUQ_TEST_DATA) + "/" + mesh_file, &g);
  const DofMap dofs = DofMap::axis_eliminated(m);
  const SparseMatrix a = assemble_free_boundary_operator(m, kMu0);
  const Eigen::VectorXd load = assemble_coil_load(m, coil_current_density(g, g.reference_currents()));
  Eigen::VectorXd rhs(dofs.size());
  for (std::size_t d = 0; d < dofs.size(); ++d) rhs[d] = load[dofs.vertex_of_dof[d]];
  Eigen::SparseLU<SparseMatrix> lu(a);
  const Eigen::VectorXd x = lu.solve(rhs);
  double err = 0.0, scale = 0.0;
  for (std::size_t d = 0; d < dofs.size(); ++d) {
    const Point p = m.point(dofs.vertex_of_dof[d]);
    if (distance(p, g.coils[0].center) < 0.2) continue;
    const double ex = coil_flux(g.coils[0], p);
    err = std::max(err, std::abs(ex - x[d]));
    scale = std::max(scale, std::abs(ex));
  }
  return err / scale;
}

}  // namespace

TEST_CASE("Gauss-Legendre rule") {
  std::vector<double> x, w;
  gauss_legendre01(5, x, w);
  double s = 0.0, s8 = 0.0;
  for (int i = 0; i < 5; ++i) {
    s += w[i];
    s8 += w[i] * std::pow(x[i], 8);
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s8 == doctest::Approx(1.0 / 9).epsilon(1e-14));
}

TEST_CASE("interior stiffness") {
  const MeshPtr m = test::rectangle(0.0, 2.0, -1.0, 1.0, 6, 6);
  const SparseMatrix a = assemble_stiffness(*m, kMu0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m->num_vertices()));
  const Eigen::VectorXd r = a * ones;
  CHECK(r.cwiseAbs().maxCoeff() < 1e-9 * a.coeffs().cwiseAbs().maxCoeff());

  const SparseMatrix ai = assemble_interior(*m, kMu0);
  CHECK((SparseMatrix(ai.transpose()) - ai).norm() < 1e-12 * ai.norm());
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(ai);
  REQUIRE(ldlt.info() == Eigen::Success);
  CHECK(ldlt.vectorD().minCoeff() > 0.0);
}

TEST_CASE("manufactured solution converges at second order") {
  const double e1 = test::manufactured_l2_error(8, 1.0);
  const double e2 = test::manufactured_l2_error(16, 1.0);
  const double e3 = test::manufactured_l2_error(32, 1.0);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::log2(e2 / e3) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("boundary coupling") {
  const ReactorGeometry g = test::iter_geometry();
  const MeshPtr m = test::iter_mesh(g);
  const BoundaryOperator b = assemble_boundary(*m, g.gamma_radius);
  const Eigen::Index n = static_cast<Eigen::Index>(b.vertices.size());
  REQUIRE(n == static_cast<Eigen::Index>(m->gamma_vertices().size()));

  const double scale = b.double_layer.cwiseAbs().maxCoeff();
  CHECK((b.double_layer * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() <= 1e-13 * scale * n);
  const Eigen::MatrixXd c = b.coupled(kMu0);
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * c.cwiseAbs().maxCoeff());

  // rows of the two vertices nearest each axis end carry the 1/x singularity of N
  const BoundaryOperator b16 = assemble_boundary(*m, g.gamma_radius, 16);
  const Eigen::MatrixXd c16 = b16.coupled(kMu0);
  const auto inner = [n](const Eigen::MatrixXd& x) { return x.block(2, 2, n - 4, n - 4); };
  CHECK((inner(c16) - inner(c)).cwiseAbs().maxCoeff() < 1e-6 * inner(c).cwiseAbs().maxCoeff());
}

TEST_CASE("vacuum field of one coil matches the filament sum") {
  const double coarse = vacuum_error("one_coil.mesh");
  const double fine = vacuum_error("one_coil_fine.mesh");
  CHECK(coarse < 0.05);
  CHECK(fine < 0.5 * coarse);
}
