#include <doctest.h>

#include <memory>

#include "support.hpp"
#include "tokuq/config.hpp"
#include "tokuq/pipeline.hpp"

using namespace tokuq;

TEST_CASE("surrogate against direct solves on a fixed mesh") {
  CampaignConfig cfg = default_config(TOKUQ_DATA_DIR);
  cfg.solver.refinements = 0;
  const ReactorGeometry g = load_geometry(cfg.geometry);
  const MeshPtr coarse = std::make_shared<const TriMesh>(read_mesh(cfg.mesh, &g));
  const auto space = std::make_shared<const CommonSpace>(g, coarse, 0);

  const EquilibriumSolution ref = solve_free_boundary(g, coarse, g.reference_currents(), cfg.profile, cfg.solver);
  REQUIRE(ref.ok());
  const std::vector<double> projected = space->project(ref.field);
  const std::vector<double> restricted = space->restrict_field(ref.field);
  REQUIRE(projected.size() == restricted.size());
  for (std::size_t i = 0; i < projected.size(); ++i) CHECK(projected[i] == doctest::Approx(restricted[i]).epsilon(1e-9));
  CHECK(evaluate_interior(*space, projected).features.kind == BoundaryType::diverted);

  const Evaluator direct = direct_evaluator(space, cfg.profile, cfg.solver, warm_start_from(ref, coarse));
  const NoiseModel nm = cfg.noise_model(g);
  BuildOptions bo;
  bo.mesh_hash = space->mesh()->hash();
  const Surrogate s2 = build_surrogate(surrogate_target(direct, nm), 2, 2, nm.box(), bo);
  CHECK(s2.failed_nodes.empty());
  const CurrentVector node = nm.currents_at(nm.box().from_unit(s2.grid.point[3]));
  const Evaluation at_node = surrogate_evaluator(space, std::make_shared<const Surrogate>(s2), nm)(node);
  const Evaluation solved = direct(node);
  REQUIRE(at_node.ok);
  REQUIRE(solved.ok);
  for (std::size_t i = 0; i < solved.psi.size(); ++i) CHECK(at_node.psi[i] == doctest::Approx(solved.psi[i]).epsilon(1e-10));

  std::vector<CurrentVector> samples;
  for (std::uint64_t k = 0; k < 6; ++k) {
    auto rng = sample_rng(5, k);
    samples.push_back(sample_currents(nm, rng));
  }
  std::vector<double> e;
  for (int level = 0; level <= 2; ++level) {
    const auto s = std::make_shared<const Surrogate>(truncate_surrogate(s2, level));
    e.push_back(mean_relative_error(surrogate_evaluator(space, s, nm), direct, samples));
  }
  CHECK(e[1] < e[0]);
  CHECK(e[2] < e[1]);
  CHECK(e[2] < 1e-4);
}
