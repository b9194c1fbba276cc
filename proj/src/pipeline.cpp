#include "tokuq/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

namespace tokuq {

CommonSpace::CommonSpace(ReactorGeometry g, MeshPtr coarse, int levels)
    : geometry_(std::move(g)),
      coarse_(std::move(coarse)),
      projector_(std::make_shared<const TriMesh>(uniform_refine_interior(*coarse_, levels))) {
  const TriMesh& m = *mesh();
  std::vector<char> flag(m.num_vertices(), 0);
  for (std::size_t t = 0; t < m.num_triangles(); ++t)
    if (inside_vessel(m.region(static_cast<int>(t))))
      for (int v : m.triangle(static_cast<int>(t))) flag[v] = 1;
  for (std::size_t v = 0; v < flag.size(); ++v)
    if (flag[v]) interior_.push_back(static_cast<int>(v));
}

std::vector<double> CommonSpace::restrict_field(const NodalField& f) const {
  std::vector<double> out;
  out.reserve(interior_.size());
  for (int v : interior_) out.push_back(f[v]);
  return out;
}

NodalField CommonSpace::expand(const std::vector<double>& values) const {
  if (values.size() != interior_.size()) throw std::invalid_argument("common space: interior vector length mismatch");
  const double low = values.empty() ? 0.0 : *std::min_element(values.begin(), values.end());
  NodalField f(mesh(), std::vector<double>(mesh()->num_vertices(), low));
  for (std::size_t k = 0; k < interior_.size(); ++k) f[interior_[k]] = values[k];
  return f;
}

std::vector<double> CommonSpace::project(const NodalField& f) const { return restrict_field(projector_.project(f).field); }

Evaluation evaluate_interior(const CommonSpace& space, std::vector<double> psi) {
  Evaluation e;
  e.features = analyze_field(space.expand(psi), space.geometry());
  e.psi = std::move(psi);
  e.ok = e.features.kind != BoundaryType::no_confinement;
  if (!e.ok) e.failure = "no_confinement";
  return e;
}

namespace {

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::shared_ptr<const NodalField> warm_start_from(const EquilibriumSolution& sol, const MeshPtr& coarse) {
  if (!sol.ok()) return nullptr;
  return std::make_shared<const NodalField>(interpolate_field(sol.field, coarse));
}

Evaluator direct_evaluator(CommonSpacePtr space, ProfileParams profile, SolverOptions opts,
                           std::shared_ptr<const NodalField> warm_start) {
  return [space = std::move(space), profile, opts, warm_start = std::move(warm_start)](const CurrentVector& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_free_boundary(space->geometry(), space->coarse(), c, profile, opts, warm_start.get());
    Evaluation e;
    if (!sol.ok()) {
      e.failure = to_string(sol.status);
    } else {
      e = evaluate_interior(*space, space->project(sol.field));
    }
    e.seconds = since(t0);
    return e;
  };
}

Evaluator surrogate_evaluator(CommonSpacePtr space, std::shared_ptr<const Surrogate> s, NoiseModel nm) {
  if (s->vector_length() != space->interior().size())
    throw SurrogateError("surrogate vector length does not match the common mesh");
  if (s->mesh_hash != space->mesh()->hash()) throw SurrogateError("surrogate was built on a different common mesh");
  if (s->box.dim() != nm.dims().size()) throw SurrogateError("surrogate dimension does not match the noise model");
  return [space = std::move(space), s = std::move(s), nm = std::move(nm)](const CurrentVector& c) {
    const auto t0 = std::chrono::steady_clock::now();
    Evaluation e = evaluate_interior(*space, eval_surrogate(*s, nm.active_values(c)));
    e.seconds = since(t0);
    return e;
  };
}

VectorFunction surrogate_target(const Evaluator& direct, NoiseModel nm) {
  return [direct, nm = std::move(nm)](const std::vector<double>& x) -> std::optional<std::vector<double>> {
    Evaluation e = direct(nm.currents_at(x));
    if (e.psi.empty()) return std::nullopt;
    return std::move(e.psi);
  };
}

}  // namespace tokuq
