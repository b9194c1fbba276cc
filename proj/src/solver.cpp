#include "tokuq/solver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tokuq/assembly.hpp"
#include "tokuq/projection.hpp"

namespace tokuq {

void ProfileParams::validate() const {
  if (!(alpha_p > 0.0)) throw std::invalid_argument("profile: alpha must be positive");
  if (!(gamma_p > 0.0)) throw std::invalid_argument("profile: gamma must be positive");
  if (!(beta_p >= 0.0 && beta_p <= 1.0)) throw std::invalid_argument("profile: beta must lie in [0,1]");
  if (!(x0 > 0.0)) throw std::invalid_argument("profile: x0 must be positive");
  if (!(mu0 > 0.0)) throw std::invalid_argument("profile: mu0 must be positive");
}

double ProfileParams::density(double x, double psi_n) const {
  psi_n = std::clamp(psi_n, 0.0, 1.0);
  const double s = peaked_on_axis ? 1.0 - psi_n : psi_n;
  const double shape = std::pow(1.0 - std::pow(s, alpha_p), gamma_p);
  // x dp/dpsi + (1/(2 mu0 x)) dg^2/dpsi
  return lambda_s * (beta_p * x / x0 + (1.0 - beta_p) * x0 / x) * shape;
}

PlasmaState plasma_state(const NodalField& f, const ReactorGeometry& g) {
  PlasmaState s;
  s.analysis = classify_boundary(f, g);
  const auto& b = s.analysis;
  s.psi_ma = b.axis.value;
  s.psi_bd = b.psi_bd;
  s.axis = b.axis.point;
  s.boundary_type = b.kind;
  if (b.xpoint) s.xpoint = f.mesh->point(*b.xpoint);
  if (b.kind == BoundaryType::wall_contact) s.contact_point = b.touch;
  if (b.kind == BoundaryType::no_confinement) return s;
  const TriMesh& m = *f.mesh;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    if (m.region(static_cast<int>(t)).kind != RegionKind::inside_limiter) continue;
    int in = 0;
    for (int v : m.triangle(static_cast<int>(t))) in += b.core_level[v] > b.psi_bd;
    if (in == 3) s.plasma_triangles.push_back(static_cast<int>(t));
    else if (in > 0) s.cut_triangles.push_back(static_cast<int>(t));
  }
  return s;
}

namespace {

using Bary = std::array<double, 3>;

// Part of a triangle where the linear interpolant exceeds `level`, as a fan
// of sub-triangles in barycentric coordinates.
std::vector<std::array<Bary, 3>> clip_above(const std::array<double, 3>& fv, double level) {
  std::vector<Bary> poly;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    Bary bi{}, bj{};
    bi[i] = 1.0;
    bj[j] = 1.0;
    const bool ai = fv[i] > level, aj = fv[j] > level;
    if (ai) poly.push_back(bi);
    if (ai != aj) {
      const double t = (level - fv[i]) / (fv[j] - fv[i]);
      Bary c{};
      c[i] = 1.0 - t;
      c[j] = t;
      poly.push_back(c);
    }
  }
  std::vector<std::array<Bary, 3>> out;
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) out.push_back({poly[0], poly[k], poly[k + 1]});
  return out;
}

double bary_det(const std::array<Bary, 3>& s) {
  const auto& a = s[0];
  const auto& b = s[1];
  const auto& c = s[2];
  return std::abs(a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
                  a[2] * (b[0] * c[1] - b[1] * c[0]));
}

template <class Sink>
void integrate_plasma(const NodalField& f, const PlasmaState& s, const ProfileParams& p, Sink&& sink) {
  if (!(s.psi_ma != s.psi_bd)) throw std::domain_error("plasma source: psi_ma equals psi_bd");
  const TriMesh& m = *f.mesh;
  const auto& rule = triangle_rule_deg2();
  const double scale = 1.0 / (s.psi_ma - s.psi_bd);
  auto do_triangle = [&](int t, bool clip) {
    const auto& tri = m.triangle(t);
    const std::array<double, 3> fv{f[tri[0]], f[tri[1]], f[tri[2]]};
    const Point p0 = m.point(tri[0]), p1 = m.point(tri[1]), p2 = m.point(tri[2]);
    const double area = m.area(t);
    std::vector<std::array<Bary, 3>> pieces;
    if (clip) pieces = clip_above(fv, s.psi_bd);
    else pieces.push_back({Bary{1, 0, 0}, Bary{0, 1, 0}, Bary{0, 0, 1}});
    for (const auto& piece : pieces) {
      const double sub = area * bary_det(piece);
      for (std::size_t q = 0; q < rule.weight.size(); ++q) {
        Bary l{};
        for (int k = 0; k < 3; ++k)
          for (int c = 0; c < 3; ++c) l[c] += rule.bary[q][k] * piece[k][c];
        const double x = l[0] * p0.x + l[1] * p1.x + l[2] * p2.x;
        const double psi = l[0] * fv[0] + l[1] * fv[1] + l[2] * fv[2];
        const double val = rule.weight[q] * sub * p.density(x, (psi - s.psi_bd) * scale);
        sink(tri, l, val);
      }
    }
  };
  for (int t : s.plasma_triangles) do_triangle(t, false);
  for (int t : s.cut_triangles) do_triangle(t, true);
}

}  // namespace

Eigen::VectorXd plasma_source(const NodalField& f, const PlasmaState& s, const ProfileParams& p) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f.size()));
  integrate_plasma(f, s, p, [&](const Triangle& tri, const Bary& l, double val) {
    for (int i = 0; i < 3; ++i) b[tri[i]] += val * l[i];
  });
  return b;
}

double plasma_current(const NodalField& f, const PlasmaState& s, const ProfileParams& p) {
  double total = 0.0;
  integrate_plasma(f, s, p, [&](const Triangle&, const Bary&, double val) { total += val; });
  return total;
}

NodalField initial_guess(MeshPtr m, Point center, double a, double b, double K) {
  if (a == 0.0 || b == 0.0) throw std::invalid_argument("initial guess: zero semi-axis");
  NodalField f = NodalField::zeros(m);
  for (std::size_t v = 0; v < m->num_vertices(); ++v) {
    const auto& vx = m->vertex(static_cast<int>(v));
    if (vx.axis) continue;
    const double dx = (vx.p.x - center.x) / a, dy = (vx.p.y - center.y) / b;
    f[v] = -(dx * dx + dy * dy + K);
  }
  return f;
}

std::vector<double> tolerance_schedule(int refinements) {
  std::vector<double> tol;
  for (int i = 0; i <= refinements; ++i) tol.push_back(std::pow(10.0, -11.0 * (i + 1) / (refinements + 1.0)));
  return tol;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::no_confinement: return "no_confinement";
    case SolveStatus::not_converged: return "not_converged";
    case SolveStatus::diverged: return "diverged";
  }
  return "not_converged";
}

namespace {

double sup_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

struct LevelSystem {
  DofMap dofs;
  Eigen::SimplicialLDLT<SparseMatrix> solver;
  Eigen::VectorXd coil_load;

  LevelSystem(const TriMesh& m, const ReactorGeometry& g, const CurrentVector& currents, double mu0, int order)
      : dofs(DofMap::axis_eliminated(m)) {
    solver.compute(assemble_free_boundary_operator(m, mu0, order));
    if (solver.info() != Eigen::Success) throw std::runtime_error("factorization of the free-boundary operator failed");
    coil_load = assemble_coil_load(m, coil_current_density(g, currents));
  }

  std::vector<double> solve(const Eigen::VectorXd& load) const {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t d = 0; d < dofs.size(); ++d) rhs[d] = load[dofs.vertex_of_dof[d]];
    const Eigen::VectorXd x = solver.solve(rhs);
    std::vector<double> out(dofs.dof_of_vertex.size(), 0.0);
    for (std::size_t d = 0; d < dofs.size(); ++d) out[dofs.vertex_of_dof[d]] = x[d];
    return out;
  }
};

}  // namespace

EquilibriumSolution solve_free_boundary(const ReactorGeometry& g, MeshPtr coarse, const CurrentVector& currents,
                                        const ProfileParams& p, const SolverOptions& opts, const NodalField* start) {
  p.validate();
  EquilibriumSolution sol;
  const auto tol = tolerance_schedule(opts.refinements);
  MeshPtr mesh = std::move(coarse);
  NodalField psi = start ? *start : initial_guess(mesh, opts.guess.center, opts.guess.a, opts.guess.b, opts.guess.K);
  bool from_guess = start == nullptr;

  for (int level = 0; level <= opts.refinements; ++level) {
    sol.mesh_sequence.push_back(mesh);
    const LevelSystem sys(*mesh, g, currents, p.mu0, opts.boundary_order);

    if (p.lambda_s == 0.0) {
      // vacuum field: one linear solve, nothing to iterate
      psi = NodalField(mesh, sys.solve(sys.coil_load));
      sol.iterations.push_back(1);
      sol.residual_history.push_back(0.0);
      sol.field = psi;
      sol.state = plasma_state(psi, g);
      sol.status = SolveStatus::converged;
      return sol;
    }

    const double level_tol = opts.tol_override.value_or(tol[level]);
    double prev_update = std::numeric_limits<double>::infinity();
    int growing = 0, it = 0;
    double best_update = std::numeric_limits<double>::infinity();
    std::vector<Eigen::VectorXd> xs, rs;  // Anderson history
    bool converged = false;
    while (it < opts.max_iter) {
      ++it;
      PlasmaState st = plasma_state(psi, g);
      if (st.boundary_type == BoundaryType::no_confinement) {
        sol.status = SolveStatus::no_confinement;
        sol.message = st.analysis.message;
        sol.field = psi;
        sol.state = std::move(st);
        sol.iterations.push_back(it);
        return sol;
      }
      Eigen::VectorXd load = sys.coil_load + plasma_source(psi, st, p);
      const std::vector<double> fresh = sys.solve(load);
      const auto n = static_cast<Eigen::Index>(fresh.size());
      Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(psi.values.data(), n);
      Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(fresh.data(), n) - x;
      const double norm = sup_norm(fresh);
      const double update = norm > 0 ? r.lpNorm<Eigen::Infinity>() / norm : 0.0;
      if (from_guess) {
        // the guess only sets the first plasma domain; its scale is arbitrary
        psi.values = fresh;
        from_guess = false;
      } else {
        Eigen::VectorXd next = x + opts.theta * r;
        if (update > 2.0 * prev_update) {
          xs.clear();
          rs.clear();
        }
        if (opts.anderson_depth > 0 && update < opts.anderson_start) {
          xs.push_back(x);
          rs.push_back(r);
          if (static_cast<int>(xs.size()) > opts.anderson_depth + 1) {
            xs.erase(xs.begin());
            rs.erase(rs.begin());
          }
          const auto k = static_cast<Eigen::Index>(xs.size()) - 1;
          if (k > 0) {
            Eigen::MatrixXd dr(n, k), dx(n, k);
            for (Eigen::Index j = 0; j < k; ++j) {
              dr.col(j) = rs[j + 1] - rs[j];
              dx.col(j) = xs[j + 1] - xs[j];
            }
            const Eigen::VectorXd c = dr.colPivHouseholderQr().solve(r);
            next -= (dx + opts.theta * dr) * c;
          }
        }
        Eigen::Map<Eigen::VectorXd>(psi.values.data(), n) = next;
      }
      sol.residual_history.push_back(update);
      if (update <= level_tol) {
        converged = true;
        break;
      }
      growing = update > prev_update ? growing + 1 : 0;
      if (it > 1) best_update = std::min(best_update, update);
      prev_update = update;
      if (growing >= 3 && update > 10.0 * best_update) {
        sol.status = SolveStatus::diverged;
        sol.message = "update norm grew for 3 consecutive iterations to 10x its minimum at level " + std::to_string(level);
        break;
      }
    }
    sol.iterations.push_back(it);
    if (!converged) {
      if (sol.status != SolveStatus::diverged) {
        sol.status = SolveStatus::not_converged;
        sol.message = "no convergence in " + std::to_string(opts.max_iter) + " iterations at level " +
                      std::to_string(level);
      }
      sol.field = psi;
      sol.state = plasma_state(psi, g);
      return sol;
    }
    if (level < opts.refinements) {
      const PlasmaState st = plasma_state(psi, g);
      if (st.boundary_type == BoundaryType::no_confinement) {
        sol.status = SolveStatus::no_confinement;
        sol.message = st.analysis.message;
        sol.field = psi;
        sol.state = st;
        return sol;
      }
      auto fine = std::make_shared<const TriMesh>(refine_marked(*mesh, mark_near_separatrix(psi, st.psi_bd, opts.marking_alpha)));
      psi = interpolate_field(psi, fine);
      mesh = fine;
    }
  }

  sol.field = psi;
  sol.state = plasma_state(psi, g);
  if (sol.state.boundary_type == BoundaryType::no_confinement) {
    sol.status = SolveStatus::no_confinement;
    sol.message = sol.state.analysis.message;
    return sol;
  }
  sol.status = SolveStatus::converged;
  sol.plasma_current = plasma_current(psi, sol.state, p);
  return sol;
}

}  // namespace tokuq
