#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "tokuq/field_analysis.hpp"
#include "tokuq/geometry.hpp"
#include "tokuq/kernels.hpp"
#include "tokuq/mesh.hpp"

namespace tokuq {

/// Luxon-Brown profile: dp/dpsi = lambda beta/x0 (1 - s^alpha)^gamma,
/// g dg/dpsi = lambda mu0 x0 (1 - beta) (1 - s^alpha)^gamma, with
/// psiN = (psi - psi_bd)/(psi_ma - psi_bd). By default s = 1 - psiN, so the
/// current peaks on the magnetic axis and vanishes on the boundary; with
/// peaked_on_axis = false, s = psiN as in the printed formula.
struct ProfileParams {
  double alpha_p = 2.0;
  double gamma_p = 1.5;
  double beta_p = 0.5;
  double lambda_s = 0.0;
  double x0 = 1.0;
  double mu0 = kMu0;
  bool peaked_on_axis = true;

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
  /// Plasma current density at radius x for normalised flux psi_n.
  double density(double x, double psi_n) const;
};

struct PlasmaState {
  double psi_ma = 0.0;
  double psi_bd = 0.0;
  Point axis;
  BoundaryType boundary_type = BoundaryType::no_confinement;
  std::vector<int> plasma_triangles;  // every vertex inside the core
  std::vector<int> cut_triangles;     // crossed by the boundary level line
  std::optional<Point> xpoint;
  std::optional<Point> contact_point;
  BoundaryAnalysis analysis;
};

PlasmaState plasma_state(const NodalField& f, const ReactorGeometry& g);

/// Plasma part of the load (nodal, vertex-indexed). Cut triangles are clipped
/// at the linear boundary level line. Throws std::domain_error when
/// psi_ma == psi_bd.
Eigen::VectorXd plasma_source(const NodalField& f, const PlasmaState& s, const ProfileParams& p);

/// Total plasma current of the source above.
double plasma_current(const NodalField& f, const PlasmaState& s, const ProfileParams& p);

struct EllipseGuess {
  Point center{6.2, 0.5};
  double a = 2.0;
  double b = 3.0;
  double K = -1.0;
};

/// psi0 = -((x - xc)^2/a^2 + (y - yc)^2/b^2 + K), maximal at the centre,
/// zero on the axis. Throws std::invalid_argument if a or b is zero.
NodalField initial_guess(MeshPtr m, Point center, double a, double b, double K);

/// Relative update tolerance per level: 10^(-11 (i+1)/(R+1)), i = 0..R.
std::vector<double> tolerance_schedule(int refinements);

struct SolverOptions {
  int refinements = 0;
  double theta = 0.7;
  /// Anderson mixing depth on top of the damped update; 0 gives plain Picard.
  int anderson_depth = 5;
  /// Mixing starts once the relative update drops below this value.
  double anderson_start = 0.05;
  int max_iter = 50;
  std::optional<double> tol_override;
  double marking_alpha = 0.05;
  int boundary_order = 8;
  EllipseGuess guess;
};

enum class SolveStatus { converged, no_confinement, not_converged, diverged };
std::string to_string(SolveStatus s);

struct EquilibriumSolution {
  NodalField field;
  PlasmaState state;
  SolveStatus status = SolveStatus::not_converged;
  std::string message;
  std::vector<int> iterations;          // per refinement level
  std::vector<double> residual_history; // all levels, in order
  std::vector<MeshPtr> mesh_sequence;
  double plasma_current = 0.0;

  bool ok() const { return status == SolveStatus::converged; }
};

/// Damped Picard inside the adaptive loop. Failures are reported through
/// `status`, never thrown. `start` replaces the ellipse guess when given; it
/// must live on `coarse`.
EquilibriumSolution solve_free_boundary(const ReactorGeometry& g, MeshPtr coarse, const CurrentVector& currents,
                                        const ProfileParams& p, const SolverOptions& opts,
                                        const NodalField* start = nullptr);

}  // namespace tokuq
