#pragma once

#include <stdexcept>

#include "tokuq/geometry.hpp"

namespace tokuq {

inline constexpr double kMu0 = 4.0e-7 * 3.14159265358979323846;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct EllipticKE {
  double K;
  double E;
};

/// Complete elliptic integrals K(k), E(k) of modulus k, by the arithmetic-
/// geometric mean. Throws DomainError unless 0 <= k < 1.
EllipticKE elliptic_KE(double k);

/// Same integrals from the complementary parameter k'^2 = 1 - k^2, which is
/// the accurate input when k is close to 1.
EllipticKE elliptic_KE_complement(double kc2);

/// Kernel N(p) of the boundary mass term on the circle of radius rho.
double kernel_N(Point p, double rho);

/// Modulus kappa(p1, p2) and its complement 1 - kappa^2.
struct KernelModulus {
  double k2;
  double kc2;
};
KernelModulus kernel_modulus(Point p1, Point p2);

/// Double-integral kernel M(p1, p2). Throws DomainError when p1 == p2 or
/// either point is on the axis.
double kernel_M(Point p1, Point p2);

/// Poloidal flux per radian at p of a unit-current circular filament through
/// `source` (free-space Green's function of the Grad-Shafranov operator).
double greens_psi(Point source, Point p);

}  // namespace tokuq
