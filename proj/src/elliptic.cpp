#include <cmath>
#include <numbers>

#include "tokuq/kernels.hpp"

namespace tokuq {

EllipticKE elliptic_KE_complement(double kc2) {
  if (!(kc2 > 0.0) || kc2 > 1.0) throw DomainError("elliptic integral: modulus outside [0,1)");
  // AGM with a0 = 1, b0 = k', c0 = k; E = K (1 - sum 2^(n-1) c_n^2)
  double a = 1.0, b = std::sqrt(kc2);
  double c2 = 1.0 - kc2;  // c_0^2 = k^2
  double sum = 0.5 * c2;
  double pow2 = 0.5;
  for (int it = 0; it < 64; ++it) {
    const double an = 0.5 * (a + b);
    const double bn = std::sqrt(a * b);
    const double cn = 0.5 * (a - b);
    pow2 *= 2.0;
    sum += pow2 * cn * cn;
    a = an;
    b = bn;
    if (std::abs(cn) <= 1e-17 * a) break;
  }
  const double K = std::numbers::pi / (2.0 * a);
  return {K, K * (1.0 - sum)};
}

EllipticKE elliptic_KE(double k) {
  if (!(k >= 0.0) || !(k < 1.0)) throw DomainError("elliptic integral: modulus outside [0,1)");
  return elliptic_KE_complement((1.0 - k) * (1.0 + k));
}

double kernel_N(Point p, double rho) {
  if (!(p.x > 0.0)) throw DomainError("kernel N evaluated on the symmetry axis");
  const double dp = std::hypot(p.x, rho + p.y);
  const double dm = std::hypot(p.x, rho - p.y);
  return (1.0 / dp + 1.0 / dm - 1.0 / rho) / p.x;
}

KernelModulus kernel_modulus(Point p1, Point p2) {
  const double dy2 = (p1.y - p2.y) * (p1.y - p2.y);
  const double sx = p1.x + p2.x, dx = p1.x - p2.x;
  const double den = sx * sx + dy2;
  return {4.0 * p1.x * p2.x / den, (dx * dx + dy2) / den};
}

double kernel_M(Point p1, Point p2) {
  if (!(p1.x > 0.0) || !(p2.x > 0.0)) throw DomainError("kernel M evaluated on the symmetry axis");
  const auto [k2, kc2] = kernel_modulus(p1, p2);
  if (!(kc2 > 0.0)) throw DomainError("kernel M singular at coincident points");
  const auto [K, E] = elliptic_KE_complement(kc2);
  const double k = std::sqrt(k2);
  const double x12 = p1.x * p2.x;
  // (2 - k^2) / (2 - 2k^2) = (1 + k'^2) / (2 k'^2)
  return k / (2.0 * std::numbers::pi * x12 * std::sqrt(x12)) * ((1.0 + kc2) / (2.0 * kc2) * E - K);
}

double greens_psi(Point source, Point p) {
  const auto [k2, kc2] = kernel_modulus(source, p);
  const auto [K, E] = elliptic_KE_complement(kc2);
  const double k = std::sqrt(k2);
  return kMu0 / (2.0 * std::numbers::pi) * std::sqrt(source.x * p.x) * ((2.0 - k2) * K - 2.0 * E) / k;
}

}  // namespace tokuq
