#pragma once

#include <cmath>
#include <functional>
#include <numbers>

namespace tokuq::test {

using LD = long double;

// adaptive Simpson in long double
inline LD simpson(const std::function<LD(LD)>& f, LD a, LD b, LD fa, LD fm, LD fb, LD whole, LD tol, int depth) {
  const LD m = (a + b) / 2, lm = (a + m) / 2, rm = (m + b) / 2;
  const LD flm = f(lm), frm = f(rm);
  const LD left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline LD integrate(const std::function<LD(LD)>& f, LD a, LD b, LD tol = 1e-17L) {
  const LD fa = f(a), fb = f(b), fm = f((a + b) / 2);
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, 40);
}

struct KE {
  LD K, E;
};

inline KE quadrature_KE(LD k) {
  const LD half_pi = std::numbers::pi_v<LD> / 2;
  const LD K = integrate([k](LD t) { return 1 / std::sqrt(1 - k * k * std::sin(t) * std::sin(t)); }, 0, half_pi);
  const LD E = integrate([k](LD t) { return std::sqrt(1 - k * k * std::sin(t) * std::sin(t)); }, 0, half_pi);
  return {K, E};
}

}  // namespace tokuq::test
