#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "support.hpp"
#include "tokuq/field_analysis.hpp"

using namespace tokuq;

namespace {

int nearest_vertex(const TriMesh& m, Point p) {
  int best = 0;
  for (std::size_t v = 1; v < m.num_vertices(); ++v)
    if (distance(m.point(static_cast<int>(v)), p) < distance(m.point(best), p)) best = static_cast<int>(v);
  return best;
}

std::vector<Point> ellipse(Point c, double a, double b, int n) {
  std::vector<Point> pts;
  for (int i = 0; i <= n; ++i) {
    const double t = 2 * std::numbers::pi * (i % n) / n;
    pts.push_back({c.x + a * std::cos(t), c.y + b * std::sin(t)});
  }
  // exact extremes
  pts[0] = {c.x + a, c.y};
  pts[n / 4] = {c.x, c.y + b};
  pts[n / 2] = {c.x - a, c.y};
  pts[3 * n / 4] = {c.x, c.y - b};
  pts[n] = pts[0];
  return pts;
}

}  // namespace

TEST_CASE("saddle candidates") {
  const MeshPtr m = test::rectangle(1, 3, -1, 1, 10, 10);
  const int centre = nearest_vertex(*m, {2, 0});
  REQUIRE(distance(m->point(centre), {2, 0}) < 1e-12);

  const auto s = saddle_candidates(test::sample(m, [](Point p) { return (p.x - 2) * (p.x - 2) - p.y * p.y; }));
  CHECK(s == std::vector<int>{centre});
  CHECK(saddle_candidates(test::sample(m, [](Point p) { return 2 * p.x - 0.3 * p.y; })).empty());
  CHECK(saddle_candidates(test::sample(m, [](Point p) { return (p.x - 2) * (p.x - 2) + p.y * p.y; })).empty());
}

TEST_CASE("gradient recovery") {
  const MeshPtr m = test::rectangle(1, 3, -1, 1, 8, 8);
  const auto g = recover_gradient(test::sample(m, [](Point p) { return 3 * p.x - p.y; }));
  for (std::size_t v = 0; v < m->num_vertices(); ++v) {
    if (m->on_boundary(static_cast<int>(v))) continue;
    CHECK(g.grad[v].x == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(g.grad[v].y == doctest::Approx(-1.0).epsilon(1e-12));
  }
  for (Point q : recover_gradient(test::sample(m, [](Point) { return 4.0; })).grad) {
    CHECK(q.x == 0.0);
    CHECK(q.y == 0.0);
  }

  // interior error of d/dx x^2 under refinement
  auto err = [](int n) {
    const MeshPtr mm = test::rectangle(1, 3, -1, 1, n, n);
    const auto r = recover_gradient(test::sample(mm, [](Point p) { return p.x * p.x; }));
    double e = 0.0;
    for (std::size_t v = 0; v < mm->num_vertices(); ++v)
      if (!mm->on_boundary(static_cast<int>(v))) e = std::max(e, std::abs(r.grad[v].x - 2 * mm->point(static_cast<int>(v)).x));
    return e;
  };
  const double e1 = err(8), e2 = err(16), e3 = err(32);
  if (e2 > 1e-13) {
    CHECK(std::log2(e1 / e2) >= 1.8);
    CHECK(std::log2(e2 / e3) >= 1.8);
  } else {
    CHECK(e1 < 1e-12);  // superconvergent: exact on uniform patches
  }
}

TEST_CASE("x-point selection") {
  const MeshPtr m = test::rectangle(1, 3, -1, 1, 20, 20);
  const int centre = nearest_vertex(*m, {2, 0});
  NodalField f = test::sample(m, [](Point p) { return (p.x - 2) * (p.x - 2) - p.y * p.y; });
  const auto g0 = recover_gradient(f);
  CHECK(select_xpoint(f, {centre}, g0) == centre);
  CHECK_FALSE(select_xpoint(f, {}, g0));

  // localized oscillation away from the saddle adds spurious candidates
  const Point bump{2.6, 0.4};
  const double k = std::numbers::pi / 0.2;
  for (std::size_t v = 0; v < m->num_vertices(); ++v) {
    const Point p = m->point(static_cast<int>(v));
    if (distance(p, bump) < 0.25) f[v] += 0.2 * std::sin(k * (p.x - bump.x)) * std::sin(k * (p.y - bump.y));
  }
  const auto cand = saddle_candidates(f);
  CHECK(cand.size() > 1);
  CHECK(std::find(cand.begin(), cand.end(), centre) != cand.end());
  CHECK(select_xpoint(f, cand, recover_gradient(f)) == centre);

  // exact tie: lower index
  const MeshPtr sym = test::rectangle(1, 3, -1, 1, 8, 8);
  const NodalField flat = test::sample(sym, [](Point) { return 1.0; });
  CHECK(select_xpoint(flat, {30, 12, 40}, recover_gradient(flat)) == 12);
}

TEST_CASE("magnetic axis") {
  const ReactorGeometry g = test::iter_geometry();
  const MeshPtr m = test::iter_mesh(g);
  const Point c{6.31, 0.47};
  const auto a = find_axis(test::sample(m, [&](Point p) { return -((p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y)); }));
  CHECK(a.vertex == nearest_vertex(*m, c));
  CHECK_FALSE(a.degenerate);
  CHECK(find_axis(test::sample(m, [](Point) { return 2.0; })).degenerate);
}

TEST_CASE("contours") {
  const MeshPtr m = test::rectangle(0.5, 1.5, -1.5, 1.5, 12, 30);
  const auto lines = extract_contour(test::sample(m, [](Point p) { return p.x; }), 1.05);
  REQUIRE(lines.size() == 1);
  CHECK_FALSE(lines[0].closed);
  for (Point p : lines[0].points) CHECK(p.x == doctest::Approx(1.05).epsilon(1e-14));
  CHECK(extract_contour(test::sample(m, [](Point p) { return p.x; }), 9.0).empty());

  auto deviation = [](int n) {
    const MeshPtr mm = test::rectangle(1.0, 5.0, -2.0, 2.0, n, n);
    const auto ls = extract_contour(test::sample(mm, [](Point p) { return (p.x - 3) * (p.x - 3) + p.y * p.y; }), 1.0);
    REQUIRE(ls.size() == 1);
    CHECK(ls[0].closed);
    CHECK(ls[0].points.front() == ls[0].points.back());
    double d = 0.0;
    for (Point p : ls[0].points) d = std::max(d, std::abs(std::hypot(p.x - 3, p.y) - 1.0));
    return d;
  };
  const double d1 = deviation(16), d2 = deviation(32), d3 = deviation(64);
  CHECK(d2 < d1);
  CHECK(d3 < d2);
  CHECK(d3 < 1e-3);
}

TEST_CASE("boundary classification") {
  const ReactorGeometry g = test::iter_geometry();
  const MeshPtr m = test::iter_mesh(g);

  SUBCASE("paraboloid touches the limiter") {
    const Point c{6.2, 0.5};
    const NodalField f = test::sample(m, [&](Point p) { return -((p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y)); });
    // oracle: highest nodal value on the limiter polyline
    double top = -1e300;
    int argmax = -1;
    for (std::size_t v = 0; v < m->num_vertices(); ++v)
      if (distance_to_polyline(g.limiter, m->point(static_cast<int>(v)), true) < 1e-9 && f[v] > top) {
        top = f[v];
        argmax = static_cast<int>(v);
      }
    const BoundaryAnalysis b = classify_boundary(f, g);
    CHECK(b.kind == BoundaryType::limited);
    CHECK(b.psi_bd == doctest::Approx(top).epsilon(1e-12));
    REQUIRE(b.touch);
    CHECK(distance(*b.touch, m->point(argmax)) < 1e-9);
    CHECK(b.boundary.points.front() == b.boundary.points.back());
  }

  SUBCASE("saddle below the axis gives a diverted plasma") {
    // -2 (x - 6.2)^2 + t^2 - t^3/4.5, t = y + 2.5: saddle at (6.2, -2.5), axis at (6.2, 0.5)
    const NodalField f = test::sample(m, [](Point p) {
      const double t = p.y + 2.5;
      return -2 * (p.x - 6.2) * (p.x - 6.2) + t * t - t * t * t / 4.5;
    });
    const BoundaryAnalysis b = classify_boundary(f, g);
    CHECK(b.kind == BoundaryType::diverted);
    REQUIRE(b.xpoint);
    CHECK(distance(m->point(*b.xpoint), {6.2, -2.5}) < 0.15);
    CHECK(b.psi_bd == f[*b.xpoint]);
    CHECK(distance(b.axis.point, {6.2, 0.5}) < 0.15);
    // boundary on the level set, inside the limiter, above the saddle
    for (Point p : b.boundary.points) {
      CHECK(std::abs(*f.evaluate(p) - b.psi_bd) < 1e-9);
      CHECK(p.y >= -2.5 - 0.15);
      CHECK(point_in_polygon(g.limiter, p));
    }
  }

  SUBCASE("no maximum inside the limiter") {
    const NodalField f = test::sample(m, [](Point p) { return p.x; });
    CHECK(classify_boundary(f, g).kind == BoundaryType::no_confinement);
  }
}

TEST_CASE("strike points") {
  const MeshPtr m = test::rectangle(1, 2, 0, 1, 7, 7);
  const NodalField f = test::sample(m, [](Point p) { return p.x; });
  const auto s = strike_points(f, 1.55, {{{1.2, 0.1}, {1.9, 0.8}}});
  REQUIRE(s.size() == 1);
  CHECK(std::abs(s[0].x - 1.55) < 1e-12);
  CHECK(std::abs(s[0].y - 0.45) < 1e-12);
  CHECK(strike_points(f, 1.55, {{{1.3, 0.1}, {1.3, 0.9}}}).empty());
}

TEST_CASE("shaping parameters") {
  const auto e = ellipse({2, 0}, 1, 2, 400);
  const ShapingParams s = shaping(e);
  CHECK(s.r_geo == 2.0);
  CHECK(s.a_minor == 1.0);
  CHECK(s.eps == 0.5);
  CHECK(s.kappa_e == 2.0);
  CHECK(s.delta_u == 0.0);
  CHECK(s.delta_l == 0.0);

  auto shifted = e;
  shifted[100] = {1.5, 2.0};
  CHECK(shaping(shifted).delta_u == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(shaping({{0, 0}, {1, 1}, {0, 0}}), std::invalid_argument);
}
