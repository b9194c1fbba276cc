#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace tokuq;

TEST_CASE("bundled geometry") {
  const ReactorGeometry g = test::iter_geometry();
  CHECK(g.coils.size() == 12);
  CHECK(g.limiter.size() >= 3);
  CHECK(polyline_is_simple(g.limiter, true));
  CHECK(g.reference_currents()[0] == doctest::Approx(-1.4e6));

  auto inside = [&](Point p) { return std::hypot(p.x, p.y) < g.gamma_radius; };
  for (const auto& c : g.coils) {
    CHECK(inside({c.center.x + c.width / 2, c.center.y + c.height / 2}));
    CHECK(inside({c.center.x + c.width / 2, c.center.y - c.height / 2}));
  }
  for (Point p : g.limiter) CHECK(inside(p));
  for (Point p : g.vessel_outer) CHECK(inside(p));
  for (const auto& d : g.divertor)
    for (Point p : d) CHECK(inside(p));
}

TEST_CASE("geometry validation") {
  const std::string base = R"({"gamma_radius": 4.0, "coils": [COILS],
    "limiter": [[1.0, -1.0], [2.0, -1.0], [2.0, 1.0], [1.0, 1.0]],
    "vessel_outer": [[0.8, -1.2], [2.2, -1.2], [2.2, 1.2], [0.8, 1.2]]})";
  auto with = [&](const std::string& coils) {
    std::string s = base;
    s.replace(s.find("COILS"), 5, coils);
    return s;
  };

  SUBCASE("coil on the wrong side of the axis") {
    const std::string text = with(R"({"id": 1, "center": [-1.0, 0.0], "width": 0.2, "height": 0.2, "current": 1.0})");
    CHECK_THROWS_WITH_AS(parse_geometry(text), doctest::Contains("coil in x <= 0 half-plane"), GeometryError);
  }
  SUBCASE("no coils is a vacuum problem") {
    const ReactorGeometry g = parse_geometry(with(""));
    CHECK(g.coils.empty());
    CHECK(g.reference_currents().size() == 0);
  }
  SUBCASE("coil outside Gamma") {
    const std::string text = with(R"({"id": 1, "center": [3.9, 0.0], "width": 0.4, "height": 0.2, "current": 1.0})");
    CHECK_THROWS_AS(parse_geometry(text), GeometryError);
  }
  SUBCASE("self-intersecting limiter") {
    std::string text = with("");
    text.replace(text.find("[2.0, 1.0], [1.0, 1.0]"), 22, "[1.0, 1.0], [2.0, 1.0]");
    CHECK_THROWS_WITH_AS(parse_geometry(text), doctest::Contains("self-intersects"), GeometryError);
  }
  SUBCASE("round trip") {
    const ReactorGeometry g = test::iter_geometry();
    const ReactorGeometry h = parse_geometry(geometry_to_string(g));
    CHECK(h.coils.size() == g.coils.size());
    CHECK(h.limiter == g.limiter);
    CHECK(h.reference_currents() == g.reference_currents());
  }
  CHECK_THROWS_WITH_AS(load_geometry("/nonexistent/x.geom"), doctest::Contains("/nonexistent/x.geom"), GeometryError);
}

TEST_CASE("coil current density") {
  ReactorGeometry g;
  g.gamma_radius = 10.0;
  g.coils = {Coil{1, "a", {3.0, 0.0}, 1.0, 1.0, 0.0}, Coil{2, "b", {5.0, 0.0}, 2.0, 1.0, 0.0}};
  const auto j = coil_current_density(g, CurrentVector{{-1.4e6, 3.0}});
  CHECK(j[0] == -1.4e6);
  CHECK(j[1] == 1.5);
  for (double v : coil_current_density(g, CurrentVector{{0.0, 0.0}})) CHECK(v == 0.0);
  CHECK_THROWS_AS(coil_current_density(g, CurrentVector{{1.0}}), GeometryError);
}

TEST_CASE("point classification") {
  const ReactorGeometry g = test::iter_geometry();
  for (std::size_t i = 0; i < g.coils.size(); ++i) {
    const RegionTag t = classify_point(g, g.coils[i].center);
    CHECK(t.kind == RegionKind::coil);
    CHECK(t.coil == static_cast<int>(i));
  }
  CHECK(classify_point(g, {2 * g.gamma_radius, 0.0}).kind == RegionKind::exterior);
  CHECK(classify_point(g, {0.0, 2 * g.gamma_radius}).kind == RegionKind::exterior);

  // magnetic axis of the reference equilibrium
  const Point axis{6.57, 0.62};
  REQUIRE(point_in_polygon(g.limiter, axis));
  CHECK(classify_point(g, axis).kind == RegionKind::inside_limiter);
  CHECK(classify_point(g, g.limiter[0]).kind == RegionKind::on_structure);
  CHECK(classify_point(g, 0.5 * (g.limiter[0] + g.vessel_outer[0])).kind != RegionKind::inside_limiter);
}

TEST_CASE("polygon helpers") {
  const std::vector<Point> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(polygon_area(sq) == doctest::Approx(1.0));
  CHECK(point_in_polygon(sq, {0.5, 0.5}));
  CHECK_FALSE(point_in_polygon(sq, {1.5, 0.5}));
  CHECK(distance_to_segment({0.5, 1.0}, {0, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(distance_to_polyline(sq, {0.5, 0.25}, true) == doctest::Approx(0.25));
  double t = 0.0;
  CHECK(segment_intersection({0, 0}, {2, 2}, {0, 2}, {2, 0}, t));
  CHECK(t == doctest::Approx(0.5));
  CHECK_FALSE(segment_intersection({0, 0}, {1, 0}, {0, 1}, {1, 1}, t));
}
