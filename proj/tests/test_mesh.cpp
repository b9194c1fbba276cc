#include <doctest.h>

#include <cmath>
#include <map>

#include "support.hpp"
#include "tokuq/projection.hpp"

using namespace tokuq;

namespace {

// No edge shared by more than two triangles and no vertex strictly inside an
// edge that only one triangle owns (a hanging node).
bool conforming(const TriMesh& m) {
  std::map<Edge, int> count;
  for (const auto& t : m.triangles())
    for (int k = 0; k < 3; ++k) ++count[make_edge(t[k], t[(k + 1) % 3])];
  for (const auto& [e, n] : count) {
    if (n > 2) return false;
    if (n == 2) continue;
    const Point a = m.point(e.a), b = m.point(e.b);
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
      const Point p = m.point(static_cast<int>(v));
      if (distance_to_segment(p, a, b) < 1e-12 && distance(p, a) > 1e-12 && distance(p, b) > 1e-12) return false;
    }
  }
  return true;
}

double max_interior_edge(const TriMesh& m) {
  double h = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t)
    if (inside_vessel(m.region(static_cast<int>(t)))) h = std::max(h, m.max_edge_length(static_cast<int>(t)));
  return h;
}

}  // namespace

TEST_CASE("bundled mesh passes the audit") {
  const ReactorGeometry g = test::iter_geometry();
  const MeshPtr m = test::iter_mesh(g);
  CHECK(audit_mesh(*m) == "");
  CHECK(m->gamma_radius() == g.gamma_radius);
  double area = 0.0;
  for (std::size_t t = 0; t < m->num_triangles(); ++t) area += m->area(static_cast<int>(t));
  CHECK(area == doctest::Approx(M_PI * g.gamma_radius * g.gamma_radius / 2).epsilon(2e-3));
  // coil triangles cover the coil rectangles
  std::vector<double> coil_area(g.coils.size(), 0.0);
  for (std::size_t t = 0; t < m->num_triangles(); ++t)
    if (m->region(static_cast<int>(t)).kind == RegionKind::coil) coil_area[m->region(static_cast<int>(t)).coil] += m->area(static_cast<int>(t));
  for (std::size_t i = 0; i < g.coils.size(); ++i) CHECK(coil_area[i] == doctest::Approx(g.coils[i].area()).epsilon(1e-9));
}

TEST_CASE("mesh text round trip") {
  const MeshPtr m = test::rectangle(1, 2, 0, 1, 3, 2);
  const TriMesh r = parse_mesh(mesh_to_string(*m), m->gamma_radius());
  CHECK(r.num_vertices() == m->num_vertices());
  CHECK(r.triangles() == m->triangles());
  CHECK(r.hash() == m->hash());
  CHECK_THROWS_AS(parse_mesh("# tokuq mesh v1\nnodes 2\n", 1.0), MeshError);
}

TEST_CASE("point location") {
  const MeshPtr m = test::rectangle(1, 2, 0, 1, 4, 4);
  for (std::size_t t = 0; t < m->num_triangles(); ++t) {
    const auto loc = m->locate(m->centroid(static_cast<int>(t)));
    REQUIRE(loc);
    CHECK(loc->triangle == static_cast<int>(t));
    for (double b : loc->bary) CHECK(b == doctest::Approx(1.0 / 3));
  }
  // shared vertex: lowest incident triangle, one coordinate 1
  const int v = 7;
  const auto loc = m->locate(m->point(v));
  REQUIRE(loc);
  const auto& inc = m->vertex_triangles(v);
  CHECK(loc->triangle == *std::min_element(inc.begin(), inc.end()));
  CHECK(*std::max_element(loc->bary.begin(), loc->bary.end()) == doctest::Approx(1.0));
  CHECK_FALSE(m->locate({5.0, 0.5}));
}

TEST_CASE("marking near the separatrix") {
  const MeshPtr m = test::rectangle(1, 2, 0, 1, 8, 8);
  const NodalField c = test::sample(m, [](Point) { return 1.0; });
  CHECK(mark_near_separatrix(c, 1.0, 0.05).size() == m->num_triangles());

  // distance from the line x = 1 shifted by one: band |f - 1| <= 0.05
  const NodalField f = test::sample(m, [](Point p) { return p.x; });
  const auto marked = mark_near_separatrix(f, 1.5, 0.05);
  for (std::size_t t = 0; t < m->num_triangles(); ++t) {
    double lo = 1e9, hi = -1e9;
    for (int v : m->triangle(static_cast<int>(t))) {
      lo = std::min(lo, f[v]);
      hi = std::max(hi, f[v]);
    }
    const bool touches = hi >= 1.45 && lo <= 1.55;
    CHECK(marked.count(static_cast<int>(t)) == (touches ? 1u : 0u));
  }
}

TEST_CASE("refinement") {
  const MeshPtr two = test::rectangle(1, 2, 0, 1, 1, 1);
  REQUIRE(two->num_triangles() == 2);
  SUBCASE("nothing marked") {
    const TriMesh r = refine_marked(*two, {});
    CHECK(r.num_vertices() == two->num_vertices());
    CHECK(r.triangles() == two->triangles());
  }
  SUBCASE("one triangle of two") {
    const TriMesh r = refine_marked(*two, {0});
    CHECK(r.num_triangles() == 6);
    CHECK(r.num_vertices() == 7);
    CHECK(audit_mesh(r) == "");
    CHECK(conforming(r));
  }
  SUBCASE("all marked: one new vertex per edge") {
    const MeshPtr m = test::rectangle(1, 2, 0, 1, 5, 3);
    std::set<int> all;
    for (std::size_t t = 0; t < m->num_triangles(); ++t) all.insert(static_cast<int>(t));
    const TriMesh r = refine_marked(*m, all);
    CHECK(r.num_vertices() == m->num_vertices() + m->num_edges());
    CHECK(r.num_triangles() == 4 * m->num_triangles());
  }
  SUBCASE("uniform interior refinement") {
    CHECK(uniform_refine_interior(*two, 0).num_triangles() == 2);
    CHECK(uniform_refine_interior(*two, 1).num_triangles() == 8);
    const ReactorGeometry g = test::iter_geometry();
    const MeshPtr m = test::iter_mesh(g);
    const TriMesh r = uniform_refine_interior(*m, 2);
    CHECK(audit_mesh(r) == "");
    CHECK(max_interior_edge(r) <= 0.25 * max_interior_edge(*m) + 1e-12);
  }
}

TEST_CASE("L2 projection") {
  const MeshPtr m = test::rectangle(1, 2, -0.5, 0.5, 6, 6);
  const NodalField f = test::sample(m, [](Point p) { return std::sin(3 * p.x) * p.y; });
  const NodalField same = project_field(f, m).field;
  for (std::size_t v = 0; v < m->num_vertices(); ++v) CHECK(same[v] == doctest::Approx(f[v]).epsilon(1e-12));

  const MeshPtr fine = std::make_shared<const TriMesh>(uniform_refine_interior(*m, 2));
  const NodalField affine = test::sample(m, [](Point p) { return p.x + 2 * p.y; });
  const NodalField pa = project_field(affine, fine).field;
  for (std::size_t v = 0; v < fine->num_vertices(); ++v) {
    const Point p = fine->point(static_cast<int>(v));
    CHECK(std::abs(pa[v] - (p.x + 2 * p.y)) < 1e-10);
  }
  const NodalField ia = interpolate_field(affine, fine);
  for (std::size_t v = 0; v < fine->num_vertices(); ++v) CHECK(ia[v] == doctest::Approx(pa[v]).epsilon(1e-10));
}
