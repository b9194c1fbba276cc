#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <set>

#include "tokuq/sparse_grid.hpp"

using namespace tokuq;

namespace {

// Brute-force count of distinct nodes of the Smolyak grid.
std::size_t brute_force_size(int d, int level) {
  std::set<std::vector<double>> nodes;
  std::vector<int> idx(d, 1);
  std::function<void(int, int)> rec = [&](int dim, int budget) {
    if (dim == d) {
      std::vector<std::vector<double>> axes;
      for (int i : idx) axes.push_back(chebyshev_nodes(nodes_per_level(i)));
      std::vector<std::size_t> j(d, 0);
      while (true) {
        std::vector<double> p(d);
        for (int k = 0; k < d; ++k) p[k] = axes[k][j[k]];
        nodes.insert(p);
        int k = 0;
        while (k < d && ++j[k] == axes[k].size()) j[k++] = 0;
        if (k == d) break;
      }
      return;
    }
    for (int i = 0; i <= budget; ++i) {
      idx[dim] = i + 1;
      rec(dim + 1, budget - i);
    }
  };
  rec(0, level);
  return nodes.size();
}

Box unit_box(int d) { return Box{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)}; }

VectorFunction scalar(std::function<double(const std::vector<double>&)> f) {
  return [f](const std::vector<double>& x) -> std::optional<std::vector<double>> { return std::vector<double>{f(x)}; };
}

std::vector<std::vector<double>> random_points(const Box& b, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> out(n, std::vector<double>(b.dim()));
  for (auto& p : out)
    for (std::size_t k = 0; k < b.dim(); ++k) p[k] = b.lo[k] + u(rng) * (b.hi[k] - b.lo[k]);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST_CASE("one-dimensional nodes") {
  CHECK(nodes_per_level(1) == 1);
  CHECK(nodes_per_level(2) == 3);
  CHECK(nodes_per_level(4) == 9);
  CHECK_THROWS_AS(nodes_per_level(0), std::invalid_argument);
  CHECK(chebyshev_nodes(1) == std::vector<double>{0.5});
  CHECK(chebyshev_nodes(3) == std::vector<double>{0.0, 0.5, 1.0});
  const auto n5 = chebyshev_nodes(5);
  REQUIRE(n5.size() == 5);
  CHECK(n5[1] == doctest::Approx((1 - std::cos(std::numbers::pi / 4)) / 2).epsilon(1e-15));
  CHECK(n5[3] == doctest::Approx((1 + std::cos(std::numbers::pi / 4)) / 2).epsilon(1e-15));
  CHECK(n5[0] == 0.0);
  CHECK(n5[2] == 0.5);
  CHECK(n5[4] == 1.0);
  // nested, bit for bit
  const auto n9 = chebyshev_nodes(9);
  for (int j = 0; j < 5; ++j) CHECK(n9[2 * j] == n5[j]);
  CHECK_THROWS_AS(chebyshev_nodes(4), std::invalid_argument);
  CHECK_THROWS_AS(chebyshev_nodes(0), std::invalid_argument);
}

TEST_CASE("grid sizes") {
  const std::vector<std::uint64_t> d2{1, 5, 13, 29, 65, 145, 321, 705, 1537, 3329, 7169};
  const std::vector<std::uint64_t> d3{1, 7, 25, 69, 177, 441, 1073, 2561, 6017, 13953, 32001};
  const std::vector<std::uint64_t> d12{1, 25, 313, 2649, 17265};
  for (int l = 0; l <= 10; ++l) CHECK(grid_size(2, l) == d2[l]);
  for (int l = 0; l <= 10; ++l) CHECK(grid_size(3, l) == d3[l]);
  for (int l = 0; l <= 4; ++l) CHECK(grid_size(12, l) == d12[l]);
  for (int d = 1; d <= 4; ++d)
    for (int l = 0; l <= 4; ++l) {
      CHECK(grid_size(d, l) == brute_force_size(d, l));
      CHECK(make_sparse_grid(d, l).size() == grid_size(d, l));
    }
  CHECK(full_grid_size(1, 1).value == 3);
  CHECK(full_grid_size(12, 3).value == 282429536481ull);
  CHECK(full_grid_size(12, 4).value == 582622237229761ull);
  const auto big = full_grid_size(40, 10);
  CHECK(big.saturated);
  CHECK(big.approx == doctest::Approx(std::pow(1025.0, 40)).epsilon(1e-12));
}

TEST_CASE("lower levels are prefixes") {
  const SparseGrid g3 = make_sparse_grid(3, 3);
  const SparseGrid g2 = make_sparse_grid(3, 2);
  for (std::size_t i = 0; i < g2.size(); ++i) CHECK(g3.point[i] == g2.point[i]);
  std::set<std::vector<double>> distinct(g3.point.begin(), g3.point.end());
  CHECK(distinct.size() == g3.size());
}

TEST_CASE("interpolation") {
  SUBCASE("constant") {
    const Surrogate s = build_surrogate(scalar([](const auto&) { return 4.25; }), 2, 3, unit_box(2));
    for (Eigen::Index i = 1; i < s.surplus.rows(); ++i) CHECK(s.surplus(i, 0) == 0.0);
    for (const auto& p : random_points(s.box, 20, 1)) CHECK(eval_surrogate(s, p)[0] == doctest::Approx(4.25).epsilon(1e-15));
  }
  SUBCASE("linear functions from level 1") {
    for (int d = 1; d <= 4; ++d) {
      const Box b{std::vector<double>(d, -2.0), std::vector<double>(d, 3.0)};
      auto f = [d](const std::vector<double>& x) {
        double s = 0.7;
        for (int k = 0; k < d; ++k) s += (k + 1.5) * x[k];
        return s;
      };
      const Surrogate s = build_surrogate(scalar(f), d, 1, b);
      for (const auto& p : random_points(b, 50, d)) CHECK(std::abs(eval_surrogate(s, p)[0] - f(p)) <= 1e-10 * std::abs(f(p)) + 1e-12);
    }
  }
  SUBCASE("product of squares") {
    auto f = [](const std::vector<double>& x) { return x[0] * x[0] * x[1] * x[1]; };
    const Box b{{-1.0, 0.5}, {2.0, 1.5}};
    const Surrogate s = build_surrogate(scalar(f), 2, 3, b);
    for (const auto& p : random_points(b, 100, 7)) CHECK(std::abs(eval_surrogate(s, p)[0] - f(p)) <= 1e-8);
  }
  SUBCASE("grid nodes reproduce samples") {
    std::mt19937_64 rng(5);
    auto f = [](const std::vector<double>& x) {
      return std::vector<double>{std::exp(x[0] - x[1] * x[2]), std::sin(3 * x[0]) + x[2], 1e6 * x[1]};
    };
    const Box b{{0, 1, 2}, {1, 2, 4}};
    const Surrogate s = build_surrogate([&](const auto& x) -> std::optional<std::vector<double>> { return f(x); }, 3, 3, b);
    for (const auto& u : s.grid.point) {
      const auto x = b.from_unit(u);
      const auto got = eval_surrogate(s, x), want = f(x);
      for (std::size_t c = 0; c < want.size(); ++c) CHECK(std::abs(got[c] - want[c]) <= 1e-10 * std::abs(want[c]));
    }
  }
  SUBCASE("outside the box") {
    const Surrogate s = build_surrogate(scalar([](const auto& x) { return x[0]; }), 1, 2, unit_box(1));
    CHECK_THROWS_AS(eval_surrogate(s, {1.1}), SurrogateError);
    CHECK(eval_surrogate(s, {1.1}, true)[0] == doctest::Approx(1.1));
  }
}

TEST_CASE("refinement and truncation") {
  auto f = [](const std::vector<double>& x) { return std::exp(-(x[0] - 0.3) * (x[0] - 0.3) - 2 * (x[1] - 0.6) * (x[1] - 0.6)); };
  std::size_t calls = 0;
  const VectorFunction counted = [&](const std::vector<double>& x) -> std::optional<std::vector<double>> {
    ++calls;
    return std::vector<double>{f(x)};
  };
  const Surrogate s1 = build_surrogate(counted, 2, 1, unit_box(2));
  CHECK(calls == 5);
  calls = 0;
  const Surrogate s2 = refine_level(s1, counted);
  CHECK(calls == 8);
  const Surrogate direct = build_surrogate(scalar(f), 2, 2, unit_box(2));
  REQUIRE(direct.surplus.rows() == s2.surplus.rows());
  CHECK((direct.surplus - s2.surplus).cwiseAbs().maxCoeff() <= 1e-12);
  for (const auto& u : s1.grid.point) CHECK(eval_surrogate(s2, u)[0] == doctest::Approx(eval_surrogate(s1, u)[0]).epsilon(1e-14));

  const Surrogate t = truncate_surrogate(s2, 1);
  CHECK(t.grid.size() == 5);
  CHECK(t.surplus == s1.surplus);
  CHECK_THROWS(truncate_surrogate(s2, 3));
}

TEST_CASE("failed nodes take the nearest successful value") {
  const VectorFunction f = [](const std::vector<double>& x) -> std::optional<std::vector<double>> {
    if (x[0] == 1.0 && x[1] == 0.5) return std::nullopt;
    return std::vector<double>{x[0] + 10 * x[1]};
  };
  const Surrogate s = build_surrogate(f, 2, 1, unit_box(2));
  REQUIRE(s.failed_nodes.size() == 1);
  // nearest successful node of (1, 0.5) is the centre (0.5, 0.5)
  CHECK(eval_surrogate(s, {1.0, 0.5})[0] == doctest::Approx(5.5));
  const VectorFunction none = [](const std::vector<double>&) -> std::optional<std::vector<double>> { return std::nullopt; };
  CHECK_THROWS_AS(build_surrogate(none, 2, 1, unit_box(2)), SurrogateError);
}

TEST_CASE("file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "tokuq_sg_test";
  std::filesystem::create_directories(dir);
  auto f = [](const std::vector<double>& x) -> std::optional<std::vector<double>> { return std::vector<double>{x[0] * x[1], x[0] - x[1]}; };
  const Box b{{1e6, -2e6}, {1.1e6, -1.9e6}};
  BuildOptions o;
  o.mesh_hash = 0x1234abcdULL;
  const Surrogate s = build_surrogate(f, 2, 3, b, o);
  write_surrogate(s, dir / "a.bin");
  const Surrogate r = read_surrogate(dir / "a.bin");
  CHECK(r.mesh_hash == s.mesh_hash);
  CHECK(r.surplus == s.surplus);
  CHECK(r.box.lo == s.box.lo);
  CHECK(r.grid.point == s.grid.point);

  o.jobs = 4;
  write_surrogate(build_surrogate(f, 2, 3, b, o), dir / "b.bin");
  CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));

  std::ofstream(dir / "bad.bin", std::ios::binary) << "not a surrogate";
  CHECK_THROWS_AS(read_surrogate(dir / "bad.bin"), SurrogateError);
  CHECK(surrogate_manifest(s, 1.5, 29).find("\"nodes\": 29") != std::string::npos);
  std::filesystem::remove_all(dir);
}
