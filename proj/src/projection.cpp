#include "tokuq/projection.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>

namespace tokuq {

const TriangleRule& triangle_rule_deg2() {
  static const TriangleRule rule{
      {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}},
      {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
  return rule;
}

// Seven-point Radon rule, exact to degree 5.
const TriangleRule& triangle_rule_deg5() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0;
    const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0;
    const double w1 = (155.0 - s15) / 1200.0, w2 = (155.0 + s15) / 1200.0;
    r.bary.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weight.push_back(9.0 / 40.0);
    for (auto [a, b, w] : {std::tuple{a1, b1, w1}, std::tuple{a2, b2, w2}}) {
      r.bary.push_back({b, a, a});
      r.bary.push_back({a, b, a});
      r.bary.push_back({a, a, b});
      r.weight.insert(r.weight.end(), 3, w);
    }
    return r;
  }();
  return rule;
}

struct L2Projector::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
};

L2Projector::L2Projector(MeshPtr dst) : dst_(std::move(dst)), impl_(std::make_unique<Impl>()) {
  const auto& m = *dst_;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangle(static_cast<int>(t));
    const double a = m.area(static_cast<int>(t));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], a * (i == j ? 2.0 : 1.0) / 12.0);
  }
  Eigen::SparseMatrix<double> mass(m.num_vertices(), m.num_vertices());
  mass.setFromTriplets(trip.begin(), trip.end());
  impl_->solver.compute(mass);
  if (impl_->solver.info() != Eigen::Success) throw MeshError("singular mass matrix in L2 projection");
}

L2Projector::~L2Projector() = default;
L2Projector::L2Projector(L2Projector&&) noexcept = default;
L2Projector& L2Projector::operator=(L2Projector&&) noexcept = default;

ProjectionResult L2Projector::project(const NodalField& src) const {
  const auto& m = *dst_;
  const auto& rule = triangle_rule_deg2();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.num_vertices()));
  std::vector<char> outside(m.num_vertices(), 0);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangle(static_cast<int>(t));
    const double a = m.area(static_cast<int>(t));
    const Point p0 = m.point(tri[0]), p1 = m.point(tri[1]), p2 = m.point(tri[2]);
    for (std::size_t q = 0; q < rule.weight.size(); ++q) {
      const auto& l = rule.bary[q];
      const Point p{l[0] * p0.x + l[1] * p1.x + l[2] * p2.x, l[0] * p0.y + l[1] * p1.y + l[2] * p2.y};
      const auto loc = src.mesh->locate(p);
      if (!loc) {
        for (int v : tri) outside[v] = 1;
        continue;
      }
      const double val = src.at(*loc) * rule.weight[q] * a;
      for (int i = 0; i < 3; ++i) rhs[tri[i]] += val * l[i];
    }
  }
  Eigen::VectorXd c = impl_->solver.solve(rhs);
  ProjectionResult out;
  out.field = NodalField(dst_, std::vector<double>(c.data(), c.data() + c.size()));
  for (std::size_t v = 0; v < outside.size(); ++v) {
    if (outside[v]) {
      out.outside_vertices.push_back(static_cast<int>(v));
      out.field[v] = 0.0;
    }
  }
  return out;
}

ProjectionResult project_field(const NodalField& src, MeshPtr dst_mesh) {
  return L2Projector(std::move(dst_mesh)).project(src);
}

}  // namespace tokuq
