#include "tokuq/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "tokuq/kernels.hpp"
#include "tokuq/projection.hpp"

namespace tokuq {

void gauss_legendre01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)p'^2) scaled by 1/2
  }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return nodes[a] < nodes[b]; });
  std::vector<double> sn(n), sw(n);
  for (int i = 0; i < n; ++i) {
    sn[i] = nodes[idx[i]];
    sw[i] = weights[idx[i]];
  }
  nodes = std::move(sn);
  weights = std::move(sw);
}

DofMap DofMap::from_constraints(const std::vector<char>& constrained) {
  DofMap d;
  d.dof_of_vertex.assign(constrained.size(), -1);
  for (std::size_t v = 0; v < constrained.size(); ++v) {
    if (constrained[v]) continue;
    d.dof_of_vertex[v] = static_cast<int>(d.vertex_of_dof.size());
    d.vertex_of_dof.push_back(static_cast<int>(v));
  }
  return d;
}

DofMap DofMap::axis_eliminated(const TriMesh& m) {
  std::vector<char> c(m.num_vertices(), 0);
  for (std::size_t v = 0; v < m.num_vertices(); ++v) c[v] = m.vertex(static_cast<int>(v)).axis ? 1 : 0;
  return from_constraints(c);
}

SparseMatrix assemble_stiffness(const TriMesh& m, double mu) {
  const auto& rule = triangle_rule_deg2();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * m.num_triangles());
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangle(static_cast<int>(t));
    const Point p[3] = {m.point(tri[0]), m.point(tri[1]), m.point(tri[2])};
    const double area = m.area(static_cast<int>(t));
    // gradients of barycentric coordinates
    std::array<Point, 3> g;
    for (int k = 0; k < 3; ++k) {
      const Point a = p[(k + 1) % 3], b = p[(k + 2) % 3];
      g[k] = {(a.y - b.y) / (2.0 * area), (b.x - a.x) / (2.0 * area)};
    }
    double coef = 0.0;
    for (std::size_t q = 0; q < rule.weight.size(); ++q) {
      const auto& l = rule.bary[q];
      const double x = l[0] * p[0].x + l[1] * p[1].x + l[2] * p[2].x;
      if (!(x > 0.0)) throw MeshError("stiffness assembly: quadrature point with x <= 0 in triangle " + std::to_string(t));
      coef += rule.weight[q] / (mu * x);
    }
    coef *= area;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], coef * (g[i].x * g[j].x + g[i].y * g[j].y));
  }
  SparseMatrix a(m.num_vertices(), m.num_vertices());
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

SparseMatrix restrict_to_dofs(const SparseMatrix& a, const DofMap& dofs) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(a.nonZeros());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const int r = dofs.dof_of_vertex[it.row()], c = dofs.dof_of_vertex[it.col()];
      if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  SparseMatrix out(dofs.size(), dofs.size());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SparseMatrix assemble_interior(const TriMesh& m, double mu) {
  return restrict_to_dofs(assemble_stiffness(m, mu), DofMap::axis_eliminated(m));
}

Eigen::MatrixXd BoundaryOperator::coupled(double mu0) const { return (mass_N + 0.5 * double_layer) / mu0; }

namespace {

struct ArcEdge {
  int a, b;        // vertex ids, angle(a) < angle(b)
  int ia, ib;      // positions in the Gamma vertex list
  double ta, tb;   // angles
};

struct EdgePoint {
  Point p;
  double s;  // parameter from a (0) to b (1)
};

EdgePoint on_edge(const ArcEdge& e, double rho, double s) {
  const double th = e.ta + s * (e.tb - e.ta);
  return {{rho * std::cos(th), rho * std::sin(th)}, s};
}

}  // namespace

BoundaryOperator assemble_boundary(const TriMesh& m, double rho, int order) {
  BoundaryOperator op;
  op.vertices = m.gamma_vertices();
  const std::size_t nb = op.vertices.size();
  op.mass_N = Eigen::MatrixXd::Zero(nb, nb);
  op.double_layer = Eigen::MatrixXd::Zero(nb, nb);
  if (nb == 0) return op;

  std::vector<int> pos(m.num_vertices(), -1);
  for (std::size_t i = 0; i < nb; ++i) pos[op.vertices[i]] = static_cast<int>(i);
  std::vector<ArcEdge> edges;
  for (const auto& e : m.gamma_edges()) {
    if (pos[e.a] < 0 || pos[e.b] < 0) throw MeshError("boundary assembly: edge not on Gamma");
    edges.push_back({e.a, e.b, pos[e.a], pos[e.b], m.gamma_angle(e.a), m.gamma_angle(e.b)});
  }

  std::vector<double> gx, gw;
  gauss_legendre01(order, gx, gw);

  // N-weighted mass matrix
  for (const auto& e : edges) {
    const double jac = rho * (e.tb - e.ta);
    for (int q = 0; q < order; ++q) {
      const auto ep = on_edge(e, rho, gx[q]);
      const double w = gw[q] * jac * kernel_N(ep.p, rho);
      const double phi[2] = {1.0 - ep.s, ep.s};
      const int idx[2] = {e.ia, e.ib};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) op.mass_N(idx[i], idx[j]) += w * phi[i] * phi[j];
    }
  }

  // Double integral over ordered edge pairs.
  auto accumulate = [&](const ArcEdge& e, const ArcEdge& f, double s, double t, double w) {
    const auto p1 = on_edge(e, rho, s);
    const auto p2 = on_edge(f, rho, t);
    const double kM = kernel_M(p1.p, p2.p);
    // local vertex set and differences phi_v(p1) - phi_v(p2)
    int ids[4] = {e.ia, e.ib, f.ia, f.ib};
    double g[4] = {1.0 - s, s, -(1.0 - t), -t};
    int n = 4;
    // merge shared vertices
    for (int i = 2; i < 4; ++i) {
      for (int j = 0; j < 2; ++j) {
        if (ids[i] == ids[j]) {
          g[j] += g[i];
          g[i] = 0.0;
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      if (g[i] == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        if (g[j] == 0.0) continue;
        op.double_layer(ids[i], ids[j]) += w * kM * g[i] * g[j];
      }
    }
  };

  for (std::size_t ie = 0; ie < edges.size(); ++ie) {
    const auto& e = edges[ie];
    const double je = rho * (e.tb - e.ta);
    for (std::size_t jf = 0; jf < edges.size(); ++jf) {
      const auto& f = edges[jf];
      const double jac = je * rho * (f.tb - f.ta);
      if (ie == jf) {
        // s - t = z, graded z = v^2
        for (int qv = 0; qv < order; ++qv) {
          const double v = gx[qv];
          const double z = v * v;
          const double wz = gw[qv] * 2.0 * v;
          for (int qu = 0; qu < order; ++qu) {
            const double u = gx[qu] * (1.0 - z);
            const double w = wz * gw[qu] * (1.0 - z) * jac;
            accumulate(e, f, u + z, u, w);
            accumulate(e, f, u, u + z, w);
          }
        }
        continue;
      }
      const bool share_b_a = e.b == f.a, share_a_b = e.a == f.b;
      if (share_b_a || share_a_b) {
        // Duffy split of the square at the shared corner, graded radially.
        for (int qu = 0; qu < order; ++qu) {
          const double u = gx[qu] * gx[qu];
          const double wu = gw[qu] * 2.0 * gx[qu];
          for (int qv = 0; qv < order; ++qv) {
            const double v = gx[qv];
            const double w = wu * gw[qv] * u * jac;
            // local distances from the shared corner: (r1, r2) = (u, u v) and (u v, u)
            for (int half = 0; half < 2; ++half) {
              const double r1 = half == 0 ? u : u * v;
              const double r2 = half == 0 ? u * v : u;
              const double s = share_b_a ? 1.0 - r1 : r1;
              const double t = share_b_a ? r2 : 1.0 - r2;
              accumulate(e, f, s, t, w);
            }
          }
        }
        continue;
      }
      for (int qs = 0; qs < order; ++qs)
        for (int qt = 0; qt < order; ++qt) accumulate(e, f, gx[qs], gx[qt], gw[qs] * gw[qt] * jac);
    }
  }
  return op;
}

SparseMatrix assemble_free_boundary_operator(const TriMesh& m, double mu0, int boundary_order) {
  SparseMatrix a = assemble_stiffness(m, mu0);
  const auto op = assemble_boundary(m, m.gamma_radius(), boundary_order);
  const Eigen::MatrixXd b = op.coupled(mu0);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(a.nonZeros() + b.size());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (std::size_t i = 0; i < op.vertices.size(); ++i)
    for (std::size_t j = 0; j < op.vertices.size(); ++j)
      trip.emplace_back(op.vertices[i], op.vertices[j], b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  SparseMatrix full(m.num_vertices(), m.num_vertices());
  full.setFromTriplets(trip.begin(), trip.end());
  return restrict_to_dofs(full, DofMap::axis_eliminated(m));
}

Eigen::VectorXd assemble_load(const TriMesh& m, const std::function<double(int, Point)>& density, int degree) {
  const auto& rule = degree <= 2 ? triangle_rule_deg2() : triangle_rule_deg5();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.num_vertices()));
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangle(static_cast<int>(t));
    const Point p0 = m.point(tri[0]), p1 = m.point(tri[1]), p2 = m.point(tri[2]);
    const double area = m.area(static_cast<int>(t));
    for (std::size_t q = 0; q < rule.weight.size(); ++q) {
      const auto& l = rule.bary[q];
      const Point p{l[0] * p0.x + l[1] * p1.x + l[2] * p2.x, l[0] * p0.y + l[1] * p1.y + l[2] * p2.y};
      const double f = density(static_cast<int>(t), p);
      if (f == 0.0) continue;
      for (int i = 0; i < 3; ++i) b[tri[i]] += rule.weight[q] * area * f * l[i];
    }
  }
  return b;
}

Eigen::VectorXd assemble_coil_load(const TriMesh& m, const std::vector<double>& coil_density) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.num_vertices()));
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const RegionTag tag = m.region(static_cast<int>(t));
    if (tag.kind != RegionKind::coil || tag.coil < 0 || static_cast<std::size_t>(tag.coil) >= coil_density.size())
      continue;
    const double third = coil_density[tag.coil] * m.area(static_cast<int>(t)) / 3.0;
    for (int v : m.triangle(static_cast<int>(t))) b[v] += third;
  }
  return b;
}

}  // namespace tokuq
