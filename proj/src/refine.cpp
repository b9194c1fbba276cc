#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "tokuq/mesh.hpp"

namespace tokuq {

TriMesh refine_marked(const TriMesh& m, const std::set<int>& marked) {
  const auto& tris = m.triangles();
  std::map<Edge, int> midpoint;  // marked edge -> new vertex (assigned later)
  std::vector<char> red(tris.size(), 0);
  for (int t : marked) {
    if (t < 0 || static_cast<std::size_t>(t) >= tris.size()) continue;
    red[t] = 1;
    for (int k = 0; k < 3; ++k) midpoint.emplace(make_edge(tris[t][k], tris[t][(k + 1) % 3]), -1);
  }
  if (midpoint.empty()) return m;

  // closure: a triangle with two or more split edges becomes red
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (red[t]) continue;
      int split = 0;
      for (int k = 0; k < 3; ++k) split += midpoint.count(make_edge(tris[t][k], tris[t][(k + 1) % 3])) ? 1 : 0;
      if (split >= 2) {
        red[t] = 1;
        for (int k = 0; k < 3; ++k) midpoint.emplace(make_edge(tris[t][k], tris[t][(k + 1) % 3]), -1);
        changed = true;
      }
    }
  }

  std::vector<TriMesh::Vertex> verts = m.vertices();
  std::set<Edge> gamma_edges;
  for (const auto& e : m.gamma_edges()) gamma_edges.insert(make_edge(e.a, e.b));
  // deterministic numbering: triangle order, then local edge order
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const Edge e = make_edge(tris[t][(k + 1) % 3], tris[t][(k + 2) % 3]);
      auto it = midpoint.find(e);
      if (it == midpoint.end() || it->second >= 0) continue;
      const auto& a = m.vertex(e.a);
      const auto& b = m.vertex(e.b);
      TriMesh::Vertex v;
      if (gamma_edges.count(e)) {
        double ta = std::atan2(a.p.y, a.p.x), tb = std::atan2(b.p.y, b.p.x);
        const double th = 0.5 * (ta + tb);
        const double r = m.gamma_radius();
        v.p = {r * std::cos(th), r * std::sin(th)};
        v.gamma = true;
      } else {
        v.p = {0.5 * (a.p.x + b.p.x), 0.5 * (a.p.y + b.p.y)};
      }
      v.axis = a.axis && b.axis;
      if (v.axis) v.p.x = 0.0;
      it->second = static_cast<int>(verts.size());
      verts.push_back(v);
    }
  }

  std::vector<Triangle> out;
  std::vector<RegionTag> regions;
  out.reserve(tris.size() + 3 * midpoint.size());
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const auto& tri = tris[t];
    const RegionTag tag = m.region(static_cast<int>(t));
    auto mid = [&](int k) {
      auto it = midpoint.find(make_edge(tri[(k + 1) % 3], tri[(k + 2) % 3]));
      return it == midpoint.end() ? -1 : it->second;
    };
    if (red[t]) {
      const int a = tri[0], b = tri[1], c = tri[2];
      const int mab = mid(2), mbc = mid(0), mca = mid(1);
      out.push_back({a, mab, mca});
      out.push_back({mab, b, mbc});
      out.push_back({mca, mbc, c});
      out.push_back({mab, mbc, mca});
      regions.insert(regions.end(), 4, tag);
      continue;
    }
    int split = -1;
    for (int k = 0; k < 3; ++k)
      if (mid(k) >= 0) split = k;
    if (split < 0) {
      out.push_back(tri);
      regions.push_back(tag);
      continue;
    }
    const int v0 = tri[split], v1 = tri[(split + 1) % 3], v2 = tri[(split + 2) % 3];
    const int mm = mid(split);
    out.push_back({v0, v1, mm});
    out.push_back({v0, mm, v2});
    regions.insert(regions.end(), 2, tag);
  }
  return TriMesh(std::move(verts), std::move(out), std::move(regions), m.gamma_radius());
}

TriMesh uniform_refine_interior(const TriMesh& m, int levels) {
  TriMesh cur = m;
  for (int l = 0; l < levels; ++l) {
    std::set<int> marked;
    for (std::size_t t = 0; t < cur.num_triangles(); ++t)
      if (inside_vessel(cur.region(static_cast<int>(t)))) marked.insert(static_cast<int>(t));
    cur = refine_marked(cur, marked);
  }
  return cur;
}

NodalField interpolate_field(const NodalField& f, MeshPtr fine) {
  const auto& src = *f.mesh;
  std::vector<double> values(fine->num_vertices(), 0.0);
  for (std::size_t v = 0; v < fine->num_vertices(); ++v) {
    const Point p = fine->point(static_cast<int>(v));
    if (fine->vertex(static_cast<int>(v)).axis) continue;
    if (auto loc = src.locate(p)) {
      values[v] = f.at(*loc);
      continue;
    }
    // points on a refined arc lie slightly outside the chord: use the nearest
    // source vertex
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < src.num_vertices(); ++w) {
      const double d = distance(src.point(static_cast<int>(w)), p);
      if (d < best) {
        best = d;
        values[v] = f[w];
      }
    }
  }
  return NodalField(std::move(fine), std::move(values));
}

}  // namespace tokuq
