#include <algorithm>
#include <unordered_map>

#include "tokuq/field_analysis.hpp"

namespace tokuq {

std::vector<ContourLine> extract_contour(const NodalField& f, double level) {
  const TriMesh& m = *f.mesh;
  const auto n = static_cast<std::uint64_t>(m.num_vertices());
  std::unordered_map<std::uint64_t, int> node_of_edge;
  std::vector<Point> pts;
  std::vector<std::array<int, 2>> links;

  auto node = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    const std::uint64_t key = static_cast<std::uint64_t>(a) * n + static_cast<std::uint64_t>(b);
    auto [it, fresh] = node_of_edge.try_emplace(key, static_cast<int>(pts.size()));
    if (fresh) {
      const double fa = f[a], fb = f[b];
      const double t = (level - fa) / (fb - fa);
      const Point pa = m.point(a), pb = m.point(b);
      pts.push_back(pa + t * (pb - pa));
      links.push_back({-1, -1});
    }
    return it->second;
  };
  auto link = [&](int u, int v) {
    for (int s : {0, 1})
      if (links[u][s] < 0) {
        links[u][s] = v;
        break;
      }
    for (int s : {0, 1})
      if (links[v][s] < 0) {
        links[v][s] = u;
        break;
      }
  };

  for (const auto& tri : m.triangles()) {
    bool up[3];
    int nup = 0;
    for (int k = 0; k < 3; ++k) nup += (up[k] = f[tri[k]] > level);
    if (nup == 0 || nup == 3) continue;
    int ends[2], c = 0;
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      if (up[k] != up[(k + 1) % 3]) ends[c++] = node(a, b);
    }
    link(ends[0], ends[1]);
  }

  std::vector<char> used(pts.size(), 0);
  std::vector<ContourLine> lines;
  auto walk = [&](int start) {
    ContourLine line;
    int prev = -1, cur = start;
    while (cur >= 0 && !used[cur]) {
      used[cur] = 1;
      line.points.push_back(pts[cur]);
      const int next = links[cur][0] != prev ? links[cur][0] : links[cur][1];
      prev = cur;
      cur = next;
      if (cur == start) {
        line.closed = true;
        line.points.push_back(pts[start]);
        break;
      }
    }
    lines.push_back(std::move(line));
  };
  // open lines start at an end, so every node with one link goes first
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!used[i] && (links[i][0] < 0 || links[i][1] < 0)) walk(static_cast<int>(i));
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!used[i]) walk(static_cast<int>(i));

  auto leftmost = [](const ContourLine& l) {
    Point best = l.points.front();
    for (const Point& p : l.points)
      if (p.x < best.x || (p.x == best.x && p.y < best.y)) best = p;
    return best;
  };
  std::stable_sort(lines.begin(), lines.end(), [&](const ContourLine& a, const ContourLine& b) {
    const Point pa = leftmost(a), pb = leftmost(b);
    return pa.x < pb.x || (pa.x == pb.x && pa.y < pb.y);
  });
  return lines;
}

}  // namespace tokuq
