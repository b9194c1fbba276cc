#pragma once

#include <memory>

#include "tokuq/geometry.hpp"
#include "tokuq/mesh.hpp"

namespace tokuq::test {

inline ReactorGeometry iter_geometry() { return load_geometry(TOKUQ_DATA_DIR "/iter_like.geom"); }

inline MeshPtr iter_mesh(const ReactorGeometry& g) {
  return std::make_shared<const TriMesh>(read_mesh(TOKUQ_DATA_DIR "/iter_like_coarse.mesh", &g));
}

template <class F>
NodalField sample(MeshPtr m, F f) {
  NodalField out = NodalField::zeros(m);
  for (std::size_t v = 0; v < m->num_vertices(); ++v) out[v] = f(m->point(static_cast<int>(v)));
  return out;
}

inline MeshPtr rectangle(double x0, double x1, double y0, double y1, int nx, int ny) {
  return std::make_shared<const TriMesh>(structured_rectangle(x0, x1, y0, y1, nx, ny));
}

}  // namespace tokuq::test
