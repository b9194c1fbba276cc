#!/usr/bin/env python3
"""Generate the coarse geometry-fitting triangulation shipped with a geometry file.

The mesh is the half-disk x >= 0 inside the coupling circle, with coil
rectangles, the limiter and the outer vessel wall inserted as constrained
segments. Region tags written to the file are recomputed by the C++ loader,
so they only need to be consistent with the geometry, not authoritative.

Usage: make_mesh.py GEOM OUT [--gamma-segments N] [--plasma-area A]
"""

import argparse
import json
import math

import numpy as np
import triangle

TAG_VACUUM = 0
TAG_INSIDE_LIMITER = 1
TAG_BETWEEN_WALLS = 2
TAG_COIL_BASE = 10


def polygon_segments(start, n):
    return [[start + i, start + (i + 1) % n] for i in range(n)]


def interior_point(poly):
    from shapely.geometry import Polygon
    return list(Polygon(poly).representative_point().coords[0])


def vacuum_seed(g, rho):
    from shapely.geometry import Point, Polygon, box
    blocked = [Polygon(g["vessel_outer"])]
    for c in g["coils"]:
        cx, cy = c["center"]
        blocked.append(box(cx - c["width"] / 2, cy - c["height"] / 2, cx + c["width"] / 2, cy + c["height"] / 2))
    for fx in (0.01, 0.05, 0.2, 0.5, 0.9):
        for fy in (0.0, 0.5, -0.5, 0.9, -0.9):
            pt = Point(fx * rho, fy * rho * math.sqrt(1 - fx * fx))
            if all(not b.buffer(1e-6 * rho).contains(pt) for b in blocked):
                return [pt.x, pt.y]
    raise SystemExit("no vacuum seed point found")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("geom")
    ap.add_argument("out")
    ap.add_argument("--gamma-segments", type=int, default=96)
    ap.add_argument("--plasma-area", type=float, default=0.0075)
    ap.add_argument("--wall-area", type=float, default=0.06)
    ap.add_argument("--coil-area", type=float, default=0.08)
    ap.add_argument("--vacuum-area", type=float, default=0.8)
    args = ap.parse_args()

    with open(args.geom) as fh:
        g = json.load(fh)
    rho = float(g["gamma_radius"])

    verts, segs, regions = [], [], []

    # Gamma half-circle from (0,-rho) to (0,rho), closed by the symmetry axis.
    n = args.gamma_segments
    for k in range(n + 1):
        th = -math.pi / 2 + math.pi * k / n
        x = 0.0 if k in (0, n) else rho * math.cos(th)
        y = -rho if k == 0 else (rho if k == n else rho * math.sin(th))
        verts.append([x, y])
    for k in range(n):
        segs.append([k, k + 1])
    # the axis is split at the Gamma arc spacing; "Y" forbids Steiner points on segments
    na = max(2, int(round(2 * n / math.pi)))
    prev = n
    for k in range(1, na):
        verts.append([0.0, rho - 2 * rho * k / na])
        segs.append([prev, len(verts) - 1])
        prev = len(verts) - 1
    segs.append([prev, 0])

    def add_loop(pts):
        base = len(verts)
        verts.extend([list(map(float, p)) for p in pts])
        segs.extend(polygon_segments(base, len(pts)))

    add_loop(g["limiter"])
    add_loop(g["vessel_outer"])
    for i, c in enumerate(g["coils"]):
        cx, cy = c["center"]
        hw, hh = c["width"] / 2, c["height"] / 2
        add_loop([[cx - hw, cy - hh], [cx + hw, cy - hh], [cx + hw, cy + hh], [cx - hw, cy + hh]])
        regions.append([cx, cy, TAG_COIL_BASE + i, args.coil_area])

    regions.append(interior_point(g["limiter"]) + [TAG_INSIDE_LIMITER, args.plasma_area])
    # a point between limiter and vessel: just inside the vessel's leftmost vertex
    vx = min(p[0] for p in g["vessel_outer"])
    lx = min(p[0] for p in g["limiter"])
    regions.append([0.5 * (vx + lx), 0.0, TAG_BETWEEN_WALLS, args.wall_area])
    regions.append(vacuum_seed(g, rho) + [TAG_VACUUM, args.vacuum_area])

    pslg = {"vertices": np.array(verts), "segments": np.array(segs), "regions": np.array(regions)}
    t = triangle.triangulate(pslg, "pq30AaY")

    xy = t["vertices"]
    tri = t["triangles"]
    attr = t["triangle_attributes"][:, 0].astype(int)
    markers = np.zeros(len(xy), dtype=bool)
    gamma = np.zeros(len(xy), dtype=bool)
    for i, (x, y) in enumerate(xy):
        if abs(x) < 1e-12:
            xy[i, 0] = 0.0
            markers[i] = True
        if abs(math.hypot(x, y) - rho) < 1e-9 * rho:
            gamma[i] = True

    # counter-clockwise orientation
    for k, (a, b, c) in enumerate(tri):
        ax, ay = xy[a]
        bx, by = xy[b]
        cx, cy = xy[c]
        if (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) < 0:
            tri[k] = [a, c, b]

    with open(args.out, "w") as fh:
        fh.write("# tokuq mesh v1\n")
        fh.write(f"nodes {len(xy)}\n")
        for i, (x, y) in enumerate(xy):
            fh.write(f"{x:.17g} {y:.17g} {int(markers[i])} {int(gamma[i])}\n")
        fh.write(f"elements {len(tri)}\n")
        for (a, b, c), r in zip(tri, attr):
            fh.write(f"{a} {b} {c} {r}\n")
    print(f"{args.out}: {len(xy)} nodes, {len(tri)} elements")


if __name__ == "__main__":
    main()
