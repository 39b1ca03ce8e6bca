"""OBJ export for surfaces of revolution.

The profile curve (rho(theta), h(theta)) is revolved about the +z axis
with a fixed angular segment count.  Normals come straight from the
Gauss angle: n = (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta)).
Ends where |rho| falls below the pole tolerance are capped with a pole
vertex and a triangle fan, which makes closed profiles watertight
(Euler characteristic 2).
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .geometry import ProfileCurve3D

__all__ = ["RevolvedMesh", "revolve_profile", "export_obj", "mesh_stats"]

POLE_RHO_TOL = 1e-5


@dataclass
class RevolvedMesh:
    vertices: np.ndarray       # (V, 3)
    normals: np.ndarray        # (V, 3)
    faces: list[tuple[int, int, int]]  # 0-based vertex indices
    skipped_rows: int = 0

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def revolve_profile(curve: ProfileCurve3D, segments: int,
                    theta: np.ndarray | None = None) -> RevolvedMesh:
    """Triangulated surface of revolution from a cylindrical profile curve."""
    if segments < 3:
        raise ValueError("need at least 3 angular segments")
    grid = curve.grid if theta is None else np.asarray(theta, dtype=float)
    rho = np.asarray(curve.rho, dtype=float)
    h = np.asarray(curve.h, dtype=float)
    finite = np.isfinite(rho) & np.isfinite(h) & np.isfinite(grid)
    skipped = int(np.sum(~finite))
    grid, rho, h = grid[finite], rho[finite], h[finite]
    if len(grid) < 2:
        raise ValueError("profile has fewer than two finite samples")

    # interior rows exclude degenerate (on-axis) samples
    interior = np.abs(rho) > POLE_RHO_TOL
    first, last = int(np.argmax(interior)), len(grid) - 1 - int(np.argmax(interior[::-1]))
    cap_north = first > 0 or np.abs(rho[0]) <= POLE_RHO_TOL
    cap_south = last < len(grid) - 1 or np.abs(rho[-1]) <= POLE_RHO_TOL
    grid_i, rho_i, h_i = grid[first:last + 1], rho[first:last + 1], h[first:last + 1]
    n_rows = len(grid_i)
    if n_rows < 2:
        raise ValueError("profile collapses to the axis everywhere")

    phi = np.linspace(0.0, 2.0 * math.pi, segments, endpoint=False)
    cos_p, sin_p = np.cos(phi), np.sin(phi)

    verts = np.empty((n_rows * segments, 3))
    norms = np.empty_like(verts)
    for i in range(n_rows):
        base = i * segments
        verts[base:base + segments, 0] = rho_i[i] * cos_p
        verts[base:base + segments, 1] = rho_i[i] * sin_p
        verts[base:base + segments, 2] = h_i[i]
        st, ct = math.sin(grid_i[i]), math.cos(grid_i[i])
        norms[base:base + segments, 0] = st * cos_p
        norms[base:base + segments, 1] = st * sin_p
        norms[base:base + segments, 2] = ct

    faces: list[tuple[int, int, int]] = []
    for i in range(n_rows - 1):
        a0 = i * segments
        b0 = (i + 1) * segments
        for j in range(segments):
            jn = (j + 1) % segments
            faces.append((a0 + j, b0 + j, b0 + jn))
            faces.append((a0 + j, b0 + jn, a0 + jn))

    extra_v = []
    extra_n = []
    if cap_north:
        # pole vertex on the axis, fan to the first ring
        hp = h[0] if np.abs(rho[0]) <= POLE_RHO_TOL else h_i[0]
        idx = n_rows * segments + len(extra_v)
        extra_v.append((0.0, 0.0, hp))
        extra_n.append((0.0, 0.0, math.cos(grid[0])))
        for j in range(segments):
            jn = (j + 1) % segments
            faces.append((idx, j, jn))
    if cap_south:
        hp = h[-1] if np.abs(rho[-1]) <= POLE_RHO_TOL else h_i[-1]
        idx = n_rows * segments + len(extra_v)
        extra_v.append((0.0, 0.0, hp))
        extra_n.append((0.0, 0.0, math.cos(grid[-1])))
        a0 = (n_rows - 1) * segments
        for j in range(segments):
            jn = (j + 1) % segments
            faces.append((idx, a0 + jn, a0 + j))
    if extra_v:
        verts = np.vstack([verts, np.asarray(extra_v)])
        norms = np.vstack([norms, np.asarray(extra_n)])
    return RevolvedMesh(verts, norms, faces, skipped_rows=skipped)


def export_obj(path: str, mesh: RevolvedMesh, comment: str = "") -> None:
    lines = ["# weingarten surface of revolution (axis +z)"]
    if comment:
        lines.append(f"# {comment}")
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
    for n in mesh.normals:
        lines.append(f"vn {n[0]:.17g} {n[1]:.17g} {n[2]:.17g}")
    for f in mesh.faces:
        a, b, c = (i + 1 for i in f)
        lines.append(f"f {a}//{a} {b}//{b} {c}//{c}")
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def mesh_stats(mesh: RevolvedMesh) -> dict:
    """Vertex/edge/face counts, Euler characteristic, boundary structure."""
    edges: dict[tuple[int, int], int] = {}
    for f in mesh.faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            key = (a, b) if a < b else (b, a)
            edges[key] = edges.get(key, 0) + 1
    used = {i for f in mesh.faces for i in f}
    V = len(used)
    E = len(edges)
    F = len(mesh.faces)
    boundary_edges = sum(1 for c in edges.values() if c == 1)
    nonmanifold = sum(1 for c in edges.values() if c > 2)
    return {
        "V": V, "E": E, "F": F,
        "euler_characteristic": V - E + F,
        "boundary_edges": boundary_edges,
        "nonmanifold_edges": nonmanifold,
        "watertight": boundary_edges == 0 and nonmanifold == 0,
    }
