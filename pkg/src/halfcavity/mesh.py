"""Closed triangulated cavity surfaces, a-priori geometry checks and the
Hausdorff distance between surfaces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial.distance import pdist
from scipy.spatial.transform import Rotation

MAX_LEVEL = 7
MAX_ASPECT = 20.0


class TriSurfaceMesh:
    """Closed, outward-oriented triangulation of a sphere-topology surface.

    Element data (centroid, area, unit normal, diameter) is computed once at
    construction. With ``check=True`` the topology, orientation and element
    quality invariants are enforced.
    """

    def __init__(self, vertices, triangles, check: bool = True):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must have shape (n, 3)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must have shape (m, 3)")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise ValueError("triangle index out of range")
        self.vertices.setflags(write=False)
        self.triangles.setflags(write=False)

        corners = self.vertices[self.triangles]
        cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        twice_area = np.linalg.norm(cross, axis=1)
        self.corners = corners
        self.centroids = corners.mean(axis=1)
        self.areas = 0.5 * twice_area
        with np.errstate(invalid="ignore", divide="ignore"):
            self.normals = cross / twice_area[:, None]
        edges = np.stack(
            [
                np.linalg.norm(corners[:, 1] - corners[:, 0], axis=1),
                np.linalg.norm(corners[:, 2] - corners[:, 1], axis=1),
                np.linalg.norm(corners[:, 0] - corners[:, 2], axis=1),
            ],
            axis=1,
        )
        self.diameters = edges.max(axis=1)
        self._edges = edges
        for arr in (self.corners, self.centroids, self.areas, self.normals, self.diameters):
            arr.setflags(write=False)
        if check:
            self.check()

    def __len__(self):
        return len(self.triangles)

    @property
    def n_elements(self) -> int:
        return len(self.triangles)

    @cached_property
    def signed_volume(self) -> float:
        c = self.corners
        return float(np.einsum("ij,ij->i", c[:, 0], np.cross(c[:, 1], c[:, 2])).sum() / 6.0)

    @cached_property
    def area(self) -> float:
        return float(self.areas.sum())

    @cached_property
    def aspect_ratios(self) -> np.ndarray:
        # longest edge over the altitude onto it
        longest = self._edges.max(axis=1)
        return longest**2 / (2.0 * self.areas)

    def check(self):
        if np.any(~(self.areas > 0)):
            raise ValueError("mesh has degenerate triangles")
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        undirected = np.sort(directed, axis=1)
        _, counts = np.unique(undirected, axis=0, return_counts=True)
        if np.any(counts != 2):
            raise ValueError("surface is not closed: every edge must be shared by exactly two triangles")
        _, dcounts = np.unique(directed, axis=0, return_counts=True)
        if np.any(dcounts != 1):
            raise ValueError("surface is not consistently oriented")
        used = np.unique(t).size
        euler = used - len(counts) + len(t)
        if euler != 2:
            raise ValueError(f"Euler characteristic {euler} != 2 (not sphere topology)")
        if self.signed_volume <= 0:
            raise ValueError("normals point into the cavity (negative signed volume)")
        worst = self.aspect_ratios.max()
        if worst > MAX_ASPECT:
            raise ValueError(f"triangle aspect ratio {worst:.3g} exceeds {MAX_ASPECT}")

    def transformed(self, matrix=None, shift=None) -> "TriSurfaceMesh":
        """Apply ``x -> matrix @ x + shift``; normals are recomputed from the new geometry."""
        v = self.vertices
        if matrix is not None:
            v = v @ np.asarray(matrix, dtype=float).T
        if shift is not None:
            v = v + np.asarray(shift, dtype=float)
        return TriSurfaceMesh(v, self.triangles)

    def surface_samples(self, per_edge: int = 4) -> np.ndarray:
        """Vertices plus a barycentric lattice of ``per_edge`` subdivisions on every triangle."""
        k = int(per_edge)
        if k < 1:
            raise ValueError("per_edge must be >= 1")
        bary = [(i / k, j / k, 1 - (i + j) / k) for i in range(k + 1) for j in range(k + 1 - i)]
        bary = np.array([b for b in bary if max(b) < 1.0 - 1e-12] or [(1 / 3, 1 / 3, 1 / 3)])
        pts = np.einsum("qk,tkd->tqd", bary, self.corners).reshape(-1, 3)
        return np.vstack([self.vertices, pts])

    def save(self, path):
        write_mesh(path, self)


# ---------------------------------------------------------------------------
# construction


def _icosahedron():
    t = (1.0 + math.sqrt(5.0)) / 2.0
    v = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=float,
    )
    f = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def _subdivide(verts, faces):
    verts = list(map(tuple, verts))
    cache = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        idx = cache.get(key)
        if idx is None:
            m = np.add(verts[a], verts[b]) / 2.0
            m /= np.linalg.norm(m)
            idx = len(verts)
            verts.append(tuple(m))
            cache[key] = idx
        return idx

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
    return np.array(verts), np.array(out, dtype=np.int64)


def unit_icosphere(level: int):
    if not (isinstance(level, (int, np.integer)) and 0 <= level <= MAX_LEVEL):
        raise ValueError(f"subdivision level must be an integer in [0, {MAX_LEVEL}], got {level!r}")
    v, f = _icosahedron()
    for _ in range(level):
        v, f = _subdivide(v, f)
    return v, f


def make_sphere_mesh(center, radius: float, level: int) -> TriSurfaceMesh:
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    v, f = unit_icosphere(level)
    return TriSurfaceMesh(radius * v + np.asarray(center, dtype=float), f)


# ---------------------------------------------------------------------------
# parametric cavities


@dataclass(frozen=True)
class CavityParams:
    """Sphere (``radii=(a,)``) or ellipsoid (``radii=(a, b, c)`` plus Euler angles).

    Euler angles are extrinsic ``xyz`` rotations in radians.
    """

    kind: str
    center: tuple
    radii: tuple
    orientation: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        center = tuple(float(c) for c in np.ravel(self.center))
        radii = tuple(float(r) for r in np.ravel(self.radii))
        orientation = tuple(float(a) for a in np.ravel(self.orientation))
        if self.kind not in ("sphere", "ellipsoid"):
            raise ValueError(f"unknown cavity kind {self.kind!r}")
        if len(center) != 3:
            raise ValueError("center must have three coordinates")
        if not center[2] < 0:
            raise ValueError("cavity center must lie below the surface (center[2] < 0)")
        expected = 1 if self.kind == "sphere" else 3
        if len(radii) != expected:
            raise ValueError(f"{self.kind} needs {expected} radii, got {len(radii)}")
        if not all(r > 0 and math.isfinite(r) for r in radii):
            raise ValueError(f"radii must be positive, got {radii}")
        if len(orientation) != 3:
            raise ValueError("orientation must have three Euler angles")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "orientation", orientation)

    @classmethod
    def sphere(cls, center, radius):
        return cls("sphere", center, (radius,))

    @classmethod
    def ellipsoid(cls, center, radii, orientation=(0.0, 0.0, 0.0)):
        return cls("ellipsoid", center, radii, orientation)

    @property
    def n_params(self) -> int:
        return 4 if self.kind == "sphere" else 9

    def to_vector(self) -> np.ndarray:
        if self.kind == "sphere":
            return np.array([*self.center, self.radii[0]])
        return np.array([*self.center, *self.radii, *self.orientation])

    def with_vector(self, vec) -> "CavityParams":
        vec = np.asarray(vec, dtype=float)
        if self.kind == "sphere":
            return CavityParams("sphere", vec[:3], vec[3:4])
        return CavityParams("ellipsoid", vec[:3], vec[3:6], vec[6:9])

    def to_mesh(self, level: int) -> TriSurfaceMesh:
        if self.kind == "sphere":
            return make_sphere_mesh(self.center, self.radii[0], level)
        return make_ellipsoid_mesh(self, level)

    def as_dict(self) -> dict:
        d = {"kind": self.kind, "center": list(self.center), "radii": list(self.radii)}
        if self.kind == "ellipsoid":
            d["orientation"] = list(self.orientation)
        return d

    @classmethod
    def from_dict(cls, d) -> "CavityParams":
        return cls(d["kind"], d["center"], d["radii"], d.get("orientation", (0.0, 0.0, 0.0)))


def make_ellipsoid_mesh(params: CavityParams, level: int) -> TriSurfaceMesh:
    if params.kind != "ellipsoid":
        raise ValueError("make_ellipsoid_mesh needs an ellipsoid CavityParams")
    radii = np.asarray(params.radii)
    if radii.max() / radii.min() > 10.0:
        raise ValueError(f"degenerate ellipsoid radii {tuple(radii)} (axis ratio > 10)")
    v, f = unit_icosphere(level)
    rot = Rotation.from_euler("xyz", params.orientation).as_matrix()
    return TriSurfaceMesh(v @ (rot * radii).T + np.asarray(params.center), f)


# ---------------------------------------------------------------------------
# a-priori class


@dataclass(frozen=True)
class CavityPriors:
    """Depth/size scale ``D0``, measurement-disk radius ``s0`` and the declared
    Lipschitz constants ``r0, E0`` of the admissible family.

    ``r0`` and ``E0`` are recorded as metadata; no mesh-based check exists for them.
    """

    D0: float
    s0: float
    r0: float = 1.0
    E0: float = 1.0

    def __post_init__(self):
        if not self.D0 > 1:
            raise ValueError(f"D0 must exceed 1, got {self.D0}")
        if not 0 < self.s0 < self.D0:
            raise ValueError(f"need 0 < s0 < D0, got s0={self.s0}, D0={self.D0}")
        if not (self.r0 > 0 and self.E0 > 0):
            raise ValueError("Lipschitz constants r0, E0 must be positive")


class Violation(NamedTuple):
    kind: str  # "depth", "diameter" or "inclusion"
    message: str


def mesh_diameter(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    if len(v) > 64:
        try:
            v = v[ConvexHull(v).vertices]
        except Exception:  # coplanar or degenerate point sets
            pass
    return float(pdist(v).max()) if len(v) > 1 else 0.0


def validate_against_priors(mesh: TriSurfaceMesh, priors: CavityPriors) -> list[Violation]:
    """Return the violated a-priori constraints; an empty list means admissible."""
    out = []
    v = mesh.vertices
    depth = -float(v[:, 2].max())
    if not depth >= priors.D0:
        out.append(Violation("depth", f"d(C, R^2) = {depth:.6g} < D0 = {priors.D0:.6g}"))
    diam = mesh_diameter(v)
    if not diam < priors.D0:
        out.append(Violation("diameter", f"diam(C) = {diam:.6g} >= D0 = {priors.D0:.6g}"))
    rmax = float(np.linalg.norm(v, axis=1).max())
    if not (rmax < 2 * priors.D0 and depth > 0):
        out.append(
            Violation("inclusion", f"C not inside the half-ball of radius 2*D0 = {2 * priors.D0:.6g} (max |x| = {rmax:.6g})")
        )
    return out


def geometry_report(mesh: TriSurfaceMesh) -> dict:
    return {
        "signed_volume": mesh.signed_volume,
        "area": mesh.area,
        "diameter": mesh_diameter(mesh.vertices),
        "depth": -float(mesh.vertices[:, 2].max()),
    }


def hausdorff_distance(a: TriSurfaceMesh, b: TriSurfaceMesh, per_edge: int = 4) -> float:
    """Hausdorff distance between two surfaces from dense point samples.

    Samples are the vertices plus a barycentric lattice on each triangle, so
    the value approaches the exact surface distance from above as
    ``per_edge`` grows.
    """
    pa = a.surface_samples(per_edge)
    pb = b.surface_samples(per_edge)
    d_ab = cKDTree(pb).query(pa)[0].max()
    d_ba = cKDTree(pa).query(pb)[0].max()
    return float(max(d_ab, d_ba))


# ---------------------------------------------------------------------------
# ASCII format


def write_mesh(path, mesh: TriSurfaceMesh):
    """Write the vertex count, one ``x y z`` line per vertex, then one ``i j k`` line per triangle."""
    lines = [str(len(mesh.vertices))]
    lines += [" ".join(f"{c:.17g}" for c in v) for v in mesh.vertices]
    lines += [" ".join(str(int(i)) for i in t) for t in mesh.triangles]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path, check: bool = True) -> TriSurfaceMesh:
    rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not rows or len(rows[0]) != 1:
        raise ValueError(f"{path}: first line must hold the vertex count")
    nv = int(rows[0][0])
    vrows, trows = rows[1 : 1 + nv], rows[1 + nv :]
    if len(vrows) != nv or any(len(r) != 3 for r in vrows + trows):
        raise ValueError(f"{path}: malformed mesh file")
    return TriSurfaceMesh(np.array(vrows, dtype=float), np.array(trows, dtype=np.int64), check=check)
