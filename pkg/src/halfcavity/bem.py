"""Collocation boundary element solver for the pressurized cavity.

The displacement outside the cavity is

    u(y) = p * int N(x, y)^T n(x) dsigma(x) - int [(C grad_x N(x, y)) n(x)]^T f(x) dsigma(x)

with ``f`` the trace of ``u`` on the cavity wall and ``n`` the normal pointing
out of the cavity. Letting ``y`` approach the wall from outside gives the
second-kind equation

    EXTERIOR_JUMP * f(y) + PV int [...]^T f dsigma = p * int N^T n dsigma

which is discretized with piecewise-constant densities and centroid
collocation on flat triangles.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import _assembly
from .elasticity import ElasticModuli, _as_pressure
from .mesh import CavityPriors, TriSurfaceMesh, validate_against_priors
from .quadrature import GAUSS6_BARY, GAUSS6_W, collapsed_gauss, duffy_centroid_rule

log = logging.getLogger(__name__)

# Free term of the exterior boundary limit; the deep-sphere oracle test guards it.
EXTERIOR_JUMP = 0.5
# Principal value of the Kelvin double layer of a constant density on a closed
# smooth surface, used to form the diagonal blocks by row sums.
KELVIN_PV_ROWSUM = 0.5

RESIDUAL_TOL = 1e-10


class QuadratureError(RuntimeError):
    pass


class PriorViolationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


class SolveError(RuntimeError):
    def __init__(self, message, rcond=None, residual=None):
        super().__init__(message)
        self.rcond = rcond
        self.residual = residual


@dataclass(frozen=True)
class QuadConfig:
    near_factor: float = 3.0
    tol: float = 1e-8
    max_depth: int = 12
    duffy_order: int = 16
    near_low_order: int = 6
    near_order: int = 7

    def near_rule(self):
        """Embedded (low, high) rule pair driving the adaptive near-field integration."""
        return (*collapsed_gauss(self.near_low_order), *collapsed_gauss(self.near_order))


def _prm(moduli: ElasticModuli) -> np.ndarray:
    return np.array([moduli.lam, moduli.mu, moduli.nu, moduli.kelvin_const, moduli.c_nu])


@dataclass
class BemSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    mesh: TriSurfaceMesh
    moduli: ElasticModuli
    p: float
    quad: QuadConfig = field(default_factory=QuadConfig)
    diagnostics: dict = field(default_factory=dict)
    # per row, sum over the other elements of the Kelvin double-layer blocks
    kelvin_rowsum: np.ndarray | None = None

    @property
    def n_elements(self) -> int:
        return self.mesh.n_elements


@dataclass
class CavityTrace:
    """Per-element displacement on the cavity wall, shape (N, 3)."""

    values: np.ndarray
    residual: float = float("nan")
    rcond: float = float("nan")

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def radial_component(self, mesh: TriSurfaceMesh, center) -> np.ndarray:
        r = mesh.centroids - np.asarray(center, dtype=float)
        r /= np.linalg.norm(r, axis=1, keepdims=True)
        return np.einsum("ij,ij->i", self.values, r)


def assemble(mesh: TriSurfaceMesh, moduli: ElasticModuli, p, priors: CavityPriors | None = None,
             quad: QuadConfig = QuadConfig()) -> BemSystem:
    """Build the collocation system; when ``priors`` is given the mesh must satisfy them."""
    p = _as_pressure(p)
    if priors is not None:
        bad = validate_against_priors(mesh, priors)
        if bad:
            raise PriorViolationError(bad)
    if np.max(mesh.vertices[:, 2]) >= 0:
        raise ValueError("cavity must lie strictly below the free surface")
    n = mesh.n_elements
    A = np.empty((3 * n, 3 * n), order="C")
    b = np.empty(3 * n)
    flags = np.zeros(n, dtype=np.int64)
    ksum = np.empty((n, 3, 3))
    dbary, dbw = duffy_centroid_rule(quad.duffy_order)
    _assembly.assemble_rows(
        mesh.corners, mesh.normals, mesh.centroids, mesh.diameters, _prm(moduli), p,
        GAUSS6_BARY, GAUSS6_W, *quad.near_rule(), dbary, dbw, quad.near_factor, quad.tol, quad.max_depth,
        EXTERIOR_JUMP, KELVIN_PV_ROWSUM, A, b, flags, ksum,
    )
    if flags.any():
        raise QuadratureError(f"near-singular quadrature did not converge on {int(flags.sum())} rows")
    if not (np.isfinite(A).all() and np.isfinite(b).all()):
        raise QuadratureError("non-finite entries in the assembled system")
    return BemSystem(A, b, mesh, moduli, p, quad, kelvin_rowsum=ksum)


def solve_trace(system: BemSystem, rcond_min: float = 1e-13) -> CavityTrace:
    """Dense LU solve with a condition estimate and a residual check."""
    A, b = system.matrix, system.rhs
    anorm = np.linalg.norm(A, 1)
    lu, piv = sla.lu_factor(A, check_finite=False)
    rcond, info = sla.lapack.dgecon(lu, anorm, norm="1")
    if rcond < rcond_min:
        raise SolveError(f"system is numerically singular (rcond ~ {rcond:.3g})", rcond=rcond)
    f = sla.lu_solve((lu, piv), b, check_finite=False)
    del lu
    res = float(np.linalg.norm(A @ f - b) / max(np.linalg.norm(b), 1e-300))
    system.diagnostics.update(rcond=float(rcond), residual=res, cond_estimate=1.0 / rcond)
    if res > RESIDUAL_TOL:
        raise SolveError(f"relative residual {res:.3g} exceeds {RESIDUAL_TOL}", rcond=rcond, residual=res)
    return CavityTrace(f.reshape(-1, 3), residual=res, rcond=float(rcond))


class NearFieldError(ValueError):
    def __init__(self, distance, limit):
        self.distance = distance
        self.limit = limit
        super().__init__(f"evaluation point is {distance:.4g} from the cavity wall; need at least one element diameter ({limit:.4g})")


def _check_targets(mesh, ys):
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if ys.shape[1] != 3:
        raise ValueError("evaluation points must be 3-vectors")
    if np.any(ys[:, 2] > 0):
        raise ValueError("evaluation points must satisfy y3 <= 0")
    from scipy.spatial import cKDTree

    samples = mesh.surface_samples(3)
    dist = cKDTree(samples).query(ys)[0]
    limit = float(mesh.diameters.max())
    worst = int(np.argmin(dist))
    if dist[worst] < limit:
        raise NearFieldError(float(dist[worst]), limit)
    # outside test: solid angle sum would be exact; a ray-free check via the
    # Kelvin double layer is too costly, so use the signed distance to the
    # nearest element plane instead
    tree = cKDTree(mesh.centroids)
    _, idx = tree.query(ys)
    side = np.einsum("ij,ij->i", ys - mesh.centroids[idx], mesh.normals[idx])
    if np.any(side <= 0):
        raise ValueError("evaluation point lies inside the cavity")
    return ys


def eval_displacement(mesh: TriSurfaceMesh, trace: CavityTrace, moduli: ElasticModuli, p, y,
                      quad: QuadConfig = QuadConfig()) -> np.ndarray:
    """Displacement at exterior points ``y`` (one point -> (3,), many -> (m, 3))."""
    single = np.ndim(y) == 1
    ys = _check_targets(mesh, y)
    out = _evaluate(mesh, trace, moduli, _as_pressure(p), ys, quad)
    return out[0] if single else out


def _evaluate(mesh, trace, moduli, p, ys, quad):
    out = np.empty((len(ys), 3))
    flags = np.zeros(len(ys), dtype=np.int64)
    _assembly.evaluate_points(
        mesh.corners, mesh.normals, mesh.centroids, mesh.diameters, _prm(moduli), p,
        np.ascontiguousarray(trace.values), np.ascontiguousarray(ys), GAUSS6_BARY, GAUSS6_W, *quad.near_rule(),
        quad.near_factor, quad.tol, quad.max_depth, out, flags,
    )
    if flags.any():
        raise QuadratureError("near-field evaluation quadrature did not converge")
    return out


def surface_displacement(mesh, trace, moduli, p, pts, quad: QuadConfig = QuadConfig()) -> np.ndarray:
    """Displacements at points of the free surface, given as (m, 2) or (m, 3) with x3 = 0."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[1] == 2:
        pts = np.column_stack([pts, np.zeros(len(pts))])
    if np.any(pts[:, 2] != 0):
        raise ValueError("surface points must have x3 = 0")
    return eval_displacement(mesh, trace, moduli, p, pts, quad)


def forward_solve(mesh, moduli, p, priors=None, quad: QuadConfig = QuadConfig()) -> CavityTrace:
    return solve_trace(assemble(mesh, moduli, p, priors, quad))


def kelvin_double_layer_constant(mesh: TriSurfaceMesh, moduli: ElasticModuli, ys,
                                 quad: QuadConfig = QuadConfig()) -> np.ndarray:
    """Full-space double layer of a unit constant density at points off the surface.

    Equals the identity inside the cavity and zero outside; used to check the
    near-field quadrature independently of the diagonal treatment.
    """
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    out = np.empty((len(ys), 3, 3))
    _assembly.kelvin_double_layer_constant(
        mesh.corners, mesh.normals, mesh.centroids, mesh.diameters, _prm(moduli), ys,
        GAUSS6_BARY, GAUSS6_W, *quad.near_rule(), quad.near_factor, quad.tol, quad.max_depth, out,
    )
    return out


def kelvin_self_pv(corners, normal, nu: float, order: int = 24) -> np.ndarray:
    """Principal value of the Kelvin double layer of a unit density over a flat
    triangle, at its centroid.

    On a flat element only the odd term ``(r_i n_j - r_j n_i) / r^3`` survives.
    Around the centroid it reduces to ``int k(theta) log R(theta) dtheta``,
    where ``R(theta)`` is the distance to the boundary; the log of the
    excluded disk radius drops out because ``k`` is odd. Each edge is
    integrated in its own angular range by Gauss-Legendre.
    """
    corners = np.asarray(corners, dtype=float)
    n = np.asarray(normal, dtype=float)
    c = corners.mean(axis=0)
    t, w = np.polynomial.legendre.leggauss(order)
    coef = -(1.0 - 2.0 * nu) / (8.0 * math.pi * (1.0 - nu))
    out = np.zeros((3, 3))
    for k in range(3):
        a, b = corners[k] - c, corners[(k + 1) % 3] - c
        # points along the edge, parametrized by the angle seen from the centroid
        e1 = a / np.linalg.norm(a)
        e2 = np.cross(n, e1)
        phi_b = math.atan2(b @ e2, b @ e1)
        phis = 0.5 * phi_b * (t + 1.0)
        dirs = np.outer(np.cos(phis), e1) + np.outer(np.sin(phis), e2)
        # distance to the edge line through a and b along each direction
        m = np.cross(b - a, n)
        m /= np.linalg.norm(m)
        R = (a @ m) / (dirs @ m)
        kern = dirs[:, :, None] * n[None, None, :] - n[None, :, None] * dirs[:, None, :]
        out += coef * 0.5 * phi_b * np.tensordot(w * np.log(R), kern, axes=(0, 0))
    return out


def jump_identity_residual(system: BemSystem, independent: bool = True) -> float:
    """Constant-density check of the double-layer operator.

    The full-space double layer of a constant density over a closed surface
    is exactly half the density at points of a flat face, and the image part
    integrates to zero. With ``independent`` the assembled off-diagonal Kelvin
    row sums plus a separately computed self-element principal value are
    compared with ``KELVIN_PV_ROWSUM * I``, and the image row sums with zero;
    this measures quadrature error. Otherwise ``A @ 1`` is compared with
    ``(EXTERIOR_JUMP + KELVIN_PV_ROWSUM) * 1``, which only sees the image blocks
    because the Kelvin diagonal is built from the same row sums.
    """
    n = system.n_elements
    ones = np.zeros((3, n, 3))
    for axis in range(3):
        ones[axis, :, axis] = 1.0
    img = np.stack([system.matrix @ ones[a].ravel() for a in range(3)], axis=-1).reshape(n, 3, 3)
    img -= (EXTERIOR_JUMP + KELVIN_PV_ROWSUM) * np.eye(3)
    if not independent:
        return float(np.abs(img).max())
    mesh, nu = system.mesh, system.moduli.nu
    selfpv = np.array([kelvin_self_pv(mesh.corners[i], mesh.normals[i], nu) for i in range(n)])
    kel = system.kelvin_rowsum + selfpv - KELVIN_PV_ROWSUM * np.eye(3)
    return float(np.abs(kel + img).max() / (EXTERIOR_JUMP + KELVIN_PV_ROWSUM))


def weighted_norm_estimate(mesh, trace, moduli, p, radius: float, samples: int = 2000,
                           seed: int = 0, fd_step: float | None = None,
                           quad: QuadConfig = QuadConfig()) -> dict:
    """Monte Carlo estimate of ``||u/rho||^2 + ||grad u||^2`` over the half-ball of
    the given radius minus the cavity, with ``rho = sqrt(1 + |x|^2)``.

    Gradients come from central differences of the representation formula.
    Sample points closer to the wall than one element diameter are rejected
    and redrawn, which removes a thin shell from the integration domain.
    """
    p = _as_pressure(p)
    rng = np.random.default_rng(seed)
    limit = 1.5 * float(mesh.diameters.max())
    h = fd_step if fd_step is not None else 0.25 * limit
    from scipy.spatial import cKDTree

    tree = cKDTree(mesh.surface_samples(3))
    ctree = cKDTree(mesh.centroids)
    pts = []
    while len(pts) < samples:
        cand = rng.uniform(-radius, radius, size=(4 * samples, 3))
        cand[:, 2] = -np.abs(cand[:, 2])
        cand = cand[np.linalg.norm(cand, axis=1) < radius]
        cand = cand[cand[:, 2] < -h]
        d = tree.query(cand)[0]
        _, idx = ctree.query(cand)
        outside = np.einsum("ij,ij->i", cand - mesh.centroids[idx], mesh.normals[idx]) > 0
        cand = cand[(d > limit + h) & outside]
        pts.extend(cand[: samples - len(pts)])
    pts = np.array(pts)
    stencil = [pts]
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        stencil += [pts + e, pts - e]
    vals = _evaluate(mesh, trace, moduli, p, np.vstack(stencil), quad).reshape(7, samples, 3)
    u = vals[0]
    grad = np.stack([(vals[1 + 2 * k] - vals[2 + 2 * k]) / (2 * h) for k in range(3)], axis=-1)
    rho2 = 1.0 + np.einsum("ij,ij->i", pts, pts)
    dens = np.einsum("ij,ij->i", u, u) / rho2 + np.einsum("ijk,ijk->i", grad, grad)
    volume = (2.0 / 3.0) * math.pi * radius**3 - abs(mesh.signed_volume)
    est = volume * dens.mean()
    err = volume * dens.std(ddof=1) / math.sqrt(samples)
    return {"norm_sq": float(est), "norm": float(math.sqrt(est)), "std_error": float(err),
            "radius": float(radius), "samples": int(samples)}
