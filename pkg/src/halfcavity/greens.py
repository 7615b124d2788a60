"""Kelvin matrix and the traction-free half-space Neumann function.

With the source ``y`` below the free surface and its mirror image
``y~ = (y1, y2, -y3)``, the Neumann function splits as

    N(x, y) = Gamma(x - y) + R1(eta) + y3 * R2(eta) + y3**2 * R3(eta),   eta = x - y~

``N[i, j]`` is the i-th displacement component at ``x`` for a unit force along
``e_j`` at ``y``. The columns of ``N`` are traction free on ``x3 = 0`` and
``N(x, y) = N(y, x)^T``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .elasticity import ElasticModuli

# Richardson step relative to the distance from x to the nearer of y, y~
RICHARDSON_STEP = 1e-4


def _point(v, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or not np.isfinite(v).all():
        raise ValueError(f"{name} must be a finite 3-vector")
    return v


def _check_pair(x, y):
    x, y = _point(x, "x"), _point(y, "y")
    if x[2] > 0 or y[2] > 0:
        raise ValueError("points must lie in the closed lower half-space")
    if x[2] + y[2] >= 0:
        # x and y both on the surface: the image argument reaches g~'s singular set
        raise ValueError("x3 + y3 must be negative (at most one point on the surface)")
    if np.array_equal(x, y):
        raise ValueError("coincident field and source points")
    return x, y


def kelvin(moduli: ElasticModuli, x) -> np.ndarray:
    """Full-space fundamental solution ``Gamma(x)``."""
    x = _point(x, "x")
    if not np.any(x):
        raise ValueError("Kelvin matrix is singular at the origin")
    out = np.zeros((3, 3))
    _kernels.kelvin_into(x[0], x[1], x[2], moduli.nu, moduli.kelvin_const, out)
    return out


def kelvin_grad(moduli: ElasticModuli, x) -> np.ndarray:
    """``G[i, j, l] = d Gamma_ij / d x_l``."""
    x = _point(x, "x")
    if not np.any(x):
        raise ValueError("Kelvin matrix is singular at the origin")
    out = np.zeros((3, 3, 3))
    _kernels.kelvin_grad_into(x[0], x[1], x[2], moduli.nu, moduli.kelvin_const, out)
    return out


def _eta(eta):
    eta = _point(eta, "eta")
    if eta[2] >= 0:
        raise ValueError("image argument needs eta3 < 0")
    return eta


def image_r1(moduli: ElasticModuli, eta) -> np.ndarray:
    e = _eta(eta)
    out = np.zeros((3, 3))
    _kernels.r1_into(e[0], e[1], e[2], moduli.nu, moduli.kelvin_const, moduli.c_nu, 1.0, out)
    return out


def image_r2(moduli: ElasticModuli, eta) -> np.ndarray:
    e = _eta(eta)
    out = np.zeros((3, 3))
    _kernels.r2_into(e[0], e[1], e[2], moduli.nu, moduli.kelvin_const, 1.0, out)
    return out


def image_r3(moduli: ElasticModuli, eta) -> np.ndarray:
    e = _eta(eta)
    out = np.zeros((3, 3))
    _kernels.r3_into(e[0], e[1], e[2], moduli.kelvin_const, 1.0, out)
    return out


def _neumann_raw(moduli, x, y, kelvin_part=True, image_part=True):
    out = np.zeros((3, 3))
    _kernels.neumann_into(x, y, moduli.nu, moduli.kelvin_const, moduli.c_nu, out, kelvin_part, image_part)
    return out


def neumann(moduli: ElasticModuli, x, y) -> np.ndarray:
    """Half-space Neumann function ``N(x, y)``.

    Either point may sit on the free surface, but not both: the image terms
    only need ``x3 + y3 < 0``.
    """
    x, y = _check_pair(x, y)
    return _neumann_raw(moduli, x, y)


def neumann_image(moduli: ElasticModuli, x, y) -> np.ndarray:
    """``N - Gamma``: the three image terms summed."""
    x, y = _check_pair(x, y)
    return _neumann_raw(moduli, x, y, kelvin_part=False)


def _richardson_image_grad(moduli, x, y):
    d = min(np.linalg.norm(x - y), np.linalg.norm(x - y * [1, 1, -1]))
    h = RICHARDSON_STEP * d
    G = np.zeros((3, 3, 3))
    for l in range(3):
        e = np.zeros(3)
        e[l] = 1.0

        def central(s):
            return (_neumann_raw(moduli, x + s * e, y, False) - _neumann_raw(moduli, x - s * e, y, False)) / (2 * s)

        G[:, :, l] = (4.0 * central(h / 2) - central(h)) / 3.0
    return G


def grad_neumann(moduli: ElasticModuli, x, y, method: str = "analytic") -> np.ndarray:
    """``G[i, j, l] = d N_ij / d x_l``.

    The Kelvin part is always analytic. ``method`` picks the image part:
    ``"analytic"`` or ``"richardson"`` (central differences extrapolated once).
    """
    x, y = _check_pair(x, y)
    G = np.zeros((3, 3, 3))
    _kernels.kelvin_grad_into(*(x - y), moduli.nu, moduli.kelvin_const, G)
    if method == "analytic":
        _kernels.image_grad_into(x[0] - y[0], x[1] - y[1], x[2] + y[2], y[2],
                                 moduli.nu, moduli.kelvin_const, moduli.c_nu, G)
    elif method == "richardson":
        G += _richardson_image_grad(moduli, x, y)
    else:
        raise ValueError(f"unknown method {method!r}")
    return G


def traction_kernel(moduli: ElasticModuli, x, y, n, method: str = "analytic") -> np.ndarray:
    """``[(C grad_x N(x, y)) n]^T``: row j is the traction at x of column j of N."""
    n = _point(n, "n")
    if abs(np.linalg.norm(n) - 1.0) > 1e-10:
        raise ValueError("normal must have unit length")
    G = grad_neumann(moduli, x, y, method)
    out = np.zeros((3, 3))
    _kernels.traction_from_grad(G, n, moduli.lam, moduli.mu, out)
    return out


def lame_residual_fd(moduli: ElasticModuli, x, y, h: float) -> np.ndarray:
    """``div C grad N(., y)`` at x by second-order differences, one column per force direction.

    The Laplacian uses the 7-point stencil and the mixed derivatives of
    ``grad div`` use four-corner central differences.
    """
    x, y = _check_pair(x, y)
    lam, mu = moduli.lam, moduli.mu

    def N(p):
        return _neumann_raw(moduli, p, y)

    eye = np.eye(3)
    c = N(x)
    hess = np.empty((3, 3, 3, 3))  # hess[k, l] = d2 N / dx_k dx_l
    for k in range(3):
        hess[k, k] = (N(x + h * eye[k]) - 2 * c + N(x - h * eye[k])) / h**2
        for l in range(k + 1, 3):
            a, b = h * eye[k], h * eye[l]
            m = (N(x + a + b) - N(x + a - b) - N(x - a + b) + N(x - a - b)) / (4 * h**2)
            hess[k, l] = hess[l, k] = m
    lap = hess[0, 0] + hess[1, 1] + hess[2, 2]
    # grad div: (grad div u)_i = sum_k d2 u_k / dx_i dx_k
    graddiv = np.einsum("ikkj->ij", hess)
    return mu * lap + (lam + mu) * graddiv


@dataclass
class SamplePlan:
    """Where ``verify_kernel_suite`` probes the kernels."""

    n_surface: int = 200
    surface_radius: float = 50.0
    source_depths: tuple = (1.0, 5.0)
    n_pde: int = 20
    pde_steps: tuple = (2e-2, 1e-2)  # relative to the distance to the source
    decay_radii: tuple = (10.0, 1000.0)
    decay_samples: int = 25
    seed: int = 0


@dataclass
class KernelReport:
    surface_residual: float
    pde_residuals: list = field(default_factory=list)  # (coarse, fine) per point
    pde_ratios: list = field(default_factory=list)
    decay_slope_N: list = field(default_factory=list)
    decay_slope_gradN: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {k: (np.asarray(v).tolist() if isinstance(v, (list, np.ndarray)) else float(v))
                for k, v in asdict(self).items()}


def surface_traction_residual(moduli, rng, n_points, radius, depths) -> float:
    """Largest ``|T(x, y; e3)| / (|N(x, y)| / |x - y|)`` over random x on the surface."""
    e3 = np.array([0.0, 0.0, 1.0])
    worst = 0.0
    for k in range(n_points):
        r = radius * np.sqrt(rng.uniform())
        t = rng.uniform(0, 2 * np.pi)
        x = np.array([r * np.cos(t), r * np.sin(t), 0.0])
        d = depths[k % len(depths)]
        y = np.array([*rng.uniform(-1, 1, 2), -d * (1 + rng.uniform())])
        T = traction_kernel(moduli, x, y, e3)
        scale = np.linalg.norm(neumann(moduli, x, y)) / np.linalg.norm(x - y)
        worst = max(worst, np.linalg.norm(T) / scale)
    return worst


def _slope(radii, values):
    return float(np.polyfit(np.log(radii), np.log(values), 1)[0])


def verify_kernel_suite(moduli: ElasticModuli, plan: SamplePlan = SamplePlan()) -> KernelReport:
    """Numerical self-checks of the Neumann function; always returns a report."""
    rng = np.random.default_rng(plan.seed)
    surf = surface_traction_residual(moduli, rng, plan.n_surface, plan.surface_radius, plan.source_depths)
    report = KernelReport(surface_residual=surf)

    for _ in range(plan.n_pde):
        y = np.array([*rng.uniform(-1, 1, 2), -rng.uniform(2, 4)])
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        d = rng.uniform(0.5, 1.5)
        x = y + d * v
        x[2] = min(x[2], -0.1)
        dist = np.linalg.norm(x - y)
        res = [np.abs(lame_residual_fd(moduli, x, y, s * dist)).max() for s in plan.pde_steps]
        report.pde_residuals.append(res)
        report.pde_ratios.append(res[0] / res[1])

    radii = np.geomspace(*plan.decay_radii, plan.decay_samples)
    y = np.array([0.0, 0.0, -1.0])
    rays = [np.array([1.0, 0.0, 0.0]), np.array([1.0, 1.0, -1.0]) / np.sqrt(3), np.array([0.0, 0.0, -1.0])]
    for ray in rays:
        pts = [y + r * ray if ray[2] < 0 else r * ray for r in radii]
        nN = [np.linalg.norm(neumann(moduli, p, y)) for p in pts]
        nG = [np.linalg.norm(grad_neumann(moduli, p, y)) for p in pts]
        report.decay_slope_N.append(_slope(radii, nN))
        report.decay_slope_gradN.append(_slope(radii, nG))
    return report
