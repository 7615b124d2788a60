"""Parametric cavity recovery from surface displacements, and a noise sweep.

Data are displacements at points of the free-surface disk of radius ``s0``.
The forward map meshes a parametric cavity, solves the boundary integral
equation and evaluates the representation formula at the data points. The
misfit is an area-weighted sum of squared residuals, so it approximates the
squared L2 norm of the data error over the disk.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from . import bem
from .elasticity import ElasticModuli, _as_pressure
from .mesh import CavityParams, CavityPriors, Violation, hausdorff_distance, validate_against_priors

log = logging.getLogger(__name__)

DATA_COLUMNS = ("x1", "x2", "u1", "u2", "u3")


# ---------------------------------------------------------------------------
# measurement design and data


@dataclass(frozen=True)
class MeasurementDesign:
    """Polar grid of equal-area cells over the disk of radius ``s0``.

    Ring k spans radii ``s0*sqrt(k/n_rings)`` to ``s0*sqrt((k+1)/n_rings)``, so
    every ring has the same area; each is cut into ``n_sectors`` equal sectors
    and sampled at the median-area radius. With ``center`` the innermost ring
    is a single disk cell sampled at the origin.
    """

    s0: float
    n_rings: int = 8
    n_sectors: int = 8
    center: bool = False

    def __post_init__(self):
        if not self.s0 > 0:
            raise ValueError("s0 must be positive")
        if self.n_rings < 1 or self.n_sectors < 1:
            raise ValueError("need at least one ring and one sector")

    def points(self) -> np.ndarray:
        pts = []
        for k in range(self.n_rings):
            if k == 0 and self.center:
                pts.append((0.0, 0.0))
                continue
            r = self.s0 * math.sqrt((k + 0.5) / self.n_rings)
            # stagger alternate rings so points do not line up radially
            shift = 0.5 * (k % 2)
            for j in range(self.n_sectors):
                t = 2 * math.pi * (j + 0.5 + shift) / self.n_sectors
                pts.append((r * math.cos(t), r * math.sin(t)))
        return np.array(pts)

    def weights(self) -> np.ndarray:
        ring = math.pi * self.s0**2 / self.n_rings
        w = []
        for k in range(self.n_rings):
            if k == 0 and self.center:
                w.append(ring)
            else:
                w.extend([ring / self.n_sectors] * self.n_sectors)
        return np.array(w)


@dataclass
class MeasurementSet:
    points: np.ndarray  # (m, 2) surface coordinates
    displacements: np.ndarray  # (m, 3)
    weights: np.ndarray  # (m,) area weights
    s0: float
    epsilon: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.displacements = np.asarray(self.displacements, dtype=float).reshape(-1, 3)
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        m = len(self.points)
        if len(self.displacements) != m or len(self.weights) != m:
            raise ValueError("points, displacements and weights must have matching lengths")
        if not (np.isfinite(self.points).all() and np.isfinite(self.displacements).all()):
            raise ValueError("measurement data must be finite")
        if np.any(self.weights <= 0):
            raise ValueError("area weights must be positive")
        r2 = np.einsum("ij,ij->i", self.points, self.points)
        if np.any(r2 >= self.s0**2):
            k = int(np.argmax(r2))
            raise ValueError(f"point {k} ({self.points[k, 0]:.6g}, {self.points[k, 1]:.6g}) lies outside the disk s0 = {self.s0:.6g}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")

    def __len__(self):
        return len(self.points)

    def norm(self) -> float:
        """Discrete L2 norm of the displacement field over the disk."""
        return float(math.sqrt(np.sum(self.weights * np.einsum("ij,ij->i", self.displacements, self.displacements))))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(",".join(DATA_COLUMNS) + "\n")
            for (x1, x2), u in zip(self.points, self.displacements):
                fh.write(",".join(f"{v:.17g}" for v in (x1, x2, *u)) + "\n")

    @classmethod
    def read_csv(cls, path, s0: float, design: MeasurementDesign | None = None) -> "MeasurementSet":
        """Load ``x1,x2,u1,u2,u3`` rows.

        Weights come from ``design`` when the points coincide with it, and are
        otherwise uniform over the disk area.
        """
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != DATA_COLUMNS:
                raise ValueError(f"{path}: header must be {','.join(DATA_COLUMNS)}, got {header}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(DATA_COLUMNS):
                    raise ValueError(f"{path}:{lineno}: expected {len(DATA_COLUMNS)} fields, got {len(row)}")
                try:
                    vals = [float(v) for v in row]
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: {exc}") from None
                if not np.isfinite(vals).all():
                    raise ValueError(f"{path}:{lineno}: non-finite value")
                if math.hypot(vals[0], vals[1]) >= s0:
                    raise ValueError(f"{path}:{lineno}: point ({vals[0]:g}, {vals[1]:g}) lies outside the disk s0 = {s0:g}")
                rows.append(vals)
        if not rows:
            raise ValueError(f"{path}: no data rows")
        arr = np.array(rows)
        pts = arr[:, :2]
        if design is not None and design.s0 == s0:
            dp = design.points()
            if dp.shape == pts.shape and np.allclose(dp, pts, rtol=0, atol=1e-12 * s0):
                return cls(pts, arr[:, 2:], design.weights(), s0)
        w = np.full(len(pts), math.pi * s0**2 / len(pts))
        return cls(pts, arr[:, 2:], w, s0)


def add_noise(data: MeasurementSet, epsilon: float, seed: int) -> MeasurementSet:
    """Add i.i.d. Gaussian noise whose field RMS, ``sqrt(mean |du|^2)``, is ``epsilon``.

    Each component gets standard deviation ``epsilon / sqrt(3)``, so the RMS
    matches ``epsilon`` in expectation.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    out = replace(data, displacements=data.displacements.copy(), epsilon=float(epsilon), seed=int(seed))
    if epsilon == 0:
        return out
    rng = np.random.default_rng(seed)
    out.displacements = data.displacements + rng.normal(scale=epsilon / math.sqrt(3.0), size=data.displacements.shape)
    return out


# ---------------------------------------------------------------------------
# forward map


@dataclass(frozen=True)
class ForwardModel:
    """Everything the forward map needs besides the cavity parameters."""

    moduli: ElasticModuli
    p: float
    priors: CavityPriors
    level: int = 2
    quad: bem.QuadConfig = field(default_factory=bem.QuadConfig)

    def __post_init__(self):
        object.__setattr__(self, "p", _as_pressure(self.p))

    def violations(self, params: CavityParams):
        try:
            mesh = params.to_mesh(self.level)
        except ValueError as exc:
            return [Violation("shape", str(exc))]
        return validate_against_priors(mesh, self.priors)

    def predict(self, params: CavityParams, points) -> np.ndarray:
        """Surface displacements at ``points`` (m, 2); raises on prior violation."""
        mesh = params.to_mesh(self.level)
        trace = bem.forward_solve(mesh, self.moduli, self.p, self.priors, self.quad)
        return bem.surface_displacement(mesh, trace, self.moduli, self.p, points, self.quad)

    def synthetic(self, params: CavityParams, design: MeasurementDesign) -> MeasurementSet:
        pts = design.points()
        return MeasurementSet(pts, self.predict(params, pts), design.weights(), design.s0)


def _residuals(model: ForwardModel, params: CavityParams, data: MeasurementSet):
    """Weighted residual vector, or None when ``params`` leave the admissible class."""
    try:
        pred = model.predict(params, data.points)
    except (bem.PriorViolationError, ValueError):
        return None
    return (np.sqrt(data.weights)[:, None] * (pred - data.displacements)).ravel()


def misfit(params: CavityParams, data: MeasurementSet, model: ForwardModel) -> float:
    """``sum_k w_k |u_pred(x_k) - u_obs(x_k)|^2``; ``inf`` for inadmissible parameters."""
    r = _residuals(model, params, data)
    return math.inf if r is None else float(r @ r)


# ---------------------------------------------------------------------------
# Levenberg-Marquardt


@dataclass(frozen=True)
class InversionConfig:
    max_iter: int = 200
    gtol: float = 1e-10
    xtol: float = 1e-12
    rel_step: float = 1e-4
    abs_step: float = 1e-6  # times D0
    damping0: float = 1e-3
    n_starts: int = 1
    start_spread: float = 0.2  # times D0, for the extra starts
    seed: int = 0


@dataclass
class InversionResult:
    params: CavityParams
    misfit: float
    iterations: int
    converged: bool
    hausdorff_to_truth: float | None = None
    message: str = ""
    history: list = field(default_factory=list)
    n_forward: int = 0
    initial_misfit: float = math.inf

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "misfit": self.misfit,
            "iterations": self.iterations,
            "converged": self.converged,
            "hausdorff_to_truth": self.hausdorff_to_truth,
            "message": self.message,
            "misfit_history": list(self.history),
            "n_forward": self.n_forward,
            "initial_misfit": self.initial_misfit,
        }


def parameter_box(kind: str, priors: CavityPriors):
    """Coordinate bounds implied by the priors; the full class is checked on the mesh."""
    D0 = priors.D0
    lo = [-2 * D0, -2 * D0, -2 * D0]
    hi = [2 * D0, 2 * D0, -D0]
    rlo, rhi = 1e-3 * D0, 0.5 * D0
    if kind == "sphere":
        return np.array(lo + [rlo]), np.array(hi + [rhi])
    return np.array(lo + [rlo] * 3 + [-math.pi] * 3), np.array(hi + [rhi] * 3 + [math.pi] * 3)


def _lm_single(model, data, init: CavityParams, cfg: InversionConfig) -> InversionResult:
    lo, hi = parameter_box(init.kind, model.priors)
    count = [0]

    def res(x):
        count[0] += 1
        return _residuals(model, init.with_vector(x), data)

    def jac(x, r):
        J = np.empty((len(r), len(x)))
        for k in range(len(x)):
            h = max(cfg.rel_step * abs(x[k]), cfg.abs_step * model.priors.D0)
            xk = x.copy()
            xk[k] += h
            rk = res(xk) if xk[k] <= hi[k] else None
            if rk is None:
                # step back into the admissible set
                xk[k] = x[k] - h
                rk = res(xk)
                if rk is None:
                    raise RuntimeError(f"no admissible finite-difference step for parameter {k}")
                h = -h
            J[:, k] = (rk - r) / h
        return J

    x = np.clip(init.to_vector(), lo, hi)
    r = res(x)
    if r is None:
        return InversionResult(init, math.inf, 0, False, message="initial parameters violate the priors",
                               n_forward=count[0])
    f = float(r @ r)
    result = InversionResult(init.with_vector(x), f, 0, False, initial_misfit=f, history=[f])
    mu = None
    it = 0
    message = "iteration limit reached"
    converged = False
    try:
        J = jac(x, r)
        while it < cfg.max_iter:
            it += 1
            g = J.T @ r
            if np.max(np.abs(g)) < cfg.gtol:
                converged, message = True, "gradient norm below tolerance"
                break
            A = J.T @ J
            d = np.maximum(np.diag(A), 1e-30 * max(np.diag(A).max(), 1e-300))
            if mu is None:
                mu = cfg.damping0
            accepted = False
            while True:
                step = np.linalg.solve(A + mu * np.diag(d), -g)
                xn = np.clip(x + step, lo, hi)
                if np.linalg.norm(xn - x) < cfg.xtol:
                    converged, message = True, "step norm below tolerance"
                    break
                rn = res(xn)
                fn = math.inf if rn is None else float(rn @ rn)
                if fn < f:
                    accepted = True
                    mu = max(mu / 3.0, 1e-12)
                    break
                mu *= 4.0
                if mu > 1e20:
                    message = "damping exhausted without descent"
                    break
            if not accepted:
                break
            x, r, f = xn, rn, fn
            result.history.append(f)
            J = jac(x, r)
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        message = f"stopped: {exc}"
    result.params = init.with_vector(x)
    result.misfit = f
    result.iterations = it
    result.converged = converged
    result.message = message
    result.n_forward = count[0]
    return result


def invert(data: MeasurementSet, init: CavityParams, model: ForwardModel,
           config: InversionConfig = InversionConfig()) -> InversionResult:
    """Fit cavity parameters to ``data``; the best of ``config.n_starts`` runs is returned.

    The first run starts at ``init``; further starts shift the center and
    radii by seeded Gaussian offsets of size ``start_spread * D0``.
    """
    bad = model.violations(init)
    if bad:
        raise bem.PriorViolationError(bad)
    rng = np.random.default_rng(config.seed)
    lo, hi = parameter_box(init.kind, model.priors)
    starts = [init]
    for _ in range(config.n_starts - 1):
        v = init.to_vector()
        jitter = rng.normal(scale=config.start_spread * model.priors.D0, size=v.shape)
        if init.kind == "ellipsoid":
            jitter[6:] = rng.normal(scale=0.3, size=3)
        starts.append(init.with_vector(np.clip(v + jitter, lo, hi)))
    best = None
    for k, start in enumerate(starts):
        if k > 0 and model.violations(start):
            continue
        res = _lm_single(model, data, start, config)
        log.info("start %d: misfit %.6g after %d iterations (%s)", k, res.misfit, res.iterations, res.message)
        if best is None or res.misfit < best.misfit:
            best = res
    return best


# ---------------------------------------------------------------------------
# stability sweep


@dataclass
class SweepRecord:
    epsilon: float
    trial: int
    seed: int
    params: CavityParams
    hausdorff: float
    misfit: float
    converged: bool
    iterations: int = 0


@dataclass
class SweepSummary:
    A: float
    eta: float
    residual: float
    epsilons: list
    medians: list
    n_failed: int
    neighbor_inversions: int

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def log_log_modulus(eps, p):
    """``log|log(eps/p)|``, the argument of the stability modulus."""
    eps = np.asarray(eps, dtype=float)
    return np.log(np.abs(np.log(eps / p)))


def fit_modulus(eps, dh, p):
    """Least-squares fit of ``dh ~ A * (log|log(eps/p)|)^(-eta)``; returns (A, eta, rms residual)."""
    L = log_log_modulus(eps, p)
    dh = np.asarray(dh, dtype=float)
    # log-linear fit gives the starting point for the fit in (A, eta)
    slope, icpt = np.polyfit(np.log(L), np.log(dh), 1)
    sol = least_squares(lambda q: q[0] * L ** (-q[1]) - dh, x0=[math.exp(icpt), -slope])
    A, eta = sol.x
    return float(A), float(eta), float(math.sqrt(np.mean(sol.fun**2)))


def trial_seed(master_seed: int, eps_index: int, trial: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(eps_index, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class SweepConfig:
    trials: int = 5
    hausdorff_level: int = 3
    master_seed: int = 0
    workers: int = 1


def _run_trial(args):
    model, clean, truth, init, inv_cfg, hlevel, eps, i, t, seed = args
    data = add_noise(clean, eps, seed)
    res = invert(data, init, model, inv_cfg)
    dh = hausdorff_distance(res.params.to_mesh(hlevel), truth.to_mesh(hlevel))
    log.info("eps %.3g trial %d: d_H %.4g, misfit %.4g, %s", eps, t, dh, res.misfit, res.message)
    return SweepRecord(float(eps), t, seed, res.params, dh, res.misfit, res.converged, res.iterations)


def stability_sweep(truth: CavityParams, init: CavityParams, eps_grid, model: ForwardModel,
                    design: MeasurementDesign, config: SweepConfig = SweepConfig(),
                    inv_config: InversionConfig = InversionConfig()):
    """Invert noisy synthetic data for every (epsilon, trial) pair.

    Returns the records, sorted by (epsilon index, trial), and a summary with
    the per-epsilon median Hausdorff distances and the fitted modulus.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(not (0 < e < model.p / math.e) for e in eps_grid):
        raise ValueError("every epsilon must satisfy 0 < epsilon < p/e")
    clean = model.synthetic(truth, design)
    jobs = [
        (model, clean, truth, init, inv_config, config.hausdorff_level, e, i, t, trial_seed(config.master_seed, i, t))
        for i, e in enumerate(eps_grid)
        for t in range(config.trials)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_run_trial, jobs))
    else:
        records = [_run_trial(j) for j in jobs]
    return records, summarize(records, eps_grid, model.p)


def summarize(records, eps_grid, p) -> SweepSummary:
    ok = [r for r in records if r.converged and math.isfinite(r.hausdorff)]
    n_failed = len(records) - len(ok)
    eps_used, medians = [], []
    for e in sorted(eps_grid):
        vals = [r.hausdorff for r in ok if r.epsilon == e]
        if vals:
            eps_used.append(e)
            medians.append(float(np.median(vals)))
    # medians should not decrease as epsilon grows
    inversions = sum(1 for a, b in zip(medians, medians[1:]) if b < a)
    A = eta = resid = math.nan
    if len(medians) >= 2 and all(m > 0 for m in medians):
        A, eta, resid = fit_modulus(eps_used, medians, p)
    return SweepSummary(A, eta, resid, eps_used, medians, n_failed, inversions)


def param_names(kind: str):
    if kind == "sphere":
        return ["c1", "c2", "c3", "a"]
    return ["c1", "c2", "c3", "r1", "r2", "r3", "phi1", "phi2", "phi3"]


def write_sweep_csv(path, records):
    kind = records[0].params.kind if records else "sphere"
    cols = ["epsilon", "trial", "seed", *param_names(kind), "hausdorff", "misfit", "converged"]
    lines = [",".join(cols)]
    for r in records:
        vals = [f"{r.epsilon:.17g}", str(r.trial), str(r.seed)]
        vals += [f"{v:.17g}" for v in r.params.to_vector()]
        vals += [f"{r.hausdorff:.17g}", f"{r.misfit:.17g}", "1" if r.converged else "0"]
        lines.append(",".join(vals))
    Path(path).write_text("\n".join(lines) + "\n")
