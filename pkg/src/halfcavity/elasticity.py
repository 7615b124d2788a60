"""Isotropic linear elasticity: Lamé moduli, constitutive law, traction, and the
uniform-expansion field used to homogenize the cavity boundary condition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SYM_TOL = 1e-12
UNIT_TOL = 1e-10


@dataclass(frozen=True)
class ElasticModuli:
    """Lamé parameters with the derived constants the kernels need.

    Construction fails unless ``mu > 0`` and ``3*lam + 2*mu > 0``.
    """

    lam: float
    mu: float
    nu: float = field(init=False)
    xi0: float = field(init=False)
    kelvin_const: float = field(init=False)
    c_nu: float = field(init=False)

    def __post_init__(self):
        lam, mu = float(self.lam), float(self.mu)
        if not (math.isfinite(lam) and math.isfinite(mu)):
            raise ValueError("Lamé parameters must be finite")
        if mu <= 0:
            raise ValueError(f"shear modulus must be positive, got mu={mu}")
        if 3 * lam + 2 * mu <= 0:
            raise ValueError(f"bulk condition 3*lam + 2*mu > 0 violated (lam={lam}, mu={mu})")
        nu = lam / (2 * (lam + mu))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "xi0", min(2 * mu, 2 * mu + 3 * lam))
        object.__setattr__(self, "kelvin_const", 1.0 / (16 * math.pi * mu * (1 - nu)))
        object.__setattr__(self, "c_nu", 4 * (1 - nu) * (1 - 2 * nu))

    @classmethod
    def from_poisson(cls, mu: float, nu: float) -> "ElasticModuli":
        """Build from shear modulus and a target Poisson ratio."""
        return cls(lam=2 * mu * nu / (1 - 2 * nu), mu=mu)

    @property
    def bulk_factor(self) -> float:
        """3*lam + 2*mu, the modulus of a uniform dilatation."""
        return 3 * self.lam + 2 * self.mu


@dataclass(frozen=True)
class Pressure:
    p: float

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValueError(f"pressure must be positive and finite, got {self.p}")

    def __float__(self):
        return float(self.p)


def _as_pressure(p) -> float:
    return float(p) if isinstance(p, Pressure) else float(Pressure(float(p)))


def isotropic_stress(moduli: ElasticModuli, strain) -> np.ndarray:
    E = np.asarray(strain, dtype=float)
    if E.shape != (3, 3):
        raise ValueError(f"strain must be 3x3, got shape {E.shape}")
    if np.max(np.abs(E - E.T)) > SYM_TOL:
        raise ValueError("strain tensor is not symmetric")
    return moduli.lam * np.trace(E) * np.eye(3) + 2 * moduli.mu * E


def traction(stress, normal) -> np.ndarray:
    S = np.asarray(stress, dtype=float)
    n = np.asarray(normal, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
        raise ValueError(f"normal must be a unit vector, |n|={np.linalg.norm(n)}")
    return S @ n


def strain_of_gradient(grad_u) -> np.ndarray:
    """Symmetric part of a displacement gradient ``grad_u[i, k] = d u_i / d x_k``."""
    G = np.asarray(grad_u, dtype=float)
    return 0.5 * (G + G.T)


def ubar(moduli: ElasticModuli, p, x) -> np.ndarray:
    """Uniform expansion ``p/(3 lam + 2 mu) * x``; its traction on any surface is ``p n``."""
    return _as_pressure(p) / moduli.bulk_factor * np.asarray(x, dtype=float)


def ubar_strain(moduli: ElasticModuli, p) -> np.ndarray:
    return _as_pressure(p) / moduli.bulk_factor * np.eye(3)
