"""Triangle quadrature rules in barycentric form.

Every rule is returned as ``(bary, weights)`` with ``bary`` of shape (q, 3)
and weights summing to one, so ``area * sum(w * f(bary @ corners))``
integrates over a physical triangle.
"""

import numpy as np

# 6-point Gauss rule, exact for degree 4
_A1, _B1, _W1 = 0.445948490915965, 0.108103018168070, 0.223381589678011
_A2, _B2, _W2 = 0.091576213509771, 0.816847572980459, 0.109951743655322

GAUSS6_BARY = np.array(
    [
        [_A1, _A1, _B1], [_A1, _B1, _A1], [_B1, _A1, _A1],
        [_A2, _A2, _B2], [_A2, _B2, _A2], [_B2, _A2, _A2],
    ]
)
GAUSS6_W = np.array([_W1] * 3 + [_W2] * 3)
GAUSS6_W = GAUSS6_W / GAUSS6_W.sum()

CENTROID_BARY = np.array([[1 / 3, 1 / 3, 1 / 3]])
CENTROID_W = np.array([1.0])


def gauss6():
    return GAUSS6_BARY.copy(), GAUSS6_W.copy()


def duffy_centroid_rule(order: int = 16):
    """Rule for integrands with a 1/r singularity at the triangle centroid.

    The triangle is split into three sub-triangles meeting at the centroid and
    each is pulled back to the unit square with a Duffy map, whose Jacobian
    cancels the singularity. Weights are relative to the parent area.
    """
    t, w = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    u, v = np.meshgrid(t, t, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    u, v, wt = u.ravel(), v.ravel(), (wu * wv).ravel()

    c = np.array([1 / 3, 1 / 3, 1 / 3])
    eye = np.eye(3)
    bary, weights = [], []
    for k in range(3):
        a, b = eye[k], eye[(k + 1) % 3]
        # x = c + u*(a - c) + u*v*(b - a); Jacobian factor u over a sub-triangle of area 1/3
        pts = c + u[:, None] * (a - c) + (u * v)[:, None] * (b - a)
        bary.append(pts)
        weights.append(wt * u * 2.0 / 3.0)
    return np.vstack(bary), np.concatenate(weights)


def integrate(f, corners, rule=None):
    """Integrate ``f(points) -> (q, ...)`` over a triangle with the given rule (default gauss6)."""
    bary, w = rule if rule is not None else (GAUSS6_BARY, GAUSS6_W)
    corners = np.asarray(corners, dtype=float)
    area = 0.5 * np.linalg.norm(np.cross(corners[1] - corners[0], corners[2] - corners[0]))
    vals = np.asarray(f(bary @ corners))
    return area * np.tensordot(w, vals, axes=(0, 0))


def collapsed_gauss(n: int):
    """Conical-product Gauss rule with ``n*n`` points, exact for degree ``2n - 2``."""
    t, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    u, v = np.meshgrid(t, t, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    u, v, wt = u.ravel(), v.ravel(), (wu * wv).ravel()
    # (u, v) in the square -> (1 - u, u (1 - v), u v) with Jacobian u
    bary = np.column_stack([1.0 - u, u * (1.0 - v), u * v])
    weights = 2.0 * wt * u
    return bary, weights / weights.sum()
