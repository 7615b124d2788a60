"""Compiled point kernels for the half-space Neumann function.

Index conventions: ``N[i, j]`` is the i-th displacement component at the field
point x due to a unit force along e_j at the source y, and
``G[i, j, l] = d N[i, j] / d x_l``. All routines write into caller-owned
buffers so the assembly loops never allocate.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _delta(a, b):
    return 1.0 if a == b else 0.0


@njit(cache=True)
def kelvin_into(x0, x1, x2, nu, C, out):
    r = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
    f = 1.0 / r
    f3 = f * f * f
    x = (x0, x1, x2)
    a = (3.0 - 4.0 * nu) * f
    for i in range(3):
        for j in range(3):
            out[i, j] += -C * (a * _delta(i, j) + x[i] * x[j] * f3)


@njit(cache=True)
def kelvin_grad_into(x0, x1, x2, nu, C, out):
    r = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
    f = 1.0 / r
    f3 = f * f * f
    f5 = f3 * f * f
    x = (x0, x1, x2)
    b = 3.0 - 4.0 * nu
    for i in range(3):
        for j in range(3):
            for l in range(3):
                fl = -x[l] * f3
                v = b * _delta(i, j) * fl
                v += (_delta(i, l) * x[j] + x[i] * _delta(j, l)) * f3
                v += -3.0 * x[i] * x[j] * x[l] * f5
                out[i, j, l] += -C * v


@njit(cache=True)
def r1_into(e0, e1, e2, nu, C, cn, scale, out):
    r = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
    f = 1.0 / r
    g = 1.0 / (r - e2)
    f3 = f * f * f
    e = (e0, e1, e2)
    for i in range(3):
        di3 = _delta(i, 2)
        for j in range(3):
            dj3 = _delta(j, 2)
            v = -(f + cn * g) * _delta(i, j)
            v -= (3.0 - 4.0 * nu) * e[i] * e[j] * f3
            v += cn * (di3 * e[j] - dj3 * (1.0 - di3) * e[i]) * f * g
            v += cn * (1.0 - di3) * (1.0 - dj3) * e[i] * e[j] * f * g * g
            out[i, j] += scale * C * v


@njit(cache=True)
def r2_into(e0, e1, e2, nu, C, scale, out):
    r = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
    f = 1.0 / r
    f3 = f * f * f
    f5 = f3 * f * f
    e = (e0, e1, e2)
    for i in range(3):
        di3 = _delta(i, 2)
        for j in range(3):
            dj3 = _delta(j, 2)
            s = 1.0 - 2.0 * dj3
            v = (3.0 - 4.0 * nu) * (di3 * (1.0 - dj3) * e[j] + dj3 * (1.0 - di3) * e[i]) * f3
            v -= s * _delta(i, j) * e2 * f3
            v += 3.0 * s * e[i] * e[j] * e2 * f5
            out[i, j] += scale * 2.0 * C * v


@njit(cache=True)
def r3_into(e0, e1, e2, C, scale, out):
    r = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
    f = 1.0 / r
    f3 = f * f * f
    f5 = f3 * f * f
    e = (e0, e1, e2)
    for i in range(3):
        for j in range(3):
            s = 1.0 - 2.0 * _delta(j, 2)
            out[i, j] += scale * 2.0 * C * s * (_delta(i, j) * f3 - 3.0 * e[i] * e[j] * f5)


@njit(cache=True)
def image_grad_into(e0, e1, e2, y3, nu, C, cn, out):
    """Gradient in eta of R1 + y3*R2 + y3**2*R3, accumulated into ``out``."""
    r = math.sqrt(e0 * e0 + e1 * e1 + e2 * e2)
    f = 1.0 / r
    g = 1.0 / (r - e2)
    f2 = f * f
    f3 = f2 * f
    f4 = f2 * f2
    f5 = f4 * f
    e = (e0, e1, e2)
    b = 3.0 - 4.0 * nu
    for l in range(3):
        dl3 = _delta(l, 2)
        fl = -e[l] * f3
        gl = -g * g * (e[l] * f - dl3)
        for i in range(3):
            di3 = _delta(i, 2)
            dil = _delta(i, l)
            for j in range(3):
                dj3 = _delta(j, 2)
                djl = _delta(j, l)
                dij = _delta(i, j)
                pe = dil * e[j] + e[i] * djl
                # R1
                v1 = -(fl + cn * gl) * dij
                v1 -= b * (pe * f3 + e[i] * e[j] * 3.0 * f2 * fl)
                lin = di3 * e[j] - dj3 * (1.0 - di3) * e[i]
                dlin = di3 * djl - dj3 * (1.0 - di3) * dil
                v1 += cn * (dlin * f * g + lin * (fl * g + f * gl))
                m = (1.0 - di3) * (1.0 - dj3)
                v1 += cn * m * (pe * f * g * g + e[i] * e[j] * (fl * g * g + 2.0 * f * g * gl))
                # R2
                s = 1.0 - 2.0 * dj3
                a2 = di3 * (1.0 - dj3) * e[j] + dj3 * (1.0 - di3) * e[i]
                da2 = di3 * (1.0 - dj3) * djl + dj3 * (1.0 - di3) * dil
                v2 = b * (da2 * f3 + a2 * 3.0 * f2 * fl)
                v2 -= s * dij * (dl3 * f3 + e2 * 3.0 * f2 * fl)
                v2 += 3.0 * s * ((pe * e2 + e[i] * e[j] * dl3) * f5 + e[i] * e[j] * e2 * 5.0 * f4 * fl)
                # R3
                v3 = s * (dij * 3.0 * f2 * fl - 3.0 * pe * f5 - 15.0 * e[i] * e[j] * f4 * fl)
                out[i, j, l] += C * v1 + y3 * 2.0 * C * v2 + y3 * y3 * 2.0 * C * v3


@njit(cache=True)
def neumann_into(x, y, nu, C, cn, out, kelvin, image):
    if kelvin:
        kelvin_into(x[0] - y[0], x[1] - y[1], x[2] - y[2], nu, C, out)
    if image:
        e0 = x[0] - y[0]
        e1 = x[1] - y[1]
        e2 = x[2] + y[2]
        r1_into(e0, e1, e2, nu, C, cn, 1.0, out)
        if y[2] != 0.0:
            r2_into(e0, e1, e2, nu, C, y[2], out)
            r3_into(e0, e1, e2, C, y[2] * y[2], out)


@njit(cache=True)
def grad_neumann_into(x, y, nu, C, cn, out, kelvin, image):
    if kelvin:
        kelvin_grad_into(x[0] - y[0], x[1] - y[1], x[2] - y[2], nu, C, out)
    if image:
        image_grad_into(x[0] - y[0], x[1] - y[1], x[2] + y[2], y[2], nu, C, cn, out)


@njit(cache=True)
def traction_from_grad(G, n, lam, mu, out):
    """Transposed traction ``out[j, a] = sigma(column j)[a, b] n[b]`` (accumulated)."""
    for j in range(3):
        div = G[0, j, 0] + G[1, j, 1] + G[2, j, 2]
        for a in range(3):
            t = lam * div * n[a]
            for b in range(3):
                t += mu * (G[a, j, b] + G[b, j, a]) * n[b]
            out[j, a] += t


@njit(cache=True)
def traction_kernel_into(x, y, n, lam, mu, nu, C, cn, out, kelvin, image):
    G = np.zeros((3, 3, 3))
    grad_neumann_into(x, y, nu, C, cn, G, kelvin, image)
    traction_from_grad(G, n, lam, mu, out)
