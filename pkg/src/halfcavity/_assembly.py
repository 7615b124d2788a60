"""Compiled element integration loops for the collocation BEM.

Per element and target point three quantities are integrated together:

* ``S``  (3,)   single layer  ``int N(x, y)^T n(x) dsigma``
* ``DK`` (3, 3) Kelvin part of the double layer ``int [(C grad_x N) n]^T``
* ``DI`` (3, 3) image part of the same kernel

They are packed into a length-21 buffer ``acc = [S, DK.ravel(), DI.ravel()]``.
"""

import math

import numpy as np
from numba import njit, prange

from ._image_kernel import image_point

NACC = 21


@njit(cache=True, error_model="numpy")
def _kelvin_point(r0, r1, r2, n, w, nu, C, s_kel, dk, acc):
    rr = math.sqrt(r0 * r0 + r1 * r1 + r2 * r2)
    f = 1.0 / rr
    h0, h1, h2 = r0 * f, r1 * f, r2 * f
    n0, n1, n2 = n[0], n[1], n[2]
    drdn = h0 * n0 + h1 * n1 + h2 * n2
    if s_kel:
        # Gamma is symmetric, so Gamma^T n = Gamma n
        a = -C * w * f
        b = 3.0 - 4.0 * nu
        acc[0] += a * (b * n0 + h0 * drdn)
        acc[1] += a * (b * n1 + h1 * drdn)
        acc[2] += a * (b * n2 + h2 * drdn)
    if dk:
        c = w * f * f / (8.0 * math.pi * (1.0 - nu))
        b = 1.0 - 2.0 * nu
        t = 3.0 * drdn
        acc[3] += c * (drdn * b + t * h0 * h0)
        acc[4] += c * (t * h0 * h1 - b * (h0 * n1 - h1 * n0))
        acc[5] += c * (t * h0 * h2 - b * (h0 * n2 - h2 * n0))
        acc[6] += c * (t * h1 * h0 - b * (h1 * n0 - h0 * n1))
        acc[7] += c * (drdn * b + t * h1 * h1)
        acc[8] += c * (t * h1 * h2 - b * (h1 * n2 - h2 * n1))
        acc[9] += c * (t * h2 * h0 - b * (h2 * n0 - h0 * n2))
        acc[10] += c * (t * h2 * h1 - b * (h2 * n1 - h1 * n2))
        acc[11] += c * (drdn * b + t * h2 * h2)


@njit(cache=True, error_model="numpy")
def _point(x, y, n, w, prm, s_kel, s_img, dk, di, acc):
    if s_kel or dk:
        _kelvin_point(x[0] - y[0], x[1] - y[1], x[2] - y[2], n, w, prm[2], prm[3], s_kel, dk, acc)
    if s_img or di:
        image_point(x[0] - y[0], x[1] - y[1], x[2] + y[2], y[2], n[0], n[1], n[2], w,
                    prm[2], prm[3], prm[4], prm[0], prm[1], acc, s_img, di)


@njit(cache=True, error_model="numpy")
def _tri_area(t):
    ax = t[1, 0] - t[0, 0]
    ay = t[1, 1] - t[0, 1]
    az = t[1, 2] - t[0, 2]
    bx = t[2, 0] - t[0, 0]
    by = t[2, 1] - t[0, 1]
    bz = t[2, 2] - t[0, 2]
    cx = ay * bz - az * by
    cy = az * bx - ax * bz
    cz = ax * by - ay * bx
    return 0.5 * math.sqrt(cx * cx + cy * cy + cz * cz)


@njit(cache=True, error_model="numpy")
def _rule(tri, n, y, bary, bw, prm, flags, acc, x):
    area = _tri_area(tri)
    for q in range(bary.shape[0]):
        for d in range(3):
            x[d] = bary[q, 0] * tri[0, d] + bary[q, 1] * tri[1, d] + bary[q, 2] * tri[2, d]
        _point(x, y, n, area * bw[q], prm, flags[0], flags[1], flags[2], flags[3], acc)


@njit(cache=True, error_model="numpy")
def _children(tri, out):
    # out: (4, 3, 3)
    m01 = 0.5 * (tri[0] + tri[1])
    m12 = 0.5 * (tri[1] + tri[2])
    m20 = 0.5 * (tri[2] + tri[0])
    out[0, 0], out[0, 1], out[0, 2] = tri[0], m01, m20
    out[1, 0], out[1, 1], out[1, 2] = tri[1], m12, m01
    out[2, 0], out[2, 1], out[2, 2] = tri[2], m20, m12
    out[3, 0], out[3, 1], out[3, 2] = m01, m12, m20


@njit(cache=True, error_model="numpy")
def _adaptive(tri, n, y, bary, bw, hbary, hbw, prm, flags, tol, max_depth, acc, x):
    """Adaptive 4-way subdivision driven by an embedded pair of rules.

    On each triangle the low-order rule (``bary``) and the high-order rule
    (``hbary``) are compared; the high-order value is accepted once they
    agree to ``tol`` relative to the magnitude of the whole element integral,
    otherwise the triangle is split into four. Returns False when
    ``max_depth`` is reached without agreement.
    """
    cap = 4 * max_depth + 8
    stack_tri = np.empty((cap, 3, 3))
    stack_depth = np.empty(cap, dtype=np.int64)
    kids = np.empty((4, 3, 3))
    lo = np.zeros(NACC)
    hi = np.zeros(NACC)

    _rule(tri, n, y, hbary, hbw, prm, flags, hi, x)
    scale = 0.0
    for k in range(NACC):
        scale = max(scale, abs(hi[k]))
    scale = max(scale, 1e-300)
    root_area = _tri_area(tri)

    stack_tri[0] = tri
    stack_depth[0] = 0
    top = 1
    ok = True
    first = True
    while top > 0:
        top -= 1
        t = stack_tri[top].copy()
        depth = stack_depth[top]
        lo[:] = 0.0
        _rule(t, n, y, bary, bw, prm, flags, lo, x)
        if first:
            first = False
        else:
            hi[:] = 0.0
            _rule(t, n, y, hbary, hbw, prm, flags, hi, x)
        err = 0.0
        for k in range(NACC):
            err = max(err, abs(hi[k] - lo[k]))
        budget = tol * scale * max(_tri_area(t) / root_area, 1e-3)
        if err <= budget or depth >= max_depth:
            if err > budget:
                ok = False
            for k in range(NACC):
                acc[k] += hi[k]
        else:
            _children(t, kids)
            for c in range(4):
                stack_tri[top] = kids[c]
                stack_depth[top] = depth + 1
                top += 1
    return ok


ALL = (True, True, True, True)
SELF_KELVIN = (True, False, False, False)
IMAGE_ONLY = (False, True, False, True)
KELVIN_ONLY = (True, False, True, False)
DK_ONLY = (False, False, True, False)


@njit(cache=True, error_model="numpy")
def _near(centroid, y, diam, near_factor):
    dx = centroid[0] - y[0]
    dy = centroid[1] - y[1]
    dz = centroid[2] - y[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz) < near_factor * diam


@njit(parallel=True, cache=True, error_model="numpy")
def assemble_rows(corners, normals, centroids, diam, prm, p, bary, bw, lbary, lbw, nbary, nbw, dbary, dbw,
                  near_factor, tol, max_depth, jump, pv_rowsum, A, b, flags, ksum_out):
    ne = corners.shape[0]
    for i in prange(ne):
        x = np.zeros(3)
        acc = np.zeros(NACC)
        y = centroids[i].copy()
        ksum = np.zeros((3, 3))
        rhs = np.zeros(3)
        for j in range(ne):
            acc[:] = 0.0
            n = normals[j]
            if j == i:
                # weakly singular Kelvin single layer by Duffy; smooth image terms by the regular rule
                _rule(corners[j], n, y, dbary, dbw, prm, SELF_KELVIN, acc, x)
                _rule(corners[j], n, y, bary, bw, prm, IMAGE_ONLY, acc, x)
            elif _near(centroids[j], y, diam[j], near_factor):
                # only the Kelvin part is nearly singular; the image part is smooth on the wall
                if not _adaptive(corners[j], n, y, lbary, lbw, nbary, nbw, prm, KELVIN_ONLY, tol, max_depth, acc, x):
                    flags[i] = 1
                _rule(corners[j], n, y, bary, bw, prm, IMAGE_ONLY, acc, x)
            else:
                _rule(corners[j], n, y, bary, bw, prm, ALL, acc, x)
            for a in range(3):
                rhs[a] += p * acc[a]
                for c in range(3):
                    dk = acc[3 + 3 * a + c]
                    A[3 * i + a, 3 * j + c] = dk + acc[12 + 3 * a + c]
                    ksum[a, c] += dk
        for a in range(3):
            b[3 * i + a] = rhs[a]
            for c in range(3):
                ksum_out[i, a, c] = ksum[a, c]
                e = (jump + pv_rowsum) if a == c else 0.0
                A[3 * i + a, 3 * i + c] += e - ksum[a, c]


@njit(parallel=True, cache=True, error_model="numpy")
def evaluate_points(corners, normals, centroids, diam, prm, p, f, ys, bary, bw, lbary, lbw, nbary, nbw,
                    near_factor, tol, max_depth, out, flags):
    ne = corners.shape[0]
    for m in prange(ys.shape[0]):
        x = np.zeros(3)
        acc = np.zeros(NACC)
        y = ys[m].copy()
        u = np.zeros(3)
        for j in range(ne):
            acc[:] = 0.0
            n = normals[j]
            if _near(centroids[j], y, diam[j], near_factor):
                if not _adaptive(corners[j], n, y, lbary, lbw, nbary, nbw, prm, KELVIN_ONLY, tol, max_depth, acc, x):
                    flags[m] = 1
                _rule(corners[j], n, y, bary, bw, prm, IMAGE_ONLY, acc, x)
            else:
                _rule(corners[j], n, y, bary, bw, prm, ALL, acc, x)
            for a in range(3):
                v = p * acc[a]
                for c in range(3):
                    v -= (acc[3 + 3 * a + c] + acc[12 + 3 * a + c]) * f[j, c]
                u[a] += v
        out[m] = u


@njit(cache=True, error_model="numpy")
def kelvin_double_layer_constant(corners, normals, centroids, diam, prm, ys, bary, bw, lbary, lbw, nbary, nbw,
                                 near_factor, tol, max_depth, out):
    """Kelvin double layer of the unit density along each axis: ``out[m] = sum_j DK_j``."""
    ne = corners.shape[0]
    x = np.zeros(3)
    acc = np.zeros(NACC)
    for m in range(ys.shape[0]):
        y = ys[m].copy()
        tot = np.zeros((3, 3))
        for j in range(ne):
            acc[:] = 0.0
            if _near(centroids[j], y, diam[j], near_factor):
                _adaptive(corners[j], normals[j], y, lbary, lbw, nbary, nbw, prm, DK_ONLY, tol, max_depth, acc, x)
            else:
                _rule(corners[j], normals[j], y, bary, bw, prm, DK_ONLY, acc, x)
            for a in range(3):
                for c in range(3):
                    tot[a, c] += acc[3 + 3 * a + c]
        out[m] = tot


@njit(cache=True, error_model="numpy")
def adaptive_element(tri, n, y, bary, bw, hbary, hbw, prm, tol, max_depth, acc):
    x = np.zeros(3)
    return _adaptive(tri, n, y, bary, bw, hbary, hbw, prm, KELVIN_ONLY, tol, max_depth, acc, x)
