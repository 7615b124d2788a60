"""Generate the fused image-term kernel in ``src/halfcavity/_image_kernel.py``.

The image part of the half-space Neumann function is differentiated
symbolically, the single-layer contraction ``N_img^T n`` and the transposed
traction ``[(C grad N_img) n]^T`` are formed, and common subexpressions are
eliminated. Run from the repository root:

    python tools/gen_image_kernel.py
"""

from pathlib import Path

import sympy as sp
from sympy.printing.pycode import PythonCodePrinter

e = sp.symbols("e0 e1 e2", real=True)
n = sp.symbols("n0 n1 n2", real=True)
y3, nu, C, cn, lam, mu, w = sp.symbols("y3 nu C cn lam mu w", real=True)

r = sp.sqrt(e[0] ** 2 + e[1] ** 2 + e[2] ** 2)
f = 1 / r
g = 1 / (r - e[2])
d = lambda a, b: 1 if a == b else 0


def R1(i, j):
    return C * (
        -(f + cn * g) * d(i, j)
        - (3 - 4 * nu) * e[i] * e[j] * f**3
        + cn * (d(i, 2) * e[j] - d(j, 2) * (1 - d(i, 2)) * e[i]) * f * g
        + cn * (1 - d(i, 2)) * (1 - d(j, 2)) * e[i] * e[j] * f * g**2
    )


def R2(i, j):
    s = 1 - 2 * d(j, 2)
    return 2 * C * (
        (3 - 4 * nu) * (d(i, 2) * (1 - d(j, 2)) * e[j] + d(j, 2) * (1 - d(i, 2)) * e[i]) * f**3
        - s * d(i, j) * e[2] * f**3
        + 3 * s * e[i] * e[j] * e[2] * f**5
    )


def R3(i, j):
    s = 1 - 2 * d(j, 2)
    return 2 * C * s * (d(i, j) * f**3 - 3 * e[i] * e[j] * f**5)


Nimg = sp.Matrix(3, 3, lambda i, j: R1(i, j) + y3 * R2(i, j) + y3**2 * R3(i, j))
# d/dx of a function of eta = x - y~ equals d/d eta
G = [[[sp.diff(Nimg[i, j], e[l]) for l in range(3)] for j in range(3)] for i in range(3)]

outs = []
for j in range(3):
    outs.append(sum(Nimg[i, j] * n[i] for i in range(3)))
for j in range(3):
    div = G[0][j][0] + G[1][j][1] + G[2][j][2]
    for a in range(3):
        t = lam * div * n[a] + mu * sum((G[a][j][b] + G[b][j][a]) * n[b] for b in range(3))
        outs.append(t)

repl, reduced = sp.cse(outs, optimizations="basic")
lines = [
    '"""Fused image-term kernel. Generated by tools/gen_image_kernel.py; do not edit."""',
    "",
    "import math",
    "",
    "from numba import njit",
    "",
    "",
    "@njit(cache=True, error_model="numpy")",
    "def image_point(e0, e1, e2, y3, n0, n1, n2, w, nu, C, cn, lam, mu, acc, s_img, di):",
    '    """Accumulate ``w * N_img^T n`` into acc[0:3] and ``w * [(C grad N_img) n]^T`` into acc[12:21]."""',
]
printer = PythonCodePrinter({"standard": "python3"})
for sym, expr in repl:
    lines.append(f"    {sym} = {printer.doprint(expr)}")
lines.append("    if s_img:")
for k in range(3):
    lines.append(f"        acc[{k}] += w * ({printer.doprint(reduced[k])})")
lines.append("    if di:")
for k in range(9):
    lines.append(f"        acc[{12 + k}] += w * ({printer.doprint(reduced[3 + k])})")
out = Path(__file__).resolve().parents[1] / "src" / "halfcavity" / "_image_kernel.py"
out.write_text("\n".join(lines) + "\n")
print(f"wrote {out} ({len(repl)} subexpressions)")
