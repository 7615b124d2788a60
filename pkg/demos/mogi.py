"""
Surface uplift above a small cavity
===================================

For a/d = 0.1 the vertical surface displacement above the cavity is close to
the point-source (Mogi) value (1 - nu) p a^3 / (mu d^2). Sign follows the
boundary condition: the surface moves down.
"""

# %%
import numpy as np

from halfcavity import bem
from halfcavity.elasticity import ElasticModuli
from halfcavity.mesh import make_sphere_mesh

moduli = ElasticModuli(1.0, 1.0)
d, a, p = 5.0, 0.5, 1.0
mesh = make_sphere_mesh((0.0, 0.0, -d), a, 2)
trace = bem.forward_solve(mesh, moduli, p)

# %%
rho = np.linspace(0.0, 10.0, 11)
u = bem.surface_displacement(mesh, trace, moduli, p, np.column_stack([rho, 0 * rho]))
point = (1 - moduli.nu) * p * a**3 / moduli.mu * d / (rho**2 + d**2) ** 1.5
for r, (ux, _, uz), m in zip(rho, u, point):
    print(f"rho {r:5.1f}  u1 {ux:+.3e}  u3 {uz:+.3e}  point source u3 {-m:+.3e}")

# %%
# Horizontal over vertical displacement is rho / d for a point source.
print("u1/u3 at rho = 5:", u[5, 0] / u[5, 2])
