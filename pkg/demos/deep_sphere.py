"""
Deep sphere against the full-space Lame solution
=================================================

Far below the free surface a pressurized spherical cavity barely feels the
boundary, so the wall displacement approaches the Lame value p a / (4 mu).
The boundary condition here pulls the wall inward, so the computed radial
displacement is negative.
"""

# %%
import numpy as np

from halfcavity import bem
from halfcavity.elasticity import ElasticModuli
from halfcavity.mesh import make_sphere_mesh

moduli = ElasticModuli(1.0, 1.0)
center, a, p = np.array([0.0, 0.0, -20.0]), 1.0, 1.0
lame = p * a / (4 * moduli.mu)

# %%
# Refine the icosphere and watch the mean radial trace settle.
for level in (1, 2, 3):
    mesh = make_sphere_mesh(center, a, level)
    system = bem.assemble(mesh, moduli, p)
    trace = bem.solve_trace(system)
    ur = trace.radial_component(mesh, center)
    print(f"level {level}: {mesh.n_elements:5d} elements, mean u_r {ur.mean():+.5f}, "
          f"error {abs(-ur.mean() / lame - 1):.2%}, cond ~ {system.diagnostics['cond_estimate']:.1f}")

# %%
# Away from the wall the field decays like a^3 / r^2.
dirs = np.eye(3)
for r in (1.5, 2.0, 4.0):
    u = bem.eval_displacement(mesh, trace, moduli, p, center + r * dirs)
    print(f"r = {r}: u_r {np.einsum('ij,ij->i', u, dirs)} vs {-p * a**3 / (4 * moduli.mu * r**2):+.5f}")
