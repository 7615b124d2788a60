"""
Recovering a cavity from surface data
=====================================

Synthetic displacements on an equal-area grid over the disk |x| < s0, then a
projected Levenberg-Marquardt fit of center and radius. The first fit uses
data from the same mesh level (an inverse crime); the second uses data from
a finer mesh, so the discretization error shows up as a small bias.
"""

# %%
import numpy as np

from halfcavity import inverse
from halfcavity.elasticity import ElasticModuli
from halfcavity.mesh import CavityParams, CavityPriors

moduli = ElasticModuli(1.0, 1.0)
priors = CavityPriors(D0=3.5, s0=3.0)
design = inverse.MeasurementDesign(priors.s0, 8, 8)
truth = CavityParams.sphere((0.0, 0.0, -5.0), 0.5)
init = CavityParams.sphere((0.5, 0.3, -4.0), 0.3)
model = inverse.ForwardModel(moduli, 1.0, priors, level=2)

# %%
data = model.synthetic(truth, design)
res = inverse.invert(data, init, model)
print(res.message, res.iterations, "iterations, misfit", res.misfit)
print("recovered", res.params.to_vector(), "truth", truth.to_vector())

# %%
fine = inverse.ForwardModel(moduli, 1.0, priors, level=3).synthetic(truth, design)
res = inverse.invert(fine, init, model)
print("cross-level:", res.params.to_vector(), "misfit", res.misfit)
print("center error", np.linalg.norm(np.subtract(res.params.center, truth.center)),
      "radius error", res.params.radii[0] - 0.5)
