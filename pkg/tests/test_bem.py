import math

import numpy as np
import pytest

from halfcavity import _assembly, _kernels, bem, greens
from halfcavity._image_kernel import image_point
from halfcavity.elasticity import ElasticModuli
from halfcavity.mesh import CavityPriors, make_sphere_mesh

CENTER = np.array([0.0, 0.0, -5.0])


@pytest.fixture(scope="module")
def mod():
    return ElasticModuli(1.0, 1.0)


@pytest.fixture(scope="module")
def mogi_l2(mod):
    mesh = make_sphere_mesh(CENTER, 0.5, 2)
    system = bem.assemble(mesh, mod, 1.0)
    trace = bem.solve_trace(system)
    return mesh, system, trace


def _prm(m):
    return np.array([m.lam, m.mu, m.nu, m.kelvin_const, m.c_nu])


def test_fused_kelvin_point_matches_reference(mod, rng):
    for _ in range(20):
        x, y = rng.normal(size=3), rng.normal(size=3)
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        acc = np.zeros(_assembly.NACC)
        _assembly._kelvin_point(*(x - y), n, 0.7, mod.nu, mod.kelvin_const, True, True, acc)
        G = np.zeros((3, 3, 3))
        _kernels.kelvin_grad_into(*(x - y), mod.nu, mod.kelvin_const, G)
        K = np.zeros((3, 3))
        _kernels.traction_from_grad(G, n, mod.lam, mod.mu, K)
        S = greens.kelvin(mod, x - y).T @ n
        assert np.allclose(acc[:3], 0.7 * S, rtol=1e-13, atol=1e-15)
        assert np.allclose(acc[3:12].reshape(3, 3), 0.7 * K, rtol=1e-12, atol=1e-14)


def test_generated_image_kernel_matches_reference(mod, rng):
    for _ in range(20):
        x = np.array([*rng.normal(size=2), -rng.uniform(0.1, 3)])
        y = np.array([*rng.normal(size=2), -rng.uniform(0.1, 3)])
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        acc = np.zeros(_assembly.NACC)
        image_point(x[0] - y[0], x[1] - y[1], x[2] + y[2], y[2], *n, 1.3,
                    mod.nu, mod.kelvin_const, mod.c_nu, mod.lam, mod.mu, acc, True, True)
        Nimg = greens.neumann_image(mod, x, y)
        K = np.zeros((3, 3))
        _kernels.traction_kernel_into(x, y, n, mod.lam, mod.mu, mod.nu, mod.kelvin_const, mod.c_nu, K, False, True)
        scale = np.abs(K).max()
        assert np.allclose(acc[:3], 1.3 * Nimg.T @ n, rtol=1e-12, atol=1e-15)
        assert np.allclose(acc[12:21].reshape(3, 3), 1.3 * K, rtol=1e-11, atol=1e-13 * scale)


def test_adaptive_matches_tight_reference(mod):
    tri = np.array([[0.0, 0.0, -1.0], [0.2, 0.0, -1.0], [0.0, 0.2, -1.0]])
    n = np.array([0.0, 0.0, -1.0])
    y = np.array([0.05, 0.05, -1.03])
    prm = _prm(mod)
    q = bem.QuadConfig()
    acc = np.zeros(_assembly.NACC)
    assert _assembly.adaptive_element(tri, n, y, *q.near_rule(), prm, 1e-8, 12, acc)
    ref = np.zeros(_assembly.NACC)
    assert _assembly.adaptive_element(tri, n, y, *bem.QuadConfig(near_low_order=10, near_order=12).near_rule(),
                                      prm, 1e-13, 16, ref)
    assert np.abs(acc - ref).max() <= 1e-7 * np.abs(ref).max()


def test_kelvin_self_pv():
    eq = np.array([[0.0, 0.0, -1.0], [1.0, 0.0, -1.0], [0.5, math.sqrt(3) / 2, -1.0]])
    n = np.array([0.0, 0.0, 1.0])
    assert np.abs(bem.kelvin_self_pv(eq, n, 0.25)).max() < 1e-15
    tri = np.array([[0.0, 0.0, 0.0], [1.3, 0.1, 0.0], [0.2, 0.9, 0.0]])
    pv = bem.kelvin_self_pv(tri, n, 0.25)
    assert np.allclose(pv, -pv.T) and np.abs(pv).max() > 1e-3
    # scale invariant, and rotates with the element
    assert np.allclose(bem.kelvin_self_pv(3.7 * tri, n, 0.25), pv, atol=1e-15)
    R = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1.0]])
    rot = bem.kelvin_self_pv(tri @ R.T, n, 0.25)
    assert np.allclose(rot, R @ pv @ R.T, atol=1e-15)


def test_system_basic(mogi_l2, mod):
    mesh, system, trace = mogi_l2
    assert system.matrix.shape == (3 * mesh.n_elements,) * 2
    assert np.isfinite(system.matrix).all() and np.isfinite(system.rhs).all()
    assert trace.residual < 1e-10
    assert system.diagnostics["rcond"] > 1e-3


def test_rhs_exactly_linear_in_p(mogi_l2, mod):
    mesh, system, _ = mogi_l2
    s2 = bem.assemble(mesh, mod, 2.0)
    assert np.array_equal(s2.rhs, 2.0 * system.rhs)
    assert np.array_equal(s2.matrix, system.matrix)


def test_assembly_deterministic(mogi_l2, mod):
    mesh, system, _ = mogi_l2
    again = bem.assemble(mesh, mod, 1.0)
    assert np.array_equal(again.matrix, system.matrix)


def test_jump_identity(mogi_l2):
    _, system, _ = mogi_l2
    assert bem.jump_identity_residual(system) < 1e-6
    assert bem.jump_identity_residual(system, independent=False) < 1e-12


def test_kelvin_double_layer_of_constant(mod):
    mesh = make_sphere_mesh(CENTER, 1.0, 2)
    vals = bem.kelvin_double_layer_constant(mesh, mod, [CENTER, CENTER + [0.3, 0.2, -0.1], CENTER + [3, 0, 0]])
    # regular 6-point rule on elements a few diameters away limits this to ~1e-7
    assert np.allclose(vals[0], np.eye(3), atol=1e-6)
    assert np.allclose(vals[1], np.eye(3), atol=1e-6)
    assert np.allclose(vals[2], 0, atol=1e-6)


def test_mogi_signed(mogi_l2, mod):
    mesh, _, trace = mogi_l2
    u = bem.surface_displacement(mesh, trace, mod, 1.0, np.zeros((1, 2)))[0]
    mogi = (1 - mod.nu) * 0.5**3 / 5.0**2
    # tension on the wall: the cavity contracts and the surface subsides
    assert u[2] == pytest.approx(-mogi, rel=0.05)
    assert abs(u[0]) < 1e-12 and abs(u[1]) < 1e-12


def test_axisymmetry(mogi_l2, mod):
    mesh, _, trace = mogi_l2
    u = bem.surface_displacement(mesh, trace, mod, 1.0, [[1.5, 0.0], [0.0, 1.5], [-1.5, 0.0]])
    assert u[0, 2] == pytest.approx(u[1, 2], rel=1e-3)
    assert u[0, 2] == pytest.approx(u[2, 2], rel=1e-3)
    assert u[0, 0] == pytest.approx(u[1, 1], rel=1e-3)


def test_linearity_in_p(mogi_l2, mod):
    mesh, system, trace = mogi_l2
    pts = np.array([[0.5, 0.1], [1.0, -2.0]])
    u1 = bem.surface_displacement(mesh, trace, mod, 1.0, pts)
    tr3 = bem.forward_solve(mesh, mod, 3.0)
    u3 = bem.surface_displacement(mesh, tr3, mod, 3.0, pts)
    assert np.abs(tr3.values - 3 * trace.values).max() <= 1e-13 * np.abs(tr3.values).max()
    assert np.abs(u3 - 3 * u1).max() <= 1e-13 * np.abs(u3).max()


def test_far_field_decay(mogi_l2, mod):
    mesh, _, trace = mogi_l2
    ray = np.array([1.0, 0.5, -0.5]) / np.linalg.norm([1.0, 0.5, -0.5])
    scaled = []
    for r in np.geomspace(10.0, 3.5e3, 8):
        y = CENTER + r * ray
        scaled.append(np.linalg.norm(bem.eval_displacement(mesh, trace, mod, 1.0, y)) * r)
    scaled = np.array(scaled)
    # |u| |y| stays bounded; for a volume source it actually decays like 1/|y|
    assert scaled.max() < 2 * scaled[0]


def test_evaluation_guards(mogi_l2, mod):
    mesh, _, trace = mogi_l2
    with pytest.raises(bem.NearFieldError):
        bem.eval_displacement(mesh, trace, mod, 1.0, CENTER + [0.52, 0, 0])
    with pytest.raises(ValueError):
        bem.eval_displacement(mesh, trace, mod, 1.0, CENTER)
    with pytest.raises(ValueError):
        bem.eval_displacement(mesh, trace, mod, 1.0, [0, 0, 0.5])
    with pytest.raises(ValueError):
        bem.surface_displacement(mesh, trace, mod, 1.0, [[0, 0, -0.1]])


def test_prior_violation(mod):
    mesh = make_sphere_mesh((0, 0, -2), 0.5, 1)
    with pytest.raises(bem.PriorViolationError) as err:
        bem.assemble(mesh, mod, 1.0, CavityPriors(D0=4.0, s0=3.0))
    assert err.value.violations[0].kind == "depth"


def test_singular_system_reported(mogi_l2):
    mesh, system, _ = mogi_l2
    bad = bem.BemSystem(np.zeros_like(system.matrix), system.rhs, mesh, system.moduli, 1.0)
    with pytest.raises(bem.SolveError):
        bem.solve_trace(bad)


def test_deep_sphere_convergence(mod):
    errs = []
    for level in (1, 2, 3):
        mesh = make_sphere_mesh((0, 0, -20), 1.0, level)
        trace = bem.forward_solve(mesh, mod, 1.0)
        ur = trace.radial_component(mesh, (0, 0, -20))
        errs.append(np.abs(ur / -0.25 - 1).mean())
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.03


def test_wall_stress_matches_lame(mod):
    # stress just outside the wall against the full-space solution sigma_rr = p (a/r)^3
    c = np.array([0.0, 0.0, -20.0])
    mesh = make_sphere_mesh(c, 1.0, 3)
    trace = bem.forward_solve(mesh, mod, 1.0)
    r = 1.0 + 1.5 * mesh.diameters.max()
    y = c + r * np.array([1.0, 0.0, 0.0])
    h = 1e-3
    grad = np.zeros((3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        grad[:, k] = (bem.eval_displacement(mesh, trace, mod, 1.0, y + e)
                      - bem.eval_displacement(mesh, trace, mod, 1.0, y - e)) / (2 * h)
    E = 0.5 * (grad + grad.T)
    S = mod.lam * np.trace(E) * np.eye(3) + 2 * mod.mu * E
    assert S[0, 0] == pytest.approx(r**-3, rel=0.03)


def test_weighted_norm(mogi_l2, mod):
    mesh, _, trace = mogi_l2
    a = bem.weighted_norm_estimate(mesh, trace, mod, 1.0, 8.0, samples=300, seed=3)
    b = bem.weighted_norm_estimate(mesh, trace, mod, 1.0, 8.0, samples=300, seed=3)
    assert a == b
    tr2 = bem.forward_solve(mesh, mod, 2.0)
    c = bem.weighted_norm_estimate(mesh, tr2, mod, 2.0, 8.0, samples=300, seed=3)
    assert c["norm"] == pytest.approx(2 * a["norm"], rel=1e-12)
    d = bem.weighted_norm_estimate(mesh, trace, mod, 1.0, 16.0, samples=300, seed=3)
    assert d["norm"] < 1.25 * a["norm"]
