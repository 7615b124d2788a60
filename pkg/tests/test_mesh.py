import math

import numpy as np
import pytest

from halfcavity.mesh import (
    CavityParams,
    CavityPriors,
    TriSurfaceMesh,
    geometry_report,
    hausdorff_distance,
    make_ellipsoid_mesh,
    make_sphere_mesh,
    read_mesh,
    unit_icosphere,
    validate_against_priors,
    write_mesh,
)


def test_icosahedron_counts():
    v, f = unit_icosphere(0)
    assert len(v) == 12 and len(f) == 20
    for level in range(4):
        assert make_sphere_mesh((0, 0, -5), 1.0, level).n_elements == 20 * 4**level


def test_level_range():
    with pytest.raises(ValueError):
        make_sphere_mesh((0, 0, -5), 1.0, 8)
    with pytest.raises(ValueError):
        make_sphere_mesh((0, 0, -5), 1.0, -1)


def test_sphere_volume_area_level4():
    m = make_sphere_mesh((0, 0, -5), 2.0, 4)
    assert m.signed_volume == pytest.approx(4 / 3 * math.pi * 8, rel=5e-3)
    assert m.area == pytest.approx(4 * math.pi * 4, rel=5e-3)


def test_second_order_convergence():
    errs = [abs(make_sphere_mesh((0, 0, -5), 1.0, L).signed_volume - 4 * math.pi / 3) for L in (2, 3, 4)]
    for a, b in zip(errs, errs[1:]):
        assert 3.5 < a / b < 4.5
    errs = [abs(make_sphere_mesh((0, 0, -5), 1.0, L).area - 4 * math.pi) for L in (2, 3, 4)]
    for a, b in zip(errs, errs[1:]):
        assert 3.5 < a / b < 4.5


def test_outward_normals_unit():
    m = make_sphere_mesh((1, 2, -5), 0.7, 2)
    assert np.allclose(np.linalg.norm(m.normals, axis=1), 1.0, atol=1e-12)
    radial = m.centroids - np.array([1, 2, -5])
    assert (np.einsum("ij,ij->i", radial, m.normals) > 0).all()
    assert (m.aspect_ratios <= 20).all()


def test_mesh_checks_reject_bad_surfaces():
    v, f = unit_icosphere(1)
    with pytest.raises(ValueError):
        TriSurfaceMesh(v, f[:-1])  # open surface
    with pytest.raises(ValueError):
        TriSurfaceMesh(v, f[:, ::-1])  # inward orientation
    g = f.copy()
    g[0] = g[0][[0, 2, 1]]
    with pytest.raises(ValueError):
        TriSurfaceMesh(v, g)  # inconsistent orientation


def test_ellipsoid_mesh():
    p = CavityParams.ellipsoid((0, 0, -6), (1.0, 0.6, 0.4), (0.3, -0.2, 1.1))
    m = make_ellipsoid_mesh(p, 4)
    assert m.signed_volume == pytest.approx(4 / 3 * math.pi * 1.0 * 0.6 * 0.4, rel=5e-3)
    assert np.allclose(np.linalg.norm(m.normals, axis=1), 1.0, atol=1e-12)
    s = make_ellipsoid_mesh(CavityParams.ellipsoid((0, 0, -6), (0.5, 0.5, 0.5)), 2)
    ref = make_sphere_mesh((0, 0, -6), 0.5, 2)
    assert np.allclose(np.sort(s.vertices, axis=0), np.sort(ref.vertices, axis=0))
    with pytest.raises(ValueError):
        make_ellipsoid_mesh(CavityParams.ellipsoid((0, 0, -6), (1.0, 0.05, 0.5)), 1)
    with pytest.raises(ValueError):
        make_ellipsoid_mesh(CavityParams.sphere((0, 0, -6), 1.0), 1)


def test_cavity_params():
    s = CavityParams.sphere((0, 0, -5), 0.5)
    assert s.n_params == 4
    assert s.with_vector(s.to_vector()) == s
    assert CavityParams.from_dict(s.as_dict()) == s
    e = CavityParams.ellipsoid((0, 0, -5), (1, 0.5, 0.4), (0.1, 0.2, 0.3))
    assert e.n_params == 9 and CavityParams.from_dict(e.as_dict()) == e
    for bad in [dict(kind="cube", center=(0, 0, -1), radii=(1,)), dict(kind="sphere", center=(0, 0, 1), radii=(1,)),
                dict(kind="sphere", center=(0, 0, -1), radii=(-1,)), dict(kind="ellipsoid", center=(0, 0, -1), radii=(1,))]:
        with pytest.raises(ValueError):
            CavityParams(**bad)


def test_priors_validation_examples():
    pri = CavityPriors(D0=4.0, s0=3.0)
    assert validate_against_priors(make_sphere_mesh((0, 0, -5), 0.5, 2), pri) == []
    kinds = [v.kind for v in validate_against_priors(make_sphere_mesh((0, 0, -2), 0.5, 2), pri)]
    assert "depth" in kinds
    # diameter exactly D0 violates the strict inequality
    kinds = [v.kind for v in validate_against_priors(make_sphere_mesh((0, 0, -9), 2.0, 0), pri)]
    assert "diameter" in kinds
    kinds = [v.kind for v in validate_against_priors(make_sphere_mesh((7, 0, -5), 0.5, 1), pri)]
    assert kinds == ["inclusion"]


def test_priors_invariants():
    for bad in [dict(D0=1.0, s0=0.5), dict(D0=4.0, s0=4.0), dict(D0=4.0, s0=1.0, r0=0.0), dict(D0=4.0, s0=1.0, E0=-1)]:
        with pytest.raises(ValueError):
            CavityPriors(**bad)


def test_priors_monotone_under_shrinking():
    pri = CavityPriors(D0=4.0, s0=3.0)
    for r in (1.9, 1.5, 1.0, 0.5, 0.1):
        kinds = {v.kind for v in validate_against_priors(make_sphere_mesh((0, 0, -5.9), r, 2), pri)}
        assert not kinds & {"diameter", "inclusion"}


def test_geometry_report():
    m = make_sphere_mesh((0, 0, -5), 1.0, 5)
    g = geometry_report(m)
    assert g["signed_volume"] == pytest.approx(4 * math.pi / 3, rel=2e-3)
    assert g["depth"] == pytest.approx(4.0)
    assert g["diameter"] == pytest.approx(2.0, rel=1e-2)


def test_hausdorff_cases():
    a = make_sphere_mesh((0, 0, -5), 1.0, 3)
    assert hausdorff_distance(a, a) == 0.0
    b = make_sphere_mesh((0, 0, -5), 2.0, 4)
    c = make_sphere_mesh((0, 0, -5), 1.0, 4)
    assert hausdorff_distance(c, b) == pytest.approx(1.0, rel=1e-2)
    t = np.array([0.3, -0.2, 0.1])
    d = make_sphere_mesh(np.array([0, 0, -5]) + t, 1.0, 4)
    assert hausdorff_distance(c, d) == pytest.approx(np.linalg.norm(t), rel=1e-2)


def test_hausdorff_symmetric_and_triangle(rng):
    meshes = [make_sphere_mesh((*rng.uniform(-0.5, 0.5, 2), -5 + rng.uniform(-0.5, 0.5)), rng.uniform(0.5, 1.5), 2)
              for _ in range(4)]
    for a in meshes:
        for b in meshes:
            assert hausdorff_distance(a, b) == pytest.approx(hausdorff_distance(b, a), rel=1e-12)
            for c in meshes:
                # sampled sets form a metric space
                assert hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-12


def test_mesh_io_roundtrip(tmp_path):
    m = make_ellipsoid_mesh(CavityParams.ellipsoid((0.1, 0.2, -5), (1, 0.6, 0.4), (0.3, 0.2, 0.1)), 2)
    path = tmp_path / "m.txt"
    write_mesh(path, m)
    back = read_mesh(path)
    assert np.array_equal(back.vertices, m.vertices) and np.array_equal(back.triangles, m.triangles)
    lines = path.read_text().splitlines()
    assert lines[0] == str(len(m.vertices)) and len(lines) == 1 + len(m.vertices) + m.n_elements
    (tmp_path / "bad.txt").write_text("3\n0 0 0\n1 0\n")
    with pytest.raises(ValueError):
        read_mesh(tmp_path / "bad.txt")
