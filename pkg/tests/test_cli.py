import json

import numpy as np
import pytest

from halfcavity import cli
from halfcavity.mesh import read_mesh

SMALL = {
    "mesh_level": 1,
    "design": {"n_rings": 3, "n_sectors": 6},
    "truth": {"kind": "sphere", "center": [0.0, 0.0, -5.0], "radii": [0.5]},
    "init": {"kind": "sphere", "center": [0.2, 0.1, -4.6], "radii": [0.4]},
    "verify": {"n_surface": 40, "n_pde": 4},
}


def write_cfg(tmp_path, name="cfg.json", **over):
    cfg = json.loads(json.dumps(SMALL))
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(cfg.get(k), dict):
            cfg[k].update(v)
        else:
            cfg[k] = v
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, command, out="out", **over):
    args = [command, "--config", write_cfg(tmp_path, **over), "--out", str(tmp_path / out)]
    return cli.main(args), tmp_path / out


def test_defaults_validate():
    cfg = cli.load_config(None)
    assert cfg.mesh_level == 2 and cfg.quadrature.duffy_order == 16
    assert cli.parse_config(cli.config_json(cfg)) == cfg


def test_unknown_key_rejected(tmp_path):
    code, _ = run(tmp_path, "verify-greens", bogus=1)
    assert code == cli.EXIT_INPUT


def test_wrong_type_rejected():
    with pytest.raises(cli.ConfigError, match="mesh_level"):
        cli.parse_config('{"mesh_level": "two"}')


def test_broken_json_reports_position():
    with pytest.raises(cli.ConfigError, match=r"cfg\.json:2:"):
        cli.parse_config('{\n  "pressure": ,\n}', "cfg.json")


def test_bad_moduli_rejected():
    with pytest.raises(cli.ConfigError, match="moduli"):
        cli.parse_config('{"moduli": {"lam": 1.0, "mu": -1.0}}')


def test_verify_greens(tmp_path, capsys):
    code, out = run(tmp_path, "verify-greens")
    assert code == cli.EXIT_OK
    body = json.loads((out / "verify_greens.json").read_text())
    assert body["passed"] and set(body["checks"]) == {"surface_traction", "decay_N", "decay_gradN", "pde_convergence"}
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "verify-greens" and "verify_greens.json" in json.dumps(man["outputs"])
    assert "surface_traction: pass" in capsys.readouterr().out


def test_verify_greens_impossible_threshold(tmp_path):
    code, _ = run(tmp_path, "verify-greens", verify={"surface_tol": 0.0})
    assert code == cli.EXIT_DOMAIN


def test_forward_outputs_and_linearity(tmp_path):
    code1, out1 = run(tmp_path, "forward", out="p1")
    code2, out2 = run(tmp_path, "forward", out="p2", pressure=2.0)
    assert code1 == code2 == cli.EXIT_OK
    a = np.loadtxt(out1 / "forward.csv", delimiter=",", skiprows=1)
    b = np.loadtxt(out2 / "forward.csv", delimiter=",", skiprows=1)
    assert np.array_equal(a[:, :2], b[:, :2])
    assert np.array_equal(2.0 * a[:, 2:], b[:, 2:])
    mesh = read_mesh(out1 / "cavity_mesh.txt")
    geo = json.loads((out1 / "geometry.json").read_text())
    assert geo["signed_volume"] == pytest.approx(mesh.signed_volume)
    assert geo["depth"] == pytest.approx(4.5, rel=1e-12)


def test_forward_mogi_peak_at_origin(tmp_path):
    code, out = run(tmp_path, "forward", design={"n_rings": 4, "n_sectors": 8, "center": True},
                    truth={"center": [0.0, 0.0, -5.0], "radii": [0.5]})
    assert code == cli.EXIT_OK
    d = np.loadtxt(out / "forward.csv", delimiter=",", skiprows=1)
    assert np.argmax(np.abs(d[:, 4])) == 0 and np.allclose(d[0, :2], 0.0)


def test_forward_prior_violation(tmp_path, capsys):
    code, out = run(tmp_path, "forward", truth={"center": [0.0, 0.0, -3.0]})
    assert code == cli.EXIT_DOMAIN
    assert "depth" in capsys.readouterr().err
    assert not (out / "forward.csv").exists()


def test_invert_round_trip(tmp_path):
    code, out = run(tmp_path, "forward", out="fw")
    assert code == cli.EXIT_OK
    args = ["invert", "--config", write_cfg(tmp_path), "--out", str(tmp_path / "inv"), "--data", str(out / "forward.csv")]
    assert cli.main(args) == cli.EXIT_OK
    res = json.loads((tmp_path / "inv" / "inversion.json").read_text())
    assert res["converged"]
    assert np.allclose(res["params"]["center"], [0, 0, -5], atol=5e-2)
    man = json.loads((tmp_path / "inv" / "manifest.json").read_text())
    assert "data_sha256" in json.dumps(man)


def test_invert_rejects_point_outside_disk(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("x1,x2,u1,u2,u3\n0.1,0.2,0,0,0\n4.0,0.0,0,0,0\n")
    args = ["invert", "--config", write_cfg(tmp_path), "--out", str(tmp_path / "o"), "--data", str(data)]
    assert cli.main(args) == cli.EXIT_INPUT
    assert "d.csv:3" in capsys.readouterr().err


def test_invert_rejects_inadmissible_init(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("x1,x2,u1,u2,u3\n0.1,0.2,0,0,0\n")
    args = ["invert", "--config", write_cfg(tmp_path, init={"center": [0.0, 0.0, -1.0]}),
            "--out", str(tmp_path / "o"), "--data", str(data)]
    assert cli.main(args) == cli.EXIT_DOMAIN


def test_sweep_rejects_large_epsilon(tmp_path, capsys):
    code, out = run(tmp_path, "sweep", sweep={"epsilons": [1e-4, 1.0]})
    assert code == cli.EXIT_DOMAIN
    assert "p/e" in capsys.readouterr().err
    assert not (out / "sweep.csv").exists()


def test_sweep_small_byte_identical(tmp_path):
    sweep = {"epsilons": [1e-5, 1e-3], "trials": 2, "hausdorff_level": 1}
    opt = {"max_iter": 6}
    c1, o1 = run(tmp_path, "sweep", out="s1", sweep=sweep, optimizer=opt, seed=3)
    c2, o2 = run(tmp_path, "sweep", out="s2", sweep=sweep, optimizer=opt, seed=3)
    assert c1 == c2 == cli.EXIT_OK
    assert (o1 / "sweep.csv").read_bytes() == (o2 / "sweep.csv").read_bytes()
    assert (o1 / "sweep_summary.json").read_bytes() == (o2 / "sweep_summary.json").read_bytes()
    summary = json.loads((o1 / "sweep_summary.json").read_text())
    assert {"A", "eta", "medians", "neighbor_inversions"} <= set(summary)
