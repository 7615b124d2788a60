"""Batch front door: ``halfcavity {verify-greens,forward,invert,sweep}``.

Exit codes: 0 success, 1 domain or threshold failure, 2 input or parse failure.
Every run writes ``manifest.json`` next to its outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, bem, greens, inverse
from .elasticity import ElasticModuli
from .mesh import CavityParams, CavityPriors, geometry_report, validate_against_priors, write_mesh

log = logging.getLogger("halfcavity")

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ModuliCfg:
    lam: float = 1.0
    mu: float = 1.0


@dataclass
class PriorsCfg:
    D0: float = 3.5
    s0: float = 3.0
    r0: float = 1.0
    E0: float = 1.0


@dataclass
class CavityCfg:
    kind: str = "sphere"
    center: list = field(default_factory=lambda: [0.0, 0.0, -5.0])
    radii: list = field(default_factory=lambda: [0.5])
    orientation: list = field(default_factory=lambda: [0.0, 0.0, 0.0])


@dataclass
class QuadCfg:
    near_factor: float = 3.0
    tol: float = 1e-8
    max_depth: int = 12
    duffy_order: int = 16
    near_low_order: int = 6
    near_order: int = 7


@dataclass
class DesignCfg:
    n_rings: int = 8
    n_sectors: int = 8
    center: bool = False


@dataclass
class OptimizerCfg:
    max_iter: int = 200
    gtol: float = 1e-10
    xtol: float = 1e-12
    rel_step: float = 1e-4
    abs_step: float = 1e-6
    damping0: float = 1e-3
    n_starts: int = 1
    start_spread: float = 0.2


@dataclass
class SweepCfg:
    epsilons: list = field(default_factory=lambda: [1e-5, 1e-5 * 10 ** (2 / 3), 1e-5 * 10 ** (4 / 3), 1e-3])
    trials: int = 5
    hausdorff_level: int = 3


@dataclass
class VerifyCfg:
    surface_tol: float = 1e-6
    slope_tol: float = 0.1
    pde_ratio_tol: float = 0.5
    n_surface: int = 200
    surface_radius: float = 50.0
    n_pde: int = 20


@dataclass
class RunConfig:
    moduli: ModuliCfg = field(default_factory=ModuliCfg)
    pressure: float = 1.0
    priors: PriorsCfg = field(default_factory=PriorsCfg)
    truth: CavityCfg = field(default_factory=CavityCfg)
    init: CavityCfg = field(default_factory=lambda: CavityCfg(center=[0.5, 0.3, -4.0], radii=[0.3]))
    mesh_level: int = 2
    quadrature: QuadCfg = field(default_factory=QuadCfg)
    design: DesignCfg = field(default_factory=DesignCfg)
    optimizer: OptimizerCfg = field(default_factory=OptimizerCfg)
    sweep: SweepCfg = field(default_factory=SweepCfg)
    verify: VerifyCfg = field(default_factory=VerifyCfg)
    seed: int = 0
    output_dir: str = "out"

    # derived domain objects -------------------------------------------------
    def moduli_obj(self) -> ElasticModuli:
        return ElasticModuli(self.moduli.lam, self.moduli.mu)

    def priors_obj(self) -> CavityPriors:
        return CavityPriors(**dataclasses.asdict(self.priors))

    def cavity(self, which: str) -> CavityParams:
        c = getattr(self, which)
        return CavityParams(c.kind, c.center, c.radii, c.orientation)

    def quad_obj(self) -> bem.QuadConfig:
        return bem.QuadConfig(**dataclasses.asdict(self.quadrature))

    def design_obj(self) -> inverse.MeasurementDesign:
        return inverse.MeasurementDesign(self.priors.s0, **dataclasses.asdict(self.design))

    def model(self) -> inverse.ForwardModel:
        return inverse.ForwardModel(self.moduli_obj(), self.pressure, self.priors_obj(), self.mesh_level, self.quad_obj())

    def inversion_obj(self) -> inverse.InversionConfig:
        return inverse.InversionConfig(**dataclasses.asdict(self.optimizer), seed=self.seed)

    def validate(self):
        """Build every domain object once so bad values fail at load time."""
        checks = {
            "moduli": self.moduli_obj,
            "priors": self.priors_obj,
            "truth": lambda: self.cavity("truth"),
            "init": lambda: self.cavity("init"),
            "quadrature": self.quad_obj,
            "design": self.design_obj,
            "pressure": lambda: inverse.ForwardModel(self.moduli_obj(), self.pressure, self.priors_obj()),
        }
        for name, build in checks.items():
            try:
                build()
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{name}: {exc}") from None
        if not 0 <= self.mesh_level <= 5:
            raise ConfigError("mesh_level: must be between 0 and 5")
        if self.sweep.trials < 1:
            raise ConfigError("sweep.trials: must be positive")
        if not self.sweep.epsilons or any(not (isinstance(e, (int, float)) and e > 0) for e in self.sweep.epsilons):
            raise ConfigError("sweep.epsilons: need a non-empty list of positive numbers")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed: must fit in an unsigned 64-bit integer")
        return self


def _coerce(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected an object, got {type(data).__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigError(f"unknown field(s): {', '.join(where + u for u in unknown)}")
    kwargs = {}
    defaults = cls()
    for name, value in data.items():
        fpath = f"{path}.{name}" if path else name
        default = getattr(defaults, name)
        if dataclasses.is_dataclass(default):
            kwargs[name] = _coerce(type(default), value, fpath)
        elif isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{fpath}: expected true/false")
            kwargs[name] = value
        elif isinstance(default, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{fpath}: expected an integer")
            kwargs[name] = value
        elif isinstance(default, float):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{fpath}: expected a number")
            kwargs[name] = float(value)
        elif isinstance(default, list):
            if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
                raise ConfigError(f"{fpath}: expected a list of numbers")
            kwargs[name] = [float(v) for v in value]
        elif isinstance(default, str):
            if not isinstance(value, str):
                raise ConfigError(f"{fpath}: expected a string")
            kwargs[name] = value
    return cls(**kwargs)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return _coerce(RunConfig, data, "").validate()


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, str(path))


def config_json(cfg: RunConfig) -> str:
    return json.dumps(dataclasses.asdict(cfg), sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# outputs


def _versions() -> dict:
    import numba
    import scipy

    return {"halfcavity": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out: Path, command: str, cfg: RunConfig, outputs, extra=None):
    text = config_json(cfg)
    manifest = {
        "command": command,
        "config": json.loads(text),
        "config_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "master_seed": cfg.seed,
        "versions": _versions(),
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _finite_or_none(v):
    return v if isinstance(v, float) and math.isfinite(v) else None


# ---------------------------------------------------------------------------
# commands


def cmd_verify_greens(cfg: RunConfig, out: Path) -> int:
    v = cfg.verify
    plan = greens.SamplePlan(n_surface=v.n_surface, surface_radius=v.surface_radius, n_pde=v.n_pde, seed=cfg.seed)
    report = greens.verify_kernel_suite(cfg.moduli_obj(), plan)
    checks = {
        "surface_traction": bool(report.surface_residual <= v.surface_tol),
        "decay_N": all(abs(s + 1.0) <= v.slope_tol for s in report.decay_slope_N),
        "decay_gradN": all(abs(s + 2.0) <= v.slope_tol for s in report.decay_slope_gradN),
        "pde_convergence": all(bool(abs(r - 4.0) <= v.pde_ratio_tol) for r in report.pde_ratios),
    }
    body = {"report": report.as_dict(), "thresholds": dataclasses.asdict(v), "checks": checks,
            "passed": all(checks.values())}
    path = _write_json(out / "verify_greens.json", body)
    write_manifest(out, "verify-greens", cfg, [path])
    for name, ok in checks.items():
        print(f"{name}: {'pass' if ok else 'FAIL'}")
    return EXIT_OK if body["passed"] else EXIT_DOMAIN


def cmd_forward(cfg: RunConfig, out: Path) -> int:
    truth = cfg.cavity("truth")
    mesh = truth.to_mesh(cfg.mesh_level)
    bad = validate_against_priors(mesh, cfg.priors_obj())
    if bad:
        for b in bad:
            print(f"prior violation [{b.kind}]: {b.message}", file=sys.stderr)
        return EXIT_DOMAIN
    geo = geometry_report(mesh)
    print(json.dumps(geo, indent=2, sort_keys=True))
    data = cfg.model().synthetic(truth, cfg.design_obj())
    csv_path = out / "forward.csv"
    data.write_csv(csv_path)
    mesh_path = out / "cavity_mesh.txt"
    write_mesh(mesh_path, mesh)
    geo_path = _write_json(out / "geometry.json", geo)
    write_manifest(out, "forward", cfg, [csv_path, mesh_path, geo_path])
    return EXIT_OK


def cmd_invert(cfg: RunConfig, out: Path, data_file) -> int:
    try:
        data = inverse.MeasurementSet.read_csv(data_file, cfg.priors.s0, cfg.design_obj())
    except (OSError, ValueError) as exc:
        print(f"invalid data file: {exc}", file=sys.stderr)
        return EXIT_INPUT
    model = cfg.model()
    init = cfg.cavity("init")
    bad = model.violations(init)
    if bad:
        for b in bad:
            print(f"initial guess violates priors [{b.kind}]: {b.message}", file=sys.stderr)
        return EXIT_DOMAIN
    res = inverse.invert(data, init, model, cfg.inversion_obj())
    path = _write_json(out / "inversion.json", res.as_dict())
    write_manifest(out, "invert", cfg, [path], {"data_sha256": _sha256(Path(data_file))})
    print(f"converged={res.converged} misfit={res.misfit:.6g} iterations={res.iterations} ({res.message})")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Path, workers: int = 1) -> int:
    p = cfg.pressure
    bad = [e for e in cfg.sweep.epsilons if not e < p / math.e]
    if bad:
        print(f"epsilon values {bad} violate the admissibility condition epsilon < p/e (p = {p:g}) "
              "of the stability estimate", file=sys.stderr)
        return EXIT_DOMAIN
    model = cfg.model()
    truth, init = cfg.cavity("truth"), cfg.cavity("init")
    for name, c in (("truth", truth), ("init", init)):
        for b in model.violations(c):
            print(f"{name} violates priors [{b.kind}]: {b.message}", file=sys.stderr)
            return EXIT_DOMAIN
    scfg = inverse.SweepConfig(cfg.sweep.trials, cfg.sweep.hausdorff_level, cfg.seed, workers)
    records, summary = inverse.stability_sweep(truth, init, cfg.sweep.epsilons, model, cfg.design_obj(),
                                               scfg, cfg.inversion_obj())
    csv_path = out / "sweep.csv"
    inverse.write_sweep_csv(csv_path, records)
    s = summary.as_dict()
    for k in ("A", "eta", "residual"):
        s[k] = _finite_or_none(s[k])
    s["n_records"] = len(records)
    fit_path = _write_json(out / "sweep_summary.json", s)
    write_manifest(out, "sweep", cfg, [csv_path, fit_path], {"workers": workers})
    print(f"{len(records)} records, {summary.n_failed} failed; medians {summary.medians}; "
          f"A={summary.A:.4g} eta={summary.eta:.4g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="halfcavity", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("verify-greens", "forward", "invert", "sweep"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON run configuration (defaults built in)")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("--workers", type=int, default=1, help="parallel sweep trials")
        sp.add_argument("--seed", type=int, help="master seed (overrides the config)")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "invert":
            sp.add_argument("--data", required=True, help="CSV with columns x1,x2,u1,u2,u3")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
            cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.workers < 1:
        print("--workers must be positive", file=sys.stderr)
        return EXIT_INPUT
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "verify-greens":
            return cmd_verify_greens(cfg, out)
        if args.command == "forward":
            return cmd_forward(cfg, out)
        if args.command == "invert":
            return cmd_invert(cfg, out, args.data)
        return cmd_sweep(cfg, out, args.workers)
    except (bem.PriorViolationError, bem.SolveError, bem.QuadratureError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
