"""Command-line driver: ``vdwwaves <command> [--config FILE] [--set key=value ...]``.

Configuration is flat ``key=value`` text with section prefixes
(``gas.gamma=1.4``).  Later sources win: built-in defaults, then
``--config`` files in order, then ``--set`` flags.  Every run writes
``config.txt`` (the resolved configuration, reusable with ``--config``) and
``manifest.json`` next to its CSV outputs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__, checks, exact, shock
from .errors import (
    ComplexSpeedError,
    ConstraintError,
    DomainError,
    NotFound,
    SingularPointError,
    StabilityError,
)
from .evolution import Grid2D, SchemeConfig, init_field, integrate, mass, write_snapshots_csv
from .gas import GasParameters, coefficients

COMMANDS = ("coeffs", "simulate", "exact", "shock", "sweep", "verify")

DEFAULTS = {
    **{f"gas.{f.name}": f.default for f in fields(GasParameters)},
    "grid.theta_min": 0.0,
    "grid.theta_max": 1.0,
    "grid.n_theta": 64,
    "grid.eta_min": 0.0,
    "grid.eta_max": 1.0,
    "grid.n_eta": 32,
    "grid.bc": "periodic",
    "simulate.ic": "gaussian-pulse",
    "simulate.amplitude": 0.1,
    "simulate.width": 0.1,
    "simulate.tau_end": 0.05,
    "simulate.snapshot_every": 0.0,
    "simulate.cfl": 0.4,
    "exact.variant": "wavefan_plus",
    "exact.k1": 1.0,
    "exact.k2": 0.0,
    "exact.kbar1": 1.0,
    "exact.kbar2": 0.0,
    "exact.tau": 0.0,
    "shock.C1": 1.0,
    "shock.eta_min": 1.0,
    "shock.eta_max": 100.0,
    "shock.n": 200,
    "shock.tau": 0.0,
    "shock.b_values": "",
    "shock.a_values": "",
    "shock.trend_gamma": 1.4,
    "sweep.gamma": "1.4",
    "sweep.a_tilde": "0:0.8:5",
    "sweep.b_tilde": "0:0.3:7",
    "verify.perturb_lambda0": 0.0,
    "seed": 0,
    "output_dir": "out",
}

_INT_KEYS = {"grid.n_theta", "grid.n_eta", "shock.n", "seed"}
_STR_KEYS = {
    "grid.bc",
    "simulate.ic",
    "exact.variant",
    "shock.b_values",
    "shock.a_values",
    "sweep.gamma",
    "sweep.a_tilde",
    "sweep.b_tilde",
    "output_dir",
}


class ConfigError(ValueError):
    pass


def _fmt(v):
    return f"{v:.17g}"


def _coerce(key, raw):
    if key not in DEFAULTS:
        raise ConfigError(f"unknown config key {key!r}")
    if key in _STR_KEYS:
        return str(raw)
    try:
        return int(raw) if key in _INT_KEYS else float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config_text(text):
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = _coerce(key, val)
    return out


def format_config(cfg):
    return "".join(f"{k}={_fmt(v) if isinstance(v, float) else v}\n" for k, v in sorted(cfg.items()))


def resolve_config(config_files=(), overrides=(), env=None):
    env = os.environ if env is None else env
    cfg = dict(DEFAULTS)
    if env.get("VDW_OUT"):
        cfg["output_dir"] = env["VDW_OUT"]
    for path in config_files:
        cfg.update(parse_config_text(Path(path).read_text()))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, val = (s.strip() for s in item.split("=", 1))
        cfg[key] = _coerce(key, val)
    return cfg


def gas_from(cfg):
    return GasParameters(**{f.name: float(cfg[f"gas.{f.name}"]) for f in fields(GasParameters)})


def grid_from(cfg):
    return Grid2D(
        float(cfg["grid.theta_min"]),
        float(cfg["grid.theta_max"]),
        int(cfg["grid.n_theta"]),
        float(cfg["grid.eta_min"]),
        float(cfg["grid.eta_max"]),
        int(cfg["grid.n_eta"]),
        bc=cfg["grid.bc"],
    )


def spec_from(cfg, variant=None):
    return exact.ExactSolutionSpec(
        variant or cfg["exact.variant"],
        k1=cfg["exact.k1"],
        k2=cfg["exact.k2"],
        kbar1=cfg["exact.kbar1"],
        kbar2=cfg["exact.kbar2"],
    )


def parse_range(text):
    """``"a,b,c"`` or ``"start:stop:num"`` (inclusive linspace)."""
    text = str(text).strip()
    if not text:
        return []
    if ":" in text:
        a, b, n = text.split(":")
        return [float(v) for v in np.linspace(float(a), float(b), int(n))]
    return [float(v) for v in text.split(",")]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


class Run:
    """Output directory bookkeeping for one command."""

    def __init__(self, command, cfg):
        self.command = command
        self.cfg = cfg
        self.dir = Path(cfg["output_dir"])
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files = []
        self.extra = {}

    def path(self, name):
        self.files.append(name)
        return self.dir / name

    def finish(self):
        (self.dir / "config.txt").write_text(format_config(self.cfg))
        manifest = {
            "command": self.command,
            "package_version": __version__,
            "config": {k: self.cfg[k] for k in sorted(self.cfg)},
            "files": sorted(set(self.files)),
            **self.extra,
        }
        with open(self.dir / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


COEFF_HEADER = ["gamma", "a_tilde", "b_tilde", "c0", "gamma_hat0", "lambda0", "beta_hat", "q"]


def _coeff_row(p, c):
    return [p.gamma, p.a_tilde, p.b_tilde, c.c0, c.gamma_hat0, c.lambda0, c.beta_hat, c.q]


def cmd_coeffs(cfg, jobs=1):
    p = gas_from(cfg)
    c = coefficients(p)
    run = Run("coeffs", cfg)
    row = _coeff_row(p, c)
    _write_csv(run.path("coeffs.csv"), COEFF_HEADER, [row])
    print(",".join(COEFF_HEADER))
    print(",".join(_fmt(v) for v in row))
    run.finish()
    return 0


def _initial_condition(cfg, grid, coeffs):
    ic = cfg["simulate.ic"]
    amp, width = cfg["simulate.amplitude"], cfg["simulate.width"]
    if ic.startswith("exact:"):
        spec = spec_from(cfg, ic.split(":", 1)[1])
        return None, exact.boundary(spec, coeffs), spec
    if ic == "zero":
        return (lambda th, et: np.zeros_like(th)), None, None
    thc = 0.5 * (grid.theta_min + grid.theta_max)
    etc = 0.5 * (grid.eta_min + grid.eta_max)
    if ic == "gaussian-pulse":
        return (lambda th, et: amp * np.exp(-((th - thc) ** 2 + (et - etc) ** 2) / (2 * width**2))), None, None
    if ic == "sine":
        Lt = grid.theta_max - grid.theta_min
        Le = grid.eta_max - grid.eta_min
        return (
            lambda th, et: amp * np.sin(2 * np.pi * (th - grid.theta_min) / Lt) * np.cos(2 * np.pi * (et - grid.eta_min) / Le)
        ), None, None
    raise ConfigError(f"unknown simulate.ic {ic!r}; use zero, gaussian-pulse, sine or exact:<variant>")


def cmd_simulate(cfg, jobs=1):
    p = gas_from(cfg)
    c = coefficients(p)
    grid = grid_from(cfg)
    ic, bnd, spec = _initial_condition(cfg, grid, c)
    if not grid.periodic and bnd is None:
        raise ConfigError("dirichlet-from-exact needs simulate.ic=exact:<variant>")
    scheme = SchemeConfig(cfl=cfg["simulate.cfl"])
    if grid.periodic and bnd is not None:
        # exact data as a plain initial condition; the periodic gauge ignores the source
        f0 = init_field(grid, lambda th, et: bnd.h(0.0, th, et))
    else:
        f0 = init_field(grid, ic, boundary=bnd)
    every = cfg["simulate.snapshot_every"] or None
    try:
        snaps = integrate(f0, c, cfg["simulate.tau_end"], snapshot_every=every, scheme=scheme)
    except StabilityError as e:
        raise StabilityError(f"{e} (failing tau={e.tau})", tau=e.tau) from e
    run = Run("simulate", cfg)
    write_snapshots_csv(run.path("snapshots.csv"), snaps)
    m0 = mass(snaps[0])
    ref = max(abs(m0), float(np.sum(np.abs(snaps[0].h)) * grid.dtheta * grid.deta), 1e-300)
    _write_csv(
        run.path("conservation.csv"),
        ["tau", "mass", "relative_drift"],
        [[s.tau, mass(s), abs(mass(s) - m0) / ref] for s in snaps],
    )
    run.extra["scheme"] = scheme.as_dict()
    run.extra["coefficients"] = dict(zip(COEFF_HEADER[3:], _coeff_row(p, c)[3:]))
    if spec is not None:
        TH, ET = grid.mesh()
        oracle = exact.evaluate(spec, c, snaps[-1].tau, TH, ET)
        err = float(np.max(np.abs(snaps[-1].h - oracle)))
        run.extra["final_max_error"] = err
        print(f"final max error vs exact: {err:.6e}")
    print(f"wrote {len(snaps)} snapshots to {run.dir / 'snapshots.csv'}")
    run.finish()
    return 0


def cmd_exact(cfg, jobs=1):
    c = coefficients(gas_from(cfg))
    grid = grid_from(cfg)
    spec = spec_from(cfg)
    tau = cfg["exact.tau"]
    TH, ET = grid.mesh()
    h = exact.evaluate(spec, c, tau, TH, ET)
    run = Run("exact", cfg)
    _write_csv(
        run.path("exact.csv"),
        ["tau", "theta", "eta", "h", "variant"],
        ([tau, float(a), float(b), float(u), spec.variant] for a, b, u in zip(TH.ravel(), ET.ravel(), h.ravel())),
    )
    report = exact.admissibility(spec, c).as_dict()
    try:
        r = exact.pde_residual_fd(spec, c, (np.full(TH.size, tau), TH.ravel(), ET.ravel()))
        report["max_residual"] = float(max(np.max(np.abs(r.traveling)), np.max(np.abs(r.lab))))
    except SingularPointError as e:
        report["max_residual"] = None
        report["residual_note"] = str(e)
    with open(run.path("exact_report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(report, sort_keys=True))
    run.finish()
    return 0


def cmd_shock(cfg, jobs=1):
    c = coefficients(gas_from(cfg))
    A, s = c.constant_state, c.fan_slope
    C1 = cfg["shock.C1"]
    span = (cfg["shock.eta_min"], cfg["shock.eta_max"])
    n = cfg["shock.n"]
    run = Run("shock", cfg)
    spec = exact.ExactSolutionSpec("wavefan_plus")

    def behind(x, t):
        return float(exact.evaluate_traveling(spec, c, x, t))

    closed = shock.trajectory_closed_form("forward", C1, span, n, frame_q=c.q)
    integ = shock.integrate_trajectory(behind, A, c, start=(span[0], C1 * span[0] ** shock.TRAJECTORY_EXPONENT),
                                       T_end=span[1], n_out=n)
    for name, curve in (("trajectory_closed.csv", closed), ("trajectory_integrated.csv", integ)):
        _, eta, theta = shock.lab_frame_trajectory(curve, cfg["shock.tau"])
        _write_csv(run.path(name), ["eta", "theta"], ([float(a), float(b)] for a, b in zip(eta, theta)))
    strength = shock.strength_decay(closed.T, c, C1)
    _write_csv(run.path("decay.csv"), ["eta", "strength"], ([float(a), float(b)] for a, b in zip(closed.T, strength)))
    slope = float(np.polyfit(np.log(closed.T), np.log(strength), 1)[0])
    speed, _ = shock.shock_speed(A + s, A, c)
    report = {
        "classification_wavefan_plus": shock.classify(shock.JumpState(A + s, A)),
        "classification_wavefan_minus": shock.classify(shock.JumpState(A - s, A)),
        "decay_slope": slope,
        "decay_slope_integrated": shock.fit_decay_exponent(integ, behind, A),
        "speed_at_unit_point": speed,
        "strength_prefactor": s,
    }
    b_vals, a_vals = parse_range(cfg["shock.b_values"]), parse_range(cfg["shock.a_values"])
    gamma = cfg["shock.trend_gamma"]
    tables = []
    if b_vals:
        tables.append(("b", [cfg["gas.a_tilde"]], b_vals))
    if a_vals:
        tables.append(("a", a_vals, [cfg["gas.b_tilde"]]))
    for label, avals, bvals in tables:
        rows = shock.strength_table(gamma, avals, bvals)
        _write_csv(run.path(f"trend_{label}.csv"), ["a_tilde", "b_tilde", "strength", "ideal"], rows)
        d = np.diff([r[2] for r in rows])
        report[f"trend_{label}"] = "increasing" if np.all(d > 0) else "decreasing" if np.all(d < 0) else "non-monotone"
    try:
        report["b_star"] = shock.critical_b_star(cfg["gas.a_tilde"], cfg["gas.gamma"])
    except NotFound as e:
        report["b_star"] = None
        report["b_star_note"] = str(e)
    with open(run.path("shock_report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(report, sort_keys=True))
    run.finish()
    return 0


def _sweep_point(args):
    key, base, out_dir = args
    gamma, a, b = key
    p = GasParameters(**{**base, "gamma": gamma, "a_tilde": a, "b_tilde": b})
    digest = hashlib.sha256(repr(key).encode()).hexdigest()[:16]
    path = Path(out_dir) / f"{digest}.csv"
    try:
        c = coefficients(p)
        row = _coeff_row(p, c) + [c.fan_slope, "ok"]
    except DomainError as e:
        nan = float("nan")
        row = [gamma, a, b, nan, nan, nan, nan, nan, nan, str(e).replace(",", ";")]
    _write_csv(path, COEFF_HEADER + ["strength", "status"], [row])
    return key, digest, row


def cmd_sweep(cfg, jobs=1):
    run = Run("sweep", cfg)
    part_dir = run.dir / "sweep"
    part_dir.mkdir(exist_ok=True)
    base = {f.name: float(cfg[f"gas.{f.name}"]) for f in fields(GasParameters)}
    keys = [
        (g, a, b)
        for g in parse_range(cfg["sweep.gamma"])
        for a in parse_range(cfg["sweep.a_tilde"])
        for b in parse_range(cfg["sweep.b_tilde"])
    ]
    tasks = [(k, base, str(part_dir)) for k in keys]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    for _, digest, _ in results:
        run.files.append(f"sweep/{digest}.csv")
    _write_csv(run.path("sweep.csv"), COEFF_HEADER + ["strength", "status"], [r[2] for r in results])
    bad = sum(r[2][-1] != "ok" for r in results)
    print(f"swept {len(results)} points ({bad} outside the admissible region) into {run.dir / 'sweep.csv'}")
    run.finish()
    return 0


def cmd_verify(cfg, jobs=1):
    results = checks.run_all(seed=cfg["seed"], perturb_lambda0=cfg["verify.perturb_lambda0"])
    run = Run("verify", cfg)
    ok = all(r.passed for r in results)
    # wall-clock values stay out of the report so it is reproducible
    timed = ("seconds", "observed")
    report = {
        "passed": ok,
        "checks": [
            {k: v for k, v in r.as_dict().items() if k not in (timed if "runtime" in r.name else timed[:1])}
            for r in results
        ],
    }
    with open(run.path("verify_report.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for r in results:
        print(r.line())
    print("verify: " + ("all checks passed" if ok else "FAILED"))
    run.finish()
    return 0 if ok else 1


_DISPATCH = {
    "coeffs": cmd_coeffs,
    "simulate": cmd_simulate,
    "exact": cmd_exact,
    "shock": cmd_shock,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="vdwwaves", description="Weakly nonlinear waves in a van der Waals gas.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", action="append", default=[], metavar="PATH", help="key=value config file")
    ap.add_argument("--out", metavar="DIR", help="output directory (default $VDW_OUT or ./out)")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", dest="overrides",
                    help="override one config key; repeatable")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.config, args.overrides)
        if args.out:
            cfg["output_dir"] = args.out
        return _DISPATCH[args.command](cfg, jobs=max(1, args.jobs))
    except (ConfigError, DomainError, StabilityError, ComplexSpeedError, ConstraintError, ValueError, OSError) as e:
        print(f"vdwwaves {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
