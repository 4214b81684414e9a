"""Command-line front end.

Subcommands: ``spectrum``, ``margin``, ``quintic``, ``matrices``, ``sweep``,
``simulate`` and ``verify``. Run configurations are JSON files; times in
them are absolute (not multiples of L/c).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from wavedelay import characteristics as ch
from wavedelay.companion import switched_system
from wavedelay.model import DelaySchedule, ScheduleError, StringConfig, preset_state
from wavedelay.oracle import FDGrid, compare_traces, fd_simulate, weak_residual_run
from wavedelay.spectral import (
    build_char_poly,
    explicit_quintic,
    find_roots,
    localization_report,
    stability_margin,
    stability_report,
)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    cfg: StringConfig
    schedule: DelaySchedule
    init: object
    N: int
    t_end: float
    snapshot_times: list = field(default_factory=list)
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    verify: dict = field(default_factory=dict)


def _schedule(section, cfg, t_end):
    kind = section.get("kind", "constant")
    try:
        if kind == "constant":
            return DelaySchedule.constant(cfg)
        if kind == "switching":
            return DelaySchedule.switching(cfg, section["switches"])
        if kind == "lattice":
            return DelaySchedule.lattice(cfg, section["switches"])
        if kind == "random":
            if "seed" not in section:
                raise ConfigError("random switching schedule needs an explicit 'seed'")
            dwell = float(section.get("mean_dwell", 3 * cfg.period))
            return DelaySchedule.random_switching(cfg, t_end, dwell, int(section["seed"]))
    except KeyError as exc:
        raise ConfigError(f"schedule of kind {kind!r} is missing field {exc}") from None
    raise ConfigError(f"unknown schedule kind {kind!r}")


def parse_config(data, base_dir=Path(".")):
    """Validate a config mapping and build the run objects."""
    try:
        cfg = StringConfig(L=float(data.get("L", 1.0)), c=float(data.get("c", 1.0)),
                           f=float(data["f"]), iota=data.get("iota", 1))
    except KeyError as exc:
        raise ConfigError(f"missing required field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"string configuration: {exc}") from None
    N = data.get("N", 512)
    if not isinstance(N, int) or N < 2 or N % 2:
        raise ConfigError(f"N must be an even integer >= 2, got {N!r}")
    t_end = float(data.get("t_end", 20 * cfg.period))
    if not t_end > 0:
        raise ConfigError("t_end must be positive")
    try:
        schedule = _schedule(data.get("schedule", {"kind": "constant"}), cfg, t_end)
        schedule.lattice_cells(2 * cfg.L / N, cfg.c)
    except ScheduleError as exc:
        raise ConfigError(f"delay schedule: {exc}") from None
    section = dict(data.get("init", {"preset": "sine"}))
    name = section.pop("preset", "sine")
    try:
        init = preset_state(name, cfg.L, cfg.c, **section)
        init.check(cfg.L)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"initial state: {exc}") from None
    snaps = [float(t) for t in data.get("snapshot_times", [])]
    if any(t < 0 or t > t_end for t in snaps):
        raise ConfigError("snapshot times must lie in [0, t_end]")
    outputs = {k: str(base_dir / v) for k, v in data.get("outputs", {}).items()}
    return RunConfig(cfg, schedule, init, N, t_end, snaps, outputs,
                     int(data.get("seed", 0)), dict(data.get("verify", {})))


def load_config(path):
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return parse_config(data, path.parent)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_spectrum(args):
    roots = find_roots(build_char_poly(args.j, args.f), tol=args.tol)
    rep = stability_report(roots)
    doc = {"j": args.j, "f": args.f, "roots": roots.records(), "residual": roots.residual_tol}
    doc.update(rep.to_dict())
    if args.f < 0:
        doc["localization"] = localization_report(args.j, args.f).to_dict()
    _emit(doc, args.out)
    return 0


def cmd_margin(args):
    _emit({"j": args.j, "margin": stability_margin(args.j, tol=args.tol)}, args.out)
    return 0


def cmd_quintic(args):
    _emit(explicit_quintic(args.a).to_dict(), args.out)
    return 0


def cmd_matrices(args):
    _emit(switched_system(args.f).to_dict(), args.out)
    return 0


def _sweep_row(j, f):
    rep = stability_report(find_roots(build_char_poly(j, f)))
    return (f, rep.max_modulus, rep.schur_stable, rep.marginal)


def cmd_sweep(args):
    fs = np.linspace(args.f_min, args.f_max, args.steps)
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        rows = list(pool.map(lambda f: _sweep_row(args.j, float(f)), fs))
    rows.sort(key=lambda r: r[0])
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["f", "max_modulus", "schur_stable", "marginal"])
        for f, m, s, mg in rows:
            w.writerow([repr(f), repr(m), int(s), int(mg)])
    finally:
        if args.out:
            fh.close()
    return 0


def run_simulation(rc):
    run = ch.simulate(rc.cfg, rc.schedule, rc.init, rc.N, rc.t_end)
    periods = int(math.floor(rc.t_end / rc.cfg.period + 1e-9))
    et = run.energy_trace(periods)
    try:
        fit = ch.decay_fit(et)
    except ValueError as exc:
        fit = None
        note = str(exc)
    else:
        note = ""
    return run, et, fit, note


def cmd_simulate(args):
    rc = load_config(args.config)
    run, et, fit, note = run_simulation(rc)
    out = rc.outputs
    if "energy" in out:
        with open(out["energy"], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "E", "E1"])
            for t, e, e1 in et.rows():
                w.writerow([repr(t), repr(e), repr(e1)])
    if "snapshots" in out:
        x = np.linspace(0.0, rc.cfg.L, rc.N // 2 + 1)
        with open(out["snapshots"], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x", "v", "v_t"])
            for t in rc.snapshot_times:
                v, vt, _ = run.state(t, x)
                for row in zip(x.tolist(), v.tolist(), vt.tolist()):
                    w.writerow([repr(t)] + [repr(val) for val in row])
    report = {
        "L": rc.cfg.L, "c": rc.cfg.c, "f": rc.cfg.f, "iota": rc.cfg.iota, "N": rc.N,
        "t_end": rc.t_end, "schedule": [list(s) for s in rc.schedule.segments],
        "E0": float(et.E[0]), "E_end": float(et.E[-1]),
        "E1_0": float(et.E1[0]), "E1_end": float(et.E1[-1]),
        "decay_fit": fit.to_dict() if fit else None, "note": note,
    }
    _emit(report, out.get("report"))
    if "report" in out:
        print(json.dumps({"decay_fit": report["decay_fit"]}, indent=2))
    return 0


def _verify_rect(rc, t_end):
    dx = 2 * rc.cfg.L / rc.N
    span = min(50, rc.N // 4) * dx
    t1 = math.floor((rc.cfg.onset + rc.cfg.period) / dx * rc.cfg.c) * dx / rc.cfg.c
    t1 = min(t1, max(dx, t_end - 2 * span / rc.cfg.c))
    x1 = round(rc.cfg.L / 2 / dx) * dx - span / 2
    return (t1, t1 + span / rc.cfg.c, x1, x1 + span)


def verify(rc, out=None):
    """Run the oracle comparison, weak residual and certificate checks.

    Returns a list of ``(name, passed, value, threshold)`` tuples.
    """
    opts = rc.verify
    out = sys.stdout if out is None else out
    results = []

    def check(name, value, threshold, passed=None):
        ok = bool(value <= threshold) if passed is None else bool(passed)
        results.append((name, ok, value, threshold))
        print(f"{'PASS' if ok else 'FAIL'} {name}: {value:.6g} (threshold {threshold:.6g})", file=out)

    cfg = rc.cfg
    run = ch.simulate(cfg, rc.schedule, rc.init, rc.N, rc.t_end)
    rng = np.random.default_rng(rc.seed)
    times = rng.uniform(0, rc.t_end, 200)
    dirichlet, feedback = ch.boundary_residuals(run, times)
    check("dirichlet_residual", dirichlet, 1e-10)
    check("feedback_residual", feedback, 1e-10)

    t_fd = float(opts.get("t_end", min(rc.t_end, cfg.onset + 8 * cfg.period)))
    grid = FDGrid(int(opts.get("nx", 2001)), float(opts.get("cfl", 0.999)))
    fd = fd_simulate(cfg, rc.schedule, rc.init, grid, t_fd)
    rep = compare_traces(run, fd)
    check("fd_sup_displacement", rep.sup_v, float(opts.get("sup_tol", 1e-3)))
    check("fd_energy_relative", rep.max_rel_energy, float(opts.get("energy_tol", 0.01)))

    rect = _verify_rect(rc, rc.t_end)
    weak = weak_residual_run(run, rect, n_test=int(opts.get("n_test", 20)), seed=rc.seed)
    check("weak_residual", weak.max_residual, float(opts.get("weak_tol", 1e-6)))

    periods = int(math.floor(rc.t_end / cfg.period + 1e-9))
    et = run.energy_trace(periods)
    if rc.schedule.mode == "switching":
        sys_ = switched_system(cfg.f)
        check("switching_L0", sys_.L0, 1.0, passed=sys_.L0 < 1.0)
        if sys_.L0 < 1.0 and et.E1[0] > 0:
            C = ch.envelope_constant(et.E1, sys_.L0)
            check("switching_envelope_C", C, float(opts.get("envelope_max", 1e6)))
    elif cfg.iota >= 1 and cfg.f != 0:
        rep_s = stability_report(find_roots(build_char_poly(cfg.iota, cfg.f)))
        check("schur_max_modulus", rep_s.max_modulus, 1.0, passed=rep_s.schur_stable)
        if rep_s.schur_stable and periods >= 4 * cfg.iota + 10:
            fit = ch.decay_fit(et)
            check("decay_factor_vs_M0sq", fit.per_period_factor, 1.05 * rep_s.max_modulus**2)
    return results


def cmd_verify(args):
    rc = load_config(args.config)
    results = verify(rc)
    return 0 if all(ok for _, ok, _, _ in results) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="wavedelay", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", help="roots and Schur classification of p_f")
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--f", type=float, required=True)
    s.add_argument("--tol", type=float, default=1e-12)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("margin", help="stability margin for half-degree j")
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--tol", type=float, default=1e-8)
    s.set_defaults(func=cmd_margin)

    s = sub.add_parser("quintic", help="explicit quintic factorization for parameter a")
    s.add_argument("--a", type=float, required=True)
    s.set_defaults(func=cmd_quintic)

    s = sub.add_parser("matrices", help="B1, B2, V2, D2, H1, norms and L0 at gain f")
    s.add_argument("--f", type=float, required=True)
    s.set_defaults(func=cmd_matrices)

    s = sub.add_parser("sweep", help="stability table over a range of gains")
    s.add_argument("--j", type=int, required=True)
    s.add_argument("--f-min", type=float, required=True)
    s.add_argument("--f-max", type=float, required=True)
    s.add_argument("--steps", type=int, default=101)
    s.add_argument("--workers", type=int, default=4)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("simulate", help="exact simulation from a JSON config")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("verify", help="oracle and certificate checks; nonzero exit on failure")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_verify)

    for name in ("spectrum", "margin", "quintic", "matrices", "sweep"):
        sub.choices[name].add_argument("--out", default=None, help="write to file instead of stdout")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
