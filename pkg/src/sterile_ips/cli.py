"""Command-line entry point.

Exit codes: 0 success, 2 invalid configuration (or a refused check),
3 a check ran and failed.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .harness.extremal_runs import CELLS, T_END, reproduce_extremal_runs
from .harness.config import ConfigError, ExperimentConfig
from .harness.emit import Report, emit
from .harness.hydro import hydrodynamic_check, hydrostatic_check, initial_rng, stationary_profile
from .kmc.engine import run
from .lattice import build_lattice, indicators, sample_product, write_snapshot
from .params import ParameterError
from .pde.conditions import check_conditions
from .pde.grid import Profile
from .pde.io import profile_header, write_manifest
from .pde.solver import CFLError, SolverError, solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILED = 3


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out"] = args.out
    cfg = dataclasses.replace(cfg, **changes)
    cfg.validate()
    return cfg


def cmd_simulate(cfg: ExperimentConfig, args) -> Report:
    """One trajectory at size N: configuration snapshots plus time-averaged densities."""
    t0 = time.perf_counter()
    lat = build_lattice(cfg.N, cfg.d)
    p = cfg.model_params()
    init = sample_product(lat, cfg.initial_profile(), initial_rng(cfg.seed))
    traj = run(lat, init, p, cfg.boundary_data(), cfg.t_end, cfg.seed, snapshot_times=cfg.snapshot_times,
               exchange_multiplier=cfg.exchange_multiplier)
    Path(cfg.out, "snapshots").mkdir(parents=True, exist_ok=True)
    frames = [(0.0, traj.initial)] + traj.snapshots + [(cfg.t_end, traj.final)]
    entries = []
    for k, (t, states) in enumerate(frames):
        name = f"snapshots/config_{k:04d}.txt"
        write_snapshot(f"{cfg.out}/{name}", lat, states)
        entries.append((t, name))
    write_manifest(f"{cfg.out}/snapshots/index.json", entries, N=lat.N, d=lat.d, seed=cfg.seed)
    rep = Report("simulate")
    avg = traj.occupation[:, 1:] / cfg.t_end
    rep.add_table("time_average", [f"x{k + 1}" for k in range(cfg.d)] + ["rho1", "rho2", "rho3"],
                  np.hstack([lat.coords.astype(float), avg]))
    rows = [[t] + list(indicators(s)[1:].mean(axis=1)) for t, s in frames]
    rep.add_table("densities", ["t", "rho1", "rho2", "rho3"], rows)
    rep.meta = {"N": lat.N, "d": lat.d, "events": traj.n_events, "snapshots": [e[1] for e in entries]}
    rep.wall_time = time.perf_counter() - t0
    return rep


def cmd_solve(cfg: ExperimentConfig, args) -> Report:
    t0 = time.perf_counter()
    grid = cfg.pde_grid()
    u0 = Profile.from_function(grid, cfg.initial_profile())
    profs = solve(u0, cfg.t_end, cfg.model_params(), cfg.pde_regime(), cfg.boundary_data(),
                  dt=cfg.dt_value(), snapshot_times=cfg.snapshot_times, left_robin=cfg.left_robin)
    rep = Report("solve")
    pts = grid.points()
    rows = [np.hstack([np.full((len(pts), 1), pr.time), pts, pr.values.reshape(3, -1).T]) for pr in profs]
    rep.add_table("profiles", ["t"] + profile_header(cfg.d), np.vstack(rows))
    rep.meta = {"regime": cfg.pde_regime().label, "grid": grid.to_dict(), "times": [pr.time for pr in profs]}
    rep.wall_time = time.perf_counter() - t0
    return rep


def cmd_stationary(cfg: ExperimentConfig, args) -> Report:
    t0 = time.perf_counter()
    res = stationary_profile(cfg)
    pts = res.profile.grid.points()
    rep = Report("stationary")
    rep.add_table("stationary_profile", profile_header(cfg.d), np.hstack([pts, res.profile.values.reshape(3, -1).T]))
    rep.add_table("extremal_runs", profile_header(cfg.d)[:-3] + ["lower_rho1", "lower_rho2", "lower_rho3",
                                                                   "upper_rho1", "upper_rho2", "upper_rho3"],
                  np.hstack([pts, res.lower.values.reshape(3, -1).T, res.upper.values.reshape(3, -1).T]))
    rep.add_table("history", ["t", "sup_gap", "l1_gap", "change"], res.history)
    rep.meta = {"regime": cfg.pde_regime().label, "converged": res.converged, "t": res.t, "gap": res.gap,
                "conditions": check_conditions(cfg.model_params(), cfg.d, cfg.delta1_value()).to_dict()}
    rep.wall_time = time.perf_counter() - t0
    return rep


def cmd_hydro(cfg: ExperimentConfig, args) -> Report:
    return hydrodynamic_check(cfg, threads=args.threads)


def cmd_hydrostatic(cfg: ExperimentConfig, args) -> Report:
    return hydrostatic_check(cfg, statistical=not args.exact_only)


def cmd_extremal_runs(cfg: ExperimentConfig, args) -> Report:
    opts = dict(cfg.appendix_b)
    extra = set(opts) - {"cells", "t_end", "dt"}
    if extra:
        raise ConfigError(f"unknown appendix_b keys {sorted(extra)}")
    return reproduce_extremal_runs(cells=int(opts.get("cells", CELLS)), t_end=float(opts.get("t_end", T_END)),
                                dt=opts.get("dt"))


def cmd_conditions(cfg: ExperimentConfig, args) -> Report:
    rep = check_conditions(cfg.model_params(), cfg.d, cfg.delta1_value())
    out = Report("conditions", meta=rep.to_dict())
    out.add_table("conditions", ["H1", "H2", "H3", "delta1", "d"],
                  [[float(rep.H1), float(rep.H2), float(rep.H3), rep.delta1, rep.d]])
    print(f"H1={rep.H1} H2={rep.H2} H3={rep.H3} delta1={rep.delta1:.6g}")
    return out


COMMANDS = {
    "simulate": (cmd_simulate, "run one particle trajectory"),
    "solve": (cmd_solve, "integrate the PDE from the configured initial profile"),
    "stationary": (cmd_stationary, "stationary PDE profile from the two extremal data"),
    "hydro-check": (cmd_hydro, "particle system versus PDE over a range of N"),
    "hydrostatic-check": (cmd_hydrostatic, "invariant law versus stationary profile"),
    "appendix-b": (cmd_extremal_runs, "reproduce the two Neumann-Neumann extremal-pair runs"),
    "conditions": (cmd_conditions, "report conditions H1, H2, H3"),
}


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=dflt(None), help="JSON config file")
    parser.add_argument("--seed", type=int, default=dflt(None), help="override the config seed")
    parser.add_argument("--out", default=dflt(None), help="output directory")
    parser.add_argument("--threads", type=int, default=dflt(1), help="worker threads for replicas")
    parser.add_argument("-v", "--verbose", action="store_true", default=dflt(False))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sterile-ips", description=__doc__.splitlines()[0])
    _global_flags(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        _global_flags(sp, suppress=True)
        if name == "hydrostatic-check":
            sp.add_argument("--exact-only", action="store_true", help="skip the statistical run")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        fn, _ = COMMANDS[args.command]
        report = fn(cfg, args)
    except (ConfigError, ParameterError, CFLError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_FAILED
    path = emit(report, cfg.out, cfg.to_dict())
    status = {None: "done", True: "PASS", False: "FAIL"}[report.passed]
    print(f"{args.command}: {status} ({report.wall_time:.1f}s) -> {path}")
    return EXIT_FAILED if report.passed is False else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
