"""Particle system versus PDE: hydrodynamic and hydrostatic checks."""
from __future__ import annotations

import logging
import time

import numpy as np

from ..kmc.engine import Simulator, run, run_replicas
from ..kmc.generator import generator_matrix, site_marginals, stationary_distribution
from ..kmc.rates import RateTable
from ..lattice import build_lattice, sample_product
from ..measures import block_size, block_smooth, empirical_pair
from ..pde.conditions import check_conditions
from ..pde.grid import Profile
from ..pde.solver import Stepper, solve_batch, stationary_solve
from .catalog import pde_pairing, select
from .config import ConfigError, ExperimentConfig
from .emit import Report

log = logging.getLogger(__name__)


class RefusedError(ConfigError):
    """The requested check lies outside the scope where it is meaningful."""


def replica_seed(base: int, index: int) -> int:
    return (int(base) + int(index)) % 2 ** 64


def initial_rng(seed: int) -> np.random.Generator:
    """Stream for the initial configuration, distinct from the dynamics stream of the same seed."""
    return np.random.Generator(np.random.PCG64([seed, 1]))


def decreasing_beyond_noise(e: np.ndarray, se: np.ndarray, k: float = 2.0) -> list[bool]:
    """Per consecutive pair: e[j] - e[j+1] > k * sqrt(se[j]^2 + se[j+1]^2)."""
    return [bool(e[j] - e[j + 1] > k * np.hypot(se[j], se[j + 1])) for j in range(len(e) - 1)]


# ---------------------------------------------------------------------------
# hydrodynamic limit


def hydrodynamic_check(cfg: ExperimentConfig, threads: int = 1) -> Report:
    """e(N, t) = replica mean of max_G |<pi_t^N, G> - <rho_t, G>| for each N and t."""
    t0 = time.perf_counter()
    if not cfg.regime_matches_theta():
        raise ConfigError(f"regime {cfg.regime} does not match the slowdown exponents")
    p = cfg.model_params()
    b = cfg.boundary_data()
    gamma = cfg.initial_profile()
    tests = select(cfg.test_functions)
    names = list(tests)
    times = sorted(set(float(t) for t in cfg.snapshot_times) | {float(cfg.t_end)})
    if times[0] <= 0 or times[-1] > cfg.t_end:
        raise ConfigError("snapshot times must lie in (0, t_end]")

    # macroscopic side
    grid = cfg.pde_grid()
    stepper = Stepper(grid, p, cfg.pde_regime(), b, dt=cfg.dt_value(), left_robin=cfg.left_robin)
    u0 = Profile.from_function(grid, gamma)
    snaps = solve_batch(stepper, u0.values[None], cfg.t_end, times)
    pts, w = grid.points(), grid.weights()
    macro = np.array([[pde_pairing(v[0], pts, w, tests[n]) for n in names] for _, v in snaps])

    rep = Report("hydro-check")
    rows_err, rows_pair = [], []
    decreasing = {}
    e_all = np.zeros((len(cfg.lattice_sizes), len(times)))
    se_all = np.zeros_like(e_all)
    for a, N in enumerate(cfg.lattice_sizes):
        lat = build_lattice(int(N), cfg.d)

        def one(i, lat=lat):
            seed = replica_seed(cfg.seed, i)
            init = sample_product(lat, gamma, initial_rng(seed))
            traj = run(lat, init, p, b, cfg.t_end, seed, snapshot_times=times,
                       exchange_multiplier=cfg.exchange_multiplier)
            return np.array([[empirical_pair(s, tests[n], lat) for n in names] for _, s in traj.snapshots])

        micro = np.stack(run_replicas(one, cfg.replicas, threads))  # (R, T, G)
        diff = micro - macro[None]
        err = np.abs(diff).max(axis=2)
        e_all[a] = err.mean(axis=0)
        se_all[a] = err.std(axis=0, ddof=1) / np.sqrt(cfg.replicas) if cfg.replicas > 1 else np.nan
        for j, t in enumerate(times):
            rows_err.append([N, t, e_all[a, j], se_all[a, j], cfg.replicas])
            for r in range(cfg.replicas):
                for g in range(len(names)):
                    rows_pair.append([N, t, r, g, micro[r, j, g], macro[j, g]])
        log.info("hydro-check N=%d: e=%s", N, e_all[a])
    for j, t in enumerate(times):
        decreasing[t] = decreasing_beyond_noise(e_all[:, j], se_all[:, j])
    rep.add_table("errors", ["N", "t", "e", "se", "replicas"], rows_err)
    rep.add_table("pairings", ["N", "t", "replica", "test_function", "particle", "pde"], rows_pair)
    rep.meta = {
        "test_functions": names,
        "times": times,
        "lattice_sizes": list(cfg.lattice_sizes),
        "regime": cfg.pde_regime().label,
        "decreasing": {str(t): v for t, v in decreasing.items()},
        "pde_dt": stepper.dt,
    }
    rep.passed = bool(len(cfg.lattice_sizes) > 1 and all(all(v) for v in decreasing.values()))
    rep.wall_time = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# hydrostatic limit


def profile_at(profile: Profile, x1: np.ndarray) -> np.ndarray:
    """(3, n) linear interpolation along axis 1 of the transverse mean of ``profile``."""
    mean = profile.values.mean(axis=2)
    return np.stack([np.interp(x1, profile.grid.x1, mean[c]) for c in range(3)])


def _gaps(dens: np.ndarray, lat, station: Profile, tests: dict, names: list[str]):
    """L1 gap N^{-d} sum_x sum_i |m_i(x) - rho_i(x/N)| and per-G pairing gaps."""
    pos = lat.macroscopic()
    target = profile_at(station, pos[:, 0])
    l1 = float(np.abs(dens - target).sum() / float(lat.N) ** lat.d)
    g = station.grid
    per_g = []
    for n in names:
        G = np.asarray(tests[n](pos), dtype=float)
        micro = float((dens * G).sum() / float(lat.N) ** lat.d)
        per_g.append(abs(micro - pde_pairing(station.values, g.points(), g.weights(), tests[n])))
    return l1, per_g


def stationary_profile(cfg: ExperimentConfig):
    p = cfg.model_params()
    res = stationary_solve(p, cfg.pde_regime(), cfg.boundary_data(), cfg.pde_grid(), tol=cfg.tol,
                           t_max=cfg.t_max, dt=cfg.dt_value(), left_robin=cfg.left_robin)
    if not res.converged:
        log.warning("stationary profile not converged (gap %.3g)", res.gap)
    return res


def exact_marginals(N: int, d: int, p, b) -> np.ndarray:
    """(3, n) site marginals of the invariant law of the full chain."""
    lat = build_lattice(N, d)
    pi = stationary_distribution(generator_matrix(lat, p, b))
    return site_marginals(pi, lat.site_count)[:, 1:].T


def hydrostatic_check(cfg: ExperimentConfig, statistical: bool = True) -> Report:
    """Invariant-law marginals versus the stationary profile.

    Exact mode uses the generator oracle for every N in ``exact_sizes``
    (zero Monte Carlo error) and passes when the L1 gap decreases strictly.
    The statistical mode time-averages one long trajectory at
    ``statistical_N`` after a burn-in; it is informational.
    """
    t0 = time.perf_counter()
    p = cfg.model_params()
    b = cfg.boundary_data()
    cond = check_conditions(p, cfg.d, cfg.delta1_value())
    if not cond.H1:
        raise RefusedError("hydrostatic check refused: condition H1 does not hold for these parameters")
    if not cfg.regime_matches_theta():
        raise ConfigError(f"regime {cfg.regime} does not match the slowdown exponents")
    tests = select(cfg.test_functions)
    names = list(tests)
    res = stationary_profile(cfg)
    station = res.profile

    rep = Report("hydrostatic-check")
    rows = []
    exact_l1 = []
    for N in cfg.exact_sizes:
        lat = build_lattice(int(N), cfg.d)
        dens = block_smooth(exact_marginals(int(N), cfg.d, p, b), lat, block_size(cfg.block_eps, lat.N))
        l1, per_g = _gaps(dens, lat, station, tests, names)
        exact_l1.append(l1)
        rows.append([0, N, l1] + per_g)
    stat = None
    if statistical and cfg.statistical_N:
        N = int(cfg.statistical_N)
        lat = build_lattice(N, cfg.d)
        rates = RateTable.from_model(lat, p, b, cfg.exchange_multiplier)
        init = sample_product(lat, lambda u: profile_at(station, u[:, 0]), initial_rng(cfg.seed))
        sim = Simulator(lat, rates, init, cfg.seed)
        sim.advance(cfg.burn_in)
        occ0 = sim.occupation(cfg.burn_in)
        sim.advance(cfg.burn_in + cfg.window)
        occ = (sim.occupation(cfg.burn_in + cfg.window) - occ0) / cfg.window
        dens = block_smooth(occ[:, 1:].T, lat, block_size(cfg.block_eps, N))
        l1, per_g = _gaps(dens, lat, station, tests, names)
        rows.append([1, N, l1] + per_g)
        stat = {"N": N, "l1_gap": l1, "events": sim.n_events}
    rep.add_table("gaps", ["statistical", "N", "l1_gap"] + [f"gap_{n}" for n in names], rows)
    rep.add_table("stationary_profile", ["x1", "rho1", "rho2", "rho3"],
                  np.column_stack([station.grid.x1, station.values.mean(axis=2).T]))
    steps = [bool(exact_l1[j + 1] < exact_l1[j]) for j in range(len(exact_l1) - 1)]
    rep.meta = {
        "conditions": cond.to_dict(),
        "regime": cfg.pde_regime().label,
        "stationary_converged": res.converged,
        "stationary_gap": res.gap,
        "exact_sizes": list(cfg.exact_sizes),
        "exact_l1": exact_l1,
        "exact_decreasing": steps,
        "statistical": stat,
        "test_functions": names,
    }
    rep.passed = bool(res.converged and len(exact_l1) > 1 and all(steps))
    rep.wall_time = time.perf_counter() - t0
    return rep
