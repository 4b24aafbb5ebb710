"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single ``[ACCEPT k] PASS|FAIL`` line with the measured
numbers before asserting.
"""
from __future__ import annotations

import os
import time
from pathlib import Path

import numpy as np
import pytest

from sterile_ips import cli
from sterile_ips.harness.extremal_runs import reproduce_extremal_runs
from sterile_ips.harness.config import ExperimentConfig
from sterile_ips.harness.hydro import hydrodynamic_check, hydrostatic_check
from sterile_ips.kmc import RateTable, Simulator, generator_matrix, site_marginals, stationary_distribution
from sterile_ips.lattice import build_lattice
from sterile_ips.measures import ProfileFunction, all_weights, invariance_residual
from sterile_ips.params import BoundaryData, ModelParams, boundary_preset
from sterile_ips.pde.grid import BC, BoundaryRegime, Grid, Profile
from sterile_ips.pde.reaction import reaction_F, reaction_transformed, transform, untransform
from sterile_ips.pde.solver import Stepper, order_violation
from sterile_ips.spectral import KINDS, EigenFamily, gram_matrix, observed_order

pytestmark = pytest.mark.acceptance

RUN1 = ModelParams(D=1.0, lambda1=0.75, lambda2=0.25, r=1.0)


@pytest.fixture
def report(capsys):
    def emit(k: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[ACCEPT {k}] {'PASS' if ok else 'FAIL'} {detail}")

    return emit


def random_simplex(rng, n):
    """n points uniformly distributed on the closed 3-simplex, as (3, n) densities of states 1..3."""
    return rng.dirichlet(np.ones(4), size=n).T[1:]


# 1 ---------------------------------------------------------------------------


def test_exact_stationary_oracle(report):
    t0 = time.perf_counter()
    lat = build_lattice(2, 1)
    p = ModelParams()
    b = boundary_preset("default")
    exact = site_marginals(stationary_distribution(generator_matrix(lat, p, b)), lat.site_count)

    sim = Simulator(lat, RateTable.from_model(lat, p, b), np.zeros(lat.site_count, np.uint8), seed=12345)
    sim.advance_events(10_000)  # burn-in, not counted
    batches, per = 50, 20_000
    occ0, t_start = sim.occupation(), sim.time
    prev, t_prev = occ0, t_start
    means = []
    for _ in range(batches):
        sim.advance_events(per)
        occ = sim.occupation()
        means.append((occ - prev) / (sim.time - t_prev))
        prev, t_prev = occ, sim.time
    est = (prev - occ0) / (sim.time - t_start)
    se = np.std(means, axis=0, ddof=1) / np.sqrt(batches)
    z = np.abs(est - exact) / se
    elapsed = time.perf_counter() - t0
    ok = bool(z.max() <= 3.0 and batches * per >= 1_000_000 and elapsed < 60)
    report(1, ok, f"max |kmc - exact| / se = {z.max():.2f} over {z.size} (site, state) pairs, "
                  f"{batches * per} events, {elapsed:.1f}s")
    assert batches * per >= 1_000_000
    assert z.max() <= 3.0
    assert elapsed < 60


# 2 ---------------------------------------------------------------------------


def test_measure_invariance(report):
    lat = build_lattice(1, 1)
    p = ModelParams()
    b = BoundaryData.constant((0.3, 0.2, 0.1), (0.1, 0.3, 0.2))
    rng = np.random.default_rng(2)
    Qb = generator_matrix(lat, p, b, parts=("boundary",))
    Qe = generator_matrix(lat, p, b, parts=("exchange",))
    wb = all_weights(ProfileFunction.matching_boundary(b), lat)
    we = all_weights(ProfileFunction.constant((0.15, 0.35, 0.2)), lat)
    worst_b = worst_e = 0.0
    for _ in range(100):
        f = rng.normal(size=4 ** lat.site_count)
        worst_b = max(worst_b, abs(invariance_residual(Qb, wb, f)))
        worst_e = max(worst_e, abs(invariance_residual(Qe, we, f)))
    ok = worst_b < 1e-12 and worst_e < 1e-12
    report(2, ok, f"max residual boundary {worst_b:.2e}, exchange {worst_e:.2e} over 100 random f")
    assert worst_b < 1e-12
    assert worst_e < 1e-12


# 3 ---------------------------------------------------------------------------


def test_extremal_pair_runs(report):
    rep = reproduce_extremal_runs()
    g1 = rep.meta["run1"]["gap_rho"]
    g2 = rep.meta["run2"]["gap_rho"]
    per_run = rep.wall_time / 2
    ok = g1 < 1e-2 and g2 > 0.05 and per_run < 300
    report(3, ok, f"run-1 gap {g1:.4g} (< 1e-2), run-2 gap {g2:.4g} (> 0.05), "
                  f"dt {rep.meta['run1']['dt']:.4g}, {per_run:.1f}s per run")
    assert rep.meta["run1"]["H1"] and not rep.meta["run2"]["H1"]
    assert g1 < 1e-2
    assert g2 > 0.05
    assert per_run < 300


# 4 ---------------------------------------------------------------------------


def _ordered_pairs(rng, grid: Grid, n_pairs: int) -> np.ndarray:
    """(2 n_pairs, 3, M1, K) batch; entry 2k lies below entry 2k+1 in (rho1, T, R).

    Each pair comes from a random base profile pushed nodewise towards the
    transformed corners (0, 0, 0) and (1, 1, 1); the admissible set is
    convex, so both stay admissible and the order is built in.
    """
    shape = (grid.M1, grid.K)
    out = []
    for _ in range(n_pairs):
        base = random_simplex(rng, grid.M1 * grid.K).reshape((3,) + shape)
        q = transform(base)
        s_lo = rng.random(shape) * (rng.random(shape) < 0.8)
        s_hi = rng.random(shape) * (rng.random(shape) < 0.8)
        lo = q * (1.0 - s_lo)
        hi = q + s_hi * (1.0 - q)
        out += [untransform(lo), untransform(hi)]
    return np.stack(out)


@pytest.mark.parametrize("label", ["(D ; R)", "(Ne ; R)"])
def test_comparison_principle(report, label):
    regime = BoundaryRegime.parse(label)
    theta_l = 0.5 if regime.left is BC.DIRICHLET else 2.0
    p = RUN1.replace(theta_l=theta_l, theta_r=1.0)
    grid = Grid(M1=41)
    stepper = Stepper(grid, p, regime, boundary_preset("default"))
    rng = np.random.default_rng(4 if regime.left is BC.DIRICHLET else 5)
    u = _ordered_pairs(rng, grid, 50)
    n_steps = int(np.ceil(10.0 / stepper.dt))
    violations = 0
    first = None
    for step in range(n_steps + 1):
        for k in range(50):
            ok, where = order_violation(u[2 * k], u[2 * k + 1])
            if not ok:
                violations += 1
                first = first or (step, k, where)
        if step < n_steps:
            stepper.advance(u, 1)
    report(4, violations == 0, f"{label}: {violations} violations over 50 pairs x {n_steps} steps "
                               f"(T={n_steps * stepper.dt:.3f}) first={first}")
    assert violations == 0


# 5 ---------------------------------------------------------------------------


def test_change_of_coordinates(report):
    rng = np.random.default_rng(5)
    rho = random_simplex(rng, 1000)
    p = RUN1
    F = reaction_F(rho, p, 1)
    lhs = reaction_transformed(transform(rho), p, 1)
    rhs = np.stack([F[0], F[0] + F[2], -(F[1] + F[2])])
    err = float(np.abs(lhs - rhs).max())
    report(5, err < 1e-12, f"max |(F1t, H, J) - (F1, F1+F3, -(F2+F3))| = {err:.2e} over 1000 points")
    assert err < 1e-12


# 6 ---------------------------------------------------------------------------


def test_extinction_fixed_point(report):
    p = RUN1
    ext = np.array([0.0, p.r / (p.r + 1.0), 0.0])
    F = reaction_F(ext, p, 1)
    grid = Grid(M1=101)
    regime = BoundaryRegime(BC.NEUMANN, BC.NEUMANN)
    stepper = Stepper(grid, p, regime, BoundaryData.constant(ext, ext))
    u0 = Profile.constant(grid, ext).values[None]
    u = stepper.advance(u0.copy(), 10_000)
    move = float(np.abs(u - u0).max())
    exact = bool(np.all(F == 0.0))
    report(6, exact and move < 1e-8, f"F(extinction) = {F.tolist()}, L-inf move over 1e4 steps = {move:.2e}")
    assert exact
    assert move < 1e-8


# 7 ---------------------------------------------------------------------------


def test_spectral_compliance(report):
    lines = []
    ok = True
    for kind in KINDS:
        fam = EigenFamily(kind)
        members = fam.indices(10)
        defect = max(max(fam.boundary_defects(k).values()) for k in members)
        gram = float(np.abs(gram_matrix(fam, 10, resolution=10_000) - np.eye(10)).max())
        # the constant Neumann mode has eigenvalue 0 and a residual of exactly zero
        orders = [observed_order(fam, k) for k in members if fam.eigenvalue(k) > 0]
        ok &= defect < 1e-10 and gram < 1e-6 and min(orders) >= 1.9
        lines.append(f"{kind}: defect {defect:.1e} gram {gram:.1e} min order {min(orders):.3f}")
    report(7, ok, "; ".join(lines))
    assert ok


# 8 ---------------------------------------------------------------------------


# With 32 replicas the expected drop from N=50 to N=100 is about the size of
# two combined standard errors, so the outcome of that step depends on the
# seed.  The seed was fixed before the first run and is not tuned.
def test_hydrodynamic_trend(report):
    cfg = ExperimentConfig.from_dict({
        "params": {"theta_l": 0.5, "theta_r": 1.0},
        "lattice_sizes": [50, 100, 200],
        "replicas": 32,
        "t_end": 1.0,
        "seed": 2024,
    })
    rep = hydrodynamic_check(cfg, threads=os.cpu_count() or 1)
    header, rows = rep.tables["errors"]
    e, se = rows[:, 2], rows[:, 3]
    summary = ", ".join(f"N={int(r[0])}: {r[2]:.4f} +- {r[3]:.4f}" for r in rows)
    ok = bool(rep.passed and rep.wall_time < 1200)
    report(8, ok, f"e(N, 1) {summary}; decreasing {rep.meta['decreasing']}; {rep.wall_time:.0f}s")
    assert rep.wall_time < 1200
    assert rep.passed, f"errors {e}, standard errors {se}"


# 9 ---------------------------------------------------------------------------


def test_hydrostatic_trend(report):
    cfg = ExperimentConfig.from_dict({"params": {"theta_l": 0.5, "theta_r": 1.0}, "exact_sizes": [1, 2, 3]})
    rep = hydrostatic_check(cfg, statistical=True)
    l1 = rep.meta["exact_l1"]
    stat = rep.meta["statistical"]
    report(9, rep.passed, f"exact L1 gaps N=1..3: {[round(v, 4) for v in l1]}; "
                          f"statistical N={stat['N']}: {stat['l1_gap']:.4f} (informational)")
    assert rep.meta["stationary_converged"]
    assert all(l1[j + 1] < l1[j] for j in range(len(l1) - 1))


# 10 --------------------------------------------------------------------------


def _csv_bytes(out: Path) -> dict:
    return {str(p.relative_to(out)): p.read_bytes() for p in sorted(out.rglob("*")) if p.suffix in (".csv", ".txt")}


def test_cli_determinism(report, tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text('{"N": 12, "t_end": 0.5, "snapshot_times": [0.2], "grid": {"M1": 41}, '
                   '"lattice_sizes": [8, 16], "replicas": 3, "exact_sizes": [1, 2], "statistical_N": 8, '
                   '"burn_in": 1.0, "window": 2.0}')
    checked = []
    same = True
    for cmd in ("simulate", "solve", "stationary", "hydro-check", "hydrostatic-check", "conditions"):
        outs = []
        for rep in ("a", "b"):
            out = tmp_path / cmd / rep
            code = cli.main([cmd, "--config", str(cfg), "--seed", "77", "--out", str(out)])
            assert code in (0, 3)
            outs.append(_csv_bytes(out))
        assert outs[0], f"{cmd} wrote no CSV"
        same &= outs[0] == outs[1]
        checked.append(f"{cmd}:{len(outs[0])}")
    report(10, same, f"byte-identical CSV bodies across repeated runs ({', '.join(checked)} files)")
    assert same
