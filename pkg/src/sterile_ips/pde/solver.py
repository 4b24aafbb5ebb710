"""Explicit Euler integration of dt rho = D Lap rho + F(rho) with mixed face conditions.

Face handling along axis 1:

* Dirichlet: the face node is pinned to the reservoir density.
* Neumann: reflected ghost node, d rho / d x1 = 0.
* Robin: centred ghost node enforcing D d_n rho = b - rho with d_n the
  outward normal derivative, i.e. ``d x1 rho = (b - rho)/D`` on the right
  face and ``-d x1 rho = (b - rho)/D`` on the left one.  ``left_robin``
  = ``"literal"`` switches the left face to ``d x1 rho = (b - rho)/D``.

Torus directions use periodic second differences.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..params import BoundaryData, ModelParams
from . import _kernel as K
from .grid import BC, BoundaryRegime, Grid, Profile
from .reaction import SIMPLEX_TOL, reaction_F, reaction_lipschitz, transform

log = logging.getLogger(__name__)

_BC_CODE = {BC.DIRICHLET: K.DIRICHLET, BC.ROBIN: K.ROBIN, BC.NEUMANN: K.NEUMANN}
LEFT_ROBIN_SIGNS = {"mirrored": 1.0, "literal": -1.0}


class CFLError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


def cfl_limit(grid: Grid, D: float) -> float:
    """Largest dt for which the pure diffusion step is stable, 1 / sum_k 2D/h_k^2."""
    w = 2 * D / grid.h1 ** 2 + (grid.d - 1) * 2 * D / grid.ht ** 2
    return 1.0 / w


def stable_dt(grid: Grid, p: ModelParams, regime: BoundaryRegime) -> float:
    """Step size making every Euler update a monotone (order preserving) map.

    This is the CFL weight plus the Robin face term 2/h1 plus a bound on the
    reaction's diagonal derivatives; it keeps the comparison principle and
    the simplex exactly at the discrete level.
    """
    w = 1.0 / cfl_limit(grid, p.D)
    if BC.ROBIN in (regime.left, regime.right):
        w += 2.0 / grid.h1
    return 1.0 / (w + reaction_lipschitz(p, grid.d))


def face_values(grid: Grid, b: BoundaryData) -> tuple[np.ndarray, np.ndarray]:
    t = grid.transverse_points()
    return b.values(-1, t), b.values(1, t)


@dataclass
class Stepper:
    """Batch integrator bound to one grid, parameter set, regime and reservoir."""

    grid: Grid
    p: ModelParams
    regime: BoundaryRegime
    b: BoundaryData
    dt: float | None = None
    left_robin: str = "mirrored"
    react: bool = True
    tol: float = SIMPLEX_TOL
    bl: np.ndarray = field(init=False, repr=False)
    br: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.left_robin not in LEFT_ROBIN_SIGNS:
            raise ValueError(f"left_robin must be one of {sorted(LEFT_ROBIN_SIGNS)}")
        if self.dt is None:
            self.dt = stable_dt(self.grid, self.p, self.regime)
        if not 0 < self.dt <= cfl_limit(self.grid, self.p.D) * (1 + 1e-12):
            raise CFLError(f"dt={self.dt:g} violates the CFL bound {cfl_limit(self.grid, self.p.D):g}")
        self.bl, self.br = face_values(self.grid, self.b)
        self._tnbr = self.grid.torus_neighbors()

    def advance(self, u: np.ndarray, n_steps: int, dt: float | None = None) -> np.ndarray:
        """Apply ``n_steps`` steps in place to ``u`` of shape (B, 3, M1, K)."""
        dt = self.dt if dt is None else dt
        if not 0 < dt <= cfl_limit(self.grid, self.p.D) * (1 + 1e-12):
            raise CFLError(f"dt={dt:g} violates the CFL bound")
        if n_steps <= 0:
            return u
        diag = np.zeros(5, dtype=np.int64)
        tmp = np.empty_like(u)
        status = K.advance(
            u, tmp, int(n_steps), float(dt), self.p.D, self.grid.h1, self.grid.ht,
            self.p.lambda1, self.p.lambda2, self.p.r, self.grid.d,
            _BC_CODE[self.regime.left], _BC_CODE[self.regime.right], self.bl, self.br,
            self._tnbr, LEFT_ROBIN_SIGNS[self.left_robin], self.react, self.tol, diag,
        )
        if status == K.NAN:
            raise SolverError(f"NaN at step {diag[0]}, run {diag[1]}, component {diag[2]}, node ({diag[3]}, {diag[4]})")
        if status == K.OUT_OF_SIMPLEX:
            raise SolverError(
                f"left the simplex by more than {self.tol:g} at step {diag[0]}, run {diag[1]}, "
                f"component {diag[2]}, node ({diag[3]}, {diag[4]})"
            )
        return u


def euler_step(
    u: Profile,
    dt: float,
    p: ModelParams,
    regime: BoundaryRegime,
    b: BoundaryData,
    reaction: Callable[[np.ndarray], np.ndarray] | None = None,
    left_robin: str = "mirrored",
) -> Profile:
    """One explicit step in plain numpy; ``reaction`` overrides F (e.g. a zero hook).

    This is the readable reference for the compiled batch kernel.
    """
    g = u.grid
    if not 0 < dt <= cfl_limit(g, p.D) * (1 + 1e-12):
        raise CFLError(f"dt={dt:g} violates the CFL bound {cfl_limit(g, p.D):g}")
    v = u.values
    if not np.all(np.isfinite(v)):
        raise SolverError("NaN or inf in the profile")
    bl, br = face_values(g, b)
    h = g.h1
    lap = np.empty_like(v)
    lap[:, 1:-1] = (v[:, :-2] - 2 * v[:, 1:-1] + v[:, 2:]) / h ** 2
    lap[:, 0] = 2 * (v[:, 1] - v[:, 0]) / h ** 2
    lap[:, -1] = 2 * (v[:, -2] - v[:, -1]) / h ** 2
    if regime.left is BC.ROBIN:
        lap[:, 0] += LEFT_ROBIN_SIGNS[left_robin] * 2 * (bl - v[:, 0]) / (p.D * h)
    if regime.right is BC.ROBIN:
        lap[:, -1] += 2 * (br - v[:, -1]) / (p.D * h)
    tn = g.torus_neighbors()
    for j in range(0, tn.shape[1], 2):
        lap += (v[:, :, tn[:, j]] - 2 * v + v[:, :, tn[:, j + 1]]) / g.ht ** 2
    F = reaction(v) if reaction is not None else reaction_F(v, p, g.d)
    out = v + dt * (p.D * lap + F)
    if regime.left is BC.DIRICHLET:
        out[:, 0] = bl
    if regime.right is BC.DIRICHLET:
        out[:, -1] = br
    if not np.all(np.isfinite(out)):
        raise SolverError("NaN produced by the Euler step")
    return Profile(g, out, u.time + dt)


def plan_steps(t_end: float, dt: float) -> tuple[int, float]:
    """Number of steps and the slightly shortened dt that lands exactly on t_end."""
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    n = int(math.ceil(t_end / dt - 1e-9)) if t_end > 0 else 0
    return n, (t_end / n if n else dt)


def solve_batch(
    stepper: Stepper,
    u0: np.ndarray,
    t_end: float,
    snapshot_times: Sequence[float] = (),
) -> list[tuple[float, np.ndarray]]:
    """Integrate a (B, 3, M1, K) batch; returns [(t, copy of batch)] at each snapshot and at t_end.

    Each stretch between consecutive output times is covered by whole steps
    of at most ``stepper.dt``, so every snapshot lands exactly on its time.
    """
    u = np.array(u0, dtype=float, copy=True)
    marks = sorted({float(t) for t in snapshot_times if 0 <= t <= t_end} | {float(t_end)})
    out = []
    done = 0.0
    for t in marks:
        n, dt = plan_steps(t - done, stepper.dt)
        stepper.advance(u, n, dt)
        done = t
        out.append((t, u.copy()))
    return out


def solve(
    u0: Profile,
    t_end: float,
    p: ModelParams,
    regime: BoundaryRegime,
    b: BoundaryData,
    dt: float | None = None,
    snapshot_times: Sequence[float] = (),
    left_robin: str = "mirrored",
) -> list[Profile]:
    """Profiles at the requested snapshot times and at ``t_end``."""
    if not u0.in_simplex():
        raise SolverError("initial profile is outside the simplex")
    stepper = Stepper(u0.grid, p, regime, b, dt=dt, left_robin=left_robin)
    snaps = solve_batch(stepper, u0.values[None], t_end, snapshot_times)
    return [Profile(u0.grid, v[0], u0.time + t) for t, v in snaps]


# ---------------------------------------------------------------------------
# stationary profiles


LOWER = (0.0, 1.0, 0.0)  # transformed (0, 0, 0): every site sterile
UPPER = (1.0, 0.0, 0.0)  # transformed (1, 1, 1): every site wild


@dataclass
class StationaryResult:
    profile: Profile
    converged: bool
    lower: Profile
    upper: Profile
    t: float
    gap: float
    history: list[tuple[float, float, float, float]] = field(default_factory=list)
    """(t, sup gap, L1 gap, max change over the last time unit)."""


def stationary_solve(
    p: ModelParams,
    regime: BoundaryRegime,
    b: BoundaryData,
    grid: Grid,
    tol: float = 1e-6,
    t_max: float = 500.0,
    dt: float | None = None,
    interval: float = 1.0,
    left_robin: str = "mirrored",
) -> StationaryResult:
    """Integrate from both extremal data until they meet or both stall.

    Every ``interval`` time units the two runs are compared with their
    previous snapshot and with each other.  The loop stops when the runs agree
    within 2 tol, or when both have stalled (change < tol) and their gap
    has stopped shrinking, or at ``t_max``.  ``converged`` is true only when
    the two limits agree within 2 tol; the returned profile is then their
    midpoint, otherwise the run from the lower extremal data.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    stepper = Stepper(grid, p, regime, b, dt=dt, left_robin=left_robin)
    u = np.stack([Profile.constant(grid, LOWER).values, Profile.constant(grid, UPPER).values])
    n, step_dt = plan_steps(interval, stepper.dt)
    w = grid.weights()
    history = []
    t = 0.0
    prev = u.copy()
    prev_gap = np.inf
    while True:
        stepper.advance(u, n, step_dt)
        t += interval
        change = float(np.abs(u - prev).max())
        diff = np.abs(u[0] - u[1])
        gap = float(diff.max())
        l1 = float((diff * w[None]).sum())
        history.append((t, gap, l1, change))
        prev[:] = u
        if gap <= 2 * tol:
            converged = True
            break
        if change < tol and prev_gap - gap < tol:
            converged = False
            break
        if t >= t_max - 1e-12:
            converged = False
            break
        prev_gap = gap
    lower = Profile(grid, u[0].copy(), t)
    upper = Profile(grid, u[1].copy(), t)
    prof = Profile(grid, 0.5 * (u[0] + u[1]), t) if converged else lower.copy()
    if not converged:
        log.info("stationary_solve: runs did not meet (gap %.3g at t=%g)", gap, t)
    return StationaryResult(prof, converged, lower, upper, t, gap, history)


# ---------------------------------------------------------------------------
# order and weak-form diagnostics


def comparison_check(ua: Profile, ub: Profile, atol: float = 0.0):
    """True iff ua <= ub nodewise in (rho1, T, R); else (False, first violation)."""
    if ua.grid != ub.grid:
        raise ValueError("profiles live on different grids")
    return order_violation(ua.values, ub.values, atol)


def _two_sum(a, b):
    """s + e == a + b exactly with s = fl(a + b) (Knuth's error-free transformation)."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def _sum_exceeds(x1, x2, y1, y2):
    """Exact test of x1 + x2 > y1 + y2 for doubles, elementwise."""
    sx, ex = _two_sum(x1, x2)
    sy, ey = _two_sum(y1, y2)
    return (sx > sy) | ((sx == sy) & (ex > ey))


def order_violation(va: np.ndarray, vb: np.ndarray, atol: float = 0.0):
    """Nodewise (rho1, T, R) order of two (3, ...) density arrays.

    With ``atol`` = 0 the comparison is exact on the stored doubles: T and R
    are sums of two densities, compared without rounding, so a rounding
    error in forming them is never reported as a violation.
    """
    va = np.asarray(va, dtype=float)
    vb = np.asarray(vb, dtype=float)
    qa = transform(va)
    qb = transform(vb)
    if atol > 0:
        bad = qa > qb + atol
    else:
        bad = np.stack([
            va[0] > vb[0],
            _sum_exceeds(va[0], va[2], vb[0], vb[2]),
            # R_a > R_b  <=>  rho2_a + rho3_a < rho2_b + rho3_b
            _sum_exceeds(vb[1], vb[2], va[1], va[2]),
        ])
    if not bad.any():
        return True, None
    idx = tuple(int(i) for i in np.argwhere(bad)[0])
    names = ("rho1", "T", "R")
    return False, {"coordinate": names[idx[0]], "node": idx[1:], "excess": float(qa[idx] - qb[idx])}


def weak_residual(
    profile: Profile,
    p: ModelParams,
    regime: BoundaryRegime,
    b: BoundaryData,
    test,
    left_robin: str = "mirrored",
) -> np.ndarray:
    """Stationary weak-form residual of each component against a test function.

    With n the outward normal on each face:

        int D rho Lap G + int F(rho) G
          + sum_faces int [ (D d_n rho) G - D rho d_n G ] dS

    where D d_n rho = b - rho on Robin faces, 0 on Neumann faces, and G
    must vanish on Dirichlet faces (rho = b there).  ``test`` provides
    ``value``, ``grad1`` and ``laplacian`` on (n, d) point arrays.
    Integrals use the trapezoid rule, so the residual of a converged
    discrete solution is O(h^2).
    """
    g = profile.grid
    pts = g.points()
    G = test.value(pts).reshape(g.M1, g.K)
    dG = test.grad1(pts).reshape(g.M1, g.K)
    LG = test.laplacian(pts).reshape(g.M1, g.K)
    v = profile.values
    w = g.weights()
    F = reaction_F(v, p, g.d)
    res = (p.D * v * LG[None] * w[None]).sum(axis=(1, 2)) + (F * G[None] * w[None]).sum(axis=(1, 2))
    bl, br = face_values(g, b)
    face_w = g.ht ** (g.d - 1)
    for bc, i, normal, bv in ((regime.left, 0, -1.0, bl), (regime.right, -1, 1.0, br)):
        dnG = normal * dG[i]
        if bc is BC.DIRICHLET:
            if np.abs(G[i]).max() > 1e-12:
                raise ValueError("test function must vanish on Dirichlet faces")
            flux = np.zeros_like(v[:, i])
        elif bc is BC.NEUMANN:
            flux = np.zeros_like(v[:, i])
        else:
            flux = bv - v[:, i]
            if i == 0 and left_robin == "literal":
                flux = -flux
        res = res + ((flux * G[i][None] - p.D * v[:, i] * dnG[None]) * face_w).sum(axis=1)
    return res
