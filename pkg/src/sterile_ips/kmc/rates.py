"""Transition rates of the three superposed dynamics.

These are the reference (pure Python) definitions.  The event engine keeps
an incrementally updated copy of the same numbers; ``site_event_rates`` is
what its consistency checks compare against.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..lattice import Lattice
from ..params import BoundaryData, ModelParams


def neighbor_counts(states: np.ndarray, lat: Lattice, i: int) -> tuple[int, int]:
    """(n1, n3): neighbours of site index ``i`` in the wild and mixed states."""
    n1 = n3 = 0
    for j in lat.nbr[i]:
        if j < 0:
            continue
        s = states[j]
        n1 += s == 1
        n3 += s == 3
    return int(n1), int(n3)


def contact_rates(states: np.ndarray, lat: Lattice, x, p: ModelParams) -> dict[int, float]:
    """Birth, release and death rates out of the current state of site ``x``.

    ``x`` is a coordinate tuple (or an int in d = 1).
    """
    i = lat.index(x)
    return _contact(int(states[i]), *neighbor_counts(states, lat, i), p.lambda1, p.lambda2, p.r)


def _contact(s: int, n1: int, n3: int, lam1: float, lam2: float, r: float) -> dict[int, float]:
    beta = lam1 * n1 + lam2 * n3
    if s == 0:
        return {1: beta, 2: r}
    if s == 1:
        return {0: 1.0, 3: r}
    if s == 2:
        return {0: 1.0, 3: beta}
    return {1: 1.0, 2: 1.0}


def boundary_rates(x, states: np.ndarray, lat: Lattice, p: ModelParams, b: BoundaryData) -> dict[int, float]:
    """Reservoir flip rates N^{2-theta} b_i(x/N) at a face site.

    The flip to the current state is a null event and is left out.
    """
    i = lat.index(x)
    side = int(lat.boundary_side[i])
    if side == 0:
        raise ValueError(f"site {x} is not on a boundary face")
    theta = p.theta_l if side < 0 else p.theta_r
    u = lat.macroscopic()[i, 1:][None, :]
    b4 = b.with_empty(side, u)[:, 0]
    scale = float(lat.N) ** (2.0 - theta)
    s = int(states[i])
    return {t: scale * float(b4[t]) for t in range(4) if t != s}


def exchange_rate(N: int, p: ModelParams, multiplier: float = 1.0) -> float:
    """Swap rate of one adjacent pair, D N^2 (times ``multiplier``)."""
    return multiplier * p.D * float(N) ** 2


@dataclass
class RateTable:
    """Rate constants in the form the event engine consumes.

    ``boundary[i, t]`` is the reservoir rate pushing site ``i`` to state
    ``t`` (zero off the faces); ``exchange`` is the per-bond swap rate.
    Fields may be set to zero individually, which is how sub-dynamics are
    isolated in tests.
    """

    lam1: float
    lam2: float
    r: float
    exchange: float
    boundary: np.ndarray = field(repr=False)

    @classmethod
    def from_model(
        cls,
        lat: Lattice,
        p: ModelParams,
        b: BoundaryData,
        exchange_multiplier: float = 1.0,
    ) -> "RateTable":
        return cls(
            lam1=p.lambda1,
            lam2=p.lambda2,
            r=p.r,
            exchange=exchange_rate(lat.N, p, exchange_multiplier),
            boundary=reservoir_matrix(lat, p, b),
        )

    def __post_init__(self):
        self.boundary = np.ascontiguousarray(self.boundary, dtype=np.float64)
        if min(self.lam1, self.lam2, self.r, self.exchange) < 0 or np.any(self.boundary < 0):
            raise ValueError("rates must be nonnegative")


def reservoir_matrix(lat: Lattice, p: ModelParams, b: BoundaryData) -> np.ndarray:
    """(n, 4) array of reservoir rates N^{2-theta} b_t(x/N) per face site."""
    out = np.zeros((lat.site_count, 4))
    pos = lat.macroscopic()
    for side, idx, theta in ((-1, lat.left_face, p.theta_l), (1, lat.right_face, p.theta_r)):
        b4 = b.with_empty(side, pos[idx, 1:])
        out[idx] = float(lat.N) ** (2.0 - theta) * b4.T
    return out


def site_event_rates(states: np.ndarray, lat: Lattice, rates: RateTable, i: int) -> float:
    """Total rate of all events charged to site ``i``.

    Contact flips at ``i``, reservoir flips at ``i`` and swaps across the
    bonds ``(i, i + e_k)`` whose two ends differ.
    """
    s = int(states[i])
    total = sum(_contact(s, *neighbor_counts(states, lat, i), rates.lam1, rates.lam2, rates.r).values())
    total += sum(rates.boundary[i, t] for t in range(4) if t != s)
    active = sum(1 for j in lat.fwd[i] if j >= 0 and states[j] != s)
    return total + rates.exchange * active
