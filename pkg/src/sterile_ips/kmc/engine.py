"""Exact continuous-time simulation of the particle system (direct method).

One :class:`Simulator` owns one trajectory.  Waiting times are exponential
with the total rate; the event is picked proportionally to its rate through
the per-site sum tree.  The next event time is drawn right after the
previous event and kept pending, so stopping at snapshot times never
perturbs the random stream: the same seed gives the same path whatever the
snapshot schedule.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..lattice import Lattice
from ..params import BoundaryData, ModelParams
from . import _kernel as K
from .rates import RateTable

log = logging.getLogger(__name__)

EVENT_DTYPE = np.dtype(
    [("time", "f8"), ("kind", "i1"), ("x", "i8"), ("y", "i8"), ("before", "u1"), ("after", "u1")]
)
KIND_NAMES = {K.KIND_CONTACT: "contact", K.KIND_BOUNDARY: "boundary", K.KIND_EXCHANGE: "exchange"}


class AbsorbingStateError(RuntimeError):
    """Raised when the total event rate vanishes."""


@dataclass
class Trajectory:
    initial: np.ndarray
    seed: int
    t_end: float
    final: np.ndarray
    events: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=EVENT_DTYPE))
    snapshots: list[tuple[float, np.ndarray]] = field(default_factory=list)
    occupation: np.ndarray | None = None
    n_events: int = 0


class Simulator:
    def __init__(
        self,
        lat: Lattice,
        rates: RateTable,
        initial: np.ndarray,
        seed: int,
        record_events: bool = False,
        chunk: int = 1 << 16,
    ):
        initial = np.asarray(initial, dtype=np.uint8)
        if initial.shape != (lat.site_count,):
            raise ValueError(f"initial configuration must have {lat.site_count} sites")
        if initial.max(initial=0) > 3:
            raise ValueError("states must lie in {0,1,2,3}")
        self.lat = lat
        self.rates = rates
        self.seed = int(seed)
        self.initial = initial.copy()
        self.states = initial.copy()
        self._rng = np.random.Generator(np.random.PCG64(self.seed))
        self._chunk = int(chunk)
        self._uniforms = self._rng.random(self._chunk)
        self._upos = np.zeros(1, dtype=np.int64)

        self._nbr = np.ascontiguousarray(lat.nbr, dtype=np.int64)
        self._fwd = np.ascontiguousarray(lat.fwd, dtype=np.int64)
        n = lat.site_count
        self._P = 1 << max(0, int(np.ceil(np.log2(max(n, 1)))))
        self._tree = np.zeros(2 * self._P)
        K.tree_build(self._tree, self._P, self._site_rates(self.states))

        self.occ = np.zeros((n, 4))
        self._last = np.zeros(n)
        self.n_events = 0
        self.record_events = record_events
        self._log = _EventLog(256 if record_events else 1)
        self.clock = np.array([0.0, np.inf])
        self._draw_first()

    # -- internals -------------------------------------------------------
    def _site_rates(self, states):
        r = self.rates
        return K.all_site_rates(states, self._nbr, self._fwd, r.lam1, r.lam2, r.r, r.exchange, r.boundary)

    def _refill(self):
        rest = self._uniforms[self._upos[0]:]
        self._uniforms = np.concatenate([rest, self._rng.random(self._chunk)])
        self._upos[0] = 0

    def _draw_first(self):
        total = self._tree[1]
        if total > 0:
            u = self._uniforms[self._upos[0]]
            self._upos[0] += 1
            self.clock[1] = -np.log1p(-u) / total

    def _run(self, t_stop: float, max_events: int) -> int:
        r = self.rates
        while True:
            lg = self._log
            status, done = K.run_events(
                self.states, self._nbr, self._fwd, r.lam1, r.lam2, r.r, r.exchange, r.boundary,
                self._tree, self._P, self.clock, self._uniforms, self._upos, t_stop, max_events,
                self.occ, self._last,
                lg.time, lg.kind, lg.x, lg.y, lg.before, lg.after, lg.pos, self.record_events,
            )
            self.n_events += done
            max_events -= done
            if status == K.NEED_UNIFORMS:
                self._refill()
            elif status == K.LOG_FULL:
                self._log.grow()
            elif status == K.ABSORBING:
                raise AbsorbingStateError(f"total rate vanished at t={self.clock[0]}")
            else:
                return status

    # -- public API ------------------------------------------------------
    @property
    def time(self) -> float:
        return float(self.clock[0])

    @property
    def total_rate(self) -> float:
        return float(self._tree[1])

    def site_rates(self) -> np.ndarray:
        """Incrementally maintained per-site composite rates."""
        return self._tree[self._P:self._P + self.lat.site_count].copy()

    def tree_matches_rebuild(self) -> bool:
        fresh = np.zeros_like(self._tree)
        K.tree_build(fresh, self._P, self._site_rates(self.states))
        return bool(np.array_equal(fresh, self._tree))

    def step(self) -> tuple[float, np.ndarray]:
        """Apply exactly one event; returns (waiting time, configuration)."""
        if self._tree[1] <= 0:
            raise AbsorbingStateError("total rate is zero")
        before = self.clock[0]
        self._run(np.inf, 1)
        return float(self.clock[0] - before), self.states.copy()

    def advance(self, t: float) -> None:
        """Apply every event with time <= t; the state is then the one in force at t."""
        if t < self.clock[0]:
            raise ValueError(f"cannot go back from t={self.clock[0]} to {t}")
        self._run(float(t), np.iinfo(np.int64).max)

    def advance_events(self, n: int) -> None:
        """Apply exactly ``n`` further events; the clock stops at the last one."""
        if n < 0:
            raise ValueError("event count must be nonnegative")
        if n:
            self._run(np.inf, int(n))

    def occupation(self, t: float | None = None) -> np.ndarray:
        """Integrated time spent by each site in each state up to ``t``."""
        t = self.clock[0] if t is None else t
        if t < self.clock[0]:
            raise ValueError("occupation time requested before the last event")
        occ = self.occ.copy()
        occ[np.arange(self.lat.site_count), self.states] += t - self._last
        return occ

    def events(self) -> np.ndarray:
        return self._log.as_array()


class _EventLog:
    def __init__(self, capacity: int):
        self.time = np.zeros(capacity)
        self.kind = np.zeros(capacity, dtype=np.int8)
        self.x = np.zeros(capacity, dtype=np.int64)
        self.y = np.zeros(capacity, dtype=np.int64)
        self.before = np.zeros(capacity, dtype=np.uint8)
        self.after = np.zeros(capacity, dtype=np.uint8)
        self.pos = np.zeros(1, dtype=np.int64)

    def grow(self):
        for name in ("time", "kind", "x", "y", "before", "after"):
            a = getattr(self, name)
            setattr(self, name, np.concatenate([a, np.zeros_like(a)]))

    def as_array(self) -> np.ndarray:
        n = int(self.pos[0])
        out = np.empty(n, dtype=EVENT_DTYPE)
        for name, src in (("time", self.time), ("kind", self.kind), ("x", self.x), ("y", self.y),
                          ("before", self.before), ("after", self.after)):
            out[name] = src[:n]
        return out


def run(
    lat: Lattice,
    initial: np.ndarray,
    p: ModelParams,
    b: BoundaryData,
    t_end: float,
    seed: int,
    snapshot_times: Sequence[float] = (),
    on_snapshot: Callable[[float, np.ndarray], None] | None = None,
    record_events: bool = False,
    exchange_multiplier: float = 1.0,
) -> Trajectory:
    """Simulate from ``initial`` up to ``t_end``.

    Snapshots hold the configuration in force at each requested time
    (cadlag convention).
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    rates = RateTable.from_model(lat, p, b, exchange_multiplier)
    sim = Simulator(lat, rates, initial, seed, record_events=record_events)
    snaps = []
    for t in sorted(float(s) for s in snapshot_times if 0 <= s <= t_end):
        sim.advance(t)
        snaps.append((t, sim.states.copy()))
        if on_snapshot is not None:
            on_snapshot(t, sim.states.copy())
    sim.advance(t_end)
    return Trajectory(
        initial=sim.initial,
        seed=sim.seed,
        t_end=float(t_end),
        final=sim.states.copy(),
        events=sim.events() if record_events else np.empty(0, dtype=EVENT_DTYPE),
        snapshots=snaps,
        occupation=sim.occupation(t_end),
        n_events=sim.n_events,
    )


def run_replicas(fn: Callable[[int], object], n: int, threads: int = 1) -> list:
    """Evaluate ``fn(i)`` for i < n, results in index order.

    The compiled kernel releases the GIL, so threads give real parallelism;
    the result order never depends on completion order.
    """
    if threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))
