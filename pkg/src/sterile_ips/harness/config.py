"""Experiment configuration loaded from JSON."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..params import BoundaryData, ModelParams, ParameterError, boundary_preset, extinction_state
from ..pde.conditions import delta1_conservative, delta1_default
from ..pde.grid import BoundaryRegime, Grid, regime_from_theta


class ConfigError(ValueError):
    """Invalid or unresolvable configuration (CLI exit code 2)."""


INITIAL_PRESETS = {
    "uniform": (0.25, 0.25, 0.25),
    "wild": (0.6, 0.1, 0.1),
    "sterile": (0.1, 0.6, 0.1),
}


@dataclass
class ExperimentConfig:
    params: dict = field(default_factory=dict)
    boundary: object = "default"
    initial: object = "ramp"
    d: int = 1
    N: int = 20
    lattice_sizes: list = field(default_factory=lambda: [50, 100, 200])
    exact_sizes: list = field(default_factory=lambda: [1, 2, 3])
    statistical_N: int | None = 50
    grid: dict = field(default_factory=lambda: {"M1": 201, "Mt": 8})
    dt: object = "auto"
    regime: str | None = None
    left_robin: str = "mirrored"
    t_end: float = 1.0
    snapshot_times: list = field(default_factory=list)
    replicas: int = 32
    seed: int = 0
    test_functions: list | None = None
    exchange_multiplier: float = 1.0
    delta1: object = "default"
    tol: float = 1e-6
    t_max: float = 500.0
    burn_in: float = 10.0
    window: float = 50.0
    block_eps: float = 0.2
    appendix_b: dict = field(default_factory=dict)
    out: str = "out"

    # -- construction ----------------------------------------------------
    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from None
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        try:
            self.model_params()
            self.boundary_data()
            self.initial_profile()
            self.pde_grid()
            self.pde_regime()
            self.delta1_value()
        except (ParameterError, ValueError, TypeError, KeyError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(str(e)) from None
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an explicit integer in [0, 2^64)")
        if self.d < 1 or self.N < 1 or self.replicas < 1:
            raise ConfigError("d, N and replicas must be positive")
        if any(int(n) < 1 for n in self.lattice_sizes) or list(self.lattice_sizes) != sorted(self.lattice_sizes):
            raise ConfigError("lattice_sizes must be positive and ascending")
        if self.t_end <= 0 or self.tol <= 0 or self.t_max <= 0:
            raise ConfigError("t_end, tol and t_max must be positive")
        if self.left_robin not in ("mirrored", "literal"):
            raise ConfigError("left_robin must be 'mirrored' or 'literal'")
        if self.test_functions is not None:
            from .catalog import CATALOG

            missing = [n for n in self.test_functions if n not in CATALOG]
            if missing:
                raise ConfigError(f"unknown test functions {missing}")

    # -- resolved objects ------------------------------------------------
    def model_params(self) -> ModelParams:
        return ModelParams(**self.params)

    def boundary_data(self) -> BoundaryData:
        b = self.boundary
        if isinstance(b, str):
            return boundary_preset(b, self.model_params())
        if isinstance(b, dict) and set(b) <= {"left", "right"} and "left" in b:
            return BoundaryData.constant(b["left"], b.get("right"), name="config")
        raise ConfigError(f"boundary must be a preset name or {{'left': [..], 'right': [..]}}, got {b!r}")

    def initial_profile(self):
        """gamma: (n, d) points -> (3, n) densities."""
        g = self.initial
        p = self.model_params()
        if g == "extinction":
            return _constant(extinction_state(p.r))
        if g == "ramp":
            return _ramp((0.5, 0.1, 0.2), (0.1, 0.4, 0.1))
        if isinstance(g, str):
            if g not in INITIAL_PRESETS:
                raise ConfigError(f"unknown initial profile {g!r}")
            return _constant(INITIAL_PRESETS[g])
        if isinstance(g, dict) and "constant" in g:
            return _constant(g["constant"])
        if isinstance(g, dict) and "left" in g and "right" in g:
            return _ramp(g["left"], g["right"])
        raise ConfigError(f"cannot interpret initial profile {g!r}")

    def pde_grid(self, interval=(-1.0, 1.0)) -> Grid:
        g = dict(self.grid)
        extra = set(g) - {"M1", "Mt", "interval"}
        if extra:
            raise ConfigError(f"unknown grid keys {sorted(extra)}")
        return Grid(M1=int(g.get("M1", 201)), d=self.d, Mt=int(g.get("Mt", 8)) if self.d > 1 else 1,
                    interval=tuple(g.get("interval", interval)))

    def pde_regime(self) -> BoundaryRegime:
        p = self.model_params()
        derived = regime_from_theta(p.theta_l, p.theta_r)
        if self.regime is None:
            return derived
        return BoundaryRegime.parse(self.regime)

    def regime_matches_theta(self) -> bool:
        p = self.model_params()
        return self.pde_regime() == regime_from_theta(p.theta_l, p.theta_r)

    def dt_value(self) -> float | None:
        if self.dt in (None, "auto"):
            return None
        dt = float(self.dt)
        if dt <= 0:
            raise ConfigError("dt must be positive or 'auto'")
        return dt

    def delta1_value(self) -> float:
        if self.delta1 == "default":
            return delta1_default(self.d)
        if self.delta1 == "conservative":
            return delta1_conservative(self.d)
        v = float(self.delta1)
        if v <= 0:
            raise ConfigError("delta1 must be positive")
        return v


def _check_simplex(v):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or np.any(v < 0) or v.sum() > 1:
        raise ConfigError(f"densities {list(v)} are not in the simplex")
    return v


def _constant(v):
    v = _check_simplex(v)
    return lambda u, v=v: np.repeat(v[:, None], len(u), axis=1)


def _ramp(left, right):
    """Affine in u1 between the two triples at u1 = -1 and u1 = 1."""
    lv = _check_simplex(left)
    rv = _check_simplex(right)

    def fn(u):
        s = (np.asarray(u)[:, 0] + 1.0) / 2.0
        return lv[:, None] * (1 - s)[None] + rv[:, None] * s[None]

    return fn
