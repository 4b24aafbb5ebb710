"""Model parameters and reservoir densities shared by the particle and PDE sides."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Rates of the superposed dynamics.

    ``D`` diffusivity of the stirring, ``lambda1`` / ``lambda2`` birth rates
    from wild / mixed sites, ``r`` sterile release rate, ``theta_l`` /
    ``theta_r`` reservoir slowdown exponents at the left / right face.
    """

    D: float = 1.0
    lambda1: float = 0.75
    lambda2: float = 0.25
    r: float = 1.0
    theta_l: float = 0.5
    theta_r: float = 1.0

    def __post_init__(self):
        for name in ("D", "lambda1", "lambda2", "r"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if not self.lambda2 < self.lambda1:
            raise ParameterError(f"need lambda2 < lambda1, got {self.lambda2} >= {self.lambda1}")
        if self.theta_l < 0 or self.theta_r < 0:
            raise ParameterError("slowdown exponents must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "ModelParams":
        return ModelParams(**{**asdict(self), **changes})


FaceFunction = Callable[[np.ndarray], np.ndarray]


class BoundaryData:
    """Reservoir densities b = (b1, b2, b3) on the two faces.

    Each face is described by a function of the transverse coordinates
    ``u`` (array of shape (m, d-1), empty second axis when d = 1) returning
    a (3, m) array.  Values must lie in [0, 1] with b1 + b2 + b3 <= 1.
    """

    def __init__(self, left: FaceFunction, right: FaceFunction, name: str = "custom"):
        self._faces = {-1: left, 1: right}
        self.name = name
        self._constants: dict[int, tuple[float, float, float]] = {}

    @classmethod
    def constant(cls, left, right=None, name: str = "constant") -> "BoundaryData":
        right = left if right is None else right
        lv = np.asarray(left, dtype=float)
        rv = np.asarray(right, dtype=float)
        for v in (lv, rv):
            if v.shape != (3,):
                raise ParameterError("constant boundary data needs three densities per face")
        obj = cls(
            lambda u, v=lv: np.repeat(v[:, None], len(u), axis=1),
            lambda u, v=rv: np.repeat(v[:, None], len(u), axis=1),
            name=name,
        )
        obj._constants = {-1: tuple(lv.tolist()), 1: tuple(rv.tolist())}
        obj.validate()
        return obj

    @property
    def constants(self) -> dict[int, tuple[float, float, float]] | None:
        return dict(self._constants) if self._constants else None

    def values(self, side: int, u: np.ndarray) -> np.ndarray:
        """(3, m) densities at the transverse points ``u`` of face ``side``."""
        if side not in (-1, 1):
            raise ValueError("side must be -1 (left) or +1 (right)")
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            u = u.reshape(-1, 0) if u.size == 0 else u.reshape(-1, 1)
        vals = np.asarray(self._faces[side](u), dtype=float).reshape(3, len(u))
        if np.any(vals < 0) or np.any(vals > 1) or np.any(vals.sum(axis=0) > 1 + 1e-12):
            raise ParameterError(f"boundary data {self.name} leaves the simplex on face {side}")
        return vals

    def with_empty(self, side: int, u: np.ndarray) -> np.ndarray:
        """(4, m) array (b0, b1, b2, b3)."""
        b = self.values(side, u)
        return np.vstack([1.0 - b.sum(axis=0), b])

    def validate(self) -> None:
        for side in (-1, 1):
            self.values(side, np.zeros((1, 0)))

    def is_strictly_admissible(self, u_samples: np.ndarray | None = None) -> bool:
        """True when every b_i and b_0 lies strictly inside (0, 1)."""
        if u_samples is None:
            u_samples = np.zeros((1, 0))
        for side in (-1, 1):
            b = self.with_empty(side, u_samples)
            if np.any(b <= 0) or np.any(b >= 1):
                return False
        return True

    def to_dict(self) -> dict:
        out = {"name": self.name}
        if self._constants:
            out["left"] = list(self._constants[-1])
            out["right"] = list(self._constants[1])
        return out

    def __repr__(self):
        return f"BoundaryData({self.to_dict()})"


def extinction_state(r: float) -> tuple[float, float, float]:
    """The reaction fixed point with no wild insects, (0, r/(r+1), 0)."""
    return (0.0, r / (r + 1.0), 0.0)


BOUNDARY_PRESETS = {
    "default": ((0.3, 0.2, 0.1), (0.1, 0.3, 0.2)),
    "symmetric": ((0.25, 0.25, 0.25), (0.25, 0.25, 0.25)),
    "wild-left": ((0.6, 0.1, 0.1), (0.05, 0.5, 0.05)),
}


def boundary_preset(name: str, params: ModelParams | None = None) -> BoundaryData:
    if name == "extinction":
        r = 1.0 if params is None else params.r
        e = extinction_state(r)
        return BoundaryData.constant(e, e, name="extinction")
    try:
        left, right = BOUNDARY_PRESETS[name]
    except KeyError:
        raise ParameterError(f"unknown boundary preset {name!r}") from None
    return BoundaryData.constant(left, right, name=name)
