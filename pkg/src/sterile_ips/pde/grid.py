"""Finite-difference grids, profiles and per-face boundary regimes."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class BC(enum.Enum):
    DIRICHLET = "D"
    ROBIN = "R"
    NEUMANN = "Ne"


@dataclass(frozen=True)
class BoundaryRegime:
    left: BC
    right: BC

    @property
    def label(self) -> str:
        return f"({self.left.value} ; {self.right.value})"

    @classmethod
    def parse(cls, text: str) -> "BoundaryRegime":
        """Accepts labels such as ``"D;R"``, ``"(Ne ; R)"`` or ``"neumann,robin"``."""
        names = {"d": BC.DIRICHLET, "dirichlet": BC.DIRICHLET, "r": BC.ROBIN, "robin": BC.ROBIN,
                 "n": BC.NEUMANN, "ne": BC.NEUMANN, "neumann": BC.NEUMANN}
        parts = [t.strip().lower() for t in text.strip("() ").replace(",", ";").split(";")]
        if len(parts) != 2 or any(t not in names for t in parts):
            raise ValueError(f"cannot parse boundary regime {text!r}")
        return cls(names[parts[0]], names[parts[1]])


def regime_from_theta(theta_l: float, theta_r: float) -> BoundaryRegime:
    """theta in [0, 1) -> Dirichlet, theta = 1 -> Robin, theta > 1 -> Neumann, per face."""

    def one(theta):
        if theta < 0:
            raise ValueError(f"slowdown exponent must be nonnegative, got {theta}")
        if theta < 1:
            return BC.DIRICHLET
        if theta == 1:
            return BC.ROBIN
        return BC.NEUMANN

    return BoundaryRegime(one(theta_l), one(theta_r))


@dataclass(frozen=True)
class Grid:
    """Nodes of [a, b] x [0, 1)^{d-1}: ``M1`` nodes along axis 1 including
    both endpoints, ``Mt`` periodic nodes along each torus direction."""

    M1: int
    d: int = 1
    Mt: int = 1
    interval: tuple[float, float] = (-1.0, 1.0)

    def __post_init__(self):
        if self.M1 < 3:
            raise ValueError("need at least 3 nodes along axis 1")
        if self.d < 1 or (self.d > 1 and self.Mt < 3):
            raise ValueError("torus directions need at least 3 nodes")
        if not self.interval[1] > self.interval[0]:
            raise ValueError("empty interval")

    @property
    def h1(self) -> float:
        return (self.interval[1] - self.interval[0]) / (self.M1 - 1)

    @property
    def ht(self) -> float:
        return 1.0 / self.Mt

    @property
    def K(self) -> int:
        """Transverse node count Mt^{d-1}."""
        return self.Mt ** (self.d - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M1,) + (self.Mt,) * (self.d - 1)

    @property
    def x1(self) -> np.ndarray:
        return np.linspace(self.interval[0], self.interval[1], self.M1)

    def transverse_points(self) -> np.ndarray:
        """(K, d-1) torus coordinates, row-major."""
        if self.d == 1:
            return np.zeros((1, 0))
        axes = np.indices((self.Mt,) * (self.d - 1)).reshape(self.d - 1, -1).T
        return axes * self.ht

    def points(self) -> np.ndarray:
        """(M1*K, d) node coordinates, axis 1 slowest."""
        t = self.transverse_points()
        x1 = np.repeat(self.x1, self.K)[:, None]
        return np.hstack([x1, np.tile(t, (self.M1, 1))])

    def torus_neighbors(self) -> np.ndarray:
        """(K, 2(d-1)) transverse neighbour table, order -e2, +e2, -e3, ..."""
        if self.d == 1:
            return np.zeros((1, 0), dtype=np.int64)
        shape = (self.Mt,) * (self.d - 1)
        flat = np.arange(self.K).reshape(shape)
        cols = []
        for k in range(self.d - 1):
            for step in (-1, 1):
                cols.append(np.roll(flat, -step, axis=k).reshape(-1))
        return np.stack(cols, axis=1).astype(np.int64)

    def weights(self) -> np.ndarray:
        """Trapezoid weights along axis 1 times the torus cell volume, shape (M1, K)."""
        w1 = np.full(self.M1, self.h1)
        w1[[0, -1]] *= 0.5
        return np.repeat(w1[:, None], self.K, axis=1) * self.ht ** (self.d - 1)

    def to_dict(self) -> dict:
        return {"M1": self.M1, "d": self.d, "Mt": self.Mt, "interval": list(self.interval)}


@dataclass
class Profile:
    """(rho1, rho2, rho3) on a grid; ``values`` has shape (3, M1, K)."""

    grid: Grid
    values: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(3, self.grid.M1, self.grid.K)

    @classmethod
    def constant(cls, grid: Grid, rho) -> "Profile":
        rho = np.asarray(rho, dtype=float)
        return cls(grid, np.broadcast_to(rho[:, None, None], (3, grid.M1, grid.K)).copy())

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Profile":
        """``fn`` maps an (n, d) point array to (3, n) densities."""
        return cls(grid, np.asarray(fn(grid.points()), dtype=float))

    def copy(self) -> "Profile":
        return Profile(self.grid, self.values.copy(), self.time)

    def sup_distance(self, other: "Profile") -> float:
        if other.grid != self.grid:
            raise ValueError("profiles live on different grids")
        return float(np.abs(self.values - other.values).max())

    def in_simplex(self, tol: float = 1e-9) -> bool:
        v = self.values
        return bool(v.min() >= -tol and v.max() <= 1 + tol and v.sum(axis=0).max() <= 1 + tol)
