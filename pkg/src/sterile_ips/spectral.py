"""Closed-form Laplacian eigenfunctions on [-1, 1] x [0, 1)^{d-1}.

Three families, by the condition imposed on the two faces of axis 1:

* ``NN`` (Neumann both faces):  V_k = c cos(k1 pi (x1 + 1) / 2) S(x),
  alpha_k = (k1 pi)^2 / 4 + sum_{i>=2} k_i^2 pi^2, k1 >= 0,
  with c = 2^{-1/2} for k1 = 0 and 1 otherwise.
* ``DN`` (Dirichlet left, Neumann right):
  W_k = 2^{-1/2} [(-1)^{k1} cos(w x1) + sin(w x1)] S(x), w = pi/4 + k1 pi/2,
  gamma_k = w^2 + sum_{i>=2} k_i^2 pi^2, k1 >= 0.
* ``DD`` (Dirichlet both faces): U_k = sin(k1 pi x1) S(x),
  delta_k = sum_i k_i^2 pi^2, k1 >= 1.

S(x) = 2^{(d-1)/2} prod_{i>=2} sin(k_i pi x_i) with k_i >= 1.  Every member has
unit L^2 norm.  ``v_display`` keeps the uncorrected cosine form
cos(k1 pi x1 / 2 + pi / 2) for reference; it only satisfies the Neumann
condition for odd k1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

KINDS = ("NN", "DN", "DD")


class SpectralIndexError(ValueError):
    pass


def _check_index(kind: str, k, d: int) -> tuple[int, ...]:
    k = tuple(int(c) for c in np.atleast_1d(k))
    if len(k) != d:
        raise SpectralIndexError(f"index {k} has {len(k)} entries, expected d={d}")
    first_min = 1 if kind == "DD" else 0
    if k[0] < first_min or any(c < 1 for c in k[1:]):
        raise SpectralIndexError(f"invalid {kind} index {k}")
    return k


def _transverse(k, x) -> np.ndarray:
    out = np.ones(x.shape[0])
    for i, ki in enumerate(k[1:], start=1):
        out = out * math.sqrt(2.0) * np.sin(ki * math.pi * x[:, i])
    return out


def _points(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 1) if d == 1 and x.ndim <= 1 else np.atleast_2d(x)


@dataclass(frozen=True)
class EigenFamily:
    kind: str
    d: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.d < 1:
            raise ValueError("d must be positive")

    # -- axis-1 factor and its derivatives -------------------------------
    def _axis1(self, k1: int, x1: np.ndarray, order: int = 0) -> np.ndarray:
        if self.kind == "NN":
            w = k1 * math.pi / 2
            c = 1 / math.sqrt(2) if k1 == 0 else 1.0
            ph = w * (x1 + 1)
            return c * (np.cos(ph), -w * np.sin(ph), -w * w * np.cos(ph))[order]
        if self.kind == "DN":
            w = math.pi / 4 + k1 * math.pi / 2
            s = (-1) ** k1
            c = 1 / math.sqrt(2)
            vals = (
                s * np.cos(w * x1) + np.sin(w * x1),
                w * (-s * np.sin(w * x1) + np.cos(w * x1)),
                -w * w * (s * np.cos(w * x1) + np.sin(w * x1)),
            )
            return c * vals[order]
        w = k1 * math.pi
        return (np.sin(w * x1), w * np.cos(w * x1), -w * w * np.sin(w * x1))[order]

    def value(self, k, x) -> np.ndarray:
        k = _check_index(self.kind, k, self.d)
        x = _points(x, self.d)
        return self._axis1(k[0], x[:, 0]) * _transverse(k, x)

    def d1(self, k, x) -> np.ndarray:
        """Derivative along axis 1."""
        k = _check_index(self.kind, k, self.d)
        x = _points(x, self.d)
        return self._axis1(k[0], x[:, 0], 1) * _transverse(k, x)

    def eigenvalue(self, k) -> float:
        k = _check_index(self.kind, k, self.d)
        rest = sum(c * c for c in k[1:]) * math.pi ** 2
        if self.kind == "NN":
            return (k[0] * math.pi) ** 2 / 4 + rest
        if self.kind == "DN":
            return (math.pi / 4 + k[0] * math.pi / 2) ** 2 + rest
        return (k[0] * math.pi) ** 2 + rest

    def indices(self, n: int) -> list[tuple[int, ...]]:
        """The first ``n`` indices by increasing eigenvalue (ties broken lexicographically)."""
        first = 1 if self.kind == "DD" else 0
        span = int(math.ceil(n ** (1 / self.d))) + 2
        cands = itertools.product(range(first, first + span), *[range(1, 1 + span)] * (self.d - 1))
        return sorted(cands, key=lambda k: (self.eigenvalue(k), k))[:n]

    def boundary_defects(self, k, u=None) -> dict[str, float]:
        """Largest |value| or |d1| where the family's face conditions require zero."""
        u = np.zeros((1, self.d - 1)) if u is None else np.atleast_2d(u)
        left = np.hstack([-np.ones((len(u), 1)), u])
        right = np.hstack([np.ones((len(u), 1)), u])
        checks = {
            "NN": {"d1(-1)": self.d1(k, left), "d1(+1)": self.d1(k, right)},
            "DN": {"value(-1)": self.value(k, left), "d1(+1)": self.d1(k, right)},
            "DD": {"value(-1)": self.value(k, left), "value(+1)": self.value(k, right)},
        }[self.kind]
        return {name: float(np.abs(v).max()) for name, v in checks.items()}


def v_display(k1: int, x) -> np.ndarray:
    """cos(k1 pi x / 2 + pi / 2) in d = 1, the uncorrected cosine form."""
    if k1 < 0:
        raise SpectralIndexError("k1 must be nonnegative")
    return np.cos(k1 * math.pi * np.asarray(x, dtype=float) / 2 + math.pi / 2)


def eval_V(k, x, d: int = 1):
    return EigenFamily("NN", d).value(k, x)


def eval_W(k, x, d: int = 1):
    return EigenFamily("DN", d).value(k, x)


def eval_U(k, x, d: int = 1):
    return EigenFamily("DD", d).value(k, x)


def alpha(k, d: int = 1) -> float:
    return EigenFamily("NN", d).eigenvalue(k)


def gamma(k, d: int = 1) -> float:
    return EigenFamily("DN", d).eigenvalue(k)


def delta(k, d: int = 1) -> float:
    return EigenFamily("DD", d).eigenvalue(k)


def simpson_weights(n_points: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Composite Simpson nodes and weights (an odd node count is enforced)."""
    n = n_points if n_points % 2 == 1 else n_points + 1
    x = np.linspace(a, b, n)
    h = (b - a) / (n - 1)
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[[0, -1]] = 1.0
    return x, w * h / 3


def gram_matrix(family: EigenFamily, n: int, resolution: int = 10_000, other: EigenFamily | None = None) -> np.ndarray:
    """L^2 inner products of the first ``n`` members (d = 1) by composite Simpson.

    With ``other`` the matrix holds <family_j, other_k>.
    """
    if family.d != 1:
        raise ValueError("gram_matrix integrates over axis 1 only (d = 1)")
    if n < 1:
        raise ValueError("n must be positive")
    x, w = simpson_weights(resolution, -1.0, 1.0)
    pts = x[:, None]
    A = np.stack([family.value(k, pts) for k in family.indices(n)])
    second = other if other is not None else family
    B = np.stack([second.value(k, pts) for k in second.indices(n)])
    return (A * w[None]) @ B.T


def fd_residual(family: EigenFamily, k, n_nodes: int) -> float:
    """max over interior nodes of |Lap_h phi + lambda phi| on a uniform grid (d = 1)."""
    if family.d != 1:
        raise ValueError("fd_residual is implemented for d = 1")
    x = np.linspace(-1.0, 1.0, n_nodes)
    h = x[1] - x[0]
    phi = family.value(k, x[:, None])
    lap = (phi[:-2] - 2 * phi[1:-1] + phi[2:]) / h ** 2
    return float(np.abs(lap + family.eigenvalue(k) * phi[1:-1]).max())


def observed_order(family: EigenFamily, k, n_nodes: int = 101) -> float:
    """log2 of the residual ratio under one mesh halving."""
    coarse = fd_residual(family, k, n_nodes)
    fine = fd_residual(family, k, 2 * n_nodes - 1)
    return math.log2(coarse / fine)
