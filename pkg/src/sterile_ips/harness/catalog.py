"""Fixed catalog of test-function triples G = (G1, G2, G3) on [-1, 1] x [0, 1)^{d-1}.

Each entry maps an (n, d) point array to a (3, n) array.  Only the axis-1
coordinate enters, so the same catalog serves every dimension.
"""
from __future__ import annotations

import numpy as np

from ..spectral import EigenFamily


def _triple(f1, f2, f3):
    def G(u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        return np.stack([f1(u[:, 0]), f2(u[:, 0]), f3(u[:, 0])])

    return G


def _one(x):
    return np.ones_like(x)


def _zero(x):
    return np.zeros_like(x)


def bump(x, center: float = 0.0, radius: float = 0.5):
    """exp(1 - 1/(1 - s^2)) for |s| < 1 with s = (x - center)/radius; peak 1."""
    s = (np.asarray(x, dtype=float) - center) / radius
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


_W = EigenFamily("DN")
_V = EigenFamily("NN")
_U = EigenFamily("DD")

CATALOG = {
    "ones": _triple(_one, _one, _one),
    "wild": _triple(_one, _zero, _zero),
    "sterile": _triple(_zero, _one, _zero),
    "mixed": _triple(_zero, _zero, _one),
    "x1": _triple(lambda x: x, lambda x: x, lambda x: x),
    "x1-squared": _triple(lambda x: x * x, lambda x: -x * x, lambda x: x * x),
    "bump": _triple(bump, lambda x: bump(x, 0.25, 0.5), lambda x: bump(x, -0.25, 0.5)),
    "eigen": _triple(
        lambda x: _W.value((1,), x[:, None]),
        lambda x: _V.value((1,), x[:, None]),
        lambda x: _U.value((1,), x[:, None]),
    ),
}


def select(names=None) -> dict:
    if names is None:
        return dict(CATALOG)
    return {n: CATALOG[n] for n in names}


def pde_pairing(values: np.ndarray, points: np.ndarray, weights: np.ndarray, G) -> float:
    """<rho, G> = sum_i int rho_i G_i by the grid's quadrature weights."""
    g = np.asarray(G(points), dtype=float).reshape(3, -1)
    return float((values.reshape(3, -1) * g * weights.reshape(1, -1)).sum())
