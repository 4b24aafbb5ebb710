"""Reaction terms in the (rho1, rho2, rho3) and (rho1, T, R) coordinates.

All functions act on arrays whose leading axis holds the three components;
trailing axes are arbitrary.
"""
from __future__ import annotations

import numpy as np

from ..params import ModelParams

SIMPLEX_TOL = 1e-9


class SimplexError(ValueError):
    pass


def clamp_simplex(rho: np.ndarray, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Project tiny overshoots back into the simplex; reject anything beyond ``tol``."""
    rho = np.asarray(rho, dtype=float)
    s = rho.sum(axis=0)
    if rho.min(initial=0.0) < -tol or rho.max(initial=0.0) > 1 + tol or s.max(initial=0.0) > 1 + tol:
        raise SimplexError(
            f"point outside the simplex beyond {tol:g}: min={rho.min():.3g}, max sum={s.max():.3g}"
        )
    out = np.clip(rho, 0.0, 1.0)
    s = out.sum(axis=0)
    over = s > 1.0
    if np.any(over):
        out = np.where(over, out / np.where(over, s, 1.0), out)
    return out


def reaction_F(rho, p: ModelParams, d: int, clamp: bool = True) -> np.ndarray:
    rho = clamp_simplex(rho) if clamp else np.asarray(rho, dtype=float)
    r1, r2, r3 = rho
    r0 = 1.0 - r1 - r2 - r3
    birth = 2 * d * (p.lambda1 * r1 + p.lambda2 * r3)
    return np.stack([
        birth * r0 + r3 - (p.r + 1.0) * r1,
        p.r * r0 + r3 - birth * r2 - r2,
        birth * r2 + p.r * r1 - 2.0 * r3,
    ])


def transform(rho) -> np.ndarray:
    """(rho1, rho2, rho3) -> (rho1, T = rho1 + rho3, R = 1 - rho2 - rho3)."""
    r1, r2, r3 = np.asarray(rho, dtype=float)
    return np.stack([r1, r1 + r3, 1.0 - r2 - r3])


def untransform(q) -> np.ndarray:
    """(rho1, T, R) -> (rho1, rho2, rho3)."""
    r1, T, R = np.asarray(q, dtype=float)
    r3 = T - r1
    return np.stack([r1, 1.0 - R - r3, r3])


def check_transformed(q, tol: float = SIMPLEX_TOL) -> None:
    """0 <= rho1 <= T <= 1, rho1 <= R <= 1 and rho2 = 1 - R - T + rho1 >= 0."""
    r1, T, R = np.asarray(q, dtype=float)
    ok = (
        (r1 >= -tol).all() and (T <= 1 + tol).all() and (R <= 1 + tol).all()
        and (T - r1 >= -tol).all() and (R - r1 >= -tol).all() and (1 - R - T + r1 >= -tol).all()
    )
    if not ok:
        raise SimplexError("point outside the transformed admissible set")


def reaction_transformed(q, p: ModelParams, d: int, check: bool = True) -> np.ndarray:
    """(F1t, H, J) in the (rho1, T, R) coordinates."""
    if check:
        check_transformed(q)
    r1, T, R = np.asarray(q, dtype=float)
    g = 2 * d * ((p.lambda1 - p.lambda2) * r1 + p.lambda2 * T)
    return np.stack([
        g * (R - r1) + T - (p.r + 2.0) * r1,
        g * (1.0 - T) - T,
        -(p.r + 1.0) * R + 1.0,
    ])


def reaction_lipschitz(p: ModelParams, d: int) -> float:
    """Bound on the diagonal derivatives of the transformed reaction over the admissible set.

    Explicit Euler with dt * (diffusion weight + this bound) <= 1 is order
    preserving in (rho1, T, R).
    """
    return max(4 * d * p.lambda1 + p.r + 2.0, 2 * d * p.lambda1 + 1.0, p.r + 1.0)
