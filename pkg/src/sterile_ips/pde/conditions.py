"""Parameter conditions under which the stationary profile is a global attractor."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from ..params import ModelParams


def delta1_default(d: int) -> float:
    """Smallest eigenvalue of the sine family prod sin(k_i pi x_i), d pi^2."""
    return d * math.pi ** 2


def delta1_conservative(d: int) -> float:
    """pi^2/4 + (d-1) pi^2: also counts the half-integer mode cos(pi x1 / 2)."""
    return math.pi ** 2 / 4 + (d - 1) * math.pi ** 2


@dataclass(frozen=True)
class ConditionReport:
    H1: bool
    H2: bool
    H3: bool
    delta1: float
    d: int

    def to_dict(self) -> dict:
        return asdict(self)


def check_conditions(p: ModelParams, d: int, delta1: float | None = None) -> ConditionReport:
    """Strict inequalities

    H1: D >= 1, r + 1 > 2d(l1 - l2), 1 > 2d l2
    H2: D delta1 + r + 2 > 2d(l1 - l2), D delta1 + 1 > 2d l2
    H3: r + 2 > 2d(l1 - l2), 1 > 2d l2
    """
    if delta1 is None:
        delta1 = delta1_default(d)
    if not delta1 > 0:
        raise ValueError("delta1 must be positive")
    gap = 2 * d * (p.lambda1 - p.lambda2)
    mix = 2 * d * p.lambda2
    h1 = p.D >= 1 and p.r + 1 > gap and 1 > mix
    h2 = p.D * delta1 + p.r + 2 > gap and p.D * delta1 + 1 > mix
    h3 = p.r + 2 > gap and 1 > mix
    return ConditionReport(bool(h1), bool(h2), bool(h3), float(delta1), int(d))
