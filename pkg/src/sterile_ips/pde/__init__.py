from .conditions import ConditionReport, check_conditions, delta1_conservative, delta1_default
from .grid import BC, BoundaryRegime, Grid, Profile, regime_from_theta
from .reaction import (
    SimplexError,
    clamp_simplex,
    reaction_F,
    reaction_transformed,
    transform,
    untransform,
)
from .solver import (
    CFLError,
    SolverError,
    StationaryResult,
    Stepper,
    cfl_limit,
    comparison_check,
    euler_step,
    solve,
    solve_batch,
    stable_dt,
    stationary_solve,
    weak_residual,
)

__all__ = [
    "BC",
    "BoundaryRegime",
    "CFLError",
    "ConditionReport",
    "Grid",
    "Profile",
    "SimplexError",
    "SolverError",
    "StationaryResult",
    "Stepper",
    "cfl_limit",
    "check_conditions",
    "clamp_simplex",
    "comparison_check",
    "delta1_conservative",
    "delta1_default",
    "euler_step",
    "reaction_F",
    "reaction_transformed",
    "regime_from_theta",
    "solve",
    "solve_batch",
    "stable_dt",
    "stationary_solve",
    "transform",
    "untransform",
    "weak_residual",
]
