from .engine import AbsorbingStateError, Simulator, Trajectory, run, run_replicas
from .generator import (
    ReducibleChainError,
    all_configurations,
    config_index,
    generator_matrix,
    is_irreducible,
    site_marginals,
    stationary_distribution,
)
from .rates import RateTable, boundary_rates, contact_rates, exchange_rate, site_event_rates

__all__ = [
    "AbsorbingStateError",
    "RateTable",
    "ReducibleChainError",
    "Simulator",
    "Trajectory",
    "all_configurations",
    "boundary_rates",
    "config_index",
    "contact_rates",
    "exchange_rate",
    "generator_matrix",
    "is_irreducible",
    "run",
    "run_replicas",
    "site_event_rates",
    "site_marginals",
    "stationary_distribution",
]
