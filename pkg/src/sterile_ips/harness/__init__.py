from .extremal_runs import reproduce_extremal_runs, run_pair
from .catalog import CATALOG, pde_pairing, select
from .config import ConfigError, ExperimentConfig
from .emit import Report, emit, load_report
from .hydro import RefusedError, exact_marginals, hydrodynamic_check, hydrostatic_check, stationary_profile

__all__ = [
    "CATALOG",
    "ConfigError",
    "ExperimentConfig",
    "RefusedError",
    "Report",
    "emit",
    "exact_marginals",
    "hydrodynamic_check",
    "hydrostatic_check",
    "load_report",
    "pde_pairing",
    "reproduce_extremal_runs",
    "run_pair",
    "select",
    "stationary_profile",
]
