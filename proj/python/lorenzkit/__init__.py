"""Numerical bifurcation analysis of the Lorenz system."""

from ._core import (
    BracketError,
    ConvergenceError,
    DomainError,
    GeometryError,
    InsufficientDataError,
    IntegrationError,
    LorenzError,
    LyapunovError,
    ValidationError,
    __version__,
    continue_cycle,
    cycle_search,
    equilibria,
    find_fate_transition_r,
    find_homoclinic_r,
    find_hopf_numeric,
    hopf_threshold,
    integrate,
    lyapunov_spectrum,
    return_map,
    return_map_thinness,
    run_cli,
    scenario_report,
    separatrix_fate,
    sweep,
    vector_field,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
