"""Two-layer SCA solver for Stackelberg games with aggregative followers."""

import json

from ._stackelberg import (
    Game,
    PevParams,
    PreconditionError,
    SolverError,
    check_gradients,
    default_theta_grid,
    generate_instance,
    naive,
    solve,
    solve_vgne,
)
from ._stackelberg import theta_sweep as _theta_sweep

__all__ = [
    "Game",
    "PevParams",
    "PreconditionError",
    "SolverError",
    "check_gradients",
    "default_theta_grid",
    "generate_instance",
    "naive",
    "pev_instance",
    "solve",
    "solve_vgne",
    "theta_sweep",
]


def pev_instance(N=100, T=24, seed=1, **overrides):
    """Generate the charging game; keyword overrides set PevParams fields."""
    params = PevParams()
    params.N = N
    params.T = T
    params.seed = seed
    for key, value in overrides.items():
        if not hasattr(params, key):
            raise AttributeError(f"PevParams has no field {key!r}")
        setattr(params, key, value)
    return generate_instance(params)


def theta_sweep(params, grid=None, sigma=1.0, inner="reference", max_outer=500):
    """Relaxation trade-off sweep; returns the report as a dict."""
    if grid is None:
        grid = default_theta_grid()
    return json.loads(_theta_sweep(params, list(grid), sigma, inner, max_outer))
