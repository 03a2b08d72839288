"""Sensitivity analysis for causal inference from observational data.

Thin python surface over the C++ core: sharp bounds on average treated and
control outcomes (and the ATE) under odds-ratio and second-moment relaxations
of unconfoundedness, with cross-fitted one-step estimators and multiplier
bootstrap bands.
"""

from _msens import (  # noqa: F401
    MsensError,
    ate_l2_curve,
    generate_dgp,
    interpret_bound,
    l2_curve,
    linf_curve,
    load_csv,
    make_folds,
    multiplier_bootstrap,
    oracle_population_values,
    psi0,
    weight_bounds,
)

__all__ = [
    "MsensError",
    "ate_l2_curve",
    "generate_dgp",
    "interpret_bound",
    "l2_curve",
    "linf_curve",
    "load_csv",
    "make_folds",
    "multiplier_bootstrap",
    "oracle_population_values",
    "psi0",
    "weight_bounds",
]
