"""Decay-surge jump processes: closed-form analysis and exact simulation.

The state decays along a deterministic flow dx/dt = -alpha(x) and jumps
strictly upward at rate beta(x); the jump law is separable, with survival
k(y)/k(x) for landing above y from x.  This package provides the analytic
objects of that setup (scale functions, speed density, exit probabilities,
hitting-time moments, boundary and regime classification), an exact
event-driven sampler with reproducible parallel ensembles, the embedded and
record chains, the growth-collapse dual construction, and independent
Hawkes-branching / shot-noise oracles for cross-validation.
"""

from .model import (
    ClosedForms,
    ModelTriple,
    ParamFamily,
    RateFunction,
    SurvivalFunction,
    Violation,
    load_model,
    make_family,
    make_model,
    parse_expression,
    parse_survival_expression,
    validate_triple,
)

__version__ = "0.1.0"

__all__ = [
    "ClosedForms",
    "ModelTriple",
    "ParamFamily",
    "RateFunction",
    "SurvivalFunction",
    "Violation",
    "load_model",
    "make_family",
    "make_model",
    "parse_expression",
    "parse_survival_expression",
    "validate_triple",
    "__version__",
]
