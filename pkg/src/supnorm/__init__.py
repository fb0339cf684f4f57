"""Effective averaged sup-norm bounds for even-weight cusp forms on Fuchsian
groups, with a direct numerical verifier for the modular group."""

from .domain import FundamentalDomain, load_domain, modular_group
from .engine import (
    BoundReport,
    EffectiveConstants,
    compute_constants,
    run_algorithm,
)
from .verify import verify_all

__all__ = [
    "FundamentalDomain",
    "load_domain",
    "modular_group",
    "BoundReport",
    "EffectiveConstants",
    "compute_constants",
    "run_algorithm",
    "verify_all",
]

__version__ = "0.1.0"
