"""Bond pricing and yield-curve shape analysis under a Wishart short-rate model."""

from importlib import resources

from .errors import (
    ConfigParseError,
    HypothesisViolation,
    InvalidInput,
    NoUniqueSolution,
    NumericalFailure,
    OutputError,
    SingularPsiPrime,
    StabilityViolation,
    ValidationError,
    WishartRatesError,
)
from .matfun import LoewnerOrder
from .model import ModelParams
from .pricing import YieldCurve, bond_price, long_end_yield, short_end_yield, yield_curve, zero_yield
from .riccati import RiccatiSolution, closed_form_psi, integrate_riccati, solve_are_stabilizing
from .shapes import Shape, ShapeClass, ShapeThresholds, classify, classify_empirical, compute_thresholds, find_tau_star
from .sim import PricingEstimate, Scheme, SimConfig, mc_bond_price, simulate_path

__version__ = "0.1.0"


def fixture_path(name):
    """Path of a bundled example config, e.g. ``fixture_path("base.json")``."""
    return resources.files(__name__).joinpath("data", name)


__all__ = [
    "ConfigParseError",
    "HypothesisViolation",
    "InvalidInput",
    "LoewnerOrder",
    "ModelParams",
    "NoUniqueSolution",
    "NumericalFailure",
    "OutputError",
    "PricingEstimate",
    "RiccatiSolution",
    "Scheme",
    "Shape",
    "ShapeClass",
    "ShapeThresholds",
    "SimConfig",
    "SingularPsiPrime",
    "StabilityViolation",
    "ValidationError",
    "WishartRatesError",
    "YieldCurve",
    "bond_price",
    "classify",
    "classify_empirical",
    "closed_form_psi",
    "compute_thresholds",
    "find_tau_star",
    "fixture_path",
    "integrate_riccati",
    "long_end_yield",
    "mc_bond_price",
    "short_end_yield",
    "simulate_path",
    "solve_are_stabilizing",
    "yield_curve",
    "zero_yield",
]
