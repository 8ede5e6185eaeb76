"""Zero-coupon bond prices and yield curves.

Yields are continuously compounded and annualized, maturities are in years.
"""

import functools
from dataclasses import dataclass

import numpy as np

from . import riccati
from .errors import InvalidInput

DEFAULT_GRID_MIN = 0.05
DEFAULT_GRID_MAX = 30.0
DEFAULT_GRID_POINTS = 120


def default_grid(tau_min=DEFAULT_GRID_MIN, tau_max=DEFAULT_GRID_MAX, n=DEFAULT_GRID_POINTS):
    """Geometric maturity grid, 120 points from 0.05 to 30 years by default."""
    if not 0 < tau_min < tau_max or n < 2:
        raise InvalidInput("grid needs 0 < tau_min < tau_max and at least 2 points")
    return np.geomspace(tau_min, tau_max, n)


@dataclass(frozen=True)
class YieldCurve:
    taus: np.ndarray
    yields: np.ndarray
    prices: np.ndarray
    short_end: float
    long_end: float
    params_hash: str

    def __len__(self):
        return len(self.taus)


@functools.lru_cache(maxsize=64)
def _solution(p, taus):
    return riccati.solve_on_nodes(p, np.array(taus))


def riccati_solution(p, taus):
    """Cached Riccati solution whose grid contains every maturity in ``taus``."""
    key = tuple(float(t) for t in np.atleast_1d(taus))
    return _solution(p, key)


def _exponent(p, sol, tau):
    psi, phi = sol.at(tau)
    return phi + float(np.trace(psi @ p.X))


def bond_price(p, tau):
    """``exp(-phi(tau) - Tr[psi(tau) X])``."""
    tau = float(tau)
    if not np.isfinite(tau) or tau < 0:
        raise InvalidInput(f"maturity must be finite and nonnegative, got {tau}")
    if tau == 0:
        return 1.0
    return float(np.exp(-_exponent(p, riccati_solution(p, [tau]), tau)))


def zero_yield(p, tau):
    """Zero-coupon yield ``(phi(tau) + Tr[psi(tau) X]) / tau`` for ``tau > 0``."""
    tau = float(tau)
    if not np.isfinite(tau) or tau <= 0:
        raise InvalidInput(f"yield needs tau > 0 (got {tau}); use short_end_yield for the limit")
    return _exponent(p, riccati_solution(p, [tau]), tau) / tau


def short_end_yield(p):
    """``lim_{tau -> 0} Y(tau) = a + Tr[B X]``, the short rate."""
    return p.short_rate


def long_end_yield(p):
    """``lim_{tau -> inf} Y(tau) = Tr[alpha Q^T Q psi'] + a``."""
    return float(riccati.eval_F(riccati.solve_are_stabilizing(p), p))


def yield_curve(p, taus=None):
    """Yields and bond prices on ``taus`` from a single Riccati solve.

    Every maturity is a node of the solve, so no interpolation error enters
    the reported values.
    """
    taus = default_grid() if taus is None else np.asarray(taus, dtype=float)
    if taus.ndim != 1 or taus.size == 0:
        raise InvalidInput("maturity grid must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(taus)) or np.any(taus <= 0) or np.any(np.diff(taus) <= 0):
        raise InvalidInput("maturity grid must be finite, positive and strictly increasing")
    sol = riccati_solution(p, taus)
    exponents = np.array([_exponent(p, sol, t) for t in taus])
    return YieldCurve(
        taus=taus.copy(),
        yields=exponents / taus,
        prices=np.exp(-exponents),
        short_end=short_end_yield(p),
        long_end=long_end_yield(p),
        params_hash=p.params_hash,
    )
