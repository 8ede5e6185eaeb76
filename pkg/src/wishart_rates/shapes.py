"""Yield-curve shape thresholds and classification.

With ``M* = M - 2 Q^T Q psi'`` the two thresholds solve

    M* b_norm + b_norm M*^T = -alpha Q^T Q,     M b_inv + b_inv M^T = -alpha Q^T Q,

and the curve is normal for ``X < b_norm``, inverse for ``X > b_inv`` and
humped for ``b_norm < X < b_inv`` (Loewner order). These conditions are
sufficient only; states that are incomparable with a threshold are
reported as INDETERMINATE.
"""

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import matfun, riccati
from .errors import HypothesisViolation, InvalidInput, NumericalFailure
from .matfun import LoewnerOrder

QUADRATURE_CHECK_TOL = 1e-8
EMPIRICAL_TOL = 1e-9
SCAN_STEP = 1e-2
NOISE_FLOOR = 1e-10


class Shape(enum.Enum):
    NORMAL = "Normal"
    INVERSE = "Inverse"
    HUMPED = "Humped"
    INDETERMINATE = "Indeterminate"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ShapeThresholds:
    psi_prime: np.ndarray
    m_star: np.ndarray
    b_norm: np.ndarray
    b_inv: np.ndarray
    lyapunov_residuals: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class ShapeClass:
    """Classification outcome plus the Loewner comparisons behind it.

    ``vs_b_norm`` / ``vs_b_inv`` compare the state ``X`` against each
    threshold (STRICTLY_LESS means ``X < threshold``).
    """

    shape: Shape
    vs_b_norm: Optional[LoewnerOrder] = None
    vs_b_inv: Optional[LoewnerOrder] = None
    thresholds: Optional[ShapeThresholds] = field(default=None, repr=False)

    def __str__(self):
        return self.shape.value


def _truncated_integral(A, C, alpha):
    # integrand decays like exp(2 * abscissa * s); stop where it is below 1e-17
    decay = -matfun.spectral_abscissa(A)
    t_end = 40.0 / decay
    return alpha * matfun.gramian_quadrature(A, C, t_end)


def compute_thresholds(p, check_quadrature=True):
    """``b_norm`` and ``b_inv`` by Lyapunov solves.

    With ``check_quadrature`` both are compared against a truncated
    quadrature of their integral representations; a mismatch beyond 1e-8
    raises NumericalFailure.
    """
    psi_prime = riccati.solve_are_stabilizing(p)
    m_star = p.M - 2.0 * p.QtQ @ psi_prime
    C = p.drift_constant
    b_inv = matfun.solve_lyapunov(p.M, C)
    b_norm = matfun.solve_lyapunov(m_star, C)
    residuals = (matfun.lyapunov_residual(m_star, b_norm, C), matfun.lyapunov_residual(p.M, b_inv, C))
    if check_quadrature:
        for name, A, sol in (("b_norm", m_star, b_norm), ("b_inv", p.M, b_inv)):
            ref = _truncated_integral(A, p.QtQ, p.alpha)
            gap = matfun.max_abs(ref - sol)
            if gap > QUADRATURE_CHECK_TOL * (1.0 + matfun.max_abs(sol)):
                raise NumericalFailure(f"{name}: Lyapunov solve and quadrature differ by {gap:.3g}")
    return ShapeThresholds(psi_prime=psi_prime, m_star=m_star, b_norm=b_norm, b_inv=b_inv, lyapunov_residuals=residuals)


def classify(p, thresholds=None):
    """Shape implied by the Loewner position of ``X`` relative to the thresholds."""
    if not matfun.is_positive_definite(p.B):
        raise HypothesisViolation("threshold classification requires B positive definite")
    th = thresholds if thresholds is not None else compute_thresholds(p)
    vs_norm = matfun.loewner_compare(p.X, th.b_norm)
    vs_inv = matfun.loewner_compare(p.X, th.b_inv)
    if vs_norm is LoewnerOrder.STRICTLY_LESS:
        shape = Shape.NORMAL
    elif vs_inv is LoewnerOrder.STRICTLY_GREATER:
        shape = Shape.INVERSE
    elif vs_norm is LoewnerOrder.STRICTLY_GREATER and vs_inv is LoewnerOrder.STRICTLY_LESS:
        shape = Shape.HUMPED
    else:
        shape = Shape.INDETERMINATE
    return ShapeClass(shape=shape, vs_b_norm=vs_norm, vs_b_inv=vs_inv, thresholds=th)


def k_tilde_from_psi(p, psi):
    """``alpha Q^T Q + (M - 2 Q^T Q psi) X + X (M^T - 2 psi Q^T Q)`` for a (stack of) psi."""
    V = p.M - 2.0 * p.QtQ @ psi
    K = p.drift_constant + V @ p.X + p.X @ np.swapaxes(V, -1, -2)
    return 0.5 * (K + np.swapaxes(K, -1, -2))


def h_second_from_psi(p, psi):
    """``Tr[R(psi) k~(psi)]``, the second derivative of ``tau * Y(tau)``."""
    return np.einsum("...ij,...ji->...", riccati.eval_R(psi, p), k_tilde_from_psi(p, psi))


def k_tilde(p, tau, sol):
    psi, _ = sol.at(tau)
    return k_tilde_from_psi(p, psi)


def h_second(p, tau, sol):
    psi, _ = sol.at(tau)
    return float(h_second_from_psi(p, psi))


def find_tau_star(p, sol, scan_step=SCAN_STEP, tol=1e-10):
    """Zero of ``h_second`` on ``[0, sol.tau_max]``, or None if it keeps one sign.

    A scan at ``scan_step`` brackets the sign change, bisection refines it.
    Once ``psi`` has converged ``h_second`` is pure roundoff, so values below
    ``NOISE_FLOOR`` times the largest scanned magnitude count as zero. More
    than one sign change contradicts the monotonicity of ``k~`` and raises
    NumericalFailure.
    """
    n = max(2, int(np.ceil(sol.tau_max / scan_step - 1e-9)) + 1)
    scan = np.linspace(0.0, sol.tau_max, n)
    values = np.array([h_second(p, t, sol) for t in scan])
    floor = NOISE_FLOOR * np.max(np.abs(values))
    signs = np.where(np.abs(values) <= floor, 0.0, np.sign(values))
    nonzero = np.flatnonzero(signs != 0)
    changes = np.flatnonzero(np.diff(signs[nonzero]) != 0)
    if len(changes) > 1:
        raise NumericalFailure(f"h_second changes sign {len(changes)} times; expected at most one zero")
    if len(changes) == 0:
        return None
    lo, hi = scan[nonzero[changes[0]]], scan[nonzero[changes[0] + 1]]
    f_lo = h_second(p, lo, sol)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = h_second(p, mid, sol)
        if abs(f_mid) <= tol or hi - lo <= 1e-14 * max(1.0, mid):
            return float(mid)
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def classify_empirical(curve, tol=EMPIRICAL_TOL):
    """Shape read off the finite differences of a sampled yield curve.

    Differences within ``+-tol`` count as zero. All positive: NORMAL; all
    negative: INVERSE; nonzero differences changing sign exactly once from
    + to -: HUMPED; anything else (including flat stretches in an otherwise
    monotone curve) is INDETERMINATE.
    """
    yields = np.asarray(curve.yields, dtype=float)
    if yields.size < 20:
        raise InvalidInput(f"empirical classification needs at least 20 points, got {yields.size}")
    diffs = np.diff(yields)
    signs = np.where(diffs > tol, 1, np.where(diffs < -tol, -1, 0))
    if np.all(signs == 1):
        return ShapeClass(Shape.NORMAL)
    if np.all(signs == -1):
        return ShapeClass(Shape.INVERSE)
    nz = signs[signs != 0]
    if nz.size and nz[0] == 1 and nz[-1] == -1 and np.count_nonzero(np.diff(nz)) == 1:
        return ShapeClass(Shape.HUMPED)
    return ShapeClass(Shape.INDETERMINATE)
