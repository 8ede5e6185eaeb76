"""Bond-pricing Riccati system of the Wishart short-rate model.

The bond price is ``exp(-phi(tau) - Tr[psi(tau) X])`` with

    psi' = R(psi) = psi M + M^T psi - 2 psi Q^T Q psi + B,   psi(0) = 0
    phi' = F(psi) = Tr[alpha Q^T Q psi] + a,                phi(0) = 0.

Two independent routes are provided: fixed-step RK4 integration and the
closed form built on the stabilizing root ``psi'`` of ``R(psi) = 0``.
"""

import functools
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matfun
from ._kernels import rk4_riccati
from .errors import InvalidInput, NumericalFailure, SingularPsiPrime, StabilityViolation, WishartRatesError

DEFAULT_STEP = 1e-3
DEFAULT_TAU_MAX = 30.0
DEFAULT_QUAD_STEP = 5e-4
MAX_QUAD_NODES = 60_000
ARE_TOL = 1e-10


class StabilityWarning(UserWarning):
    """M - 2 Q^T Q psi(tau) left the open left half-plane somewhere on the grid."""


def _check_psi(psi, p):
    psi = np.asarray(psi, dtype=float)
    if psi.shape[-2:] != (p.d, p.d):
        raise InvalidInput(f"psi has shape {psi.shape}, expected (..., {p.d}, {p.d})")
    return psi


def eval_R(psi, p):
    """``psi M + M^T psi - 2 psi Q^T Q psi + B`` (symmetrized; broadcasts over stacks)."""
    psi = _check_psi(psi, p)
    S = psi @ p.M
    R = S + np.swapaxes(S, -1, -2) - 2.0 * psi @ p.QtQ @ psi + p.B
    return 0.5 * (R + np.swapaxes(R, -1, -2))


def eval_F(psi, p):
    """``Tr[alpha Q^T Q psi] + a`` (broadcasts over stacks)."""
    psi = _check_psi(psi, p)
    return np.einsum("ij,...ji->...", p.drift_constant, psi) + p.a


@functools.lru_cache(maxsize=256)
def _are_cached(p):
    M, G, B = p.M, 2.0 * p.QtQ, p.B
    psi = np.zeros_like(B)
    # Newton-Kleinman; psi = 0 is a stabilizing start because M is Hurwitz
    for _ in range(100):
        A = M - G @ psi
        try:
            nxt = matfun.solve_lyapunov(A.T, B + psi @ G @ psi)
        except StabilityViolation as exc:
            raise StabilityViolation(f"Newton iterate lost stability: {exc}") from None
        step = matfun.max_abs(nxt - psi)
        psi = nxt
        if step <= 1e-15 * (1.0 + matfun.max_abs(psi)):
            break
    else:
        if matfun.max_abs(eval_R(psi, p)) > ARE_TOL:
            raise NumericalFailure("Newton-Kleinman iteration did not converge in 100 steps")
    residual = matfun.max_abs(eval_R(psi, p))
    if residual > ARE_TOL:
        raise NumericalFailure(f"ARE residual {residual:.3g} exceeds {ARE_TOL:g}")
    abscissa = matfun.spectral_abscissa(M - G @ psi)
    if abscissa >= -matfun.HURWITZ_TOL:
        raise StabilityViolation(f"ARE root is not stabilizing: max Re eigenvalue {abscissa:.6g}")
    psi.setflags(write=False)
    return psi


def solve_are_stabilizing(p):
    """Stabilizing solution ``psi'`` of ``R(psi) = 0``.

    ``M - 2 Q^T Q psi'`` is Hurwitz and ``psi'`` is the long-maturity limit
    of ``psi(tau)``. Results are cached per parameter set.
    """
    return _are_cached(p).copy()


@dataclass(frozen=True)
class RiccatiSolution:
    """Samples of ``(psi(tau), phi(tau))`` on a grid starting at 0.

    ``at`` returns exact samples at grid nodes and cubic Hermite
    interpolants (using the exact derivatives ``R(psi)``, ``F(psi)``)
    between nodes, so the interpolation error is O(h^4) in the spacing.
    """

    grid: np.ndarray
    psi: np.ndarray
    phi: np.ndarray
    dpsi: np.ndarray
    dphi: np.ndarray
    psi_prime: Optional[np.ndarray]
    params_hash: str
    method: str
    fallback: bool = False
    max_abscissa: float = float("nan")

    @property
    def tau_max(self):
        return float(self.grid[-1])

    @property
    def stable(self):
        return bool(self.max_abscissa < 0)

    def index_of(self, tau):
        """Grid index of ``tau`` if it is a node (relative tolerance 1e-12), else None."""
        k = int(np.searchsorted(self.grid, tau))
        for j in (k - 1, k):
            if 0 <= j < len(self.grid) and abs(self.grid[j] - tau) <= 1e-12 * max(1.0, abs(tau)):
                return j
        return None

    def at(self, tau):
        """``(psi(tau), phi(tau))`` for ``0 <= tau <= tau_max``."""
        tau = float(tau)
        if not (0.0 <= tau <= self.tau_max * (1 + 1e-12)):
            raise InvalidInput(f"tau={tau} outside solution grid [0, {self.tau_max}]")
        j = self.index_of(tau)
        if j is not None:
            return self.psi[j].copy(), float(self.phi[j])
        k = int(np.searchsorted(self.grid, tau)) - 1
        t0, t1 = self.grid[k], self.grid[k + 1]
        h = t1 - t0
        u = (tau - t0) / h
        h00 = 2 * u**3 - 3 * u**2 + 1
        h10 = u**3 - 2 * u**2 + u
        h01 = -2 * u**3 + 3 * u**2
        h11 = u**3 - u**2
        psi = h00 * self.psi[k] + h10 * h * self.dpsi[k] + h01 * self.psi[k + 1] + h11 * h * self.dpsi[k + 1]
        phi = h00 * self.phi[k] + h10 * h * self.dphi[k] + h01 * self.phi[k + 1] + h11 * h * self.dphi[k + 1]
        return 0.5 * (psi + psi.T), float(phi)


def _psi_prime_or_none(p):
    try:
        return solve_are_stabilizing(p)
    except WishartRatesError as exc:
        warnings.warn(f"stabilizing ARE root unavailable: {exc}", StabilityWarning, stacklevel=3)
        return None


def _monitor_abscissa(p, psi):
    # at most ~20k spectra; the abscissa varies smoothly along the path
    idx = np.unique(np.linspace(0, len(psi) - 1, min(len(psi), 20_000)).astype(int))
    V = p.M - 2.0 * p.QtQ @ psi[idx]
    return float(np.max(np.linalg.eigvals(V).real))


def _build_solution(p, grid, psi, phi, method, fallback=False, psi_prime=None):
    abscissa = _monitor_abscissa(p, psi)
    if not abscissa < -matfun.HURWITZ_TOL:
        warnings.warn(
            f"M - 2 Q^T Q psi(tau) not Hurwitz along the solution (max Re eigenvalue {abscissa:.3g})",
            StabilityWarning,
            stacklevel=3,
        )
    for arr in (grid, psi, phi):
        arr.setflags(write=False)
    return RiccatiSolution(
        grid=grid,
        psi=psi,
        phi=phi,
        dpsi=eval_R(psi, p),
        dphi=eval_F(psi, p),
        psi_prime=psi_prime if psi_prime is not None else _psi_prime_or_none(p),
        params_hash=p.params_hash,
        method=method,
        fallback=fallback,
        max_abscissa=abscissa,
    )


def _rk4_on_grid(p, grid):
    psi, phi, bad = rk4_riccati(grid, p.M, p.QtQ, p.B, p.drift_constant, p.a)
    if bad >= 0:
        raise NumericalFailure(f"non-finite Riccati state at tau={grid[bad]:.6g}")
    return psi, phi


def integrate_riccati(p, tau_max=DEFAULT_TAU_MAX, step=DEFAULT_STEP):
    """Fixed-step RK4 solution on ``[0, tau_max]``.

    The grid spacing is ``tau_max / n`` with ``n = ceil(tau_max / step)``,
    which equals ``step`` whenever ``step`` divides ``tau_max``.
    """
    if not tau_max > 0:
        raise InvalidInput("tau_max must be positive")
    if not 0 < step <= tau_max:
        raise InvalidInput("step must satisfy 0 < step <= tau_max")
    n = int(np.ceil(tau_max / step - 1e-9))
    grid = np.linspace(0.0, tau_max, n + 1)
    psi, phi = _rk4_on_grid(p, grid)
    return _build_solution(p, grid, psi, phi, "rk4")


def _refine(nodes, h):
    """Refined grid containing ``nodes`` with an even number of sub-intervals per gap."""
    pieces = [np.array([nodes[0]])]
    node_idx = [0]
    count = 1
    for lo, hi in zip(nodes[:-1], nodes[1:]):
        m = 2 * max(1, int(np.ceil((hi - lo) / (2.0 * h) - 1e-9)))
        pieces.append(np.linspace(lo, hi, m + 1)[1:])
        count += m
        node_idx.append(count - 1)
    return np.concatenate(pieces), np.array(node_idx)


def _sorted_nodes(taus):
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if taus.size == 0 or not np.all(np.isfinite(taus)) or np.any(taus < 0):
        raise InvalidInput("maturities must be finite and nonnegative")
    return np.unique(np.concatenate([[0.0], taus]))


def _cumulative_simpson(grid, f):
    """Cumulative integral of samples ``f`` over ``grid``.

    ``grid`` must have an even number of sub-intervals with each pair
    equally spaced (as produced by ``_refine``). Simpson's rule over each
    pair; midpoints use the third-order half-panel rule
    ``h/12 (5 f0 + 8 f1 - f2)``.
    """
    h = (grid[1::2] - grid[:-1:2]).reshape((-1,) + (1,) * (f.ndim - 1))
    f0, f1, f2 = f[:-1:2], f[1::2], f[2::2]
    out = np.zeros_like(f)
    out[2::2] = np.cumsum(h / 3.0 * (f0 + 4.0 * f1 + f2), axis=0)
    out[1::2] = out[:-1:2] + h / 12.0 * (5.0 * f0 + 8.0 * f1 - f2)
    return out


def _cumulative_gramian(A, C, grid, nodes):
    xi, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * np.diff(grid)
    mid = 0.5 * (grid[1:] + grid[:-1])
    s = mid[:, None] + half[:, None] * xi[None, :]
    E = matfun.mat_exp(s[..., None, None] * A)
    vals = E @ C @ np.swapaxes(E, -1, -2)
    panel = np.einsum("pk,pkij->pij", half[:, None] * w[None, :], vals)
    G = np.zeros((len(grid),) + C.shape)
    G[1:] = np.cumsum(panel, axis=0)
    return G


def closed_form_path(p, taus, quad_step=DEFAULT_QUAD_STEP, psi_prime=None):
    """Closed-form ``psi`` and Simpson-integrated ``phi`` on a grid containing ``taus``.

    ``psi(s) = psi' + e^{A^T s} [(-psi')^{-1} + 2 G(s)]^{-1} e^{A s}`` with
    ``A = M - 2 Q^T Q psi'`` and ``G(s) = int_0^s e^{Au} Q^T Q e^{A^T u} du``.
    ``G`` is accumulated by Gauss-Legendre panels between consecutive grid
    points; the node count is raised until ``G`` at the last point agrees
    with an independent adaptive quadrature to 1e-12.

    Raises SingularPsiPrime if ``psi'`` is not invertible.
    """
    nodes = _sorted_nodes(taus)
    if psi_prime is None:
        psi_prime = solve_are_stabilizing(p)
    lam = np.linalg.eigvalsh(psi_prime)
    if lam[-1] <= 0 or lam[0] <= 1e-10 * lam[-1]:
        raise SingularPsiPrime(f"psi' is singular (eigenvalues {lam})")

    h = max(quad_step, nodes[-1] / MAX_QUAD_NODES)
    grid, _ = _refine(nodes, h)
    A = p.M - 2.0 * p.QtQ @ psi_prime
    C = p.QtQ

    reference = matfun.gramian_quadrature(A, C, grid[-1])
    for gl_nodes in (4, 8, 16):
        G = _cumulative_gramian(A, C, grid, gl_nodes)
        if matfun.max_abs(G[-1] - reference) <= 1e-12 * (1.0 + matfun.max_abs(reference)):
            break
    else:
        raise NumericalFailure("closed-form Gramian quadrature did not stabilize")

    E = matfun.mat_exp(grid[:, None, None] * A)
    K = -np.linalg.inv(psi_prime) + 2.0 * G
    if np.max(np.linalg.cond(K)) > 1e14:
        raise NumericalFailure("closed-form bracket matrix is singular")
    psi = psi_prime + np.swapaxes(E, -1, -2) @ np.linalg.solve(K, E)
    psi = 0.5 * (psi + np.swapaxes(psi, -1, -2))
    psi[0] = 0.0

    int_psi = _cumulative_simpson(grid, psi)
    phi = np.einsum("ij,kji->k", p.drift_constant, int_psi) + p.a * grid
    return _build_solution(p, grid, psi, phi, "closed_form", psi_prime=psi_prime)


def closed_form_psi(p, tau, quad_step=DEFAULT_QUAD_STEP):
    """``(psi(tau), phi(tau))`` from the closed-form solution."""
    if tau < 0:
        raise InvalidInput("tau must be nonnegative")
    sol = closed_form_path(p, [tau], quad_step=quad_step)
    return sol.psi[-1].copy(), float(sol.phi[-1])


def solve_on_nodes(p, taus, step=DEFAULT_STEP, quad_step=DEFAULT_QUAD_STEP):
    """Riccati solution whose grid contains every maturity in ``taus``.

    Uses the closed form; when ``psi'`` is singular falls back to RK4 on a
    grid through the same nodes and marks the solution ``fallback=True``.
    """
    try:
        return closed_form_path(p, taus, quad_step=quad_step)
    except SingularPsiPrime:
        nodes = _sorted_nodes(taus)
        grid, _ = _refine(nodes, step)
        psi, phi = _rk4_on_grid(p, grid)
        return _build_solution(p, grid, psi, phi, "rk4", fallback=True)
