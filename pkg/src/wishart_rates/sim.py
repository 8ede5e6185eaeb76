"""Monte Carlo simulation of the Wishart state, used as a pricing oracle.

Random numbers come from Philox streams keyed by ``(seed, block)``: paths
are processed in fixed-size blocks and every block owns its substream, so
estimates do not depend on how blocks are scheduled. Within a block the
first half of the paths uses increments ``dW`` and the second half ``-dW``
(antithetic pairs).
"""

import enum
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import matfun
from ._kernels import euler_wishart_step
from .errors import InvalidInput

logger = logging.getLogger(__name__)

BLOCK_PAIRS = 4096


class Scheme(enum.Enum):
    EULER_PROJECTED = "euler"
    EXACT_INTEGER = "exact"


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 100_000
    n_steps_per_year: int = 500
    horizon: float = 1.0
    seed: int = 0
    scheme: Scheme = Scheme.EULER_PROJECTED
    # Sample the Brownian path at this finer resolution and sum increments onto
    # the time steps; runs sharing it use common random numbers across step sizes.
    brownian_steps_per_year: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.n_paths < 1 or self.n_steps_per_year < 1:
            raise InvalidInput("n_paths and n_steps_per_year must be positive")
        fine = self.brownian_steps_per_year
        if fine is not None and (fine < self.n_steps_per_year or fine % self.n_steps_per_year):
            raise InvalidInput("brownian_steps_per_year must be a multiple of n_steps_per_year")
        if not self.horizon > 0:
            raise InvalidInput("horizon must be positive")
        if not 0 <= self.seed < 2**64:
            raise InvalidInput("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class PricingEstimate:
    mean: float
    std_error: float
    n_paths: int


@dataclass(frozen=True)
class SimulationResult:
    times: np.ndarray
    paths: np.ndarray  # (n_steps + 1, n_paths, d, d)
    rate_integral: np.ndarray  # trapezoidal int_0^T Tr[B X_s] ds per path
    min_eig_before_projection: np.ndarray  # (n_steps, n_paths); zeros for the exact scheme

    @property
    def projection_fraction(self):
        """Fraction of path-steps whose pre-projection state had an eigenvalue below -1e-12."""
        return float(np.mean(self.min_eig_before_projection < -1e-12))


def _rng(seed, stream):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def _time_grid(tau, steps_per_year):
    n = max(1, int(np.ceil(tau * steps_per_year - 1e-9)))
    return np.linspace(0.0, tau, n + 1)


def _check_scheme(p, cfg):
    if cfg.scheme is Scheme.EXACT_INTEGER:
        if p.alpha != round(p.alpha) or p.alpha < p.d:
            raise InvalidInput(f"exact scheme needs integer alpha >= d, got alpha={p.alpha}")


def _brownian_increments(rng, shape, dt, refine):
    if refine == 1:
        return rng.standard_normal(shape) * np.sqrt(dt)
    return np.sum(rng.standard_normal((refine,) + shape), axis=0) * np.sqrt(dt / refine)


def _simulate_block(p, times, n_pairs, rng, keep_paths, refine=1):
    """Simulate ``2 * n_pairs`` antithetic paths on ``times``."""
    d = p.d
    n = 2 * n_pairs
    dts = np.diff(times)
    X = np.broadcast_to(p.X, (n, d, d)).copy()
    S = np.broadcast_to(matfun.psd_sqrt(p.X), (n, d, d)).copy()
    X_new, S_new = np.empty_like(X), np.empty_like(S)
    rate = np.zeros(n)
    min_eig = np.empty((len(dts), n))
    paths = np.empty((len(times), n, d, d)) if keep_paths else None
    if keep_paths:
        paths[0] = X
    drift, M, Q, B = p.drift_constant, p.M, p.Q, p.B
    for k, dt in enumerate(dts):
        dW = _brownian_increments(rng, (n_pairs, d, d), dt, refine)
        for half, sign in ((slice(0, n_pairs), 1.0), (slice(n_pairs, n), -1.0)):
            euler_wishart_step(
                X[half], S[half], dW, sign, drift, M, Q, B, dt, X_new[half], S_new[half], min_eig[k, half], rate[half]
            )
        X, X_new = X_new, X
        S, S_new = S_new, S
        if keep_paths:
            paths[k + 1] = X
    return paths, rate, min_eig


def _exact_block(p, times, n_pairs, rng, keep_paths):
    """Sum of ``alpha`` outer products of exactly sampled OU vectors.

    ``v_j`` follows ``dv = M v dt + Q^T dw_j``; with ``X_0 = sum_j v_j v_j^T``
    the state ``sum_j v_j v_j^T`` solves the Wishart SDE in law.
    """
    d = p.d
    m = int(round(p.alpha))
    n = 2 * n_pairs
    V = np.zeros((n, m, d))
    V[:, :d, :] = matfun.psd_sqrt(p.X)  # rows of the symmetric root
    paths = np.empty((len(times), n, d, d)) if keep_paths else None
    X = np.einsum("nji,njk->nik", V, V)
    if keep_paths:
        paths[0] = X
    rate = np.zeros(n)
    tr_old = np.einsum("ij,nji->n", p.B, X)
    cache = {}
    for k, dt in enumerate(np.diff(times)):
        key = round(dt, 15)
        if key not in cache:
            E = matfun.mat_exp(p.M * dt)
            cov = matfun.solve_lyapunov(p.M, p.QtQ - E @ p.QtQ @ E.T)
            w, U = np.linalg.eigh(cov)
            cache[key] = (E, U * np.sqrt(np.clip(w, 0.0, None)))
        E, L = cache[key]
        z = rng.standard_normal((n_pairs, m, d)) @ L.T
        V = V @ E.T + np.concatenate([z, -z])
        X = np.einsum("nji,njk->nik", V, V)
        tr_new = np.einsum("ij,nji->n", p.B, X)
        rate += 0.5 * dt * (tr_old + tr_new)
        tr_old = tr_new
        if keep_paths:
            paths[k + 1] = X
    return paths, rate, np.zeros((len(times) - 1, n))


def _run_block(p, cfg, times, n_pairs, stream, keep_paths):
    rng = _rng(cfg.seed, stream)
    if cfg.scheme is Scheme.EXACT_INTEGER:
        return _exact_block(p, times, n_pairs, rng, keep_paths)
    refine = 1 if cfg.brownian_steps_per_year is None else cfg.brownian_steps_per_year // cfg.n_steps_per_year
    return _simulate_block(p, times, n_pairs, rng, keep_paths, refine)


def simulate_paths(p, cfg, n_pairs=1, seed_offset=0, tau=None):
    """Simulate ``2 * n_pairs`` antithetic paths up to ``tau`` (default: the horizon)."""
    _check_scheme(p, cfg)
    tau = cfg.horizon if tau is None else float(tau)
    times = _time_grid(tau, cfg.n_steps_per_year)
    paths, rate, min_eig = _run_block(p, cfg, times, n_pairs, seed_offset, keep_paths=True)
    result = SimulationResult(times=times, paths=paths, rate_integral=rate, min_eig_before_projection=min_eig)
    logger.debug("projection active in %.4f%% of path-steps", 100 * result.projection_fraction)
    return result


def simulate_path(p, cfg, seed_offset=0):
    """One path of the state on ``[0, horizon]``, shape ``(n_steps + 1, d, d)``, starting at ``X``.

    Deterministic in ``(cfg.seed, seed_offset)``.
    """
    return simulate_paths(p, cfg, n_pairs=1, seed_offset=seed_offset).paths[:, 0]


def mc_bond_price(p, tau, cfg):
    """Monte Carlo estimate of ``E[exp(-a tau - int_0^tau Tr[B X_s] ds)]``.

    The standard error is computed from antithetic pair averages, so
    ``n_paths`` is rounded up to an even number.
    """
    tau = float(tau)
    if not 0 < tau <= cfg.horizon * (1 + 1e-12):
        raise InvalidInput(f"tau={tau} must lie in (0, horizon={cfg.horizon}]")
    _check_scheme(p, cfg)
    n_pairs_total = (cfg.n_paths + 1) // 2
    if not np.any(p.B):
        return PricingEstimate(mean=float(np.exp(-p.a * tau)), std_error=0.0, n_paths=2 * n_pairs_total)
    times = _time_grid(tau, cfg.n_steps_per_year)
    pair_values = []
    projected = 0
    for block, start in enumerate(range(0, n_pairs_total, BLOCK_PAIRS)):
        n_pairs = min(BLOCK_PAIRS, n_pairs_total - start)
        _, rate, min_eig = _run_block(p, cfg, times, n_pairs, block, keep_paths=False)
        disc = np.exp(-p.a * tau - rate)
        pair_values.append(0.5 * (disc[:n_pairs] + disc[n_pairs:]))
        projected += int(np.count_nonzero(min_eig < -1e-12))
    y = np.concatenate(pair_values)
    logger.debug("projection active in %d path-steps", projected)
    mean = float(np.sum(y) / y.size)
    se = float(np.std(y, ddof=1) / np.sqrt(y.size)) if y.size > 1 else float("nan")
    return PricingEstimate(mean=mean, std_error=se, n_paths=2 * n_pairs_total)
