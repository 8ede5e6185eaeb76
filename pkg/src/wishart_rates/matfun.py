"""Dense matrix utilities for small symmetric problems.

Matrix exponential (scaling and squaring with a degree-13 Padé approximant),
matrix tanh/coth, Lyapunov solves by Kronecker vectorization, Gramian
quadrature and Loewner-order comparisons. Everything works on plain
``numpy`` arrays; ``mat_exp`` also accepts stacks of matrices ``(..., d, d)``.
"""

import enum

import numpy as np

from .errors import InvalidInput, NoUniqueSolution, NumericalFailure, StabilityViolation

# Higham (2005), Table 2.3: numerator coefficients of the [13/13] Padé approximant
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152

HURWITZ_TOL = 1e-12
SYMMETRY_TOL = 1e-12


class LoewnerOrder(enum.Enum):
    STRICTLY_LESS = "StrictlyLess"
    STRICTLY_GREATER = "StrictlyGreater"
    EQUAL = "Equal"
    INDEFINITE = "Indefinite"

    def __str__(self):
        return self.value


def as_square(A, name="matrix"):
    """Return ``A`` as a finite float array whose last two axes are square."""
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-1] < 1:
        raise InvalidInput(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput(f"{name} has non-finite entries")
    return A


def symmetrize(A, name="matrix"):
    """Check near-symmetry of ``A`` and return ``(A + A^T) / 2``.

    Raises InvalidInput when ``max|A - A^T| > 1e-12 * (1 + max|A|)``.
    """
    A = as_square(A, name)
    At = np.swapaxes(A, -1, -2)
    asym = np.max(np.abs(A - At)) if A.size else 0.0
    if asym > SYMMETRY_TOL * (1.0 + np.max(np.abs(A))):
        raise InvalidInput(f"{name} is not symmetric (max asymmetry {asym:.3g})")
    return 0.5 * (A + At)


def max_abs(A):
    return float(np.max(np.abs(A)))


def mat_exp(A):
    """Matrix exponential of ``A`` (or of every matrix in a stack).

    Scaling and squaring with the [13/13] Padé approximant; each matrix in
    a stack gets its own scaling exponent.
    """
    A = as_square(A)
    d = A.shape[-1]
    batch_shape = A.shape[:-2]
    A = A.reshape((-1, d, d))

    norm1 = np.abs(A).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.ceil(np.log2(norm1 / _THETA13))
    s = np.where(np.isfinite(s) & (s > 0), s, 0).astype(int)
    As = A / (2.0 ** s)[:, None, None]

    b = _PADE13
    ident = np.broadcast_to(np.eye(d), As.shape)
    A2 = As @ As
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = As @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident
    R = np.linalg.solve(V - U, V + U)

    for k in range(int(s.max(initial=0))):
        mask = s > k
        R[mask] = R[mask] @ R[mask]
    return R.reshape(batch_shape + (d, d))


def _check_pd(O, name):
    O = symmetrize(O, name)
    if not is_positive_definite(O):
        raise InvalidInput(f"{name} must be positive definite")
    return O


def mat_tanh(O, tau):
    """tanh(O tau) for symmetric positive definite ``O`` and ``tau >= 0``.

    Evaluated as ``(I + e^{-2 O tau})^{-1} (I - e^{-2 O tau})`` so that large
    arguments never overflow.
    """
    O = _check_pd(O, "O")
    if tau < 0:
        raise InvalidInput("tau must be nonnegative")
    ident = np.eye(O.shape[0])
    E = mat_exp(-2.0 * tau * O)
    cosh_factor = ident + E
    if abs(np.linalg.det(cosh_factor)) < 1e-300:
        raise NumericalFailure("cosh factor is singular")
    T = np.linalg.solve(cosh_factor, ident - E)
    return 0.5 * (T + T.T)


def mat_coth(O, tau):
    """coth(O tau) for symmetric positive definite ``O`` and ``tau > 0``."""
    O = _check_pd(O, "O")
    if tau <= 0:
        raise InvalidInput("coth requires tau > 0")
    ident = np.eye(O.shape[0])
    E = mat_exp(-2.0 * tau * O)
    sinh_factor = ident - E
    if np.linalg.cond(sinh_factor) > 1e14:
        raise NumericalFailure("sinh factor is numerically singular")
    T = np.linalg.solve(sinh_factor, ident + E)
    return 0.5 * (T + T.T)


def spectral_abscissa(A):
    """Largest real part over the spectrum of ``A``."""
    return float(np.max(np.linalg.eigvals(as_square(A)).real))


def is_hurwitz(A, tol=HURWITZ_TOL):
    return spectral_abscissa(A) < -tol


def solve_lyapunov(A, C, require_stable=True):
    """Solve ``A X + X A^T = -C`` by Kronecker vectorization.

    With ``require_stable`` (the default) ``A`` must be Hurwitz; otherwise
    only unique solvability (no eigenvalue pair summing to zero) is required.
    For symmetric ``C`` the result is symmetrized.
    """
    A = as_square(A, "A")
    C = as_square(C, "C")
    if A.shape != C.shape or A.ndim != 2:
        raise InvalidInput(f"dimension mismatch: A {A.shape}, C {C.shape}")
    d = A.shape[0]

    eig = np.linalg.eigvals(A)
    if require_stable and np.max(eig.real) >= -HURWITZ_TOL:
        raise StabilityViolation(f"A is not Hurwitz: eigenvalue {_fmt_eig(eig[np.argmax(eig.real)])}")
    pair_sums = np.abs(eig[:, None] + eig[None, :])
    if np.min(pair_sums) <= 1e-12 * (1.0 + np.max(np.abs(eig))):
        raise NoUniqueSolution("A has eigenvalues with lambda_i + lambda_j = 0")

    ident = np.eye(d)
    # column-major vec: vec(A X) = (I kron A) vec X, vec(X A^T) = (A kron I) vec X
    K = np.kron(ident, A) + np.kron(A, ident)
    x = np.linalg.solve(K, -C.reshape(-1, order="F"))
    X = x.reshape((d, d), order="F")
    if np.allclose(C, C.T, rtol=0.0, atol=SYMMETRY_TOL * (1.0 + max_abs(C))):
        X = 0.5 * (X + X.T)
    return X


def lyapunov_residual(A, X, C):
    return max_abs(A @ X + X @ A.T + C)


def gramian_quadrature(A, C, t_end, nodes=10, rtol=1e-12, max_doublings=12):
    """Gauss-Legendre estimate of ``int_0^t_end e^{As} C e^{A^T s} ds``.

    The panel count is doubled until two successive estimates agree to
    ``rtol`` relative to the estimate's magnitude.
    """
    A = as_square(A, "A")
    C = as_square(C, "C")
    if t_end < 0:
        raise InvalidInput("t_end must be nonnegative")
    if t_end == 0:
        return np.zeros_like(C)
    xi, w = np.polynomial.legendre.leggauss(nodes)
    panels = max(1, int(np.ceil(t_end * max(1.0, np.linalg.norm(A, 2)) / 2.0)))

    def estimate(n):
        edges = np.linspace(0.0, t_end, n + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        s = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        E = mat_exp(s[:, None, None] * A)
        vals = E @ C @ np.swapaxes(E, -1, -2)
        return np.tensordot(weights, vals, axes=1)

    prev = estimate(panels)
    for _ in range(max_doublings):
        panels *= 2
        cur = estimate(panels)
        if max_abs(cur - prev) <= rtol * (1.0 + max_abs(cur)):
            return cur
        prev = cur
    raise NumericalFailure("Gramian quadrature did not stabilize")


def min_eigenvalue(A):
    return float(np.linalg.eigvalsh(symmetrize(A))[0])


def is_positive_definite(A, tol=0.0):
    """True iff the smallest eigenvalue of symmetric ``A`` exceeds ``tol``."""
    return min_eigenvalue(A) > tol


def default_loewner_tol(A, B):
    return 1e-10 * (1.0 + max(max_abs(A), max_abs(B)))


def loewner_compare(A, B, tol=None):
    """Compare symmetric ``A`` and ``B`` in the Loewner order.

    Returns STRICTLY_LESS when every eigenvalue of ``B - A`` exceeds ``tol``
    (i.e. ``A < B``), STRICTLY_GREATER when all are below ``-tol``, EQUAL
    when all lie within ``tol`` of zero, INDEFINITE otherwise.
    """
    A = symmetrize(A, "A")
    B = symmetrize(B, "B")
    if A.shape != B.shape:
        raise InvalidInput(f"dimension mismatch: {A.shape} vs {B.shape}")
    if tol is None:
        tol = default_loewner_tol(A, B)
    lam = np.linalg.eigvalsh(B - A)
    if np.all(lam > tol):
        return LoewnerOrder.STRICTLY_LESS
    if np.all(lam < -tol):
        return LoewnerOrder.STRICTLY_GREATER
    if np.all(np.abs(lam) <= tol):
        return LoewnerOrder.EQUAL
    return LoewnerOrder.INDEFINITE


def psd_sqrt(A):
    """Symmetric square root of a positive semidefinite matrix (stack)."""
    w, V = np.linalg.eigh(symmetrize(A))
    return (V * np.sqrt(np.clip(w, 0.0, None))[..., None, :]) @ np.swapaxes(V, -1, -2)


def _fmt_eig(lam):
    return f"{lam.real:.6g}{lam.imag:+.6g}i"
