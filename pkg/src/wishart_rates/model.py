"""Model parameters of the Wishart short-rate model.

The short rate is ``r_t = a + Tr[B X_t]`` where ``X`` follows

    dX_t = (alpha Q^T Q + M X_t + X_t M^T) dt + sqrt(X_t) dW_t Q + Q^T dW_t^T sqrt(X_t).
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import matfun
from .errors import InvalidInput, ValidationError


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Full specification of a Wishart short-rate model.

    Parameters
    ----------
    a : float
        Constant short-rate level (per year), nonnegative.
    alpha : float
        Degree (Gindikin) parameter. ``alpha >= d + 1`` unless
        ``relaxed_gindikin`` is set, in which case ``alpha > d - 1``.
    B : array_like, (d, d)
        Symmetric positive definite rate loading.
    M : array_like, (d, d)
        Mean-reversion matrix; must be Hurwitz.
    Q : array_like, (d, d)
        Invertible diffusion matrix.
    X : array_like, (d, d)
        Current state, symmetric positive definite.
    relaxed_gindikin : bool
        Accept ``d - 1 < alpha < d + 1``.
    strict : bool
        When False only shapes, finiteness and symmetry are checked. Meant
        for degenerate limits (``B = 0``, ``Q = 0``) used in tests and
        sanity checks.
    """

    a: float
    alpha: float
    B: np.ndarray
    M: np.ndarray
    Q: np.ndarray
    X: np.ndarray
    relaxed_gindikin: bool = False
    strict: bool = field(default=True, repr=False)

    def __post_init__(self):
        for name in ("a", "alpha"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValidationError(f"{name} is not finite", "nonfinite")
            object.__setattr__(self, name, value)
        for name in ("B", "M", "Q", "X"):
            try:
                mat = matfun.as_square(getattr(self, name), name)
            except InvalidInput as exc:
                raise ValidationError(str(exc), "shape") from None
            if mat.ndim != 2:
                raise ValidationError(f"{name} must be a single matrix", "shape")
            if name in ("B", "X"):
                try:
                    mat = matfun.symmetrize(mat, name)
                except InvalidInput as exc:
                    raise ValidationError(str(exc), "asymmetric") from None
            mat = np.array(mat, dtype=float)
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        shapes = {m.shape for m in (self.B, self.M, self.Q, self.X)}
        if len(shapes) != 1:
            raise ValidationError(f"matrix dimensions disagree: {sorted(shapes)}", "dimension")
        if self.strict:
            self._check_invariants()

    def _check_invariants(self):
        d = self.d
        if self.a < 0:
            raise ValidationError(f"a must be nonnegative, got {self.a}", "a_negative")
        if self.relaxed_gindikin:
            if not self.alpha > d - 1:
                raise ValidationError(f"alpha={self.alpha} violates alpha > d-1 = {d - 1}", "gindikin")
        elif self.alpha < d + 1:
            raise ValidationError(
                f"alpha={self.alpha} violates alpha >= d+1 = {d + 1} (use relaxed_gindikin for alpha > d-1)",
                "gindikin",
            )
        lam_B = np.linalg.eigvalsh(self.B)
        if lam_B[0] <= 0:
            raise ValidationError(f"B not positive definite: eigenvalue {lam_B[0]:.6g}", "rate_loading_pd")
        sv = np.linalg.svd(self.Q, compute_uv=False)
        if sv[-1] <= 1e-12 * max(1.0, sv[0]):
            raise ValidationError(f"Q not invertible: smallest singular value {sv[-1]:.3g}", "diffusion_singular")
        eig_M = np.linalg.eigvals(self.M)
        worst = eig_M[np.argmax(eig_M.real)]
        if worst.real >= -matfun.HURWITZ_TOL:
            raise ValidationError(
                f"M not Hurwitz: eigenvalue {worst.real:.6g}{worst.imag:+.6g}i", "mean_reversion_hurwitz"
            )
        lam_X = np.linalg.eigvalsh(self.X)
        if lam_X[0] <= 0:
            raise ValidationError(f"X not positive definite: eigenvalue {lam_X[0]:.6g}", "state_pd")

    @property
    def d(self):
        return self.B.shape[0]

    @property
    def QtQ(self):
        return self.Q.T @ self.Q

    @property
    def drift_constant(self):
        """``b = alpha Q^T Q``."""
        return self.alpha * self.QtQ

    @property
    def short_rate(self):
        return self.a + float(np.trace(self.B @ self.X))

    @property
    def params_hash(self):
        h = hashlib.sha256()
        h.update(np.array([self.a, self.alpha, float(self.d)]).tobytes())
        for mat in (self.B, self.M, self.Q, self.X):
            h.update(np.ascontiguousarray(mat).tobytes())
        return h.hexdigest()[:16]

    def __hash__(self):
        return hash(self.params_hash)

    def __eq__(self, other):
        if not isinstance(other, ModelParams):
            return NotImplemented
        return self.params_hash == other.params_hash

    def replace(self, **changes):
        """Copy with some fields replaced (and revalidated)."""
        kwargs = dict(
            a=self.a,
            alpha=self.alpha,
            B=self.B,
            M=self.M,
            Q=self.Q,
            X=self.X,
            relaxed_gindikin=self.relaxed_gindikin,
            strict=self.strict,
        )
        kwargs.update(changes)
        return ModelParams(**kwargs)

    def to_dict(self):
        return {
            "d": self.d,
            "a": self.a,
            "alpha": self.alpha,
            "B": self.B.tolist(),
            "M": self.M.tolist(),
            "Q": self.Q.tolist(),
            "X": self.X.tolist(),
        }
