"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: validation-type errors exit with 2,
numerical errors with 3 and I/O errors with 4.
"""


class WishartRatesError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(WishartRatesError, ValueError):
    """Malformed argument: wrong shape, non-finite entries, bad range."""


class ValidationError(InvalidInput):
    """A model-parameter invariant does not hold.

    ``assumption`` is a short stable identifier of the violated invariant
    (e.g. ``"mean_reversion_hurwitz"``) so callers can branch on it.
    """

    def __init__(self, message, assumption):
        super().__init__(message)
        self.assumption = assumption


class ConfigParseError(WishartRatesError):
    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class HypothesisViolation(WishartRatesError):
    """Inputs fall outside the hypotheses of threshold-based shape classification."""


class NumericalFailure(WishartRatesError, ArithmeticError):
    """An algorithm failed to converge or produced non-finite values."""


class NoUniqueSolution(NumericalFailure):
    """Linear matrix equation whose operator is singular."""


class SingularPsiPrime(NumericalFailure):
    """The stabilizing Riccati root is not invertible."""


class StabilityViolation(WishartRatesError):
    """A matrix required to be Hurwitz has a spectrum outside the open left half-plane."""


class OutputError(WishartRatesError, OSError):
    """Writing an output file failed."""
