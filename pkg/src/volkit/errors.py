"""Exception hierarchy and warning categories for the toolkit.

Every error carries a stable ``code`` string (machine readable, used in CLI
output) and an ``exit_code`` classifying it as a usage/input problem (2) or
a numerical failure (3).
"""

from __future__ import annotations


class VolkitError(Exception):
    """Base class for all toolkit errors."""

    code = "VOLKIT_ERROR"
    exit_code = 2


# --- input / usage errors (CLI exit code 2) ---------------------------------

class MalformedRowError(VolkitError):
    code = "MALFORMED_ROW"

    def __init__(self, line_number: int, detail: str):
        super().__init__(f"line {line_number}: {detail}")
        self.line_number = line_number


class NonPositivePriceError(VolkitError):
    code = "NON_POSITIVE_PRICE"

    def __init__(self, detail: str, line_number: int | None = None):
        if line_number is not None:
            detail = f"line {line_number}: {detail}"
        super().__init__(detail)
        self.line_number = line_number


class EmptyInputError(VolkitError):
    code = "EMPTY_INPUT"


class SeriesTooShortError(VolkitError):
    code = "SERIES_TOO_SHORT"


class DegenerateSampleError(VolkitError):
    code = "DEGENERATE_SAMPLE"


class LagOutOfRangeError(VolkitError):
    code = "LAG_OUT_OF_RANGE"


class InvalidShapeError(VolkitError):
    code = "INVALID_SHAPE"


class ProbabilityOutOfRangeError(VolkitError):
    code = "P_OUT_OF_RANGE"


class InfeasibleParamsError(VolkitError):
    code = "INFEASIBLE_PARAMS"


class InvalidCountsError(VolkitError):
    code = "INVALID_COUNTS"


class MissingArtifactError(VolkitError):
    code = "MISSING_ARTIFACT"


# --- numerical failures (CLI exit code 3) ------------------------------------

class SingularRegressionError(VolkitError):
    code = "SINGULAR_REGRESSION"
    exit_code = 3


class NoConvergenceError(VolkitError):
    code = "NO_CONVERGENCE"
    exit_code = 3


class NonPositiveVarianceError(VolkitError):
    code = "NONPOSITIVE_VARIANCE"
    exit_code = 3


class NonFiniteLikelihoodError(VolkitError):
    code = "NON_FINITE_LIKELIHOOD"
    exit_code = 3


class AllStartsFailedError(VolkitError):
    code = "ALL_STARTS_FAILED"
    exit_code = 3


class AllFitsFailedError(VolkitError):
    code = "ALL_FITS_FAILED"
    exit_code = 3


# --- warnings -----------------------------------------------------------------

class DuplicateDateWarning(UserWarning):
    """A date occurred more than once in the input; the last row was kept."""


class ShortSeriesWarning(UserWarning):
    """The series is long enough to fit but short enough to distrust."""
