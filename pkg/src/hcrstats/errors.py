"""Exception types shared across the package.

Every error raised by library code derives from HcrStatsError so callers
can catch one base class. The CLI maps these onto its documented exit
codes (config 2, data 3, degenerate statistics 4).
"""


class HcrStatsError(Exception):
    """Base class for all package errors."""


class ConfigError(HcrStatsError):
    """Invalid analysis configuration (bad flag combination, bad value)."""


class ParseError(HcrStatsError):
    """Malformed input row; message carries the 1-based line number."""


class ValidationError(HcrStatsError):
    """Well-formed input violating panel rules (unknown ids, duplicates,
    negative counts, strict-mode world mismatches)."""


class MissingDataError(HcrStatsError):
    """A (year, region) or (year, region, field) entry required by an
    operation is absent from the panel."""


class DegenerateTableError(HcrStatsError):
    """Contingency table with a zero marginal row or column sum."""


class BadSampleSizeError(HcrStatsError):
    """Sample size outside the supported range for a test."""


class ZeroVarianceError(HcrStatsError):
    """A sample or series is constant where variation is required."""


class LengthMismatchError(HcrStatsError):
    """Vectors that must share a common length do not."""


class TooFewPairsError(HcrStatsError):
    """Too few usable pairs after zero-difference removal."""


class TooFewPointsError(HcrStatsError):
    """Too few points to build a confidence interval."""


class DegenerateInputError(HcrStatsError):
    """Input degenerate for the requested fit (zero variance, residuals
    indistinguishable from zero, nonpositive fitted SD)."""


class UndefinedSignError(HcrStatsError):
    """Zero weighted covariance: the least-products slope sign is undefined."""


class NegativeSdError(HcrStatsError):
    """LOA model extrapolated to where the fitted SD is not positive."""
