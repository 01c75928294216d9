"""Exception hierarchy shared across the toolkit."""


class ViewshiftError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(ViewshiftError):
    """Invalid configuration value (bad anchor, bad date range, bad settings file)."""


class InsufficientData(ViewshiftError):
    """Not enough observations for the requested operation."""


class InsufficientHistory(InsufficientData):
    """Series too short to reach back the required number of periods."""


class AlignmentEmpty(ViewshiftError):
    """Two series share no dates."""


class NoData(ViewshiftError):
    """No present values in the requested window or sequence."""


class Degenerate(ViewshiftError):
    """A statistic is undefined because an input has zero variance."""


class DegenerateFit(ViewshiftError):
    """A regression fit is exact (zero residual), so the test statistic is undefined."""


class SingularDesign(ViewshiftError):
    """Regression design matrix is rank deficient."""


class InfeasibleConfiguration(ViewshiftError):
    """Trimming/maximum-break settings leave no admissible segmentation."""


class FormatError(ViewshiftError):
    """A file does not match its documented schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class ValidationError(ViewshiftError):
    """A file parses but violates a content rule (duplicates, negative counts)."""


class ArticleUnavailable(ViewshiftError):
    """The pageview API has no data for this article/range (HTTP 404)."""


class RateLimited(ViewshiftError):
    """The API kept rate-limiting after all retries."""


class ProtocolError(ViewshiftError):
    """Malformed API payload or unrecoverable transport failure."""
