"""
Exception hierarchy and process exit codes.

Every error raised on purpose by edgeroute derives from EdgeRouteError and
carries the exit code the CLI reports for it.
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class EdgeRouteError(Exception):
    """Base class for all edgeroute errors."""

    exit_code = EXIT_INTERNAL


class UsageError(EdgeRouteError):
    exit_code = EXIT_USAGE


class ConfigError(UsageError):
    """Invalid or incomplete pipeline / synth configuration."""


class PredictorSpecError(UsageError):
    """Unparseable predictor specification string."""


class DataError(EdgeRouteError):
    exit_code = EXIT_DATA


class ImageFormatError(DataError):
    """Image decodes but is not in a supported mode or bit depth."""


class DimensionError(DataError):
    """Paired arrays disagree in shape."""


class ManifestError(DataError):
    """Malformed manifest or unresolvable manifest path."""


class SplitError(DataError):
    """Stratified split cannot be formed."""


class PredictionError(DataError):
    """A predictor failed for a specific image."""

    def __init__(self, image_id: str, message: str):
        super().__init__(f"{image_id}: {message}")
        self.image_id = image_id


class TrainingError(DataError):
    """Router training received no usable records."""


class RuleFormatError(DataError):
    """Routing rule file is unreadable or has the wrong format tag."""


class ReportError(DataError):
    """Report inputs are empty or inconsistent."""


class SampleError(DataError):
    """Too few samples for a statistical test."""


class DegenerateRegressionError(DataError):
    """Regression on a constant feature."""


class StageError(EdgeRouteError):
    """Failure inside a pipeline stage, tagged with the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
        if isinstance(cause, EdgeRouteError):
            self.exit_code = cause.exit_code
        elif isinstance(cause, OSError):
            self.exit_code = EXIT_DATA
        else:
            self.exit_code = EXIT_INTERNAL
