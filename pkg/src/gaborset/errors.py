"""Exception types raised across the toolkit."""


class GaborsetError(Exception):
    """Base class for all toolkit errors."""


class InvalidImage(GaborsetError):
    """Image data violates its declared layout (bad channel count, shape, range)."""


class InvalidKernelSize(GaborsetError):
    """Gabor kernel size must be an odd integer >= 3."""


class InvalidBank(GaborsetError):
    """Bank construction got empty or out-of-range frequency/orientation lists."""


class SizeMismatch(GaborsetError):
    """Kernel does not fit inside the image."""


class ShapeError(GaborsetError):
    """Network input/weight dimensions disagree."""


class InvalidTrainingSet(GaborsetError):
    """Training set is empty, inconsistent, or has degenerate targets."""


class NoCandidateFeatures(GaborsetError):
    """Classification needs at least one candidate feature (output neuron)."""


class DegenerateCounts(GaborsetError):
    """All four confusion counts are zero; no metrics can be computed."""


class MissingLabel(GaborsetError):
    """A classified path has no ground-truth label."""


class SkippedImage(GaborsetError):
    """A single image could not be read; batch callers log and continue."""

    def __init__(self, path, cause=None):
        super().__init__(f"skipped unreadable image: {path}" + (f" ({cause})" if cause else ""))
        self.path = path
        self.cause = cause


class ConfigError(GaborsetError):
    """Pipeline configuration file is malformed or violates its invariants."""


class StageError(GaborsetError):
    """A pipeline stage failed; partial outputs were removed."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage}: {cause}")
        self.stage = stage
        self.cause = cause


class DataError(GaborsetError):
    """Dataset manifest points at missing or unusable data."""
