"""Exception hierarchy shared across the toolkit.

Every error raised by this package derives from :class:`FeatstatsError`,
so callers (including the CLI) can catch one base class.
"""


class FeatstatsError(Exception):
    """Base class for all featstats errors."""


# ---------------------------------------------------------------------------
# moments


class NonFiniteInput(FeatstatsError):
    """An update value was NaN or infinite."""


class InsufficientCount(FeatstatsError):
    """Too few samples for the requested statistic."""


class ZeroVariance(FeatstatsError):
    """Second central moment is (numerically) zero; the statistic is undefined."""


# ---------------------------------------------------------------------------
# tensor_store


class TensorFormatError(FeatstatsError):
    """Base for tensor-file format violations."""


class BadMagic(TensorFormatError):
    """Stream does not start with the tensor-file magic bytes."""


class UnsupportedVersion(TensorFormatError):
    """Tensor file declares a format version this reader does not know."""


class TruncatedData(TensorFormatError):
    """Stream ended before the declared payload was complete."""


class NonFinite(TensorFormatError):
    """Tensor payload contains NaN/Inf and the reader is in strict mode."""


class DimOverflow(TensorFormatError):
    """Declared dimensions multiply beyond the addressable size."""


class ManifestError(FeatstatsError):
    """Base for run-manifest violations."""


class MalformedLine(ManifestError):
    """A manifest line is not valid JSON or misses required keys."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class NonMonotonicEpochs(ManifestError):
    """Manifest epochs are not strictly increasing."""


# ---------------------------------------------------------------------------
# feature_stats


class ChannelTooSmall(FeatstatsError):
    """Channel axis shorter than 2; per-slice statistics are undefined."""


class AllFramesDegenerate(FeatstatsError):
    """A batch item has no channel slice with usable (nonzero) variance."""

    def __init__(self, batch_index: int):
        super().__init__(f"batch item {batch_index} has no non-degenerate slice")
        self.batch_index = batch_index


class TrajectoryError(FeatstatsError):
    """Processing a run manifest failed at a specific epoch."""

    def __init__(self, epoch: int, message: str):
        super().__init__(f"epoch {epoch}: {message}")
        self.epoch = epoch


# ---------------------------------------------------------------------------
# caption_metrics


class EmptyAfterTokenization(FeatstatsError):
    """Caption reduced to zero tokens after normalization."""


class CorpusTooSmall(FeatstatsError):
    """Corpus-level metric needs at least two items."""


class CorpusFormatError(FeatstatsError):
    """Caption corpus JSONL line is malformed."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class MissingSpiceScore(FeatstatsError):
    """External SPICE table does not cover a corpus item."""

    def __init__(self, item_id: str):
        super().__init__(f"no SPICE score for item {item_id!r}")
        self.item_id = item_id


# ---------------------------------------------------------------------------
# analysis


class LengthMismatch(FeatstatsError):
    """Paired series have different lengths (or fewer than 2 points)."""


class ConstantSeries(FeatstatsError):
    """A correlation input series is constant; the coefficient is undefined."""


class InsufficientOverlap(FeatstatsError):
    """Fewer than 2 epochs are shared between trajectory and scores."""


class EmptyCandidateList(FeatstatsError):
    """Model ranking requires at least one candidate."""


# ---------------------------------------------------------------------------
# synthgen


class InfeasibleTargets(FeatstatsError):
    """Requested (skewness, excess kurtosis) violates the moment bound."""


class SolverFailure(FeatstatsError):
    """Distribution-parameter search did not converge to the targets."""
