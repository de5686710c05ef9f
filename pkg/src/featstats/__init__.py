"""Profiling toolkit for encoder feature statistics and caption metrics.

Computes kurtosis/skewness of time x batch x channel feature tensors with
single-pass mergeable accumulators, scores captions with BLEU/ROUGE-L/
CIDEr-D/SPIDEr, and analyzes how the feature statistics track captioning
performance across training epochs: correlation, model ranking, and a
stability-window training-termination rule.  A synthetic-run generator
provides controllable ground truth for end-to-end checks.
"""

from .analysis import (
    CorrelationResult,
    ModelRanking,
    StopDecision,
    correlate_run,
    pearson,
    rank_models,
    spearman,
    stop_check,
    stop_check_series,
)
from .caption_metrics import (
    CaptionRecord,
    MetricReport,
    bleu_n,
    cider,
    load_corpus,
    rouge_l,
    score_corpus,
    spider,
    tokenize,
)
from .feature_stats import (
    EpochStat,
    StatTrajectory,
    TimeMode,
    epoch_statistic,
    run_trajectory,
)
from .moments import (
    DEFAULT_DEFINITION,
    KurtosisKind,
    MomentAccumulator,
    SkewnessKind,
    StatDefinition,
    from_array,
    merge,
)
from .synthgen import TrajectorySpec, generate_run, sample_with_moments
from .tensor_store import (
    FeatureTensor,
    ManifestEntry,
    RunManifest,
    load_manifest,
    read_tensor,
    read_tensor_file,
    save_manifest,
    write_tensor,
    write_tensor_file,
)

__version__ = "0.1.0"
