"""View-share analytics for Wikipedia pageview streams.

The toolkit ingests per-article pageview series and migration ground truth,
and provides view-share normalization, year-over-year surge metrics, rank
correlation against refugee stocks, AR(1) structural-break detection, and a
VAR/Granger workflow relating readership to border crossings.
"""

from .breaks import (
    BreakEstimate,
    BreakModel,
    BreakReport,
    PartitionResult,
    SegmentFit,
    break_confidence_interval,
    detect_breaks,
    optimal_partition,
    segment_rss,
    select_n_breaks,
)
from .econometrics import (
    AdfResult,
    GrangerResult,
    GrangerPipelineResult,
    VarFit,
    adf_test,
    correlate,
    fit_var,
    granger_test,
    lm_autocorrelation_test,
    run_granger_pipeline,
    select_lag,
    stability_check,
)
from .errors import (
    AlignmentEmpty,
    ArticleUnavailable,
    ConfigurationError,
    Degenerate,
    DegenerateFit,
    FormatError,
    InfeasibleConfiguration,
    InsufficientData,
    InsufficientHistory,
    NoData,
    ProtocolError,
    RateLimited,
    SingularDesign,
    ValidationError,
    ViewshiftError,
)
from .ground_truth import (
    GroundTruthRow,
    GroundTruthTable,
    load_ground_truth,
    load_location_mapping,
)
from .metrics import (
    ProportionSeries,
    RelativeChangeSeries,
    max_relative_change,
    proportion_of_views,
    relative_change,
    rescale_0_100,
)
from .ranking import (
    RankComparison,
    build_rank_comparison,
    spearman,
    spearman_permutation_pvalue,
)
from .series import AlignedPair, DailySeries, Granularity, aggregate, align, lag_shift
from .wikimedia import ArticleKey, FetchPolicy, PageviewClient, resolve_cache_root

__version__ = "0.1.0"
