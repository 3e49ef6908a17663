"""Method-agreement statistics for highly cited researcher counts.

The package treats a methodology change in an annual researcher ranking
as a method-comparison problem: counts per (region, field) under the
old rules (M1) and new rules (M2) are two measurements of the same
thing, compared with least-products regression, V-shaped limits of
agreement, and the usual nonparametric companions (chi-squared share
tests, Lilliefors/Shapiro-Wilk normality, Spearman, Wilcoxon).

Layers: panel (data model and CSV ingestion), stat_tests (the classical
tests), agreement (the regression/limits machinery), reference (the
bundled published aggregates), report + cli (batch front end).
"""

from .agreement import (
    AgreementOptions,
    AgreementResult,
    Crossing,
    InfluenceClass,
    LineCoefficients,
    LoaBand,
    LoaModel,
    WlpFit,
    agreement_pipeline,
    classify_influence,
    fit_loa,
    fit_wlp,
    fit_wlp_proportional,
    interchange_threshold,
    loa_band,
    wlp_confidence_intervals,
)
from .errors import (
    BadSampleSizeError,
    ConfigError,
    DegenerateInputError,
    DegenerateTableError,
    HcrStatsError,
    LengthMismatchError,
    MissingDataError,
    NegativeSdError,
    ParseError,
    TooFewPairsError,
    TooFewPointsError,
    UndefinedSignError,
    ValidationError,
    ZeroVarianceError,
)
from .panel import (
    CANONICAL_FIELDS,
    CROSS_FIELD,
    ESI_FIELDS,
    REGIONS,
    ContingencyTable,
    FieldRegionPanel,
    GrowthSummary,
    PairedSeries,
    ShareBreakdown,
    concat_paired_series,
    derive_contingency,
    growth_summary,
    load_panel,
    paired_series,
    round_half_up,
    scan_panel_csv,
    serialize_panel,
    shares,
)
from .reference import (
    AS_TESTED_NOTE,
    CI_TRANSPOSITION_NOTE,
    PaperReferenceData,
    PrintedLineFit,
    SHARE_2017_NOTE,
    paper_reference_data,
    reference_data_checksum,
)
from .report import (
    AnalysisConfig,
    AnalysisReport,
    ValidationSummary,
    emit_plot_data,
    run_analysis,
    validate_input,
)
from .stat_tests import (
    ChiSquaredResult,
    NormalityResult,
    SpearmanMatrix,
    WilcoxonResult,
    chi_squared_test,
    ks_fixed_normal,
    ks_normality,
    shapiro_wilk,
    spearman_matrix,
    wilcoxon_signed_rank,
)

__version__ = "0.1.0"

__all__ = [
    "AS_TESTED_NOTE",
    "AgreementOptions",
    "AgreementResult",
    "AnalysisConfig",
    "AnalysisReport",
    "BadSampleSizeError",
    "CANONICAL_FIELDS",
    "CI_TRANSPOSITION_NOTE",
    "CROSS_FIELD",
    "ChiSquaredResult",
    "ConfigError",
    "ContingencyTable",
    "Crossing",
    "DegenerateInputError",
    "DegenerateTableError",
    "ESI_FIELDS",
    "FieldRegionPanel",
    "GrowthSummary",
    "HcrStatsError",
    "InfluenceClass",
    "LengthMismatchError",
    "LineCoefficients",
    "LoaBand",
    "LoaModel",
    "MissingDataError",
    "NegativeSdError",
    "NormalityResult",
    "PairedSeries",
    "PaperReferenceData",
    "ParseError",
    "PrintedLineFit",
    "REGIONS",
    "SHARE_2017_NOTE",
    "ShareBreakdown",
    "SpearmanMatrix",
    "TooFewPairsError",
    "TooFewPointsError",
    "UndefinedSignError",
    "ValidationError",
    "ValidationSummary",
    "WilcoxonResult",
    "WlpFit",
    "ZeroVarianceError",
    "agreement_pipeline",
    "chi_squared_test",
    "classify_influence",
    "concat_paired_series",
    "derive_contingency",
    "emit_plot_data",
    "fit_loa",
    "fit_wlp",
    "fit_wlp_proportional",
    "growth_summary",
    "interchange_threshold",
    "ks_fixed_normal",
    "ks_normality",
    "load_panel",
    "loa_band",
    "paired_series",
    "paper_reference_data",
    "reference_data_checksum",
    "round_half_up",
    "run_analysis",
    "scan_panel_csv",
    "serialize_panel",
    "shapiro_wilk",
    "shares",
    "spearman_matrix",
    "validate_input",
    "wilcoxon_signed_rank",
    "wlp_confidence_intervals",
]
