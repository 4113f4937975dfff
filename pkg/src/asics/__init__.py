"""Selective inference for logistic regression after marginal screening.

Screen the top-K features by marginal score, fit a logistic MLE on the
selected support, and test each selected coefficient against the truncated
normal law obtained by conditioning on the selection event, alongside
data-splitting and nominal (selection-blind) baselines and a deterministic
Monte-Carlo harness for error rates and power.
"""

from .data import (
    ConstantColumnWarning,
    Dataset,
    LabelAlphabetError,
    LibsvmParseError,
    SyntheticDesign,
    generate_synthetic,
    parse_libsvm,
    serialize_libsvm,
    standardize,
)
from .logistic import (
    FitConfig,
    FittedLogistic,
    SingularDesignError,
    fit_mle,
    log_likelihood,
    observed_information,
    score,
)
from .screening import (
    ScreeningSelection,
    marginal_scores,
    select_top_k,
    selection_event_rows,
)
from .selective import (
    METHOD_TAGS,
    SelectiveReport,
    SelectiveTest,
    closed_truncation,
    polyhedral_truncation_oracle,
    run_asics,
    run_data_splitting,
    run_nominal,
    selective_p_value,
)
from .sim import (
    PATTERNS,
    SimMetrics,
    SimScenario,
    expand_pattern,
    fwer_indicator,
    power_for_tpr,
    replicate_report,
    replicate_stream,
    run_scenario,
)
from .truncnorm import (
    DegenerateIntervalError,
    TruncatedNormalParams,
    std_normal_cdf,
    std_normal_sf,
)
from .truncnorm import cdf as truncated_normal_cdf

__version__ = "0.1.0"

__all__ = [
    "ConstantColumnWarning",
    "Dataset",
    "DegenerateIntervalError",
    "FitConfig",
    "FittedLogistic",
    "LabelAlphabetError",
    "LibsvmParseError",
    "METHOD_TAGS",
    "PATTERNS",
    "ScreeningSelection",
    "SelectiveReport",
    "SelectiveTest",
    "SimMetrics",
    "SimScenario",
    "SingularDesignError",
    "SyntheticDesign",
    "TruncatedNormalParams",
    "closed_truncation",
    "expand_pattern",
    "fit_mle",
    "fwer_indicator",
    "generate_synthetic",
    "log_likelihood",
    "marginal_scores",
    "observed_information",
    "parse_libsvm",
    "polyhedral_truncation_oracle",
    "power_for_tpr",
    "replicate_report",
    "replicate_stream",
    "run_asics",
    "run_data_splitting",
    "run_nominal",
    "run_scenario",
    "score",
    "select_top_k",
    "selection_event_rows",
    "selective_p_value",
    "serialize_libsvm",
    "standardize",
    "std_normal_cdf",
    "std_normal_sf",
    "truncated_normal_cdf",
    "__version__",
]
