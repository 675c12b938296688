"""Volatility modelling toolkit: diagnostics, GARCH(1,1) fitting under
heavy-tailed innovations, and model selection for daily close-price series."""

from .diagnostics import (
    TestReport,
    adf_test,
    anderson_darling,
    arch_lm,
    jarque_bera,
    ljung_box,
)
from .distributions import (
    Family,
    InnovationSpec,
    NigCanonicalParams,
    cdf,
    log_pdf,
    pdf,
    quantile,
    sample,
    standardize_nig,
)
from .estimation import (
    FitConfig,
    FitResult,
    SelectionReport,
    fit,
    free_param_count,
    from_unconstrained,
    information_criteria,
    param_names,
    select_model,
    to_unconstrained,
)
from .garch import (
    GarchParams,
    Model,
    VariancePath,
    filter_variance,
    log_likelihood,
    simulate_path,
    standardized_residuals,
    variance_step,
)
from .ingest import (
    DescriptiveStats,
    PriceSeries,
    ReturnSeries,
    descriptive_stats,
    log_returns,
    parse_price_csv,
)

__version__ = "0.1.0"

__all__ = [
    "DescriptiveStats",
    "Family",
    "FitConfig",
    "FitResult",
    "GarchParams",
    "InnovationSpec",
    "Model",
    "NigCanonicalParams",
    "PriceSeries",
    "ReturnSeries",
    "SelectionReport",
    "TestReport",
    "VariancePath",
    "adf_test",
    "anderson_darling",
    "arch_lm",
    "cdf",
    "descriptive_stats",
    "filter_variance",
    "fit",
    "free_param_count",
    "from_unconstrained",
    "information_criteria",
    "jarque_bera",
    "ljung_box",
    "log_likelihood",
    "log_pdf",
    "log_returns",
    "param_names",
    "parse_price_csv",
    "pdf",
    "quantile",
    "sample",
    "select_model",
    "simulate_path",
    "standardize_nig",
    "standardized_residuals",
    "to_unconstrained",
    "variance_step",
]
