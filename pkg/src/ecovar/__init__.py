"""Daily time-series econometrics toolkit.

Core pieces: calendar-aligned series handling, GARCH-based volatility
extraction, VAR estimation with exogenous dummies, Cholesky-orthogonalized
impulse responses with Monte Carlo bands, and a declarative study runner.
"""

from .diagnostics import (
    AdfResult,
    LjungBoxResult,
    acf,
    adf_critical_values,
    adf_test,
    ljung_box,
    pacf,
)
from .errors import (
    AlignmentError,
    ConfigError,
    DegreesOfFreedomError,
    DomainError,
    EcovarError,
    LagSelectionError,
    ParseError,
    RankError,
)
from .irf import IrfResult, cholesky_lower, irf_bands, ma_coefficients, orthogonal_irf
from .series import (
    Dataset,
    RawSeries,
    TimeSeries,
    align_daily,
    assemble_dataset,
    first_difference,
    log_transform,
    make_dummy,
    parse_csv,
)
from .simulate import Ar1Spec, StudyDgp, simulate_study_data, write_study_data
from .study import StudyConfig, StudyReport, load_config, parse_config, run_study
from .varmodel import (
    VarModel,
    companion_and_stability,
    fit_var,
    residual_whiteness,
    select_lag,
)
from .volatility import (
    ArModel,
    Garch,
    VolatilityExtractor,
    garch_filter,
    simulate_garch,
    standardized_residual_test,
)

__version__ = "0.1.0"

__all__ = [
    "AdfResult", "LjungBoxResult", "acf", "adf_critical_values", "adf_test",
    "ljung_box", "pacf",
    "AlignmentError", "ConfigError", "DegreesOfFreedomError", "DomainError",
    "EcovarError", "LagSelectionError", "ParseError", "RankError",
    "IrfResult", "cholesky_lower", "irf_bands", "ma_coefficients", "orthogonal_irf",
    "Dataset", "RawSeries", "TimeSeries", "align_daily", "assemble_dataset",
    "first_difference", "log_transform", "make_dummy", "parse_csv",
    "Ar1Spec", "StudyDgp", "simulate_study_data", "write_study_data",
    "StudyConfig", "StudyReport", "load_config", "parse_config", "run_study",
    "VarModel", "companion_and_stability", "fit_var", "residual_whiteness", "select_lag",
    "ArModel", "Garch", "VolatilityExtractor", "garch_filter", "simulate_garch",
    "standardized_residual_test",
]
