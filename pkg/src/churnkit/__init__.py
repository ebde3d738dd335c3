"""Survival analysis of player playtime: churn curves, hazards and A/B tests."""

from .compare import LogRankResult, WeightSpec, logrank, logrank_terms, stratified_logrank
from .core import (
    Cohort,
    EventTable,
    EventTableRow,
    Observation,
    StepCurve,
    build_event_table,
    discrete_survival_from_hazard,
)
from .errors import (
    ChurnkitError,
    ConvergenceError,
    DegenerateDataError,
    InvalidInputError,
    NumericalError,
)
from .hazard import HazardCurve, KernelSpec, PiecewiseRates, kernel_hazard, piecewise_exponential
from .ingest import IngestConfig, SessionRecord, aggregate_sessions, read_durations, write_durations
from .metrics import MeanEstimate, QuantileEstimate, mean_auc, median, quantile, quantile_profile
from .nonparam import KmEstimate, NaEstimate, kaplan_meier, km_to_cumhaz, na_to_survival, nelson_aalen
from .parametric import Family, FitResult, fit_exponential, fit_mle, log_likelihood
from .sim import SimSpec, simulate_cohort

__version__ = "0.1.0"

__all__ = [
    "LogRankResult",
    "WeightSpec",
    "logrank",
    "logrank_terms",
    "stratified_logrank",
    "Cohort",
    "EventTable",
    "EventTableRow",
    "Observation",
    "StepCurve",
    "build_event_table",
    "discrete_survival_from_hazard",
    "ChurnkitError",
    "ConvergenceError",
    "DegenerateDataError",
    "InvalidInputError",
    "NumericalError",
    "HazardCurve",
    "KernelSpec",
    "PiecewiseRates",
    "kernel_hazard",
    "piecewise_exponential",
    "IngestConfig",
    "SessionRecord",
    "aggregate_sessions",
    "read_durations",
    "write_durations",
    "MeanEstimate",
    "QuantileEstimate",
    "mean_auc",
    "median",
    "quantile",
    "quantile_profile",
    "KmEstimate",
    "NaEstimate",
    "kaplan_meier",
    "km_to_cumhaz",
    "na_to_survival",
    "nelson_aalen",
    "Family",
    "FitResult",
    "fit_exponential",
    "fit_mle",
    "log_likelihood",
    "SimSpec",
    "simulate_cohort",
]
