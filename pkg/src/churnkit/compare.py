"""Log-rank comparison of two cohorts, weighted and stratified variants."""

import sys
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import Cohort, sorted_arrays
from .errors import DegenerateDataError, InvalidInputError, NumericalError
from .numerics import chi_square_1df_sf

P_FLOOR = sys.float_info.min

TERM_FIELDS = ("time", "n0", "n1", "d0", "d1", "expected", "variance", "weight")


@dataclass(frozen=True)
class WeightSpec:
    """Weights ``w_i = m * S(t_i-)^rho`` from the pooled Kaplan-Meier curve.

    ``rho=0`` is the log-rank test scaled by the constant m, ``rho=1`` the
    Peto-Peto / Prentice test that stresses early differences.
    """

    rho: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.rho) and self.rho >= 0):
            raise InvalidInputError(f"rho must be finite and non-negative, got {self.rho!r}")


@dataclass(frozen=True, eq=False)
class LogRankResult:
    """Score statistic U, its variance and the chi-square(1) p-value.

    ``terms`` maps each of :data:`TERM_FIELDS` to a per-event-time array.
    ``var_u_linear`` is the alternative variance sum(w_i * v_i) with the
    weight to the first power; it equals ``var_u`` only when all w_i are 1.
    ``underflow`` is set when the p-value fell below :data:`P_FLOOR` and was
    clamped to it.
    """

    U: float
    var_u: float
    chi2: float
    p_value: float
    terms: dict
    var_u_linear: float = float("nan")
    underflow: bool = False
    strata: tuple = ()

    @property
    def z(self):
        return self.U / np.sqrt(self.var_u) if self.var_u > 0 else 0.0


def _arrays(cohort):
    if not isinstance(cohort, Cohort):
        cohort = Cohort.from_observations(cohort)
    return cohort


def logrank_terms(control, test, weights=None):
    """Per-event-time hypergeometric terms for control vs test.

    Returns a dict of arrays keyed by :data:`TERM_FIELDS`; empty arrays when
    neither cohort has an event.
    """
    control, test = _arrays(control), _arrays(test)
    t0, e0 = sorted_arrays(control)
    t1, e1 = sorted_arrays(test)
    times = np.unique(np.concatenate([t0[e0], t1[e1]]))
    n0, d0 = _kernels.risk_counts(t0, e0, times)
    n1, d1 = _kernels.risk_counts(t1, e1, times)
    n = (n0 + n1).astype(float)
    d = (d0 + d1).astype(float)
    expected = n0 * d / n if times.size else np.empty(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        variance = np.where(n > 1, n0 * n1 * d * (n - d) / (n * n * (n - 1)), 0.0)
    if weights is None:
        w = np.ones(times.size)
    else:
        m = control.size + test.size
        surv_left = np.concatenate([[1.0], np.cumprod(1.0 - d / n)[:-1]]) if times.size else np.empty(0)
        w = m * surv_left**weights.rho
    return {
        "time": times,
        "n0": n0,
        "n1": n1,
        "d0": d0,
        "d1": d1,
        "expected": expected,
        "variance": variance,
        "weight": w,
    }


def _score(terms):
    w = terms["weight"]
    u = float(np.sum(w * (terms["d0"] - terms["expected"])))
    v = float(np.sum(w * w * terms["variance"]))
    v_lin = float(np.sum(w * terms["variance"]))
    return u, v, v_lin


def _result(u, v, v_lin, terms, strata=()):
    if v <= 0:
        scale = float(np.sum(np.abs(terms["weight"]) * terms["d0"])) + 1.0
        if abs(u) > 1e-12 * scale:
            raise NumericalError(f"score variance is zero but U = {u!r}")
        chi2 = 0.0
    else:
        chi2 = u * u / v
    p = chi_square_1df_sf(chi2)
    underflow = p < P_FLOOR
    return LogRankResult(
        U=u,
        var_u=v,
        chi2=chi2,
        p_value=max(p, P_FLOOR),
        terms=terms,
        var_u_linear=v_lin,
        underflow=underflow,
        strata=strata,
    )


def logrank(control, test, weights=None):
    """Two-sample log-rank test of equal survival.

    Parameters
    ----------
    control, test : Cohort
    weights : WeightSpec, optional
        None for the plain test (all weights 1).

    Raises
    ------
    InvalidInputError
        If either cohort is empty.
    DegenerateDataError
        If neither cohort contains an event.
    """
    control, test = _arrays(control), _arrays(test)
    if control.size == 0 or test.size == 0:
        raise InvalidInputError("both cohorts must be non-empty")
    terms = logrank_terms(control, test, weights)
    if terms["time"].size == 0:
        raise DegenerateDataError("no churn events in either cohort")
    return _result(*_score(terms), terms)


def stratified_logrank(strata, weights=None):
    """Log-rank test adjusted for strata: (sum U_g)^2 / sum Var[U_g].

    `strata` is a sequence of ``(control, test)`` pairs. Strata without
    events contribute nothing.
    """
    strata = list(strata)
    parts = []
    for control, test in strata:
        terms = logrank_terms(control, test, weights)
        if terms["time"].size == 0:
            parts.append((0.0, 0.0, 0.0, terms))
        else:
            parts.append((*_score(terms), terms))
    if not parts or all(p[3]["time"].size == 0 for p in parts):
        raise DegenerateDataError("no stratum contains a churn event")
    u = sum(p[0] for p in parts)
    v = sum(p[1] for p in parts)
    v_lin = sum(p[2] for p in parts)
    merged = {k: np.concatenate([p[3][k] for p in parts]) for k in TERM_FIELDS}
    return _result(u, v, v_lin, merged, strata=tuple((p[0], p[1]) for p in parts))
