"""Kaplan-Meier and Nelson-Aalen estimators."""

from dataclasses import dataclass

import numpy as np

from .core import Cohort, EventTable, StepCurve, build_event_table
from .errors import InvalidInputError
from .numerics import z_critical


@dataclass(frozen=True, eq=False)
class KmEstimate:
    """Product-limit survival estimate over an event table.

    Attributes
    ----------
    curve : StepCurve
        Survival at each event time with log-log CI bounds (NaN when absent).
    greenwood_var : numpy.ndarray
        Greenwood variance of S at each event time, NaN once some earlier
        row had everyone at risk fail.
    loglog_var : numpy.ndarray
        Variance of log(-log S); NaN where S is 0 or 1.
    improper : bool
        True when the largest observation is censored, so the curve never
        reaches zero and is held constant past the last event.
    """

    table: EventTable
    curve: StepCurve
    greenwood_var: np.ndarray
    loglog_var: np.ndarray
    conf_level: float
    improper: bool

    @property
    def time(self):
        return self.curve.time

    @property
    def survival(self):
        return self.curve.value

    @property
    def loglog_ci(self):
        return self.curve.lower, self.curve.upper

    def __call__(self, t):
        return self.curve(t)


@dataclass(frozen=True, eq=False)
class NaEstimate:
    table: EventTable
    curve: StepCurve

    @property
    def time(self):
        return self.curve.time

    @property
    def cumulative_hazard(self):
        return self.curve.value

    def __call__(self, t):
        return self.curve(t)


def _as_table(data):
    if isinstance(data, EventTable):
        return data
    if isinstance(data, Cohort):
        return build_event_table(data)
    return EventTable.from_rows(data)


def greenwood_sums(table):
    """Cumulative sum of d/(n(n-d)); +inf from the first row with n == d."""
    n = table.at_risk.astype(float)
    d = table.events.astype(float)
    with np.errstate(divide="ignore"):
        terms = np.where(n > d, d / (n * (n - d)), np.inf)
    return np.cumsum(terms)


def kaplan_meier(table, conf_level=0.95):
    """Kaplan-Meier survival with Greenwood variance and log-log CIs.

    `table` may be an :class:`EventTable`, a :class:`Cohort`, or a sequence
    of ``(time, at_risk, events[, censored_in_gap])`` rows.
    """
    table = _as_table(table)
    z = z_critical(conf_level)
    q = table.fraction if len(table) else np.empty(0)
    surv = np.cumprod(1.0 - q)
    cum = greenwood_sums(table)
    with np.errstate(divide="ignore", invalid="ignore"):
        gw = np.where(np.isfinite(cum), surv**2 * cum, np.nan)
        log_s = np.log(surv)
        defined = (surv > 0) & (surv < 1) & np.isfinite(cum)
        llvar = np.where(defined, cum / log_s**2, np.nan)
        g = np.log(-log_s)
        half = z * np.sqrt(llvar)
        lower = np.exp(-np.exp(g + half))
        upper = np.exp(-np.exp(g - half))
    lower = np.where(defined, lower, np.nan)
    upper = np.where(defined, upper, np.nan)
    curve = StepCurve(table.time, surv, lower, upper, kind="survival")
    return KmEstimate(
        table=table,
        curve=curve,
        greenwood_var=gw,
        loglog_var=llvar,
        conf_level=conf_level,
        improper=bool(table.last_censored),
    )


def nelson_aalen(table):
    """Nelson-Aalen cumulative hazard, the running sum of d_i/n_i."""
    table = _as_table(table)
    h = np.cumsum(table.fraction) if len(table) else np.empty(0)
    return NaEstimate(table=table, curve=StepCurve(table.time, h, kind="cumulative_hazard"))


def km_to_cumhaz(km):
    """-log of the KM curve; a zero survival step maps to +inf."""
    curve = km.curve if isinstance(km, KmEstimate) else km
    with np.errstate(divide="ignore"):
        h = -np.log(curve.value)
        lo = -np.log(curve.upper)
        hi = -np.log(curve.lower)
    return StepCurve(curve.time, h + 0.0, lo, hi, kind="cumulative_hazard")


def na_to_survival(na):
    """exp(-H) of a Nelson-Aalen curve."""
    curve = na.curve if isinstance(na, NaEstimate) else na
    if curve.kind != "cumulative_hazard":
        raise InvalidInputError("expected a cumulative hazard curve")
    return StepCurve(
        curve.time, np.exp(-curve.value), np.exp(-curve.upper), np.exp(-curve.lower), kind="survival"
    )
