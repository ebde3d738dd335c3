"""Single-number summaries of a survival curve: mean and quantiles."""

import math
from dataclasses import dataclass

import numpy as np

from .core import Cohort, EventTable, build_event_table
from .errors import DegenerateDataError, InvalidInputError
from .nonparam import KmEstimate, kaplan_meier
from .numerics import z_critical

# survival values are running products; 0.6 may come out as 0.6000000000000001
_SURV_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class MeanEstimate:
    """Area under the KM curve with its normal-approximation CI.

    ``areas[i]`` is the rectangle ``S(t_{i-1}) * (t_i - t_{i-1})`` added at
    event row i; when ``restricted`` one more entry holds the area between
    the last event and the largest (censored) observation. ``tail[i]`` is
    the sum of all areas after entry i, so ``tail[-1] == 0`` and the total
    equals ``areas.sum()``.
    """

    mean: float
    variance: float
    ci: tuple
    restricted: bool
    horizon: float
    areas: np.ndarray
    tail: np.ndarray
    conf_level: float

    @property
    def half_width(self):
        return 0.5 * (self.ci[1] - self.ci[0])


@dataclass(frozen=True)
class QuantileEstimate:
    """Time at which survival first drops to ``1 - p`` or below.

    ``estimate`` is NaN when the curve never gets there. CI bounds are NaN
    when undefined and ``inf`` when open-ended on the right.
    """

    p: float
    estimate: float
    ci: tuple
    reached: bool

    @property
    def lower(self):
        return self.ci[0]

    @property
    def upper(self):
        return self.ci[1]


def _table_and_km(data, km, conf_level):
    if isinstance(data, KmEstimate):
        return data.table, data
    if isinstance(data, Cohort):
        data = build_event_table(data)
    if not isinstance(data, EventTable):
        data = EventTable.from_rows(data)
    if km is None:
        km = kaplan_meier(data, conf_level)
    return data, km


def mean_auc(table, km=None, conf_level=0.95):
    """Mean duration as the area under the Kaplan-Meier curve.

    Variance is ``sum_i B_i^2 * d_i / (n_i (n_i - d_i))`` where ``B_i`` is
    the area after event row i; rows where everyone at risk fails carry no
    variance information and are skipped. When the largest observation is
    censored the area is truncated there and ``restricted`` is set.
    """
    table, km = _table_and_km(table, km, conf_level)
    if len(table) == 0:
        raise DegenerateDataError("mean needs at least one churn")
    t = table.time
    s = km.survival
    s_prev = np.concatenate([[1.0], s[:-1]])
    t_prev = np.concatenate([[0.0], t[:-1]])
    areas = s_prev * (t - t_prev)
    restricted = bool(table.last_censored) and table.max_time > t[-1]
    horizon = float(table.max_time if restricted else t[-1])
    if restricted:
        areas = np.append(areas, s[-1] * (horizon - t[-1]))
    total = float(areas.sum())
    tail = total - np.cumsum(areas)
    tail[-1] = 0.0

    n = table.at_risk.astype(float)
    d = table.events.astype(float)
    b = tail[: len(table)]
    usable = n > d
    if usable.any():
        variance = float(np.sum(b[usable] ** 2 * d[usable] / (n[usable] * (n[usable] - d[usable]))))
        half = z_critical(conf_level) * math.sqrt(variance)
        ci = (total - half, total + half)
    else:
        variance = math.nan
        ci = (math.nan, math.nan)
    return MeanEstimate(
        mean=total,
        variance=variance,
        ci=ci,
        restricted=restricted,
        horizon=horizon,
        areas=areas,
        tail=tail,
        conf_level=conf_level,
    )


def _loglog(u):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(-np.log(u))


def quantile_ci_mask(km, p, conf_level=None):
    """Which event rows satisfy the log-log test for the p-th quantile.

    Row i is inside when ``|g(S_i) - g(1 - p)| <= z * sqrt(Var[g(S_i)])``
    with ``g(u) = log(-log u)``. Rows where the variance is undefined never
    qualify.
    """
    z = z_critical(km.conf_level if conf_level is None else conf_level)
    var = km.loglog_var
    with np.errstate(invalid="ignore"):
        stat = np.abs(_loglog(km.survival) - _loglog(1.0 - p))
        return np.isfinite(var) & (stat <= z * np.sqrt(var))


def quantile(km, p=0.5, conf_level=None):
    """p-th quantile ``min{t : S(t) <= 1 - p}`` with its confidence interval.

    The interval covers the event-time steps on which the survival estimate
    is statistically compatible with ``1 - p``: it starts at the first such
    step and ends where the last such step ends, i.e. at the next event time
    (``inf`` when that step is the final one).
    """
    if not isinstance(km, KmEstimate):
        km = kaplan_meier(km, conf_level or 0.95)
    if not 0.0 < p <= 1.0:
        raise InvalidInputError(f"quantile level must lie in (0, 1], got {p!r}")
    t = km.time
    s = km.survival
    tol = 0.0 if p == 1.0 else _SURV_EPS
    hit = np.flatnonzero(s <= (1.0 - p) + tol)
    reached = hit.size > 0
    estimate = float(t[hit[0]]) if reached else math.nan
    if p == 1.0:
        return QuantileEstimate(p, estimate, (math.nan, math.nan), reached)
    inside = np.flatnonzero(quantile_ci_mask(km, p, conf_level))
    if inside.size == 0:
        ci = (math.nan, math.nan)
    else:
        last = inside[-1]
        ci = (float(t[inside[0]]), float(t[last + 1]) if last + 1 < t.size else math.inf)
    return QuantileEstimate(p, estimate, ci, reached)


def median(km, conf_level=None):
    return quantile(km, 0.5, conf_level)


def quantile_profile(km, levels=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9), conf_level=None):
    """Quantiles at several ascending levels in (0, 1]."""
    levels = [float(p) for p in levels]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise InvalidInputError("quantile levels must be strictly ascending")
    return [quantile(km, p, conf_level) for p in levels]
