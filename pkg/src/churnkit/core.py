"""Domain types and the event table that every estimator is built on."""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import InvalidInputError


class Observation(NamedTuple):
    """One subject: a duration in hours and whether it is right-censored.

    ``censored=True`` means the event was not seen; the duration is then a
    lower bound on the true time to churn.
    """

    duration: float
    censored: bool


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Cohort:
    """A labelled, ordered collection of observations.

    Stored column-wise; :attr:`observations` rebuilds the row view. `ids`
    optionally names each subject. Equality compares the data and ids, not
    the label.
    """

    durations: np.ndarray
    censored: np.ndarray
    label: str = ""
    ids: tuple = None

    def __post_init__(self):
        durations = _frozen(np.atleast_1d(self.durations), float).reshape(-1)
        censored = np.atleast_1d(self.censored).reshape(-1)
        if censored.dtype != bool:
            if censored.size and not np.isin(censored, (0, 1)).all():
                raise InvalidInputError("censoring indicators must be 0/1 or boolean")
        censored = _frozen(censored, bool)
        if durations.shape != censored.shape:
            raise InvalidInputError(
                f"{durations.size} durations but {censored.size} censoring flags"
            )
        if not np.isfinite(durations).all():
            raise InvalidInputError("durations must be finite")
        if (durations < 0).any():
            i = int(np.argmax(durations < 0))
            raise InvalidInputError(f"negative duration {durations[i]!r} at index {i}")
        if self.ids is not None:
            ids = tuple(str(i) for i in self.ids)
            if len(ids) != durations.size:
                raise InvalidInputError(f"{len(ids)} ids for {durations.size} observations")
            object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "censored", censored)

    @classmethod
    def from_observations(cls, observations, label=""):
        obs = list(observations)
        return cls(
            np.array([o.duration for o in obs], dtype=float),
            np.array([bool(o.censored) for o in obs], dtype=bool),
            label,
        )

    @property
    def observations(self):
        return [Observation(float(t), bool(c)) for t, c in zip(self.durations, self.censored)]

    @property
    def events(self):
        """Boolean event indicator, the complement of :attr:`censored`."""
        return ~self.censored

    @property
    def size(self):
        return int(self.durations.size)

    def __len__(self):
        return self.size

    def __eq__(self, other):
        if not isinstance(other, Cohort):
            return NotImplemented
        return (
            np.array_equal(self.durations, other.durations)
            and np.array_equal(self.censored, other.censored)
            and self.ids == other.ids
        )

    def __hash__(self):
        return hash((self.durations.tobytes(), self.censored.tobytes(), self.ids))

    def scaled(self, factor):
        """Same cohort with every duration multiplied by `factor`."""
        return Cohort(self.durations * factor, self.censored, self.label, self.ids)

    def subset(self, index):
        ids = None if self.ids is None else tuple(np.asarray(self.ids, dtype=object)[index])
        return Cohort(self.durations[index], self.censored[index], self.label, ids)

    def merged(self, other, label=None):
        ids = None
        if self.ids is not None and other.ids is not None:
            ids = self.ids + other.ids
        return Cohort(
            np.concatenate([self.durations, other.durations]),
            np.concatenate([self.censored, other.censored]),
            self.label if label is None else label,
            ids,
        )


class EventTableRow(NamedTuple):
    time: float
    at_risk: int
    events: int
    censored_in_gap: int

    @property
    def fraction(self):
        """Fraction churning, d_i / n_i."""
        return self.events / self.at_risk


@dataclass(frozen=True, eq=False)
class EventTable:
    """Risk-set and event counts at each distinct uncensored time.

    ``censored_in_gap[k]`` counts censorings in ``[time[k-1], time[k])``
    (``[0, time[0])`` for the first row), so that
    ``at_risk[k] == at_risk[k-1] - events[k-1] - censored_in_gap[k]``.
    Censorings tied with an event time stay in that time's risk set.
    """

    time: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray
    censored_in_gap: np.ndarray
    size: int = 0
    trailing_censored: int = 0
    max_time: float = 0.0
    last_censored: bool = False

    def __len__(self):
        return int(self.time.size)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, k):
        return self.rows[k]

    @property
    def rows(self):
        return [
            EventTableRow(float(t), int(n), int(d), int(c))
            for t, n, d, c in zip(self.time, self.at_risk, self.events, self.censored_in_gap)
        ]

    @property
    def fraction(self):
        return self.events / self.at_risk

    @classmethod
    def from_rows(cls, rows, size=None, trailing_censored=0, max_time=None, last_censored=False):
        """Build a table from explicit rows, validating the row invariants."""
        rows = list(rows)
        time = np.array([r[0] for r in rows], dtype=float)
        n = np.array([r[1] for r in rows], dtype=np.int64)
        d = np.array([r[2] for r in rows], dtype=np.int64)
        c = np.array([r[3] if len(r) > 3 else 0 for r in rows], dtype=np.int64)
        if rows:
            if (np.diff(time) <= 0).any():
                raise InvalidInputError("event times must be strictly ascending")
            if ((d < 1) | (d > n)).any():
                raise InvalidInputError("each row needs 1 <= events <= at_risk")
            if (np.diff(n) > 0).any():
                raise InvalidInputError("at_risk must be non-increasing")
        if size is None:
            size = int(n[0] + c[0]) if rows else 0
        if max_time is None:
            max_time = float(time[-1]) if rows else 0.0
        return cls(
            _frozen(time, float),
            _frozen(n, np.int64),
            _frozen(d, np.int64),
            _frozen(c, np.int64),
            size=int(size),
            trailing_censored=int(trailing_censored),
            max_time=float(max_time),
            last_censored=bool(last_censored),
        )


def sorted_arrays(cohort):
    """Durations sorted ascending with the event flags carried along."""
    order = np.argsort(cohort.durations, kind="stable")
    return cohort.durations[order], cohort.events[order]


def build_event_table(cohort):
    """Event table of `cohort`: one row per distinct uncensored duration.

    Raises
    ------
    InvalidInputError
        If any duration is negative.
    """
    if not isinstance(cohort, Cohort):
        cohort = Cohort.from_observations(cohort)
    durations, events = sorted_arrays(cohort)
    times = np.unique(durations[events])
    n, d = _kernels.risk_counts(durations, events, times)

    cens = durations[~events]
    # censorings in [t_{k-1}, t_k); index 0 collects those before t_1
    below = np.searchsorted(cens, times, side="left")
    gap = np.diff(np.concatenate([[0], below]))
    trailing = int(cens.size - (below[-1] if times.size else 0))

    if durations.size:
        max_time = float(durations[-1])
        last_censored = not bool(events[durations == max_time].any())
    else:
        max_time, last_censored = 0.0, False
    return EventTable(
        _frozen(times, float),
        _frozen(n, np.int64),
        _frozen(d, np.int64),
        _frozen(gap, np.int64),
        size=cohort.size,
        trailing_censored=trailing,
        max_time=max_time,
        last_censored=last_censored,
    )


def discrete_survival_from_hazard(initial_count, hazards):
    """Survivors and failures after each discrete step of a churn hazard.

    Step indices start at 1; ``hazards[0]`` is the churn fraction at step 1.

    >>> discrete_survival_from_hazard(1000, [0.5, 0.2, 0.2, 0.2])[0]
    [500.0, 400.0, 320.0, 256.0]
    """
    if initial_count < 0:
        raise InvalidInputError("initial_count must be non-negative")
    h = np.asarray(hazards, dtype=float)
    if ((h < 0) | (h > 1) | ~np.isfinite(h)).any():
        raise InvalidInputError("hazards must lie in [0, 1]")
    survivors, failures = [], []
    alive = float(initial_count)
    for hk in h.tolist():
        lost = alive * hk
        alive = alive * (1.0 - hk)
        failures.append(lost)
        survivors.append(alive)
    return survivors, failures


@dataclass(frozen=True, eq=False)
class StepCurve:
    """Right-continuous step function with optional pointwise CI bounds.

    Before the first point the curve sits at its baseline: 1 for
    ``kind="survival"``, 0 for ``kind="cumulative_hazard"``. Absent bounds
    are NaN.
    """

    time: np.ndarray
    value: np.ndarray
    lower: np.ndarray = None
    upper: np.ndarray = None
    kind: str = "survival"
    baseline: float = field(default=None)

    def __post_init__(self):
        if self.kind not in ("survival", "cumulative_hazard"):
            raise InvalidInputError(f"unknown curve kind {self.kind!r}")
        time = _frozen(self.time, float)
        value = _frozen(self.value, float)
        nan = np.full(time.shape, np.nan)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "lower", _frozen(nan if self.lower is None else self.lower, float))
        object.__setattr__(self, "upper", _frozen(nan if self.upper is None else self.upper, float))
        if self.baseline is None:
            object.__setattr__(self, "baseline", 1.0 if self.kind == "survival" else 0.0)

    def __len__(self):
        return int(self.time.size)

    @property
    def points(self):
        def opt(x):
            return None if np.isnan(x) else float(x)

        return [
            (float(t), float(v), opt(lo), opt(hi))
            for t, v, lo, hi in zip(self.time, self.value, self.lower, self.upper)
        ]

    def __call__(self, t):
        """Evaluate the step function at time(s) `t`."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.time, t, side="right") - 1
        out = np.where(idx >= 0, self.value[np.maximum(idx, 0)] if len(self) else 0.0, self.baseline)
        return out if out.ndim else float(out)

    def left_limit(self, t):
        """Value just before `t`."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.time, t, side="left") - 1
        out = np.where(idx >= 0, self.value[np.maximum(idx, 0)] if len(self) else 0.0, self.baseline)
        return out if out.ndim else float(out)
