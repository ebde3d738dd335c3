"""Nonparametric hazard rates: kernel-smoothed Nelson-Aalen and binned rates."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import Cohort, build_event_table, sorted_arrays
from .errors import InvalidInputError

KERNELS = {
    "uniform": _kernels.UNIFORM,
    "epanechnikov": _kernels.EPANECHNIKOV,
    "gaussian": _kernels.GAUSSIAN,
}

DEFAULT_GRID_POINTS = 256


@dataclass(frozen=True)
class KernelSpec:
    """Kernel shape and bandwidth (hours). ``bandwidth=None`` picks a default."""

    kind: str = "epanechnikov"
    bandwidth: float = None

    def __post_init__(self):
        kind = str(self.kind).lower()
        if kind not in KERNELS:
            raise InvalidInputError(f"unknown kernel {self.kind!r}; expected one of {sorted(KERNELS)}")
        object.__setattr__(self, "kind", kind)
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise InvalidInputError(f"bandwidth must be positive, got {self.bandwidth!r}")

    def kernel(self, u):
        """K(u) for the configured shape."""
        return _kernels._kernel_values(np.asarray(u, dtype=float), KERNELS[self.kind])


@dataclass(frozen=True, eq=False)
class HazardCurve:
    grid: np.ndarray
    values: np.ndarray
    bandwidth: float = None
    kind: str = None

    def __len__(self):
        return int(self.grid.size)


@dataclass(frozen=True, eq=False)
class PiecewiseRates:
    """Constant hazard per bin ``[k*w, (k+1)*w)``.

    ``rate`` is NaN where a bin has no exposure.
    """

    bin_width: float
    edges: np.ndarray
    events: np.ndarray
    exposure: np.ndarray
    rate: np.ndarray

    def __len__(self):
        return int(self.events.size)

    @property
    def rows(self):
        return [
            (float(lo), int(d), float(t), None if np.isnan(r) else float(r))
            for lo, d, t, r in zip(self.edges[:-1], self.events, self.exposure, self.rate)
        ]


def default_bandwidth(table):
    """A eighth of the span of event times."""
    if len(table) < 2 or table.time[-1] == table.time[0]:
        raise InvalidInputError("cannot pick a default bandwidth from fewer than two event times")
    return float(table.time[-1] - table.time[0]) / 8.0


def default_grid(table, points=DEFAULT_GRID_POINTS):
    end = float(table.time[-1]) if len(table) else 1.0
    return np.linspace(0.0, end, points)


def kernel_hazard(table, spec=None, grid=None, boundary="reflect"):
    """Kernel-smoothed hazard (1/b) * sum K((t - t_i)/b) * d_i/n_i.

    Parameters
    ----------
    table : EventTable or Cohort
    spec : KernelSpec, optional
        Defaults to an Epanechnikov kernel with :func:`default_bandwidth`.
    grid : array_like, optional
        Ascending evaluation times; defaults to 256 points on
        ``[0, last event time]``.
    boundary : {"reflect", "none"}
        ``"reflect"`` folds kernel mass lying below t = 0 back onto the
        positive axis by adding K((t + t_i)/b), so no hazard mass is lost at
        the origin.
    """
    if isinstance(table, Cohort):
        table = build_event_table(table)
    spec = spec or KernelSpec()
    if boundary not in ("reflect", "none"):
        raise InvalidInputError(f"boundary must be 'reflect' or 'none', got {boundary!r}")
    b = spec.bandwidth if spec.bandwidth is not None else default_bandwidth(table)
    grid = default_grid(table) if grid is None else np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise InvalidInputError("evaluation grid is empty")
    if (np.diff(grid) <= 0).any():
        raise InvalidInputError("evaluation grid must be strictly ascending")
    values = _kernels.kernel_smooth(
        grid,
        np.ascontiguousarray(table.time, dtype=float),
        np.ascontiguousarray(table.fraction if len(table) else np.empty(0), dtype=float),
        float(b),
        KERNELS[spec.kind],
        boundary == "reflect",
    )
    return HazardCurve(grid=grid, values=np.maximum(values, 0.0), bandwidth=float(b), kind=spec.kind)


def piecewise_exponential(cohort, bin_width=1.0):
    """Events, exposure and rate d/T in consecutive bins of `bin_width` hours.

    Bins run from 0 up to the bin holding the longest duration. An event
    exactly on a boundary belongs to the later bin.
    """
    if not bin_width > 0:
        raise InvalidInputError(f"bin width must be positive, got {bin_width!r}")
    if not isinstance(cohort, Cohort):
        cohort = Cohort.from_observations(cohort)
    durations, events = sorted_arrays(cohort)
    if durations.size == 0:
        empty = np.empty(0)
        return PiecewiseRates(bin_width, np.zeros(1), np.empty(0, dtype=np.int64), empty, empty)
    nbins = int(_kernels.bin_index_numpy(durations[-1:], bin_width)[0]) + 1
    d, exposure = _kernels.bin_exposure(
        np.ascontiguousarray(durations), np.ascontiguousarray(events), float(bin_width), nbins
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(exposure > 0, d / exposure, np.nan)
    edges = np.arange(nbins + 1) * float(bin_width)
    return PiecewiseRates(bin_width, edges, d, exposure, rate)
