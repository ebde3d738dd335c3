"""Hot inner loops, in a vectorised numpy form and a numba form.

The numba form is used when numba imports cleanly and the environment
variable ``CHURNKIT_DISABLE_NUMBA`` is unset (or ``0``). Both forms are
always importable under explicit names (``*_numpy`` / ``*_numba``) so the
test-suite and ``benchmarks/bench_kernels.py`` can compare them directly.
Integer outputs agree exactly; float outputs agree up to summation order.
"""

import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("CHURNKIT_DISABLE_NUMBA", "0") in ("", "0")

UNIFORM, EPANECHNIKOV, GAUSSIAN = 0, 1, 2
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# floor(t / w) misplaces t = k * w when the division rounds just below k
_BIN_EPS = 1e-12


# --------------------------------------------------------------------------
# risk-set counting


def risk_counts_numpy(durations, events, at):
    """Count subjects at risk and events at each time in `at`.

    `durations` must be sorted ascending, `events` is the matching boolean
    event indicator. A subject is at risk at t when its duration is >= t,
    which keeps censorings tied with t in the risk set.
    """
    n = durations.shape[0] - np.searchsorted(durations, at, side="left")
    event_times = durations[events]
    d = np.searchsorted(event_times, at, side="right") - np.searchsorted(
        event_times, at, side="left"
    )
    return n.astype(np.int64), d.astype(np.int64)


def _risk_counts_loop(durations, events, at):
    m = durations.shape[0]
    k = at.shape[0]
    n = np.empty(k, dtype=np.int64)
    d = np.zeros(k, dtype=np.int64)
    i = 0
    for j in range(k):
        t = at[j]
        while i < m and durations[i] < t:
            i += 1
        n[j] = m - i
        r = i
        while r < m and durations[r] == t:
            if events[r]:
                d[j] += 1
            r += 1
    return n, d


# --------------------------------------------------------------------------
# kernel smoothing of hazard increments


def _kernel_values(u, kind):
    if kind == UNIFORM:
        return np.where(np.abs(u) <= 1.0, 0.5, 0.0)
    if kind == EPANECHNIKOV:
        return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    return _INV_SQRT_2PI * np.exp(-0.5 * u * u)


def kernel_smooth_numpy(grid, times, increments, bandwidth, kind, reflect):
    """(1/b) * sum_i K((t - t_i)/b) * q_i, optionally reflected at t = 0."""
    u = (grid[:, None] - times[None, :]) / bandwidth
    w = _kernel_values(u, kind)
    if reflect:
        w = w + _kernel_values((grid[:, None] + times[None, :]) / bandwidth, kind)
    return (w @ increments) / bandwidth


def _kernel_scalar(u, kind):
    if kind == UNIFORM:
        return 0.5 if abs(u) <= 1.0 else 0.0
    if kind == EPANECHNIKOV:
        return 0.75 * (1.0 - u * u) if abs(u) <= 1.0 else 0.0
    return _INV_SQRT_2PI * math.exp(-0.5 * u * u)


def _kernel_smooth_loop(grid, times, increments, bandwidth, kind, reflect):
    out = np.zeros(grid.shape[0])
    for g in range(grid.shape[0]):
        acc = 0.0
        for i in range(times.shape[0]):
            w = _kernel_scalar((grid[g] - times[i]) / bandwidth, kind)
            if reflect:
                w += _kernel_scalar((grid[g] + times[i]) / bandwidth, kind)
            acc += w * increments[i]
        out[g] = acc / bandwidth
    return out


# --------------------------------------------------------------------------
# piecewise-constant exposure


def bin_index_numpy(durations, width):
    return np.floor(durations / width * (1.0 + _BIN_EPS)).astype(np.int64)


def bin_exposure_numpy(durations, events, width, nbins):
    """Events and time at risk per bin [k*w, (k+1)*w).

    Every subject contributes a full `width` to each bin it outlives and the
    remainder to the bin holding its duration.
    """
    k = np.minimum(bin_index_numpy(durations, width), nbins - 1)
    partial = durations - k * width
    ends_here = np.bincount(k, minlength=nbins)
    outlive = ends_here[::-1].cumsum()[::-1] - ends_here
    exposure = outlive * width + np.bincount(k, weights=partial, minlength=nbins)
    d = np.bincount(k[events], minlength=nbins).astype(np.int64)
    return d, exposure


def _bin_exposure_loop(durations, events, width, nbins):
    d = np.zeros(nbins, dtype=np.int64)
    exposure = np.zeros(nbins)
    for i in range(durations.shape[0]):
        t = durations[i]
        k = int(math.floor(t / width * (1.0 + _BIN_EPS)))
        if k > nbins - 1:
            k = nbins - 1
        for j in range(k):
            exposure[j] += width
        exposure[k] += t - k * width
        if events[i]:
            d[k] += 1
    return d, exposure


if HAVE_NUMBA:
    _kernel_scalar = njit(cache=True)(_kernel_scalar)
    risk_counts_numba = njit(cache=True)(_risk_counts_loop)
    kernel_smooth_numba = njit(cache=True)(_kernel_smooth_loop)
    bin_exposure_numba = njit(cache=True)(_bin_exposure_loop)
else:  # pragma: no cover
    risk_counts_numba = kernel_smooth_numba = bin_exposure_numba = None


if USE_NUMBA:
    risk_counts = risk_counts_numba
    kernel_smooth = kernel_smooth_numba
    bin_exposure = bin_exposure_numba
else:
    risk_counts = risk_counts_numpy
    kernel_smooth = kernel_smooth_numpy
    bin_exposure = bin_exposure_numpy


def backend():
    """Name of the active implementation: ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
