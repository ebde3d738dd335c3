import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from churnkit.core import EventTable, build_event_table
from churnkit.errors import InvalidInputError
from churnkit.hazard import (
    DEFAULT_GRID_POINTS,
    KERNELS,
    KernelSpec,
    default_bandwidth,
    default_grid,
    kernel_hazard,
    piecewise_exponential,
)
from churnkit.nonparam import nelson_aalen
from churnkit.parametric import Family, fit_exponential
from churnkit.sim import SimSpec, simulate_cohort

from .strategies import cohort_of, cohorts


class TestKernels:
    @pytest.mark.parametrize("kind", sorted(KERNELS))
    def test_integrates_to_one(self, kind):
        k = KernelSpec(kind, 1.0).kernel
        lo, hi = (-np.inf, np.inf) if kind == "gaussian" else (-1.0, 1.0)
        area, _ = integrate.quad(lambda u: float(k(u)), lo, hi)
        assert area == pytest.approx(1.0, abs=1e-9)

    def test_shapes(self):
        u = np.array([-1.5, -1.0, -0.5, 0.0, 0.5, 1.5])
        np.testing.assert_allclose(KernelSpec("epanechnikov").kernel(u), [0, 0, 0.5625, 0.75, 0.5625, 0])
        np.testing.assert_allclose(KernelSpec("uniform").kernel(u), [0, 0.5, 0.5, 0.5, 0.5, 0])
        assert KernelSpec("gaussian").kernel(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))

    def test_bad_spec(self):
        with pytest.raises(InvalidInputError):
            KernelSpec("triangular")
        for b in (0.0, -1.0):
            with pytest.raises(InvalidInputError):
                KernelSpec("uniform", b)


class TestKernelHazard:
    def test_uniform_covering_all_events(self, ten):
        curve = kernel_hazard(ten, KernelSpec("uniform", 12.0), [11.95], boundary="none")
        h_total = nelson_aalen(ten).cumulative_hazard[-1]
        assert curve.values[0] == pytest.approx(h_total / 24.0, abs=1e-12)
        assert curve.values[0] == pytest.approx(0.115, abs=1e-3)

    def test_zero_far_from_events(self):
        table = build_event_table(cohort_of([1.0, 2.0]))
        for kind in ("uniform", "epanechnikov"):
            assert kernel_hazard(table, KernelSpec(kind, 0.5), [10.0]).values[0] == 0.0

    def test_single_event_at_its_time(self):
        table = EventTable.from_rows([(4.0, 5, 1)])
        b = 2.0
        curve = kernel_hazard(table, KernelSpec("epanechnikov", b), [4.0], boundary="none")
        assert curve.values[0] == pytest.approx(0.75 * 0.2 / b)

    def test_reflection_adds_mirror_term(self):
        table = EventTable.from_rows([(0.5, 5, 1)])
        b = 2.0
        plain = kernel_hazard(table, KernelSpec("epanechnikov", b), [1.0], boundary="none").values[0]
        refl = kernel_hazard(table, KernelSpec("epanechnikov", b), [1.0]).values[0]
        mirror = 0.75 * (1 - (1.5 / b) ** 2) * 0.2 / b
        assert refl == pytest.approx(plain + mirror)

    def test_reflection_preserves_mass(self, ten):
        table = build_event_table(ten)
        grid = np.linspace(0.0, 30.0, 30001)
        curve = kernel_hazard(table, KernelSpec("epanechnikov", 2.0), grid)
        mass = integrate.trapezoid(curve.values, grid)
        assert mass == pytest.approx(nelson_aalen(table).cumulative_hazard[-1], rel=2e-3)

    @pytest.mark.parametrize("kind", ["gaussian", "epanechnikov", "uniform"])
    def test_mass_conservation_interior(self, kind):
        cohort = simulate_cohort(SimSpec(Family.weibull(0.2, 1.5), 300, censor_time=8.0, seed=2))
        table = build_event_table(cohort.subset(cohort.durations > 1.0))
        grid = np.linspace(-5.0, 15.0, 20001)
        curve = kernel_hazard(table, KernelSpec(kind, 0.8), grid, boundary="none")
        mass = integrate.trapezoid(curve.values, grid)
        assert mass == pytest.approx(nelson_aalen(table).cumulative_hazard[-1], rel=0.02)

    @settings(max_examples=40)
    @given(
        st.lists(st.integers(min_value=1, max_value=20), min_size=1, max_size=8, unique=True),
        st.sampled_from(sorted(KERNELS)),
    )
    def test_linear_in_increments(self, times, kind):
        # rows (t, 2k, 1) and (t, k, 1) differ exactly by a factor 2 in d/n
        times = sorted(t / 2 for t in times)
        base = EventTable.from_rows([(t, 40 - 2 * i, 1) for i, t in enumerate(times)])
        twice = EventTable.from_rows([(t, 20 - i, 1) for i, t in enumerate(times)])
        grid = np.linspace(0.0, 12.0, 50)
        spec = KernelSpec(kind, 1.5)
        np.testing.assert_allclose(
            kernel_hazard(twice, spec, grid).values, 2 * kernel_hazard(base, spec, grid).values, rtol=1e-12
        )

    def test_defaults(self, ten):
        table = build_event_table(ten)
        curve = kernel_hazard(table)
        assert len(curve) == DEFAULT_GRID_POINTS
        assert curve.grid[0] == 0.0 and curve.grid[-1] == table.time[-1]
        assert curve.bandwidth == pytest.approx((table.time[-1] - table.time[0]) / 8)
        assert curve.kind == "epanechnikov"
        assert (curve.values >= 0).all() and (np.diff(curve.grid) > 0).all()
        np.testing.assert_array_equal(default_grid(table, 5), np.linspace(0, table.time[-1], 5))
        assert default_bandwidth(table) == curve.bandwidth

    def test_bad_inputs(self, ten):
        with pytest.raises(InvalidInputError):
            kernel_hazard(ten, grid=[2.0, 1.0])
        with pytest.raises(InvalidInputError):
            kernel_hazard(ten, grid=[])
        with pytest.raises(InvalidInputError):
            kernel_hazard(ten, boundary="mirror")
        with pytest.raises(InvalidInputError):
            default_bandwidth(build_event_table(cohort_of([1.0])))


class TestPiecewise:
    def test_ten_players_one_hour_bins(self, ten):
        pw = piecewise_exponential(ten, 1.0)
        assert len(pw) == 12
        assert pw.events[0] == 4
        assert pw.exposure[0] == pytest.approx(6.38, abs=0.01)
        assert pw.rate[0] == pytest.approx(0.63, abs=0.01)
        assert pw.rate[-1] == pytest.approx(1.09, abs=0.01)
        assert pw.events[-1] == 1 and pw.exposure[-1] == pytest.approx(0.92, abs=0.01)
        empty = pw.events == 0
        assert empty.any() and (pw.rate[empty] == 0.0).all()

    def test_event_on_boundary_goes_to_later_bin(self):
        pw = piecewise_exponential(cohort_of([1.0, 3.0]), 1.0)
        assert pw.events.tolist() == [0, 1, 0, 1]

    def test_zero_exposure_rate_absent(self):
        pw = piecewise_exponential(cohort_of([0.0]), 1.0)
        assert pw.exposure.tolist() == [0.0]
        assert math.isnan(pw.rate[0])
        assert pw.rows[0][3] is None

    def test_single_bin_is_exponential_mle(self, ten):
        pw = piecewise_exponential(ten, 100.0)
        assert len(pw) == 1
        assert pw.rate[0] == pytest.approx(fit_exponential(ten).params[0], rel=1e-12)

    def test_bad_width(self, ten):
        with pytest.raises(InvalidInputError):
            piecewise_exponential(ten, 0.0)

    @given(cohorts(min_size=1), st.sampled_from([0.3, 0.5, 1.0, 2.5]))
    def test_exposure_sums_to_total_time(self, cohort, width):
        pw = piecewise_exponential(cohort, width)
        assert pw.exposure.sum() == pytest.approx(cohort.durations.sum(), abs=1e-9)
        assert pw.events.sum() == np.count_nonzero(cohort.events)
        ok = pw.exposure > 0
        np.testing.assert_allclose(pw.rate[ok], pw.events[ok] / pw.exposure[ok])
