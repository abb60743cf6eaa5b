"""Unit Tests for Orbit Diagnostics"""
import math

import numpy as np
import pytest

from src.logic.analytics.orbit_diagnostics import OrbitDiagnostics
from src.logic.data_models.operators import HermitianOperator
from src.logic.data_models.reports import FiniteRankProjection, RageReport
from src.logic.utils.errors import GridTooCoarse, HorizonTooShort, TimeNotOnGrid


@pytest.fixture
def diagnostics():
    """Provide an OrbitDiagnostics instance."""
    return OrbitDiagnostics()


@pytest.fixture
def circle_orbit(orbit_factory):
    """psi(t) = e^{-it} (1, 0) on [0, 8 pi] with 400 samples per revolution."""
    return orbit_factory.from_function(
        lambda t: np.array([np.exp(-1j * t), 0.0]), 8 * math.pi, 2 * math.pi / 400
    )


class TestAlmostPeriodicScan:
    """Test suite for ap_scan."""

    def test_single_frequency_is_consistent(self, diagnostics, circle_orbit):
        """Test: tau = 2 pi k are exact periods and the largest gap stays below 2 pi"""
        report = diagnostics.ap_scan(circle_orbit, 0.1, 4 * math.pi)

        assert report.verdict == "AP-consistent"
        assert report.deviations[399] < 1e-12
        assert report.taus[399] == pytest.approx(2 * math.pi)
        assert report.max_gap <= 2 * math.pi
        assert report.relative_density_length == pytest.approx(report.max_gap + report.step)
        assert report.witness is None

    def test_leading_run_is_trivial(self, diagnostics, circle_orbit):
        """Test: Small shifts accepted by continuity are not almost periods"""
        report = diagnostics.ap_scan(circle_orbit, 0.1, 4 * math.pi)

        assert min(report.almost_periods) > 1.0

    def test_chirp_is_violating(self, diagnostics, orbit_factory):
        """Test: e^{i t^2} over horizon 100 with eps = 0.5 has no almost period"""
        orbit = orbit_factory.from_function(lambda t: np.exp(1j * t * t), 100.0, 0.02)
        report = diagnostics.ap_scan(orbit, 0.5, 50.0)

        assert report.verdict == "violating-witness"
        assert report.almost_periods == []
        assert report.witness.deviation > 0.5
        assert report.max_gap == pytest.approx(50.0)
        assert report.relative_density_length is None

    def test_grid_too_coarse(self, diagnostics, circle_orbit):
        """Test: h ||H|| ||psi|| > eps / 4 -> GridTooCoarse"""
        with pytest.raises(GridTooCoarse):
            diagnostics.ap_scan(circle_orbit, 0.1, math.pi, generator_norm=10.0)

    def test_tau_max_beyond_half_horizon(self, diagnostics, circle_orbit):
        """Test: tau_max > T_max / 2 -> HorizonTooShort"""
        with pytest.raises(HorizonTooShort):
            diagnostics.ap_scan(circle_orbit, 0.1, 5 * math.pi)


class TestCoveringNumber:
    """Test suite for covering_number."""

    def test_constant_orbit(self, diagnostics, orbit_factory):
        """Test: Constant orbit -> N = 1 for every horizon"""
        orbit = orbit_factory.from_function(lambda t: np.array([1.0, 0.0]), 10.0, 0.1)
        report = diagnostics.covering_number(orbit, 0.1, [1.0, 2.0, 4.0, 8.0])

        assert report.counts == [1, 1, 1, 1]
        assert report.saturated
        assert report.saturation_horizon == pytest.approx(1.0)

    def test_circle_saturates_after_one_revolution(self, diagnostics, circle_orbit):
        """Test: N(eps, 2T) = N(eps, T) once T >= 2 pi, below the chord bound"""
        epsilon = 0.5
        horizons = [math.pi, 2 * math.pi, 4 * math.pi, 8 * math.pi]
        report = diagnostics.covering_number(circle_orbit, epsilon, horizons)

        assert report.counts[0] < report.counts[1]
        assert report.counts[1] == report.counts[2] == report.counts[3]
        assert report.saturation_horizon == pytest.approx(2 * math.pi)
        assert report.counts[-1] <= math.ceil(math.pi / math.asin(epsilon / 2)) + 1

    def test_horizon_beyond_span(self, diagnostics, circle_orbit):
        """Test: Horizon longer than the orbit -> HorizonTooShort"""
        with pytest.raises(HorizonTooShort):
            diagnostics.covering_number(circle_orbit, 0.5, [10 * math.pi])

    def test_horizons_must_ascend(self, diagnostics, circle_orbit):
        """Test: Descending horizons -> ValueError"""
        with pytest.raises(ValueError):
            diagnostics.covering_number(circle_orbit, 0.5, [2.0, 1.0])


class TestTailEscape:
    """Test suite for tail_escape."""

    @pytest.fixture
    def probe(self):
        """A = diag(0, 1, 2)."""
        return HermitianOperator(matrix=np.diag([0.0, 1.0, 2.0]))

    def test_lowest_eigenvector_never_escapes(self, diagnostics, orbit_factory, probe):
        """Test: Orbit confined to the lowest A-eigenvector -> beta = 0"""
        orbit = orbit_factory.from_function(
            lambda t: np.array([np.exp(-1j * t), 0.0, 0.0]), 5.0, 0.1
        )
        report = diagnostics.tail_escape(orbit, probe, [0.5, 1.5], label="diag")

        assert report.beta == [0.0, 0.0]
        assert report.trend == "to-zero"
        assert report.probe == "diag"

    def test_top_eigenvector_escapes(self, diagnostics, orbit_factory, probe):
        """Test: Orbit on the top A-eigenvector -> beta = 1, trend to-one"""
        orbit = orbit_factory.from_function(lambda t: np.array([0.0, 0.0, 1.0]), 5.0, 0.1)
        report = diagnostics.tail_escape(orbit, probe, [0.5, 1.5])

        assert report.beta == pytest.approx([1.0, 1.0])
        assert report.trend == "to-one"

    def test_commuting_case_is_time_independent(self, diagnostics, orbit_factory, probe):
        """Test: [A, H0] = 0 -> beta(E) = ||F(A > E) psi||"""
        orbit = orbit_factory.from_function(
            lambda t: np.array([np.exp(0j), 0.0, np.exp(-2j * t)]) / np.sqrt(2), 5.0, 0.1
        )
        report = diagnostics.tail_escape(orbit, probe, [0.5, 2.5])

        assert report.beta[0] == pytest.approx(np.sqrt(0.5))
        assert report.beta[1] == 0.0
        assert report.trend == "to-zero"


class TestRageAverage:
    """Test suite for rage_average."""

    def test_eigenvector_has_no_decay(self, diagnostics, circle_orbit):
        """Test: C = |psi><psi| for an eigenvector orbit -> a(tau) = 1"""
        projection = FiniteRankProjection.from_state(np.array([1.0, 0.0]))
        report = diagnostics.rage_average(circle_orbit, projection, [math.pi, 2 * math.pi])

        assert report.averages == pytest.approx([1.0, 1.0])
        assert report.rank == 1
        assert not report.strictly_decreasing()

    def test_rounding_noise_is_not_decay(self):
        """Test: Averages equal to 1 up to rounding -> not strictly decreasing"""
        report = RageReport(
            projection="state",
            rank=1,
            taus=[math.pi, 2 * math.pi, 4 * math.pi],
            averages=[0.9999999999999964, 0.9999999999999954, 1.0000000000000153],
        )

        assert not report.strictly_decreasing()

    def test_genuine_decay(self):
        """Test: Clear drops at every tau -> strictly decreasing"""
        report = RageReport(
            projection="sites[0]", rank=1, taus=[1.0, 2.0, 3.0], averages=[1.0, 0.5, 0.2]
        )

        assert report.strictly_decreasing()

    def test_orthogonal_projection_vanishes(self, diagnostics, circle_orbit):
        """Test: Orbit orthogonal to ran C -> a(tau) = 0"""
        projection = FiniteRankProjection.from_sites(2, [1])
        report = diagnostics.rage_average(circle_orbit, projection, [math.pi])

        assert report.averages == [0.0]
        assert report.projection == "sites[1]"

    def test_tau_off_grid(self, diagnostics, circle_orbit):
        """Test: tau not a grid multiple -> TimeNotOnGrid"""
        projection = FiniteRankProjection.from_sites(2, [0])

        with pytest.raises(TimeNotOnGrid):
            diagnostics.rage_average(circle_orbit, projection, [0.001])
        with pytest.raises(TimeNotOnGrid):
            diagnostics.rage_average(circle_orbit, projection, [-1.0])


class TestDerivativeOrbit:
    """Test suite for derivative_orbit."""

    def test_circle_derivative_norm(self, circle_orbit):
        """Test: ||d/dt e^{-it}|| = 1 up to sin(h)/h"""
        derivative = OrbitDiagnostics.derivative_orbit(circle_orbit)
        h = circle_orbit.grid.h

        np.testing.assert_allclose(derivative.norms(), np.sin(h) / h, atol=1e-12)
        assert derivative.grid.count == circle_orbit.grid.count - 2
