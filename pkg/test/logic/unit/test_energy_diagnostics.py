"""Unit Tests for Energy Diagnostics"""
import numpy as np
import pytest

from src.logic.analytics.energy_diagnostics import EnergyDiagnostics
from src.logic.analytics.floquet_analyzer import FloquetAnalyzer
from src.logic.data_models.model_spec import BoundedPerturbationParams, OperatorSpec
from src.logic.data_models.operators import HermitianOperator
from src.logic.data_models.orbit import TimeGrid
from src.logic.data_models.reports import EnergySeries
from src.logic.utils.errors import DerivativeNotAvailable, GridMismatch, HorizonTooShort


@pytest.fixture
def energy(engine):
    """Provide EnergyDiagnostics on the shared engine."""
    return EnergyDiagnostics(engine=engine)


@pytest.fixture
def perturbed():
    """H = diag(0, 1) + 0.3 sigma_x sin t + 0.2 sigma_z / (1 + |t|)^2."""
    return BoundedPerturbationParams(
        h0=[0.0, 1.0],
        b1=OperatorSpec(kind="pauli_x", scale=0.3),
        b2=OperatorSpec(kind="pauli_z", scale=0.2),
    )


class TestEnergySeries:
    """Test suite for energy series construction."""

    def test_identity_probe_is_norm(self, energy, propagator, two_level):
        """Test: A = Id -> E = ||psi||^2"""
        grid = TimeGrid.from_span(0.0, 5.0, 0.05)
        orbit = propagator.propagate(two_level, np.array([0.6, 0.8j]), grid)
        series = energy.energy_series(orbit, HermitianOperator(matrix=np.eye(2)), label="Id")

        np.testing.assert_allclose(series.values, 1.0, atol=1e-12)
        assert series.probe == "Id"
        assert series.max_imaginary < 1e-12

    def test_autonomous_free_energy_conserved(self, energy, propagator, model_factory):
        """Test: A = H0 of an autonomous model -> constant series"""
        model = model_factory.create_autonomous([0.0, 1.5, 2.0])
        grid = TimeGrid.from_span(0.0, 10.0, 0.1)
        orbit = propagator.propagate(model, np.ones(3) / np.sqrt(3), grid)
        _, values = energy.free_energy_series(orbit, model).as_arrays()

        np.testing.assert_allclose(values, values[0], atol=1e-12)

    def test_schrodinger_series_matches_generator(self, energy, propagator, two_level):
        """Test: Re <psi, i dpsi/dt> agrees with <psi, H psi> up to O(h^2)"""
        grid = TimeGrid.from_span(0.0, two_level.period, two_level.period / 200)
        orbit = propagator.propagate(two_level, np.array([1.0, 0.0]), grid)
        schrodinger = energy.schrodinger_energy_series(orbit)
        generator = energy.generator_energy_series(orbit, two_level)

        np.testing.assert_allclose(schrodinger.values, generator.values[1:-1], atol=1e-3)
        assert schrodinger.norm_sq == pytest.approx(1.0)


class TestEnergyBounds:
    """Test suite for the derivative identity and drift bounds."""

    def test_derivative_identity_second_order(self, energy, propagator, two_level):
        """Test: Halving h divides the defect by about four"""
        defects = []
        for h in (0.02, 0.01):
            grid = TimeGrid.from_span(0.0, 6.0, h)
            orbit = propagator.propagate(two_level, np.array([1.0, 0.0]), grid)
            defects.append(energy.energy_derivative_check(orbit, two_level))

        assert defects[1] < defects[0] / 3

    def test_derivative_identity_constant_v(self, energy, propagator, model_factory):
        """Test: Constant V -> both sides vanish"""
        model = model_factory.create_autonomous(
            [0.0, 1.0], coupling=OperatorSpec(kind="pauli_x", scale=0.5)
        )
        grid = TimeGrid.from_span(0.0, 5.0, 0.05)
        orbit = propagator.propagate(model, np.array([1.0, 0.0]), grid)

        assert energy.energy_derivative_check(orbit, model) < 1e-10

    def test_derivative_not_available(self, energy, propagator, golden_flow):
        """Test: Propagator-only model -> DerivativeNotAvailable"""
        grid = TimeGrid.from_span(0.0, 2.0, 0.1)
        orbit = propagator.propagate(golden_flow, np.array([1.0, 0.0]), grid)

        with pytest.raises(DerivativeNotAvailable):
            energy.energy_derivative_check(orbit, golden_flow)
        with pytest.raises(DerivativeNotAvailable):
            energy.energy_drift_bound(orbit, golden_flow)

    def test_drift_within_derivative_integral(self, energy, propagator, perturbed):
        """Test: |E(t) - E(0)| <= int ||V'|| <= t sup ||V'||"""
        grid = TimeGrid.from_span(0.0, 20.0, 0.005)
        orbit = propagator.propagate(perturbed, np.array([1.0, 0.0]), grid)
        report = energy.energy_drift_bound(orbit, perturbed)

        assert report.integral_violation <= 1e-6
        assert report.sup_violation <= 1e-6
        assert report.sup_derivative_norm <= 0.3 + 0.4

    def test_bounded_v_equivalence(self, energy, propagator, perturbed):
        """Test: max |E - E0| <= sup ||V|| ||psi0||^2 for unit and scaled states"""
        grid = TimeGrid.from_span(0.0, 10.0, 0.01)
        for psi0, norm_sq in ((np.array([1.0, 0.0]), 1.0), (np.array([2.0, 0.0]), 4.0)):
            orbit = propagator.propagate(perturbed, psi0, grid)
            series = energy.generator_energy_series(orbit, perturbed)
            free = energy.free_energy_series(orbit, perturbed)
            sup_v = energy.sup_potential_norm(perturbed, orbit)

            assert series.norm_sq == pytest.approx(norm_sq)
            assert energy.bounded_v_equivalence(series, free, sup_v) <= 1e-9

    def test_bounded_v_zero_potential(self, energy, propagator, model_factory):
        """Test: V = 0 -> identical series"""
        model = model_factory.create_autonomous([0.0, 1.0])
        grid = TimeGrid.from_span(0.0, 5.0, 0.1)
        orbit = propagator.propagate(model, np.array([0.6, 0.8]), grid)
        series = energy.generator_energy_series(orbit, model)
        free = energy.free_energy_series(orbit, model)

        assert energy.bounded_v_equivalence(series, free, 0.0) == 0.0

    def test_bounded_v_grid_mismatch(self, energy):
        """Test: Different sample times -> GridMismatch"""
        a = EnergySeries(probe="H", times=[0.0, 1.0], values=[1.0, 1.0])
        b = EnergySeries(probe="H0", times=[0.0, 2.0], values=[1.0, 1.0])

        with pytest.raises(GridMismatch):
            energy.bounded_v_equivalence(a, b, 1.0)

    def test_cross_energy_covariance(self, energy, propagator, two_level):
        """Test: E_jk(t + T) = e^{i(alpha_j - alpha_k)} E_jk(t) for Floquet orbits"""
        period = two_level.period
        spectrum = FloquetAnalyzer(propagator=propagator).floquet_spectrum(
            propagator.monodromy(two_level), period
        )
        grid = TimeGrid.from_span(0.0, 4 * period, period / 50)
        orbits = [propagator.propagate(two_level, spectrum.vector(j), grid) for j in range(2)]
        defect = energy.cross_energy_covariance(
            orbits[0], orbits[1], spectrum.phases[0], spectrum.phases[1], period, model=two_level
        )

        assert defect < 1e-10


class TestStabilityVerdict:
    """Test suite for stability_verdict."""

    @pytest.fixture
    def times(self):
        """Log-spaced times over three decades."""
        return np.logspace(0, 3, 400)

    def test_constant_series_is_bounded(self, energy, times):
        """Test: Constant series -> bounded-consistent"""
        series = EnergySeries(probe="A", times=times.tolist(), values=[2.0] * times.size)
        report = energy.stability_verdict(series)

        assert report.verdict == "bounded-consistent"
        assert report.decades == pytest.approx(3.0)

    def test_linear_series_grows(self, energy, times):
        """Test: E(t) = 1 + t -> growth with exponent near 1"""
        series = EnergySeries(probe="A", times=times.tolist(), values=(1.0 + times).tolist())
        report = energy.stability_verdict(series)

        assert report.verdict == "growth"
        assert report.growth_exponent == pytest.approx(1.0, abs=0.05)
        assert report.fit_r2 > 0.99

    def test_short_horizon(self, energy):
        """Test: Fewer than two decades -> HorizonTooShort"""
        times = np.linspace(1.0, 50.0, 100)
        series = EnergySeries(probe="A", times=times.tolist(), values=[1.0] * times.size)

        with pytest.raises(HorizonTooShort):
            energy.stability_verdict(series)
