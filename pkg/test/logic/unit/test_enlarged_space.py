"""Unit Tests for the Enlarged Space Analyzer"""
import math

import numpy as np
import pytest

from src.logic.analytics.enlarged_space import (
    EnlargedSpaceAnalyzer,
    continued_fraction,
    convergents,
)
from src.logic.data_models.enlarged import EnlargedState, TorusGrid
from src.logic.data_models.operators import HermitianOperator
from src.logic.data_models.orbit import TimeGrid
from src.logic.utils.errors import (
    DimensionTooLarge,
    GridMismatch,
    NotAnEigenvector,
    ShiftMismatch,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@pytest.fixture
def analyzer(propagator):
    """Provide an EnlargedSpaceAnalyzer on the shared propagator."""
    return EnlargedSpaceAnalyzer(propagator=propagator)


@pytest.fixture
def probe():
    """Dense Hermitian probe mixing both components."""
    return HermitianOperator(matrix=np.array([[1.0, 0.5], [0.5, -1.0]]))


def identity_samples(size, dim=2):
    return np.repeat(np.eye(dim, dtype=complex)[None, :, :], size, axis=0)


class TestContinuedFractions:
    """Test suite for continued fractions and convergents."""

    def test_golden_quotients(self):
        """Test: (sqrt5 - 1)/2 = [0; 1, 1, 1, ...]"""
        assert continued_fraction(GOLDEN, 6) == [0, 1, 1, 1, 1, 1]

    def test_golden_convergents_are_fibonacci(self):
        """Test: p/q = F_{k-1}/F_k"""
        assert convergents(GOLDEN, 7) == [(0, 1), (1, 1), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13)]

    def test_pi_convergents(self):
        """Test: Numerator first: 3/1, 22/7, 333/106, 355/113"""
        assert convergents(math.pi, 4) == [(3, 1), (22, 7), (333, 106), (355, 113)]

    def test_rational_terminates(self):
        """Test: 0.5 = [0; 2]"""
        assert continued_fraction(0.5, 10) == [0, 2]


class TestTorusGrid:
    """Test suite for torus grids."""

    def test_golden_grid(self, analyzer):
        """Test: q = 13 rotates by p = 8"""
        grid = analyzer.torus_grid(GOLDEN, 13)

        assert grid.shift == 8
        assert grid.spacing == pytest.approx(2 * math.pi / 13)

    def test_poor_approximation_rejected(self, analyzer):
        """Test: |alpha - p/q| > 1/q^2 -> ShiftMismatch"""
        with pytest.raises(ShiftMismatch):
            analyzer.torus_grid(0.5, 5)

    def test_model_grid_requires_rotation(self, analyzer, two_level):
        """Test: Non-quasiperiodic model -> ShiftMismatch"""
        with pytest.raises(ShiftMismatch):
            analyzer.model_grid(two_level, 8)


class TestGeneralizedFloquet:
    """Test suite for U_F on grid functions and its spectrum."""

    def test_identity_without_shift(self, analyzer):
        """Test: u1 = Id, p = 0 -> identity map"""
        grid = TorusGrid(size=4, shift=0)
        f = EnlargedState(values=np.arange(8, dtype=complex).reshape(4, 2))
        image = analyzer.generalized_floquet_apply(grid, identity_samples(4), f)

        np.testing.assert_array_equal(image.values, f.values)

    def test_pure_rotation_has_order_q(self, analyzer):
        """Test: u1 = Id, p = 1 -> cyclic rotation whose q-th power is the identity"""
        grid = TorusGrid(size=5, shift=1)
        u1 = identity_samples(5)
        f = EnlargedState(values=np.arange(10, dtype=complex).reshape(5, 2))
        image = analyzer.generalized_floquet_apply(grid, u1, f)

        np.testing.assert_array_equal(image.values[1], f.values[0])
        for _ in range(4):
            image = analyzer.generalized_floquet_apply(grid, u1, image)
        np.testing.assert_array_equal(image.values, f.values)

    def test_quasiperiodic_fibres(self, analyzer, golden_flow):
        """Test: (U_F f)(theta_j) = diag(e^{i theta_{j-p}}, e^{-i theta_{j-p}}) f for constant f"""
        grid = analyzer.model_grid(golden_flow, 13)
        u1 = analyzer.monodromy_samples(golden_flow, grid)
        vector = np.array([0.6, 0.8])
        image = analyzer.generalized_floquet_apply(grid, u1, EnlargedState.constant(13, vector))
        source = grid.thetas[(np.arange(13) - grid.shift) % 13]
        expected = np.stack([np.exp(1j * source) * 0.6, np.exp(-1j * source) * 0.8], axis=1)

        np.testing.assert_allclose(image.values, expected, atol=1e-12)

    def test_samples_must_fit_grid(self, analyzer):
        """Test: u1 with the wrong number of samples -> GridMismatch"""
        grid = TorusGrid(size=4, shift=1)
        f = EnlargedState.constant(4, np.array([1.0, 0.0]))

        with pytest.raises(GridMismatch):
            analyzer.generalized_floquet_apply(grid, identity_samples(3), f)

    def test_cyclic_shift_spectrum(self, analyzer):
        """Test: u1 = Id, p = 1 -> phases 2 pi k / q, each with multiplicity d"""
        grid = TorusGrid(size=5, shift=1)
        spectrum = analyzer.enlarged_spectrum(grid, identity_samples(5))
        labels = np.mod(np.round(spectrum.phases * 5 / (2 * math.pi)).astype(int), 5)

        assert np.bincount(labels, minlength=5).tolist() == [2, 2, 2, 2, 2]
        assert spectrum.residual < 1e-10

    def test_constant_diagonal_spectrum(self, analyzer):
        """Test: u1 = diag(e^{ic}, e^{-ic}), p = 0 -> phases {c, 2 pi - c}, multiplicity q"""
        c = 0.4
        grid = TorusGrid(size=3, shift=0)
        u1 = np.repeat(np.diag([np.exp(1j * c), np.exp(-1j * c)])[None, :, :], 3, axis=0)
        spectrum = analyzer.enlarged_spectrum(grid, u1)

        np.testing.assert_allclose(spectrum.phases, [c] * 3 + [2 * math.pi - c] * 3, atol=1e-12)

    def test_dense_limit(self, analyzer):
        """Test: q d beyond the dense limit -> DimensionTooLarge"""
        grid = TorusGrid(size=2049, shift=1)

        with pytest.raises(DimensionTooLarge):
            analyzer.floquet_matrix(grid, identity_samples(2049))

    def test_grid_cocycle_constant_u1(self, analyzer):
        """Test: Constant u1 without shift -> cocycle u1^k"""
        grid = TorusGrid(size=3, shift=0)
        rotation = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
        u1 = np.repeat(rotation[None, :, :], 3, axis=0)
        cocycle = analyzer.grid_cocycle(grid, u1, 3)

        np.testing.assert_allclose(cocycle[1], np.linalg.matrix_power(rotation, 3), atol=1e-14)

    def test_even_spacings(self, analyzer):
        """Test: Equally spaced phases -> unit spacings and a flat histogram"""
        grid = TorusGrid(size=32, shift=1)
        phases = 2 * math.pi * (np.arange(32) + 0.5) / 32
        statistics = analyzer.spacing_statistics(phases, grid)

        assert statistics.spacing_mean == pytest.approx(1.0)
        assert statistics.spacing_std == pytest.approx(0.0, abs=1e-12)
        assert statistics.histogram_deviation == 0.0


class TestEnlargedExpectations:
    """Test suite for B(A), A_f and their direct counterparts."""

    @pytest.fixture
    def toy(self, analyzer, model_factory):
        """Pure-point toy: theta-independent autonomous fibres on an unshifted grid."""
        model = model_factory.create_autonomous([0.2, 0.7])
        grid = analyzer.torus_grid(0.0, 8, 2 * math.pi)
        u1 = analyzer.monodromy_samples(model, grid)
        return model, grid, u1, analyzer.enlarged_spectrum(grid, u1)

    def test_b_matrix_constant_state(self, analyzer, probe):
        """Test: f_n = f_m = 1 (x) phi -> <phi, A phi>"""
        phi = np.array([0.6, 0.8])
        f = EnlargedState.constant(7, phi)

        assert analyzer.b_matrix(f, f, probe) == pytest.approx(np.vdot(phi, probe.matrix @ phi))

    def test_b_matrix_disjoint_support(self, analyzer):
        """Test: Disjoint components with A = Id -> 0"""
        f_n = EnlargedState.constant(4, np.array([1.0, 0.0]))
        f_m = EnlargedState.constant(4, np.array([0.0, 1.0]))

        assert analyzer.b_matrix(f_n, f_m, HermitianOperator(matrix=np.eye(2))) == 0.0

    def test_b_matrix_conjugate_symmetric(self, analyzer, probe):
        """Test: B_{n,m} = conj(B_{m,n})"""
        rng = np.random.default_rng(7)
        f_n = EnlargedState(values=rng.normal(size=(6, 2)) + 1j * rng.normal(size=(6, 2)))
        f_m = EnlargedState(values=rng.normal(size=(6, 2)) + 1j * rng.normal(size=(6, 2)))

        assert analyzer.b_matrix(f_n, f_m, probe) == pytest.approx(
            np.conj(analyzer.b_matrix(f_m, f_n, probe)), abs=1e-12
        )

    def test_b_matrix_grid_mismatch(self, analyzer, probe):
        """Test: States on different grids -> GridMismatch"""
        with pytest.raises(GridMismatch):
            analyzer.b_matrix(
                EnlargedState.constant(4, np.array([1.0, 0.0])),
                EnlargedState.constant(5, np.array([1.0, 0.0])),
                probe,
            )

    def test_single_eigenvector_series_is_constant(self, analyzer):
        """Test: f = f_1 -> A_f(t) = B_11"""
        series = analyzer.af_series(
            np.array([1.0]), np.array([0.3]), np.array([[0.25]]), np.linspace(0.0, 5.0, 11)
        )

        np.testing.assert_allclose(series, 0.25)

    def test_series_at_zero_is_expectation(self, analyzer, toy, probe):
        """Test: A_f(0) = <f, (1 (x) A) f>"""
        _, _, _, spectrum = toy
        states = [spectrum.state(0), spectrum.state(8)]
        f = EnlargedState(values=(states[0].values + states[1].values) / math.sqrt(2))
        coefficients = analyzer.expand(f, states)
        b = analyzer.b_matrix_full(states, probe)
        series = analyzer.af_series(coefficients, spectrum.quasienergies[[0, 8]], b, [0.0])

        assert series[0] == pytest.approx(analyzer.b_matrix(f, f, probe).real, abs=1e-12)

    def test_direct_series_free_fibres(self, analyzer, toy):
        """Test: f = 1 (x) phi_k with diagonal A -> constant <phi_k, A phi_k>"""
        model, grid, _, _ = toy
        probe = HermitianOperator(matrix=np.diag([2.0, -1.0]))
        f = EnlargedState.constant(8, np.array([0.0, 1.0]))
        times = TimeGrid.from_span(0.0, 20.0, 0.5)

        np.testing.assert_allclose(
            analyzer.af_direct(f, model, probe, times, grid), -1.0, atol=1e-12
        )

    def test_fiber_expectation_bounds(self, analyzer, toy):
        """Test: Per-fibre sup of a free state is its constant expectation"""
        model, grid, _, _ = toy
        probe = HermitianOperator(matrix=np.diag([2.0, -1.0]))
        f = EnlargedState.constant(8, np.array([1.0, 0.0]))
        times = TimeGrid.from_span(0.0, 10.0, 0.5)
        bounds = analyzer.fiber_expectation_bounds(f, model, probe, times, grid)

        assert bounds == pytest.approx([2.0] * 8, abs=1e-12)

    def test_af_identity_on_toy(self, analyzer, toy, probe):
        """Test: Eigen-expansion and fibrewise propagation agree within 1e-8"""
        model, _, _, spectrum = toy
        states = [spectrum.state(0), spectrum.state(8)]
        f = EnlargedState(values=(states[0].values + states[1].values) / math.sqrt(2))
        times = TimeGrid.from_span(0.0, 200.0, 0.5)
        report = analyzer.af_identity(f, spectrum, [0, 8], model, probe, times, epsilon=0.05)

        assert report.max_discrepancy <= 1e-8
        assert report.b_hermiticity_defect < 1e-12
        assert report.ap.consistent
        assert report.stability.verdict == "bounded-consistent"


class TestEigenFlow:
    """Test suite for eigen_flow_check."""

    def test_identity_holds_exactly(self, analyzer):
        """Test: u1 = Id, p = 0, constant f -> zero defect"""
        grid = TorusGrid(size=4, shift=0)
        f = EnlargedState.constant(4, np.array([1.0, 0.0]))
        report = analyzer.eigen_flow_check(grid, identity_samples(4), f, 0.0, 10)

        assert report.max_defect == 0.0
        assert report.flow_speed == 0.0

    def test_toy_eigenpair(self, analyzer, model_factory):
        """Test: Pure-point eigenpair keeps the identity over 100 periods"""
        model = model_factory.create_autonomous([0.2, 0.7])
        grid = analyzer.torus_grid(0.0, 8, 2 * math.pi)
        u1 = analyzer.monodromy_samples(model, grid)
        spectrum = analyzer.enlarged_spectrum(grid, u1)
        report = analyzer.eigen_flow_check(
            grid, u1, spectrum.state(3), spectrum.quasienergies[3], 100, model=model
        )

        assert report.max_defect <= 1e-8
        assert report.energy_sup is not None

    def test_shifted_quasienergy_fails(self, analyzer, model_factory):
        """Test: lambda + pi / T2 -> O(1) defect, or NotAnEigenvector when verified"""
        model = model_factory.create_autonomous([0.2, 0.7])
        grid = analyzer.torus_grid(0.0, 8, 2 * math.pi)
        u1 = analyzer.monodromy_samples(model, grid)
        spectrum = analyzer.enlarged_spectrum(grid, u1)
        wrong = spectrum.quasienergies[3] + math.pi / grid.period
        report = analyzer.eigen_flow_check(grid, u1, spectrum.state(3), wrong, 4, verify=False)

        assert report.max_defect > 0.5
        with pytest.raises(NotAnEigenvector):
            analyzer.eigen_flow_check(grid, u1, spectrum.state(3), wrong, 4)


class TestSummability:
    """Test suite for summability_bound."""

    def test_finite_expansion(self, analyzer):
        """Test: Trailing zero coefficients -> finite, equal to the explicit sum"""
        report = analyzer.summability_bound([1.0, 0.5, 0.0, 0.0], [1.0, 2.0, 3.0, 4.0], [0.5] * 4)

        assert report.trend == "finite"
        assert report.partial_sum == pytest.approx(1.0 * 1.5 + 0.5 * 2.5)

    def test_harmonic_tail_diverges(self, analyzer):
        """Test: a_j = 1/j^2, lambda_j = j -> divergent"""
        j = np.arange(1, 201)
        report = analyzer.summability_bound(1.0 / j**2, j.astype(float), np.zeros(j.size))

        assert report.trend == "divergent"

    def test_geometric_tail_converges(self, analyzer):
        """Test: a_j = 2^{-j}, lambda_j = j -> convergent"""
        j = np.arange(1, 41)
        report = analyzer.summability_bound(2.0**-j, j.astype(float), np.ones(j.size))

        assert report.trend == "convergent"

    def test_derivative_sup_of_constant(self, analyzer):
        """Test: Constant f -> zero theta-derivative"""
        assert analyzer.derivative_sup(EnlargedState.constant(8, np.array([1.0, 1.0]))) == 0.0


class TestConvergentSweep:
    """Test suite for convergent_sweep."""

    def test_sweep_statistics(self, analyzer, golden_flow):
        """Test: One statistics record per Fibonacci size, 2q phases each"""
        sweep = analyzer.convergent_sweep(golden_flow, [8, 13])

        assert [s.size for s in sweep.statistics] == [8, 13]
        assert [s.count for s in sweep.statistics] == [16, 26]
        assert sweep.discrepancies == [None, None]

    def test_sweep_discrepancy_recorded(self, analyzer, golden_flow):
        """Test: With a vector and probe the A_f discrepancy is finite"""
        probe = HermitianOperator(matrix=np.diag([1.0, -1.0]))
        sweep = analyzer.convergent_sweep(
            golden_flow, [13], vector=np.array([1.0, 1.0]) / math.sqrt(2), probe=probe, periods=5
        )

        assert np.isfinite(sweep.discrepancies[0])
