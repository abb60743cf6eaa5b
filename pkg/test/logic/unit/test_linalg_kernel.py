"""Unit Tests for the Linear Algebra Kernel"""
import numpy as np
import pytest

from src.logic.analytics.linalg_kernel import TWO_PI, LinalgKernel, phase_distance, wrap_phase
from src.logic.data_models.operators import HermitianOperator, UnitaryOperator
from src.logic.utils.errors import NonHermitianInput, NonUnitaryInput, SingularInput


def random_hermitian(rng, dim):
    """(A + A^dag) / 2 with complex Gaussian entries."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (a + a.conj().T)


class TestLinalgKernel:
    """Test suite for LinalgKernel."""

    @pytest.fixture
    def kernel(self):
        """Provide a LinalgKernel instance."""
        return LinalgKernel()

    def test_hermitian_eig_sorted_values(self, kernel):
        """Test: Diagonal input -> ascending eigenvalues and orthonormal vectors"""
        eig = kernel.hermitian_eig(HermitianOperator(matrix=np.diag([3.0, 1.0, 2.0])))

        np.testing.assert_allclose(eig.values, [1.0, 2.0, 3.0])
        np.testing.assert_allclose(eig.vectors.conj().T @ eig.vectors, np.eye(3), atol=1e-12)

    def test_hermitian_eig_rejects_non_hermitian(self, kernel):
        """Test: Strictly upper-triangular input -> NonHermitianInput"""
        with pytest.raises(NonHermitianInput):
            kernel.hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_hermitian_operator_rejects_non_hermitian(self):
        """Test: Validation at construction keeps the domain error type"""
        with pytest.raises(NonHermitianInput):
            HermitianOperator(matrix=np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_expm_pauli_z(self, kernel):
        """Test: exp(-i pi/2 sigma_z) = diag(-i, i)"""
        sigma_z = HermitianOperator(matrix=np.diag([1.0, -1.0]))
        u = kernel.expm_i_hermitian(sigma_z, np.pi / 2)

        np.testing.assert_allclose(u.matrix, np.diag([-1j, 1j]), atol=1e-14)
        assert u.unitarity_defect < 1e-14

    def test_expm_zero_time_is_identity(self, kernel):
        """Test: s = 0 -> identity"""
        u = kernel.expm_i_hermitian(HermitianOperator(matrix=np.diag([5.0, -2.0])), 0.0)

        np.testing.assert_array_equal(u.matrix, np.eye(2))

    def test_polar_unitarize_scaled_identity(self, kernel):
        """Test: Polar factor of 2 Id is Id"""
        u = kernel.polar_unitarize(2.0 * np.eye(3))

        np.testing.assert_allclose(u.matrix, np.eye(3), atol=1e-14)

    def test_polar_unitarize_restores_unitarity(self, kernel):
        """Test: Slightly perturbed unitary -> unitary within tolerance"""
        rotation = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
        u = kernel.polar_unitarize(rotation * (1.0 + 1e-6))

        np.testing.assert_allclose(u.matrix, rotation, atol=1e-12)

    def test_polar_unitarize_singular(self, kernel):
        """Test: Rank-deficient input -> SingularInput"""
        with pytest.raises(SingularInput):
            kernel.polar_unitarize(np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_unitary_eigenphases_convention(self, kernel):
        """Test: U xi = e^{-i alpha} xi with phases ascending in [0, 2pi)"""
        u = UnitaryOperator(matrix=np.diag(np.exp(-1j * np.array([1.2, 0.3]))))
        system = kernel.unitary_eigenphases(u)

        np.testing.assert_allclose(system.phases, [0.3, 1.2], atol=1e-12)
        residual = u.matrix @ system.vectors - system.vectors * np.exp(-1j * system.phases)
        assert np.linalg.norm(residual) < 1e-12

    def test_unitary_eigenphases_negative_angle_wraps(self, kernel):
        """Test: e^{+i 0.5} eigenvalue -> phase 2pi - 0.5"""
        u = UnitaryOperator(matrix=np.diag([np.exp(0.5j)]))
        system = kernel.unitary_eigenphases(u)

        assert system.phases[0] == pytest.approx(TWO_PI - 0.5)

    def test_unitary_eigenphases_degenerate_cluster(self, kernel):
        """Test: Identity -> one cluster holding every phase, all zero"""
        system = kernel.unitary_eigenphases(UnitaryOperator.identity(3))

        np.testing.assert_allclose(system.phases, 0.0, atol=1e-14)
        assert system.clusters == [[0, 1, 2]]

    def test_unitary_eigenphases_non_unitary(self, kernel):
        """Test: 2 Id -> NonUnitaryInput"""
        with pytest.raises(NonUnitaryInput):
            kernel.unitary_eigenphases(2.0 * np.eye(2))


    @pytest.mark.parametrize("dim", [2, 8, 33, 64])
    def test_hermitian_eig_reconstructs_random_input(self, kernel, dim):
        """Test: V diag(E) V^dag = H and V^dag V = Id for random Hermitian H"""
        h = random_hermitian(np.random.default_rng(dim), dim)
        eig = kernel.hermitian_eig(HermitianOperator(matrix=h))
        scale = np.linalg.norm(h, 2)

        reconstructed = (eig.vectors * eig.values) @ eig.vectors.conj().T
        assert np.linalg.norm(reconstructed - h, 2) <= 1e-12 * dim * scale
        np.testing.assert_allclose(eig.vectors.conj().T @ eig.vectors, np.eye(dim), atol=1e-12)
        assert np.all(np.diff(eig.values) >= 0)

    @pytest.mark.parametrize("dim", [2, 8, 33, 64])
    def test_expm_semigroup_and_inverse(self, kernel, dim):
        """Test: U(s) U(t) = U(s + t) and U(s) U(-s) = Id"""
        h = HermitianOperator(matrix=random_hermitian(np.random.default_rng(100 + dim), dim))
        s, t = 0.7, -1.9

        product = kernel.expm_i_hermitian(h, s).matrix @ kernel.expm_i_hermitian(h, t).matrix
        inverse = kernel.expm_i_hermitian(h, s).matrix @ kernel.expm_i_hermitian(h, -s).matrix
        np.testing.assert_allclose(product, kernel.expm_i_hermitian(h, s + t).matrix, atol=1e-11)
        np.testing.assert_allclose(inverse, np.eye(dim), atol=1e-11)

    def test_eigenphases_of_exponential(self, kernel):
        """Test: Phases of exp(-i s H) are s times the eigenvalues of H"""
        rng = np.random.default_rng(7)
        q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
        energies = np.sort(rng.uniform(0.1, 2.0, size=6))
        h = HermitianOperator(matrix=(q * energies) @ q.conj().T)
        s = 1.5
        system = kernel.unitary_eigenphases(kernel.expm_i_hermitian(h, s))

        np.testing.assert_allclose(system.phases, np.mod(s * energies, TWO_PI), atol=1e-10)


class TestPhaseHelpers:
    """Test suite for phase arithmetic helpers."""

    def test_wrap_phase_folds_two_pi(self):
        """Test: 2pi and -0.1 wrap into [0, 2pi)"""
        wrapped = wrap_phase(np.array([TWO_PI, -0.1]))

        assert wrapped[0] == 0.0
        assert wrapped[1] == pytest.approx(TWO_PI - 0.1)

    def test_phase_distance_wraparound(self):
        """Test: Distance across 0 uses the short arc"""
        assert phase_distance(0.1, TWO_PI - 0.1) == pytest.approx(0.2)
        assert phase_distance(0.5, 1.0, period=1.0) == pytest.approx(0.5)
