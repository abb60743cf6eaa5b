"""Hamiltonian Models - Generators, exact propagators and kicked steps of the built-in families."""
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import fft
from scipy.linalg import block_diag

from ..data_models.model_spec import (
    PAULI,
    AutonomousDiscreteParams,
    BoundedPerturbationParams,
    DirectSumQuasiperiodicParams,
    DrivenTwoLevelParams,
    KickedLinearParams,
    ModelSpec,
    OperatorSpec,
    QuasiperiodicExactParams,
)
from ..data_models.operators import ComplexVector, HermitianOperator, UnitaryOperator
from ..utils.errors import (
    DerivativeNotAvailable,
    GeneratorNotAvailable,
    IndexOutOfSequence,
    KickInstant,
    NoClosedForm,
    NotPeriodic,
)
from ..utils.logging import setup_logging
from .linalg_kernel import LinalgKernel

logger = setup_logging(__name__)

SIGMA_X = PAULI["pauli_x"]
SIGMA_Y = PAULI["pauli_y"]
SIGMA_Z = PAULI["pauli_z"]

GENERATOR_VARIANTS = {"AutonomousDiscrete", "BoundedPerturbation", "DrivenTwoLevel", "KickedLinear"}
CLOSED_FORM_VARIANTS = {
    "AutonomousDiscrete",
    "DirectSumQuasiperiodic",
    "DrivenTwoLevel",
    "QuasiperiodicExact",
}


class ModelEngine:
    """Evaluate H(t), V(t), V'(t) and closed-form propagators for every ModelSpec variant."""

    def __init__(self, kernel: Optional[LinalgKernel] = None):
        """
        Initialize the engine.

        Args:
            kernel: Linear algebra kernel (default: new kernel on process settings)
        """
        self.kernel = kernel or LinalgKernel()

    # ========================================================================
    # Capabilities
    # ========================================================================

    @staticmethod
    def has_generator(model: ModelSpec) -> bool:
        return model.variant in GENERATOR_VARIANTS

    @staticmethod
    def has_closed_form(model: ModelSpec) -> bool:
        return model.variant in CLOSED_FORM_VARIANTS

    def period(self, model: ModelSpec) -> float:
        """
        Period T of a periodic model.

        Raises:
            NotPeriodic: For quasiperiodic, aperiodic or explicitly-kicked models, and for
                autonomous models without a supplied frequency
        """
        if isinstance(model, DrivenTwoLevelParams):
            return model.period
        if isinstance(model, KickedLinearParams) and model.is_periodic:
            return 1.0
        if isinstance(model, AutonomousDiscreteParams) and model.omega is not None:
            return 2 * np.pi / model.omega
        raise NotPeriodic(f"{model.variant} model has no period")

    # ========================================================================
    # Generators
    # ========================================================================

    def hamiltonian_at(self, model: ModelSpec, t: float) -> HermitianOperator:
        """
        Pointwise generator H(t).

        Args:
            model: Model specification
            t: Time

        Returns:
            HermitianOperator H(t)

        Raises:
            GeneratorNotAvailable: For the quasiperiodic families
            KickInstant: For KickedLinear at an integer time
        """
        return HermitianOperator(matrix=self.hamiltonian_raw(model, t))

    def hamiltonian_raw(self, model: ModelSpec, t: float) -> np.ndarray:
        """H(t) as a raw array (no validation), used inside stepping loops."""
        if isinstance(model, KickedLinearParams):
            if float(t) == float(np.round(t)):
                raise KickInstant(f"H(t) is singular at kick time t={t}")
            return self.free_raw(model)
        return self.free_raw(model) + self.potential_raw(model, t)

    def free_hamiltonian(self, model: ModelSpec) -> HermitianOperator:
        """Time-independent part H0."""
        return HermitianOperator(matrix=self.free_raw(model))

    def free_raw(self, model: ModelSpec) -> np.ndarray:
        if isinstance(model, DrivenTwoLevelParams):
            return 0.5 * model.omega0 * SIGMA_Z
        if isinstance(model, (AutonomousDiscreteParams, BoundedPerturbationParams)):
            return model.h0_matrix
        if isinstance(model, KickedLinearParams):
            return np.diag((model.momenta**2).astype(complex))
        raise GeneratorNotAvailable(f"{model.variant} exposes only its propagator")

    def potential_at(self, model: ModelSpec, t: float) -> HermitianOperator:
        """Time-dependent part V(t) = H(t) - H0."""
        return HermitianOperator(matrix=self.potential_raw(model, t))

    def potential_raw(self, model: ModelSpec, t: float) -> np.ndarray:
        if isinstance(model, DrivenTwoLevelParams):
            phase = model.omega * np.mod(t, model.period)
            return 0.5 * model.amplitude * (SIGMA_X * np.cos(phase) + SIGMA_Y * np.sin(phase))
        if isinstance(model, BoundedPerturbationParams):
            return model.b1_matrix * np.sin(t) + model.b2_matrix / (1.0 + abs(t)) ** 2
        if isinstance(model, AutonomousDiscreteParams):
            return model.coupling_matrix
        raise GeneratorNotAvailable(f"{model.variant} has no pointwise potential")

    def potential_derivative(self, model: ModelSpec, t: float) -> HermitianOperator:
        """
        Time derivative V'(t).

        Raises:
            DerivativeNotAvailable: For models without a differentiable potential
        """
        return HermitianOperator(matrix=self.potential_derivative_raw(model, t))

    def potential_derivative_raw(self, model: ModelSpec, t: float) -> np.ndarray:
        if isinstance(model, DrivenTwoLevelParams):
            phase = model.omega * np.mod(t, model.period)
            prefactor = 0.5 * model.amplitude * model.omega
            return prefactor * (-SIGMA_X * np.sin(phase) + SIGMA_Y * np.cos(phase))
        if isinstance(model, BoundedPerturbationParams):
            decay = -2.0 * np.sign(t) / (1.0 + abs(t)) ** 3
            return model.b1_matrix * np.cos(t) + model.b2_matrix * decay
        if isinstance(model, AutonomousDiscreteParams):
            return np.zeros((model.dim, model.dim), dtype=complex)
        raise DerivativeNotAvailable(f"{model.variant} does not expose V'(t)")

    def potential_derivative_norm_integral(self, model: ModelSpec, t: float) -> float:
        """Analytic upper bound of int_0^|t| ||V'(s)|| ds from the operator norms of the pieces."""
        if isinstance(model, BoundedPerturbationParams):
            b1 = HermitianOperator(matrix=model.b1_matrix).operator_norm()
            b2 = HermitianOperator(matrix=model.b2_matrix).operator_norm()
            span = abs(t)
            return b1 * span + b2 * (1.0 - 1.0 / (1.0 + span) ** 2)
        if isinstance(model, DrivenTwoLevelParams):
            return 0.5 * abs(model.amplitude) * model.omega * abs(t)
        if isinstance(model, AutonomousDiscreteParams):
            return 0.0
        raise DerivativeNotAvailable(f"{model.variant} does not expose V'(t)")

    # ========================================================================
    # Exact propagators
    # ========================================================================

    def exact_propagator(self, model: ModelSpec, t: float) -> UnitaryOperator:
        """
        Closed-form U(t, 0).

        Args:
            model: Model specification
            t: Time (either sign)

        Returns:
            UnitaryOperator U(t, 0)

        Raises:
            NoClosedForm: For BoundedPerturbation and KickedLinear
        """
        return UnitaryOperator(matrix=self.exact_raw(model, t))

    def exact_raw(self, model: ModelSpec, t: float) -> np.ndarray:
        if isinstance(model, DrivenTwoLevelParams):
            return self._two_level_propagator(model, t)
        if isinstance(model, QuasiperiodicExactParams):
            return self._quasiperiodic_propagator(model, t)
        if isinstance(model, DirectSumQuasiperiodicParams):
            return block_diag(*[self._quasiperiodic_propagator(b, t) for b in model.blocks])
        if isinstance(model, AutonomousDiscreteParams):
            return self.kernel.expm_raw(model.h0_matrix + model.coupling_matrix, t)
        raise NoClosedForm(f"{model.variant} has no closed-form propagator")

    def interpolation(
        self, model: QuasiperiodicExactParams, delta: float, theta: float
    ) -> np.ndarray:
        """Smooth stroboscopic interpolation v(delta; theta), with v(0)=Id and v(T2)=u1(theta)."""
        d = delta / model.t2
        phase = d * (theta + (d - 1.0) * np.pi * model.alpha)
        return np.diag([np.exp(1j * phase), np.exp(-1j * phase)])

    def monodromy_sample(self, model: QuasiperiodicExactParams, theta: float) -> np.ndarray:
        """u1(theta) = diag(e^{i theta}, e^{-i theta})."""
        return np.diag([np.exp(1j * theta), np.exp(-1j * theta)])

    def direct_sum_propagator(
        self,
        blocks: Union[DirectSumQuasiperiodicParams, Sequence[QuasiperiodicExactParams]],
        t: float,
    ) -> UnitaryOperator:
        """
        Block-diagonal propagator of independent quasiperiodic blocks.

        Args:
            blocks: Direct-sum spec or list of 2x2 block parameters
            t: Time

        Returns:
            UnitaryOperator whose l-th 2x2 block is the exact propagator of block l
        """
        if not isinstance(blocks, DirectSumQuasiperiodicParams):
            blocks = DirectSumQuasiperiodicParams(blocks=list(blocks))
        return self.exact_propagator(blocks, t)

    def _two_level_propagator(self, model: DrivenTwoLevelParams, t: float) -> np.ndarray:
        h_rot = 0.5 * (model.omega0 - model.omega) * SIGMA_Z + 0.5 * model.amplitude * SIGMA_X
        frame = np.diag(np.exp(-0.5j * model.omega * t * np.array([1.0, -1.0])))
        return frame @ self.kernel.expm_raw(h_rot, t)

    def _quasiperiodic_propagator(self, model: QuasiperiodicExactParams, t: float) -> np.ndarray:
        # t = k T2 + delta with 0 <= delta < T2 for both signs of t
        k = int(np.floor(t / model.t2))
        delta = t - k * model.t2
        stroboscopic = k * (model.theta1 + (k - 1) * np.pi * model.alpha)
        u_k = np.diag([np.exp(1j * stroboscopic), np.exp(-1j * stroboscopic)])
        theta_k = model.theta1 + 2 * np.pi * k * model.alpha
        return self.interpolation(model, delta, theta_k) @ u_k

    # ========================================================================
    # Kicked dynamics
    # ========================================================================

    def kicked_step(self, model: KickedLinearParams, n: int, psi: ComplexVector) -> ComplexVector:
        """
        One kick period: psi <- Kick(eps_n) Free(1) psi.

        Args:
            model: Kicked model
            n: Kick index (n >= 1)
            psi: State in the momentum basis

        Returns:
            Evolved state

        Raises:
            IndexOutOfSequence: If eps_n is not defined
        """
        return ComplexVector(components=self.kicked_step_raw(model, n, psi.components))

    def kicked_step_raw(self, model: KickedLinearParams, n: int, psi: np.ndarray) -> np.ndarray:
        return self.apply_kick(model, self.free_flight_raw(model, psi, 1.0), n)

    def apply_kick(self, model: KickedLinearParams, block: np.ndarray, n: int) -> np.ndarray:
        """Apply the n-th kick Kick(eps_n)."""
        epsilon = model.kick_strength(n)
        if epsilon is None:
            raise IndexOutOfSequence(f"Kick index {n} outside the supplied sequence")
        return self.kick_raw(model, block, epsilon)

    def free_flight_raw(
        self, model: KickedLinearParams, block: np.ndarray, dt: float
    ) -> np.ndarray:
        """Free evolution diag(e^{-i n^2 dt}) on a vector or on the columns of a block."""
        phase = np.exp(-1j * dt * model.momenta**2)
        return phase.reshape((-1,) + (1,) * (block.ndim - 1)) * block

    def kick_raw(self, model: KickedLinearParams, block: np.ndarray, epsilon: float) -> np.ndarray:
        """Multiplication by e^{-i eps x} on the position grid, applied along axis 0."""
        if epsilon == 0.0:
            return block
        shape = (-1,) + (1,) * (block.ndim - 1)
        # Momentum n -> position grid x_j = 2 pi j / (2M+1) and back
        positions = fft.ifft(fft.ifftshift(block, axes=0), axis=0, norm="ortho")
        positions = positions * np.exp(-1j * epsilon * self.position_grid(model)).reshape(shape)
        return fft.fftshift(fft.fft(positions, axis=0, norm="ortho"), axes=0)

    @staticmethod
    def position_grid(model: KickedLinearParams) -> np.ndarray:
        return 2 * np.pi * np.arange(model.dim) / model.dim

    def kick_sequence(self, model: KickedLinearParams, count: int) -> List[float]:
        """eps_1 .. eps_count, raising IndexOutOfSequence when the sequence is too short."""
        strengths = [model.kick_strength(n) for n in range(1, count + 1)]
        if any(s is None for s in strengths):
            raise IndexOutOfSequence(f"Kick sequence shorter than {count} steps")
        return [float(s) for s in strengths]

    # ========================================================================
    # Operator presets
    # ========================================================================

    def build_operator(self, spec: OperatorSpec, dim: int) -> HermitianOperator:
        """Materialize a named or explicit operator as a validated Hermitian operator."""
        return HermitianOperator(matrix=spec.to_array(dim))

    def lattice_laplacian(self, dim: int) -> HermitianOperator:
        """Open-ended 1-D lattice Laplacian 2 Id - (shift + shift^dag)."""
        return self.build_operator(OperatorSpec(kind="lattice_laplacian"), dim)
