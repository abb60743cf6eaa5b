"""Linear Algebra Kernel - Hermitian eigensystems, unitary exponentials and polar factors."""
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import linalg as sla

from ..data_models.operators import (
    ComplexMatrix,
    EigenphaseSystem,
    EigenSystem,
    HermitianOperator,
    UnitaryOperator,
    hermiticity_defect,
    unitarity_defect,
)
from ..utils.constants import PHASE_MIXING_WEIGHT, SINGULAR_VALUE_FLOOR
from ..utils.errors import ConvergenceFailure, NonHermitianInput, NonUnitaryInput, SingularInput
from ..utils.logging import setup_logging
from ..utils.settings import LabSettings, get_settings

logger = setup_logging(__name__)

TWO_PI = 2.0 * np.pi

MatrixLike = Union[np.ndarray, ComplexMatrix, HermitianOperator, UnitaryOperator]


def as_matrix(operand: MatrixLike) -> np.ndarray:
    """Return the raw array behind any operator model."""
    if isinstance(operand, ComplexMatrix):
        return operand.entries
    if isinstance(operand, (HermitianOperator, UnitaryOperator)):
        return operand.matrix
    return np.asarray(operand, dtype=complex)


def wrap_phase(phases: np.ndarray) -> np.ndarray:
    """Reduce phases into [0, 2pi), folding rounding spill-over at 2pi back to 0."""
    wrapped = np.mod(np.asarray(phases, dtype=float), TWO_PI)
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped + 0.0


def phase_distance(a: float, b: float, period: float = TWO_PI) -> float:
    """Wraparound distance min(|a-b|, period-|a-b|) on a circle of the given length."""
    d = abs(a - b) % period
    return float(min(d, period - d))


class LinalgKernel:
    """Dense complex linear algebra shared by every analysis service."""

    def __init__(self, settings: Optional[LabSettings] = None):
        """
        Initialize the kernel.

        Args:
            settings: Tolerance authority (default: process-wide settings)
        """
        self.settings = settings or get_settings()

    def hermitian_eig(self, operator: HermitianOperator) -> EigenSystem:
        """
        Diagonalize a Hermitian operator.

        Args:
            operator: Hermitian input

        Returns:
            EigenSystem with ascending values and orthonormal column vectors

        Raises:
            NonHermitianInput: If the Hermiticity invariant is violated
            ConvergenceFailure: If the solver fails or the reconstruction check does not hold
        """
        matrix = as_matrix(operator)
        defect = hermiticity_defect(matrix)
        if defect > self.settings.hermiticity_tolerance:
            raise NonHermitianInput(f"Hermiticity defect {defect:.3e} exceeds tolerance")

        values, vectors = self.eigh_raw(matrix)

        tol = self.settings.eigensystem_tolerance
        orthonormality = np.linalg.norm(vectors.conj().T @ vectors - np.eye(len(values)))
        scale = max(np.linalg.norm(matrix), 1.0)
        reconstruction = np.linalg.norm((vectors * values) @ vectors.conj().T - matrix) / scale
        if orthonormality > tol or reconstruction > tol:
            raise ConvergenceFailure(
                f"Eigensystem check failed: orthonormality={orthonormality:.3e}, "
                f"reconstruction={reconstruction:.3e}"
            )
        return EigenSystem(values=values, vectors=vectors)

    def expm_i_hermitian(self, operator: HermitianOperator, s: float) -> UnitaryOperator:
        """
        Compute exp(-i s H) through the eigen-decomposition of H.

        Args:
            operator: Hermitian generator H
            s: Time argument

        Returns:
            UnitaryOperator exp(-i s H)
        """
        eig = self.hermitian_eig(operator)
        return UnitaryOperator(matrix=self.evolve_diagonal(eig, s))

    def evolve_diagonal(self, eig: EigenSystem, s: float) -> np.ndarray:
        """Raw V diag(e^{-i s E}) V^dag for a precomputed eigensystem."""
        if s == 0.0:
            return np.eye(len(eig.values), dtype=complex)
        vectors = eig.vectors
        return (vectors * np.exp(-1j * s * eig.values)) @ vectors.conj().T

    def expm_raw(self, matrix: np.ndarray, s: float) -> np.ndarray:
        """exp(-i s M) for a raw Hermitian array, without model validation."""
        values, vectors = self.eigh_raw(0.5 * (matrix + matrix.conj().T))
        return (vectors * np.exp(-1j * s * values)) @ vectors.conj().T

    def polar_unitarize(self, operand: MatrixLike) -> UnitaryOperator:
        """
        Unitary polar factor W Vh of M = W S Vh.

        Args:
            operand: Nonsingular square matrix

        Returns:
            Closest unitary to the input in Frobenius norm

        Raises:
            SingularInput: If the smallest singular value is at or below the floor
        """
        return UnitaryOperator(matrix=self.polar_raw(as_matrix(operand)))

    def polar_raw(self, matrix: np.ndarray) -> np.ndarray:
        """Raw polar factor, used by the stepper's periodic re-unitarization."""
        try:
            w, singular_values, vh = sla.svd(matrix)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise ConvergenceFailure(f"SVD failed: {e}") from e
        if singular_values[-1] <= SINGULAR_VALUE_FLOOR:
            raise SingularInput(
                f"Smallest singular value {singular_values[-1]:.3e} <= {SINGULAR_VALUE_FLOOR}"
            )
        return w @ vh

    def unitary_eigenphases(self, operator: UnitaryOperator) -> EigenphaseSystem:
        """
        Eigenphases alpha_j in [0, 2pi) with U xi_j = e^{-i alpha_j} xi_j.

        Diagonalizes the Hermitian combination (U + U^dag)/2 + g (U - U^dag)/2i and
        reads each phase off the Rayleigh quotient. An accidental degeneracy of the
        combination mixes distinct eigenvalues; that case is detected by the residual
        check and redone with a complex Schur decomposition.

        Args:
            operator: Unitary input

        Returns:
            EigenphaseSystem with phases ascending and clustered vectors orthonormalized

        Raises:
            NonUnitaryInput: If the unitarity invariant is violated
            ConvergenceFailure: If neither route reaches the residual tolerance
        """
        matrix = as_matrix(operator)
        defect = unitarity_defect(matrix)
        if defect > self.settings.unitarity_tolerance:
            raise NonUnitaryInput(f"Unitarity defect {defect:.3e} exceeds tolerance")

        tol = self.settings.eigensystem_tolerance
        real_part = 0.5 * (matrix + matrix.conj().T)
        imag_part = (matrix - matrix.conj().T) / 2j
        _, vectors = self.eigh_raw(real_part + PHASE_MIXING_WEIGHT * imag_part)
        eigenvalues = np.einsum("ij,ij->j", vectors.conj(), matrix @ vectors)

        if self._residual(matrix, vectors, eigenvalues) > tol:
            logger.debug("Hermitian embedding degenerate, falling back to Schur")
            triangular, vectors = sla.schur(matrix, output="complex")
            eigenvalues = np.diag(triangular).copy()
            residual = self._residual(matrix, vectors, eigenvalues)
            if residual > tol:
                raise ConvergenceFailure(f"Unitary eigen-residual {residual:.3e} exceeds tolerance")

        moduli_defect = float(np.max(np.abs(np.abs(eigenvalues) - 1.0)))
        if moduli_defect > tol:
            raise ConvergenceFailure(f"Eigenvalue moduli deviate from 1 by {moduli_defect:.3e}")

        phases = wrap_phase(-np.angle(eigenvalues))
        order = np.argsort(phases, kind="stable")
        phases = phases[order]
        vectors = vectors[:, order]

        clusters = self._cluster(phases)
        vectors = vectors.copy()
        for cluster in clusters:
            if len(cluster) > 1:
                q, _ = np.linalg.qr(vectors[:, cluster])
                vectors[:, cluster] = q

        return EigenphaseSystem(phases=phases, vectors=vectors, clusters=clusters)

    def eigh_raw(self, matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """scipy eigh with solver failures mapped to ConvergenceFailure."""
        try:
            return sla.eigh(matrix)
        except (np.linalg.LinAlgError, sla.LinAlgError) as e:
            raise ConvergenceFailure(f"Hermitian eigensolver failed: {e}") from e

    @staticmethod
    def _residual(matrix: np.ndarray, vectors: np.ndarray, eigenvalues: np.ndarray) -> float:
        return float(np.linalg.norm(matrix @ vectors - vectors * eigenvalues))

    def _cluster(self, phases: np.ndarray) -> List[List[int]]:
        """Group ascending phases whose gap (with wraparound) is below the cluster gap."""
        gap = self.settings.phase_cluster_gap
        clusters: List[List[int]] = [[0]]
        for index in range(1, len(phases)):
            if phases[index] - phases[index - 1] < gap:
                clusters[-1].append(index)
            else:
                clusters.append([index])
        if len(clusters) > 1 and phases[0] + TWO_PI - phases[-1] < gap:
            clusters[0] = clusters.pop() + clusters[0]
        return clusters
