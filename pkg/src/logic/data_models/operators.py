"""Operator Data Models - Dense complex vectors and matrices of the truncated Hilbert space."""
from typing import Any, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.errors import NonHermitianInput, NonUnitaryInput
from ..utils.settings import get_settings


def frozen_array(value: Any, ndim: int, dtype: Any = complex) -> np.ndarray:
    """Copy value into a read-only array of the given rank, rejecting NaN/Inf."""
    array = np.array(value, dtype=dtype, copy=True)
    if array.ndim != ndim:
        raise ValueError(f"Expected a rank-{ndim} array, got shape {array.shape}")
    if array.size == 0:
        raise ValueError("Array must not be empty")
    if not np.all(np.isfinite(array)):
        raise ValueError("Array entries must be finite (no NaN/Inf)")
    array.setflags(write=False)
    return array


def hermiticity_defect(matrix: np.ndarray) -> float:
    """Relative Frobenius defect ||M - M^dag|| / ||M|| (0 for the zero matrix)."""
    scale = np.linalg.norm(matrix)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(matrix - matrix.conj().T) / scale)


def unitarity_defect(matrix: np.ndarray) -> float:
    """Frobenius norm of M^dag M - Id."""
    return float(np.linalg.norm(matrix.conj().T @ matrix - np.eye(matrix.shape[0])))


def _square(array: np.ndarray) -> np.ndarray:
    if array.shape[0] != array.shape[1]:
        raise ValueError(f"Matrix must be square, got shape {array.shape}")
    return array


class ComplexVector(BaseModel):
    """State vector of the truncated Hilbert space."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    components: np.ndarray = Field(..., description="Complex amplitudes (read-only copy)")

    @field_validator("components", mode="before")
    @classmethod
    def validate_components(cls, v: Any) -> np.ndarray:
        """Copy to a finite rank-1 complex array."""
        return frozen_array(v, ndim=1)

    @property
    def dim(self) -> int:
        return int(self.components.shape[0])

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    @classmethod
    def basis(cls, dim: int, index: int) -> "ComplexVector":
        """Standard basis vector e_index."""
        components = np.zeros(dim, dtype=complex)
        components[index] = 1.0
        return cls(components=components)


class ComplexMatrix(BaseModel):
    """Square complex matrix with finite entries."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray = Field(..., description="dim x dim complex entries (read-only copy)")

    @field_validator("entries", mode="before")
    @classmethod
    def validate_entries(cls, v: Any) -> np.ndarray:
        return _square(frozen_array(v, ndim=2))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])


class HermitianOperator(BaseModel):
    """Self-adjoint matrix: generators H(t), free parts H0 and probes A."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray = Field(..., description="dim x dim Hermitian entries")

    @field_validator("matrix", mode="before")
    @classmethod
    def validate_matrix(cls, v: Any) -> np.ndarray:
        return _square(frozen_array(v, ndim=2))

    @field_validator("matrix", mode="after")
    @classmethod
    def validate_hermitian(cls, v: np.ndarray) -> np.ndarray:
        """Enforce ||M - M^dag||_F <= tol * ||M||_F."""
        defect = hermiticity_defect(v)
        if defect > get_settings().hermiticity_tolerance:
            raise NonHermitianInput(f"Hermiticity defect {defect:.3e} exceeds tolerance")
        return v

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def operator_norm(self) -> float:
        """Spectral norm (largest absolute eigenvalue)."""
        if not np.any(self.matrix):
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvalsh(self.matrix))))

    def expectation(self, psi: np.ndarray) -> float:
        """Real part of <psi, M psi>."""
        return float(np.real(np.vdot(psi, self.matrix @ psi)))


class UnitaryOperator(BaseModel):
    """Unitary matrix together with its measured unitarity defect."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray = Field(..., description="dim x dim unitary entries")
    unitarity_defect: float = Field(..., ge=0, description="||M^dag M - Id||_F")

    @model_validator(mode="before")
    @classmethod
    def measure_defect(cls, data: Any) -> Any:
        """Compute the defect from the matrix and reject non-unitary input."""
        if not isinstance(data, dict) or "matrix" not in data:
            return data
        matrix = _square(frozen_array(data["matrix"], ndim=2))
        defect = unitarity_defect(matrix)
        if defect > get_settings().unitarity_tolerance:
            raise NonUnitaryInput(f"Unitarity defect {defect:.3e} exceeds tolerance")
        return {**data, "matrix": matrix, "unitarity_defect": defect}

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def adjoint(self) -> "UnitaryOperator":
        return UnitaryOperator(matrix=self.matrix.conj().T)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    @classmethod
    def identity(cls, dim: int) -> "UnitaryOperator":
        return cls(matrix=np.eye(dim, dtype=complex))


class EigenSystem(BaseModel):
    """Eigenpairs of a Hermitian matrix, values ascending, vectors as columns."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray = Field(..., description="Real eigenvalues, ascending")
    vectors: np.ndarray = Field(..., description="Orthonormal eigenvectors (columns)")

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v: Any) -> np.ndarray:
        values = frozen_array(v, ndim=1, dtype=float)
        if np.any(np.diff(values) < 0):
            raise ValueError("Eigenvalues must be sorted ascending")
        return values

    @field_validator("vectors", mode="before")
    @classmethod
    def validate_vectors(cls, v: Any) -> np.ndarray:
        return _square(frozen_array(v, ndim=2))

    @model_validator(mode="after")
    def validate_shapes(self) -> "EigenSystem":
        if self.vectors.shape[1] != self.values.shape[0]:
            raise ValueError("Number of eigenvectors must match number of eigenvalues")
        return self

    def vector(self, index: int) -> np.ndarray:
        return self.vectors[:, index]


class EigenphaseSystem(BaseModel):
    """Eigen-decomposition of a unitary with eigenvalues written e^{-i alpha}."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    phases: np.ndarray = Field(..., description="alpha_j in [0, 2pi), ascending")
    vectors: np.ndarray = Field(..., description="Orthonormal eigenvectors (columns)")
    clusters: List[List[int]] = Field(
        ..., description="Index groups of phases closer than the cluster gap"
    )

    @field_validator("phases", mode="before")
    @classmethod
    def validate_phases(cls, v: Any) -> np.ndarray:
        phases = frozen_array(v, ndim=1, dtype=float)
        if np.any(phases < 0) or np.any(phases >= 2 * np.pi):
            raise ValueError("Eigenphases must lie in [0, 2pi)")
        return phases

    @field_validator("vectors", mode="before")
    @classmethod
    def validate_vectors(cls, v: Any) -> np.ndarray:
        return _square(frozen_array(v, ndim=2))

    def eigenvalues(self) -> np.ndarray:
        return np.exp(-1j * self.phases)
