"""Floquet Data Models - Monodromy spectra, quasienergy blocks and correspondence reports."""
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .operators import frozen_array
from .orbit import OrbitSample


class FloquetSpectrum(BaseModel):
    """Eigenphases alpha_j and eigenvectors xi_j of U_F, with U_F xi = e^{-i alpha} xi."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    phases: np.ndarray = Field(..., description="alpha_j in [0, 2pi), ascending")
    vectors: np.ndarray = Field(..., description="Orthonormal eigenvectors (columns)")
    residuals: np.ndarray = Field(..., description="||U_F xi_j - e^{-i alpha_j} xi_j||")
    clusters: List[List[int]] = Field(default_factory=list, description="Degenerate groups")
    period: Optional[float] = Field(default=None, gt=0, description="T, when known")

    @field_validator("phases", "residuals", mode="before")
    @classmethod
    def validate_real(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=1, dtype=float)

    @field_validator("vectors", mode="before")
    @classmethod
    def validate_vectors(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @property
    def size(self) -> int:
        return int(self.phases.shape[0])

    def vector(self, index: int) -> np.ndarray:
        return self.vectors[:, index]

    def quasienergies(self) -> np.ndarray:
        """alpha_j / T (requires the period)."""
        if self.period is None:
            raise ValueError("Period unknown: quasienergies need T")
        return self.phases / self.period


class QuasienergyBlock(BaseModel):
    """Truncated Fourier-block matrix K_{nm} = n w delta_{nm} Id + H_{n-m}, |n|, |m| <= N."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    cutoff: int = Field(..., ge=1, description="Fourier cutoff N")
    omega: float = Field(..., gt=0, description="Base frequency w = 2 pi / T")
    quadrature: int = Field(..., description="Samples per period Q")
    dim: int = Field(..., ge=1, description="Physical dimension d")
    matrix: np.ndarray = Field(..., description="(2N+1)d x (2N+1)d Hermitian matrix")
    hermiticity_defect: float = Field(..., ge=0)

    @field_validator("matrix", mode="before")
    @classmethod
    def validate_matrix(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    @property
    def harmonics(self) -> np.ndarray:
        return np.arange(-self.cutoff, self.cutoff + 1)

    def fourier_component(self, vector: np.ndarray, n: int) -> np.ndarray:
        """Component f_n of a block vector."""
        start = (n + self.cutoff) * self.dim
        return vector[start : start + self.dim]

    def constant_vector(self, xi: np.ndarray) -> np.ndarray:
        """Block vector of the time-constant function 1 (x) xi."""
        vector = np.zeros((2 * self.cutoff + 1) * self.dim, dtype=complex)
        vector[self.cutoff * self.dim : (self.cutoff + 1) * self.dim] = xi
        return vector

    def sample(self, vector: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Evaluate f(t) = sum_n e^{i n w t} f_n at the given times (rows)."""
        coefficients = vector.reshape(2 * self.cutoff + 1, self.dim)
        waves = np.exp(1j * self.omega * np.outer(times, self.harmonics))
        return waves @ coefficients


class QuasienergyEigensystem(BaseModel):
    """Eigenpairs of a QuasienergyBlock with the mean Fourier index of each eigenvector."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    block: QuasienergyBlock
    values: np.ndarray = Field(..., description="Quasienergies lambda, ascending")
    vectors: np.ndarray = Field(..., description="Eigenvectors (columns)")
    mean_index: np.ndarray = Field(..., description="sum_n n ||f_n||^2 per eigenvector")
    interior: np.ndarray = Field(..., description="Mask of eigenvectors away from the cutoff")

    @field_validator("values", "mean_index", mode="before")
    @classmethod
    def validate_real(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=1, dtype=float)

    @field_validator("vectors", mode="before")
    @classmethod
    def validate_vectors(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @field_validator("interior", mode="before")
    @classmethod
    def validate_mask(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=1, dtype=bool)

    def interior_values(self) -> np.ndarray:
        return self.values[self.interior]


class PhaseMatch(BaseModel):
    """One matched pair of a Floquet phase rate and a quasienergy, both reduced mod w."""

    floquet_rate: float = Field(..., description="alpha / T mod w")
    quasienergy: float = Field(..., description="lambda mod w")
    mismatch: float = Field(..., ge=0, description="Wraparound distance")


class CorrespondenceReport(BaseModel):
    """Matching of monodromy eigenphases with interior quasienergies."""

    cutoff: int = Field(..., description="Fourier cutoff N of the block")
    pairs: List[PhaseMatch] = Field(default_factory=list)
    max_mismatch: float = Field(..., ge=0)
    unmatched_count: int = Field(..., ge=0, description="Phases without a match in tolerance")
    tolerance: float = Field(..., gt=0)


class ConvergenceStudy(BaseModel):
    """Correspondence mismatch as a function of the Fourier cutoff."""

    cutoffs: List[int]
    mismatches: List[float]
    monotone: bool = Field(..., description="Strictly decreasing, or already below the floor")
    floor: float


class ModeRegularityReport(BaseModel):
    """Finite-difference derivative norm of a sampled Floquet mode and its grid stability."""

    samples: int
    max_derivative_norm: float = Field(..., ge=0)
    coarse_derivative_norm: float = Field(..., ge=0, description="Same on the 2x coarser grid")
    relative_change: float = Field(..., ge=0)
    stable: bool


class FloquetModeSamples(BaseModel):
    """f(t_j) = e^{i lambda t_j} U(t_j, 0) xi on t_j = j T / Q, j = 0..Q."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    quasienergy: float
    period: float = Field(..., gt=0)
    times: np.ndarray
    values: np.ndarray = Field(..., description="Rows are f(t_j)")

    @field_validator("times", mode="before")
    @classmethod
    def validate_times(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=1, dtype=float)

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])


class SynthesisResult(BaseModel):
    """sigma -> U(0, sigma) xi rebuilt from the quasienergy expansion of 1 (x) xi."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    orbit: OrbitSample = Field(..., description="Synthesized U(0, sigma) xi on the sigma grid")
    frequencies: np.ndarray = Field(..., description="Quasienergies lambda_m with c_m != 0")
    coefficients: np.ndarray = Field(..., description="Expansion coefficients c_m")
    expansion_residual: float = Field(..., ge=0)
    max_deviation: Optional[float] = Field(
        default=None, description="Max distance to the directly propagated U(0, sigma) xi"
    )
