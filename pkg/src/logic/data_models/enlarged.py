"""Enlarged-Space Data Models - Torus grids, vectors of L2(S1, H) and expectation reports."""
from math import gcd
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.constants import SUMMABILITY_TREND_VALUES
from ..utils.errors import GridMismatch, ShiftMismatch
from .operators import frozen_array
from .reports import APReport, StabilityReport


class TorusGrid(BaseModel):
    """q-point grid theta_j = 2 pi j / q, rotated by p cells per stroboscopic period."""

    model_config = ConfigDict(frozen=True)

    size: int = Field(..., ge=1, description="Grid size q")
    shift: int = Field(..., ge=0, description="Rotation p in grid cells per T2")
    alpha: Optional[float] = Field(default=None, description="Frequency ratio approximated by p/q")
    period: float = Field(default=2 * np.pi, gt=0, description="Stroboscopic period T2")

    @model_validator(mode="after")
    def validate_convergent(self) -> "TorusGrid":
        """p/q is reduced and, when alpha is known, within 1/q^2 of it."""
        if self.shift >= self.size and self.size > 1:
            raise ShiftMismatch(f"Shift {self.shift} must be below the grid size {self.size}")
        if self.shift and gcd(self.shift, self.size) != 1:
            raise ShiftMismatch(f"{self.shift}/{self.size} is not in lowest terms")
        if self.alpha is not None:
            fractional = self.alpha - np.floor(self.alpha)
            error = abs(fractional - self.shift / self.size)
            error = min(error, 1.0 - error)
            if error > 1.0 / self.size**2 + 1e-15:
                raise ShiftMismatch(
                    f"{self.shift}/{self.size} misses alpha={self.alpha} by {error:.3e} > 1/q^2"
                )
        return self

    @property
    def thetas(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.size) / self.size

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.size

    @property
    def weights(self) -> np.ndarray:
        """Uniform measure d theta / 2 pi on the grid."""
        return np.full(self.size, 1.0 / self.size)


class EnlargedState(BaseModel):
    """Vector of L2(S1, H): one physical vector f(theta_j) per grid point (rows)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray = Field(..., description="Shape (q, d)")

    @field_validator("values", mode="before")
    @classmethod
    def validate_values(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @classmethod
    def constant(cls, size: int, vector: np.ndarray) -> "EnlargedState":
        """theta -> vector on a q-point grid."""
        vector = np.asarray(vector, dtype=complex)
        return cls(values=np.tile(vector, (size, 1)))

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    def norm_sq(self) -> float:
        """(1/q) sum_j ||f(theta_j)||^2."""
        return float(np.mean(np.sum(np.abs(self.values) ** 2, axis=1)))

    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq()))

    def inner(self, other: "EnlargedState") -> complex:
        """<self, other> = (1/q) sum_j <f(theta_j), g(theta_j)>."""
        self.require_compatible(other)
        return complex(np.mean(np.sum(self.values.conj() * other.values, axis=1)))

    def require_compatible(self, other: "EnlargedState") -> None:
        """
        Raises:
            GridMismatch: If the states live on different grids or fibres
        """
        if self.values.shape != other.values.shape:
            raise GridMismatch(f"States of shape {self.values.shape} and {other.values.shape}")

    def flatten(self) -> np.ndarray:
        return self.values.reshape(-1)


class EnlargedSpectrum(BaseModel):
    """Eigenpairs of the generalized Floquet operator on a torus grid."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: TorusGrid
    dim: int = Field(..., ge=1, description="Physical dimension d")
    phases: np.ndarray = Field(..., description="Eigenphases in [0, 2pi), U_F f = e^{-i phase} f")
    vectors: np.ndarray = Field(..., description="Columns are flattened (q*d) eigenvectors")
    residual: float = Field(..., ge=0, description="Largest eigen-relation residual")

    @field_validator("phases", mode="before")
    @classmethod
    def validate_phases(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=1, dtype=float)

    @field_validator("vectors", mode="before")
    @classmethod
    def validate_vectors(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @property
    def quasienergies(self) -> np.ndarray:
        """lambda = phase / T2."""
        return self.phases / self.grid.period

    def state(self, index: int) -> EnlargedState:
        """Eigenvector index as an EnlargedState of unit enlarged norm."""
        column = self.vectors[:, index] * np.sqrt(self.grid.size)
        return EnlargedState(values=column.reshape(self.grid.size, self.dim))


class SpacingStatistics(BaseModel):
    """Nearest-neighbour eigenphase spacings, normalized to unit mean, and histogram flatness."""

    size: int
    shift: int
    count: int = Field(..., description="Number of phases")
    spacing_mean: float
    spacing_std: float
    histogram_deviation: float = Field(..., ge=0, description="Largest relative bin deviation")
    histogram: List[int]


class AFReport(BaseModel):
    """A_f(t) from the eigen-expansion and from direct fibrewise propagation."""

    b_matrix_real: List[List[float]]
    b_matrix_imag: List[List[float]]
    coefficients_real: List[float]
    coefficients_imag: List[float]
    quasienergies: List[float]
    times: List[float] = Field(default_factory=list, exclude=True)
    series: List[float] = Field(default_factory=list, exclude=True)
    direct_series: List[float] = Field(default_factory=list, exclude=True)
    b_hermiticity_defect: float = Field(..., ge=0)
    max_discrepancy: float = Field(..., ge=0)
    ap: Optional[APReport] = None
    stability: Optional[StabilityReport] = None

    @model_validator(mode="after")
    def validate_lengths(self) -> "AFReport":
        if self.direct_series and len(self.direct_series) != len(self.series):
            raise ValueError("Direct and expanded series must share the time grid")
        return self


class EigenFlowReport(BaseModel):
    """Defect of U_theta(k T2, 0) f(theta) = e^{-i lambda k T2} f(g_{k T2} theta) on the grid."""

    quasienergy: float
    periods: int = Field(..., ge=1, description="Largest k checked")
    eigen_residual: float = Field(..., ge=0, description="||U_F f - e^{-i lambda T2} f||")
    max_defect: float = Field(..., ge=0)
    energy_sup: Optional[float] = Field(
        default=None, description="sup over checked times of the fibre energy, when H exists"
    )
    flow_speed: float = Field(..., ge=0, description="Constant ||d g_t / dt|| of the torus flow")


class SummabilityReport(BaseModel):
    """Partial sums of sum_j |a_j| (|lambda_j| + sup ||d f_j / d theta||) at k and 2k terms."""

    terms: int
    partial_sum: float = Field(..., ge=0)
    half_sum: float = Field(..., ge=0)
    trend: str

    @field_validator("trend", mode="after")
    @classmethod
    def validate_trend(cls, v: str) -> str:
        if v not in SUMMABILITY_TREND_VALUES:
            raise ValueError(f"trend must be one of {SUMMABILITY_TREND_VALUES}")
        return v


class ConvergentSweep(BaseModel):
    """Enlarged-spectrum statistics over successive convergents p/q."""

    alpha: float
    statistics: List[SpacingStatistics]
    discrepancies: List[Optional[float]] = Field(
        default_factory=list, description="Expanded vs direct A_f discrepancy per q"
    )
