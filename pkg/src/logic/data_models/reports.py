"""Report Data Models - Finite-horizon verdicts of the orbit and energy diagnostics."""
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.linalg import orth

from ..utils.constants import (
    AP_VERDICT_VALUES,
    RAGE_DECREASE_RTOL,
    STABILITY_VERDICT_VALUES,
    TAIL_TREND_VALUES,
)
from ..utils.errors import GridMismatch
from .operators import frozen_array


class FiniteRankProjection(BaseModel):
    """Orthogonal projection C = Q Q^dag onto the span of orthonormal columns Q."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    basis: np.ndarray = Field(..., description="Orthonormal columns spanning ran C")
    label: str = Field(default="C", description="Name used in reports")

    @field_validator("basis", mode="before")
    @classmethod
    def validate_basis(cls, v: Any) -> np.ndarray:
        array = np.asarray(v, dtype=complex)
        if array.ndim == 1:
            array = array[:, None]
        # Re-orthonormalize so any spanning set is accepted
        return frozen_array(orth(array), ndim=2)

    @classmethod
    def from_sites(cls, dim: int, sites: List[int]) -> "FiniteRankProjection":
        """Projection onto standard basis vectors e_site."""
        basis = np.zeros((dim, len(sites)), dtype=complex)
        for column, site in enumerate(sites):
            basis[site, column] = 1.0
        return cls(basis=basis, label=f"sites{list(sites)}")

    @classmethod
    def from_state(cls, psi: np.ndarray) -> "FiniteRankProjection":
        """Rank-one projection |psi><psi| / ||psi||^2."""
        return cls(basis=np.asarray(psi, dtype=complex), label="state")

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def rank(self) -> int:
        return int(self.basis.shape[1])

    def norms(self, states: np.ndarray) -> np.ndarray:
        """||C psi_k|| for every row psi_k."""
        return np.linalg.norm(states @ self.basis.conj(), axis=1)


class APWitness(BaseModel):
    """Shift tau, time t and deviation ||psi(t + tau) - psi(t)|| exhibiting a violation."""

    tau: float
    t: float
    deviation: float = Field(..., ge=0)


class APReport(BaseModel):
    """epsilon-almost periods of a sampled orbit and the largest gap between them."""

    epsilon: float = Field(..., gt=0, description="Tolerance epsilon")
    horizon: float = Field(..., gt=0, description="Sampled span T_max")
    tau_max: float = Field(..., gt=0, description="Largest tested shift")
    step: float = Field(..., gt=0, description="tau resolution (grid step)")
    almost_periods: List[float] = Field(
        default_factory=list, description="Non-trivial tau with sup-deviation <= epsilon"
    )
    max_gap: float = Field(..., ge=0, description="Largest gap, endpoints 0 and tau_max included")
    verdict: str = Field(..., description="AP-consistent or violating-witness")
    relative_density_length: Optional[float] = Field(
        default=None, description="L = max_gap + step when AP-consistent"
    )
    witness: Optional[APWitness] = None
    taus: List[float] = Field(default_factory=list, exclude=True)
    deviations: List[float] = Field(default_factory=list, exclude=True)

    @field_validator("verdict", mode="after")
    @classmethod
    def validate_verdict(cls, v: str) -> str:
        if v not in AP_VERDICT_VALUES:
            raise ValueError(f"verdict must be one of {AP_VERDICT_VALUES}")
        return v

    @property
    def consistent(self) -> bool:
        return self.verdict == "AP-consistent"


class CoveringReport(BaseModel):
    """Greedy epsilon-net sizes N(epsilon, T) over nested horizons."""

    epsilon: float = Field(..., gt=0)
    horizons: List[float]
    counts: List[int] = Field(..., description="N(epsilon, T) per horizon")
    saturated: bool = Field(..., description="N(epsilon, 2T*) = N(epsilon, T*) for a tested T*")
    saturation_horizon: Optional[float] = Field(default=None, description="Smallest such T*")

    @model_validator(mode="after")
    def validate_counts(self) -> "CoveringReport":
        """N >= 1 and nondecreasing in T."""
        if len(self.counts) != len(self.horizons):
            raise ValueError("One covering number per horizon required")
        if any(n < 1 for n in self.counts):
            raise ValueError("Covering numbers are at least 1")
        if any(b < a for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError("Covering numbers must be nondecreasing in the horizon")
        return self


class TailEscapeReport(BaseModel):
    """beta(E) = max_t ||F(A > E) psi(t)|| / ||psi(t)|| on an energy grid."""

    probe: str = Field(..., description="Probe operator label")
    energies: List[float]
    beta: List[float]
    trend: str

    @field_validator("trend", mode="after")
    @classmethod
    def validate_trend(cls, v: str) -> str:
        if v not in TAIL_TREND_VALUES:
            raise ValueError(f"trend must be one of {TAIL_TREND_VALUES}")
        return v


class RageReport(BaseModel):
    """Cesaro averages a(tau) = (1/tau) int_0^tau ||C psi(t)|| dt."""

    projection: str
    rank: int = Field(..., ge=1)
    taus: List[float]
    averages: List[float]

    @field_validator("averages", mode="after")
    @classmethod
    def validate_nonnegative(cls, v: List[float]) -> List[float]:
        if any(a < 0 for a in v):
            raise ValueError("RAGE averages are nonnegative")
        return v

    def strictly_decreasing(self) -> bool:
        return all(
            b < a - RAGE_DECREASE_RTOL * max(abs(a), 1.0)
            for a, b in zip(self.averages, self.averages[1:])
        )


class EnergySeries(BaseModel):
    """E_psi^A(t) = <psi(t), A psi(t)> sampled on an orbit grid."""

    probe: str = Field(..., description="Probe operator label")
    times: List[float]
    values: List[float]
    norm_sq: float = Field(default=1.0, ge=0, description="||psi_0||^2 of the underlying orbit")
    max_imaginary: float = Field(default=0.0, ge=0, description="Largest discarded imaginary part")

    @model_validator(mode="after")
    def validate_lengths(self) -> "EnergySeries":
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have the same length")
        return self

    def as_arrays(self):
        return np.asarray(self.times, dtype=float), np.asarray(self.values, dtype=float)

    def require_same_grid(self, other: "EnergySeries") -> None:
        """
        Raises:
            GridMismatch: If the two series are sampled at different times
        """
        mine, theirs = np.asarray(self.times), np.asarray(other.times)
        if mine.shape != theirs.shape or not np.allclose(mine, theirs, rtol=0, atol=1e-12):
            raise GridMismatch(f"Series '{self.probe}' and '{other.probe}' use different grids")


class StabilityReport(BaseModel):
    """Boundedness verdict for an energy series with its growth fit."""

    verdict: str
    growth_exponent: float = Field(..., description="Slope of log|E| vs log t on the latter half")
    fit_r2: float = Field(..., description="R^2 of the log-log fit")
    sup_last_decade: float
    sup_previous_decade: float
    decades: float = Field(..., ge=0, description="log10(t_max / t_min) of the positive times")

    @field_validator("verdict", mode="after")
    @classmethod
    def validate_verdict(cls, v: str) -> str:
        if v not in STABILITY_VERDICT_VALUES:
            raise ValueError(f"verdict must be one of {STABILITY_VERDICT_VALUES}")
        return v


class EnergyBoundReport(BaseModel):
    """Pointwise checks of |E(t) - E(0)| against integrals of ||V'(s)||."""

    max_drift: float = Field(..., ge=0, description="max_t |E(t) - E(0)|")
    sup_derivative_norm: float = Field(..., ge=0, description="Sampled sup_s ||V'(s)||")
    integral_violation: float = Field(..., ge=0, description="Worst excess over int ||V'||")
    sup_violation: float = Field(..., ge=0, description="Worst excess over t sup ||V'||")
