"""Orbit Data Models - Time grids, sampled trajectories and propagator caches."""
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..utils.constants import GRID_TIME_RTOL
from ..utils.errors import NonUnitaryInput, TimeNotOnGrid
from ..utils.settings import get_settings
from .operators import ComplexVector, frozen_array


class TimeGrid(BaseModel):
    """Uniform grid t_k = t0 + k h, k = 0..count."""

    model_config = ConfigDict(frozen=True)

    t0: float = Field(..., description="First time")
    t1: float = Field(..., description="Last time")
    h: float = Field(..., gt=0, description="Step")
    count: int = Field(..., ge=0, description="Number of steps")

    @model_validator(mode="after")
    def validate_span(self) -> "TimeGrid":
        """Ensure t1 = t0 + count * h."""
        expected = self.t0 + self.count * self.h
        if abs(expected - self.t1) > 1e-9 * max(1.0, abs(self.t1), abs(self.t0)):
            raise ValueError(f"t1={self.t1} inconsistent with t0 + count*h = {expected}")
        return self

    @classmethod
    def from_span(cls, t0: float, t1: float, h: float) -> "TimeGrid":
        """Grid covering [t0, t1] with the step nearest to h that divides the span."""
        if h <= 0:
            raise ValueError("Step h must be positive")
        count = max(int(round((t1 - t0) / h)), 0)
        step = (t1 - t0) / count if count else h
        return cls(t0=t0, t1=t0 + count * step, h=step, count=count)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.h * np.arange(self.count + 1)

    def index_of(self, t: float) -> int:
        """
        Index k with t_k = t.

        Raises:
            TimeNotOnGrid: If t is not a grid node
        """
        position = (t - self.t0) / self.h
        k = int(round(position))
        if abs(position - k) > GRID_TIME_RTOL or k < 0 or k > self.count:
            raise TimeNotOnGrid(f"t={t} is not a node of the grid [{self.t0}, {self.t1}]")
        return k

    def contains(self, t: float) -> bool:
        try:
            self.index_of(t)
        except TimeNotOnGrid:
            return False
        return True


class OrbitSample(BaseModel):
    """Uniformly sampled trajectory psi(t_k) = U(t_k, t0) psi0."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: TimeGrid = Field(..., description="Sampling grid")
    states: np.ndarray = Field(..., description="Rows are psi(t_k)")
    max_norm_drift: float = Field(..., ge=0, description="max_k | ||psi_k|| - ||psi_0|| |")
    accepted: bool = Field(default=True, description="Drift within the acceptance bound")

    @field_validator("states", mode="before")
    @classmethod
    def validate_states(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @model_validator(mode="after")
    def validate_length(self) -> "OrbitSample":
        if self.states.shape[0] != self.grid.count + 1:
            raise ValueError(
                f"{self.states.shape[0]} states for a grid of {self.grid.count + 1} nodes"
            )
        return self

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def dim(self) -> int:
        return int(self.states.shape[1])

    def state(self, k: int) -> ComplexVector:
        return ComplexVector(components=self.states[k])

    def state_at(self, t: float) -> np.ndarray:
        return self.states[self.grid.index_of(t)]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)


class PropagatorCache(BaseModel):
    """U(t_k, t0) on a uniform grid; the reference time is the grid start."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: TimeGrid = Field(..., description="Cached times")
    unitaries: np.ndarray = Field(..., description="Stack of U(t_k, t0), shape (count+1, d, d)")

    @field_validator("unitaries", mode="before")
    @classmethod
    def validate_unitaries(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=3)

    @model_validator(mode="after")
    def validate_cocycle_base(self) -> "PropagatorCache":
        """U(t0, t0) = Id and every entry unitary within tolerance."""
        if self.unitaries.shape[0] != self.grid.count + 1:
            raise ValueError("One unitary per grid node required")
        dim = self.unitaries.shape[1]
        identity = np.eye(dim)
        tol = get_settings().unitarity_tolerance
        if np.linalg.norm(self.unitaries[0] - identity) > tol:
            raise NonUnitaryInput("First cached propagator must be the identity")
        gram = np.einsum("kji,kjl->kil", self.unitaries.conj(), self.unitaries) - identity
        worst = float(np.max(np.linalg.norm(gram, axis=(1, 2))))
        if worst > tol:
            raise NonUnitaryInput(f"Cached propagator unitarity defect {worst:.3e}")
        return self

    @property
    def dim(self) -> int:
        return int(self.unitaries.shape[1])

    def at(self, t: float) -> np.ndarray:
        """U(t, t0) for a grid time t (raises TimeNotOnGrid)."""
        return self.unitaries[self.grid.index_of(t)]
