"""Scenario Data Models - Configuration schema of a scenario run and the report it produces."""
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .model_spec import ModelSpec, OperatorSpec

# ============================================================================
# Initial states
# ============================================================================


class BasisState(BaseModel):
    """Standard basis vector e_index."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["basis"] = "basis"
    index: int = Field(..., ge=0)


class CoefficientState(BaseModel):
    """Explicit components; normalized unless normalize is false."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["coefficients"] = "coefficients"
    real: List[float] = Field(..., min_length=1)
    imag: Optional[List[float]] = None
    normalize: bool = True

    @model_validator(mode="after")
    def validate_lengths(self) -> "CoefficientState":
        if self.imag is not None and len(self.imag) != len(self.real):
            raise ValueError("imag must have as many entries as real")
        return self


class FloquetState(BaseModel):
    """Equal-weight combination of monodromy eigenvectors, indexed by ascending eigenphase."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["floquet"] = "floquet"
    indices: List[int] = Field(..., min_length=1)

    @field_validator("indices", mode="after")
    @classmethod
    def validate_distinct(cls, v: List[int]) -> List[int]:
        if len(set(v)) != len(v) or min(v) < 0:
            raise ValueError("Floquet indices must be distinct and nonnegative")
        return v


InitialStateSpec = Annotated[
    Union[BasisState, CoefficientState, FloquetState], Field(discriminator="kind")
]

# ============================================================================
# Grid
# ============================================================================


class GridSpec(BaseModel):
    """Uniform sampling grid [t0, t1] with step h."""

    model_config = ConfigDict(extra="forbid")

    t0: float = 0.0
    t1: float
    h: float = Field(..., gt=0)

    @model_validator(mode="after")
    def validate_span(self) -> "GridSpec":
        if self.t1 <= self.t0:
            raise ValueError("t1 must exceed t0")
        return self


# ============================================================================
# Diagnostics
# ============================================================================

EnergySource = Literal["probe", "generator", "free", "schrodinger"]


class ApScanSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["ap_scan"] = "ap_scan"
    epsilon: float = Field(..., gt=0)
    tau_max: Optional[float] = Field(default=None, gt=0, description="Default: half the horizon")
    check_grid: bool = Field(default=False, description="Apply the grid-resolution bound")


class CoveringSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["covering_number"] = "covering_number"
    epsilon: float = Field(..., gt=0)
    horizons: List[float] = Field(..., min_length=1)

    @field_validator("horizons", mode="after")
    @classmethod
    def validate_nested(cls, v: List[float]) -> List[float]:
        if any(h <= 0 for h in v) or any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("horizons must be positive and ascending")
        return v


class TailEscapeSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["tail_escape"] = "tail_escape"
    probe: OperatorSpec
    energies: List[float] = Field(..., min_length=1)


class RageSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["rage_average"] = "rage_average"
    sites: Optional[List[int]] = Field(
        default=None, description="Projection onto these basis vectors (default: initial state)"
    )
    taus: List[float] = Field(..., min_length=1)


class EnergySeriesSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["energy_series"] = "energy_series"
    source: EnergySource = "free"
    probe: Optional[OperatorSpec] = None

    @model_validator(mode="after")
    def validate_probe(self) -> "EnergySeriesSpec":
        if self.source == "probe" and self.probe is None:
            raise ValueError("source 'probe' requires a probe operator")
        return self


class StabilitySpec(EnergySeriesSpec):
    kind: Literal["stability_verdict"] = "stability_verdict"


class RecurrenceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["recurrence"] = "recurrence"
    samples: int = Field(default=200, ge=1, description="Sampled times for the recurrence")


class CorrespondenceSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["correspondence"] = "correspondence"
    cutoffs: List[int] = Field(..., min_length=1)

    @field_validator("cutoffs", mode="after")
    @classmethod
    def validate_cutoffs(cls, v: List[int]) -> List[int]:
        if any(n < 1 for n in v) or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("cutoffs must be positive and strictly ascending")
        return v


class ReleqSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["releq"] = "releq"
    cutoff: int = Field(..., ge=1)
    sigma_fraction: float = Field(default=0.25, gt=0, lt=1, description="sigma / T")


class SynthesisSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["synthesis"] = "synthesis"
    cutoff: int = Field(..., ge=1)
    epsilon: Optional[float] = Field(default=None, gt=0, description="ap_scan of the result")


class EnergyBoundsSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["energy_bounds"] = "energy_bounds"


class AfIdentitySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["af_identity"] = "af_identity"
    grid_size: int = Field(..., ge=1, description="Torus grid size q")
    indices: List[int] = Field(..., min_length=1, description="Enlarged eigenvectors in f")
    probe: OperatorSpec
    period: Optional[float] = Field(
        default=None, gt=0, description="T2 for theta-independent fibre models"
    )
    epsilon: Optional[float] = Field(default=None, gt=0)
    eigen_flow_periods: int = Field(default=100, ge=1)


class ConvergentSweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["convergent_sweep"] = "convergent_sweep"
    sizes: List[int] = Field(..., min_length=1, description="Grid sizes q")
    probe: Optional[OperatorSpec] = None
    periods: int = Field(default=20, ge=1)


DiagnosticSpec = Annotated[
    Union[
        AfIdentitySpec,
        ApScanSpec,
        ConvergentSweepSpec,
        CorrespondenceSpec,
        CoveringSpec,
        EnergyBoundsSpec,
        EnergySeriesSpec,
        RageSpec,
        RecurrenceSpec,
        ReleqSpec,
        StabilitySpec,
        SynthesisSpec,
        TailEscapeSpec,
    ],
    Field(discriminator="kind"),
]

DIAGNOSTIC_KINDS = (
    "af_identity",
    "ap_scan",
    "convergent_sweep",
    "correspondence",
    "covering_number",
    "energy_bounds",
    "energy_series",
    "rage_average",
    "recurrence",
    "releq",
    "stability_verdict",
    "synthesis",
    "tail_escape",
)
STATE_KINDS = ("basis", "coefficients", "floquet")


class ScenarioConfig(BaseModel):
    """One scenario: a model, an initial state, a grid and the diagnostics to run."""

    model_config = ConfigDict(extra="forbid")

    scenario: str = Field(..., pattern=r"^[A-Za-z0-9_.-]+$", description="Artifact file prefix")
    model: ModelSpec
    initial_state: InitialStateSpec
    grid: GridSpec
    method: Literal["auto", "stepped", "closed_form"] = "auto"
    diagnostics: List[DiagnosticSpec] = Field(default_factory=list)
    output_dir: str = "results"
    seed: Optional[int] = Field(default=None, description="Recorded for reproducibility")


# ============================================================================
# Run report
# ============================================================================


class DiagnosticEntry(BaseModel):
    """Outcome of one configured diagnostic."""

    index: int
    kind: str
    status: Literal["ok", "error"]
    verdict: Optional[str] = None
    metrics: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[str] = None
    artifact: Optional[str] = None


class RunReport(BaseModel):
    """Resolved configuration, per-diagnostic outcomes and the files written."""

    scenario: str
    config: Dict[str, Any]
    tolerances: Dict[str, float]
    entries: List[DiagnosticEntry] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)
    errors: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict, exclude=True)

    @property
    def success(self) -> bool:
        return not self.errors and all(entry.status == "ok" for entry in self.entries)
