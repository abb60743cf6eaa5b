"""Runtime settings, overridable through FLOQUET_LAB_* environment variables."""
from functools import lru_cache
from typing import Optional

from pydantic import Field, PositiveInt
from pydantic_settings import BaseSettings, SettingsConfigDict

from .constants import (
    EIGENSYSTEM_TOLERANCE,
    HERMITICITY_TOLERANCE,
    LOG_FILE,
    LOG_LEVEL,
    NORM_DRIFT_LIMIT,
    ORBIT_ACCEPT_DRIFT,
    PHASE_CLUSTER_GAP,
    RENORMALIZE_EVERY,
    STABILITY_FIT_R2,
    STABILITY_GROWTH_EXPONENT,
    STABILITY_SUP_RATIO,
    UNITARITY_TOLERANCE,
)


class LabSettings(BaseSettings):
    """Tolerances and process-level knobs shared by every service."""

    model_config = SettingsConfigDict(
        env_prefix="FLOQUET_LAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    threads: PositiveInt = Field(default=1, description="Worker cap for parallel maps")
    log_level: str = Field(default=LOG_LEVEL, description="Root log level")
    log_file: Optional[str] = Field(default=LOG_FILE, description="Rotating log file path")

    hermiticity_tolerance: float = Field(default=HERMITICITY_TOLERANCE, gt=0)
    unitarity_tolerance: float = Field(default=UNITARITY_TOLERANCE, gt=0)
    eigensystem_tolerance: float = Field(default=EIGENSYSTEM_TOLERANCE, gt=0)
    phase_cluster_gap: float = Field(default=PHASE_CLUSTER_GAP, gt=0)

    norm_drift_limit: float = Field(default=NORM_DRIFT_LIMIT, gt=0)
    orbit_accept_drift: float = Field(default=ORBIT_ACCEPT_DRIFT, gt=0)
    renormalize_every: PositiveInt = Field(default=RENORMALIZE_EVERY)

    stability_growth_exponent: float = Field(default=STABILITY_GROWTH_EXPONENT, gt=0)
    stability_sup_ratio: float = Field(default=STABILITY_SUP_RATIO, gt=1)
    stability_fit_r2: float = Field(default=STABILITY_FIT_R2, gt=0, le=1)


@lru_cache(maxsize=1)
def get_settings() -> LabSettings:
    """Return the process-wide settings instance (environment is read once)."""
    return LabSettings()
