"""Energy Diagnostics - Expectation series E_psi^A(t) and their boundedness checks."""
from typing import Optional

import numpy as np
from sklearn.linear_model import LinearRegression

from ..data_models.model_spec import ModelSpec
from ..data_models.operators import HermitianOperator
from ..data_models.orbit import OrbitSample
from ..data_models.reports import EnergyBoundReport, EnergySeries, StabilityReport
from ..utils.constants import STABILITY_MIN_DECADES
from ..utils.errors import GridMismatch, HorizonTooShort
from ..utils.logging import setup_logging
from ..utils.settings import LabSettings, get_settings
from .hamiltonian_models import ModelEngine
from .orbit_diagnostics import OrbitDiagnostics

logger = setup_logging(__name__)

IMAGINARY_RESIDUE = 1e-10


class EnergyDiagnostics:
    """Build energy series from orbits and test them against the bounded-energy criteria."""

    def __init__(
        self,
        engine: Optional[ModelEngine] = None,
        settings: Optional[LabSettings] = None,
    ):
        """
        Initialize the energy diagnostics.

        Args:
            engine: ModelEngine supplying H(t), H0, V(t) and V'(t)
            settings: Stability thresholds (default: process-wide settings)
        """
        self.engine = engine or ModelEngine()
        self.settings = settings or get_settings()

    # ========================================================================
    # Series
    # ========================================================================

    def energy_series(
        self, orbit: OrbitSample, probe: HermitianOperator, label: str = "A"
    ) -> EnergySeries:
        """E(t) = <psi(t), A psi(t)> for a fixed Hermitian probe."""
        raw = np.einsum("ki,ij,kj->k", orbit.states.conj(), probe.matrix, orbit.states)
        return self._series(label, orbit, raw)

    def generator_energy_series(self, orbit: OrbitSample, model: ModelSpec) -> EnergySeries:
        """E_psi(t) = <psi(t), H(t) psi(t)>."""
        raw = np.array(
            [
                np.vdot(state, self.engine.hamiltonian_raw(model, float(t)) @ state)
                for t, state in zip(orbit.times, orbit.states)
            ]
        )
        return self._series("H(t)", orbit, raw)

    def free_energy_series(self, orbit: OrbitSample, model: ModelSpec) -> EnergySeries:
        """E0_psi(t) = <psi(t), H0 psi(t)>."""
        return self.energy_series(orbit, self.engine.free_hamiltonian(model), label="H0")

    def schrodinger_energy_series(self, orbit: OrbitSample) -> EnergySeries:
        """Re <psi(t), i dpsi/dt(t)> with the derivative from centered differences."""
        derivative = OrbitDiagnostics.derivative_orbit(orbit)
        inner = orbit.states[1:-1]
        raw = np.einsum("ki,ki->k", inner.conj(), 1j * derivative.states)
        return self._series("i d/dt", derivative, raw, norm_sq=self._norm_sq(orbit))

    def _series(
        self,
        label: str,
        orbit: OrbitSample,
        raw: np.ndarray,
        norm_sq: Optional[float] = None,
    ) -> EnergySeries:
        residue = float(np.max(np.abs(raw.imag))) if raw.size else 0.0
        scale = max(1.0, float(np.max(np.abs(raw.real)))) if raw.size else 1.0
        if residue > IMAGINARY_RESIDUE * scale:
            logger.warning(f"Energy series '{label}' has imaginary residue {residue:.3e}")
        return EnergySeries(
            probe=label,
            times=[float(t) for t in orbit.times],
            values=[float(v) for v in raw.real],
            norm_sq=self._norm_sq(orbit) if norm_sq is None else norm_sq,
            max_imaginary=residue,
        )

    @staticmethod
    def _norm_sq(orbit: OrbitSample) -> float:
        return float(np.vdot(orbit.states[0], orbit.states[0]).real)

    # ========================================================================
    # Derivative identity and drift bounds
    # ========================================================================

    def energy_derivative_check(self, orbit: OrbitSample, model: ModelSpec) -> float:
        """
        max_t |dE/dt - <psi(t), V'(t) psi(t)>| with dE/dt by centered differences.

        The defect is O(h^2): halving the step divides it by about four.

        Raises:
            DerivativeNotAvailable: If the model does not expose V'(t)
        """
        self.engine.potential_derivative_raw(model, orbit.grid.t0)
        times, values = self.generator_energy_series(orbit, model).as_arrays()
        rate = (values[2:] - values[:-2]) / (2 * orbit.grid.h)
        expected = np.array(
            [
                np.vdot(state, self.engine.potential_derivative_raw(model, float(t)) @ state).real
                for t, state in zip(times[1:-1], orbit.states[1:-1])
            ]
        )
        defect = float(np.max(np.abs(rate - expected))) if rate.size else 0.0
        logger.debug(f"Energy derivative identity defect {defect:.3e} at h={orbit.grid.h}")
        return defect

    def sup_potential_norm(self, model: ModelSpec, orbit: OrbitSample) -> float:
        """Sampled sup_t ||V(t)|| over the orbit grid."""
        return float(
            max(
                np.linalg.norm(self.engine.potential_raw(model, float(t)), ord=2)
                for t in orbit.times
            )
        )

    def bounded_v_equivalence(
        self, series: EnergySeries, free_series: EnergySeries, sup_v: float
    ) -> float:
        """
        max_t |E(t) - E0(t)| - sup||V|| ||psi0||^2, clipped at zero.

        Raises:
            GridMismatch: If the series are sampled on different grids
        """
        series.require_same_grid(free_series)
        if abs(series.norm_sq - free_series.norm_sq) > 1e-12 * max(1.0, series.norm_sq):
            raise GridMismatch("Series come from states of different norm")
        _, values = series.as_arrays()
        _, free_values = free_series.as_arrays()
        gap = float(np.max(np.abs(values - free_values))) if values.size else 0.0
        return max(gap - sup_v * series.norm_sq, 0.0)

    def energy_drift_bound(self, orbit: OrbitSample, model: ModelSpec) -> EnergyBoundReport:
        """
        Pointwise excess of |E(t) - E(t0)| over int_{t0}^t ||V'(s)|| ds and over (t - t0) sup||V'||.

        The integral uses the analytic majorant of ||V'|| exposed by the model; the sup is
        sampled on the orbit grid. Times are assumed to satisfy t >= t0 >= 0.

        Raises:
            DerivativeNotAvailable: If the model does not expose V'(t)
        """
        self.engine.potential_derivative_raw(model, orbit.grid.t0)
        times, values = self.generator_energy_series(orbit, model).as_arrays()
        drift = np.abs(values - values[0])
        scale = self._norm_sq(orbit)
        start = self.engine.potential_derivative_norm_integral(model, float(times[0]))
        integral = np.array(
            [self.engine.potential_derivative_norm_integral(model, float(t)) - start for t in times]
        )
        sup_derivative = float(
            max(
                np.linalg.norm(self.engine.potential_derivative_raw(model, float(t)), ord=2)
                for t in times
            )
        )
        crude = (times - times[0]) * sup_derivative
        return EnergyBoundReport(
            max_drift=float(np.max(drift)),
            sup_derivative_norm=sup_derivative,
            integral_violation=float(max(np.max(drift - scale * integral), 0.0)),
            sup_violation=float(max(np.max(drift - scale * crude), 0.0)),
        )

    def cross_energy_covariance(
        self,
        orbit_j: OrbitSample,
        orbit_k: OrbitSample,
        alpha_j: float,
        alpha_k: float,
        period: float,
        probe: Optional[HermitianOperator] = None,
        model: Optional[ModelSpec] = None,
    ) -> float:
        """
        max_t |E_jk(t + T) - e^{i(alpha_j - alpha_k)} E_jk(t)| for two Floquet orbits.

        E_jk(t) = <psi_j(t), A psi_k(t)> with A the probe, or H0 of the model when no probe
        is given.

        Raises:
            GridMismatch: If the orbits use different grids or T is not a multiple of the step
        """
        if orbit_j.grid != orbit_k.grid:
            raise GridMismatch("Cross energies need both orbits on one grid")
        if probe is None:
            if model is None:
                raise ValueError("Either a probe or a model is required")
            probe = self.engine.free_hamiltonian(model)
        grid = orbit_j.grid
        shift = period / grid.h
        m = int(round(shift))
        if abs(shift - m) > 1e-6 or m < 1 or m > grid.count:
            raise GridMismatch(f"Period {period} is not a multiple of the step {grid.h}")
        cross = np.einsum("ki,ij,kj->k", orbit_j.states.conj(), probe.matrix, orbit_k.states)
        phase = np.exp(1j * (alpha_j - alpha_k))
        return float(np.max(np.abs(cross[m:] - phase * cross[:-m])))

    # ========================================================================
    # Stability verdict
    # ========================================================================

    def stability_verdict(self, series: EnergySeries) -> StabilityReport:
        """
        Classify an energy series as bounded-consistent, growth or indeterminate.

        A least-squares fit of log|E| against log t over the latter half of the log-time
        range gives the growth exponent; growth needs an exponent above the configured
        threshold with a good fit. Otherwise the series is bounded-consistent when the sup
        over the last decade stays within the configured ratio of the previous decade.

        Raises:
            HorizonTooShort: If the positive times span fewer than two decades
        """
        times, values = series.as_arrays()
        positive = times > 0
        times, values = times[positive], values[positive]
        if times.size < 4:
            raise HorizonTooShort("Stability verdicts need positive sample times")
        t_min, t_max = float(times[0]), float(times[-1])
        decades = float(np.log10(t_max / t_min))
        if decades < STABILITY_MIN_DECADES:
            raise HorizonTooShort(f"Series spans {decades:.2f} decades; need 2")

        latter = times >= np.sqrt(t_min * t_max)
        log_t = np.log(times[latter]).reshape(-1, 1)
        log_e = np.log(np.maximum(np.abs(values[latter]), np.finfo(float).tiny))
        regression = LinearRegression().fit(log_t, log_e)
        gamma = float(regression.coef_[0])
        r2 = float(regression.score(log_t, log_e)) if np.ptp(log_e) > 0 else 1.0

        magnitudes = np.abs(values)
        last = magnitudes[times >= t_max / 10]
        previous = magnitudes[(times >= t_max / 100) & (times < t_max / 10)]
        sup_last = float(np.max(last))
        sup_previous = float(np.max(previous)) if previous.size else sup_last

        if gamma > self.settings.stability_growth_exponent and r2 >= self.settings.stability_fit_r2:
            verdict = "growth"
        elif sup_last <= self.settings.stability_sup_ratio * sup_previous:
            verdict = "bounded-consistent"
        else:
            verdict = "indeterminate"
        logger.info(f"Stability of '{series.probe}': {verdict} (gamma={gamma:.3f}, R2={r2:.3f})")
        return StabilityReport(
            verdict=verdict,
            growth_exponent=gamma,
            fit_r2=r2,
            sup_last_decade=sup_last,
            sup_previous_decade=sup_previous,
            decades=decades,
        )
