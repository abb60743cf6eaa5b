"""Scenario Pipeline - Orchestrates model setup, propagation, diagnostics and artifacts."""
import time
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import numpy as np
import pandas as pd

from ..data_models.enlarged import EnlargedState
from ..data_models.floquet import FloquetSpectrum
from ..data_models.model_spec import (
    DirectSumQuasiperiodicParams,
    ModelSpec,
    OperatorSpec,
    QuasiperiodicExactParams,
)
from ..data_models.operators import HermitianOperator
from ..data_models.orbit import OrbitSample, TimeGrid
from ..data_models.reports import EnergySeries, FiniteRankProjection
from ..data_models.scenario import (
    AfIdentitySpec,
    ApScanSpec,
    BasisState,
    CoefficientState,
    ConvergentSweepSpec,
    CorrespondenceSpec,
    CoveringSpec,
    DiagnosticEntry,
    EnergyBoundsSpec,
    EnergySeriesSpec,
    RageSpec,
    RecurrenceSpec,
    ReleqSpec,
    RunReport,
    ScenarioConfig,
    StabilitySpec,
    SynthesisSpec,
    TailEscapeSpec,
)
from ..ingestion.artifact_writer import ArtifactWriter, series_frame
from ..utils.errors import DerivativeNotAvailable, NotAnEigenvector
from ..utils.logging import setup_logging
from ..utils.settings import LabSettings, get_settings
from .energy_diagnostics import EnergyDiagnostics
from .enlarged_space import EnlargedSpaceAnalyzer
from .floquet_analyzer import FloquetAnalyzer
from .orbit_diagnostics import OrbitDiagnostics
from .propagator import Propagator
from .quasienergy import QuasienergyAnalyzer

logger = setup_logging(__name__)

BOUND_TOLERANCE = 1e-9  # Energy-bound violations below this count as satisfied


@dataclass
class DiagnosticOutcome:
    """What one diagnostic handler hands back to the pipeline."""

    verdict: Optional[str] = None
    metrics: Dict[str, Any] = field(default_factory=dict)
    frame: Optional[pd.DataFrame] = None


@dataclass
class ScenarioContext:
    """Resolved model, grid and initial state of a scenario; the orbit is built on demand."""

    config: ScenarioConfig
    grid: TimeGrid
    psi0: np.ndarray
    propagator: Propagator
    renormalize_every: int
    spectrum: Optional[FloquetSpectrum] = None

    @property
    def model(self) -> ModelSpec:
        return self.config.model

    @cached_property
    def orbit(self) -> OrbitSample:
        return self.propagator.propagate(
            self.model,
            self.psi0,
            self.grid,
            method=self.config.method,
            renormalize_every=self.renormalize_every,
        )


def _finite(value: float) -> Optional[float]:
    """JSON-safe float: non-finite values become null."""
    value = float(value)
    return value if np.isfinite(value) else None


class ScenarioPipeline:
    """Run one scenario end to end and write its CSV series and JSON report."""

    def __init__(
        self,
        propagator: Optional[Propagator] = None,
        floquet: Optional[FloquetAnalyzer] = None,
        quasienergy: Optional[QuasienergyAnalyzer] = None,
        orbits: Optional[OrbitDiagnostics] = None,
        energy: Optional[EnergyDiagnostics] = None,
        enlarged: Optional[EnlargedSpaceAnalyzer] = None,
        settings: Optional[LabSettings] = None,
    ):
        """
        Initialize pipeline with components.

        Args:
            propagator: Propagator instance (default: new instance)
            floquet: FloquetAnalyzer sharing the propagator (default: new instance)
            quasienergy: QuasienergyAnalyzer sharing the Floquet analyzer (default: new instance)
            orbits: OrbitDiagnostics instance (default: new instance)
            energy: EnergyDiagnostics instance (default: new instance)
            enlarged: EnlargedSpaceAnalyzer instance (default: new instance)
            settings: Tolerance authority (default: process-wide settings)
        """
        self.settings = settings or get_settings()
        self.propagator = propagator or Propagator(settings=self.settings)
        self.engine = self.propagator.engine
        self.floquet = floquet or FloquetAnalyzer(self.propagator, self.settings)
        self.quasienergy = quasienergy or QuasienergyAnalyzer(self.floquet, self.settings)
        self.orbits = orbits or OrbitDiagnostics(self.propagator.kernel, self.settings)
        self.energy = energy or EnergyDiagnostics(self.engine, self.settings)
        self.enlarged = enlarged or EnlargedSpaceAnalyzer(
            self.propagator, self.energy, self.orbits, self.settings
        )
        self._handlers: Dict[str, Callable[[Any, ScenarioContext], DiagnosticOutcome]] = {
            "af_identity": self._af_identity,
            "ap_scan": self._ap_scan,
            "convergent_sweep": self._convergent_sweep,
            "correspondence": self._correspondence,
            "covering_number": self._covering_number,
            "energy_bounds": self._energy_bounds,
            "energy_series": self._energy_series,
            "rage_average": self._rage_average,
            "recurrence": self._recurrence,
            "releq": self._releq,
            "stability_verdict": self._stability_verdict,
            "synthesis": self._synthesis,
            "tail_escape": self._tail_escape,
        }

    def execute(self, config: ScenarioConfig, output_dir: Optional[str] = None) -> RunReport:
        """
        Execute every configured diagnostic and write the artifacts.

        A failing diagnostic is recorded in its entry and in the report errors; the
        remaining diagnostics still run.

        Args:
            config: Validated scenario
            output_dir: Overrides config.output_dir

        Returns:
            RunReport with one entry per configured diagnostic
        """
        writer = ArtifactWriter(output_dir or config.output_dir)
        report = RunReport(
            scenario=config.scenario,
            config=config.model_dump(mode="json"),
            tolerances=self._tolerances(),
        )
        logger.info(
            f"Scenario '{config.scenario}': {config.model.variant}, "
            f"{len(config.diagnostics)} diagnostics"
        )

        context: Optional[ScenarioContext] = None
        started = time.perf_counter()
        try:
            context = self._build_context(config)
        except Exception as e:
            report.errors.append(f"[{config.scenario}] setup: {type(e).__name__}: {e}")
            logger.error(f"Scenario '{config.scenario}' setup failed: {e}")
        report.timings["setup"] = time.perf_counter() - started

        used_names: Dict[str, int] = {}
        for index, spec in enumerate(config.diagnostics):
            entry = DiagnosticEntry(index=index, kind=spec.kind, status="ok")
            started = time.perf_counter()
            try:
                if context is None:
                    raise RuntimeError("scenario setup failed")
                outcome = self._handlers[spec.kind](spec, context)
                entry.verdict = outcome.verdict
                entry.metrics = outcome.metrics
                if outcome.frame is not None:
                    name = self._artifact_name(config.scenario, spec.kind, used_names)
                    entry.artifact = writer.write_series(name, outcome.frame)
                    report.artifacts.append(entry.artifact)
            except Exception as e:
                entry.status = "error"
                entry.error = f"{type(e).__name__}: {e}"
                report.errors.append(
                    f"[{config.scenario}] diagnostics[{index}] {spec.kind}: {entry.error}"
                )
                logger.error(f"Diagnostic {index} ({spec.kind}) failed: {e}")
            report.timings[f"{index}:{spec.kind}"] = time.perf_counter() - started
            report.entries.append(entry)

        report_name = writer.write_report(report)
        logger.info(
            f"Scenario '{config.scenario}' complete: success={report.success}, "
            f"artifacts={len(report.artifacts)}, report={Path(writer.output_dir) / report_name}"
        )
        return report

    # ========================================================================
    # Setup
    # ========================================================================

    def _build_context(self, config: ScenarioConfig) -> ScenarioContext:
        model = config.model
        grid = TimeGrid.from_span(config.grid.t0, config.grid.t1, config.grid.h)
        spectrum = None
        state = config.initial_state
        if isinstance(state, BasisState):
            if state.index >= model.dim:
                raise ValueError(f"Basis index {state.index} outside dimension {model.dim}")
            psi0 = np.zeros(model.dim, dtype=complex)
            psi0[state.index] = 1.0
        elif isinstance(state, CoefficientState):
            if len(state.real) != model.dim:
                raise ValueError(f"{len(state.real)} coefficients for dimension {model.dim}")
            psi0 = np.array(state.real, dtype=complex)
            if state.imag is not None:
                psi0 = psi0 + 1j * np.array(state.imag)
            if state.normalize:
                norm = np.linalg.norm(psi0)
                if norm == 0:
                    raise ValueError("Zero initial state cannot be normalized")
                psi0 = psi0 / norm
        else:
            if max(state.indices) >= model.dim:
                raise ValueError(f"Floquet index outside dimension {model.dim}")
            period = self._period(model)
            monodromy = self.propagator.monodromy(model, period)
            spectrum = self.floquet.floquet_spectrum(monodromy, period)
            psi0 = spectrum.vectors[:, state.indices].sum(axis=1) / np.sqrt(len(state.indices))
        return ScenarioContext(
            config=config,
            grid=grid,
            psi0=psi0,
            propagator=self.propagator,
            renormalize_every=self.settings.renormalize_every,
            spectrum=spectrum,
        )

    def _period(self, model: ModelSpec) -> float:
        """T for periodic models, T2 for quasiperiodic ones."""
        if isinstance(model, QuasiperiodicExactParams):
            return model.t2
        if isinstance(model, DirectSumQuasiperiodicParams):
            return model.blocks[0].t2
        return self.engine.period(model)

    def _tolerances(self) -> Dict[str, float]:
        values = self.settings.model_dump(exclude={"threads", "log_level", "log_file"})
        return {key: float(value) for key, value in sorted(values.items())}

    @staticmethod
    def _artifact_name(scenario: str, kind: str, used: Dict[str, int]) -> str:
        used[kind] = used.get(kind, 0) + 1
        suffix = "" if used[kind] == 1 else f"-{used[kind]}"
        return f"{scenario}.{kind}{suffix}"

    def _probe(self, spec: OperatorSpec, dim: int) -> HermitianOperator:
        return self.engine.build_operator(spec, dim)

    # ========================================================================
    # Orbit diagnostics
    # ========================================================================

    def _ap_scan(self, spec: ApScanSpec, context: ScenarioContext) -> DiagnosticOutcome:
        orbit = context.orbit
        tau_max = spec.tau_max or 0.5 * (orbit.grid.t1 - orbit.grid.t0)
        generator_norm = None
        if spec.check_grid and self.engine.has_generator(context.model):
            generator_norm = max(
                np.linalg.norm(self.engine.hamiltonian_raw(context.model, float(t)), ord=2)
                for t in orbit.times
            )
        report = self.orbits.ap_scan(orbit, spec.epsilon, tau_max, generator_norm)
        metrics = {
            "almost_periods": len(report.almost_periods),
            "first_almost_period": report.almost_periods[0] if report.almost_periods else None,
            "max_gap": report.max_gap,
            "relative_density_length": report.relative_density_length,
            "max_deviation": _finite(max(report.deviations)) if report.deviations else None,
        }
        if report.witness is not None:
            metrics["witness"] = report.witness.model_dump()
        frame = pd.DataFrame({"tau": report.taus, "deviation": report.deviations})
        return DiagnosticOutcome(report.verdict, metrics, frame)

    def _covering_number(self, spec: CoveringSpec, context: ScenarioContext) -> DiagnosticOutcome:
        report = self.orbits.covering_number(context.orbit, spec.epsilon, spec.horizons)
        verdict = "saturated" if report.saturated else "unsaturated"
        metrics = {"counts": report.counts, "saturation_horizon": report.saturation_horizon}
        frame = pd.DataFrame({"horizon": report.horizons, "count": report.counts})
        return DiagnosticOutcome(verdict, metrics, frame)

    def _tail_escape(self, spec: TailEscapeSpec, context: ScenarioContext) -> DiagnosticOutcome:
        probe = self._probe(spec.probe, context.model.dim)
        report = self.orbits.tail_escape(context.orbit, probe, spec.energies, spec.probe.kind)
        frame = pd.DataFrame({"energy": report.energies, "beta": report.beta})
        return DiagnosticOutcome(report.trend, {"beta": report.beta}, frame)

    def _rage_average(self, spec: RageSpec, context: ScenarioContext) -> DiagnosticOutcome:
        if spec.sites is None:
            projection = FiniteRankProjection.from_state(context.psi0)
        else:
            projection = FiniteRankProjection.from_sites(context.model.dim, spec.sites)
        report = self.orbits.rage_average(context.orbit, projection, spec.taus)
        verdict = "decreasing" if report.strictly_decreasing() else "not-decreasing"
        metrics = {
            "rank": report.rank,
            "averages": report.averages,
            "last_to_first": report.averages[-1] / report.averages[0]
            if report.averages[0] > 0
            else None,
        }
        frame = pd.DataFrame({"tau": report.taus, "average": report.averages})
        return DiagnosticOutcome(verdict, metrics, frame)

    # ========================================================================
    # Floquet diagnostics
    # ========================================================================

    def _recurrence(self, spec: RecurrenceSpec, context: ScenarioContext) -> DiagnosticOutcome:
        state = context.config.initial_state
        if context.spectrum is None or len(state.indices) != 1:
            raise NotAnEigenvector("Recurrence needs a single Floquet eigenvector initial state")
        alpha = float(context.spectrum.phases[state.indices[0]])
        period = context.spectrum.period
        gaps = self.floquet.recurrence_gaps(context.orbit, alpha, period)
        picks = np.unique(np.linspace(0, gaps.size - 1, min(spec.samples, gaps.size)).astype(int))
        metrics = {
            "alpha": alpha,
            "period": period,
            "max_defect": float(np.max(gaps)),
            "sampled_max_defect": float(np.max(gaps[picks])),
        }
        frame = pd.DataFrame({"t": context.orbit.times[picks], "defect": gaps[picks]})
        return DiagnosticOutcome(None, metrics, frame)

    def _correspondence(
        self, spec: CorrespondenceSpec, context: ScenarioContext
    ) -> DiagnosticOutcome:
        study = self.quasienergy.correspondence_convergence(
            context.model, spec.cutoffs, context.spectrum
        )
        verdict = "monotone" if study.monotone else "non-monotone"
        metrics = {
            "mismatches": [_finite(m) for m in study.mismatches],
            "floor": study.floor,
        }
        frame = pd.DataFrame({"cutoff": study.cutoffs, "mismatch": study.mismatches})
        return DiagnosticOutcome(verdict, metrics, frame)

    def _releq(self, spec: ReleqSpec, context: ScenarioContext) -> DiagnosticOutcome:
        period = self.engine.period(context.model)
        block = self.quasienergy.quasienergy_block(context.model, spec.cutoff)
        eigensystem = self.quasienergy.quasienergy_eigensystem(block)
        # Transport over [t - sigma, t] with t in [0, T) needs propagators on [-T, T]
        h = period / block.quadrature
        cache_grid = TimeGrid(t0=-period, t1=period, h=h, count=2 * block.quadrature)
        cache = self.propagator.build_cache(context.model, cache_grid)
        sigma = spec.sigma_fraction * period
        defect = self.quasienergy.releq_check(
            eigensystem, block.constant_vector(context.psi0), sigma, cache
        )
        metrics = {"cutoff": spec.cutoff, "sigma": sigma, "defect": defect}
        return DiagnosticOutcome(None, metrics, None)

    def _synthesis(self, spec: SynthesisSpec, context: ScenarioContext) -> DiagnosticOutcome:
        block = self.quasienergy.quasienergy_block(context.model, spec.cutoff)
        eigensystem = self.quasienergy.quasienergy_eigensystem(block)
        result = self.quasienergy.orbit_synthesis(
            eigensystem, context.psi0, context.grid, context.model
        )
        metrics = {
            "frequencies": int(result.frequencies.size),
            "expansion_residual": result.expansion_residual,
            "max_deviation": result.max_deviation,
        }
        verdict = None
        if spec.epsilon is not None:
            grid = result.orbit.grid
            report = self.orbits.ap_scan(result.orbit, spec.epsilon, 0.5 * (grid.t1 - grid.t0))
            verdict = report.verdict
            metrics["almost_periods"] = len(report.almost_periods)
        columns = {f"psi{i}": result.orbit.states[:, i] for i in range(result.orbit.dim)}
        return DiagnosticOutcome(verdict, metrics, series_frame(result.orbit.times, columns))

    # ========================================================================
    # Energy diagnostics
    # ========================================================================

    def _series(self, spec: EnergySeriesSpec, context: ScenarioContext) -> EnergySeries:
        if spec.source == "probe":
            probe = self._probe(spec.probe, context.model.dim)
            return self.energy.energy_series(context.orbit, probe, spec.probe.kind)
        if spec.source == "generator":
            return self.energy.generator_energy_series(context.orbit, context.model)
        if spec.source == "schrodinger":
            return self.energy.schrodinger_energy_series(context.orbit)
        return self.energy.free_energy_series(context.orbit, context.model)

    def _energy_series(self, spec: EnergySeriesSpec, context: ScenarioContext) -> DiagnosticOutcome:
        series = self._series(spec, context)
        times, values = series.as_arrays()
        metrics = {
            "probe": series.probe,
            "min": float(np.min(values)),
            "max": float(np.max(values)),
            "max_imaginary": series.max_imaginary,
        }
        return DiagnosticOutcome(None, metrics, series_frame(times, {"value": values}))

    def _stability_verdict(
        self, spec: StabilitySpec, context: ScenarioContext
    ) -> DiagnosticOutcome:
        series = self._series(spec, context)
        report = self.energy.stability_verdict(series)
        times, values = series.as_arrays()
        metrics = report.model_dump(exclude={"verdict"})
        metrics["probe"] = series.probe
        return DiagnosticOutcome(report.verdict, metrics, series_frame(times, {"value": values}))

    def _energy_bounds(self, spec: EnergyBoundsSpec, context: ScenarioContext) -> DiagnosticOutcome:
        orbit, model = context.orbit, context.model
        series = self.energy.generator_energy_series(orbit, model)
        free = self.energy.free_energy_series(orbit, model)
        sup_v = self.energy.sup_potential_norm(model, orbit)
        metrics: Dict[str, Any] = {
            "sup_potential_norm": sup_v,
            "bounded_v_violation": self.energy.bounded_v_equivalence(series, free, sup_v),
        }
        try:
            metrics.update(self.energy.energy_drift_bound(orbit, model).model_dump())
            metrics["derivative_defect"] = self.energy.energy_derivative_check(orbit, model)
        except DerivativeNotAvailable as e:
            logger.warning(f"Drift bounds skipped: {e}")
        violations = [
            metrics.get(key, 0.0)
            for key in ("bounded_v_violation", "integral_violation", "sup_violation")
        ]
        verdict = "bounds-hold" if max(violations) <= BOUND_TOLERANCE else "bounds-violated"
        times, values = series.as_arrays()
        _, free_values = free.as_arrays()
        frame = series_frame(times, {"energy": values, "free_energy": free_values})
        return DiagnosticOutcome(verdict, metrics, frame)

    # ========================================================================
    # Enlarged space
    # ========================================================================

    def _af_identity(self, spec: AfIdentitySpec, context: ScenarioContext) -> DiagnosticOutcome:
        model = context.model
        if isinstance(model, QuasiperiodicExactParams):
            grid = self.enlarged.model_grid(model, spec.grid_size)
        else:
            period = spec.period or self._period(model)
            grid = self.enlarged.torus_grid(0.0, spec.grid_size, period)
        u1 = self.enlarged.monodromy_samples(model, grid)
        spectrum = self.enlarged.enlarged_spectrum(grid, u1)
        states = [spectrum.state(i) for i in spec.indices]
        f = EnlargedState(values=sum(s.values for s in states) / np.sqrt(len(states)))
        probe = self._probe(spec.probe, model.dim)
        report = self.enlarged.af_identity(
            f, spectrum, spec.indices, model, probe, context.grid, spec.epsilon
        )
        quasienergies = spectrum.quasienergies[list(spec.indices)]
        flow = self.enlarged.eigen_flow_check(
            grid, u1, states[0], float(quasienergies[0]), spec.eigen_flow_periods, model
        )
        coefficients = np.array(report.coefficients_real) + 1j * np.array(report.coefficients_imag)
        summability = self.enlarged.summability_bound(
            coefficients, quasienergies, [self.enlarged.derivative_sup(s) for s in states]
        )
        metrics: Dict[str, Any] = {
            "grid_size": grid.size,
            "shift": grid.shift,
            "max_discrepancy": report.max_discrepancy,
            "b_hermiticity_defect": report.b_hermiticity_defect,
            "quasienergies": report.quasienergies,
            "eigen_flow_defect": flow.max_defect,
            "eigen_residual": flow.eigen_residual,
            "summability": summability.model_dump(),
        }
        verdict = None
        if report.ap is not None:
            verdict = report.ap.verdict
            metrics["almost_periods"] = len(report.ap.almost_periods)
        if report.stability is not None:
            metrics["stability"] = report.stability.verdict
        frame = series_frame(
            report.times,
            {"series": np.array(report.series), "direct": np.array(report.direct_series)},
        )
        return DiagnosticOutcome(verdict, metrics, frame)

    def _convergent_sweep(
        self, spec: ConvergentSweepSpec, context: ScenarioContext
    ) -> DiagnosticOutcome:
        probe = self._probe(spec.probe, context.model.dim) if spec.probe else None
        sweep = self.enlarged.convergent_sweep(
            context.model,
            spec.sizes,
            vector=context.psi0 if probe is not None else None,
            probe=probe,
            periods=spec.periods,
        )
        stats = sweep.statistics
        frame = pd.DataFrame(
            {
                "size": [s.size for s in stats],
                "shift": [s.shift for s in stats],
                "spacing_std": [s.spacing_std for s in stats],
                "histogram_deviation": [s.histogram_deviation for s in stats],
                "discrepancy": [np.nan if d is None else d for d in sweep.discrepancies],
            }
        )
        metrics = {
            "alpha": sweep.alpha,
            "histogram_deviation": [s.histogram_deviation for s in stats],
            "discrepancies": sweep.discrepancies,
        }
        return DiagnosticOutcome(None, metrics, frame)
