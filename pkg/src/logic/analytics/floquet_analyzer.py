"""Floquet Analyzer - Monodromy spectra, Floquet expansions and Floquet-mode diagnostics."""
from typing import Iterable, Optional, Union

import numpy as np

from ..data_models.floquet import FloquetModeSamples, FloquetSpectrum, ModeRegularityReport
from ..data_models.model_spec import ModelSpec
from ..data_models.operators import ComplexVector, UnitaryOperator
from ..data_models.orbit import OrbitSample, TimeGrid
from ..utils.constants import EIGENVECTOR_RESIDUAL, MIN_MODE_SAMPLES, MODE_STABILITY_RATIO
from ..utils.errors import ConvergenceFailure, GridTooCoarse, IncompleteBasis, TimeNotOnGrid
from ..utils.logging import setup_logging
from ..utils.settings import LabSettings, get_settings
from .propagator import Propagator

logger = setup_logging(__name__)

StateLike = Union[ComplexVector, np.ndarray]


def _as_array(psi: StateLike) -> np.ndarray:
    if isinstance(psi, ComplexVector):
        return psi.components
    return np.asarray(psi, dtype=complex)


class FloquetAnalyzer:
    """Spectral analysis of the monodromy operator and of the Floquet modes it generates."""

    def __init__(
        self,
        propagator: Optional[Propagator] = None,
        settings: Optional[LabSettings] = None,
    ):
        self.propagator = propagator or Propagator()
        self.kernel = self.propagator.kernel
        self.settings = settings or get_settings()

    def floquet_spectrum(
        self, monodromy: UnitaryOperator, period: Optional[float] = None
    ) -> FloquetSpectrum:
        """
        Full eigenbasis of U_F with phases in [0, 2pi).

        Args:
            monodromy: U_F
            period: T, stored so phases can be turned into quasienergies

        Returns:
            FloquetSpectrum with per-vector residuals

        Raises:
            NonUnitaryInput: If U_F is not unitary
            ConvergenceFailure: If a residual exceeds 1e-8
        """
        system = self.kernel.unitary_eigenphases(monodromy)
        matrix = monodromy.matrix
        residuals = np.linalg.norm(
            matrix @ system.vectors - system.vectors * np.exp(-1j * system.phases), axis=0
        )
        worst = float(np.max(residuals))
        if worst > EIGENVECTOR_RESIDUAL:
            raise ConvergenceFailure(f"Floquet residual {worst:.3e} exceeds {EIGENVECTOR_RESIDUAL}")
        logger.info(f"Floquet spectrum: {len(system.phases)} phases, max residual={worst:.2e}")
        return FloquetSpectrum(
            phases=system.phases,
            vectors=system.vectors,
            residuals=residuals,
            clusters=system.clusters,
            period=period,
        )

    def expand_in_floquet_basis(self, psi: StateLike, spectrum: FloquetSpectrum) -> np.ndarray:
        """
        Coefficients c_j = <xi_j, psi>.

        Raises:
            IncompleteBasis: If the eigenvectors do not form an orthonormal basis of the space
        """
        vector = _as_array(psi)
        vectors = spectrum.vectors
        if vectors.shape[0] != vector.shape[0] or vectors.shape[1] != vectors.shape[0]:
            raise IncompleteBasis(
                f"{vectors.shape[1]} eigenvectors cannot span a {vector.shape[0]}-dimensional space"
            )
        gram_defect = np.linalg.norm(vectors.conj().T @ vectors - np.eye(vectors.shape[1]))
        if gram_defect > self.settings.eigensystem_tolerance:
            raise IncompleteBasis(f"Eigenvectors not orthonormal (defect {gram_defect:.3e})")
        return vectors.conj().T @ vector

    def recurrence_defect(self, orbit: OrbitSample, alpha: float, period: float) -> float:
        """
        max_t ||psi(t + T) - e^{-i alpha} psi(t)|| over the sampled window.

        Raises:
            TimeNotOnGrid: If T is not a multiple of the grid step or exceeds the horizon
        """
        return float(np.max(self.recurrence_gaps(orbit, alpha, period)))

    def recurrence_gaps(self, orbit: OrbitSample, alpha: float, period: float) -> np.ndarray:
        """||psi(t_k + T) - e^{-i alpha} psi(t_k)|| for every t_k with t_k + T in the window."""
        shift = period / orbit.grid.h
        m = int(round(shift))
        if abs(shift - m) > 1e-6 or m < 1 or m > orbit.grid.count:
            raise TimeNotOnGrid(f"Period {period} is not a multiple of the step {orbit.grid.h}")
        states = orbit.states
        return np.linalg.norm(states[m:] - np.exp(-1j * alpha) * states[:-m], axis=1)

    def shifted_floquet_check(
        self,
        model: ModelSpec,
        quasienergy: float,
        xi: StateLike,
        base_points: Iterable[float],
        period: float,
    ) -> float:
        """
        max_s ||U_F(s) f(s) - e^{-i lambda T} f(s)|| with f(s) = e^{i lambda s} U(s, 0) xi.

        Args:
            model: Periodic model
            quasienergy: lambda with U_F(0) xi = e^{-i lambda T} xi
            xi: Floquet eigenvector at s = 0
            base_points: Base points s
            period: T

        Returns:
            Largest defect over the base points
        """
        vector = _as_array(xi)
        phase = np.exp(-1j * quasienergy * period)
        worst = 0.0
        for s in base_points:
            f_s = np.exp(1j * quasienergy * s) * self._propagate_to(model, vector, s)
            shifted = self.propagator.shifted_monodromy(model, s, period)
            worst = max(worst, float(np.linalg.norm(shifted.matrix @ f_s - phase * f_s)))
        return worst

    def floquet_mode_samples(
        self,
        model: ModelSpec,
        quasienergy: float,
        xi: StateLike,
        samples: int,
        period: float,
    ) -> FloquetModeSamples:
        """Sample f(t) = e^{i lambda t} U(t, 0) xi on t_j = j T / Q, j = 0..Q."""
        grid = TimeGrid(t0=0.0, t1=period, h=period / samples, count=samples)
        orbit = self.propagator.propagate(model, _as_array(xi), grid)
        values = np.exp(1j * quasienergy * grid.times)[:, None] * orbit.states
        return FloquetModeSamples(
            quasienergy=quasienergy, period=period, times=grid.times, values=values
        )

    def mode_regularity(self, mode: FloquetModeSamples) -> ModeRegularityReport:
        """
        Centered-difference derivative norm and its stability under 2x refinement.

        Raises:
            GridTooCoarse: With fewer than 64 samples per period
        """
        count = mode.values.shape[0] - 1
        if count < MIN_MODE_SAMPLES:
            raise GridTooCoarse(f"{count} samples per period; at least {MIN_MODE_SAMPLES} needed")
        fine = self._max_derivative(mode.values, mode.step)
        coarse = self._max_derivative(mode.values[::2], 2 * mode.step)
        scale = max(fine, coarse)
        change = abs(fine - coarse) / scale if scale > 0 else 0.0
        return ModeRegularityReport(
            samples=count,
            max_derivative_norm=fine,
            coarse_derivative_norm=coarse,
            relative_change=change,
            stable=change < MODE_STABILITY_RATIO,
        )

    def mode_derivative_identity(self, model: ModelSpec, mode: FloquetModeSamples) -> float:
        """
        max_t ||f'(t) - (i lambda f(t) - i H(t) f(t))|| with f' by centered differences.

        Raises:
            GeneratorNotAvailable: If the model has no pointwise generator
        """
        values = mode.values
        derivative = (values[2:] - values[:-2]) / (2 * mode.step)
        worst = 0.0
        for k, t in enumerate(mode.times[1:-1], start=1):
            h_t = self.propagator.engine.hamiltonian_raw(model, float(t))
            expected = 1j * mode.quasienergy * values[k] - 1j * (h_t @ values[k])
            worst = max(worst, float(np.linalg.norm(derivative[k - 1] - expected)))
        return worst

    @staticmethod
    def _max_derivative(values: np.ndarray, step: float) -> float:
        if values.shape[0] < 3:
            return 0.0
        derivative = (values[2:] - values[:-2]) / (2 * step)
        return float(np.max(np.linalg.norm(derivative, axis=1)))

    def _propagate_to(self, model: ModelSpec, psi: np.ndarray, t: float) -> np.ndarray:
        if t == 0.0:
            return psi
        if self.propagator.engine.has_closed_form(model):
            return self.propagator.engine.exact_raw(model, t) @ psi
        if t < 0:
            raise TimeNotOnGrid("Backward stepping is not supported for base points s < 0")
        grid = TimeGrid.from_span(0.0, t, min(1e-3, t))
        return self.propagator.propagate(model, psi, grid).states[-1]
