"""Quasienergy Analyzer - Truncated Fourier-block quasienergy operator K = -i d/dt + H(t)."""
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy import fft

from ..data_models.floquet import (
    ConvergenceStudy,
    CorrespondenceReport,
    FloquetModeSamples,
    FloquetSpectrum,
    PhaseMatch,
    QuasienergyBlock,
    QuasienergyEigensystem,
    SynthesisResult,
)
from ..data_models.model_spec import KickedLinearParams, ModelSpec
from ..data_models.operators import hermiticity_defect
from ..data_models.orbit import OrbitSample, PropagatorCache, TimeGrid
from ..utils.constants import (
    CONVERGENCE_FLOOR,
    EDGE_FRACTION,
    EXPANSION_RESIDUAL,
    MATCH_TOLERANCE,
    QUADRATURE_FACTOR,
)
from ..utils.errors import (
    AliasedQuadrature,
    ExpansionResidualTooLarge,
    GeneratorNotAvailable,
    NonHermitianInput,
)
from ..utils.logging import setup_logging
from ..utils.settings import LabSettings, get_settings
from .floquet_analyzer import FloquetAnalyzer
from .linalg_kernel import phase_distance

logger = setup_logging(__name__)


class QuasienergyAnalyzer:
    """Build, diagonalize and cross-check the quasienergy operator of periodic models."""

    def __init__(
        self,
        floquet_analyzer: Optional[FloquetAnalyzer] = None,
        settings: Optional[LabSettings] = None,
    ):
        self.floquet = floquet_analyzer or FloquetAnalyzer()
        self.propagator = self.floquet.propagator
        self.engine = self.propagator.engine
        self.settings = settings or get_settings()

    def quasienergy_block(
        self,
        model: ModelSpec,
        cutoff: int,
        quadrature: Optional[int] = None,
        omega: Optional[float] = None,
    ) -> QuasienergyBlock:
        """
        Truncated block matrix of K with Fourier cutoff N.

        Args:
            model: Periodic model with a pointwise generator
            cutoff: N (harmonics |n| <= N)
            quadrature: Samples per period Q (default 8N)
            omega: Base frequency (default 2 pi / period(model))

        Returns:
            QuasienergyBlock

        Raises:
            GeneratorNotAvailable: For propagator-only or kicked models
            NotPeriodic: If no period is known
            AliasedQuadrature: If Q < 4N + 2
        """
        if not self.engine.has_generator(model) or isinstance(model, KickedLinearParams):
            raise GeneratorNotAvailable(f"{model.variant} has no smooth generator for K")
        if omega is None:
            omega = 2 * np.pi / self.engine.period(model)
        quadrature = quadrature or QUADRATURE_FACTOR * cutoff
        if quadrature < 4 * cutoff + 2:
            raise AliasedQuadrature(f"Q={quadrature} < 4N+2={4 * cutoff + 2}")

        period = 2 * np.pi / omega
        times = period * np.arange(quadrature) / quadrature
        samples = np.array([self.engine.hamiltonian_raw(model, t) for t in times])
        samples = 0.5 * (samples + samples.conj().transpose(0, 2, 1))
        # Rectangle rule on a periodic integrand: H_q = (1/Q) sum_j H(t_j) e^{-i q w t_j}
        coefficients = fft.fft(samples, axis=0) / quadrature

        dim = model.dim
        size = 2 * cutoff + 1
        matrix = np.zeros((size * dim, size * dim), dtype=complex)
        harmonics = np.arange(-cutoff, cutoff + 1)
        for a, n in enumerate(harmonics):
            for b, m in enumerate(harmonics):
                matrix[a * dim : (a + 1) * dim, b * dim : (b + 1) * dim] = coefficients[
                    (n - m) % quadrature
                ]
            matrix[a * dim : (a + 1) * dim, a * dim : (a + 1) * dim] += n * omega * np.eye(dim)

        defect = hermiticity_defect(matrix)
        if defect > self.settings.eigensystem_tolerance:
            raise NonHermitianInput(f"Quasienergy block Hermiticity defect {defect:.3e}")
        logger.debug(f"Quasienergy block N={cutoff}, Q={quadrature}, size={matrix.shape[0]}")
        return QuasienergyBlock(
            cutoff=cutoff,
            omega=omega,
            quadrature=quadrature,
            dim=dim,
            matrix=matrix,
            hermiticity_defect=defect,
        )

    def quasienergy_eigensystem(self, block: QuasienergyBlock) -> QuasienergyEigensystem:
        """Diagonalize K and flag eigenvectors centred in the interior half of the harmonics."""
        hermitian = 0.5 * (block.matrix + block.matrix.conj().T)
        values, vectors = self.propagator.kernel.eigh_raw(hermitian)
        weights = np.sum(
            np.abs(vectors.reshape(2 * block.cutoff + 1, block.dim, -1)) ** 2, axis=1
        )
        mean_index = block.harmonics @ weights
        interior = np.abs(mean_index) <= EDGE_FRACTION * block.cutoff
        return QuasienergyEigensystem(
            block=block,
            values=values,
            vectors=vectors,
            mean_index=mean_index,
            interior=interior,
        )

    def correspondence_check(
        self,
        eigensystem: QuasienergyEigensystem,
        spectrum: FloquetSpectrum,
        omega: float,
        period: float,
        tolerance: float = MATCH_TOLERANCE,
    ) -> CorrespondenceReport:
        """
        Match every Floquet rate alpha/T mod w with an interior quasienergy mod w.

        Pairs are assigned greedily by increasing wraparound distance, each quasienergy used
        at most once, so degenerate phases are matched with multiplicity.

        Returns:
            CorrespondenceReport (mismatches are reported, never raised)
        """
        rates = np.mod(spectrum.phases / period, omega)
        candidates = np.mod(eigensystem.interior_values(), omega)
        distances = sorted(
            (phase_distance(rate, value, omega), j, i)
            for j, rate in enumerate(rates)
            for i, value in enumerate(candidates)
        )
        used_rates: set = set()
        used_values: set = set()
        pairs: dict = {}
        for distance, j, i in distances:
            if j in used_rates or i in used_values:
                continue
            used_rates.add(j)
            used_values.add(i)
            pairs[j] = PhaseMatch(
                floquet_rate=float(rates[j]), quasienergy=float(candidates[i]), mismatch=distance
            )
            if len(used_rates) == len(rates):
                break

        ordered = [pairs[j] for j in sorted(pairs)]
        unmatched = len(rates) - sum(1 for p in ordered if p.mismatch <= tolerance)
        max_mismatch = max((p.mismatch for p in ordered), default=float("inf"))
        if unmatched:
            logger.warning(
                f"Correspondence N={eigensystem.block.cutoff}: {unmatched} unmatched phases"
            )
        return CorrespondenceReport(
            cutoff=eigensystem.block.cutoff,
            pairs=ordered,
            max_mismatch=max_mismatch,
            unmatched_count=unmatched,
            tolerance=tolerance,
        )

    def correspondence_convergence(
        self,
        model: ModelSpec,
        cutoffs: Sequence[int],
        spectrum: Optional[FloquetSpectrum] = None,
    ) -> ConvergenceStudy:
        """
        Correspondence mismatch for each cutoff, computed in parallel.

        Args:
            model: Periodic model with a generator
            cutoffs: Ascending Fourier cutoffs
            spectrum: Floquet spectrum (default: from the model's monodromy)

        Returns:
            ConvergenceStudy with a monotonicity flag
        """
        period = self.engine.period(model)
        omega = 2 * np.pi / period
        if spectrum is None:
            spectrum = self.floquet.floquet_spectrum(self.propagator.monodromy(model), period)

        def mismatch(cutoff: int) -> float:
            eigensystem = self.quasienergy_eigensystem(self.quasienergy_block(model, cutoff))
            return self.correspondence_check(eigensystem, spectrum, omega, period).max_mismatch

        mismatches: List[float] = Parallel(n_jobs=self.settings.threads, prefer="threads")(
            delayed(mismatch)(cutoff) for cutoff in cutoffs
        )
        monotone = all(
            later < earlier or (earlier < CONVERGENCE_FLOOR and later < CONVERGENCE_FLOOR)
            for earlier, later in zip(mismatches, mismatches[1:])
        )
        logger.info(f"Correspondence convergence {list(cutoffs)}: {mismatches}")
        return ConvergenceStudy(
            cutoffs=list(cutoffs), mismatches=mismatches, monotone=monotone, floor=CONVERGENCE_FLOOR
        )

    def evolve(
        self, eigensystem: QuasienergyEigensystem, vector: np.ndarray, sigma: float
    ) -> np.ndarray:
        """e^{-i K sigma} applied to a block vector through the eigen-decomposition."""
        w = eigensystem.vectors
        return w @ (np.exp(-1j * sigma * eigensystem.values) * (w.conj().T @ vector))

    def releq_check(
        self,
        eigensystem: QuasienergyEigensystem,
        f: np.ndarray,
        sigma: float,
        cache: PropagatorCache,
    ) -> float:
        """
        max_j ||(e^{-i K sigma} f)(t_j) - U(t_j, 0) U(t_j - sigma, 0)^{-1} f(t_j - sigma)||.

        Args:
            eigensystem: Diagonalized quasienergy block
            f: Block vector (Fourier components f_n)
            sigma: Shift
            cache: Propagators covering t_j and t_j - sigma, t_j = j T / Q

        Returns:
            Largest defect over the Q sample times

        Raises:
            TimeNotOnGrid: If a needed time is not a cache node
        """
        block = eigensystem.block
        times = block.period * np.arange(block.quadrature) / block.quadrature
        evolved = block.sample(self.evolve(eigensystem, f, sigma), times)
        shifted = block.sample(f, times - sigma)
        worst = 0.0
        for j, t in enumerate(times):
            transport = cache.at(t) @ cache.at(t - sigma).conj().T
            worst = max(worst, float(np.linalg.norm(evolved[j] - transport @ shifted[j])))
        return worst

    def floquet_mode_coefficients(self, mode: FloquetModeSamples, cutoff: int) -> np.ndarray:
        """
        Fourier block vector of a sampled mode: f_n = (1/Q) sum_j f(t_j) e^{-i n w t_j}.

        Raises:
            AliasedQuadrature: If the mode has fewer than 2N + 1 samples per period
        """
        values = mode.values[:-1]
        quadrature = values.shape[0]
        if quadrature < 2 * cutoff + 1:
            raise AliasedQuadrature(
                f"{quadrature} samples cannot resolve {2 * cutoff + 1} harmonics"
            )
        transform = fft.fft(values, axis=0) / quadrature
        harmonics = np.arange(-cutoff, cutoff + 1)
        return transform[harmonics % quadrature].reshape(-1)

    def orbit_synthesis(
        self,
        eigensystem: QuasienergyEigensystem,
        xi: np.ndarray,
        grid: TimeGrid,
        model: Optional[ModelSpec] = None,
    ) -> SynthesisResult:
        """
        Rebuild sigma -> U(0, sigma) xi = sum_m c_m e^{i lambda_m sigma} psi_m(0).

        The coefficients c_m expand 1 (x) xi in the interior eigenvectors of K; the part of
        1 (x) xi outside their span is the expansion residual.

        Args:
            eigensystem: Diagonalized quasienergy block
            xi: Physical vector
            grid: Sigma grid (starting at 0 when a direct comparison is requested)
            model: When given, U(0, sigma) xi is also propagated directly for comparison

        Returns:
            SynthesisResult whose orbit feeds the almost-periodicity scanner

        Raises:
            ExpansionResidualTooLarge: If the residual exceeds 1e-6
        """
        block = eigensystem.block
        constant = block.constant_vector(np.asarray(xi, dtype=complex))
        basis = eigensystem.vectors[:, eigensystem.interior]
        frequencies = eigensystem.values[eigensystem.interior]
        coefficients = basis.conj().T @ constant
        residual = float(np.linalg.norm(constant - basis @ coefficients))
        if residual > EXPANSION_RESIDUAL:
            raise ExpansionResidualTooLarge(
                f"1 (x) xi leaves residual {residual:.3e} outside the interior eigenbasis"
            )

        at_zero = basis.reshape(2 * block.cutoff + 1, block.dim, -1).sum(axis=0)
        waves = np.exp(1j * np.outer(grid.times, frequencies)) * coefficients
        states = waves @ at_zero.T

        deviation = None
        if model is not None:
            cache = self.propagator.build_cache(model, grid)
            direct = np.einsum("kji,j->ki", cache.unitaries.conj(), xi)
            deviation = float(np.max(np.linalg.norm(states - direct, axis=1)))

        drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - np.linalg.norm(xi))))
        orbit = OrbitSample(
            grid=grid,
            states=states,
            max_norm_drift=drift,
            accepted=drift <= self.settings.orbit_accept_drift,
        )
        return SynthesisResult(
            orbit=orbit,
            frequencies=frequencies,
            coefficients=coefficients,
            expansion_residual=residual,
            max_deviation=deviation,
        )

    def quasienergy_periodicity_defect(self, eigensystem: QuasienergyEigensystem) -> float:
        """Largest distance from lambda +/- w (lambda interior) to the nearest quasienergy."""
        values = eigensystem.values
        omega = eigensystem.block.omega
        worst = 0.0
        for value in eigensystem.interior_values():
            for shifted in (value + omega, value - omega):
                worst = max(worst, float(np.min(np.abs(values - shifted))))
        return worst
