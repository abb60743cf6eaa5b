"""Enlarged Space Analyzer - Generalized Floquet operator on L2(S1, H) over a torus grid.

The irrational rotation angle of the torus flow is replaced by a continued-fraction
convergent p/q so that one stroboscopic period moves the q-point grid by exactly p cells.
Physical-space propagators elsewhere keep the irrational ratio.
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from ..data_models.enlarged import (
    AFReport,
    ConvergentSweep,
    EigenFlowReport,
    EnlargedSpectrum,
    EnlargedState,
    SpacingStatistics,
    SummabilityReport,
    TorusGrid,
)
from ..data_models.model_spec import (
    DirectSumQuasiperiodicParams,
    ModelSpec,
    QuasiperiodicExactParams,
)
from ..data_models.operators import HermitianOperator, UnitaryOperator, hermiticity_defect
from ..data_models.orbit import OrbitSample, TimeGrid
from ..data_models.reports import EnergySeries
from ..utils.constants import (
    EIGENVECTOR_RESIDUAL,
    HISTOGRAM_BINS,
    MAX_ENLARGED_DIM,
    SUMMABILITY_TAIL_RATIO,
)
from ..utils.errors import (
    DimensionTooLarge,
    GridMismatch,
    NotAnEigenvector,
    ShiftMismatch,
    TimeNotOnGrid,
)
from ..utils.logging import setup_logging
from ..utils.settings import LabSettings, get_settings
from .energy_diagnostics import EnergyDiagnostics
from .linalg_kernel import TWO_PI
from .orbit_diagnostics import OrbitDiagnostics
from .propagator import Propagator

logger = setup_logging(__name__)


def continued_fraction(alpha: float, count: int) -> List[int]:
    """First count partial quotients [a0; a1, a2, ...] of alpha."""
    quotients: List[int] = []
    x = float(alpha)
    for _ in range(count):
        a = int(np.floor(x))
        quotients.append(a)
        remainder = x - a
        if remainder < 1e-12:
            break
        x = 1.0 / remainder
    return quotients


def convergents(alpha: float, count: int) -> List[Tuple[int, int]]:
    """Convergents p_k / q_k of alpha, in lowest terms, by the standard recursion."""
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    result: List[Tuple[int, int]] = []
    for a in continued_fraction(alpha, count):
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        result.append((p, q))
    return result


class EnlargedSpaceAnalyzer:
    """Discretized enlarged-space dynamics: U_F = T_{-T2} u1 acting on grid functions."""

    def __init__(
        self,
        propagator: Optional[Propagator] = None,
        energy: Optional[EnergyDiagnostics] = None,
        orbits: Optional[OrbitDiagnostics] = None,
        settings: Optional[LabSettings] = None,
    ):
        self.propagator = propagator or Propagator()
        self.engine = self.propagator.engine
        self.kernel = self.propagator.kernel
        self.energy = energy or EnergyDiagnostics(engine=self.engine)
        self.orbits = orbits or OrbitDiagnostics(kernel=self.kernel)
        self.settings = settings or get_settings()

    # ========================================================================
    # Torus grids
    # ========================================================================

    @staticmethod
    def torus_grid(alpha: float, size: int, period: float = TWO_PI) -> TorusGrid:
        """
        Grid of q points whose rotation p/q approximates alpha.

        Raises:
            ShiftMismatch: If no p gives |alpha - p/q| <= 1/q^2
        """
        fractional = alpha - np.floor(alpha)
        shift = int(round(fractional * size)) % size if size > 1 else 0
        return TorusGrid(size=size, shift=shift, alpha=alpha, period=period)

    def model_grid(self, model: ModelSpec, size: int) -> TorusGrid:
        """TorusGrid for a quasiperiodic model: alpha = w1/w2 and T2 = 2 pi/w2."""
        if not isinstance(model, QuasiperiodicExactParams):
            raise ShiftMismatch(f"{model.variant} has no torus rotation to discretize")
        return self.torus_grid(model.alpha, size, model.t2)

    def monodromy_samples(self, model: ModelSpec, grid: TorusGrid) -> np.ndarray:
        """
        u1(theta_j) = U_{theta_j}(T2, 0) for every grid point, shape (q, d, d).

        QuasiperiodicExact fibres are the model with theta1 = theta_j. Any other model is
        taken as theta-independent, so u1 is its one-period propagator over T2.

        Raises:
            ShiftMismatch: If the grid was built for another rotation or for a direct sum
        """
        if isinstance(model, DirectSumQuasiperiodicParams):
            raise ShiftMismatch("Direct sums carry one torus per block")
        if isinstance(model, QuasiperiodicExactParams):
            if grid.alpha is None or abs(grid.alpha - model.alpha) > 1e-12:
                raise ShiftMismatch(f"Grid alpha {grid.alpha} differs from model {model.alpha}")
            return np.array([self.engine.monodromy_sample(model, t) for t in grid.thetas])
        u1 = self.propagator.monodromy(model, period=grid.period).matrix
        return np.repeat(u1[None, :, :], grid.size, axis=0)

    # ========================================================================
    # Generalized Floquet operator
    # ========================================================================

    def generalized_floquet_apply(
        self, grid: TorusGrid, u1: np.ndarray, f: EnlargedState
    ) -> EnlargedState:
        """
        (U_F f)(theta_j) = u1(theta_{j-p}) f(theta_{j-p}), indices cyclic.

        Raises:
            GridMismatch: If u1 or f are not sampled on the grid
        """
        self._check_samples(grid, u1, f.dim)
        if f.size != grid.size:
            raise GridMismatch(f"State has {f.size} points, grid has {grid.size}")
        moved = np.einsum("jab,jb->ja", u1, f.values)
        return EnlargedState(values=np.roll(moved, grid.shift, axis=0))

    def floquet_matrix(self, grid: TorusGrid, u1: np.ndarray) -> np.ndarray:
        """
        Dense (q d) x (q d) matrix of U_F.

        Raises:
            DimensionTooLarge: If q d exceeds the dense limit
        """
        dim = u1.shape[1]
        total = grid.size * dim
        if total > MAX_ENLARGED_DIM:
            raise DimensionTooLarge(f"q*d={total} exceeds {MAX_ENLARGED_DIM}")
        self._check_samples(grid, u1, dim)
        matrix = np.zeros((total, total), dtype=complex)
        for j in range(grid.size):
            source = (j - grid.shift) % grid.size
            matrix[j * dim : (j + 1) * dim, source * dim : (source + 1) * dim] = u1[source]
        return matrix

    def enlarged_spectrum(self, grid: TorusGrid, u1: np.ndarray) -> EnlargedSpectrum:
        """
        Full eigen-decomposition of U_F on the q d dimensional grid space.

        Raises:
            DimensionTooLarge: If q d exceeds the dense limit
        """
        matrix = self.floquet_matrix(grid, u1)
        system = self.kernel.unitary_eigenphases(UnitaryOperator(matrix=matrix))
        residual = float(
            np.max(
                np.linalg.norm(
                    matrix @ system.vectors - system.vectors * np.exp(-1j * system.phases), axis=0
                )
            )
        )
        logger.info(f"Enlarged spectrum q={grid.size}, p={grid.shift}: residual={residual:.2e}")
        return EnlargedSpectrum(
            grid=grid,
            dim=u1.shape[1],
            phases=system.phases,
            vectors=system.vectors,
            residual=residual,
        )

    @staticmethod
    def grid_cocycle(grid: TorusGrid, u1: np.ndarray, k: int) -> np.ndarray:
        """U_{theta_j}(k T2, 0) = u1(theta_{j+(k-1)p}) ... u1(theta_{j+p}) u1(theta_j), per j."""
        if k < 0:
            raise ValueError("The grid cocycle is built for k >= 0")
        dim = u1.shape[1]
        product = np.repeat(np.eye(dim, dtype=complex)[None, :, :], grid.size, axis=0)
        for step in range(k):
            ahead = np.roll(u1, -step * grid.shift, axis=0)
            product = np.einsum("jab,jbc->jac", ahead, product)
        return product

    @staticmethod
    def spacing_statistics(phases: np.ndarray, grid: TorusGrid) -> SpacingStatistics:
        """Unit-mean nearest-neighbour spacings on the circle and histogram flatness."""
        ordered = np.sort(np.asarray(phases, dtype=float))
        count = ordered.size
        gaps = np.diff(np.concatenate((ordered, [ordered[0] + TWO_PI])))
        normalized = gaps / (TWO_PI / count)
        histogram, _ = np.histogram(ordered, bins=HISTOGRAM_BINS, range=(0.0, TWO_PI))
        expected = count / HISTOGRAM_BINS
        return SpacingStatistics(
            size=grid.size,
            shift=grid.shift,
            count=count,
            spacing_mean=float(np.mean(normalized)),
            spacing_std=float(np.std(normalized)),
            histogram_deviation=float(np.max(np.abs(histogram - expected)) / expected),
            histogram=[int(h) for h in histogram],
        )

    # ========================================================================
    # Expectations in the enlarged space
    # ========================================================================

    @staticmethod
    def b_matrix(f_n: EnlargedState, f_m: EnlargedState, probe: HermitianOperator) -> complex:
        """
        B_{n,m}(A) = (1/q) sum_j <f_n(theta_j), A f_m(theta_j)>.

        Raises:
            GridMismatch: If the states live on different grids
        """
        f_n.require_compatible(f_m)
        return complex(
            np.mean(np.einsum("ja,ab,jb->j", f_n.values.conj(), probe.matrix, f_m.values))
        )

    def b_matrix_full(
        self, states: Sequence[EnlargedState], probe: HermitianOperator
    ) -> np.ndarray:
        """Matrix B_{n,m}(A) over a family of states."""
        size = len(states)
        matrix = np.zeros((size, size), dtype=complex)
        for n in range(size):
            for m in range(size):
                matrix[n, m] = self.b_matrix(states[n], states[m], probe)
        return matrix

    @staticmethod
    def expand(f: EnlargedState, states: Sequence[EnlargedState]) -> np.ndarray:
        """Coefficients a_n = <f_n, f> in the enlarged inner product."""
        return np.array([state.inner(f) for state in states], dtype=complex)

    @staticmethod
    def af_series(
        coefficients: np.ndarray,
        quasienergies: np.ndarray,
        b: np.ndarray,
        times: np.ndarray,
        norm_sq: Optional[float] = None,
    ) -> np.ndarray:
        """
        A_f(t) = sum_{n,m} conj(a_n) a_m e^{-i t (lambda_m - lambda_n)} B_{n,m}.

        Args:
            coefficients: a_n
            quasienergies: lambda_n
            b: B_{n,m}(A)
            times: Sample times
            norm_sq: ||f||^2, checked against sum |a_n|^2 when given

        Returns:
            Real series (imaginary residue is logged, then dropped)
        """
        a = np.asarray(coefficients, dtype=complex)
        if norm_sq is not None:
            weight = float(np.sum(np.abs(a) ** 2))
            if abs(weight - norm_sq) > 1e-10 * max(1.0, norm_sq):
                logger.warning(f"sum |a_n|^2 = {weight:.12g} differs from ||f||^2 = {norm_sq:.12g}")
        waves = a[None, :] * np.exp(-1j * np.outer(np.asarray(times), quasienergies))
        series = np.einsum("kn,nm,km->k", waves.conj(), b, waves)
        residue = float(np.max(np.abs(series.imag))) if series.size else 0.0
        if residue > 1e-10 * max(1.0, float(np.max(np.abs(series.real)))):
            logger.warning(f"A_f series imaginary residue {residue:.3e}")
        return series.real

    def fiber_expectations(
        self,
        f: EnlargedState,
        model: ModelSpec,
        probe: HermitianOperator,
        times: TimeGrid,
        grid: TorusGrid,
    ) -> np.ndarray:
        """
        <U_theta(t,0) f(theta), A U_theta(t,0) f(theta)> for every grid point and time.

        Grid points are propagated in parallel; rows follow the grid order.

        Returns:
            Array of shape (q, count + 1)
        """
        if f.size != grid.size:
            raise GridMismatch(f"State has {f.size} points, grid has {grid.size}")
        if isinstance(model, QuasiperiodicExactParams):

            def fibre(j: int) -> np.ndarray:
                local = model.model_copy(update={"theta1": float(grid.thetas[j])})
                vector = f.values[j]
                states = np.array([self.engine.exact_raw(local, t) @ vector for t in times.times])
                return np.einsum("ka,ab,kb->k", states.conj(), probe.matrix, states).real

        else:
            unitaries = self._shared_unitaries(model, times)

            def fibre(j: int) -> np.ndarray:
                states = unitaries @ f.values[j]
                return np.einsum("ka,ab,kb->k", states.conj(), probe.matrix, states).real

        rows = Parallel(n_jobs=self.settings.threads, prefer="threads")(
            delayed(fibre)(j) for j in range(grid.size)
        )
        return np.array(rows)

    def af_direct(
        self,
        f: EnlargedState,
        model: ModelSpec,
        probe: HermitianOperator,
        times: TimeGrid,
        grid: TorusGrid,
    ) -> np.ndarray:
        """A_f(t) = (1/q) sum_j <U_j(t,0) f(theta_j), A U_j(t,0) f(theta_j)>."""
        return np.mean(self.fiber_expectations(f, model, probe, times, grid), axis=0)

    def fiber_expectation_bounds(
        self,
        f: EnlargedState,
        model: ModelSpec,
        probe: HermitianOperator,
        times: TimeGrid,
        grid: TorusGrid,
    ) -> List[float]:
        """Per grid point, sup over the sampled times of the fibre expectation."""
        expectations = self.fiber_expectations(f, model, probe, times, grid)
        return [float(v) for v in np.max(expectations, axis=1)]

    def af_identity(
        self,
        f: EnlargedState,
        spectrum: EnlargedSpectrum,
        indices: Sequence[int],
        model: ModelSpec,
        probe: HermitianOperator,
        times: TimeGrid,
        epsilon: Optional[float] = None,
    ) -> AFReport:
        """
        Compare the eigen-expansion of A_f(t) with direct fibrewise propagation.

        Args:
            f: Enlarged state, expected to lie in the span of the selected eigenvectors
            spectrum: Enlarged spectrum of the model on its grid
            indices: Eigenvectors used in the expansion
            model: Fibre model
            probe: Hermitian A
            times: Time grid starting at 0
            epsilon: When given, the expanded series is also scanned for almost periods
                and classified for boundedness

        Returns:
            AFReport
        """
        states = [spectrum.state(i) for i in indices]
        quasienergies = spectrum.quasienergies[list(indices)]
        coefficients = self.expand(f, states)
        b = self.b_matrix_full(states, probe)
        series = self.af_series(coefficients, quasienergies, b, times.times, norm_sq=f.norm_sq())
        direct = self.af_direct(f, model, probe, times, spectrum.grid)
        discrepancy = float(np.max(np.abs(series - direct)))
        logger.info(f"A_f identity over {len(indices)} eigenvectors: max gap {discrepancy:.3e}")

        ap = stability = None
        if epsilon is not None:
            orbit = OrbitSample(grid=times, states=series[:, None], max_norm_drift=0.0)
            ap = self.orbits.ap_scan(orbit, epsilon, 0.5 * (times.t1 - times.t0))
            stability = self.energy.stability_verdict(
                EnergySeries(
                    probe="A_f",
                    times=[float(t) for t in times.times],
                    values=[float(v) for v in series],
                    norm_sq=f.norm_sq(),
                )
            )
        return AFReport(
            b_matrix_real=b.real.tolist(),
            b_matrix_imag=b.imag.tolist(),
            coefficients_real=coefficients.real.tolist(),
            coefficients_imag=coefficients.imag.tolist(),
            quasienergies=[float(v) for v in quasienergies],
            times=[float(t) for t in times.times],
            series=[float(v) for v in series],
            direct_series=[float(v) for v in direct],
            b_hermiticity_defect=hermiticity_defect(b) if b.size else 0.0,
            max_discrepancy=discrepancy,
            ap=ap,
            stability=stability,
        )

    # ========================================================================
    # Eigenfunction flow identity
    # ========================================================================

    def eigen_flow_check(
        self,
        grid: TorusGrid,
        u1: np.ndarray,
        f: EnlargedState,
        quasienergy: float,
        periods: int,
        model: Optional[ModelSpec] = None,
        verify: bool = True,
    ) -> EigenFlowReport:
        """
        max_{j,k} ||U_{theta_j}(k T2, 0) f(theta_j) - e^{-i lambda k T2} f(theta_{j+kp})||.

        Args:
            grid: Torus grid
            u1: Monodromy samples on the grid
            f: Enlarged eigenvector
            quasienergy: lambda with U_F f = e^{-i lambda T2} f
            periods: Largest k
            model: When it has a generator, the fibre energies are tracked as well
            verify: Check the eigen-relation first

        Raises:
            NotAnEigenvector: If verify is set and the eigen residual exceeds 1e-8
        """
        period = grid.period
        image = self.generalized_floquet_apply(grid, u1, f)
        residual = float(
            np.sqrt(
                np.mean(
                    np.sum(
                        np.abs(image.values - np.exp(-1j * quasienergy * period) * f.values) ** 2,
                        axis=1,
                    )
                )
            )
        )
        if verify and residual > EIGENVECTOR_RESIDUAL:
            raise NotAnEigenvector(f"Enlarged eigen residual {residual:.3e}")

        generator = model is not None and self.engine.has_generator(model)
        current = f.values.copy()
        worst = 0.0
        energy_sup = None
        for k in range(1, periods + 1):
            ahead = np.roll(u1, -(k - 1) * grid.shift, axis=0)
            current = np.einsum("jab,jb->ja", ahead, current)
            target = np.exp(-1j * quasienergy * k * period) * np.roll(
                f.values, -k * grid.shift, axis=0
            )
            worst = max(worst, float(np.max(np.linalg.norm(current - target, axis=1))))
            if generator:
                h_k = self.engine.hamiltonian_raw(model, k * period)
                energies = np.einsum("ja,ab,jb->j", current.conj(), h_k, current).real
                peak = float(np.max(np.abs(energies)))
                energy_sup = peak if energy_sup is None else max(energy_sup, peak)

        return EigenFlowReport(
            quasienergy=quasienergy,
            periods=periods,
            eigen_residual=residual,
            max_defect=worst,
            energy_sup=energy_sup,
            flow_speed=grid.shift * grid.spacing / period,
        )

    # ========================================================================
    # Summability
    # ========================================================================

    @staticmethod
    def derivative_sup(state: EnlargedState) -> float:
        """sup_theta ||d f / d theta|| by cyclic centered differences."""
        spacing = TWO_PI / state.size
        derivative = (np.roll(state.values, -1, axis=0) - np.roll(state.values, 1, axis=0)) / (
            2 * spacing
        )
        return float(np.max(np.linalg.norm(derivative, axis=1)))

    @staticmethod
    def summability_bound(
        coefficients: Sequence[complex],
        quasienergies: Sequence[float],
        derivative_sups: Sequence[float],
    ) -> SummabilityReport:
        """
        Partial sum of |a_j| (|lambda_j| + sup ||d f_j / d theta||), with a tail trend.

        The trend compares the sums over the first k and all 2k terms: finite when every
        later term vanishes, convergent when the relative tail is below the configured
        ratio, divergent otherwise.
        """
        a = np.abs(np.asarray(coefficients, dtype=complex))
        terms = a * (np.abs(np.asarray(quasienergies, dtype=float)) + np.asarray(derivative_sups))
        count = terms.size
        half = count // 2
        total = float(np.sum(terms))
        head = float(np.sum(terms[:half]))
        if not np.any(terms[half:]):
            trend = "finite"
        elif total > 0 and (total - head) / total < SUMMABILITY_TAIL_RATIO:
            trend = "convergent"
        else:
            trend = "divergent"
        return SummabilityReport(terms=count, partial_sum=total, half_sum=head, trend=trend)

    # ========================================================================
    # Convergent sweep
    # ========================================================================

    def convergent_sweep(
        self,
        model: QuasiperiodicExactParams,
        sizes: Sequence[int],
        vector: Optional[np.ndarray] = None,
        probe: Optional[HermitianOperator] = None,
        periods: int = 20,
    ) -> ConvergentSweep:
        """
        Eigenphase statistics of U_F over grid sizes q, usually successive convergents.

        When a physical vector and a probe are given, f = 1 (x) vector is expanded in the full
        enlarged eigenbasis and A_f is compared with exact propagation at t = k T2.
        """

        def one(size: int):
            grid = self.model_grid(model, size)
            u1 = self.monodromy_samples(model, grid)
            spectrum = self.enlarged_spectrum(grid, u1)
            statistics = self.spacing_statistics(spectrum.phases, grid)
            discrepancy = None
            if vector is not None and probe is not None:
                times = TimeGrid(t0=0.0, t1=periods * model.t2, h=model.t2, count=periods)
                f = EnlargedState.constant(size, vector)
                states = [spectrum.state(i) for i in range(spectrum.phases.size)]
                coefficients = self.expand(f, states)
                b = self.b_matrix_full(states, probe)
                series = self.af_series(coefficients, spectrum.quasienergies, b, times.times)
                direct = self.af_direct(f, model, probe, times, grid)
                discrepancy = float(np.max(np.abs(series - direct)))
            return statistics, discrepancy

        results = Parallel(n_jobs=self.settings.threads, prefer="threads")(
            delayed(one)(size) for size in sizes
        )
        return ConvergentSweep(
            alpha=model.alpha,
            statistics=[s for s, _ in results],
            discrepancies=[d for _, d in results],
        )

    # ========================================================================
    # Internals
    # ========================================================================

    @staticmethod
    def _check_samples(grid: TorusGrid, u1: np.ndarray, dim: int) -> None:
        if u1.ndim != 3 or u1.shape[0] != grid.size or u1.shape[1:] != (dim, dim):
            raise GridMismatch(f"u1 samples of shape {u1.shape} do not fit the grid")

    def _shared_unitaries(self, model: ModelSpec, times: TimeGrid) -> np.ndarray:
        if self.engine.has_closed_form(model):
            return np.array([self.engine.exact_raw(model, t) for t in times.times])
        if abs(times.t0) > 0:
            raise TimeNotOnGrid("Stepped fibre propagation starts at t = 0")
        return self.propagator.build_cache(model, times).unitaries
