"""Orbit Diagnostics - Almost-periodicity, covering, tail-escape and RAGE detectors.

Every detector is a finite-horizon surrogate of an asymptotic notion: verdicts say the
sampled data is consistent with a property over the horizon, never that it holds.
"""
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy.integrate import cumulative_trapezoid

from ..data_models.operators import HermitianOperator
from ..data_models.orbit import OrbitSample, TimeGrid
from ..data_models.reports import (
    APReport,
    APWitness,
    CoveringReport,
    FiniteRankProjection,
    RageReport,
    TailEscapeReport,
)
from ..utils.constants import GRID_JUMP_FRACTION, GRID_TIME_RTOL, TAIL_TO_ONE, TAIL_TO_ZERO
from ..utils.errors import GridTooCoarse, HorizonTooShort, TimeNotOnGrid
from ..utils.logging import setup_logging
from ..utils.settings import LabSettings, get_settings
from .linalg_kernel import LinalgKernel

logger = setup_logging(__name__)


class OrbitDiagnostics:
    """Detectors operating on a completed OrbitSample."""

    def __init__(
        self,
        kernel: Optional[LinalgKernel] = None,
        settings: Optional[LabSettings] = None,
    ):
        """
        Initialize the detectors.

        Args:
            kernel: Linear algebra kernel used for probe eigendecompositions
            settings: Thread count and tolerances (default: process-wide settings)
        """
        self.kernel = kernel or LinalgKernel()
        self.settings = settings or get_settings()

    # ========================================================================
    # Almost periodicity
    # ========================================================================

    def ap_scan(
        self,
        orbit: OrbitSample,
        epsilon: float,
        tau_max: float,
        generator_norm: Optional[float] = None,
    ) -> APReport:
        """
        Scan shifts tau = m h in (0, tau_max] for epsilon-almost periods.

        tau is an almost period when max_k ||psi(t_k + tau) - psi(t_k)|| <= epsilon over the
        overlap window [t0, t1 - tau]. The leading run of almost periods starting at tau = h
        only reflects continuity and is not counted, unless it covers the whole range.
        The orbit is AP-consistent when a non-trivial almost period exists; the relative
        density length is then estimated by the largest gap (endpoints 0 and tau_max).

        Args:
            orbit: Sampled orbit
            epsilon: Tolerance
            tau_max: Largest shift, at most half the horizon
            generator_norm: Bound on ||H(t)||; enables the grid-resolution check

        Returns:
            APReport

        Raises:
            HorizonTooShort: If tau_max exceeds half the sampled span
            GridTooCoarse: If h * ||H|| * ||psi|| exceeds epsilon / 4
        """
        grid = orbit.grid
        horizon = grid.t1 - grid.t0
        if grid.count < 2 or tau_max > 0.5 * horizon * (1 + 1e-12):
            raise HorizonTooShort(f"tau_max={tau_max} exceeds half the horizon {horizon}")
        if generator_norm is not None:
            norm = float(np.max(orbit.norms()))
            if grid.h * generator_norm * norm > GRID_JUMP_FRACTION * epsilon:
                raise GridTooCoarse(
                    f"Step {grid.h} can hide deviations of size {epsilon} "
                    f"(||H||={generator_norm:.3g})"
                )

        shifts = np.arange(1, int(np.floor(tau_max / grid.h + GRID_TIME_RTOL)) + 1)
        if shifts.size == 0:
            raise HorizonTooShort(f"tau_max={tau_max} is below the grid step {grid.h}")
        sup, where = self._sup_deviations(orbit.states, shifts)
        taus = shifts * grid.h
        accepted = sup <= epsilon

        trivial = 0
        while trivial < len(accepted) and accepted[trivial]:
            trivial += 1
        if trivial == len(accepted):
            nontrivial = taus
        else:
            nontrivial = taus[trivial:][accepted[trivial:]]

        if nontrivial.size:
            edges = np.concatenate(([0.0], nontrivial, [tau_max]))
            max_gap = float(np.max(np.diff(edges)))
            verdict, length, witness = "AP-consistent", max_gap + grid.h, None
        else:
            worst = int(np.argmax(sup))
            max_gap, verdict, length = float(tau_max), "violating-witness", None
            witness = APWitness(
                tau=float(taus[worst]),
                t=float(grid.t0 + where[worst] * grid.h),
                deviation=float(sup[worst]),
            )

        logger.info(
            f"AP scan eps={epsilon}, tau_max={tau_max}: {verdict}, "
            f"{nontrivial.size} almost periods, max_gap={max_gap:.4g}"
        )
        return APReport(
            epsilon=epsilon,
            horizon=horizon,
            tau_max=tau_max,
            step=grid.h,
            almost_periods=[float(t) for t in nontrivial],
            max_gap=max_gap,
            verdict=verdict,
            relative_density_length=length,
            witness=witness,
            taus=[float(t) for t in taus],
            deviations=[float(d) for d in sup],
        )

    def _sup_deviations(self, states: np.ndarray, shifts: np.ndarray):
        """Per shift m: max_k ||psi_{k+m} - psi_k|| and the maximizing k."""

        def chunk(ms: np.ndarray):
            sups, args = [], []
            for m in ms:
                gaps = np.linalg.norm(states[m:] - states[:-m], axis=1)
                k = int(np.argmax(gaps))
                sups.append(gaps[k])
                args.append(k)
            return sups, args

        pieces = np.array_split(shifts, max(self.settings.threads, 1))
        results = Parallel(n_jobs=self.settings.threads, prefer="threads")(
            delayed(chunk)(piece) for piece in pieces if piece.size
        )
        sup = np.concatenate([np.asarray(s, dtype=float) for s, _ in results])
        where = np.concatenate([np.asarray(a, dtype=int) for _, a in results])
        return sup, where

    # ========================================================================
    # Precompactness
    # ========================================================================

    def covering_number(
        self, orbit: OrbitSample, epsilon: float, horizons: Sequence[float]
    ) -> CoveringReport:
        """
        Greedy epsilon-net sizes over the states sampled up to each horizon.

        States are visited in time order and the first one not within epsilon of an existing
        center becomes a center, so the net for a shorter horizon is a prefix of the net for
        a longer one.

        Args:
            orbit: Sampled orbit
            epsilon: Net radius
            horizons: Ascending horizons measured from the grid start

        Returns:
            CoveringReport with the saturation flag

        Raises:
            HorizonTooShort: If a horizon exceeds the sampled span
        """
        grid = orbit.grid
        span = grid.t1 - grid.t0
        horizons = [float(h) for h in horizons]
        if any(b < a for a, b in zip(horizons, horizons[1:])):
            raise ValueError("Horizons must be ascending")
        if horizons and horizons[-1] > span * (1 + 1e-12):
            raise HorizonTooShort(f"Horizon {horizons[-1]} exceeds the sampled span {span}")

        limits = [min(int(np.floor(h / grid.h + GRID_TIME_RTOL)), grid.count) for h in horizons]
        centers = np.empty((0, orbit.dim), dtype=complex)
        counts: List[int] = []
        visited = 0
        for limit in limits:
            for k in range(visited, limit + 1):
                state = orbit.states[k]
                if centers.shape[0] == 0 or np.min(
                    np.linalg.norm(centers - state, axis=1)
                ) > epsilon:
                    centers = np.vstack([centers, state])
            visited = max(visited, limit + 1)
            counts.append(int(centers.shape[0]))

        saturation = None
        for i, h in enumerate(horizons):
            for j in range(i + 1, len(horizons)):
                if abs(horizons[j] - 2 * h) <= 1e-9 * max(1.0, h) and counts[j] == counts[i]:
                    saturation = h
                    break
            if saturation is not None:
                break

        logger.info(f"Covering eps={epsilon}: N={counts}, saturated={saturation is not None}")
        return CoveringReport(
            epsilon=epsilon,
            horizons=horizons,
            counts=counts,
            saturated=saturation is not None,
            saturation_horizon=saturation,
        )

    # ========================================================================
    # Probe tails
    # ========================================================================

    def tail_escape(
        self,
        orbit: OrbitSample,
        probe: HermitianOperator,
        energies: Sequence[float],
        label: str = "A",
    ) -> TailEscapeReport:
        """
        beta(E) = max_t ||F(A > E) psi(t)|| / ||psi(t)|| with F the spectral projection.

        Args:
            orbit: Sampled orbit
            probe: Hermitian probe A (diagonalized once)
            energies: Energy grid
            label: Probe name recorded in the report

        Returns:
            TailEscapeReport; the trend is read off at the largest energy
        """
        eig = self.kernel.hermitian_eig(probe)
        weights = np.abs(orbit.states @ eig.vectors.conj()) ** 2
        norms_sq = np.sum(weights, axis=1)
        norms_sq[norms_sq == 0] = 1.0
        energies = [float(e) for e in energies]
        beta = []
        for energy in energies:
            above = eig.values > energy
            tail = np.sum(weights[:, above], axis=1) / norms_sq
            beta.append(float(np.sqrt(np.max(tail))) if tail.size else 0.0)

        final = beta[int(np.argmax(energies))] if energies else 0.0
        if final < TAIL_TO_ZERO:
            trend = "to-zero"
        elif final > TAIL_TO_ONE:
            trend = "to-one"
        else:
            trend = "indeterminate"
        logger.info(f"Tail escape of {label}: beta(E_max)={final:.3g}, trend={trend}")
        return TailEscapeReport(probe=label, energies=energies, beta=beta, trend=trend)

    # ========================================================================
    # RAGE averages
    # ========================================================================

    def rage_average(
        self, orbit: OrbitSample, projection: FiniteRankProjection, taus: Sequence[float]
    ) -> RageReport:
        """
        a(tau) = (1/tau) int_{t0}^{t0+tau} ||C psi(t)|| dt by the trapezoid rule.

        Raises:
            TimeNotOnGrid: If some tau is not a positive multiple of the grid step in range
        """
        grid = orbit.grid
        weights = projection.norms(orbit.states)
        integral = cumulative_trapezoid(weights, dx=grid.h, initial=0.0)
        averages = []
        for tau in taus:
            if tau <= 0:
                raise TimeNotOnGrid(f"tau={tau} must be positive")
            k = grid.index_of(grid.t0 + tau)
            averages.append(float(integral[k] / tau))
        logger.info(f"RAGE averages of {projection.label}: {np.round(averages, 6).tolist()}")
        return RageReport(
            projection=projection.label,
            rank=projection.rank,
            taus=[float(t) for t in taus],
            averages=averages,
        )

    # ========================================================================
    # Derivative orbit
    # ========================================================================

    @staticmethod
    def derivative_orbit(orbit: OrbitSample) -> OrbitSample:
        """Centered differences (psi_{k+1} - psi_{k-1}) / 2h on the interior nodes."""
        grid = orbit.grid
        if grid.count < 2:
            raise GridTooCoarse("A derivative orbit needs at least three samples")
        states = (orbit.states[2:] - orbit.states[:-2]) / (2 * grid.h)
        inner = TimeGrid(
            t0=grid.t0 + grid.h,
            t1=grid.t0 + (grid.count - 1) * grid.h,
            h=grid.h,
            count=grid.count - 2,
        )
        norms = np.linalg.norm(states, axis=1)
        return OrbitSample(
            grid=inner,
            states=states,
            max_norm_drift=float(np.max(np.abs(norms - norms[0]))),
            accepted=orbit.accepted,
        )
