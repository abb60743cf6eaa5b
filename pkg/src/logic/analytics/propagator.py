"""Propagator - Midpoint stepping, closed-form evaluation and Floquet factorization of U(t, 0)."""
from typing import Iterator, Literal, Optional, Tuple, Union

import numpy as np

from ..data_models.model_spec import (
    AutonomousDiscreteParams,
    DirectSumQuasiperiodicParams,
    KickedLinearParams,
    ModelSpec,
    QuasiperiodicExactParams,
)
from ..data_models.operators import ComplexVector, UnitaryOperator
from ..data_models.orbit import OrbitSample, PropagatorCache, TimeGrid
from ..utils.constants import DEFAULT_STEPS_PER_PERIOD, EIGENVECTOR_RESIDUAL, GRID_TIME_RTOL
from ..utils.errors import NoClosedForm, NormDriftExceeded, NotAnEigenvector, TimeNotOnGrid
from ..utils.logging import setup_logging
from ..utils.settings import LabSettings, get_settings
from .hamiltonian_models import ModelEngine

logger = setup_logging(__name__)

Method = Literal["auto", "stepped", "closed_form"]
StateLike = Union[ComplexVector, np.ndarray]


def decompose_time(t: float, period: float) -> Tuple[int, float]:
    """t = n T + s with n = floor(t / T), so 0 <= s < T for both signs of t."""
    n = int(np.floor(t / period))
    s = t - n * period
    if s >= period * (1.0 - 1e-12):
        n, s = n + 1, 0.0
    return n, max(s, 0.0)


def _as_array(psi: StateLike) -> np.ndarray:
    if isinstance(psi, ComplexVector):
        return psi.components
    return np.asarray(psi, dtype=complex)


class Propagator:
    """Build U(t, 0), orbits, caches and monodromies for any ModelSpec."""

    def __init__(
        self,
        engine: Optional[ModelEngine] = None,
        settings: Optional[LabSettings] = None,
    ):
        """
        Initialize the propagator.

        Args:
            engine: ModelEngine instance (default: new instance)
            settings: Tolerance authority (default: process-wide settings)
        """
        self.engine = engine or ModelEngine()
        self.kernel = self.engine.kernel
        self.settings = settings or get_settings()

    def step_midpoint(self, model: ModelSpec, t: float, h: float) -> UnitaryOperator:
        """
        One exponential-midpoint step exp(-i h H(t + h/2)).

        Raises:
            GeneratorNotAvailable: If the model has no pointwise generator
        """
        return UnitaryOperator(matrix=self._step_raw(model, t, h))

    def _step_raw(self, model: ModelSpec, t: float, h: float) -> np.ndarray:
        return self.kernel.expm_raw(self.engine.hamiltonian_raw(model, t + 0.5 * h), h)

    def propagate(
        self,
        model: ModelSpec,
        psi0: StateLike,
        grid: TimeGrid,
        method: Method = "auto",
        renormalize_every: Optional[int] = None,
    ) -> OrbitSample:
        """
        Sample psi(t_k) = U(t_k, t0) psi0 on a uniform grid.

        Args:
            model: Model specification
            psi0: Initial state at grid.t0
            grid: Sampling grid
            method: "auto" (closed form when available), "stepped" or "closed_form"
            renormalize_every: Polar re-unitarization period for stepping (default from settings)

        Returns:
            OrbitSample with norm-drift metadata

        Raises:
            NormDriftExceeded: If the norm drifts beyond the configured limit
            NoClosedForm: If method="closed_form" on a model without one
        """
        psi = _as_array(psi0)
        route = self._route(model, method)
        logger.debug(f"Propagating {model.variant} over {grid.count} steps via {route}")

        if route == "kicked":
            states = self._kicked_states(model, psi, grid)
        elif route == "closed_form":
            states = self._closed_form_states(model, psi, grid)
        else:
            propagators = self._stepped_propagators(model, grid, renormalize_every)
            states = np.array([u @ psi for u in propagators])

        norms = np.linalg.norm(states, axis=1)
        drift = float(np.max(np.abs(norms - norms[0])))
        if drift > self.settings.norm_drift_limit:
            raise NormDriftExceeded(
                f"Norm drift {drift:.3e} exceeds {self.settings.norm_drift_limit:.1e}; reduce h"
            )
        accepted = drift <= self.settings.orbit_accept_drift
        if not accepted:
            logger.warning(f"Orbit accepted with reservations: norm drift {drift:.3e}")
        return OrbitSample(grid=grid, states=states, max_norm_drift=drift, accepted=accepted)

    def build_cache(
        self,
        model: ModelSpec,
        grid: TimeGrid,
        method: Method = "auto",
        renormalize_every: Optional[int] = None,
    ) -> PropagatorCache:
        """
        Cache U(t_k, t0) on a grid.

        Args:
            model: Model specification
            grid: Cache grid (reference time is grid.t0)
            method: Propagation route, as in propagate
            renormalize_every: Polar re-unitarization period for stepping

        Returns:
            PropagatorCache
        """
        route = self._route(model, method)
        if route == "kicked":
            unitaries = self._kicked_states(model, np.eye(model.dim, dtype=complex), grid)
        elif route == "closed_form":
            base = self.engine.exact_raw(model, grid.t0).conj().T
            unitaries = np.array([self.engine.exact_raw(model, t) @ base for t in grid.times])
        else:
            unitaries = np.array(list(self._stepped_propagators(model, grid, renormalize_every)))
        return PropagatorCache(grid=grid, unitaries=unitaries)

    def cocycle_defect(self, cache: PropagatorCache, t: float, r: float, s: float) -> float:
        """
        Frobenius defect of U(t, r) U(r, s) = U(t, s), every factor routed through the cache.

        Raises:
            TimeNotOnGrid: If any time is not a cache node
        """
        u_t, u_r, u_s = cache.at(t), cache.at(r), cache.at(s)
        direct = u_t @ u_s.conj().T
        composed = (u_t @ u_r.conj().T) @ (u_r @ u_s.conj().T)
        return float(np.linalg.norm(direct - composed))

    def monodromy(
        self,
        model: ModelSpec,
        period: Optional[float] = None,
        steps: int = DEFAULT_STEPS_PER_PERIOD,
    ) -> UnitaryOperator:
        """
        One-period propagator U(T, 0).

        Args:
            model: Model specification
            period: T (default: the model's period, or T2 for quasiperiodic models)
            steps: Midpoint steps per period when stepping

        Returns:
            UnitaryOperator U_F = U(T, 0)
        """
        return self.shifted_monodromy(model, 0.0, period, steps)

    def shifted_monodromy(
        self,
        model: ModelSpec,
        s: float,
        period: Optional[float] = None,
        steps: int = DEFAULT_STEPS_PER_PERIOD,
    ) -> UnitaryOperator:
        """Base-point dependent Floquet operator U_F(s) = U(s + T, s)."""
        period = self._default_period(model, period)
        if isinstance(model, KickedLinearParams):
            steps = max(int(round(period)), 1)
        grid = TimeGrid(t0=s, t1=s + steps * (period / steps), h=period / steps, count=steps)
        route = self._route(model, "auto")
        if route == "closed_form":
            start = self.engine.exact_raw(model, s).conj().T
            matrix = self.engine.exact_raw(model, s + period) @ start
        elif route == "kicked":
            matrix = self._kicked_states(model, np.eye(model.dim, dtype=complex), grid)[-1]
        else:
            matrix = self._last(self._stepped_propagators(model, grid, None))
        return UnitaryOperator(matrix=matrix)

    def floquet_orbit(
        self,
        cache: PropagatorCache,
        monodromy: UnitaryOperator,
        alpha: float,
        xi: StateLike,
        t: float,
        period: float,
    ) -> ComplexVector:
        """
        U(t, 0) xi = U(s, 0) e^{-i n alpha} xi for t = n T + s, at a cost independent of n.

        Args:
            cache: U(s, 0) over one period, starting at 0
            monodromy: U_F = U(T, 0)
            alpha: Eigenphase with U_F xi = e^{-i alpha} xi
            xi: Floquet eigenvector
            t: Target time
            period: T

        Returns:
            ComplexVector psi(t)

        Raises:
            NotAnEigenvector: If the eigen-relation residual exceeds 1e-8
            TimeNotOnGrid: If s is not a cache node
        """
        vector = _as_array(xi)
        residual = float(np.linalg.norm(monodromy.matrix @ vector - np.exp(-1j * alpha) * vector))
        if residual > EIGENVECTOR_RESIDUAL:
            raise NotAnEigenvector(
                f"Floquet residual {residual:.3e} exceeds {EIGENVECTOR_RESIDUAL}"
            )
        n, s = decompose_time(t, period)
        k = cache.grid.index_of(s)
        return ComplexVector(components=np.exp(-1j * n * alpha) * (cache.unitaries[k] @ vector))

    # ========================================================================
    # Internal routes
    # ========================================================================

    def _route(self, model: ModelSpec, method: Method) -> str:
        if isinstance(model, KickedLinearParams):
            return "kicked"
        if method == "closed_form":
            if not self.engine.has_closed_form(model):
                raise NoClosedForm(f"{model.variant} has no closed-form propagator")
            return "closed_form"
        if method == "auto" and self.engine.has_closed_form(model):
            return "closed_form"
        return "stepped"

    def _default_period(self, model: ModelSpec, period: Optional[float]) -> float:
        if period is not None:
            return period
        if isinstance(model, QuasiperiodicExactParams):
            return model.t2
        if isinstance(model, DirectSumQuasiperiodicParams):
            return model.blocks[0].t2
        return self.engine.period(model)

    def _closed_form_states(self, model: ModelSpec, psi: np.ndarray, grid: TimeGrid) -> np.ndarray:
        if isinstance(model, AutonomousDiscreteParams):
            # psi(t) = V e^{-i E (t - t0)} V^dag psi0 for all t at once
            eig = self.kernel.hermitian_eig(self.engine.hamiltonian_at(model, 0.0))
            amplitudes = eig.vectors.conj().T @ psi
            phases = np.exp(-1j * np.outer(grid.times - grid.t0, eig.values))
            return (phases * amplitudes) @ eig.vectors.T
        base = self.engine.exact_raw(model, grid.t0).conj().T @ psi
        return np.array([self.engine.exact_raw(model, t) @ base for t in grid.times])

    def _stepped_propagators(
        self, model: ModelSpec, grid: TimeGrid, renormalize_every: Optional[int]
    ) -> Iterator[np.ndarray]:
        period = renormalize_every or self.settings.renormalize_every
        accumulated = np.eye(model.dim, dtype=complex)
        yield accumulated
        for k in range(grid.count):
            accumulated = self._step_raw(model, grid.t0 + k * grid.h, grid.h) @ accumulated
            if (k + 1) % period == 0:
                accumulated = self.kernel.polar_raw(accumulated)
            yield accumulated

    def _kicked_states(
        self, model: KickedLinearParams, block: np.ndarray, grid: TimeGrid
    ) -> np.ndarray:
        """Free flight between grid nodes, kick eps_n applied on arrival at integer time n."""
        per_kick = 1.0 / grid.h
        aligned = abs(per_kick - round(per_kick)) <= GRID_TIME_RTOL
        if not aligned or abs(grid.t0 - round(grid.t0)) > GRID_TIME_RTOL:
            raise TimeNotOnGrid("Kick times must be nodes of the grid (1/h and t0 integers)")
        per_kick = int(round(per_kick))
        start = int(round(grid.t0))
        states = [block]
        current = block
        for k in range(1, grid.count + 1):
            current = self.engine.free_flight_raw(model, current, grid.h)
            if k % per_kick == 0:
                n = start + k // per_kick
                current = self.engine.apply_kick(model, current, n)
            states.append(current)
        return np.array(states)

    @staticmethod
    def _last(iterator: Iterator[np.ndarray]) -> np.ndarray:
        last = None
        for last in iterator:
            pass
        return last
