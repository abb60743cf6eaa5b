"""Pytest Configuration and Shared Fixtures for All Tests"""
import math
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to path
root_dir = Path(__file__).parent.parent
sys.path.insert(0, str(root_dir))


@pytest.fixture
def two_level():
    """Fixture: Driven two-level model whose Floquet orbits close after 13 periods."""
    from src.logic.data_models.model_spec import DrivenTwoLevelParams

    return DrivenTwoLevelParams(omega0=1.0, amplitude=0.4, omega=1.3)


@pytest.fixture
def golden_flow():
    """Fixture: Quasiperiodic flow with golden-mean frequency ratio."""
    from src.logic.data_models.model_spec import QuasiperiodicExactParams

    return QuasiperiodicExactParams(omega1=(math.sqrt(5.0) - 1.0) / 2.0, omega2=1.0)


@pytest.fixture
def engine():
    """Fixture: Model engine on default settings."""
    from src.logic.analytics.hamiltonian_models import ModelEngine

    return ModelEngine()


@pytest.fixture
def propagator(engine):
    """Fixture: Propagator sharing the engine fixture."""
    from src.logic.analytics.propagator import Propagator

    return Propagator(engine=engine)


@pytest.fixture
def model_factory():
    """Fixture: Factory for model specifications."""

    class ModelFactory:
        @staticmethod
        def create_two_level(**kwargs):
            from src.logic.data_models.model_spec import DrivenTwoLevelParams

            defaults = {"omega0": 1.0, "amplitude": 0.4, "omega": 1.3}
            defaults.update(kwargs)
            return DrivenTwoLevelParams(**defaults)

        @staticmethod
        def create_autonomous(h0, coupling=None, **kwargs):
            from src.logic.data_models.model_spec import AutonomousDiscreteParams

            return AutonomousDiscreteParams(h0=list(h0), coupling=coupling, **kwargs)

        @staticmethod
        def create_quasiperiodic(**kwargs):
            from src.logic.data_models.model_spec import QuasiperiodicExactParams

            defaults = {"omega1": (math.sqrt(5.0) - 1.0) / 2.0, "omega2": 1.0}
            defaults.update(kwargs)
            return QuasiperiodicExactParams(**defaults)

    return ModelFactory()


@pytest.fixture
def orbit_factory():
    """Fixture: Factory for synthetic orbits on uniform grids."""

    class OrbitFactory:
        @staticmethod
        def from_function(func, t1, h, t0=0.0):
            from src.logic.data_models.orbit import OrbitSample, TimeGrid

            grid = TimeGrid.from_span(t0, t1, h)
            states = np.array([np.atleast_1d(func(t)) for t in grid.times], dtype=complex)
            norms = np.linalg.norm(states, axis=1)
            return OrbitSample(
                grid=grid, states=states, max_norm_drift=float(np.max(np.abs(norms - norms[0])))
            )

    return OrbitFactory()


@pytest.fixture
def fixtures_dir():
    """Fixture: Directory holding the sample scenario files."""
    return Path(__file__).parent / "logic" / "fixtures"
