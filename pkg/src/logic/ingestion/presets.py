"""Built-in scenarios, runnable by name from the command line."""
import math
from typing import Callable, Dict

from ..data_models.scenario import ScenarioConfig
from ..utils.constants import PRESET_NAMES

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _two_level() -> dict:
    return {"variant": "DrivenTwoLevel", "omega0": 1.0, "amplitude": 0.4, "omega": 1.3}


def _two_level_period() -> float:
    return 2 * math.pi / 1.3


def prop32() -> ScenarioConfig:
    """Floquet eigenvector orbit: recurrence and almost periodicity."""
    period = _two_level_period()
    return ScenarioConfig.model_validate(
        {
            "scenario": "prop32",
            "model": _two_level(),
            "initial_state": {"kind": "floquet", "indices": [0]},
            "grid": {"t0": 0.0, "t1": 30 * period, "h": period / 128},
            "diagnostics": [
                {"kind": "ap_scan", "epsilon": 0.1, "tau_max": 15 * period},
                {"kind": "recurrence", "samples": 200},
            ],
        }
    )


def prop44() -> ScenarioConfig:
    """Two-mode Floquet state: energy series, boundedness verdict and drift bounds."""
    period = _two_level_period()
    return ScenarioConfig.model_validate(
        {
            "scenario": "prop44",
            "model": _two_level(),
            "initial_state": {"kind": "floquet", "indices": [0, 1]},
            "grid": {"t0": 0.0, "t1": 400 * period, "h": period / 64},
            "diagnostics": [
                {"kind": "energy_series", "source": "free"},
                {"kind": "stability_verdict", "source": "generator"},
                {"kind": "energy_bounds"},
            ],
        }
    )


def qp_witness() -> ScenarioConfig:
    """Quasiperiodic flow with a precompact but not almost periodic orbit."""
    t2 = 2 * math.pi
    return ScenarioConfig.model_validate(
        {
            "scenario": "qp-witness",
            "model": {"variant": "QuasiperiodicExact", "omega1": GOLDEN, "omega2": 1.0},
            "initial_state": {"kind": "basis", "index": 0},
            "grid": {"t0": 0.0, "t1": 100 * t2, "h": t2 / 64},
            "diagnostics": [
                {"kind": "ap_scan", "epsilon": 0.5, "tau_max": 50 * t2},
                {
                    "kind": "covering_number",
                    "epsilon": 0.2,
                    "horizons": [12.5 * t2, 25 * t2, 50 * t2, 100 * t2],
                },
                {
                    "kind": "convergent_sweep",
                    "sizes": [13, 21, 34],
                    "probe": {"kind": "pauli_z"},
                    "periods": 20,
                },
            ],
        }
    )


def rage_lattice() -> ScenarioConfig:
    """Site state spreading on a 1-D lattice: decaying time-averaged return weight."""
    dim = 1024
    return ScenarioConfig.model_validate(
        {
            "scenario": "rage-lattice",
            "model": {
                "variant": "AutonomousDiscrete",
                "h0": [0.0] * dim,
                "coupling": {"kind": "lattice_laplacian"},
            },
            "initial_state": {"kind": "basis", "index": dim // 2},
            "grid": {"t0": 0.0, "t1": 250.0, "h": 0.5},
            "diagnostics": [
                {"kind": "rage_average", "sites": [dim // 2], "taus": [10.0, 30.0, 100.0, 250.0]},
            ],
        }
    )


def lemma47() -> ScenarioConfig:
    """Quasienergy block against the monodromy: correspondence, relative evolution, synthesis."""
    period = _two_level_period()
    return ScenarioConfig.model_validate(
        {
            "scenario": "lemma47",
            "model": _two_level(),
            "initial_state": {"kind": "basis", "index": 0},
            "grid": {"t0": 0.0, "t1": 10 * period, "h": period / 32},
            "diagnostics": [
                {"kind": "correspondence", "cutoffs": [8, 16, 32, 64]},
                {"kind": "releq", "cutoff": 32, "sigma_fraction": 0.25},
                {"kind": "synthesis", "cutoff": 32},
            ],
        }
    )


def af_identity() -> ScenarioConfig:
    """Pure-point fibre model: eigen-expanded A_f against direct fibrewise propagation."""
    return ScenarioConfig.model_validate(
        {
            "scenario": "af-identity",
            "model": {"variant": "AutonomousDiscrete", "h0": [0.2, 0.7]},
            "initial_state": {"kind": "basis", "index": 0},
            "grid": {"t0": 0.0, "t1": 1000.0, "h": 0.5},
            "diagnostics": [
                {
                    "kind": "af_identity",
                    "grid_size": 8,
                    "indices": [0, 8],
                    "period": 2 * math.pi,
                    "probe": {"kind": "dense", "real": [[1.0, 0.5], [0.5, -1.0]]},
                    "epsilon": 0.05,
                },
            ],
        }
    )


PRESETS: Dict[str, Callable[[], ScenarioConfig]] = {
    "af-identity": af_identity,
    "lemma47": lemma47,
    "prop32": prop32,
    "prop44": prop44,
    "qp-witness": qp_witness,
    "rage-lattice": rage_lattice,
}


def load_preset(name: str) -> ScenarioConfig:
    """
    Build a preset scenario.

    Raises:
        KeyError: If no preset has this name
    """
    if name not in PRESETS:
        raise KeyError(f"Unknown preset '{name}'; choose one of {', '.join(PRESET_NAMES)}")
    return PRESETS[name]()
