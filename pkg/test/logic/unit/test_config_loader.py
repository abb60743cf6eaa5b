"""Unit Tests for the Config Loader and Presets"""
import pytest

from src.logic.data_models.model_spec import DrivenTwoLevelParams
from src.logic.data_models.scenario import ApScanSpec, FloquetState
from src.logic.ingestion.config_loader import ConfigLoader
from src.logic.ingestion.presets import PRESETS, load_preset
from src.logic.utils.constants import PRESET_NAMES
from src.logic.utils.errors import ConfigInvalid


@pytest.fixture
def loader():
    """Provide a ConfigLoader instance."""
    return ConfigLoader()


class TestConfigLoader:
    """Test suite for ConfigLoader."""

    def test_load_valid_file(self, loader, fixtures_dir):
        """Test: Valid scenario loads with defaults filled in"""
        config = loader.load(str(fixtures_dir / "valid_minimal.json"))

        assert config.scenario == "minimal"
        assert config.model.variant == "AutonomousDiscrete"
        assert config.method == "auto"
        assert config.diagnostics == []

    def test_diagnostics_dispatch_on_kind(self, loader, fixtures_dir):
        """Test: Diagnostic entries become their typed specs"""
        config = loader.load(str(fixtures_dir / "circle_scan.json"))

        assert [d.kind for d in config.diagnostics] == [
            "ap_scan",
            "covering_number",
            "rage_average",
        ]
        assert isinstance(config.diagnostics[0], ApScanSpec)
        assert config.seed == 7

    def test_zero_step_reports_grid_h(self, loader, fixtures_dir):
        """Test: h = 0 -> problem at grid.h"""
        with pytest.raises(ConfigInvalid) as exc_info:
            loader.load(str(fixtures_dir / "invalid_step.json"))

        assert "grid.h" in [path for path, _ in exc_info.value.problems]

    def test_unknown_variant_reports_variant_field(self, loader, fixtures_dir):
        """Test: Unknown model variant -> problem at model.variant"""
        problems = loader.validate(str(fixtures_dir / "unknown_variant.json"))

        assert [path for path, _ in problems] == ["model.variant"]

    def test_malformed_json(self, loader, fixtures_dir):
        """Test: Broken JSON -> ConfigInvalid at the root"""
        with pytest.raises(ConfigInvalid) as exc_info:
            loader.load(str(fixtures_dir / "malformed.json"))

        assert exc_info.value.problems[0][0] == "<root>"

    def test_missing_file(self, loader):
        """Test: Nonexistent path -> FileNotFoundError"""
        with pytest.raises(FileNotFoundError):
            loader.load("does/not/exist.json")

    def test_validate_valid_file(self, loader, fixtures_dir):
        """Test: Valid scenario -> no problems"""
        assert loader.validate(str(fixtures_dir / "valid_minimal.json")) == []

    def test_nested_field_paths(self, loader):
        """Test: Errors inside a diagnostic carry its list index"""
        payload = {
            "scenario": "nested",
            "model": {"variant": "DrivenTwoLevel", "omega0": 1.0, "amplitude": 0.4, "omega": 1.3},
            "initial_state": {"kind": "basis", "index": 0},
            "grid": {"t1": 10.0, "h": 0.1},
            "diagnostics": [{"kind": "ap_scan", "epsilon": -1.0}],
        }

        with pytest.raises(ConfigInvalid) as exc_info:
            loader.from_dict(payload)

        assert [path for path, _ in exc_info.value.problems] == ["diagnostics.0.epsilon"]

    def test_extra_fields_rejected(self, loader):
        """Test: Unknown top-level keys -> ConfigInvalid"""
        payload = {
            "scenario": "extra",
            "model": {"variant": "AutonomousDiscrete", "h0": [0.0]},
            "initial_state": {"kind": "basis", "index": 0},
            "grid": {"t1": 1.0, "h": 0.1},
            "surprise": True,
        }

        with pytest.raises(ConfigInvalid):
            loader.from_dict(payload)


class TestPresets:
    """Test suite for built-in scenarios."""

    def test_every_name_registered(self):
        """Test: Preset registry matches the published names"""
        assert tuple(sorted(PRESETS)) == PRESET_NAMES

    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_presets_validate(self, name):
        """Test: Every preset is a schema-valid scenario named after itself"""
        config = load_preset(name)

        assert config.scenario == name
        assert config.diagnostics

    def test_recurrence_preset_uses_floquet_state(self):
        """Test: prop32 starts from the first monodromy eigenvector"""
        config = load_preset("prop32")

        assert isinstance(config.model, DrivenTwoLevelParams)
        assert config.initial_state == FloquetState(indices=[0])

    def test_unknown_preset(self):
        """Test: Unregistered name -> KeyError"""
        with pytest.raises(KeyError):
            load_preset("nope")
