"""Config Loader - Reads and validates scenario configuration files."""
import json
from pathlib import Path
from typing import Any, Dict, List, Tuple

from pydantic import ValidationError

from ..data_models.model_spec import MODEL_VARIANTS
from ..data_models.scenario import DIAGNOSTIC_KINDS, STATE_KINDS, ScenarioConfig
from ..utils.errors import ConfigInvalid
from ..utils.logging import setup_logging

logger = setup_logging(__name__)

# Union tags pydantic inserts into error locations
_TAGS = set(MODEL_VARIANTS) | set(DIAGNOSTIC_KINDS) | set(STATE_KINDS)


def _field_path(error: Dict[str, Any]) -> str:
    parts = [str(part) for part in error["loc"] if part not in _TAGS]
    if error["type"] in ("union_tag_invalid", "union_tag_not_found"):
        discriminator = str(error.get("ctx", {}).get("discriminator", "")).strip("'\"")
        if discriminator:
            parts.append(discriminator)
    return ".".join(parts) or "<root>"


def problems_from(error: ValidationError) -> List[Tuple[str, str]]:
    """(field path, message) for every pydantic error, in reporting order."""
    return [(_field_path(e), e["msg"]) for e in error.errors()]


class ConfigLoader:
    """Load ScenarioConfig objects from JSON files or dictionaries."""

    def load(self, filepath: str) -> ScenarioConfig:
        """
        Load and validate a scenario file.

        Args:
            filepath: Path to a JSON scenario file

        Returns:
            Validated ScenarioConfig

        Raises:
            FileNotFoundError: If the file doesn't exist
            ConfigInvalid: If the file is not valid JSON or fails the schema
        """
        path = Path(filepath)
        if not path.exists():
            raise FileNotFoundError(f"Scenario file not found: {filepath}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            logger.error(f"Malformed JSON in {filepath}: {e}")
            raise ConfigInvalid([("<root>", f"invalid JSON: {e.msg} at line {e.lineno}")])
        config = self.from_dict(payload)
        logger.info(f"Loaded scenario '{config.scenario}' from {filepath}")
        return config

    def from_dict(self, payload: Any) -> ScenarioConfig:
        """
        Validate an already-parsed configuration.

        Raises:
            ConfigInvalid: With the field path of every schema violation
        """
        try:
            return ScenarioConfig.model_validate(payload)
        except ValidationError as e:
            problems = problems_from(e)
            for path, message in problems:
                logger.debug(f"Config problem at {path}: {message}")
            raise ConfigInvalid(problems)

    def validate(self, filepath: str) -> List[Tuple[str, str]]:
        """
        Validate without executing.

        Returns:
            Empty list when valid, else (field path, message) pairs

        Raises:
            FileNotFoundError: If the file doesn't exist
        """
        try:
            self.load(filepath)
        except ConfigInvalid as e:
            return e.problems
        return []
