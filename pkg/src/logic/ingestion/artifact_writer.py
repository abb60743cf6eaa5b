"""Artifact Writer - Deterministic CSV series and JSON reports for scenario runs."""
import json
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd

from ..data_models.scenario import RunReport
from ..utils.constants import CSV_FLOAT_FORMAT, JSON_INDENT, REPORT_SUFFIX
from ..utils.logging import setup_logging

logger = setup_logging(__name__)


def series_frame(times: np.ndarray, columns: Dict[str, np.ndarray]) -> pd.DataFrame:
    """
    Frame with a leading t column; complex columns are split into name_re and name_im.

    Args:
        times: Sample times
        columns: Column name -> values (real or complex), same length as times

    Returns:
        DataFrame ready for write_series
    """
    data: Dict[str, np.ndarray] = {"t": np.asarray(times, dtype=float)}
    for name, values in columns.items():
        values = np.asarray(values)
        if np.iscomplexobj(values):
            data[f"{name}_re"] = values.real
            data[f"{name}_im"] = values.imag
        else:
            data[name] = values.astype(float)
    return pd.DataFrame(data)


class ArtifactWriter:
    """Write scenario artifacts into one output directory."""

    def __init__(self, output_dir: str):
        self.output_dir = Path(output_dir)

    def write_series(self, name: str, frame: pd.DataFrame) -> str:
        """
        Write <name>.csv with 17 significant digits and '\\n' line endings.

        Returns:
            File name relative to the output directory
        """
        self.output_dir.mkdir(parents=True, exist_ok=True)
        filename = f"{name}.csv"
        frame.to_csv(
            self.output_dir / filename,
            index=False,
            float_format=CSV_FLOAT_FORMAT,
            lineterminator="\n",
        )
        logger.debug(f"Wrote {len(frame)} rows to {filename}")
        return filename

    def write_report(self, report: RunReport, filename: Optional[str] = None) -> str:
        """
        Write the JSON report with sorted keys, fixed indentation and a trailing newline.

        Returns:
            File name relative to the output directory
        """
        self.output_dir.mkdir(parents=True, exist_ok=True)
        filename = filename or f"{report.scenario}{REPORT_SUFFIX}"
        text = json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=JSON_INDENT)
        (self.output_dir / filename).write_text(text + "\n", encoding="utf-8")
        logger.info(f"Report written to {self.output_dir / filename}")
        return filename

    @staticmethod
    def read_series(path: str) -> pd.DataFrame:
        """Read a series file back (floats round-trip exactly)."""
        return pd.read_csv(path, float_precision="round_trip")
