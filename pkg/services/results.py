"""
Result persistence: experiment records to CSV or to a JSON envelope.
"""
import logging
from pathlib import Path
from typing import Any, Dict, List

import pandas as pd

import config
from errors import ExperimentIOError
from models import (
    ExperimentEnvelope,
    ExperimentResult,
    MixedBellParams,
    NoisyStateParams,
    PureBellParams,
    StateRecord,
)

logger = logging.getLogger(__name__)

PURE_COLUMNS = [
    "index", "theta1", "theta2", "theta3", "gamma1", "gamma2", "gamma3",
    "i4", "chsh", "ent_measure", "alpha1", "alpha2", "beta1", "beta2", "converged",
]
MIXED_COLUMNS = [
    "index", "p1", "p2", "p3", "p4",
    "i4", "chsh", "alpha1", "alpha2", "beta1", "beta2", "converged",
]
NOISY_COLUMNS = [
    "index", "noise_p",
    "i4", "chsh", "alpha1", "alpha2", "beta1", "beta2", "converged",
]
NOISE_SWEEP_COLUMNS = ["p", "i4", "chsh"]


def record_row(record: StateRecord) -> Dict[str, Any]:
    """Flatten a StateRecord into one CSV row."""
    row: Dict[str, Any] = {"index": record.index}
    params = record.params
    if isinstance(params, PureBellParams):
        row.update(params.model_dump())
    elif isinstance(params, MixedBellParams):
        row.update(params.model_dump())
    elif isinstance(params, NoisyStateParams):
        row["noise_p"] = params.p
    row["i4"] = record.i4
    row["chsh"] = record.chsh
    row["ent_measure"] = record.entanglement_measure
    phases = record.phases_at_max
    row.update(alpha1=phases.alpha1, alpha2=phases.alpha2, beta1=phases.beta1, beta2=phases.beta2)
    row["converged"] = record.converged
    return row


def columns_for(records: List[StateRecord]) -> List[str]:
    """CSV header matching the parameter family of the records."""
    if records and isinstance(records[0].params, MixedBellParams):
        return MIXED_COLUMNS
    if records and isinstance(records[0].params, NoisyStateParams):
        return NOISY_COLUMNS
    return PURE_COLUMNS


class ResultWriter:
    """Writes an ExperimentResult to `path` as CSV or JSON."""

    def __init__(self, path: str, fmt: str = "csv"):
        self.path = Path(path)
        self.fmt = fmt

    def write(self, result: ExperimentResult) -> Path:
        """
        Write the result in the configured format.

        Returns:
            The path written

        Raises:
            ExperimentIOError: If the file cannot be written
        """
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if self.fmt == "json":
                self._write_json(result)
            else:
                self._write_csv(result)
        except OSError as e:
            raise ExperimentIOError(f"Cannot write results to {self.path}: {e}") from e
        logger.info("Wrote %s results to %s", self.fmt.upper(), self.path)
        return self.path

    def frame(self, result: ExperimentResult) -> pd.DataFrame:
        """Records as a DataFrame with the experiment's fixed column order."""
        if result.config.experiment == "noise":
            rows = [row.model_dump() for row in result.noise_rows]
            return pd.DataFrame(rows, columns=NOISE_SWEEP_COLUMNS)
        columns = columns_for(result.records)
        rows = [record_row(record) for record in result.records]
        return pd.DataFrame(rows, columns=columns)

    def _write_csv(self, result: ExperimentResult) -> None:
        self.frame(result).to_csv(self.path, index=False, lineterminator="\n")

    def _write_json(self, result: ExperimentResult) -> None:
        self.path.write_text(envelope(result).model_dump_json(indent=2) + "\n")


def envelope(result: ExperimentResult) -> ExperimentEnvelope:
    """JSON envelope carrying config, seed, version, summary and records."""
    records = result.noise_rows if result.config.experiment == "noise" else result.records
    return ExperimentEnvelope(
        config=result.config.model_dump(),
        seed=result.config.seed,
        version=config.VERSION,
        summary=result.summary,
        records=records,
    )
