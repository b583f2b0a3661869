"""JSON and CSV import/export for MDPs, policies, tables and run traces."""

import csv
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from ...shared.config import settings
from ...shared.logging import get_logger
from ..core.errors import DimensionMismatchError, InvalidMdpError, InvalidPolicyError, MdpError
from ..models.experiment import ExperimentConfig, SuiteReport
from ..models.mdp import Mdp, Policy
from ..models.pma import PmaTrace

logger = get_logger(__name__)

PathLike = Union[str, Path]

TRACE_HEADERS = ["k", "J_mu", "gap", "eta", "divergence_to_ref", "samples_cum"]


def _cell(value: Any) -> str:
    """CSV cell: shortest round-trip repr for floats, empty for None."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, BaseModel):
        return _jsonable(value.model_dump(mode="python"))
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, Enum):
        return value.value
    return value


class DataExporter:
    """Writes run artifacts under one output directory.

    JSON uses Python's shortest round-trip float formatting and no timestamps,
    so two runs with the same seed produce byte-identical files.
    """

    def __init__(self, output_dir: Optional[PathLike] = None):
        """Initialize data exporter.

        Args:
            output_dir: Output directory. If None, uses ``settings.output_dir``
        """
        self.output_dir = settings.ensure_output_dir(str(output_dir) if output_dir else None)
        logger.debug(f"Data exporter writing to {self.output_dir}")

    def _write_json(self, data: Any, filename: str) -> Path:
        filepath = self.output_dir / f"{filename}.json"
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(_jsonable(data), f, indent=2, allow_nan=True)
            f.write("\n")
        logger.info(f"Wrote {filepath}")
        return filepath

    def _write_csv(self, headers: Sequence[str], rows: Sequence[Sequence[Any]], filename: str) -> Path:
        filepath = self.output_dir / f"{filename}.csv"
        with open(filepath, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(headers)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        logger.info(f"Wrote {len(rows)} rows to {filepath}")
        return filepath

    def export_mdp(self, m: Mdp, filename: str = "mdp") -> Path:
        """Export an MDP as {n_states, n_actions, reward_bound, kernel, reward}."""
        return self._write_json(
            {
                "n_states": m.n_states,
                "n_actions": m.n_actions,
                "reward_bound": m.reward_bound,
                "kernel": m.kernel,
                "reward": m.reward,
            },
            filename,
        )

    def export_policy(self, p: Policy, filename: str = "policy") -> Path:
        """Export a policy as {n_states, n_actions, floor, table}."""
        return self._write_json(
            {"n_states": p.n_states, "n_actions": p.n_actions, "floor": p.floor, "table": p.table},
            filename,
        )

    def export_state_table(self, columns: Dict[str, np.ndarray], filename: str) -> Path:
        """Export per-state vectors as columns of one CSV keyed by state."""
        names = list(columns)
        n = len(next(iter(columns.values()))) if columns else 0
        rows = [[s] + [float(columns[name][s]) for name in names] for s in range(n)]
        return self._write_csv(["state"] + names, rows, filename)

    def export_action_table(self, table: np.ndarray, filename: str) -> Path:
        """Export an |S| x |A| table with one column per action."""
        table = np.asarray(table, dtype=float)
        headers = ["state"] + [f"a{a}" for a in range(table.shape[1])]
        rows = [[s] + [float(x) for x in table[s]] for s in range(table.shape[0])]
        return self._write_csv(headers, rows, filename)

    def export_trace(self, trace: PmaTrace, filename: str = "trace") -> Path:
        """Export a mirror-ascent trace; wall time is left out for reproducibility."""
        rows = [
            [r.k, r.j_mu, r.gap, r.eta, r.divergence_to_ref, r.samples_cum]
            for r in trace.records
        ]
        headers = list(TRACE_HEADERS)
        if trace.stochastic:
            headers.append("g_error")
            for row, record in zip(rows, trace.records):
                row.append(record.g_error)
        return self._write_csv(headers, rows, filename)

    def export_summary(self, summary: Dict[str, Any], filename: str = "summary") -> Path:
        """Export a free-form summary dictionary."""
        return self._write_json(summary, filename)

    def export_config(self, config: ExperimentConfig, filename: str = "config") -> Path:
        """Export the resolved experiment configuration."""
        return self._write_json(config.model_dump(mode="json"), filename)

    def export_report(self, report: SuiteReport, filename: Optional[str] = None) -> Path:
        """Export a property-suite report."""
        data = {
            "suite": report.suite.value,
            "seed": report.seed,
            "passed": report.passed,
            "assertions": [a.model_dump() for a in report.assertions],
        }
        return self._write_json(data, filename or f"check_{report.suite.value}")


def _read_json(path: PathLike) -> Any:
    filepath = Path(path)
    try:
        with open(filepath, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as exc:
        raise MdpError(f"file not found: {filepath}") from exc
    except json.JSONDecodeError as exc:
        raise MdpError(f"{filepath}: not valid JSON ({exc})") from exc


def load_mdp(path: PathLike) -> Mdp:
    """Read an MDP document.

    Raises:
        InvalidMdpError: Missing fields or inconsistent shapes
    """
    try:
        data = _read_json(path)
    except MdpError as exc:
        raise InvalidMdpError([str(exc)]) from exc
    required = ["n_states", "n_actions", "reward_bound", "kernel", "reward"]
    missing = [key for key in required if not isinstance(data, dict) or key not in data]
    if missing:
        raise InvalidMdpError([f"missing field '{key}'" for key in missing])
    try:
        kernel = np.asarray(data["kernel"], dtype=float)
        reward = np.asarray(data["reward"], dtype=float)
        return Mdp(
            n_states=data["n_states"],
            n_actions=data["n_actions"],
            kernel=kernel,
            reward=reward,
            reward_bound=data["reward_bound"],
        )
    except (ValidationError, ValueError, TypeError) as exc:
        raise InvalidMdpError([f"{path}: {exc}"]) from exc


def load_policy(path: PathLike, n_states: Optional[int] = None, n_actions: Optional[int] = None) -> Policy:
    """Read a policy document ({"table": [[...]]} with optional "floor")."""
    data = _read_json(path)
    if not isinstance(data, dict):
        data = {"table": data}
    try:
        policy = Policy(table=np.asarray(data.get("table"), dtype=float), floor=float(data.get("floor", 0.0)))
    except (ValidationError, ValueError, TypeError) as exc:
        raise InvalidPolicyError(f"{path}: {exc}") from exc
    expected = (n_states, n_actions)
    if n_states is not None and policy.table.shape != expected:
        raise DimensionMismatchError(f"policy shape {policy.table.shape} != {expected}")
    return policy


def load_distribution(path: PathLike) -> np.ndarray:
    """Read an initial distribution ({"mu": [...]} or a bare list)."""
    data = _read_json(path)
    values: List[float] = data.get("mu") if isinstance(data, dict) else data
    return np.asarray(values, dtype=float)
