"""CSV schema contracts for the simulator's documented artifacts.

Loading is strict: a missing column raises SchemaError naming the column, a
header-only file raises EmptyInputError.  No value is transformed beyond
float parsing; figures plot the cells as read.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    """Input file does not match the documented CSV schema."""


class EmptyInputError(ValueError):
    """Input file has a valid header but no data rows."""


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    numeric: bool = True


SCHEMAS: dict[str, tuple[ColumnSpec, ...]] = {
    "event_trace": (
        ColumnSpec("epoch_s"), ColumnSpec("node", numeric=False),
        ColumnSpec("event", numeric=False), ColumnSpec("offset_estimate_s"),
        ColumnSpec("residual_error_s"), ColumnSpec("lamport"),
    ),
    "adev": (
        ColumnSpec("clock", numeric=False), ColumnSpec("tau_s"),
        ColumnSpec("adev"),
    ),
    "cycles": (
        ColumnSpec("cycle", numeric=False), ColumnSpec("residual_s"),
        ColumnSpec("epoch_s"),
    ),
    "sweep": (
        ColumnSpec("secular_scale"), ColumnSpec("periodic_scale"),
        ColumnSpec("anomaly_scale"), ColumnSpec("drift_scale"),
        ColumnSpec("delay_scale"), ColumnSpec("rms_sync_error_s"),
        ColumnSpec("divergence_rate_s_per_day"),
        ColumnSpec("agreement_fraction"),
    ),
    "modelswap": (
        ColumnSpec("epoch_s"), ColumnSpec("label_delta_s"),
        ColumnSpec("pairwise_delta_s"),
    ),
}


def load_table(path: str | Path, schema: str) -> dict[str, np.ndarray | list[str]]:
    """Read a CSV against a named schema; columns come back as numpy arrays
    (numeric) or string lists."""
    columns = SCHEMAS[schema]
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file {path} does not exist")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col.name not in header:
                raise SchemaError(
                    f"missing column {col.name!r} in {path.name} "
                    f"(schema {schema!r})")
        rows = list(reader)
    if not rows:
        raise EmptyInputError(f"{path.name} has no data rows")
    table: dict[str, np.ndarray | list[str]] = {}
    for col in columns:
        raw = [row[col.name] for row in rows]
        if col.numeric:
            try:
                table[col.name] = np.array([float(v) for v in raw])
            except ValueError as exc:
                raise SchemaError(
                    f"column {col.name!r} in {path.name} is not numeric: "
                    f"{exc}") from exc
        else:
            table[col.name] = raw
    return table
