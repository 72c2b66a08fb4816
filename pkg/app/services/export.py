"""
CSV / JSON export of result rows and reports.
"""
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, TextIO, Union
import csv
import io
import json
import logging
import math

from pydantic import BaseModel, field_validator

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 6

# CSV header -> ResultRow attribute, in output order
CSV_COLUMNS = (
    ("b", "b"),
    ("fidelity", "fidelity_prepared"),
    ("ineq_theory", "inequality_theory"),
    ("ineq_direct", "inequality_direct"),
    ("ineq_tomo", "inequality_tomo"),
    ("ppt_min_eig", "ppt_min_eig"),
    ("violated", "violated"),
    ("sigma_est", "sigma_est"),
)


class ResultRow(BaseModel):
    """One b value of a table or scan run."""

    b: float
    fidelity_prepared: float
    inequality_theory: float
    inequality_direct: float
    inequality_tomo: float
    ppt_min_eig: float
    violated: bool
    sigma_est: float = 0.0

    @field_validator(
        "b", "fidelity_prepared", "inequality_theory", "inequality_direct",
        "inequality_tomo", "ppt_min_eig", "sigma_est",
    )
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("result fields must be finite")
        return v


def format_number(x: float) -> str:
    return f"{x:.{SIGNIFICANT_DIGITS}g}"


def _rounded(value: Any) -> Any:
    """Round floats (recursively) to the output precision."""
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        return float(format_number(value))
    if isinstance(value, dict):
        return {k: _rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(v) for v in value]
    return value


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([header for header, _ in CSV_COLUMNS])
    for row in rows:
        cells = []
        for _, attr in CSV_COLUMNS:
            value = getattr(row, attr)
            cells.append(str(value).lower() if isinstance(value, bool) else format_number(value))
        writer.writerow(cells)
    return buf.getvalue()


def to_json(payload: Union[BaseModel, Sequence[BaseModel], Dict]) -> str:
    if isinstance(payload, BaseModel):
        data = payload.model_dump()
    elif isinstance(payload, dict):
        data = {k: v.model_dump() if isinstance(v, BaseModel) else v for k, v in payload.items()}
    else:
        data = [p.model_dump() if isinstance(p, BaseModel) else p for p in payload]
    return json.dumps(_rounded(data), indent=2) + "\n"


def render(payload, fmt: str) -> str:
    """Render rows as CSV or any payload as JSON."""
    if fmt == "csv":
        return rows_to_csv(payload)
    return to_json(payload)


def write_output(text: str, path: Optional[Union[str, Path]] = None, stream: Optional[TextIO] = None):
    """
    Write rendered output to ``path``, or to ``stream`` when no path is given.

    Raises:
        OSError: If the file cannot be written
    """
    if path is None:
        if stream is not None:
            stream.write(text)
        return
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            f.write(text)
    except OSError as e:
        logger.error(f"Error writing {path}: {str(e)}")
        raise
    logger.info(f"✓ Wrote {path}")
