"""Rendering of command results as JSON, CSV or a plain-text table."""
import json
import logging
import sys
from dataclasses import dataclass, field
from importlib import metadata
from typing import Any, Dict, List, Optional

import pandas as pd

from .config import VERSION

logger = logging.getLogger(__name__)

FORMATS = ("table", "json", "csv")
# stands in for commas inside list fields while pandas writes the CSV
LIST_COMMA = "\x1f"
VERSIONED_PACKAGES = ("mpmath", "sympy", "pandas")


def package_versions() -> Dict[str, str]:
    versions = {"quadperiod": VERSION}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


@dataclass
class OutputRecord:
    """A command's payload, its tabular view and run metadata.

    ``payload`` is what JSON output carries; ``rows`` is the flat view used for
    CSV and table output. Commands whose result is naturally a single record
    may leave ``rows`` empty, in which case the payload is shown as one row.
    """

    command: str
    payload: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def frame(self) -> pd.DataFrame:
        if self.rows:
            return pd.DataFrame(self.rows)
        flat = {key: value for key, value in self.payload.items() if not isinstance(value, (dict, list))}
        return pd.DataFrame([flat])


def stringify_integers(value: Any) -> Any:
    """Replace every int in a JSON-ready structure by its decimal string, leaving bools alone."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, dict):
        return {key: stringify_integers(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [stringify_integers(item) for item in value]
    return value


def to_json(record: OutputRecord) -> str:
    document = {
        "command": record.command,
        "payload": stringify_integers(record.payload),
        "metadata": record.metadata,
    }
    return json.dumps(document, sort_keys=True, indent=2, default=str)


def _is_bracketed(column: pd.Series) -> bool:
    values = column.dropna()
    return not values.empty and bool(values.map(lambda v: isinstance(v, str) and v[:1] == "[" and v[-1:] == "]").all())


def to_csv(record: OutputRecord) -> str:
    """CSV text; JSON-style lists are written bare, as in ``[-1,1,1],1.216989``.

    Commas inside brackets belong to the field, so readers should split on
    top-level commas only.
    """
    frame = record.frame()
    for name in frame.columns:
        if _is_bracketed(frame[name]):
            frame[name] = frame[name].map(lambda v: v.replace(",", LIST_COMMA) if isinstance(v, str) else v)
    return frame.to_csv(index=False).replace(LIST_COMMA, ",")


def to_table(record: OutputRecord) -> str:
    frame = record.frame()
    if frame.empty:
        return f"{record.command}: no rows"
    return frame.to_string(index=False)


def render(record: OutputRecord, fmt: str = "table") -> str:
    """Render ``record`` in one of FORMATS.

    Raises:
        ValueError: For an unknown format.
    """
    if fmt == "json":
        return to_json(record)
    if fmt == "csv":
        return to_csv(record)
    if fmt == "table":
        return to_table(record)
    raise ValueError(f"Unknown output format '{fmt}', expected one of {', '.join(FORMATS)}")


def write(record: OutputRecord, fmt: str = "table", stream: Optional[Any] = None) -> None:
    """Write the rendered record to ``stream`` (stdout by default)."""
    stream = stream or sys.stdout
    text = render(record, fmt)
    stream.write(text if text.endswith("\n") else text + "\n")
    logger.debug(f"wrote {record.command} output as {fmt}")
