"""
CSV and JSON artifact helpers.

All artifacts are written with fixed line endings and sorted JSON keys so two
runs over the same inputs produce byte-identical files.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

SCHEMA_VERSION = 1


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write header and rows as LF-terminated CSV; None becomes an empty cell."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if value is None else value for value in row])
    return path


def read_csv(path: Path) -> Tuple[List[str], List[Dict[str, str]]]:
    """Return (header, rows). Raises OSError if the file cannot be read."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    """Write payload with a schema_version field. Non-finite floats become null."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"schema_version": SCHEMA_VERSION, **_json_safe(payload)}
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(document, f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")
    return path


def read_json(path: Path) -> Dict[str, Any]:
    """Parsed JSON document. Invalid JSON raises ValueError."""
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
