"""Versioned CSV/JSON output with lossless float round-trip and atomic writes.

CSV files start with two comment lines::

    # schema: pseudospec.<name>/<version>
    # config: {...resolved run configuration as JSON...}

followed by a header row and data rows.  Floats are written with ``repr``
(shortest decimal that round-trips), so reading a file back reproduces every
value bit for bit.  JSON documents carry ``schema`` and ``schema_version``
keys and are written with sorted keys.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SCHEMA_PREFIX = "pseudospec."


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers into plain JSON types.

    Complex numbers become ``[re, im]``; non-finite floats become the strings
    ``"inf"``, ``"-inf"`` or ``"nan"`` so the output stays strict JSON.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


def dumps_json(doc: dict) -> str:
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to ``path`` through a temporary file and ``os.replace``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(schema: str, version: int, config: dict, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {SCHEMA_PREFIX}{schema}/{version}\n")
    buf.write("# config: " + json.dumps(to_jsonable(config), sort_keys=True, allow_nan=False) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, schema: str, config: dict, columns, rows, version: int = 1) -> Path:
    return atomic_write(path, csv_text(schema, version, config, list(columns), rows))


def write_json(path, schema: str, doc: dict, version: int = 1) -> Path:
    full = dict(doc)
    full["schema"] = SCHEMA_PREFIX + schema
    full["schema_version"] = version
    return atomic_write(path, dumps_json(full))


@dataclass(frozen=True)
class CsvTable:
    schema: str
    version: int
    config: dict
    columns: list
    data: dict

    def __getitem__(self, name) -> np.ndarray:
        return self.data[name]

    def __len__(self) -> int:
        return len(next(iter(self.data.values()))) if self.data else 0


def read_csv(path) -> CsvTable:
    """Parse a file produced by :func:`write_csv`; every column comes back as a float array."""
    with open(path, encoding="utf-8", newline="") as fh:
        schema_line = fh.readline()
        config_line = fh.readline()
        if not (schema_line.startswith("# schema: ") and config_line.startswith("# config: ")):
            raise ValueError(f"{path}: missing schema/config header")
        tag = schema_line[len("# schema: ") :].strip()
        name, _, version = tag.rpartition("/")
        config = json.loads(config_line[len("# config: ") :])
        reader = csv.reader(fh)
        columns = next(reader)
        rows = list(reader)
    data = {col: np.array([float(r[k]) for r in rows]) for k, col in enumerate(columns)}
    return CsvTable(name.removeprefix(SCHEMA_PREFIX), int(version), config, columns, data)


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
