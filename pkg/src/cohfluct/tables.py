"""Rectangular result tables with CSV and JSON output."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from importlib import metadata as importlib_metadata

import numpy as np
import scipy


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    return x


def config_hash(config: dict) -> str:
    """sha256 of the canonical JSON form of the effective configuration."""
    text = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def versions() -> dict:
    try:
        pkg = importlib_metadata.version("artifact")
    except importlib_metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"package": pkg, "numpy": np.__version__, "scipy": scipy.__version__}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


@dataclass
class ResultTable:
    """Named columns, rows of numbers or strings, and run metadata.

    Complex cells are written as two columns ``<name>_re`` and ``<name>_im``.
    """

    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"row of length {len(row)} for {len(self.columns)} columns")
        self.rows.append(list(row))

    def _complex_columns(self):
        return [any(isinstance(r[k], (complex, np.complexfloating)) for r in self.rows)
                for k in range(len(self.columns))]

    def flat_columns(self) -> list:
        out = []
        for name, cx in zip(self.columns, self._complex_columns()):
            out.extend([f"{name}_re", f"{name}_im"] if cx else [name])
        return out

    def flat_rows(self) -> list:
        cxs = self._complex_columns()
        out = []
        for r in self.rows:
            row = []
            for v, cx in zip(r, cxs):
                if cx:
                    c = complex(v)
                    row.extend([c.real, c.imag])
                else:
                    row.append(v)
            out.append(row)
        return out

    def column(self, name) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key in sorted(self.metadata):
            buf.write(f"# {key}: {json.dumps(_jsonable(self.metadata[key]), sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.flat_columns())
        for r in self.flat_rows():
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"columns": self.flat_columns(), "rows": _jsonable(self.flat_rows()),
               "metadata": _jsonable(self.metadata)}
        return json.dumps(doc, sort_keys=True, indent=1)
