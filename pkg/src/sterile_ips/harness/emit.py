"""Reports: CSV tables plus a JSON manifest.

CSV bodies depend only on (config, seed); wall times and timestamps live in
the manifest alone, so two identical runs give byte-identical CSV files.
"""
from __future__ import annotations

import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..pde.io import read_table, write_table

MANIFEST = "manifest.json"


@dataclass
class Report:
    name: str
    meta: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # name -> (header, (n, m) array)
    passed: bool | None = None
    wall_time: float = 0.0

    def add_table(self, name: str, header: list[str], rows) -> None:
        rows = np.asarray(rows, dtype=float).reshape(-1, len(header))
        self.tables[name] = (list(header), rows)


def _versions() -> dict:
    import numba
    import scipy

    from .. import __version__

    return {
        "sterile_ips": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
        "python": platform.python_version(),
    }


def emit(report: Report, out_dir, config: dict | None = None) -> Path:
    """Write every table as ``<name>.csv`` and the manifest; returns the manifest path."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = {}
        for name, (header, rows) in sorted(report.tables.items()):
            files[name] = write_table(out / f"{name}.csv", header, rows).name
        doc = {
            "report": report.name,
            "passed": report.passed,
            "meta": report.meta,
            "tables": files,
            "config": config,
            "versions": _versions(),
            "wall_time_s": report.wall_time,
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        path = out / MANIFEST
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")
    except OSError as e:
        raise OSError(f"cannot write report to {out}: {e}") from e
    return path


def load_report(out_dir) -> Report:
    out = Path(out_dir)
    doc = json.loads((out / MANIFEST).read_text())
    rep = Report(doc["report"], meta=doc["meta"], passed=doc["passed"], wall_time=doc["wall_time_s"])
    for name, fname in doc["tables"].items():
        header, rows = read_table(out / fname)
        rep.tables[name] = (header, rows)
    return rep


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)
