"""Profile CSV files and snapshot manifests.

Floats are written with 17 significant digits so a file reloads to the
same doubles and identical runs give identical bytes.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .grid import Grid, Profile

FLOAT_FMT = "{:.17g}"


def profile_header(d: int) -> list[str]:
    return [f"x{k + 1}" for k in range(d)] + ["rho1", "rho2", "rho3"]


def write_table(path, header: list[str], columns: np.ndarray) -> Path:
    """Write rows of ``columns`` (n, m) with a header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in np.asarray(columns, dtype=float):
            w.writerow([FLOAT_FMT.format(v) for v in row])
    return path


def read_table(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    body = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    return rows[0], body.reshape(len(rows) - 1, len(rows[0]))


def write_points_csv(path, points: np.ndarray, rho: np.ndarray) -> Path:
    """Densities (3, n) at points (n, d), in the profile column layout."""
    points = np.asarray(points, dtype=float)
    return write_table(path, profile_header(points.shape[1]), np.hstack([points, np.asarray(rho).reshape(3, -1).T]))


def write_profile_csv(path, profile: Profile) -> Path:
    return write_points_csv(path, profile.grid.points(), profile.values.reshape(3, -1))


def read_profile_csv(path, grid: Grid) -> Profile:
    header, body = read_table(path)
    if header != profile_header(grid.d):
        raise ValueError(f"{path}: unexpected header {header}")
    if body.shape[0] != grid.M1 * grid.K or not np.allclose(body[:, : grid.d], grid.points()):
        raise ValueError(f"{path}: nodes do not match the grid")
    return Profile(grid, body[:, grid.d:].T.copy())


def write_manifest(path, entries: list[tuple[float, str]], **extra) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = dict(extra)
    doc["snapshots"] = [{"time": float(t), "path": str(p)} for t, p in entries]
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(path) -> dict:
    return json.loads(Path(path).read_text())
