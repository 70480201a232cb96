"""Sampling states on regular grids and writing them to disk.

Two formats are supported: legacy VTK structured points (ASCII) and a
comma-separated table with one row per grid node. Both are written with
shortest round-trip float formatting so output is byte-stable and
re-reading it reproduces the sampled values exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from anisoeq.errors import ExportError

FORMATS = ("vtk", "table")


@dataclass(frozen=True)
class GridSpec:
    shape: tuple
    origin: tuple
    spacing: tuple

    def __post_init__(self):
        if len(self.shape) != 3 or any(int(n) < 1 for n in self.shape):
            raise ValueError(f"grid shape must be three positive integers, got {self.shape}")
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "spacing", tuple(float(v) for v in self.spacing))

    @classmethod
    def covering(cls, box, shape) -> "GridSpec":
        """Grid whose end nodes sit on the faces of ``box``."""
        lo, hi = (np.asarray(b, dtype=float) for b in box)
        n = np.asarray(shape, dtype=int)
        spacing = np.where(n > 1, (hi - lo) / np.maximum(n - 1, 1), 1.0)
        return cls(tuple(n), tuple(lo), tuple(spacing))

    @property
    def size(self) -> int:
        nx, ny, nz = self.shape
        return nx * ny * nz

    def points(self) -> np.ndarray:
        """Node coordinates in x-fastest order, shape ``(nx*ny*nz, 3)``."""
        axes = [o + d * np.arange(n) for o, d, n in zip(self.origin, self.spacing, self.shape)]
        zz, yy, xx = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
        return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)

    def index(self, flat: int) -> tuple:
        nx, ny, _ = self.shape
        return flat % nx, (flat // nx) % ny, flat // (nx * ny)


@dataclass(frozen=True)
class GridExport:
    grid: GridSpec
    payload: dict  # name -> (N,) or (N, 3) array

    def __post_init__(self):
        for name, arr in self.payload.items():
            if arr.shape[0] != self.grid.size or arr.ndim not in (1, 2):
                raise ValueError(f"payload {name!r} has shape {arr.shape}, grid has {self.grid.size} nodes")


def sample_state(state, grid: GridSpec, names=None) -> GridExport:
    """Evaluate every field of ``state`` (or the subset ``names``) on ``grid``."""
    pts = grid.points()
    fields = state.fields()
    if names is not None:
        missing = [n for n in names if n not in fields]
        if missing:
            raise ExportError(f"state {state.label!r} has no field(s) {missing}; has {list(fields)}")
        fields = {n: fields[n] for n in names}
    payload = {}
    for name, fld in fields.items():
        vals = np.asarray(fld(pts), dtype=float)
        bad = ~np.all(np.isfinite(vals.reshape(vals.shape[0], -1)), axis=1)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise ExportError(
                f"non-finite {name} at grid index {grid.index(k)} (point {tuple(pts[k].tolist())})"
            )
        payload[name] = vals
    return GridExport(grid, payload)


def _num(v) -> str:
    return repr(float(v))


def vtk_text(export: GridExport, title: str = "anisoeq export") -> str:
    g = export.grid
    out = io.StringIO()
    out.write("# vtk DataFile Version 3.0\n")
    out.write(title.replace("\n", " ")[:255] + "\n")
    out.write("ASCII\nDATASET STRUCTURED_POINTS\n")
    out.write("DIMENSIONS {} {} {}\n".format(*g.shape))
    out.write("ORIGIN " + " ".join(_num(v) for v in g.origin) + "\n")
    out.write("SPACING " + " ".join(_num(v) for v in g.spacing) + "\n")
    out.write(f"POINT_DATA {g.size}\n")
    for name, arr in export.payload.items():
        if arr.ndim == 2:
            out.write(f"VECTORS {name} double\n")
            for row in arr:
                out.write(" ".join(_num(v) for v in row) + "\n")
        else:
            out.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            for v in arr:
                out.write(_num(v) + "\n")
    return out.getvalue()


def table_header(export: GridExport) -> list:
    cols = ["x", "y", "z"]
    for name, arr in export.payload.items():
        cols += [f"{name}_{c}" for c in "xyz"] if arr.ndim == 2 else [name]
    return cols


def table_text(export: GridExport) -> str:
    pts = export.grid.points()
    blocks = [pts] + [a if a.ndim == 2 else a[:, None] for a in export.payload.values()]
    data = np.concatenate(blocks, axis=1)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(table_header(export))
    for row in data:
        w.writerow([_num(v) for v in row])
    return out.getvalue()


def write_export(export: GridExport, path, fmt: str, title: str = "anisoeq export") -> Path:
    if fmt not in FORMATS:
        raise ValueError(f"unknown export format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = vtk_text(export, title) if fmt == "vtk" else table_text(export)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def read_table(path) -> tuple[list, np.ndarray]:
    """Read a table written by :func:`write_export`; returns ``(header, data)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
