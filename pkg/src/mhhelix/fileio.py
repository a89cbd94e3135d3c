"""Point-cloud readers/writers (CSV, PDB C-alpha) and fit reports."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, ParseError
from .geometry import PointCloud

__all__ = [
    "atomic_write",
    "parse_points_csv",
    "write_points_csv",
    "parse_pdb_ca",
    "write_pdb_ca",
    "FitReport",
    "write_report",
    "read_report",
]

log = logging.getLogger(__name__)


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def parse_points_csv(path, dim: int = 3) -> PointCloud | np.ndarray:
    """Read ``x,y,z`` rows (``x,y`` when ``dim=2``) in file order.

    A first row containing a non-numeric field is taken as a header. Blank
    lines are ignored; any other bad row raises :class:`ParseError` with its
    line number. Returns a :class:`PointCloud` for ``dim=3`` and a plain
    ``(n, 2)`` array for ``dim=2``.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    rows = []
    seen_first = False
    for lineno, rec in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not rec or all(not f.strip() for f in rec):
            continue
        fields = [f.strip() for f in rec]
        if not seen_first:
            seen_first = True
            if not all(_is_number(f) for f in fields):
                continue  # header
        if len(fields) != dim:
            raise ParseError(f"expected {dim} fields, got {len(fields)}", line=lineno, path=path)
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise ParseError(f"non-numeric field in {rec!r}", line=lineno, path=path) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError(f"non-finite value in {rec!r}", line=lineno, path=path)
        rows.append(vals)
    if not rows:
        raise InputError(f"{path}: no data rows")
    arr = np.array(rows, dtype=float)
    return PointCloud(arr) if dim == 3 else arr


def write_points_csv(path, points, header=True) -> None:
    """Write points with 17 significant digits (bit-exact round trip)."""
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points, dtype=float)
    names = ["x", "y", "z"][: pts.shape[1]]
    lines = [",".join(names)] if header else []
    lines += [",".join(f"{v:.17g}" for v in row) for row in pts]
    atomic_write(path, "\n".join(lines) + "\n")


def parse_pdb_ca(path, chain: str | None = None, residue_range=None) -> PointCloud:
    """C-alpha coordinates from the ATOM records of a PDB file.

    Fixed columns: atom name 13-16, altLoc 17, chain 22, residue number
    23-26, coordinates 31-54. Only the first MODEL is read. Alternate
    locations other than blank/``A`` are skipped (each skip is logged with
    its line number). Points are ordered by residue number.
    """
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    if residue_range is not None:
        first, last = (int(v) for v in residue_range)
    picked = []
    in_model = False
    for lineno, line in enumerate(lines, start=1):
        rec = line[:6]
        if rec == "MODEL ":
            in_model = True
            continue
        if rec == "ENDMDL" and in_model:
            break
        if rec != "ATOM  ":
            continue
        if len(line) < 54:
            raise ParseError("ATOM record shorter than 54 columns", line=lineno, path=path)
        if line[12:16].strip() != "CA":
            continue
        alt = line[16]
        if alt not in (" ", "A"):
            log.warning("%s line %d: skipping alternate location %r", path, lineno, alt)
            continue
        ch = line[21]
        if chain is not None and ch != chain:
            continue
        try:
            resseq = int(line[22:26])
            xyz = [float(line[30:38]), float(line[38:46]), float(line[46:54])]
        except ValueError:
            raise ParseError("malformed residue number or coordinates", line=lineno,
                             path=path) from None
        if residue_range is not None and not first <= resseq <= last:
            continue
        picked.append((resseq, xyz, f"{ch}:{line[17:20].strip()}{resseq}"))
    if not picked:
        raise InputError(f"{path}: no C-alpha atoms match the selection")
    picked.sort(key=lambda item: item[0])
    return PointCloud(np.array([p[1] for p in picked]), labels=[p[2] for p in picked])


def write_pdb_ca(path, points, chain: str = "A", first_residue: int = 1,
                 resname: str = "ALA") -> None:
    """Write points as C-alpha ATOM records (coordinates rounded to 8.3)."""
    pts = points.points if isinstance(points, PointCloud) else np.asarray(points, dtype=float)
    lines = []
    for k, (x, y, z) in enumerate(pts):
        serial = k + 1
        lines.append(
            f"ATOM  {serial:5d}  CA  {resname:>3s} {chain:1s}{first_residue + k:4d}    "
            f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00           C")
    lines.append("END")
    atomic_write(path, "\n".join(lines) + "\n")


@dataclass
class FitReport:
    input: dict
    estimator: str
    axis: list
    p: list | None = None
    mll: float | None = None
    rss: float | None = None
    inner: dict = field(default_factory=dict)
    timing: float = 0.0
    version: str = ""
    config: dict = field(default_factory=dict)
    converged: bool = True

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def flat(self):
        row = {
            "input.path": self.input.get("path"),
            "input.n": self.input.get("n"),
            "input.source": self.input.get("source"),
            "estimator": self.estimator,
            "axis_x": self.axis[0], "axis_y": self.axis[1], "axis_z": self.axis[2],
            "mll": self.mll, "rss": self.rss, "converged": self.converged,
            "timing": self.timing, "version": self.version,
        }
        if self.p is not None:
            row["p1"], row["p2"] = self.p
        for k, v in self.inner.items():
            if isinstance(v, (list, tuple)):
                for i, vi in enumerate(v):
                    row[f"inner.{k}[{i}]"] = vi
            else:
                row[f"inner.{k}"] = v
        return row


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def write_report(report: FitReport, path, format: str = "json") -> None:
    if format == "json":
        text = json.dumps(report.to_dict(), indent=2) + "\n"
    elif format == "csv":
        row = report.flat()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(row))
        w.writerow([_fmt(v) for v in row.values()])
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown report format {format!r}")
    atomic_write(path, text)


def read_report(path) -> FitReport:
    return FitReport.from_dict(json.loads(Path(path).read_text()))
