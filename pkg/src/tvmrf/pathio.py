"""CSV interchange formats.

All files are UTF-8 with LF line endings, '.' decimal separator, and floats
printed with 17 significant digits (lossless for doubles).

samples:  header ``t,sample,i,value`` (real) or ``t,sample,i,state`` (integer)
truth:    header ``t,i,j,value``; nonzero upper-triangular entries (i <= j)
path:     header ``gamma_low,gamma_high,k_total,t,i,j,value``; one row block
          per envelope cell of the assembled path, nonzeros only, gamma in
          original units
metrics:  header ``gamma,nll,f1_params,f1_diffs,error``
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dp import bar_to_gamma
from .errors import DataError

__all__ = [
    "fmt",
    "write_samples_csv",
    "read_samples_csv",
    "write_truth_csv",
    "read_truth_csv",
    "global_cells",
    "write_path_csv",
    "PathFile",
    "read_path_csv",
    "write_metrics_csv",
]


def fmt(x: float) -> str:
    """Round-trip exact decimal rendering of a double."""
    return f"{x:.17g}"


def _open_w(path):
    return open(path, "w", encoding="utf-8", newline="\n")


def write_samples_csv(path, samples, discrete: bool = False) -> None:
    header = "t,sample,i,state" if discrete else "t,sample,i,value"
    with _open_w(path) as f:
        f.write(header + "\n")
        for t, x in enumerate(samples):
            x = np.asarray(x)
            for s in range(x.shape[0]):
                row = x[s]
                for i in range(x.shape[1]):
                    v = int(row[i]) if discrete else fmt(float(row[i]))
                    f.write(f"{t},{s},{i},{v}\n")


def read_samples_csv(path, discrete: bool = False):
    """Samples as a list of (N_t, n) arrays; malformed cells raise with the
    line number."""
    header = "t,sample,i,state" if discrete else "t,sample,i,value"
    rows = []
    with open(path, encoding="utf-8") as f:
        first = f.readline().strip()
        if first != header:
            raise DataError(f"expected header {header!r}, got {first!r}", line=1)
        for ln, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise DataError(f"expected 4 fields, got {len(parts)}", line=ln)
            try:
                t, s, i = int(parts[0]), int(parts[1]), int(parts[2])
                v = int(parts[3]) if discrete else float(parts[3])
            except ValueError as e:
                raise DataError(str(e), line=ln) from None
            rows.append((t, s, i, v))
    if not rows:
        raise DataError("no data rows")
    Tp1 = max(r[0] for r in rows) + 1
    n = max(r[2] for r in rows) + 1
    counts = [0] * Tp1
    for t, s, i, v in rows:
        counts[t] = max(counts[t], s + 1)
    dtype = np.int64 if discrete else np.float64
    out = [np.zeros((counts[t], n), dtype=dtype) for t in range(Tp1)]
    seen = [np.zeros((counts[t], n), dtype=bool) for t in range(Tp1)]
    for t, s, i, v in rows:
        out[t][s, i] = v
        seen[t][s, i] = True
    for t in range(Tp1):
        if not seen[t].all():
            raise DataError(f"incomplete sample grid at t={t}")
    return out


def write_truth_csv(path, theta) -> None:
    theta = np.asarray(theta)
    with _open_w(path) as f:
        f.write("t,i,j,value\n")
        for t in range(theta.shape[0]):
            m = theta[t]
            for i in range(m.shape[0]):
                for j in range(i, m.shape[1]):
                    if m[i, j] != 0.0:
                        f.write(f"{t},{i},{j},{fmt(float(m[i, j]))}\n")


def read_truth_csv(path):
    entries = []
    with open(path, encoding="utf-8") as f:
        first = f.readline().strip()
        if first != "t,i,j,value":
            raise DataError(f"expected header 't,i,j,value', got {first!r}", line=1)
        for ln, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise DataError(f"expected 4 fields, got {len(parts)}", line=ln)
            try:
                entries.append((int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])))
            except ValueError as e:
                raise DataError(str(e), line=ln) from None
    if not entries:
        raise DataError("no data rows")
    Tp1 = max(e[0] for e in entries) + 1
    n = max(max(e[1], e[2]) for e in entries) + 1
    theta = np.zeros((Tp1, n, n))
    for t, i, j, v in entries:
        theta[t, i, j] = v
        theta[t, j, i] = v
    return theta


def global_cells(paths):
    """Union of the per-coordinate envelope breakpoints: the coarsest list
    of (bar_lo, bar_hi) intervals on which every coordinate's budget is
    constant."""
    points = {0.0}
    for p in paths:
        for c in p.cells:
            if c.bar_lo > 0.0:
                points.add(float(c.bar_lo))
    pts = sorted(points)
    return [(pts[m], pts[m + 1] if m + 1 < len(pts) else math.inf) for m in range(len(pts))]


def write_path_csv(path, paths, row_idx, col_idx) -> None:
    """Full solution path, one block of nonzero entries per global cell.

    Coordinate c of ``paths`` is written as matrix entry (row_idx[c],
    col_idx[c]); k_total counts the nonzero (t, coordinate) pairs of the
    block.
    """
    row_idx = np.asarray(row_idx)
    col_idx = np.asarray(col_idx)
    cells = global_cells(paths)
    cache: dict = {}
    with _open_w(path) as f:
        f.write("gamma_low,gamma_high,k_total,t,i,j,value\n")
        for bar_lo, bar_hi in cells:
            glo = fmt(bar_to_gamma(bar_lo))
            ghi = fmt(bar_to_gamma(bar_hi))
            trajs = np.empty((len(paths), paths[0].problem.lower.shape[0]))
            for c, p in enumerate(paths):
                k = p.k_at(bar_lo)
                tr = cache.get((c, k))
                if tr is None:
                    tr = p.trajectory(k)
                    cache[(c, k)] = tr
                trajs[c] = tr
            k_total = int(np.count_nonzero(trajs))
            for t in range(trajs.shape[1]):
                nz = np.flatnonzero(trajs[:, t])
                for c in nz:
                    f.write(
                        f"{glo},{ghi},{k_total},{t},{row_idx[c]},{col_idx[c]},"
                        f"{fmt(float(trajs[c, t]))}\n"
                    )


@dataclass
class PathCell:
    gamma_low: float
    gamma_high: float
    k_total: int
    rows: np.ndarray  # (m, 3) int t,i,j
    values: np.ndarray  # (m,)


@dataclass
class PathFile:
    cells: list[PathCell]

    def cell_at(self, gamma: float):
        """The cell covering gamma, or None: all-zero blocks write no rows,
        so a gap in the file means the all-zero estimate."""
        for c in self.cells:
            if c.gamma_low <= gamma < c.gamma_high:
                return c
        if self.cells and math.isclose(gamma, 1.0) and self.cells[-1].gamma_high >= 1.0:
            return self.cells[-1]
        return None

    def estimate_at(self, gamma: float, Tp1: int, n: int, symmetric: bool = True) -> np.ndarray:
        cell = self.cell_at(gamma)
        theta = np.zeros((Tp1, n, n))
        if cell is None:
            return theta
        for (t, i, j), v in zip(cell.rows, cell.values):
            theta[t, i, j] = v
            if symmetric:
                theta[t, j, i] = v
        return theta


def read_path_csv(path) -> PathFile:
    header = "gamma_low,gamma_high,k_total,t,i,j,value"
    cells: list[PathCell] = []
    cur_key = None
    cur_rows: list[tuple[int, int, int]] = []
    cur_vals: list[float] = []

    def flush():
        if cur_key is not None:
            glo, ghi, ktot = cur_key
            cells.append(
                PathCell(glo, ghi, ktot, np.array(cur_rows, dtype=np.int64).reshape(-1, 3),
                         np.array(cur_vals))
            )

    with open(path, encoding="utf-8") as f:
        first = f.readline().strip()
        if first != header:
            raise DataError(f"expected header {header!r}, got {first!r}", line=1)
        for ln, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise DataError(f"expected 7 fields, got {len(parts)}", line=ln)
            try:
                key = (float(parts[0]), float(parts[1]), int(parts[2]))
                row = (int(parts[3]), int(parts[4]), int(parts[5]))
                val = float(parts[6])
            except ValueError as e:
                raise DataError(str(e), line=ln) from None
            if key != cur_key:
                flush()
                cur_key = key
                cur_rows = []
                cur_vals = []
            cur_rows.append(row)
            cur_vals.append(val)
    flush()
    return PathFile(cells)


def write_metrics_csv(path, reports) -> None:
    with _open_w(path) as f:
        f.write("gamma,nll,f1_params,f1_diffs,error\n")
        for r in reports:
            f.write(
                f"{fmt(r.gamma)},{fmt(r.nll)},{fmt(r.f1_params)},"
                f"{fmt(r.f1_diffs)},{fmt(r.error)}\n"
            )
