"""Discrete symmetric-decreasing rearrangement and Steiner symmetrisation.

Raster versions work by sorting: values keep their multiset exactly and
ties are broken by row-major index.  Triangles are symmetrised exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Disc, DomainError, Point2, RasterGrid, Triangle, area


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Non-negative values on the active cells of a grid (row-major order)."""

    grid: RasterGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size != self.grid.count:
            raise ValueError("one value per active cell expected")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if np.any(v < 0):
            raise ValueError("rearrangement needs a non-negative field")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def as_array(self) -> np.ndarray:
        full = self.grid.field()
        full[self.grid.mask] = self.values
        return full

    @classmethod
    def from_array(cls, grid: RasterGrid, full: np.ndarray) -> "ScalarField":
        return cls(grid, np.asarray(full)[grid.mask])

    def l2_sq(self) -> float:
        """Sum of squares, correctly rounded so any permutation gives the same bits."""
        return math.fsum(self.values**2)


def domain_rearrange(d) -> Disc:
    """The centred disc with the same area."""
    return Disc((0.0, 0.0), math.sqrt(area(d) / math.pi))


def nearest_origin_grid(count: int, h: float) -> tuple:
    """Grid holding the ``count`` cells whose centres are nearest the origin.

    The lattice has the origin at a cell corner.  Returns the grid and the
    (row, col) of its cells ordered by distance, ties by row-major index.
    """
    k = int(math.ceil(math.sqrt(count / math.pi))) + 2
    n = 2 * k
    # squared distances in half-cell units are exact integers, so ties are exact
    c = 2 * (np.arange(n) - k) + 1
    X, Y = np.meshgrid(c, c, indexing="xy")
    d2 = (X * X + Y * Y).ravel()
    order = np.lexsort((np.arange(d2.size), d2))[:count]
    rows, cols = np.divmod(order, n)
    mask = np.zeros((n, n), dtype=bool)
    mask[rows, cols] = True
    return RasterGrid(Point2(-k * h, -k * h), h, mask), rows, cols


def symm_decreasing_rearrange(f: ScalarField) -> ScalarField:
    g, rows, cols = nearest_origin_grid(f.grid.count, f.grid.h)
    full = g.field()
    # stable sort on the negated values keeps row-major order among ties
    full[rows, cols] = f.values[np.argsort(-f.values, kind="stable")]
    return ScalarField.from_array(g, full)


def _outward_order(n: int) -> np.ndarray:
    """Row positions by distance from the row centre, right before left."""
    pos = np.arange(n) + 0.5 - 0.5 * n
    return np.lexsort((pos < 0, np.abs(pos)))


def _symmetrize_rows(full: np.ndarray, mask: np.ndarray):
    ny, nx = full.shape
    order = _outward_order(nx)
    out = np.zeros_like(full)
    new_mask = np.zeros_like(mask)
    for j in range(ny):
        cnt = int(mask[j].sum())
        vals = np.sort(full[j][mask[j]])[::-1]
        slots = order[:cnt]
        new_mask[j, slots] = True
        out[j, slots] = vals
    return out, new_mask


def _along(axis: str, a):
    if axis == "x":
        return a
    if axis == "y":
        return a.T
    raise ValueError("axis must be 'x' or 'y'")


def steiner_field(f: ScalarField, axis: str = "x") -> ScalarField:
    """Symmetric-decreasing rearrangement of every slice.

    ``axis="x"`` rearranges each row (fixed y) about the grid's vertical
    centre line; ``"y"`` does the same for columns.  The support of each
    slice is replaced by the same number of cells, centred.
    """
    full = _along(axis, f.as_array())
    mask = _along(axis, f.grid.mask)
    out, new_mask = _symmetrize_rows(full, mask)
    g = f.grid.with_mask(_along(axis, new_mask))
    return ScalarField.from_array(g, _along(axis, out))


def steiner_domain_raster(g: RasterGrid, axis: str = "x") -> RasterGrid:
    if g.count == 0:
        raise ValueError("empty grid")
    mask = _along(axis, g.mask)
    _, new_mask = _symmetrize_rows(mask.astype(float), mask)
    return g.with_mask(_along(axis, new_mask))


def steiner_triangle(t: Triangle, side: int) -> Triangle:
    """Symmetrise about the perpendicular bisector of side ``side``
    (the edge from vertex ``side`` to vertex ``side + 1``).

    The apex moves parallel to that side onto the bisector, so base and
    height, hence area, are unchanged.
    """
    if side not in (0, 1, 2):
        raise ValueError("side must be 0, 1 or 2")
    v = t.array
    a, b, c = v[side], v[(side + 1) % 3], v[(side + 2) % 3]
    e = b - a
    L = math.hypot(*e)
    if L == 0:
        raise DomainError("degenerate domain")
    nrm = np.array([-e[1], e[0]]) / L
    height = float(np.dot(c - a, nrm))
    if abs(height) <= 1e-15 * L:
        raise DomainError("degenerate domain")
    apex = 0.5 * (a + b) + height * nrm
    out = v.copy()
    out[(side + 2) % 3] = apex
    return Triangle(tuple(map(tuple, out)))


def side_spread(t: Triangle) -> float:
    s = t.side_lengths
    return float(s.max() - s.min())


class SymmetrizationError(RuntimeError):
    def __init__(self, msg, last):
        super().__init__(msg)
        self.last = last


def equilateralize(t: Triangle, tol: float = 1e-9, max_sweeps: int = 60, trajectory=None):
    """Cycle ``steiner_triangle`` over sides 0, 1, 2 until the side lengths
    agree to ``tol``.  Returns ``(triangle, sweeps)``; one sweep is one cycle.
    If ``trajectory`` is a list, (sweep, triangle, spread) rows are appended.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    sweeps = 0
    if trajectory is not None:
        trajectory.append((0, t, side_spread(t)))
    while side_spread(t) >= tol:
        if sweeps >= max_sweeps:
            raise SymmetrizationError(f"no convergence within {max_sweeps} sweeps", t)
        for side in range(3):
            t = steiner_triangle(t, side)
        sweeps += 1
        if trajectory is not None:
            trajectory.append((sweeps, t, side_spread(t)))
    return t, sweeps


# -- PGM masks (plain P2, values 0/1) ------------------------------------------

def write_pgm(g: RasterGrid, path) -> None:
    # first row of the file is the top of the grid
    rows = g.mask[::-1].astype(int)
    with open(path, "w") as fh:
        fh.write(f"P2\n# origin {g.origin.x!r} {g.origin.y!r} h {g.h!r}\n{g.nx} {g.ny}\n1\n")
        for r in rows:
            fh.write(" ".join(map(str, r)) + "\n")


def read_pgm(path, h: float = 1.0, origin=(0.0, 0.0)) -> RasterGrid:
    tokens = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 5 and parts[0] == "origin" and parts[3] == "h":
                    origin = (float(parts[1]), float(parts[2]))
                    h = float(parts[4])
                continue
            tokens += line.split()
    if not tokens or tokens[0] != "P2":
        raise ValueError("not a plain PGM (P2) file")
    nx, ny = int(tokens[1]), int(tokens[2])
    data = np.array(tokens[4:4 + nx * ny], dtype=int)
    if data.size != nx * ny:
        raise ValueError("truncated PGM data")
    mask = data.reshape(ny, nx)[::-1] > 0
    return RasterGrid(Point2(*origin), h, mask)
