"""Planar domains: discs, simple polygons, triangles and raster grids.

Every domain exposes ``area``, ``contains_points`` (vectorised over an
``(n, 2)`` array), ``bbox`` and ``centroid``.  Values are immutable.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np


class DomainError(ValueError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


def _as_points(p) -> np.ndarray:
    pts = np.asarray(p, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    return pts


@dataclass(frozen=True)
class Disc:
    center: Point2
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", Point2(*map(float, self.center)))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise DomainError("degenerate domain")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    @property
    def centroid(self) -> Point2:
        return self.center

    @property
    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cy - r, cx + r, cy + r)

    def contains_points(self, pts) -> np.ndarray:
        pts = _as_points(pts)
        dx = pts[:, 0] - self.center.x
        dy = pts[:, 1] - self.center.y
        return dx * dx + dy * dy < self.radius**2

    def to_json(self) -> dict:
        return {"type": "disc", "center": list(self.center), "radius": self.radius}


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


@dataclass(frozen=True)
class Polygon:
    """Simple polygon; vertices are stored counter-clockwise."""

    vertices: tuple

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3 or not np.all(np.isfinite(v)):
            raise DomainError("degenerate domain")
        a = _signed_area(v)
        scale = float(np.ptp(v, axis=0).max()) ** 2
        if abs(a) <= 1e-14 * max(scale, 1e-300):
            raise DomainError("degenerate domain")
        if a < 0:
            v = v[::-1]
        n = len(v)
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                    raise DomainError("polygon is not simple")
        object.__setattr__(self, "vertices", tuple(Point2(float(x), float(y)) for x, y in v))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    @property
    def area(self) -> float:
        return _signed_area(self.array)

    @property
    def centroid(self) -> Point2:
        v = self.array
        x, y = v[:, 0], v[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        a = 0.5 * cross.sum()
        return Point2(float(((x + xn) * cross).sum() / (6 * a)), float(((y + yn) * cross).sum() / (6 * a)))

    @property
    def bbox(self):
        v = self.array
        return (*v.min(axis=0), *v.max(axis=0))

    def contains_points(self, pts) -> np.ndarray:
        # crossing-number test, vectorised over points
        pts = _as_points(pts)
        px, py = pts[:, 0], pts[:, 1]
        v = self.array
        inside = np.zeros(len(pts), dtype=bool)
        for (x1, y1), (x2, y2) in zip(v, np.roll(v, -1, axis=0)):
            if y1 == y2:
                continue
            straddle = (y1 > py) != (y2 > py)
            xcross = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            inside ^= straddle & (px < xcross)
        return inside

    def to_json(self) -> dict:
        return {"type": "polygon", "vertices": [list(p) for p in self.vertices]}


class Triangle(Polygon):
    def __post_init__(self):
        if len(self.vertices) != 3:
            raise DomainError("a triangle needs exactly 3 vertices")
        super().__post_init__()

    @property
    def side_lengths(self) -> np.ndarray:
        v = self.array
        return np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)

    def to_json(self) -> dict:
        return {"type": "triangle", "vertices": [list(p) for p in self.vertices]}


@dataclass(frozen=True, eq=False)
class RasterGrid:
    """Uniform cells of side ``h``; cell (i, j) has centre origin + (i + 1/2, j + 1/2) h.

    ``mask`` has shape ``(ny, nx)``: row index j runs along y, column i along x.
    """

    origin: Point2
    h: float
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        if m.ndim != 2 or not self.h > 0:
            raise DomainError("invalid raster grid")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)
        object.__setattr__(self, "origin", Point2(*map(float, self.origin)))

    @property
    def nx(self) -> int:
        return self.mask.shape[1]

    @property
    def ny(self) -> int:
        return self.mask.shape[0]

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    @property
    def area(self) -> float:
        return self.cell_area * self.count

    def all_centers(self):
        xs = self.origin.x + (np.arange(self.nx) + 0.5) * self.h
        ys = self.origin.y + (np.arange(self.ny) + 0.5) * self.h
        return np.meshgrid(xs, ys, indexing="xy")

    def centers(self) -> np.ndarray:
        """Active cell centres in row-major scan order, shape (N, 2)."""
        X, Y = self.all_centers()
        return np.column_stack([X[self.mask], Y[self.mask]])

    def indices(self) -> np.ndarray:
        """(row, col) of active cells in row-major order."""
        return np.argwhere(self.mask)

    @property
    def bbox(self):
        return (self.origin.x, self.origin.y,
                self.origin.x + self.nx * self.h, self.origin.y + self.ny * self.h)

    @property
    def centroid(self) -> Point2:
        return Point2(*self.centers().mean(axis=0))

    def contains_points(self, pts) -> np.ndarray:
        pts = _as_points(pts)
        i = np.floor((pts[:, 0] - self.origin.x) / self.h).astype(np.int64)
        j = np.floor((pts[:, 1] - self.origin.y) / self.h).astype(np.int64)
        ok = (i >= 0) & (i < self.nx) & (j >= 0) & (j < self.ny)
        out = np.zeros(len(pts), dtype=bool)
        out[ok] = self.mask[j[ok], i[ok]]
        return out

    def with_mask(self, mask) -> "RasterGrid":
        return RasterGrid(self.origin, self.h, mask)

    def field(self, fill: float = 0.0) -> np.ndarray:
        """Full (ny, nx) array, used to scatter per-cell vectors."""
        return np.full(self.mask.shape, fill, dtype=float)


Domain = Union[Disc, Polygon, RasterGrid]


def area(d: Domain) -> float:
    a = d.area
    if not a > 0:
        raise DomainError("degenerate domain")
    return a


def contains(d: Domain, p) -> bool:
    return bool(d.contains_points(p)[0])


def diameter(d: Domain) -> float:
    if isinstance(d, Disc):
        return 2 * d.radius
    if isinstance(d, Polygon):
        v = d.array
        return float(np.sqrt(((v[:, None] - v[None]) ** 2).sum(-1)).max())
    c = d.centers()
    x0, y0, x1, y1 = c[:, 0].min(), c[:, 1].min(), c[:, 0].max(), c[:, 1].max()
    return math.hypot(x1 - x0, y1 - y0) + math.sqrt(2) * d.h


def rasterize(d: Domain, h: float) -> RasterGrid:
    """Centre-rule raster of ``d`` on a grid padded by one cell on each side.

    The grid is centred on the bounding box, so a box side that is an integer
    multiple of ``h`` is tiled exactly.
    """
    if not h > 0:
        raise DomainError("cell size must be positive")
    if h >= diameter(d):
        raise DomainError("resolution too coarse")
    x0, y0, x1, y1 = d.bbox
    nx = int(math.ceil((x1 - x0) / h - 1e-9)) + 2
    ny = int(math.ceil((y1 - y0) / h - 1e-9)) + 2
    if nx * ny > 50_000_000:
        raise DomainError("grid too large")
    ox = 0.5 * (x0 + x1) - 0.5 * nx * h
    oy = 0.5 * (y0 + y1) - 0.5 * ny * h
    xs = ox + (np.arange(nx) + 0.5) * h
    ys = oy + (np.arange(ny) + 0.5) * h
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    mask = d.contains_points(np.column_stack([X.ravel(), Y.ravel()])).reshape(ny, nx)
    if not mask.any():
        raise DomainError("resolution too coarse")
    return RasterGrid(Point2(ox, oy), h, mask)


def sample_uniform(d: Domain, n: int, seed=0) -> np.ndarray:
    """``n`` i.i.d. uniform points in ``d`` by rejection from the bounding box.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if n <= 0:
        return np.empty((0, 2))
    x0, y0, x1, y1 = d.bbox
    out = []
    got = 0
    tried = 0
    while got < n:
        if tried >= 100 * n:
            raise DomainError("rejection sampling exhausted its attempt budget")
        m = max(64, int(1.25 * (n - got) * (x1 - x0) * (y1 - y0) / d.area) + 16)
        m = min(m, 100 * n - tried)
        pts = np.column_stack([rng.uniform(x0, x1, m), rng.uniform(y0, y1, m)])
        tried += m
        pts = pts[d.contains_points(pts)]
        out.append(pts)
        got += len(pts)
    return np.concatenate(out)[:n]


def scale_to_area(d: Domain, target: float) -> Domain:
    """Homothety about the centroid giving ``area == target``."""
    if not target > 0:
        raise DomainError("target area must be positive")
    if isinstance(d, RasterGrid):
        raise DomainError("scale raster not supported; rescale source domain")
    s = math.sqrt(target / d.area)
    if isinstance(d, Disc):
        return Disc(d.center, d.radius * s)
    c = np.array(d.centroid)
    v = c + s * (d.array - c)
    return type(d)(tuple(map(tuple, v)))


def transform(d: Domain, angle: float = 0.0, shift=(0.0, 0.0)) -> Domain:
    """Rigid motion: rotate about the origin by ``angle`` then translate."""
    c, s = math.cos(angle), math.sin(angle)
    R = np.array([[c, -s], [s, c]])
    if isinstance(d, Disc):
        return Disc(tuple(R @ np.array(d.center) + shift), d.radius)
    if isinstance(d, Polygon):
        v = d.array @ R.T + np.asarray(shift, dtype=float)
        return type(d)(tuple(map(tuple, v)))
    raise DomainError("rigid motion of a raster is not supported")


# -- common shapes -----------------------------------------------------------

def unit_disc() -> Disc:
    return Disc((0.0, 0.0), 1.0)


def rectangle(width: float, height: float, center=(0.0, 0.0)) -> Polygon:
    cx, cy = center
    w, h = width / 2, height / 2
    return Polygon(((cx - w, cy - h), (cx + w, cy - h), (cx + w, cy + h), (cx - w, cy + h)))


def equilateral_triangle(area_: float = math.pi) -> Triangle:
    """Equilateral triangle centred at the origin, base parallel to the x axis."""
    s = math.sqrt(4 * area_ / math.sqrt(3))
    R = s / math.sqrt(3)
    pts = [(R * math.cos(a), R * math.sin(a)) for a in (-math.pi / 6, math.pi / 2, 7 * math.pi / 6)]
    return Triangle(tuple(sorted(pts, key=lambda p: math.atan2(p[1], p[0]))))


# -- JSON --------------------------------------------------------------------

def domain_from_json(obj) -> Domain:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "type" not in obj:
        raise DomainError("domain JSON needs a 'type' field")
    kind = obj["type"]
    try:
        if kind == "disc":
            return Disc(tuple(obj["center"]), float(obj["radius"]))
        if kind == "polygon":
            return Polygon(tuple(map(tuple, obj["vertices"])))
        if kind == "triangle":
            return Triangle(tuple(map(tuple, obj["vertices"])))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed {kind} domain: {exc}") from exc
    raise DomainError(f"unknown domain type {kind!r}")


def load_domain(path) -> Domain:
    with open(path) as fh:
        return domain_from_json(json.load(fh))


def domain_to_json(d: Domain) -> dict:
    return d.to_json()
