"""Midpoint Nystrom discretisation of the logarithmic potential on a raster.

Off-diagonal entries are ``h^2 k(c_i - c_j)``; the diagonal is the exact
kernel integral over the disc with the same area as one cell.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .geometry import RasterGrid

DEFAULT_CAP = 4096
MAGIC = b"LPOT"


class GridTooFine(ValueError):
    pass


def self_weight(h: float) -> float:
    """Integral of (1/2pi) ln(1/|y|) over the disc of area h^2."""
    if not h > 0:
        raise ValueError("h must be positive")
    rho = h / math.sqrt(math.pi)
    return rho * rho * (0.5 * math.log(1.0 / rho) + 0.25)


def self_weight_quadrature(h: float) -> float:
    """Polar-quadrature oracle for :func:`self_weight`."""
    from scipy.integrate import quad

    rho = h / math.sqrt(math.pi)
    val, _ = quad(lambda r: r * math.log(1.0 / r), 0.0, rho, epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    grid: RasterGrid
    entries: np.ndarray

    @property
    def cell_area(self) -> float:
        return self.grid.cell_area

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, v):
        return self.entries @ v


def _kernel_block(a: np.ndarray, b: np.ndarray, h: float) -> np.ndarray:
    d = np.sqrt((a[:, None, 0] - b[None, :, 0]) ** 2 + (a[:, None, 1] - b[None, :, 1]) ** 2)
    with np.errstate(divide="ignore"):
        return (h * h / (2 * math.pi)) * -np.log(d)


def assemble(grid: RasterGrid, cap: int = DEFAULT_CAP) -> OperatorMatrix:
    """Dense symmetric matrix; rows follow the row-major scan of active cells."""
    n = grid.count
    if n == 0:
        raise ValueError("empty grid")
    if n > cap:
        raise GridTooFine(f"grid too fine for dense assembly ({n} cells > cap {cap})")
    c = grid.centers()
    h = grid.h
    A = np.empty((n, n))
    step = max(1, 2_000_000 // n)
    for i0 in range(0, n, step):
        # upper block rows only; mirrored below so symmetry is exact
        A[i0:i0 + step, i0:] = _kernel_block(c[i0:i0 + step], c[i0:], h)
    iu = np.triu_indices(n, 1)
    A[(iu[1], iu[0])] = A[iu]
    np.fill_diagonal(A, self_weight(h))
    return OperatorMatrix(grid, A)


class ConvolutionOperator:
    """Matrix-free action of the assembled matrix via FFT convolution.

    The grid kernel is translation invariant, so ``A v`` is a 2-D linear
    convolution of the scattered cell values with a kernel table.  Agrees
    with :func:`assemble` to rounding.
    """

    def __init__(self, grid: RasterGrid):
        self.grid = grid
        ny, nx = grid.mask.shape
        h = grid.h
        ky = np.arange(-(ny - 1), ny) * h
        kx = np.arange(-(nx - 1), nx) * h
        KX, KY = np.meshgrid(kx, ky, indexing="xy")
        r = np.hypot(KX, KY)
        r[ny - 1, nx - 1] = 1.0
        K = (h * h / (2 * math.pi)) * -np.log(r)
        K[ny - 1, nx - 1] = self_weight(h)
        self.shape_full = (sfft.next_fast_len(3 * ny - 2, real=True),
                           sfft.next_fast_len(3 * nx - 2, real=True))
        self._kf = sfft.rfft2(K, self.shape_full)
        self._rows, self._cols = np.nonzero(grid.mask)
        self.n = len(self._rows)

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def dtype(self):
        return np.dtype(float)

    def apply_field(self, f: np.ndarray) -> np.ndarray:
        """Convolve a full (ny, nx) field; returns the full-grid potential."""
        ny, nx = self.grid.mask.shape
        g = np.where(self.grid.mask, f, 0.0)
        out = sfft.irfft2(sfft.rfft2(g, self.shape_full) * self._kf, self.shape_full)
        return out[ny - 1:2 * ny - 1, nx - 1:2 * nx - 1]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float).ravel()
        f = self.grid.field()
        f[self._rows, self._cols] = v
        return self.apply_field(f)[self._rows, self._cols]

    def __matmul__(self, v):
        return self.matvec(v)

    def as_linear_operator(self):
        from scipy.sparse.linalg import LinearOperator

        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.matvec, dtype=float)


def frobenius_sq(grid: RasterGrid) -> float:
    """sum_ij A_ij^2 without forming A, via the autocorrelation of the mask."""
    ny, nx = grid.mask.shape
    m = grid.mask.astype(float)
    shape = (sfft.next_fast_len(2 * ny - 1), sfft.next_fast_len(2 * nx - 1))
    F = sfft.rfft2(m, shape)
    cnt = sfft.irfft2(F * np.conj(F), shape)
    cnt = np.rint(np.fft.fftshift(cnt, axes=(0, 1)))
    cy, cx = shape[0] // 2, shape[1] // 2
    oy = (np.arange(shape[0]) - cy) * grid.h
    ox = (np.arange(shape[1]) - cx) * grid.h
    OX, OY = np.meshgrid(ox, oy, indexing="xy")
    r = np.hypot(OX, OY)
    r[cy, cx] = 1.0
    K = (grid.h**2 / (2 * math.pi)) * -np.log(r)
    K[cy, cx] = self_weight(grid.h)
    return float((cnt * K * K).sum())


def dump_matrix(A, path) -> None:
    """Binary dump: 16-byte header (b'LPOT', u32 N, two reserved u32 zeros), then
    N*N little-endian float64 in row-major order."""
    M = A.entries if isinstance(A, OperatorMatrix) else np.asarray(A)
    n = M.shape[0]
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<III", n, 0, 0))
        fh.write(np.ascontiguousarray(M, dtype="<f8").tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) < 16 or head[:4] != MAGIC:
            raise ValueError("not an LPOT matrix file")
        n, _, _ = struct.unpack("<III", head[4:16])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise ValueError("truncated matrix file")
    return data.reshape(n, n).astype(float)
