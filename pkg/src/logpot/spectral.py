"""Spectra of the discretised operator and the quantities derived from them."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .discretize import OperatorMatrix

JACOBI_MAX_N = 160


class ConvergenceError(RuntimeError):
    pass


def _round_robin(n: int):
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    m = n + (n % 2)
    idx = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(idx[k], idx[m - 1 - k]) for k in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        rounds.append((np.array([a for a, _ in pairs], dtype=np.intp),
                       np.array([b for _, b in pairs], dtype=np.intp)))
        idx = [idx[0], idx[-1]] + idx[1:-1]
    return rounds


def jacobi_eigh(A, want_vectors: bool = True, tol: float = 1e-12, max_sweeps: int = 100):
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
    ``tol * ||A||_F``.  Returns ``(w, V)`` unsorted; ``V`` is None unless requested.
    """
    A = np.array(A, dtype=float, copy=True)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    V = np.eye(n) if want_vectors else None
    norm = np.linalg.norm(A)
    if n < 2 or norm == 0.0:
        return np.diag(A).copy(), V
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off < tol * norm:
            return np.diag(A).copy(), V
        for p, q in rounds:
            apq = A[p, q]
            live = np.abs(apq) > 1e-300
            if not live.any():
                continue
            p, q, apq = p[live], q[live], apq[live]
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * rp - s[:, None] * rq
            A[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = cp * c - cq * s
            A[:, q] = cp * s + cq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            if V is not None:
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = vp * c - vq * s
                V[:, q] = vp * s + vq * c
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def order_by_modulus(w: np.ndarray) -> np.ndarray:
    """Permutation sorting by decreasing |w|, then decreasing w, then index."""
    w = np.asarray(w)
    return np.lexsort((np.arange(len(w)), -w, -np.abs(w)))


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray] = None
    grid: object = field(default=None, repr=False)

    @property
    def charnums(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(self.eigenvalues != 0, 1.0 / self.eigenvalues, np.inf)

    def __len__(self):
        return len(self.eigenvalues)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "eigenvalue", "charnum"])
        for i, (lam, mu) in enumerate(zip(self.eigenvalues, self.charnums), start=1):
            w.writerow([i, f"{lam:.17g}", f"{mu:.17g}"])
        return buf.getvalue()


@dataclass
class SchattenEstimate:
    p: float
    value: float
    method: str
    error_bound: float = 0.0
    note: str = ""

    def to_json(self) -> dict:
        return {"p": "inf" if math.isinf(self.p) else self.p, "value": self.value,
                "method": self.method, "error_bound": self.error_bound, "note": self.note}


def eigen_sym(A, want_vectors: bool = False, method: str = "auto") -> Spectrum:
    """Full eigendecomposition of a symmetric matrix, ordered by decreasing |lambda|.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_MAX_N`` rows, LAPACK beyond).
    """
    grid = getattr(A, "grid", None)
    M = A.entries if isinstance(A, OperatorMatrix) else np.asarray(A, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if not np.array_equal(M, M.T):
        raise ValueError("matrix must be symmetric")
    if method == "auto":
        method = "jacobi" if M.shape[0] <= JACOBI_MAX_N else "lapack"
    if method == "jacobi":
        w, V = jacobi_eigh(M, want_vectors)
    elif method == "lapack":
        if want_vectors:
            w, V = np.linalg.eigh(M)
        else:
            w, V = np.linalg.eigvalsh(M), None
    else:
        raise ValueError(f"unknown eigen method {method!r}")
    order = order_by_modulus(w)
    return Spectrum(w[order], None if V is None else V[:, order], grid)


def operator_norm(s: Spectrum) -> float:
    nz = np.abs(s.eigenvalues[s.eigenvalues != 0])
    if nz.size == 0:
        raise ValueError("empty spectrum")
    return float(nz.max())


def _is_even_int(p) -> bool:
    return float(p).is_integer() and int(p) % 2 == 0


def schatten_from_spectrum(s: Spectrum, p: float) -> SchattenEstimate:
    p = float(p)
    if not (p >= 1):
        raise ValueError("p must be >= 1")
    if math.isinf(p):
        return SchattenEstimate(p, operator_norm(s), "eigen")
    a = np.abs(s.eigenvalues)
    top = a.max() if a.size else 0.0
    value = 0.0 if top == 0 else top * float(np.sum((a / top) ** p)) ** (1.0 / p)
    note = ""
    if not _is_even_int(p) and np.any(s.eigenvalues < 0):
        note = "requires positivity assumption"
    return SchattenEstimate(p, value, "eigen", 0.0, note)


def trace_power(s: Spectrum, p: int) -> float:
    """sum lambda_i^p (signed), i.e. tr(A^p)."""
    return float(np.sum(s.eigenvalues.astype(float) ** int(p)))


def negative_count(s: Spectrum, tol: float = 1e-10) -> int:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if len(s) == 0:
        return 0
    return int(np.sum(s.eigenvalues < -tol * abs(s.eigenvalues[0])))


def first_eigenfunction_diagnostics(s: Spectrum) -> dict:
    if s.eigenvectors is None:
        raise ValueError("eigenvectors were not computed")
    v = s.eigenvectors[:, 0].copy()
    k = int(np.argmax(np.abs(v)))
    if v[k] < 0:
        v = -v
    vmax = float(v.max())
    gap = float(abs(s.eigenvalues[0]) - abs(s.eigenvalues[1])) if len(s) > 1 else float(abs(s.eigenvalues[0]))
    return {"sign_consistent": bool(v.min() >= -1e-6 * vmax), "gap": gap,
            "min_over_max": float(v.min() / vmax), "vector": v}
