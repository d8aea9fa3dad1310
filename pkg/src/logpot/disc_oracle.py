"""Reference spectrum of the unit disc from zeros of Bessel functions.

The unit-disc operator has eigenvalues ``1 / j_{l,m}^2``: multiplicity 3 for
``l = 0`` and 2 for ``l >= 1``.  Zeros are found order by order; the zeros
of ``J_{l+1}`` interlace those of ``J_l``, which gives a guaranteed bracket
for every root.
"""
from __future__ import annotations

import functools
import math

import numpy as np
from numba import njit

from .spectral import SchattenEstimate

L_LIMIT = 300
X_LIMIT = 1.0e4
TABLE_L_LIMIT = 1000


@njit(cache=True)
def _series_pair(l, x):
    # ascending series for J_l and J_{l+1}; used where the terms do not cancel
    hx = 0.5 * x
    q = -hx * hx
    out0 = 0.0
    out1 = 0.0
    for order in range(2):
        n = l + order
        logt = n * math.log(hx) - math.lgamma(n + 1.0)
        term = math.exp(logt)
        s = term
        k = 0
        while abs(term) > 1e-17 * abs(s) and k < 500:
            k += 1
            term *= q / (k * (k + n))
            s += term
        if order == 0:
            out0 = s
        else:
            out1 = s
    return out0, out1


@njit(cache=True)
def _miller_pair(l, x):
    big = max(float(l), x)
    m = 2 * ((int(big + 20.0 + 3.0 * math.sqrt(big)) + 2) // 2)
    jp = 0.0
    j = 1e-30
    total = 0.0
    jl = 0.0
    jl1 = 0.0
    for k in range(m, 0, -1):
        jm = 2.0 * k / x * j - jp
        jp = j
        j = jm
        # j now holds order k-1, jp order k
        if k == l + 1:
            jl = j
            jl1 = jp
        if (k - 1) % 2 == 0 and k - 1 > 0:
            total += 2.0 * j
        if abs(j) > 1e250:
            j *= 1e-250
            jp *= 1e-250
            total *= 1e-250
            jl *= 1e-250
            jl1 *= 1e-250
    total += j
    return jl / total, jl1 / total


@njit(cache=True)
def _pair(l, x):
    if x == 0.0:
        return (1.0 if l == 0 else 0.0), 0.0
    if x <= 2.0 or 0.25 * x * x <= l + 1.0:
        return _series_pair(l, x)
    return _miller_pair(l, x)


@njit(cache=True)
def _bessel_array(l, x):
    out = np.empty(x.size)
    for i in range(x.size):
        out[i] = _pair(l[i], x[i])[0]
    return out


@njit(cache=True)
def _refine(l, a, b):
    """Safeguarded Newton on J_l inside a sign-change bracket (a, b)."""
    fa = _pair(l, a)[0]
    fb = _pair(l, b)[0]
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        return -1.0
    x = 0.5 * (a + b)
    for _ in range(200):
        f, f1 = _pair(l, x)
        if f == 0.0:
            return x
        if f * fa > 0:
            a = x
        else:
            b = x
        d = l / x * f - f1
        xn = x - f / d if d != 0.0 else 0.5 * (a + b)
        if not (a < xn < b):
            xn = 0.5 * (a + b)
        if abs(xn - x) <= 2e-16 * x:
            return xn
        x = xn
    return x


@njit(cache=True)
def _zero_table(lmax, mmax):
    width = mmax + lmax
    prev = np.empty(width)
    table = np.empty((lmax + 1, mmax))
    for m in range(1, width + 1):
        beta = (m - 0.25) * math.pi
        prev[m - 1] = _refine(0, beta - 0.25 * math.pi, beta + 0.25 * math.pi)
    table[0, :] = prev[:mmax]
    for l in range(1, lmax + 1):
        cur = np.empty(width - l)
        for m in range(width - l):
            cur[m] = _refine(l, prev[m], prev[m + 1])
        table[l, :] = cur[:mmax]
        prev = cur
    return table


class BesselError(ValueError):
    pass


def bessel_j(l, x):
    """J_l(x) for integer 0 <= l <= 300 and 0 <= x <= 1e4 (vectorised)."""
    la = np.asarray(l)
    xa = np.asarray(x, dtype=float)
    if np.any(la < 0) or np.any(la > L_LIMIT) or np.any(la != np.floor(la)):
        raise BesselError("order out of range")
    if np.any(xa < 0) or np.any(xa > X_LIMIT) or np.any(~np.isfinite(xa)):
        raise BesselError("argument out of range")
    lb, xb = np.broadcast_arrays(la.astype(np.int64), xa)
    out = _bessel_array(lb.ravel().copy(), xb.ravel().copy()).reshape(xb.shape)
    return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=8)
def _cached_table(lmax: int, mmax: int) -> np.ndarray:
    t = _zero_table(lmax, mmax)
    if np.any(t <= 0):
        raise BesselError("bracket failure in zero search")
    t.setflags(write=False)
    return t


def bessel_zero_table(lmax: int, mmax: int) -> np.ndarray:
    """Array ``t[l, m-1] = j_{l,m}`` for l <= lmax, m <= mmax."""
    if not (0 <= lmax <= TABLE_L_LIMIT and 1 <= mmax <= TABLE_L_LIMIT):
        raise BesselError("table bounds out of range")
    return _cached_table(int(lmax), int(mmax))


def bessel_zero(l: int, m: int) -> float:
    if l < 0 or m < 1:
        raise BesselError("zero index out of range")
    return float(bessel_zero_table(l, m)[l, m - 1])


def disc_charnums(lmax: int = 200, mmax: int = 200) -> list:
    """(characteristic number, multiplicity) pairs, ascending."""
    t = bessel_zero_table(lmax, mmax)
    out = [(float(z * z), 3) for z in t[0]]
    out += [(float(z * z), 2) for z in t[1:].ravel()]
    out.sort(key=lambda e: e[0])
    return out


def _tail_bound(p: float, lmax: int, mmax: int) -> float:
    """Upper bound on the omitted part of sum mult * j^{-2p}.

    Uses j_{0,m} > (m - 1/4) pi and, for l >= 1, j_{l,m} > l + (m - 1) pi
    (first zero exceeds the order; consecutive zeros are more than pi apart).
    """
    q = 2.0 * p
    M, L = mmax, lmax
    t0 = 3.0 / (math.pi**q * (q - 1) * (M - 0.25) ** (q - 1))
    if M < 2 or L < 1:
        return math.inf
    t1 = math.exp(math.log(2.0 / ((q - 1) * (q - 2))) - (q - 1) * math.log(math.pi)
                  - (q - 2) * math.log(M - 1))
    m = np.arange(1, M + 1)
    t2 = float(np.sum(np.exp(math.log(2.0 / (q - 1)) - (q - 1) * np.log(L + (m - 1) * math.pi))))
    return t0 + t1 + t2


def _truncated_sum(t: np.ndarray, p: float) -> float:
    terms = np.concatenate([3.0 * t[0] ** (-2.0 * p), 2.0 * t[1:].ravel() ** (-2.0 * p)])
    return math.fsum(np.sort(terms))


def disc_power_sum(p: float, lmax: int = 200, mmax: int = 200):
    """Sum of lambda^p over the unit-disc spectrum.

    Returns ``(value, truncated, tail_bound)``.  ``truncated`` sums every zero
    with l <= lmax, m <= mmax; the omitted part lies in ``[0, tail_bound]``.
    ``value`` adds an extrapolated tail: the omitted part decays like
    ``L^-(2p-2)``, so the half-size truncation (a subset of the same table)
    gives one Richardson step.  ``value`` is clipped to the bracket.
    """
    t = bessel_zero_table(lmax, mmax)
    s = _truncated_sum(t, p)
    tail = _tail_bound(p, lmax, mmax)
    value = s
    if lmax >= 2 and mmax >= 2:
        s_half = _truncated_sum(t[: lmax // 2 + 1, : mmax // 2], p)
        value = s + (s - s_half) / (2.0 ** (2.0 * p - 2.0) - 1.0)
        value = min(max(value, s), s + tail)
    return value, s, tail


def disc_schatten(p: float, lmax: int = 200, mmax: int = 200) -> SchattenEstimate:
    if not p > 1:
        raise ValueError("p must exceed 1 for the series to converge")
    if math.isinf(p):
        return SchattenEstimate(p, disc_opnorm(), "disc-oracle", 0.0)
    value, s, tail = disc_power_sum(p, lmax, mmax)
    val = value ** (1.0 / p)
    bound = max((s + tail) ** (1.0 / p) - val, val - s ** (1.0 / p))
    return SchattenEstimate(p, val, "disc-oracle", bound)


def disc_opnorm() -> float:
    return 1.0 / bessel_zero(0, 1) ** 2
