"""The logarithmic kernel and its split into a positive decreasing part.

For a split radius ``r0`` the profile ``f`` follows the kernel up to ``r0``
and then decays to a finite limit ``f_inf``.  With ``h1 = f - f_inf`` and
``h2 = kernel - h1`` the kernel is ``h1 + h2`` where ``h1 > 0`` is strictly
decreasing and ``h2`` is non-increasing; ``q_R`` is ``h2`` shifted and cut
off at radius ``R``.
"""
import math

import numpy as np

TWO_PI = 2.0 * math.pi


def _check_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise ValueError("radius must be positive")
    return r


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def log_kernel(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = math.hypot(x[0] - y[0], x[1] - y[1])
    if r == 0.0:
        raise ValueError("kernel singularity")
    return -math.log(r) / TWO_PI


def kernel_profile(r):
    """(1/2pi) ln(1/r), vectorised."""
    r = _check_r(r)
    return _out(-np.log(r) / TWO_PI)


def f_inf(r0: float) -> float:
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    return (-math.log(r0) - (1 + r0 * r0) * (-math.log(r0) + 0.5 * math.log1p(r0 * r0))) / TWO_PI


def f_split(r, r0: float = 1.0):
    r = _check_r(r)
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    inner = -np.log(r) / TWO_PI
    # ln r - 1/2 ln(1+r^2) = -1/2 ln(1 + r^-2); the right-hand form keeps precision at large r
    tail = (-math.log(r0)
            - (1 + r0 * r0) * (-0.5 * np.log1p(r**-2.0) + 0.5 * math.log1p(r0**-2.0))) / TWO_PI
    return _out(np.where(r <= r0, inner, tail))


def h1(r, r0: float = 1.0):
    return _out(np.asarray(f_split(r, r0)) - f_inf(r0))


def h2(r, r0: float = 1.0):
    r = _check_r(r)
    # on r <= r0 the difference is exactly f_inf; avoid the rounding of kernel - h1 there
    outer = -np.log(r) / TWO_PI - (np.asarray(f_split(r, r0)) - f_inf(r0))
    return _out(np.where(r <= r0, f_inf(r0), outer))


def q_R(r, r0: float = 1.0, R: float = 1.0):
    r = _check_r(r)
    if not R > 0:
        raise ValueError("R must be positive")
    val = np.asarray(h2(r, r0)) - h2(R, r0)
    return _out(np.where(r <= R, np.maximum(val, 0.0), 0.0))


def f_split_quadrature(r: float, r0: float = 1.0) -> float:
    """Integral definition of ``f`` evaluated by adaptive quadrature (test oracle)."""
    from scipy.integrate import quad

    if r <= r0:
        return -math.log(r) / TWO_PI
    integral, _ = quad(lambda s: (1 + r0 * r0) / (s * (1 + s * s)), r0, r,
                       epsabs=1e-14, epsrel=1e-13, limit=200)
    return (-math.log(r0) - integral) / TWO_PI


def decomposition_report(r0_list=(0.5, 1.0, 2.0), rmin=1e-3, rmax=1e3, n=2001) -> list:
    """Property checks of the split over a log-spaced radius grid."""
    r = np.geomspace(rmin, rmax, n)
    out = []
    for r0 in r0_list:
        k = np.asarray(kernel_profile(r))
        a = np.asarray(h1(r, r0))
        b = np.asarray(h2(r, r0))
        resid = float(np.max(np.abs(a + b - k)))
        qr = np.asarray(q_R(r, r0, rmax / 10))
        props = {
            "identity": resid < 1e-12,
            "h1_positive": bool(np.all(a > 0)),
            "h1_strictly_decreasing": bool(np.all(np.diff(a) < 0)),
            "h2_non_increasing": bool(np.all(np.diff(b) <= 1e-15)),
            "h1_limit": float(h1(1e6, r0)) < 1e-5,
            "qR_nonnegative": bool(np.all(qr >= 0)),
            "qR_non_increasing": bool(np.all(np.diff(qr) <= 1e-15)),
        }
        out.append({"r0": r0, "f_inf": f_inf(r0), "identity_residual": resid,
                    "properties": props, "passed": all(props.values())})
    return out
