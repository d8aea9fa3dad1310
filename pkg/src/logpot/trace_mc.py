"""Monte-Carlo estimates of sum_j lambda_j^p as a p-fold cyclic kernel integral.

With Y_1..Y_p i.i.d. uniform on the domain, ``|d|^p * E[prod k(Y_i, Y_{i+1})]``
(indices mod p) equals the trace of the p-th power of the operator.  Every
batch draws from its own substream of ``SeedSequence(seed)``, and batch
results are merged in batch order, so estimates do not depend on threading.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import area, sample_uniform

N_BATCHES = 40
CHUNK = 200_000


@dataclass(frozen=True)
class TraceEstimate:
    p: int
    mean: float
    stderr: float
    n_samples: int
    seed: int

    def to_json(self) -> dict:
        return {"p": self.p, "mean": self.mean, "stderr": self.stderr,
                "n": self.n_samples, "seed": self.seed}


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LOGPOT_THREADS", "1")))
    except ValueError:
        return 1


def _batched(batch_fn, n: int, seed: int, batches: int):
    size = -(-n // batches)
    streams = np.random.SeedSequence(seed).spawn(batches)

    def run(k):
        rng = np.random.default_rng(streams[k])
        total = 0.0
        left = size
        while left:
            m = min(left, CHUNK)
            total += math.fsum(batch_fn(rng, m))
            left -= m
        return total / size

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            means = list(pool.map(run, range(batches)))
    else:
        means = [run(k) for k in range(batches)]
    means = np.array(means)
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(batches)), size * batches


def _check(p, n):
    if int(p) != p or not 2 <= p <= 8:
        raise ValueError("p must be an integer in [2, 8]")
    if n < 1:
        raise ValueError("n must be positive")


def cyclic_trace_mc(d, p: int, n: int, seed: int = 0, batches: int = N_BATCHES) -> TraceEstimate:
    _check(p, n)
    if n < 10_000:
        raise ValueError("need at least 1e4 samples")
    if batches < 30:
        raise ValueError("need at least 30 batches")
    p = int(p)
    scale = area(d) ** p

    def draw(rng, m):
        y = sample_uniform(d, m * p, rng).reshape(m, p, 2)
        while True:
            diff = y - np.roll(y, -1, axis=1)
            r = np.hypot(diff[..., 0], diff[..., 1])
            bad = np.any(r == 0.0, axis=1)
            if not bad.any():
                break
            y[bad] = sample_uniform(d, int(bad.sum()) * p, rng).reshape(-1, p, 2)
        return scale * np.prod(-np.log(r) / (2 * math.pi), axis=1)

    mean, se, total = _batched(draw, n, seed, batches)
    return TraceEstimate(p, mean, se, total, seed)


def hs_norm_mc(d, n: int, seed: int = 0, batches: int = N_BATCHES) -> TraceEstimate:
    """Squared Hilbert-Schmidt norm, the p = 2 cyclic integral."""
    return cyclic_trace_mc(d, 2, n, seed, batches)


def cyclic_trace_mc_discrete(A, p: int, n: int, seed: int = 0, batches: int = N_BATCHES) -> TraceEstimate:
    """Same estimator with the domain replaced by the uniform measure on the
    rows of a matrix: estimates tr(A^p) with cell indices as sample points."""
    _check(p, n)
    M = np.asarray(getattr(A, "entries", A), dtype=float)
    N = M.shape[0]
    p = int(p)
    scale = float(N) ** p

    def draw(rng, m):
        idx = rng.integers(0, N, size=(m, p))
        return scale * np.prod(M[idx, np.roll(idx, -1, axis=1)], axis=1)

    mean, se, total = _batched(draw, n, seed, batches)
    return TraceEstimate(p, mean, se, total, seed)
