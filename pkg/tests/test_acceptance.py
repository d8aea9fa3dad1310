"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are repeated in the terminal summary under "acceptance criteria".
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from logpot import harness
from logpot.discretize import assemble
from logpot.disc_oracle import disc_opnorm, disc_schatten
from logpot.geometry import Disc, Triangle, area, equilateral_triangle, rasterize, rectangle
from logpot.logkernel import f_inf, h1, h2, kernel_profile
from logpot.rearrange import (ScalarField, equilateralize, side_spread, steiner_field,
                              steiner_triangle, symm_decreasing_rearrange)
from logpot.spectral import eigen_sym, first_eigenfunction_diagnostics, negative_count, trace_power
from logpot.trace_mc import cyclic_trace_mc

H_FINE = math.sqrt(math.pi) / 60
MC_N = 2_000_000
MC_ESCALATE = 50
THM_DOMAINS = ("square", "rect2x1", "equilateral", "right")


def report(n, ok, title, details):
    line = f"[acceptance {n:2d}] {'PASS' if ok else 'FAIL'}  {title}: {details}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def fmt_verdicts(vs):
    return "; ".join(f"{v.domain} p={'inf' if math.isinf(v.p) else int(v.p)} {v.route} "
                     f"{v.verdict} (margin {v.margin:+.3g}, budget {v.budget:.2g})" for v in vs)


@pytest.fixture(scope="module")
def disc_max():
    doms = {k: harness.STANDARD_DOMAINS[k]() for k in THM_DOMAINS + ("disc",)}
    rep = harness.verify_disc_max(doms, ps=(2, 4), h=H_FINE, mc_samples=MC_N, seed=2024)
    # resolve MC verdicts left inside the budget with a larger sample
    for i, v in enumerate(rep.verdicts):
        if v.route == "mc-trace" and v.verdict == "UNDECIDED" and v.domain != "disc":
            rep.verdicts[i] = harness.mc_verdict(doms[v.domain], v.domain, int(v.p),
                                                 MC_N * MC_ESCALATE, 2024)[0]
    return rep


# -- 1 ---------------------------------------------------------------------------------

def test_01_disc_operator_norm():
    t0 = time.perf_counter()
    ref = disc_opnorm()
    g4 = rasterize(Disc((0, 0), 1.0), 0.04)
    lam4 = eigen_sym(assemble(g4)).eigenvalues[0]
    lam2 = harness.top_eigenvalues_matfree(rasterize(Disc((0, 0), 1.0), 0.02), 3)[0]
    e4, e2 = abs(lam4 - ref) / ref, abs(lam2 - ref) / ref
    dt = time.perf_counter() - t0
    ok = e4 < 0.02 and e2 < e4 and dt <= 300
    assert report(1, ok, "disc operator norm",
                  f"lambda1(h=0.04)={lam4:.6f} rel.err {e4:.2e}; h=0.02 rel.err {e2:.2e}; "
                  f"1/j01^2={ref:.9f}; {dt:.0f}s")


# -- 2 ---------------------------------------------------------------------------------

def test_02_disc_schatten2_three_oracles():
    t0 = time.perf_counter()
    a = disc_schatten(2, 200, 200).value
    b = disc_schatten(2, 400, 400).value
    stable = abs(a - b) / b < 1e-6
    series = a * a
    g = rasterize(Disc((0, 0), 1.0), 0.04)
    eig = trace_power(eigen_sym(assemble(g)), 2)
    e_eig = abs(eig - series) / series
    mc = cyclic_trace_mc(Disc((0, 0), 1.0), 2, MC_N, seed=7)
    z = abs(mc.mean - series) / mc.stderr
    dt = time.perf_counter() - t0
    ok = stable and e_eig < 0.02 and z < 3 and dt <= 300
    assert report(2, ok, "disc Schatten-2 oracles",
                  f"series {series:.10f} (doubling change {abs(a - b) / b:.1e}); eigen {eig:.6f} "
                  f"rel {e_eig:.2e}; MC {mc.mean:.6f}+-{mc.stderr:.1e} ({z:.2f} sigma); {dt:.0f}s")


# -- 3 ---------------------------------------------------------------------------------

def test_03_trace_identity_square():
    sq = harness.STANDARD_DOMAINS["square"]()
    s = eigen_sym(assemble(rasterize(sq, H_FINE)))
    parts, ok = [], True
    for p in (2, 3):
        tr = trace_power(s, p)
        mc = cyclic_trace_mc(sq, p, MC_N, seed=11 + p)
        z = abs(tr - mc.mean) / mc.stderr
        ok &= z < 3
        parts.append(f"p={p}: eigen {tr:.6g} MC {mc.mean:.6g}+-{mc.stderr:.1e} ({z:.2f} sigma)")
    assert report(3, ok, "trace identity on the square", "; ".join(parts))


# -- 4 ---------------------------------------------------------------------------------

def test_04_schatten_disc_maximal(disc_max):
    vs = [v for v in disc_max.verdicts if not math.isinf(v.p)]
    others = [v for v in vs if v.domain != "disc"]
    disc_self = [v for v in vs if v.domain == "disc"]
    ok = all(v.verdict == "PASS" for v in others) and all(abs(v.margin) <= v.budget for v in disc_self)
    assert report(4, ok, "Schatten norms below the disc (p=2,4)", fmt_verdicts(vs))


# -- 5 ---------------------------------------------------------------------------------

def test_05_operator_norm_disc_maximal(disc_max):
    vs = [v for v in disc_max.verdicts if math.isinf(v.p) and v.domain != "disc"]
    ok = all(v.verdict == "PASS" for v in vs)
    assert report(5, ok, "operator norms below 1/j01^2", fmt_verdicts(vs))


# -- 6 ---------------------------------------------------------------------------------

def test_06_equilateral_triangle_maximal():
    tri = {k: harness.STANDARD_DOMAINS[k]() for k in ("equilateral", "right", "thin")}
    rep = harness.verify_triangles(tri, ps=(2, 4), h=H_FINE)
    ok = all(v.verdict == "PASS" for v in rep.verdicts)
    assert report(6, ok, "equilateral triangle maximal", fmt_verdicts(rep.verdicts))


# -- 7 ---------------------------------------------------------------------------------

def test_07_cyclic_integral_square_vs_disc():
    sq = harness.STANDARD_DOMAINS["square"]()
    parts, ok = [], True
    for p in (2, 3, 4):
        v = harness.bll_check(sq, p, MC_N, seed=100 + p, name="square", functionals=False).verdicts[0]
        ok &= v.verdict == "PASS"
        parts.append(f"p={p} {v.verdict} (margin {v.margin:+.3g}, 3se {v.budget:.2g})")
    assert report(7, ok, "cyclic integral square <= disc", "; ".join(parts))


# -- 8 ---------------------------------------------------------------------------------

def test_08_kernel_decomposition():
    r = np.logspace(-3, 3, 6001)
    worst, ok = 0.0, True
    for r0 in (0.5, 1.0, 2.0):
        a = h1(r, r0)
        resid = float(np.max(np.abs(a + h2(r, r0) - kernel_profile(r))))
        worst = max(worst, resid)
        ok &= resid < 1e-12 and bool(np.all(a > 0)) and bool(np.all(np.diff(a) < 0))
    err = abs(f_inf(1.0) + math.log(2) / (2 * math.pi))
    ok &= err < 1e-12
    assert report(8, ok, "kernel decomposition",
                  f"identity residual {worst:.1e}; h1>0 and decreasing; |f_inf(1)+ln2/2pi|={err:.1e}")


# -- 9 ---------------------------------------------------------------------------------

def test_09_rearrangements_exact():
    rng = np.random.default_rng(9)
    ok, n = True, 0
    for dom in (harness.STANDARD_DOMAINS["square"](), harness.STANDARD_DOMAINS["right"](),
                harness.STANDARD_DOMAINS["disc"]()):
        g = rasterize(dom, 0.07)
        for _ in range(5):
            f = ScalarField(g, rng.random(g.count) * rng.integers(0, 2, g.count))
            r = symm_decreasing_rearrange(f)
            ok &= np.array_equal(np.sort(r.values), np.sort(f.values)) and r.l2_sq() == f.l2_sq()
            for ax in "xy":
                s = steiner_field(f, ax)
                F, S = f.as_array(), s.as_array()
                lines = zip(F, S) if ax == "x" else zip(F.T, S.T)
                ok &= all(np.array_equal(np.sort(a), np.sort(b)) for a, b in lines)
                ok &= s.l2_sq() == f.l2_sq()
            m = rng.integers(1, g.count)
            ind = np.zeros(g.count)
            ind[rng.choice(g.count, m, replace=False)] = 1.0
            ri = symm_decreasing_rearrange(ScalarField(g, ind))
            q = np.rint(2 * ri.grid.centers() / ri.grid.h).astype(np.int64)
            order = np.lexsort((np.arange(ri.grid.count), (q * q).sum(axis=1)))
            expect = np.zeros(g.count)
            expect[order[:m]] = 1.0
            ok &= np.array_equal(ri.values, expect)
            n += 1
    assert report(9, ok, "discrete rearrangements", f"{n} random fields: multisets, sum v^2 and "
                  "indicator images exact")


# -- 10 --------------------------------------------------------------------------------

def test_10_triangle_symmetrization():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(200):
        t = Triangle(tuple(map(tuple, rng.uniform(-2, 2, (3, 2)))))
        for side in range(3):
            worst = max(worst, abs(area(steiner_triangle(t, side)) - area(t)) / area(t))
    right = Triangle(((0, 0), (1, 0), (0, 1)))
    final, sweeps = equilateralize(right, 1e-9, 60)
    eq = equilateral_triangle()
    fixed = equilateralize(eq, 1e-9, 60)[1] == 0 and all(
        np.allclose(steiner_triangle(eq, k).array, eq.array, atol=1e-14) for k in range(3))
    ok = worst < 1e-12 and side_spread(final) < 1e-9 and sweeps <= 60 and fixed
    assert report(10, ok, "triangle symmetrization",
                  f"max area drift {worst:.1e}; right triangle spread {side_spread(final):.1e} "
                  f"after {sweeps} sweeps; equilateral fixed point {fixed}")


# -- 11 --------------------------------------------------------------------------------

def test_11_spectral_structure():
    parts, ok = [], True
    for name, make in harness.STANDARD_DOMAINS.items():
        s = eigen_sym(assemble(rasterize(make(), 0.06)))
        k = negative_count(s, 1e-10)
        ok &= k <= 1
        parts.append(f"{name} neg={k}")
    for d in (Disc((0, 0), 0.9), rectangle(1.2, 1.2), Triangle(((-0.8, -0.4), (0.8, -0.4), (0, 0.9)))):
        k = negative_count(eigen_sym(assemble(rasterize(d, 0.04))), 1e-10)
        ok &= k == 0
        parts.append(f"{d.to_json()['type']}-inside neg={k}")
    for name in ("disc", "square"):
        A = assemble(rasterize(harness.STANDARD_DOMAINS[name](), H_FINE))
        diag = first_eigenfunction_diagnostics(eigen_sym(A, want_vectors=True))
        tol = 10 * 1e-12 * np.linalg.norm(A.entries)
        good = diag["sign_consistent"] and diag["gap"] > tol
        ok &= good
        parts.append(f"{name}: sign_consistent={diag['sign_consistent']} "
                     f"(min/max {diag['min_over_max']:+.3f}) gap={diag['gap']:.2e}")
    assert report(11, ok, "spectral structure", "; ".join(parts))


# -- 12 --------------------------------------------------------------------------------

def test_12_bvp_interior():
    rep = harness.bvp_check(Disc((0, 0), 1.0), (0.08, 0.04, 0.02), "one")
    rows = rep.extra["levels"]
    u = rows[1]["u_center"]
    ok = abs(u - 0.25) / 0.25 < 0.02 and rep.extra["monotone_decrease"]
    res = ", ".join(f"{r['residual']:.2e}" for r in rows)
    deep = ", ".join(f"{r['residual_deep']:.2e}" for r in rows)
    assert report(12, ok, "BVP interior check",
                  f"u(0) at h=0.04 = {u:.5f}; residual (stencil >= 3h inside) {res}; "
                  f"at fixed depth {rep.extra['deep_threshold']:.2f}: {deep}")
