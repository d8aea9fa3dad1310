"""``logpot`` command line.

Exit status: 0 on success or PASS, 1 when a verdict is FAIL, 2 on bad input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import disc_oracle, harness, rearrange, trace_mc
from .discretize import DEFAULT_CAP, GridTooFine, assemble
from .geometry import DomainError, Triangle, load_domain, rasterize
from .spectral import eigen_sym, schatten_from_spectrum

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _p_list(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip().lower()
        if tok in ("inf", "infty", "oo"):
            out.append(math.inf)
        elif tok:
            out.append(float(tok))
    if not out:
        raise argparse.ArgumentTypeError("empty p list")
    return out


def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _domain(path):
    if path is None:
        raise UsageError("--domain is required")
    return load_domain(path)


def _domains(paths, default_names):
    if not paths:
        return {k: harness.STANDARD_DOMAINS[k]() for k in default_names}
    return {Path(p).stem: load_domain(p) for p in paths}


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x):
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.17g}"
    return x


def _report_out(args, rep) -> int:
    if args.format == "csv":
        rows = [[v.claim, v.domain, _fmt(v.p), v.route, _fmt(v.value), _fmt(v.reference),
                 _fmt(v.margin), _fmt(v.budget), v.verdict, v.note] for v in rep.verdicts]
        _emit(args, _rows_csv(["claim", "domain", "p", "route", "value", "reference", "margin",
                               "budget", "verdict", "note"], rows))
    else:
        _emit(args, json.dumps(rep.to_json(), indent=2) + "\n")
    if getattr(args, "svg", None):
        write_svg(rep, args.svg)
    return EXIT_FAIL if rep.failed else EXIT_OK


def write_svg(rep, path) -> None:
    """Static bar chart of the eigen-route norms per domain and p."""
    bars = [(f"{e['domain']} p={_fmt(float(e['p']))}", e["value"]) for e in rep.estimates
            if e.get("method") in ("eigen", "disc-oracle")]
    if not bars:
        return
    w, bh, pad = 640, 18, 170
    top = max(v for _, v in bars) or 1.0
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{len(bars) * (bh + 4) + 20}"'
             ' font-family="sans-serif" font-size="11">']
    for i, (label, v) in enumerate(bars):
        y = 10 + i * (bh + 4)
        bw = (w - pad - 80) * v / top
        lines.append(f'<text x="{pad - 6}" y="{y + 13}" text-anchor="end">{label}</text>')
        lines.append(f'<rect x="{pad}" y="{y}" width="{bw:.1f}" height="{bh}" fill="#4a78a8"/>')
        lines.append(f'<text x="{pad + bw + 4:.1f}" y="{y + 13}">{v:.5g}</text>')
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")


# -- commands ------------------------------------------------------------------

def cmd_spectrum(args) -> int:
    g = rasterize(_domain(args.domain), args.h)
    s = eigen_sym(assemble(g, args.cap), want_vectors=args.vectors)
    if args.format == "json":
        obj = {"n": len(s), "h": g.h, "eigenvalues": s.eigenvalues.tolist(),
               "charnums": [_fmt(float(c)) for c in s.charnums]}
        if s.eigenvectors is not None:
            obj["first_eigenvector"] = s.eigenvectors[:, 0].tolist()
        _emit(args, json.dumps(obj) + "\n")
    else:
        _emit(args, s.to_csv())
    return EXIT_OK


def cmd_schatten(args) -> int:
    d = _domain(args.domain)
    rows = []
    if args.method == "mc":
        for p in args.p:
            if math.isinf(p) or not p.is_integer():
                raise UsageError("Monte-Carlo route needs integer p")
            est = trace_mc.cyclic_trace_mc(d, int(p), args.samples, args.seed)
            value = est.mean ** (1 / p) if est.mean > 0 else float("nan")
            rows.append({"p": p, "value": value, "method": "mc-trace", "trace": est.mean,
                         "stderr": est.stderr})
    else:
        s = eigen_sym(assemble(rasterize(d, args.h), args.cap))
        for p in args.p:
            rows.append(schatten_from_spectrum(s, p).to_json())
    if args.format == "json":
        _emit(args, json.dumps([{k: _fmt(v) for k, v in r.items()} for r in rows], indent=2) + "\n")
    else:
        keys = list(rows[0])
        _emit(args, _rows_csv(keys, [[_fmt(r[k]) for k in keys] for r in rows]))
    return EXIT_OK


def cmd_disc_oracle(args) -> int:
    out = []
    for p in args.p:
        est = disc_oracle.disc_schatten(p, args.lmax, args.mmax)
        out.append(est.to_json())
    if args.charnums:
        mus = disc_oracle.disc_charnums(args.lmax, args.mmax)[: args.charnums]
    if args.format == "json":
        obj = {"schatten": out, "truncation": [args.lmax, args.mmax]}
        if args.charnums:
            obj["charnums"] = [{"charnum": mu, "multiplicity": k} for mu, k in mus]
        _emit(args, json.dumps(obj, indent=2) + "\n")
    else:
        text = _rows_csv(["p", "value", "error_bound"],
                         [[r["p"], _fmt(r["value"]), _fmt(r["error_bound"])] for r in out])
        if args.charnums:
            text += "\n" + _rows_csv(["charnum", "multiplicity"], [[_fmt(mu), k] for mu, k in mus])
        _emit(args, text)
    return EXIT_OK


def cmd_trace_mc(args) -> int:
    d = _domain(args.domain)
    res = []
    for p in args.p:
        if math.isinf(p) or not p.is_integer():
            raise UsageError("p must be an integer in [2, 8]")
        res.append(trace_mc.cyclic_trace_mc(d, int(p), args.samples, args.seed).to_json())
    if args.format == "csv":
        _emit(args, _rows_csv(["p", "mean", "stderr", "n", "seed"],
                              [[r["p"], _fmt(r["mean"]), _fmt(r["stderr"]), r["n"], r["seed"]] for r in res]))
    else:
        _emit(args, json.dumps(res, indent=2) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.what == "disc-max":
        rep = harness.verify_disc_max(_domains(args.domain, ("square", "rect2x1", "equilateral", "right")),
                                      args.p, args.h, args.samples, args.seed, cap=args.cap)
    elif args.what == "triangles":
        tri = _domains(args.domain, ("equilateral", "right", "thin"))
        for name, t in tri.items():
            if not isinstance(t, Triangle):
                raise UsageError(f"{name} is not a triangle")
        rep = harness.verify_triangles(tri, args.p, args.h, cap=args.cap)
    else:
        if not args.domain or len(args.domain) != 1:
            raise UsageError("verify bll takes exactly one --domain")
        if len(args.p) != 1 or not args.p[0].is_integer():
            raise UsageError("verify bll takes one integer --p")
        rep = harness.bll_check(load_domain(args.domain[0]), int(args.p[0]), args.samples,
                                args.seed, Path(args.domain[0]).stem)
    return _report_out(args, rep)


def cmd_bvp_check(args) -> int:
    rep = harness.bvp_check(_domain(args.domain), args.h, args.source)
    rows = rep.extra["levels"]
    if args.format == "csv":
        keys = list(rows[0])
        _emit(args, _rows_csv(keys, [[_fmt(r[k]) for k in keys] for r in rows]))
    else:
        _emit(args, json.dumps(rep.to_json(), indent=2) + "\n")
    return EXIT_OK if rep.extra["monotone_decrease"] else EXIT_FAIL


def cmd_decomp_check(args) -> int:
    rmin, rmax, n = args.grid
    rep = harness.decomp_check(args.r0, rmin, rmax, int(n))
    res = rep.extra["results"]
    ok = all(r["passed"] for r in res)
    if args.format == "csv":
        rows = [[_fmt(float(r["r0"])), prop, "PASS" if flag else "FAIL"]
                for r in res for prop, flag in r["properties"].items()]
        _emit(args, _rows_csv(["r0", "property", "result"], rows))
    else:
        _emit(args, json.dumps(rep.to_json(), indent=2) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_symmetrize(args) -> int:
    if args.pgm:
        g = rearrange.read_pgm(args.pgm)
        for ax in args.axes:
            g = rearrange.steiner_domain_raster(g, ax)
        if not args.out:
            raise UsageError("raster mode needs --out for the PGM result")
        rearrange.write_pgm(g, args.out)
        return EXIT_OK
    t = _domain(args.domain)
    if not isinstance(t, Triangle):
        raise UsageError("symmetrize expects a triangle domain or --pgm")
    traj = []
    rearrange.equilateralize(t, args.tol, args.max_sweeps, traj)
    rows = []
    for k, tt, spread in traj:
        rows.append([k, *(f"{c:.17g}" for v in tt.vertices for c in v), f"{spread:.17g}"])
    _emit(args, _rows_csv(["sweep", "x0", "y0", "x1", "y1", "x2", "y2", "spread"], rows))
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="dense assembly size limit")

    ap = argparse.ArgumentParser(prog="logpot", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="eigenvalues of the raster operator")
    s.add_argument("--domain", required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--vectors", action="store_true")
    s.set_defaults(func=cmd_spectrum, fmt="csv")

    s = sub.add_parser("schatten", parents=[common], help="Schatten norms of one domain")
    s.add_argument("--domain", required=True)
    s.add_argument("--h", type=float, default=0.05)
    s.add_argument("--p", type=_p_list, default=[2.0])
    s.add_argument("--method", choices=("eigen", "mc"), default="eigen")
    s.add_argument("--samples", type=int, default=2_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_schatten, fmt="csv")

    s = sub.add_parser("disc-oracle", parents=[common], help="unit-disc values from Bessel zeros")
    s.add_argument("--p", type=_p_list, default=[2.0])
    s.add_argument("--lmax", type=int, default=200)
    s.add_argument("--mmax", type=int, default=200)
    s.add_argument("--charnums", type=int, default=0, metavar="K", help="also list the first K")
    s.set_defaults(func=cmd_disc_oracle, fmt="csv")

    s = sub.add_parser("trace-mc", parents=[common], help="Monte-Carlo cyclic trace")
    s.add_argument("--domain", required=True)
    s.add_argument("--p", type=_p_list, default=[2.0])
    s.add_argument("--samples", type=int, default=2_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_trace_mc, fmt="json")

    s = sub.add_parser("verify", parents=[common], help="inequality experiments")
    s.add_argument("what", choices=("disc-max", "triangles", "bll"))
    s.add_argument("--domain", action="append", help="repeatable; defaults to built-in shapes")
    s.add_argument("--p", type=_p_list, default=[2.0, 4.0])
    s.add_argument("--h", type=float, default=math.sqrt(math.pi) / 60)
    s.add_argument("--samples", type=int, default=0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--svg", help="bar chart of the norms")
    s.set_defaults(func=cmd_verify, fmt="json")

    s = sub.add_parser("bvp-check", parents=[common], help="finite-difference Laplacian of L f")
    s.add_argument("--domain", required=True)
    s.add_argument("--h", type=_floats, default=[0.08, 0.04, 0.02])
    s.add_argument("--source", choices=sorted(harness.SOURCES), default="one")
    s.set_defaults(func=cmd_bvp_check, fmt="json")

    s = sub.add_parser("decomp-check", parents=[common], help="kernel split properties")
    s.add_argument("--r0", type=_floats, default=[0.5, 1.0, 2.0])
    s.add_argument("--grid", type=_floats, default=[1e-3, 1e3, 2001], help="rmin,rmax,n")
    s.set_defaults(func=cmd_decomp_check, fmt="json")

    s = sub.add_parser("symmetrize", parents=[common], help="triangle or raster symmetrization")
    s.add_argument("--domain")
    s.add_argument("--pgm", help="0/1 mask in P2 format (raster mode)")
    s.add_argument("--axes", default="x", help="sequence of x/y Steiner steps, e.g. xyx")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--max-sweeps", type=int, default=60)
    s.set_defaults(func=cmd_symmetrize, fmt="csv")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.format is None:
        args.format = args.fmt
    if args.command == "verify" and args.samples and args.samples < 10_000 and args.what != "triangles":
        ap.error("--samples must be at least 10000")
    try:
        return args.func(args)
    except (UsageError, DomainError, GridTooFine, json.JSONDecodeError, OSError, ValueError) as exc:
        print(f"logpot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except rearrange.SymmetrizationError as exc:
        print(f"logpot: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
