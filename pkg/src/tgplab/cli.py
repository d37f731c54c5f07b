"""Command-line entry point: ``tgplab <subcommand> [options] [key=value ...]``.

Exit codes: 0 success, 1 numerical/runtime failure (including a failed
check), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import svg
from .config import load_config
from .errors import ConfigError
from .spectrum import KernelSpec, asymptotic_ratio, eigenvalue, eigenvalue_table

SUBCOMMANDS = ("spectrum", "verify", "rate", "w2", "concentration", "smallball", "denominator", "figure1")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser():
    p = _Parser(prog="tgplab", description="Truncated-GP spectral toolkit and Monte Carlo studies.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("overrides", nargs="*", metavar="key=value", help="config overrides")
    p.add_argument("--config", help="flat key=value or JSON config file")
    p.add_argument("--out-dir", help="output directory (default: $TGPLAB_OUT_DIR, else ./tgplab-out)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, help="master seed (overrides the config value)")
    p.add_argument("--plot", action="store_true", help="also write SVG charts")
    p.add_argument("--jobs", type=int, default=ex.default_jobs(), help="worker processes (default: CPU count)")
    p.add_argument("--timings", action="store_true", help="record wall-clock timings in JSON output")
    return p


# each runner returns (csv_rows, json_results, ok, charts)

def _run_spectrum(cfg, jobs):
    rows = []
    for a in cfg.spectrum_a:
        spec = KernelSpec(a=a, b=cfg.b, sigma2=cfg.sigma2)
        j = np.arange(1, cfg.spectrum_jmax + 1)
        for jj, lam, ratio in zip(j, eigenvalue(spec, j), asymptotic_ratio(spec, j)):
            rows.append({"a": a, "j": int(jj), "lambda": float(lam), "asymptotic_ratio": float(ratio),
                         "c": spec.c, "decay_ratio": spec.decay_ratio})
    return rows, {"eigenvalues": rows}, True, {}


def _figure1_chart(rows, a_values):
    panels = []
    for lo, hi in ((1, 20), (21, 50)):
        series = []
        for a in a_values:
            pts = [(r["j"], r["lambda"]) for r in rows if r["a"] == a and lo <= r["j"] <= hi]
            series.append((f"a = {a:g}", [p[0] for p in pts], [p[1] for p in pts], False))
        panels.append({"series": series, "title": f"eigenvalues, j = {lo}..{hi}", "xlabel": "j",
                       "ylabel": "lambda_j", "logy": True})
    return svg.line_chart(panels)


def _run_figure1(cfg, jobs):
    a_values = (1.0, 2.0, 4.0, 8.0)
    rows = eigenvalue_table(a_values, 50, cfg.b)
    ratios = [KernelSpec(a=a, b=cfg.b).decay_ratio for a in a_values]
    ok = all(r2 > r1 for r1, r2 in zip(ratios, ratios[1:]))
    results = {"eigenvalues": rows, "decay_ratios": dict(zip([str(a) for a in a_values], ratios)),
               "decay_ratio_increasing": ok}
    return rows, results, ok, {"figure1.svg": _figure1_chart(rows, a_values)}


def _run_verify(cfg, jobs):
    from .verify import run_all

    rows = run_all()
    return rows, {"checks": rows}, all(r["passed"] for r in rows), {}


def _run_rate(cfg, jobs):
    curve = ex.run_rate_experiment(cfg, jobs=jobs)
    fit = curve.slope_fit
    charts = {}
    if fit:
        fitted = [float(np.exp(fit["intercept"]) * n ** fit["slope"]) for n in curve.n_values]
        charts["rate.svg"] = svg.line_chart([{
            "series": [("mean L2(rho) error", curve.n_values, curve.mean_error, False),
                       (f"fit, slope {fit['slope']:.3f}", curve.n_values, fitted, True)],
            "title": "posterior-mean error vs n", "xlabel": "n", "ylabel": "error", "logx": True, "logy": True}])
    summary = {k: v for k, v in dataclasses.asdict(curve).items() if k != "cells"}
    ok = all(p["bookkeeping_ok"] and p["consequences_ok"] for p in curve.per_n)
    return curve.cells, summary, ok, charts


def _run_w2(cfg, jobs):
    res = ex.run_w2_experiment(cfg, jobs=jobs)
    t = res["table"]
    chart = svg.line_chart([{
        "series": [("lhs (MC)", [r["n"] for r in t], [r["lhs_mc"] for r in t], False),
                   ("lhs without event indicator", [r["n"] for r in t], [r["lhs_unrestricted"] for r in t], False),
                   ("rhs", [r["n"] for r in t], [r["rhs"] for r in t], True)],
        "title": "squared W2 bound", "xlabel": "n", "ylabel": "value", "logx": True, "logy": True}])
    return res["cells"], {"table": t}, all(r["consequences_ok"] for r in t), {"w2.svg": chart}


def _run_concentration(cfg, jobs):
    res = ex.run_concentration_experiment(cfg, jobs=jobs)
    ok = all(r["bound_respected"] and r["consequences_ok"] for r in res["table"])
    return res["cells"], {"table": res["table"]}, ok, {}


def _run_denominator(cfg, jobs):
    stats = ex.run_denominator_experiment(cfg, jobs=jobs)
    summary = {k: v for k, v in dataclasses.asdict(stats).items() if k != "cells"}
    return stats.cells, summary, True, {}


def _run_smallball(cfg, jobs):
    res = ex.run_smallball_experiment(cfg, jobs=jobs)
    ok = all(r["respected"] for r in res["table"]) and all(d["agree"] for d in res["dirichlet"])
    return res["table"], res, ok, {}


RUNNERS = {
    "spectrum": _run_spectrum,
    "figure1": _run_figure1,
    "verify": _run_verify,
    "rate": _run_rate,
    "w2": _run_w2,
    "concentration": _run_concentration,
    "denominator": _run_denominator,
    "smallball": _run_smallball,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_intermixed_args(argv)
    except _UsageError as exc:
        print(f"tgplab: usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.jobs < 1:
        print("tgplab: usage error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config, overrides, mode=args.subcommand)
    except ConfigError as exc:
        print(f"tgplab: config error: {exc}", file=sys.stderr)
        return 2
    out_dir = Path(args.out_dir or os.environ.get("TGPLAB_OUT_DIR") or "tgplab-out")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"tgplab: cannot create output directory {out_dir}: {exc.strerror}", file=sys.stderr)
        return 2
    with open(out_dir / "resolved-config.json", "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    start = time.perf_counter()
    try:
        rows, results, ok, charts = RUNNERS[args.subcommand](cfg, args.jobs)
    except ConfigError as exc:
        print(f"tgplab: config error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"tgplab: {args.subcommand} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - start

    if args.format == "csv":
        ex.write_csv(out_dir / "results.csv", rows)
    else:
        timings = {"total_seconds": elapsed} if args.timings else {}
        ex.write_json(out_dir / "results.json", cfg.to_dict(), results, timings)
    if args.plot or args.subcommand == "figure1":
        for name, text in charts.items():
            svg.write(out_dir / name, text)
    if not ok:
        print(f"tgplab: {args.subcommand}: one or more checks failed (see {out_dir})", file=sys.stderr)
        return 1
    print(f"tgplab: {args.subcommand} finished; results in {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
