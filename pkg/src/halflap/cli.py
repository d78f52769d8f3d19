"""Command-line entry point: ``python -m halflap <command> ...``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import genfunc
from .calculus import SpectralFunction, compare_zero_extension, eigenvalues
from .experiments import ConfigError, emit_csv, emit_svg, load_config, run_case
from .lattice import ContinuumField, ReferenceGrid

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="halflap", description=__doc__)
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--out-dir", default=None, help="directory for CSV/SVG output")
    p.add_argument("--threads", type=int, default=1, help="worker threads for (z, h) sweeps")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate-genfunc", help="certify a generating function")
    v.add_argument("--which", default="all", choices=["all", *sorted(genfunc.GENERATORS)])
    v.add_argument("--d", type=int, default=1)

    r = sub.add_parser("rate", help="run a convergence study from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--svg", action="store_true", help="also write a log-log plot")

    s = sub.add_parser("spectrum", help="print the lowest eigenvalues of a truncated operator")
    s.add_argument("--operator", default="dirichlet", choices=["full", "dirichlet", "neumann"])
    s.add_argument("--N", type=int, default=8)
    s.add_argument("--h", type=float, default=1.0)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--count", type=int, default=10)

    c = sub.add_parser("compare-fractional", help="odd versus zero extension for Psi_s")
    c.add_argument("--s", type=float, nargs="+", default=[0.5, 1.0, 1.5, 2.0])
    c.add_argument("--distances", type=float, nargs="+", default=[1.0, 2.0, 4.0, 6.0])
    c.add_argument("--L", type=float, default=16.0)
    c.add_argument("--M", type=int, default=1024)
    return p


def _validate(args):
    names = sorted(genfunc.GENERATORS) if args.which == "all" else [args.which]
    ok = True
    for name in names:
        cert = genfunc.certificate(genfunc.get(name), args.d)
        ok &= cert["orthonormality_deviation"] <= 1e-12 and cert["support_ok"]
        print(json.dumps(cert, indent=2))
    return EXIT_OK if ok else EXIT_FAIL


def _rate(args):
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    out = Path(args.out_dir or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = run_case(config, threads=args.threads)
    data, rates = emit_csv(report, out / f"{config.label()}.csv")
    if args.svg:
        emit_svg(report, out / f"{config.label()}.svg")
    for c in report.cells:
        if c.error:
            print(f"cell z={c.z} h={c.h:g}: {c.error}", file=sys.stderr)
    for r in report.rates:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {config.case} d={config.d} z={r.z} slope={r.slope:.4f} "
              f"r2={r.r2:.5f} expected={r.expected:.4g} band=[{r.lower:.3g}, {r.upper:.3g}]")
    print(f"wrote {data} and {rates}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _spectrum(args):
    lam = np.sort(np.ravel(eigenvalues(args.operator, args.N, args.h, args.d)))
    for value in lam[: args.count]:
        print(f"{value:.12g}")
    return EXIT_OK


def _compare(args):
    ref = ReferenceGrid(1, args.L, args.M)
    x = ref.half_coordinates()
    print("s,distance,difference,relative")
    for s in args.s:
        psi = SpectralFunction.power(s)
        for a in args.distances:
            f = ContinuumField(ref, (x - a) * np.exp(-((x - a) ** 2)), half=True)
            diff = compare_zero_extension(psi, f)
            print(f"{s:g},{a:g},{diff:.6e},{diff / f.norm():.6e}")
    return EXIT_OK


COMMANDS = {
    "validate-genfunc": _validate,
    "rate": _rate,
    "spectrum": _spectrum,
    "compare-fractional": _compare,
}


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    os.environ.setdefault("OMP_NUM_THREADS", str(args.threads))
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
