"""Command-line frontend.

Subcommands: family, cascade, classify, scan, factor.  Exit codes: 0 on
success, 2 for usage errors, 3 for invalid input data, 4 when a
classification is numerically ambiguous.  All floating-point output uses 17
significant digits, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import cascade as casc
from . import waveclass
from .cuntzrep import (
    AmbiguousRankError,
    classify,
    lambda0,
    minimal_subspace,
    window_size,
)
from .filterbank import FilterBank, filters_from_loop, loop_from_filters
from .loopgroup import (
    FactorizationFailed,
    MatrixLoop,
    TwoParamPoint,
    factorize,
    two_param_coeffs,
    validate_loop,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BAD_INPUT = 3
EXIT_AMBIGUOUS = 4

MAX_LEVELS = 24


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _fail(msg: str, code: int) -> int:
    print(f"wll: {msg}", file=sys.stderr)
    return code


def _load_loop(path: str) -> MatrixLoop:
    try:
        loop = MatrixLoop.load(path)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read loop file {path!r}: {exc}") from exc
    report = validate_loop(loop)
    if not report.valid:
        raise ValueError(
            f"loop file {path!r} is not unitary "
            f"(residual {report.unitarity_residual:.3e})"
        )
    return loop


def _family_bank(theta: float, rho: float) -> FilterBank:
    return FilterBank.from_lowpass(two_param_coeffs(TwoParamPoint(theta, rho)))


def cmd_family(args) -> int:
    a = two_param_coeffs(TwoParamPoint(args.theta, args.rho))
    bank = FilterBank.from_lowpass(a)
    loop = loop_from_filters(bank)
    flags = casc.divergence_flags(a)
    for k, v in enumerate(a):
        print(f"a{k} = {_fmt(v)}")
    print(f"lambda0 = {_fmt(lambda0(loop))}")
    print(f"diverges_left = {int(flags.diverges_left)}")
    print(f"diverges_right = {int(flags.diverges_right)}")
    print(f"marginal = {int(flags.marginal)}")
    if args.out:
        loop.save(args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_cascade(args) -> int:
    if args.loop:
        try:
            loop = _load_loop(args.loop)
        except ValueError as exc:
            return _fail(str(exc), EXIT_BAD_INPUT)
        if loop.N != 2:
            return _fail("cascade grids are defined for scale-2 loops", EXIT_BAD_INPUT)
        bank = filters_from_loop(loop)
        a = bank.lowpass
        b = bank.highpass
    else:
        bank = _family_bank(args.theta, args.rho)
        a = bank.lowpass
        b = bank.highpass
    if np.max(np.abs(a.imag)) == 0.0:
        a = a.real
        b_real = np.max(np.abs(b.imag)) == 0.0
        b = b.real if b_real else b

    grid = casc.wavelet_run(a, b, args.levels) if args.wavelet else casc.cascade_run(a, args.levels)
    if args.out:
        with open(args.out, "w") as fh:
            casc.write_grid_csv(grid, fh)
    else:
        casc.write_grid_csv(grid, sys.stdout)
    return EXIT_OK


def cmd_classify(args) -> int:
    try:
        loop = _load_loop(args.loop)
    except ValueError as exc:
        return _fail(str(exc), EXIT_BAD_INPUT)
    try:
        cls = classify(loop)
    except AmbiguousRankError as exc:
        return _fail(f"classification is numerically ambiguous: {exc}", EXIT_AMBIGUOUS)

    bank = filters_from_loop(loop)
    report: dict = {
        "lambda0": lambda0(loop),
        "r0": window_size(loop.N, loop.genus),
        "fixed_dim": cls.fixed_dim,
        "classification": cls.tag,
        "moment_order": waveclass.moment_order(bank.m(0)),
    }
    if loop.N == 2:
        dim, _ = minimal_subspace(loop)
        report["minimal_subspace_dim"] = dim
        cohen = waveclass.cohen_classify(bank.m(0))
        report["cohen"] = "strict" if cohen.strict else f"tight{cohen.cycle.length}"
    else:
        report["minimal_subspace_dim"] = None
        report["cohen"] = None
    if cls.tag == "reducible":
        report["diagonal_data"] = {
            "kind": cls.diagonal_structure.kind,
            "d0": cls.diagonal_structure.d0,
            "d1": cls.diagonal_structure.d1,
            "fixed_projection_diagonals": [
                [int(round(float(np.real(p[i, i])))) for i in range(p.shape[0])]
                for p in cls.projections
            ],
        }
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def _scan_chunk(cells):
    return [waveclass.scan_cell(t, r) for t, r in cells]


def cmd_scan(args) -> int:
    if args.step <= 0:
        return _fail("step must be positive", EXIT_USAGE)
    t0, t1, r0, r1 = args.window
    thetas = waveclass._half_open_grid(t0, t1, args.step)
    rhos = waveclass._half_open_grid(r0, r1, args.step)
    cells = [(float(t), float(r)) for t in thetas for r in rhos]

    threads = int(os.environ.get("WLL_THREADS", "1") or "1")
    if threads > 1 and len(cells) > 64:
        chunk = math.ceil(len(cells) / threads)
        parts = [cells[i : i + chunk] for i in range(0, len(cells), chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = [rec for part in pool.map(_scan_chunk, parts) for rec in part]
    else:
        records = _scan_chunk(cells)

    if args.format == "pgm":
        return _write_pgm(records, len(thetas), len(rhos), args)
    if args.out:
        with open(args.out, "w") as fh:
            waveclass.scan_to_csv(records, fh)
    else:
        waveclass.scan_to_csv(records, sys.stdout)
    return EXIT_OK


def _write_pgm(records, nt, nr, args) -> int:
    """8-bit raster of one scan column; a quick look, not an oracle."""
    field = args.field
    if field.startswith("a") and field[1:].isdigit():
        vals = np.array([r.coeffs[int(field[1:])] for r in records])
    elif field == "lambda0":
        vals = np.array([r.lambda0 for r in records])
    elif field == "moment_order":
        vals = np.array([float(r.moment_order) for r in records])
    else:
        return _fail(f"unknown raster field {field!r}", EXIT_USAGE)
    lo, hi = float(vals.min()), float(vals.max())
    span = hi - lo if hi > lo else 1.0
    gray = np.round(255 * (vals - lo) / span).astype(np.uint8).reshape(nt, nr)
    if not args.out:
        return _fail("--format pgm requires --out", EXIT_USAGE)
    with open(args.out, "wb") as fh:
        fh.write(f"P5\n{nr} {nt}\n255\n".encode())
        fh.write(gray.tobytes())
    return EXIT_OK


def cmd_factor(args) -> int:
    try:
        loop = _load_loop(args.loop)
    except ValueError as exc:
        return _fail(str(exc), EXIT_BAD_INPUT)
    try:
        fact = factorize(loop)
    except FactorizationFailed as exc:
        return _fail(f"factorization failed: {exc}", EXIT_BAD_INPUT)
    from .loopgroup import build_loop

    rebuilt = build_loop(fact.V, fact.factors, check=False)
    g = max(loop.genus, rebuilt.genus)
    pad = np.zeros((2, g, loop.N, loop.N), dtype=complex)
    pad[0, : loop.genus] = loop.coeffs
    pad[1, : rebuilt.genus] = rebuilt.coeffs
    residual = float(np.max(np.abs(pad[0] - pad[1])))

    def mat_json(m):
        return [[[_fmt(v.real), _fmt(v.imag)] for v in row] for row in np.asarray(m)]

    print(
        json.dumps(
            {
                "V": mat_json(fact.V),
                "factors": [
                    {"projection": mat_json(p), "exponent": r} for p, r in fact.factors
                ],
                "rebuild_residual": residual,
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wll",
        description="Wavelet filter banks from unitary polynomial loops: "
        "construct, cascade, classify, scan, factor.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family", help="six-tap family coefficients at (theta, rho)")
    p.add_argument("--theta", type=float, required=True, help="angle in radians")
    p.add_argument("--rho", type=float, required=True, help="angle in radians")
    p.add_argument("--out", help="write the loop as JSON")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("cascade", help="scaling/wavelet function grid as CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--loop", help="loop JSON file")
    src.add_argument("--theta", type=float, help="family angle (with --rho)")
    p.add_argument("--rho", type=float, help="family angle (with --theta)")
    p.add_argument("--levels", type=int, required=True, help=f"0..{MAX_LEVELS}")
    p.add_argument("--wavelet", action="store_true", help="emit the detail function")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("classify", help="irreducibility report for a loop")
    p.add_argument("--loop", required=True, help="loop JSON file")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("scan", help="classification scan over the (theta, rho) square")
    p.add_argument("--step", type=float, required=True, help="grid step in radians")
    p.add_argument(
        "--window",
        type=float,
        nargs=4,
        default=[0.0, math.pi, 0.0, math.pi],
        metavar=("T0", "T1", "R0", "R1"),
        help="half-open scan window (default full period)",
    )
    p.add_argument("--out", help="output path (default: stdout, CSV only)")
    p.add_argument("--format", choices=["csv", "pgm"], default="csv")
    p.add_argument("--field", default="lambda0", help="raster column for pgm output")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("factor", help="degree-one factorization of a loop")
    p.add_argument("--loop", required=True, help="loop JSON file")
    p.set_defaults(func=cmd_factor)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "cascade":
        if args.loop is None and args.rho is None:
            ap.error("--theta requires --rho")
        if not (0 <= args.levels <= MAX_LEVELS):
            ap.error(f"--levels must be between 0 and {MAX_LEVELS}")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
