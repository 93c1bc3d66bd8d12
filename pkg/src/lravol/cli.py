"""Command-line surface.

Subcommands: estimate (full pipeline on an .smt2 file), estimate-polytopes
(skip the frontend, read a polytope-union file), decompose (emit the union
file), gen (synthetic instances), oracle (ground-truth volumes).  Stdout
carries one JSON report; human logs go to stderr.  Exit codes: 0 ok,
2 timeout, 3 unsupported input / usage, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench import BenchSpec, exact_box_union, generate, grid_mc_union
from .errors import (CubeLimitError, LatticeTooCoarseError, LpFailureError,
                     LravolError, PrecisionOverflowError, SamplerPinchError,
                     SmtParseError, UnboundedPolytopeError,
                     VolumeConvergenceError)
from .pipeline import (Options, PipelineTimeout, SCHEMA, decompose_to_union_text,
                       report_json, run_polytopes, run_text)
from .polytope import UnionFormatError, read_union_file

EXIT_OK = 0
EXIT_TIMEOUT = 2
EXIT_UNSUPPORTED = 3
EXIT_NUMERICAL = 4


def _add_estimate_flags(p):
    p.add_argument("--epsilon", type=float, default=0.8)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--timeout", type=float, default=None, metavar="SEC")
    p.add_argument("--jobs", type=int, default=1, metavar="K")
    p.add_argument("--precision-override", type=int, default=None, metavar="INT")
    p.add_argument("--log-base", choices=["e", "2", "10"], default="e")
    p.add_argument("--cube-limit", type=int, default=None)
    p.add_argument("-o", "--output", default=None, metavar="PATH")


def build_parser():
    ap = argparse.ArgumentParser(prog="lravol",
                                 description="Volume estimation for QF_LRA formulas")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate the volume of an .smt2 formula")
    p.add_argument("file")
    _add_estimate_flags(p)
    p.add_argument("--cubes-only", action="store_true",
                   help="emit the polytope-union decomposition and stop")

    p = sub.add_parser("estimate-polytopes",
                       help="estimate the union volume of a polytope-union file")
    p.add_argument("file")
    _add_estimate_flags(p)

    p = sub.add_parser("decompose", help="emit the polytope-union decomposition")
    p.add_argument("file")
    p.add_argument("--cube-limit", type=int, default=None)
    p.add_argument("-o", "--output", default=None, metavar="PATH")

    p = sub.add_parser("gen", help="generate a synthetic .smt2 instance")
    p.add_argument("--shape", choices=["cube", "simplex"], default="cube")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--axis-aligned", action="store_true")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("-o", "--output", default=None, metavar="PATH")

    p = sub.add_parser("oracle", help="ground-truth volume of a polytope-union file")
    p.add_argument("file")
    p.add_argument("--mc", action="store_true",
                   help="Monte Carlo oracle for general shapes")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    return ap


def _emit(text: str, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _fail(status: str, message: str, code: int) -> int:
    print(f"lravol: {message}", file=sys.stderr)
    _emit(report_json({"schema": SCHEMA, "status": status, "error": message}), None)
    return code


def _check_eps_delta(args) -> str | None:
    if not (0.0 < args.epsilon <= 1.0):
        return f"--epsilon must lie in (0, 1], got {args.epsilon}"
    if not (0.0 < args.delta <= 1.0):
        return f"--delta must lie in (0, 1], got {args.delta}"
    if args.jobs < 1:
        return f"--jobs must be >= 1, got {args.jobs}"
    return None


def _options(args) -> Options:
    return Options(eps=args.epsilon, delta=args.delta, seed=args.seed,
                   jobs=args.jobs, timeout=args.timeout,
                   preci_override=args.precision_override,
                   log_base=args.log_base, cube_limit=args.cube_limit)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "estimate":
            bad = _check_eps_delta(args)
            if bad:
                return _fail("usage-error", bad, EXIT_UNSUPPORTED)
            with open(args.file) as fh:
                text = fh.read()
            if args.cubes_only:
                _emit(decompose_to_union_text(text, args.cube_limit), args.output)
                return EXIT_OK
            report = run_text(text, _options(args))
            _emit(report_json(report), args.output)
            return EXIT_OK

        if args.command == "estimate-polytopes":
            bad = _check_eps_delta(args)
            if bad:
                return _fail("usage-error", bad, EXIT_UNSUPPORTED)
            with open(args.file) as fh:
                polys = read_union_file(fh.read())
            report = run_polytopes(polys, _options(args))
            _emit(report_json(report), args.output)
            return EXIT_OK

        if args.command == "decompose":
            with open(args.file) as fh:
                text = fh.read()
            _emit(decompose_to_union_text(text, args.cube_limit), args.output)
            return EXIT_OK

        if args.command == "gen":
            spec = BenchSpec(n=args.n, m=args.m, shape=args.shape, seed=args.seed,
                             axis_aligned=args.axis_aligned, scale=args.scale)
            _emit(generate(spec).text, args.output)
            return EXIT_OK

        if args.command == "oracle":
            with open(args.file) as fh:
                polys = read_union_file(fh.read())
            if args.mc:
                rng = np.random.default_rng(args.seed)
                vol, ci = grid_mc_union(polys, args.samples, rng)
                _emit(report_json({"schema": SCHEMA, "status": "ok",
                                   "volume": vol, "ci99": ci,
                                   "samples": args.samples}), None)
            else:
                boxes = [_as_box(p, i) for i, p in enumerate(polys)]
                vol = exact_box_union(boxes)
                _emit(report_json({"schema": SCHEMA, "status": "ok",
                                   "volume": vol}), None)
            return EXIT_OK

        raise AssertionError(args.command)

    except FileNotFoundError as exc:
        return _fail("unsupported-input", str(exc), EXIT_UNSUPPORTED)
    except (SmtParseError, UnionFormatError) as exc:
        return _fail("unsupported-input", str(exc), EXIT_UNSUPPORTED)
    except UnboundedPolytopeError as exc:
        return _fail("unsupported-input", f"unbounded region: {exc}", EXIT_UNSUPPORTED)
    except PipelineTimeout as exc:
        return _fail("timeout", str(exc), EXIT_TIMEOUT)
    except (LpFailureError, VolumeConvergenceError, SamplerPinchError,
            LatticeTooCoarseError, PrecisionOverflowError, CubeLimitError) as exc:
        return _fail("numerical-failure", str(exc), EXIT_NUMERICAL)
    except (LravolError, ValueError) as exc:
        return _fail("unsupported-input", str(exc), EXIT_UNSUPPORTED)


def _as_box(poly, index):
    """Rows of +-e_k only; anything else cannot feed the exact box oracle."""
    n = poly.dim
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    for row, beta in zip(poly.A, poly.b):
        nz = np.flatnonzero(row)
        if nz.size != 1:
            raise LravolError(
                f"polytope {index} is not axis-aligned; use --mc for general shapes")
        k = int(nz[0])
        if row[k] > 0:
            hi[k] = min(hi[k], beta / row[k])
        else:
            lo[k] = max(lo[k], beta / row[k])
    if np.any(np.isinf(lo)) or np.any(np.isinf(hi)):
        raise UnboundedPolytopeError(f"box {index} lacks a bound")
    return lo, hi


if __name__ == "__main__":
    sys.exit(main())
