"""Command-line front end.

Exit codes: 0 all checks passed, 1 a check ran and failed, 2 usage or data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .cascade import DEFAULT_DEPTH, ScalingTransform, sample_export
from .completion import align_sweep, complete_q2
from .errors import TorusFilterError
from .fileio import parse_dilation, read_filter_file, read_json, write_filter_file, write_json
from .filters import FilterBank, validate_family, validate_low_pass

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _grid(arg: str | None) -> tuple[int, ...] | None:
    if arg is None:
        return None
    try:
        g = tuple(int(s) for s in arg.replace("x", ",").split(",") if s.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {arg!r}") from exc
    if not g or min(g) < 1:
        raise argparse.ArgumentTypeError(f"bad grid {arg!r}")
    return g


def _emit(obj, out: str | None) -> None:
    print(json.dumps(obj))
    if out:
        write_json(out, obj)


def cmd_lattice(args) -> int:
    A = parse_dilation(read_json(args.file))
    reps = [list(map(int, p)) for p in A.coset_representatives]
    F = [[str(c) for c in w] for w in A.dual_group]
    print(f"n = {A.n}")
    print(f"q = {A.q}")
    print("coset representatives: " + "; ".join(" ".join(map(str, p)) for p in reps))
    print("dual group F: " + "; ".join(" ".join(w) for w in F))
    _emit({"n": A.n, "q": A.q, "coset_representatives": reps, "dual_group": F}, args.out)
    return EXIT_PASS


def cmd_validate(args) -> int:
    ff = read_filter_file(args.file)
    bank = ff.bank.as_unnormalized()
    rep = validate_low_pass(bank.m[0], ff.A, args.tol, args.grid)
    checks = list(rep.checks)
    if len(bank) > 1:
        checks += validate_family(bank, args.tol, args.grid).checks
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.condition}  residual={c.residual:.3e}")
    for note in rep.notes:
        print(f"note: {note}")
    _emit([c.to_json() for c in checks], args.out)
    return EXIT_PASS if all(c.passed for c in checks) else EXIT_FAIL


def cmd_complete(args) -> int:
    ff = read_filter_file(args.file)
    A = ff.A
    h0 = ff.bank.h[0]
    if args.method == "q2":
        h1 = complete_q2(h0, A, shape=args.grid)
        bank = FilterBank(A, (h0, h1), normalized=True)
        rep = validate_family(bank, args.tol, args.grid)
        out_bank = bank if ff.normalized else bank.as_unnormalized()
        if args.out:
            write_filter_file(args.out, A, out_bank.filters, out_bank.normalized)
        print(json.dumps({"method": "q2", "gram_residual": rep.residual, "pass": rep.passed}))
        return EXIT_PASS if rep.passed else EXIT_FAIL
    report = align_sweep(h0, A, shape=args.grid, jump_tol=args.jump_tol)
    out = report.to_json()
    if report.bank is not None and args.out:
        b = report.bank if ff.normalized else report.bank.as_unnormalized()
        write_filter_file(args.out, A, b.filters, b.normalized, representation="grid")
    elif args.out:
        write_json(args.out, out)
    print(json.dumps(out))
    return EXIT_PASS if report.closed else EXIT_FAIL


def cmd_cascade(args) -> int:
    ff = read_filter_file(args.file)
    m = ff.bank.m
    S = ScalingTransform(m[0], ff.A, args.depth)
    box = args.box if args.box is not None else [-4.0, 4.0]
    if args.out is None:
        raise TorusFilterError("cascade needs --out for the CSV")
    rep = sample_export(S, box, args.res, args.out, wavelets=m[1:] if args.wavelets else ())
    print(json.dumps(rep.to_json()))
    return EXIT_PASS


def cmd_obstruct(args) -> int:
    from . import obstruction as ob
    from .torusfn import bracket_values

    if args.check == "identities":
        res = ob.check_identities(args.samples, args.seed)
        tol = {"pinch_boundary": 1e-12}
        ok = {k: v < tol.get(k, 1e-11) for k, v in res.items()}
        for k, v in res.items():
            print(f"{'PASS' if ok[k] else 'FAIL'}  {k}  residual={v:.3e}")
        _emit({"residuals": res, "pass": all(ok.values())}, args.out)
        return EXIT_PASS if all(ok.values()) else EXIT_FAIL
    if args.build_h0:
        res = args.res or ob.DEFAULT_RESOLUTION
        h0 = ob.assemble_h0(res, calibrated=not args.uncalibrated)
        A = ob.obstruction_dilation()
        g = h0.grid
        br = float(np.abs(bracket_values(g, g, A.dual_group, primed=True) - 1).max())
        if args.out:
            write_filter_file(args.out, A, [h0], normalized=True, representation="grid")
        ok = br < 1e-9
        print(json.dumps({"grid": list(g.shape), "bracket_residual": br, "h0_at_0": [g.flat[0].real, g.flat[0].imag],
                          "pass": ok}))
        return EXIT_PASS if ok else EXIT_FAIL
    if args.demo_failure:
        ladder = (tuple(args.res),) if args.res else ob.OBSTRUCTION_LADDER
        rep = ob.demo_completion_failure(ladder)
        _emit(rep, args.out)
        return EXIT_PASS
    raise TorusFilterError("choose one of --check identities, --build-h0, --demo-failure")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10, help="pass/fail tolerance")
    common.add_argument("--grid", type=_grid, default=None, help="grid sizes, e.g. 32 or 9x8x8x8x8")
    common.add_argument("--seed", type=int, default=0, help="seed for random samples")
    common.add_argument("--out", default=None, help="output file (written atomically)")

    p = argparse.ArgumentParser(prog="torusfilters", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lattice", parents=[common], help="coset representatives and dual group")
    s.add_argument("file", help="JSON file with a 'dilation' matrix (or a bare matrix)")
    s.set_defaults(func=cmd_lattice)

    s = sub.add_parser("validate", parents=[common], help="check low-pass / family conditions")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("complete", parents=[common], help="build high-pass filters")
    s.add_argument("file")
    s.add_argument("--method", choices=["q2", "sweep"], default="q2")
    s.add_argument("--jump-tol", type=float, default=0.25)
    s.set_defaults(func=cmd_complete)

    s = sub.add_parser("cascade", parents=[common], help="sample the scaling-function transform")
    s.add_argument("file")
    s.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    s.add_argument("--box", type=float, nargs="+", default=None,
                   help="lo hi (all axes) or lo1 hi1 lo2 hi2 ...")
    s.add_argument("--res", type=int, nargs="+", default=[512])
    s.add_argument("--wavelets", action="store_true", help="also sample the wavelet transforms")
    s.set_defaults(func=cmd_cascade)

    s = sub.add_parser("obstruct", parents=[common], help="the det-3 example on T^5")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--check", choices=["identities"])
    g.add_argument("--build-h0", action="store_true")
    g.add_argument("--demo-failure", action="store_true")
    s.add_argument("--res", type=int, nargs="+", default=None)
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--uncalibrated", action="store_true")
    s.set_defaults(func=cmd_obstruct)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_PASS
    if getattr(args, "box", None) is not None:
        b = args.box
        if len(b) % 2:
            print("error: --box needs pairs lo hi", file=sys.stderr)
            return EXIT_ERROR
        args.box = [b[i:i + 2] for i in range(0, len(b), 2)] if len(b) > 2 else b
    if getattr(args, "res", None) is not None and args.command == "cascade" and len(args.res) == 1:
        args.res = args.res[0]
    try:
        return args.func(args)
    except (TorusFilterError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
