"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 verification failure, 3 internal
invariant failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .generate import random_instance
from .model import InstanceError, InvariantViolation, format_instance, parse_instance
from .oracle import OracleTooLarge, oracle_solve, verify_certificates
from .solver import format_solution, format_stats, parse_solution, solve
from .stats import RunOptions


def _read_instance(path: str):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_instance(text)


def _frac(x) -> str:
    return f"{x.numerator}/{x.denominator}"


def cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    opts = RunOptions(mode=args.mode, anchors=not args.no_anchors,
                      checked=args.check, trace=bool(args.trace))
    out = solve(inst, opts)
    sys.stdout.write(format_solution(inst, out))
    if args.stats:
        sys.stdout.write(format_stats(inst, out))
    if args.trace:
        lines = []
        for ev in out.stats.trace:
            if ev[0] == "path":
                lines.append(f"path {ev[1]} {ev[2]} " + " ".join(map(str, ev[3])))
            else:
                lines.append(f"null {ev[1]}")
        Path(args.trace).write_text("\n".join(lines) + ("\n" if lines else ""))
    if args.check and out.stats.violations:
        for v in out.stats.violations:
            print(f"violation: {v}", file=sys.stderr)
        return 3
    return 0


def cmd_verify(args) -> int:
    inst = _read_instance(args.instance)
    try:
        status, flow, labels, objective = parse_solution(Path(args.solution).read_text(), inst)
    except (ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if status != "OPTIMAL":
        expected = oracle_solve(inst).status
        if expected != status:
            print(f"FAIL: status {status}, oracle says {expected}")
            return 2
        print(f"OK: status {status}")
        return 0
    ok, why = verify_certificates(inst, flow, labels, objective)
    if not ok:
        print(f"FAIL: {why}")
        return 2
    print("OK: certificates verified")
    return 0


def cmd_gen(args) -> int:
    inst = random_instance(args.nodes, args.arcs, args.seed, args.max_b, args.max_gamma,
                           lossy=args.lossy)
    text = format_instance(inst)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_oracle(args) -> int:
    inst = _read_instance(args.instance)
    res = oracle_solve(inst)
    print(f"s {res.status}")
    if res.status == "OPTIMAL":
        print(f"v {_frac(res.objective)}")
        for k in sorted(res.flow):
            a = inst.arcs[k]
            print(f"f {a.tail} {a.head} {_frac(res.flow[k])}")
    return 0


def cmd_report(args) -> int:
    from .report import fitted_exponent, scaling_rows, write_report

    rows = scaling_rows(tuple(args.sizes), tuple(range(args.seeds)), args.density)
    csv_path, png_path = write_report(rows, args.out)
    print(f"wrote {csv_path} and {png_path}")
    print(f"fitted augmentation growth: n^{fitted_exponent(rows):.2f}")
    over = [r for r in rows if r.augmentations > r.augmentation_cap or not r.ops_budget_ok]
    return 3 if over else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genflow", description="exact generalized maximum flow")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("instance")
    s.add_argument("--mode", choices=("fast", "reference"), default="fast")
    s.add_argument("--no-anchors", action="store_true", help="disable the label grid")
    s.add_argument("--check", action="store_true", help="assert invariants after every step")
    s.add_argument("--stats", action="store_true", help="append a stats block")
    s.add_argument("--trace", metavar="PATH", help="write augmentation events to PATH")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution file against an instance")
    v.add_argument("instance")
    v.add_argument("solution")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen", help="write a random instance")
    g.add_argument("--nodes", type=int, default=6)
    g.add_argument("--arcs", type=int, default=12)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-b", type=int, default=20)
    g.add_argument("--max-gamma", type=int, default=10)
    g.add_argument("--lossy", type=float, default=0.0,
                   help="probability of flipping a gain above one")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("oracle", help="solve with the exact simplex oracle")
    o.add_argument("instance")
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("report", help="scaling runs written as CSV and PNG")
    r.add_argument("--out", default="report")
    r.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 40, 80])
    r.add_argument("--seeds", type=int, default=2)
    r.add_argument("--density", type=int, default=3, help="arcs per node")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InstanceError, OSError, OracleTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
