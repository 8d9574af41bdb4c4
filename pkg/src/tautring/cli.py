"""Command-line entry point.

Exit codes: 0 success, 1 invalid input, 2 budget exceeded, 3 invariant violation.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from pathlib import Path

from .errors import BudgetExceeded, InvalidInput, InvariantViolation

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_INVARIANT = 0, 1, 2, 3
DEFAULT_SEED = 20240601


def _default_budget() -> int:
    raw = os.environ.get("TAUTRING_BUDGET")
    if raw is None:
        return 20_000
    try:
        value = int(raw)
    except ValueError:
        raise InvalidInput(f"TAUTRING_BUDGET={raw!r} is not an integer") from None
    return value


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidInput("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so config-file values can fill in whatever flags omit
    common.add_argument("--g", type=int)
    common.add_argument("--n", type=int)
    common.add_argument("--max-edges", type=int)
    common.add_argument("--codim", type=int)
    common.add_argument("--budget", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=("json", "table"))
    common.add_argument("--config", help="JSON file with default values; flags win")

    parser = argparse.ArgumentParser(prog="tautring", description="Exact tautological-ring calculations.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("enumerate", parents=[common], help="list stable graphs or codim-k generators")
    sub.add_parser("gorenstein", parents=[common], help="pairing ranks, socle and known status")
    lem = sub.add_parser("verify-lemmas", parents=[common], help="run the push-pull and elliptic-tail identity suites")
    lem.add_argument("--excess-sign", type=int, choices=(-1, 1), default=-1, help=argparse.SUPPRESS)
    pb = sub.add_parser("pullback", parents=[common], help="Hurwitz-cycle pullback along a loop tower")
    pb.add_argument("--loops", type=int)
    return parser


DEFAULTS = {"threads": 1, "seed": DEFAULT_SEED, "format": "json", "loops": 1}


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    config = _load_config(args.config)
    for key, value in vars(args).items():
        if value is None and key in config:
            setattr(args, key, config[key])
    for key, value in DEFAULTS.items():
        if getattr(args, key, None) is None and hasattr(args, key):
            setattr(args, key, value)
    if args.budget is None:
        args.budget = _default_budget()
    if args.budget <= 0:
        raise InvalidInput("budget must be positive")
    if args.threads <= 0:
        raise InvalidInput("threads must be positive")
    if args.format not in ("json", "table"):
        raise InvalidInput("format must be json or table")
    return args


def _need_gn(args):
    if args.g is None or args.n is None:
        raise InvalidInput("--g and --n are required")
    return args.g, args.n


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_enumerate(args) -> tuple[object, str]:
    from .gorenstein import generator_basis
    from .graphs import enumerate_stable_graphs

    g, n = _need_gn(args)
    if args.codim is not None:
        basis = generator_basis(g, n, args.codim, args.budget)
        data = {"g": g, "n": n, "codim": args.codim, "count": len(basis), "generators": [s.to_json(1) for s in basis]}
        lines = [f"{len(basis)} generators of codimension {args.codim} on M_{g},{n}"]
        lines += [f"  {s.graph.genera} edges={list(s.graph.edges)} kappa={list(s.kappa)} psi={list(s.psi)}" for s in basis]
        return data, "\n".join(lines)
    graphs = enumerate_stable_graphs(g, n, args.max_edges, budget=args.budget)
    data = {"g": g, "n": n, "max_edges": args.max_edges, "count": len(graphs), "graphs": [x.to_json() for x in graphs]}
    lines = [f"{len(graphs)} stable graphs of type ({g},{n})"]
    lines += [f"  genera={x.genera} legs={x.legs} edges={list(x.edges)}" for x in graphs]
    return data, "\n".join(lines)


def cmd_gorenstein(args) -> tuple[object, str]:
    from .gorenstein import betti_numbers, gorenstein_report, known_status

    g, n = _need_gn(args)
    status = known_status(g, n)
    try:
        report = gorenstein_report(g, n, betti_numbers(g, n), budget=args.budget, threads=args.threads)
    except BudgetExceeded as exc:
        raise BudgetExceeded(
            f"pairing matrices for ({g},{n}) are not feasible within budget {args.budget}: {exc}; "
            f"known status: {status.verdict} [{status.source}]"
        ) from None
    lines = [
        f"M_{g},{n}: generators per degree {report['generators']}",
        f"  pairing ranks {report['degree_ranks']}",
        f"  dimensions    {report['dimensions']}",
        f"  socle ok      {report['socle']}",
        f"  defects       {report['defects']}",
        f"  status        {status.verdict} [{status.source}]",
    ]
    return report, "\n".join(lines)


def cmd_verify_lemmas(args) -> tuple[object, str, bool]:
    from .lemmas import verify_lemmas

    results = verify_lemmas(args.g, args.n, excess_sign=args.excess_sign)
    data = [{"name": r.name, "passed": r.passed} for r in results]
    ok = all(r.passed for r in results) and bool(results)
    return {"results": data, "all_passed": ok}, "\n".join(r.line() for r in results), ok


def cmd_pullback(args) -> tuple[object, str]:
    from .gcover import loop_tower, pullback_hurwitz

    if args.loops < 0:
        raise InvalidInput("--loops must be nonnegative")
    a, g = loop_tower(args.loops)
    result = pullback_hurwitz(a, g, budget=args.budget)
    if result.coefficient <= 0:
        raise InvariantViolation("bielliptic coefficient is not positive")
    lines = [f"tower: genus-2 vertex with {args.loops} loops, g={g}, xi=(1^{len(result.xi.xi)})"]
    lines.append(f"{'#':>3}  {'rule':<20} {'matching properties':<45} multiplicity")
    for i, t in enumerate(result.terms):
        c = t.classification
        m = "" if c.multiplicity is None else str(c.multiplicity)
        lines.append(f"{i:>3}  {c.rule:<20} {','.join(c.properties) or '-':<45} {m}")
    lines.append("summary: " + ", ".join(f"{k}={v}" for k, v in result.summary().items() if v))
    lines.append(f"coefficient c = {result.coefficient}")
    return result.to_json(), "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = resolve(args)
        random.seed(args.seed)
        ok = True
        if args.command == "enumerate":
            data, table = cmd_enumerate(args)
        elif args.command == "gorenstein":
            data, table = cmd_gorenstein(args)
        elif args.command == "verify-lemmas":
            data, table, ok = cmd_verify_lemmas(args)
        else:
            data, table = cmd_pullback(args)
        text = json.dumps(data, indent=2, sort_keys=True) if args.format == "json" else table
        if args.out:
            Path(args.out).write_text(text + "\n")
        else:
            print(text)
        return EXIT_OK if ok else EXIT_INVARIANT
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
