"""Command-line front end.

Exit status: 0 on success (verdicts are printed, not encoded), 2 on usage
errors, 3 on input errors, 4 on resource limits.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from .formula import (
    Atom,
    NotPivotedError,
    ParseError,
    QcspInstance,
    normalize,
    parse_instance,
    parse_relation,
    print_instance,
)
from .game import ResourceLimitError, brute_solve, play_against
from .orders import ArityTooLarge
from .proofsystem import StrategyUndefinedError, ep_move, saturate
from .reductions import parse_dimacs, reduction_text
from .solver import DialectError, compile_to_mplus, solve

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_RESOURCE = 4


def _read(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}")


def _reverse_instance(inst: QcspInstance) -> QcspInstance:
    flip = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "=": "=", "!=": "!="}
    matrix = tuple(
        tuple(Atom(a.left, flip[a.op], a.right) for a in c) for c in inst.general_matrix()
    )
    return QcspInstance(inst.names, inst.quants, matrix)


def _load_instance(args) -> QcspInstance:
    inst = parse_instance(_read(args.file))
    if getattr(args, "reverse_order", False):
        inst = _reverse_instance(inst)
    return inst


def _cmd_solve(args):
    inst = _load_instance(args)
    compiled = compile_to_mplus(normalize(inst))
    verdict = solve(compiled)
    if args.json:
        print(json.dumps(verdict.to_json_dict(), indent=2))
    else:
        print("true" if verdict.value else "false")
    return EXIT_OK


def _cmd_brute(args):
    inst = _load_instance(args)
    verdict = brute_solve(
        inst, max_vars=args.max_vars, max_nodes=args.max_nodes, emit_strategy=args.emit_strategy
    )
    if args.json:
        out = {"verdict": verdict.value, "nodes": verdict.nodes}
        if args.emit_strategy:
            out["strategy"] = verdict.strategy
        print(json.dumps(out, indent=2))
    else:
        print("true" if verdict.value else "false")
        if args.emit_strategy and verdict.strategy is not None and not args.quiet:
            print(json.dumps(verdict.strategy, indent=2))
    return EXIT_OK


def _cmd_derive(args):
    inst = _load_instance(args)
    compiled = compile_to_mplus(normalize(inst))
    facts = saturate(compiled, cap=args.cap)
    if facts.status == "cap":
        print(f"fact cap {args.cap} exceeded", file=sys.stderr)
        return EXIT_RESOURCE
    if args.json:
        print(
            json.dumps(
                {
                    "bottom": facts.status == "bottom",
                    "fact_count": facts.fact_count,
                    "facts": facts.dump().splitlines(),
                },
                indent=2,
            )
        )
    else:
        if not args.quiet:
            sys.stdout.write(facts.dump())
        print("bottom" if facts.status == "bottom" else "no bottom")
    return EXIT_OK


def _cmd_classify(args):
    from .classifier import classify

    rels = [parse_relation(_read(path)) for path in args.files]
    report = classify(rels)
    if args.json:
        print(json.dumps(report.to_json_dict(), indent=2))
    else:
        for key, value in report.to_json_dict().items():
            if key != "witnesses":
                print(f"{key}: {value}")
    return EXIT_OK


def _cmd_compile(args):
    inst = _load_instance(args)
    compiled = compile_to_mplus(normalize(inst))
    text = print_instance(compiled)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_reduce(args):
    cnf = parse_dimacs(_read(args.file))
    text = reduction_text(cnf)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_verify_strategy(args):
    inst = _load_instance(args)
    compiled = compile_to_mplus(normalize(inst))
    facts = saturate(compiled, cap=args.cap)
    if facts.status == "cap":
        print(f"fact cap {args.cap} exceeded", file=sys.stderr)
        return EXIT_RESOURCE
    if facts.status == "bottom":
        print("bottom (instance is false; no strategy to verify)")
        return EXIT_OK
    outcome = play_against(compiled, lambda var, order: ep_move(compiled, facts, order, var))
    if outcome.win:
        print("win")
    else:
        print("loss")
        if not args.quiet:
            print(f"violated: {outcome.violated}")
            for var, move in outcome.trace:
                print(f"  {var} -> {move}")
    return EXIT_OK


def _cmd_selftest(args):
    from . import generators
    from .ohsat import OhConjunction, oh_sat
    from .orders import enumerate_weak_orders, eval_clause

    rng = random.Random(args.seed)
    failures = 0

    checked = 0
    for inst in generators.exhaustive_mplus_instances(3, 2):
        verdict = solve(inst)
        truth = brute_solve(inst).value
        checked += 1
        if verdict.value != truth:
            failures += 1
            print(f"solver/oracle disagreement on: {print_instance(inst)!r}")
    print(f"solver vs game oracle: {checked} exhaustive instances checked")

    for _ in range(args.rounds):
        inst = generators.random_mplus_instance(rng, max_vars=5, max_clauses=5)
        if solve(inst).value != brute_solve(inst).value:
            failures += 1
            print(f"solver/oracle disagreement on: {print_instance(inst)!r}")
    print(f"solver vs game oracle: {args.rounds} random instances checked")

    n = 4
    orders = list(enumerate_weak_orders(n))
    for _ in range(args.rounds):
        clauses, atoms = generators.random_oh_conjunction(rng, n)
        res = oh_sat(OhConjunction(n, tuple(clauses), tuple(atoms)))
        brute = any(
            all(eval_clause(c.atoms(), w.ranks) for c in clauses)
            and all(eval_clause((a,), w.ranks) for a in atoms)
            for w in orders
        )
        if bool(res) != brute:
            failures += 1
            print(f"oh_sat disagreement on {clauses} {atoms}")
    print(f"oh_sat vs weak-order brute force: {args.rounds} conjunctions checked")

    print("selftest: " + ("FAIL" if failures else "ok"))
    return EXIT_OK if failures == 0 else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="ordhorn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, reverse=True):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--quiet", action="store_true", help="verdict-only output")
        if reverse:
            p.add_argument(
                "--reverse-order",
                action="store_true",
                help="flip every order atom before processing (dual instance)",
            )

    p = sub.add_parser("solve", help="decide an instance with the clause-deriving solver")
    p.add_argument("file")
    common(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("brute", help="decide an instance by game-tree search")
    p.add_argument("file")
    p.add_argument("--max-vars", type=int, default=12)
    p.add_argument("--max-nodes", type=int, default=100_000_000)
    p.add_argument("--emit-strategy", action="store_true")
    common(p)
    p.set_defaults(func=_cmd_brute)

    p = sub.add_parser("derive", help="saturate the proof system and dump its facts")
    p.add_argument("file")
    p.add_argument("--cap", type=int, default=10**6)
    common(p)
    p.set_defaults(func=_cmd_derive)

    p = sub.add_parser("classify", help="analyse relation files")
    p.add_argument("files", nargs="+")
    common(p, reverse=False)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("compile", help="compile an instance to pure M+ form")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    common(p)
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("reduce-3cnf", help="emit the complement-of-SAT gadget")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("verify-strategy", help="play the derived strategy against all moves")
    p.add_argument("file")
    p.add_argument("--cap", type=int, default=10**6)
    common(p)
    p.set_defaults(func=_cmd_verify_strategy)

    p = sub.add_parser("selftest", help="run reduced-size cross-validation suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rounds", type=int, default=200)
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, NotPivotedError, DialectError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ResourceLimitError, ArityTooLarge) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except StrategyUndefinedError as exc:
        print(f"strategy undefined (this falsifies well-definedness): {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
