"""Command line frontend.

Every subcommand is a thin adapter over one library operation: parse
arguments, call it, render the answer. Exit status is 0 on success, 1
for domain errors (unparsable terms, bad strategy encodings, validation
rejections), and 2 for resource exhaustion when --strict-fuel is set;
without the flag a fuel-starved run still exits 0 and says so in its
output.
"""

from __future__ import annotations

import argparse
import json
import sys

from .corpus import GenConfig, generate, load_corpus, save_corpus, trace_json
from .engine import (
    CONVERGED,
    DEFAULT_FUEL,
    EngineError,
    derivation_forest,
    evaluate,
    reconstruct_sequence,
)
from .lab import INCONCLUSIVE, compare, compare_corpus, demo_factorial
from .notation import (
    NotationError,
    ReadbackSpec,
    alias_of,
    catalogue,
    defuse,
    fuse,
    parse_spec,
    print_spec,
    validate,
)
from .terms import (
    App,
    FormClass,
    Lam,
    ParseError,
    ResourceLimitError,
    Term,
    Var,
    classify,
    parse_term,
    print_term,
)

_FORM_ORDER = (
    FormClass.NF,
    FormClass.WNF,
    FormClass.HNF,
    FormClass.WHNF,
    FormClass.VHNF,
    FormClass.NEUTRAL,
    FormClass.REDEX,
)


class _Parser(argparse.ArgumentParser):
    # Exit 1 on usage errors; this tool reserves 2 for resource limits.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(args, payload) -> None:
    print(json.dumps(payload, indent=2 if sys.stdout.isatty() else None))


def _all_names(term: Term) -> set[str]:
    names = set()
    stack = [term]
    while stack:
        node = stack.pop()
        cls = node.__class__
        if cls is Var:
            names.add(node.name)
        elif cls is Lam:
            names.add(node.param)
            stack.append(node.body)
        else:
            stack.append(node.operator)
            stack.append(node.operand)
    return names


def _bracketed(term: Term, position) -> str:
    """Render term with the subterm at position wrapped in [...]."""
    spine = []
    node = term
    for letter in position:
        spine.append((node, letter))
        if letter == "F":
            node = node.operator
        elif letter == "A":
            node = node.operand
        else:
            node = node.body
    # A placeholder longer than every identifier in the term can be
    # substituted back out of the printed string without collisions.
    width = max((len(n) for n in _all_names(term)), default=0) + 1
    marker = "m" * width
    rebuilt = Var(marker)
    for parent, letter in reversed(spine):
        if letter == "F":
            rebuilt = App(rebuilt, parent.operand)
        elif letter == "A":
            rebuilt = App(parent.operator, rebuilt)
        else:
            rebuilt = Lam(parent.param, rebuilt)
    return print_term(rebuilt).replace(marker, f"[{print_term(node)}]")


def _status_line(outcome) -> str:
    if outcome.status == CONVERGED:
        return f"{outcome.fuel_used} steps, converged"
    return f"fuel exhausted after {outcome.fuel_used} steps"


def _finish(args, outcome) -> int:
    if outcome.status != CONVERGED and args.strict_fuel:
        return 2
    return 0


def _cmd_eval(args) -> int:
    term = parse_term(args.term)
    outcome = evaluate(parse_spec(args.strategy), term, args.fuel,
                       record_trace=False)
    if args.json:
        _emit(args, trace_json(args.strategy, term, outcome))
    else:
        if outcome.status == CONVERGED:
            print(print_term(outcome.result))
        print(_status_line(outcome))
    return _finish(args, outcome)


def _cmd_trace(args) -> int:
    term = parse_term(args.term)
    outcome = evaluate(parse_spec(args.strategy), term, args.fuel)
    if args.json:
        _emit(args, trace_json(args.strategy, term, outcome))
        return _finish(args, outcome)
    states = reconstruct_sequence(term, outcome.trace)
    for state, event in zip(states, outcome.trace):
        print(_bracketed(state, event.position))
    print(print_term(states[-1]))
    print(_status_line(outcome))
    return _finish(args, outcome)


def _tree_json(node) -> dict:
    out = {
        "kind": node.kind,
        "input": print_term(node.input),
        "output": print_term(node.output),
    }
    if node.contractum is not None:
        out["contractum"] = print_term(node.contractum)
    out["premises"] = [_tree_json(p) for p in node.premises]
    return out


def _print_tree(node, depth=0) -> None:
    line = f"{'  ' * depth}{node.kind}  {print_term(node.input)}"
    line += f"  =>  {print_term(node.output)}"
    print(line)
    for premise in node.premises:
        _print_tree(premise, depth + 1)


def _cmd_tree(args) -> int:
    spec = parse_spec(args.strategy)
    term = parse_term(args.term)
    probe = evaluate(spec, term, args.fuel, record_trace=False)
    if probe.status != CONVERGED:
        if args.json:
            _emit(args, {"status": probe.status, "fuel_used": probe.fuel_used})
        else:
            print(_status_line(probe))
        return _finish(args, probe)
    roots = derivation_forest(spec, term, args.fuel)
    stages = ("eval", "readback") if isinstance(spec, ReadbackSpec) else ("derivation",)
    if args.json:
        _emit(args, {
            "stages": [
                {"stage": name, "tree": _tree_json(root)}
                for name, root in zip(stages, roots)
            ]
        })
        return 0
    for name, root in zip(stages, roots):
        print(f"{name}:")
        _print_tree(root, 1)
    return 0


def _cmd_classify(args) -> int:
    term = parse_term(args.term)
    forms = classify(term)
    names = [f.value for f in _FORM_ORDER if f in forms]
    if args.json:
        _emit(args, {"term": print_term(term), "forms": names})
    else:
        print(", ".join(names) if names else "none")
    return 0


def _witness_json(witness):
    if witness is None:
        return None
    index, (ea, eb) = witness
    def event(e):
        if e is None:
            return None
        return {
            "i": e.step_index,
            "path": "".join(e.position),
            "redex": print_term(e.redex),
            "contractum": print_term(e.contractum),
        }
    return {"index": index, "a": event(ea), "b": event(eb)}


def _cmd_compare(args) -> int:
    term = parse_term(args.term)
    verdict = compare(parse_spec(args.a), parse_spec(args.b), term, args.fuel)
    if args.json:
        _emit(args, {
            "a": args.a,
            "b": args.b,
            "term": print_term(term),
            "verdict": verdict.kind,
            "witness": _witness_json(verdict.witness),
        })
    else:
        print(verdict.kind)
        if verdict.witness is not None:
            index, (ea, eb) = verdict.witness
            print(f"first conflict at step {index}:")
            for label, event in (("a", ea), ("b", eb)):
                if event is None:
                    print(f"  {label}: no event (trace ended)")
                else:
                    path = "".join(event.position) or "root"
                    print(f"  {label}: at {path}  "
                          f"{print_term(event.redex)}  ->  "
                          f"{print_term(event.contractum)}")
    if verdict.kind == INCONCLUSIVE and args.strict_fuel:
        return 2
    return 0


def _cmd_fuse(args) -> int:
    result = fuse(parse_spec(args.spec))
    text = print_spec(result.hybrid)
    alias = alias_of(result.hybrid)
    if args.json:
        _emit(args, {
            "readback": args.spec,
            "hybrid": text,
            "alias": alias,
            "mcr": result.mcr,
        })
    else:
        shown = f"{text} ({alias})" if alias else text
        print(f"{shown}, mcr={'true' if result.mcr else 'false'}")
    return 0


def _cmd_defuse(args) -> int:
    encodings = sorted(print_spec(rb) for rb in defuse(parse_spec(args.spec)))
    if args.json:
        _emit(args, {"hybrid": args.spec, "readbacks": encodings})
    else:
        for encoding in encodings:
            print(encoding)
    return 0


def _cmd_validate(args) -> int:
    report = validate(parse_spec(args.spec))
    if args.json:
        _emit(args, {
            "spec": args.spec,
            "verdict": report.verdict,
            "diagnostics": [
                {"proviso": d.proviso, "message": d.message}
                for d in report.diagnostics
            ],
        })
    else:
        print(report.verdict)
        for diag in report.diagnostics:
            print(f"  {diag.proviso}: {diag.message}")
    return 1 if report.verdict in ("spurious", "invalid") else 0


def _cmd_catalogue(args) -> int:
    rows = catalogue()
    if args.json:
        _emit(args, [
            {
                "alias": row.alias,
                "spec": print_spec(row.spec),
                "classification": row.classification,
                "result_form": row.result_form.value,
            }
            for row in rows
        ])
        return 0
    for row in rows:
        alias = row.alias or ""
        print(f"{alias:<8} {print_spec(row.spec):<12} "
              f"{row.classification:<18} {row.result_form.value}")
    return 0


def _cmd_corpus_gen(args) -> int:
    pool = tuple(p for p in (args.pool or "").split(",") if p)
    cfg = GenConfig(seed=args.seed, size_max=args.size_max, free_var_pool=pool)
    terms = generate(cfg, args.n)
    if args.out:
        save_corpus(args.out, terms)
        if not args.json:
            print(f"wrote {len(terms)} terms to {args.out}")
        else:
            _emit(args, {"n": len(terms), "out": args.out})
        return 0
    if args.json:
        _emit(args, {"terms": [print_term(t) for t in terms]})
    else:
        for term in terms:
            print(print_term(term))
    return 0


def _cmd_corpus_run(args) -> int:
    terms = load_corpus(args.corpus)
    report = compare_corpus(parse_spec(args.a), parse_spec(args.b), terms,
                            fuel=args.fuel, seed=args.seed)
    payload = report.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")
        print(f"wrote report to {args.out}")
        return 0
    if args.json:
        _emit(args, payload)
        return 0
    print(f"{args.a} vs {args.b} on {len(terms)} terms (fuel {args.fuel})")
    for kind, count in sorted(payload["verdicts"].items()):
        print(f"  {kind}: {count}")
    if payload["counterexamples"]:
        print(f"  counterexamples kept: {len(payload['counterexamples'])}")
    return 0


def _cmd_demo_factorial(args) -> int:
    ns = (args.n,) if args.n is not None else (0, 1, 2, 3, 4)
    only = (args.strategy,) if args.strategy else None
    rows = demo_factorial(n_values=ns, fuel=args.fuel, strategies=only)
    if args.json:
        _emit(args, [
            {
                "strategy": row["strategy"],
                "n": row["n"],
                "status": row["status"],
                "result": _render_expected(row["result"]),
                "expected": _render_expected(row["expected"]),
                "ok": row["ok"],
            }
            for row in rows
        ])
        return 0
    for row in rows:
        mark = "ok" if row["ok"] else "MISMATCH"
        print(f"{row['strategy']:<4} n={row['n']}: {row['status']}, {mark}")
    return 0


def _render_expected(value):
    if value is None:
        return None
    if isinstance(value, FormClass):
        return value.value
    return print_term(value)


def _add_common(parser, *, fuel=True, strict=True):
    if fuel:
        parser.add_argument("--fuel", type=int, default=DEFAULT_FUEL,
                            help="contraction budget (default %(default)s)")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable output")
    if strict:
        parser.add_argument("--strict-fuel", action="store_true",
                            help="exit 2 when the budget runs out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lambdalab",
        description="Run, trace, and differentially test lambda calculus "
                    "reduction strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate a term under a strategy")
    p.add_argument("-s", "--strategy", required=True)
    p.add_argument("term")
    _add_common(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("trace", help="show every contraction of a run")
    p.add_argument("-s", "--strategy", required=True)
    p.add_argument("term")
    _add_common(p)
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("tree", help="show the big-step derivation")
    p.add_argument("-s", "--strategy", required=True)
    p.add_argument("term")
    _add_common(p)
    p.set_defaults(func=_cmd_tree)

    p = sub.add_parser("classify", help="name the form families of a term")
    p.add_argument("term")
    _add_common(p, fuel=False, strict=False)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("compare", help="grade two strategies on one term")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("term")
    _add_common(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("fuse", help="fuse a readback encoding to its hybrid")
    p.add_argument("spec")
    _add_common(p, fuel=False, strict=False)
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("defuse", help="readback encodings that fuse to a hybrid")
    p.add_argument("spec")
    _add_common(p, fuel=False, strict=False)
    p.set_defaults(func=_cmd_defuse)

    p = sub.add_parser("validate", help="check an encoding against the provisos")
    p.add_argument("spec")
    _add_common(p, fuel=False, strict=False)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("catalogue", help="list every named strategy")
    _add_common(p, fuel=False, strict=False)
    p.set_defaults(func=_cmd_catalogue)

    p = sub.add_parser("corpus-gen", help="generate a random term corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size-max", type=int, default=30)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--pool", default="",
                   help="comma-separated free variables (empty: closed terms)")
    p.add_argument("--out", help="write to a corpus file instead of stdout")
    _add_common(p, fuel=False, strict=False)
    p.set_defaults(func=_cmd_corpus_gen)

    p = sub.add_parser("corpus-run", help="compare two strategies over a corpus file")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("corpus")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="write the JSON report to a file")
    _add_common(p, strict=False)
    p.set_defaults(func=_cmd_corpus_run)

    p = sub.add_parser("demo-factorial", help="run the factorial strategy table")
    p.add_argument("-s", "--strategy", help="restrict to one table row")
    p.add_argument("--n", type=int, default=None,
                   help="single input instead of 0..4")
    p.add_argument("--fuel", type=int, default=200000)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_demo_factorial)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return 2 if getattr(args, "strict_fuel", False) else 0
    except (ParseError, NotationError, EngineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
