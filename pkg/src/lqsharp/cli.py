"""Command-line interface.

Subcommands: elab (Q# to core), check (typechecking diagnostics), run
(seeded execution histograms), equiv (oracle equivalence of two programs),
axioms (randomized equation suite), simplify.  JSON output mode emits one
record per line with stable field names; identical invocations produce
byte-identical output.

Exit codes: 0 success, 1 check/equiv/axiom failure, 2 usage or IO errors.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import syntax as s
from .axioms import AXIOM_IDS, check_axiom, random_params
from .denote import DenoteError, equiv
from .elaborate import ElabError, elaborate_source, entry_command
from .interp import DEFAULT_QUBIT_BUDGET, run
from .parser import ParseError, parse_core
from .printer import context_header, print_term
from .qsharp import QsParseError
from .simplify import simplify
from .typecheck import Signature, TypeCheckError, infer_cmd, infer_expr

__all__ = ["main"]

ENV_BUDGET = "LQSHARP_QUBIT_BUDGET"


def _budget_default() -> int:
    try:
        return int(os.environ.get(ENV_BUDGET, ""))
    except ValueError:
        return DEFAULT_QUBIT_BUDGET


def _emit(records: list[dict], fmt: str, text_lines: list[str]) -> None:
    if fmt == "json":
        for rec in records:
            print(json.dumps(rec, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _diag_text(path: str, kind: str, message: str, span) -> str:
    line = span.line if span is not None else 0
    col = span.col if span is not None else 0
    return f"error:{path}:{line}:{col}: {kind}: {message}"


def _diag_record(path: str, kind: str, message: str, span) -> dict:
    return {
        "kind": kind,
        "file": path,
        "line": span.line if span is not None else 0,
        "col": span.col if span is not None else 0,
        "message": message,
    }


class _Loaded:
    def __init__(self, term, context, signature, is_cmd):
        self.term = term
        self.context = context
        self.signature = signature
        self.is_cmd = is_cmd


def _load(path: str):
    """Parse or elaborate a source file into a closed core term."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".qs"):
        res = elaborate_source(text)
        return _Loaded(res.program, (), res.signature, False), res
    res = parse_core(text)
    term = res.term
    for name, sym in res.symbols.items():
        term = s.subst(s.QLoc(sym), name, term)
    sig = Signature(
        tuple(res.context)
        + tuple(q for q in res.symbols.values() if q not in res.context)
    )
    return _Loaded(term, res.context, sig, isinstance(term, s.CoreCmd)), None


def cmd_elab(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        res = elaborate_source(text)
    except (QsParseError, ElabError) as e:
        span = getattr(e, "span", None)
        _emit(
            [_diag_record(args.file, type(e).__name__, str(e), span)],
            args.format,
            [_diag_text(args.file, type(e).__name__, str(e), span)],
        )
        return 1
    body = context_header(res.signature) + print_term(res.program) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body)
    _emit(
        [
            {
                "program": print_term(res.program),
                "context": [q.display_name for q in res.signature],
                "callables": res.order,
            }
        ],
        args.format,
        [body.rstrip("\n")],
    )
    return 0


def cmd_check(args) -> int:
    try:
        loaded, _ = _load(args.file)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ParseError, QsParseError, ElabError) as e:
        span = getattr(e, "span", None)
        kind = type(e).__name__
        _emit(
            [_diag_record(args.file, kind, str(e), span)],
            args.format,
            [_diag_text(args.file, kind, str(e), span)],
        )
        return 1
    term = s.desugar(loaded.term)
    try:
        if isinstance(term, s.CoreCmd):
            tau = infer_cmd({}, loaded.signature, term)
        else:
            tau = infer_expr({}, loaded.signature, term)
    except TypeCheckError as e:
        _emit(
            [_diag_record(args.file, e.kind.value, e.detail, e.span)],
            args.format,
            [_diag_text(args.file, e.kind.value, e.detail, e.span)],
        )
        return 1
    from .printer import print_type

    _emit(
        [{"kind": "ok", "file": args.file, "type": print_type(tau)}],
        args.format,
        [f"ok: {args.file}: {print_type(tau)}"],
    )
    return 0


def cmd_run(args) -> int:
    try:
        loaded, elab = _load(args.file)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ParseError, QsParseError, ElabError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if elab is not None:
        try:
            term = entry_command(elab)
        except ElabError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        free: tuple = ()
    else:
        if not loaded.is_cmd:
            print("error: run requires a command program", file=sys.stderr)
            return 2
        term = loaded.term
        free = tuple(loaded.context)
    term = s.desugar(term)
    try:
        infer_cmd({}, Signature(free), term)
        result = run(
            term,
            free,
            seed=args.seed,
            shots=args.shots,
            mode=args.mode,
            max_qubits=args.max_qubits,
        )
    except TypeCheckError as e:
        _emit(
            [_diag_record(args.file, e.kind.value, e.detail, e.span)],
            args.format,
            [_diag_text(args.file, e.kind.value, e.detail, e.span)],
        )
        return 1
    records = [
        {
            "outcome": key,
            "count": result.counts[key],
            "probability": result.counts[key] / args.shots,
        }
        for key in sorted(result.counts)
    ]
    lines = [
        f"{r['outcome']}\t{r['count']}\t{r['probability']:.6f}" for r in records
    ]
    _emit(records, args.format, lines)
    if args.plot:
        from .report import plot_histogram

        plot_histogram(
            dict(result.counts), args.shots, args.plot, title=os.path.basename(args.file)
        )
    return 0


def cmd_equiv(args) -> int:
    try:
        a, _ = _load(args.file_a)
        b, _ = _load(args.file_b)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ParseError, QsParseError, ElabError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if not (a.is_cmd and b.is_cmd):
        print("error: equiv requires two command programs", file=sys.stderr)
        return 2
    if len(a.context) != len(b.context):
        print("error: programs declare different contexts", file=sys.stderr)
        return 2
    # positional context identification: b's context symbols become a's
    term_b = b.term
    mapping = {qb: qa for qb, qa in zip(b.context, a.context)}
    term_b = s.rename_symbols(term_b, mapping)
    try:
        rep = equiv(
            tuple(a.context),
            s.desugar(a.term),
            s.desugar(term_b),
            tol=args.tol,
            max_qubits=args.max_qubits,
        )
    except (TypeCheckError, DenoteError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    _emit(
        [{"equivalent": rep.equal, "max_deviation": rep.max_deviation}],
        args.format,
        [
            ("equivalent" if rep.equal else "NOT equivalent")
            + f"  max_deviation={rep.max_deviation:.3e}"
        ],
    )
    return 0 if rep.equal else 1


def cmd_axioms(args) -> int:
    rows = []
    failed = False
    max_n = 2 if args.max_qubits >= 4 else 1
    for axiom in sorted(AXIOM_IDS):
        rng = random.Random(args.seed + ord(axiom))
        passed = 0
        worst = 0.0
        for _ in range(args.trials):
            params = random_params(axiom, rng, max_n=max_n)
            rep = check_axiom(axiom, params, tol=args.tol)
            worst = max(worst, rep.max_deviation)
            if rep.equal:
                passed += 1
        rows.append(
            {
                "axiom": axiom,
                "trials": args.trials,
                "passed": passed,
                "max_deviation": worst,
            }
        )
        if passed != args.trials:
            failed = True
    lines = [
        f"{r['axiom']}\t{r['passed']}/{r['trials']}\tmax_dev={r['max_deviation']:.3e}"
        for r in rows
    ]
    _emit(rows, args.format, lines)
    if args.plot:
        from .report import plot_axiom_deviations

        plot_axiom_deviations(rows, args.tol, args.plot)
    return 1 if failed else 0


def cmd_simplify(args) -> int:
    try:
        loaded, _ = _load(args.file)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ParseError, QsParseError, ElabError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if not loaded.is_cmd:
        print("error: simplify requires a command program", file=sys.stderr)
        return 2
    res = simplify(s.desugar(loaded.term))
    text = context_header(loaded.context) + print_term(res.term)
    _emit(
        [
            {
                "program": print_term(res.term),
                "rewrites": res.rewrites,
                "budget_exceeded": res.budget_exceeded,
            }
        ],
        args.format,
        [text],
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="lqsharp",
        description="Core-calculus toolkit for a Q# subset: elaboration, "
        "qubit-safety typechecking, seeded simulation, and superoperator "
        "equivalence checking.",
    )
    ap.add_argument("--format", choices=("text", "json"), default="text")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("elab", help="elaborate a .qs file to core syntax")
    p.add_argument("file")
    p.add_argument("--out", help="write the .lqs dump to this path")
    p.set_defaults(fn=cmd_elab)

    p = sub.add_parser("check", help="typecheck a .lqs or .qs file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("run", help="execute a program and print the histogram")
    p.add_argument("file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int, default=1)
    p.add_argument("--mode", choices=("density", "statevector"), default="density")
    p.add_argument("--max-qubits", type=int, default=_budget_default())
    p.add_argument("--plot", help="write a histogram figure to this path")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("equiv", help="oracle equivalence of two programs")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-qubits", type=int, default=10)
    p.set_defaults(fn=cmd_equiv)

    p = sub.add_parser("axioms", help="randomized equation suite")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-qubits", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--plot", help="write a deviation figure to this path")
    p.set_defaults(fn=cmd_axioms)

    p = sub.add_parser("simplify", help="simplify a program")
    p.add_argument("file")
    p.set_defaults(fn=cmd_simplify)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
