"""Concrete-syntax printer.

Round-trips with the parser up to alpha equivalence; no further layout
fidelity is promised.  Symbols print by display name, so a term whose
distinct symbols share a display name needs renaming before dumping.
"""

from __future__ import annotations

from . import syntax as s
from .gates import Adjoint, Dense, Diag, GateExpr, Identity, Named, Product, Tensor

__all__ = ["print_term", "print_type", "print_gate", "print_value", "context_header"]


def print_gate(g: GateExpr) -> str:
    match g:
        case Named(name):
            return name
        case Identity(dim):
            return f"I({dim})"
        case Dense(_, label):
            return f"#dense[{label}]"
        case Adjoint(inner):
            return f"adj({print_gate(inner)})"
        case Product(second, first):
            return f"{_gate_factor(second)} * {_gate_factor(first)}"
        case Tensor(left, right):
            return f"({print_gate(left)}) @ ({print_gate(right)})"
        case Diag(u, v):
            return f"D({print_gate(u)}, {print_gate(v)})"
        case _:
            raise TypeError(f"not a gate: {g!r}")


def _gate_factor(g: GateExpr) -> str:
    if isinstance(g, (Product, Tensor)):
        return f"({print_gate(g)})"
    return print_gate(g)


def print_type(t: s.CoreType) -> str:
    match t:
        case s.QRef(sym):
            return f"qref[{sym.display_name}]"
        case s.Arrow(dom, cod):
            return f"{_type_factor(dom)} -> {print_type(cod)}"
        case s.CmdType(ret):
            return f"cmd({print_type(ret)})"
        case s.Prod(items):
            if not items:
                return "unit"  # empty products have no source syntax
            return " * ".join(_type_factor(i) for i in items)
        case s.Bool():
            return "bool"
        case s.Unit():
            return "unit"
        case _:
            raise TypeError(f"not a type: {t!r}")


def _type_factor(t: s.CoreType) -> str:
    if isinstance(t, (s.Arrow, s.Prod)) and not (
        isinstance(t, s.Prod) and not t.items
    ):
        return f"({print_type(t)})"
    return print_type(t)


def print_term(t: s.Term) -> str:
    match t:
        case s.Var(name):
            return name
        case s.Let(bound, x, body):
            return f"let {x} = {print_term(bound)} in {print_term(body)}"
        case s.Lam(x, annot, body):
            return f"fun ({x} : {print_type(annot)}) {print_term(body)}"
        case s.App(fn, arg):
            return f"{_callee(fn)}({print_term(arg)})"
        case s.CmdBox(cmd):
            return f"cmd {print_term(cmd)}"
        case s.Tuple(items):
            if not items:
                return "<>"
            return "<" + ", ".join(print_term(i) for i in items) + ">"
        case s.Proj(i, tup):
            return f"proj {i} {_atom(tup)}"
        case s.BoolLit(v):
            return "tt" if v else "ff"
        case s.If(c, a, b):
            return f"if {print_term(c)} then {print_term(a)} else {print_term(b)}"
        case s.UnitVal():
            return "<>"
        case s.QLoc(sym):
            return f"qloc[{sym.display_name}]"
        case s.GateConst(g):
            return f"#gate[{print_gate(g)}]"
        case s.Proc(x, annot, body):
            return f"proc ({x} : {print_type(annot)}) {{ {print_term(body)} }}"
        case s.Ret(e):
            return f"ret {_atom(e)}"
        case s.Bnd(boxed, x, rest):
            return f"bnd {_atom(boxed)} as {x} in {print_term(rest)}"
        case s.New(x, body, _):
            return f"new {x} in {print_term(body)}"
        case s.GateAp(g, args):
            return f"{_gate_head(g)}({_args(args)})"
        case s.DiagAp(u, v, c, targets):
            return (
                f"D({print_gate(u)}, {print_gate(v)})"
                f"({print_term(c)}; {_args(targets)})"
            )
        case s.Meas(e):
            return f"meas {_atom(e)}"
        case s.Block(steps, last):
            parts = [
                (f"{x} <- " if x is not None else "") + print_term(c)
                for x, c in steps
            ]
            parts.append(print_term(last))
            return "{" + "; ".join(parts) + "}"
        case s.Do(body):
            return f"do {print_term(body)}"
        case s.Call(fn, arg):
            if arg is None:
                return f"call {_callee(fn)}"
            return f"call {_callee(fn)}({print_term(arg)})"
        case s.Scope(sym, body):
            return f"-- scope[{sym.display_name}] {print_term(body)}"
        case _:
            raise TypeError(f"not a term: {t!r}")


def _gate_head(g: GateExpr) -> str:
    # a bare D(U, V) head would parse as a diagonal application command
    if isinstance(g, (Product, Tensor, Diag)):
        return f"({print_gate(g)})"
    return print_gate(g)


def _callee(e: s.CoreExpr) -> str:
    if isinstance(e, (s.Var, s.App)):
        return print_term(e)
    return f"({print_term(e)})"


def _atom(e: s.CoreExpr) -> str:
    match e:
        case s.Var() | s.BoolLit() | s.UnitVal() | s.Tuple() | s.QLoc() | s.App():
            return print_term(e)
        case _:
            return f"({print_term(e)})"


def _args(args: s.CoreExpr) -> str:
    if isinstance(args, s.Tuple):
        return ", ".join(print_term(i) for i in args.items)
    return print_term(args)


def print_value(v: s.CoreExpr) -> str:
    """Printed form of a result value, used as histogram and branch keys."""
    match v:
        case s.BoolLit(b):
            return "tt" if b else "ff"
        case s.UnitVal():
            return "<>"
        case s.Tuple(items):
            return "<" + ", ".join(print_value(i) for i in items) + ">"
        case s.QLoc(sym):
            return f"qloc[{sym.display_name}]"
        case _:
            return print_term(v)


def context_header(symbols) -> str:
    if not symbols:
        return ""
    return "-- context: " + " ".join(q.display_name for q in symbols) + "\n"
