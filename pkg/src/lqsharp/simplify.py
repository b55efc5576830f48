"""Directed simplifier over the equational theory.

Applies, to a fixpoint under a rewrite budget: beta reduction and pure
expression normalization, deletion of identity gates, fusion of adjacent
gates on identical reference tuples into a product, and folding of
measure-of-fresh into ff.  Every rewrite is an oriented instance of a
checked equation, so the output is oracle-equivalent to the input.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import syntax as s
from .gates import Product, is_identity_gate
from .syntax import CoreCmd, Term, UNIT_VAL, desugar, free_vars, is_value, subst

__all__ = ["SimplifyResult", "simplify"]

DEFAULT_BUDGET = 10_000


@dataclass
class SimplifyResult:
    term: CoreCmd
    rewrites: int
    budget_exceeded: bool = False


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self) -> bool:
        self.used += 1
        return self.used <= self.limit


def simplify(m: CoreCmd, budget: int = DEFAULT_BUDGET) -> SimplifyResult:
    """Simplify a well-typed command; returns the input unchanged with a
    flag when the rewrite budget is exhausted."""
    start = desugar(m)
    b = _Budget(budget)
    cur = start
    while True:
        nxt = _pass(cur, b)
        if b.used > b.limit:
            return SimplifyResult(start, b.used, budget_exceeded=True)
        if nxt == cur:
            return SimplifyResult(cur, b.used)
        cur = nxt


def _pass(t: Term, b: _Budget) -> Term:
    if b.used > b.limit:
        return t
    t = _rebuild(t, b)
    return _rewrite(t, b)


def _rebuild(t: Term, b: _Budget) -> Term:
    match t:
        case s.Let(bound, x, body):
            return s.Let(_pass(bound, b), x, _pass(body, b))
        case s.Lam(x, a, body):
            return s.Lam(x, a, _pass(body, b))
        case s.App(fn, arg):
            return s.App(_pass(fn, b), _pass(arg, b))
        case s.CmdBox(cmd):
            return s.CmdBox(_pass(cmd, b))
        case s.Tuple(items):
            return s.Tuple(tuple(_pass(i, b) for i in items))
        case s.Proj(i, tup):
            return s.Proj(i, _pass(tup, b))
        case s.If(c, x, y):
            return s.If(_pass(c, b), _pass(x, b), _pass(y, b))
        case s.Ret(e):
            return s.Ret(_pass(e, b))
        case s.Bnd(boxed, x, rest):
            return s.Bnd(_pass(boxed, b), x, _pass(rest, b))
        case s.New(x, body, sym):
            return s.New(x, _pass(body, b), sym)
        case s.GateAp(g, args):
            return s.GateAp(g, _pass(args, b))
        case s.DiagAp(u, v, c, ts):
            return s.DiagAp(u, v, _pass(c, b), _pass(ts, b))
        case s.Meas(e):
            return s.Meas(_pass(e, b))
        case s.Scope(sym, body):
            return s.Scope(sym, _pass(body, b))
        case _:
            return t


def _syn_value(e: s.CoreExpr) -> bool:
    """Open-term value forms: variables stand for already-evaluated values
    under call-by-value, so they may be moved and duplicated."""
    match e:
        case s.Var(_):
            return True
        case s.Tuple(items):
            return all(_syn_value(i) for i in items)
        case _:
            return is_value(e)


def _rewrite(t: Term, b: _Budget) -> Term:
    match t:
        # pure expression normalization
        case s.App(s.Lam(x, _, body), arg) if _syn_value(arg):
            if b.spend():
                return subst(arg, x, body)
        case s.Let(bound, x, body) if _syn_value(bound):
            if b.spend():
                return subst(bound, x, body)
        case s.If(s.BoolLit(v), a, c):
            if b.spend():
                return a if v else c
        case s.Proj(i, s.Tuple(items)) if 1 <= i <= len(items):
            if b.spend():
                return items[i - 1]
        # identity gates are no-ops
        case s.GateAp(g, args) if _syn_value(args) and is_identity_gate(g):
            if b.spend():
                return s.Ret(UNIT_VAL)
        # measuring a fresh qubit yields ff
        case s.New(x, s.Meas(s.Var(y)), _) if x == y:
            if b.spend():
                return s.Ret(s.FALSE)
        # left identity: bind of a returned value substitutes
        case s.Bnd(s.CmdBox(s.Ret(e)), x, rest) if _syn_value(e):
            if b.spend():
                return subst(e, x, rest)
        # right identity: bind that just returns its result
        case s.Bnd(s.CmdBox(inner), x, s.Ret(s.Var(y))) if x == y:
            if b.spend():
                return inner
        # fuse adjacent gates over the same reference tuple
        case s.Bnd(s.CmdBox(s.GateAp(u, e1)), x, s.GateAp(v, e2)) if (
            e1 == e2 and _syn_value(e1) and x not in free_vars(e2)
        ):
            if b.spend():
                return s.GateAp(Product(v, u), e1)
        case s.Bnd(
            s.CmdBox(s.GateAp(u, e1)), x, s.Bnd(s.CmdBox(s.GateAp(v, e2)), y, rest)
        ) if (
            e1 == e2
            and _syn_value(e1)
            and x not in free_vars(e2)
            and x not in free_vars(rest)
        ):
            if b.spend():
                return s.Bnd(s.CmdBox(s.GateAp(Product(v, u), e1)), y, rest)
    return t
