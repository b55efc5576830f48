"""Abstract syntax for the core calculus.

The grammar is split into pure expressions and effectful commands.  Terms
are immutable dataclasses; qubit symbols are a distinguished sort with
globally unique ids.  Derived forms (blocks, do, proc, call) are kept as
sugar nodes by the parser and removed by `desugar`.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field

from .gates import GateExpr

__all__ = [
    "Span",
    "QubitSymbol",
    "fresh_symbol",
    "fresh_name",
    "CoreType",
    "QRef",
    "Arrow",
    "CmdType",
    "Prod",
    "Bool",
    "Unit",
    "BOOL",
    "UNIT",
    "CoreExpr",
    "Var",
    "Let",
    "Lam",
    "App",
    "CmdBox",
    "Tuple",
    "Proj",
    "BoolLit",
    "If",
    "UnitVal",
    "QLoc",
    "GateConst",
    "Proc",
    "CoreCmd",
    "Ret",
    "Bnd",
    "New",
    "GateAp",
    "DiagAp",
    "Meas",
    "Block",
    "Do",
    "Call",
    "Scope",
    "Term",
    "TRUE",
    "FALSE",
    "UNIT_VAL",
    "free_vars",
    "free_qubit_symbols",
    "all_qubit_symbols",
    "subst",
    "rename_symbols",
    "alpha_eq",
    "desugar",
    "is_value",
    "type_mentions",
]


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


_symbol_ids = itertools.count(1)
_symbol_lock = threading.Lock()


class QubitSymbol:
    """A static name for a logical qubit.  Equality is by id only; the
    display name is cosmetic."""

    __slots__ = ("id", "display_name")

    def __init__(self, id: int, display_name: str):
        self.id = id
        self.display_name = display_name

    def __eq__(self, other):
        return isinstance(other, QubitSymbol) and self.id == other.id

    def __hash__(self):
        return hash(("qsym", self.id))

    def __repr__(self):
        return f"{self.display_name}#{self.id}"


def fresh_symbol(display_name: str = "q") -> QubitSymbol:
    with _symbol_lock:
        return QubitSymbol(next(_symbol_ids), display_name)


def fresh_name(base: str, avoid: set[str]) -> str:
    if base not in avoid:
        return base
    root = base.rstrip("'")
    for n in itertools.count(1):
        cand = root + "'" * n
        if cand not in avoid:
            return cand
    raise AssertionError


@dataclass(frozen=True)
class Node:
    span: Span | None = field(default=None, compare=False, repr=False, kw_only=True)


# --- types ---------------------------------------------------------------


@dataclass(frozen=True)
class CoreType(Node):
    pass


@dataclass(frozen=True)
class QRef(CoreType):
    sym: QubitSymbol


@dataclass(frozen=True)
class Arrow(CoreType):
    dom: CoreType
    cod: CoreType


@dataclass(frozen=True)
class CmdType(CoreType):
    ret: CoreType


@dataclass(frozen=True)
class Prod(CoreType):
    items: tuple[CoreType, ...]


@dataclass(frozen=True)
class Bool(CoreType):
    pass


@dataclass(frozen=True)
class Unit(CoreType):
    pass


BOOL = Bool()
UNIT = Unit()


# --- expressions ----------------------------------------------------------


@dataclass(frozen=True)
class CoreExpr(Node):
    pass


@dataclass(frozen=True)
class Var(CoreExpr):
    name: str


@dataclass(frozen=True)
class Let(CoreExpr):
    bound: CoreExpr
    binder: str
    body: CoreExpr


@dataclass(frozen=True)
class Lam(CoreExpr):
    binder: str
    annot: CoreType
    body: CoreExpr


@dataclass(frozen=True)
class App(CoreExpr):
    fn: CoreExpr
    arg: CoreExpr


@dataclass(frozen=True)
class CmdBox(CoreExpr):
    cmd: CoreCmd


@dataclass(frozen=True)
class Tuple(CoreExpr):
    items: tuple[CoreExpr, ...]


@dataclass(frozen=True)
class Proj(CoreExpr):
    index: int  # 1-based
    tuple_: CoreExpr


@dataclass(frozen=True)
class BoolLit(CoreExpr):
    value: bool


@dataclass(frozen=True)
class If(CoreExpr):
    cond: CoreExpr
    then: CoreExpr
    els: CoreExpr


@dataclass(frozen=True)
class UnitVal(CoreExpr):
    pass


@dataclass(frozen=True)
class QLoc(CoreExpr):
    """Runtime value of a reference to an active qubit symbol.  Never
    appears in user-written source."""

    sym: QubitSymbol


@dataclass(frozen=True)
class GateConst(CoreExpr):
    """A gate used in expression position (an intrinsic passed to a
    functor); consumed during elaboration, untypeable elsewhere."""

    gate: GateExpr


@dataclass(frozen=True)
class Proc(CoreExpr):
    """Sugar: proc(x : t) { m } for a lambda returning a boxed command."""

    binder: str
    annot: CoreType
    body: CoreCmd


TRUE = BoolLit(True)
FALSE = BoolLit(False)
UNIT_VAL = UnitVal()


# --- commands -------------------------------------------------------------


@dataclass(frozen=True)
class CoreCmd(Node):
    pass


@dataclass(frozen=True)
class Ret(CoreCmd):
    expr: CoreExpr


@dataclass(frozen=True)
class Bnd(CoreCmd):
    boxed: CoreExpr
    binder: str
    rest: CoreCmd


@dataclass(frozen=True)
class New(CoreCmd):
    """Allocates a fresh qubit scoped to the body.  `sym` is an optional
    pre-assigned symbol (set by elaboration); the typechecker and the
    interpreter pick a fresh one when it is absent or already live."""

    binder: str
    body: CoreCmd
    sym: QubitSymbol | None = None


@dataclass(frozen=True)
class GateAp(CoreCmd):
    gate: GateExpr
    args: CoreExpr


@dataclass(frozen=True)
class DiagAp(CoreCmd):
    on_zero: GateExpr
    on_one: GateExpr
    control: CoreExpr
    targets: CoreExpr


@dataclass(frozen=True)
class Meas(CoreCmd):
    expr: CoreExpr


@dataclass(frozen=True)
class Block(CoreCmd):
    """Sugar: { x1 <- m1; ...; mn } with optional binders (None = discard)."""

    steps: tuple[tuple[str | None, CoreCmd], ...]
    last: CoreCmd


@dataclass(frozen=True)
class Do(CoreCmd):
    """Sugar: do m, returning the result of m."""

    body: CoreCmd


@dataclass(frozen=True)
class Call(CoreCmd):
    """Sugar: call e(arg); arg defaults to the unit value."""

    fn: CoreExpr
    arg: CoreExpr | None = None


@dataclass(frozen=True)
class Scope(CoreCmd):
    """Runtime-only bracket for an in-flight allocation: the symbol is live
    in the store and is popped when the body completes."""

    sym: QubitSymbol
    body: CoreCmd


Term = CoreExpr | CoreCmd


# --- traversal helpers ----------------------------------------------------


_EMPTY: frozenset[str] = frozenset()
_FV_CACHE: dict[int, tuple[Term, frozenset[str]]] = {}
_FV_CACHE_CAP = 200_000


def free_vars(t: Term) -> frozenset[str]:
    """Free term variables; memoized by node identity (terms are immutable,
    and the cache holds a strong reference to each key so ids stay valid)."""
    hit = _FV_CACHE.get(id(t))
    if hit is not None and hit[0] is t:
        return hit[1]
    out = _free_vars(t)
    if len(_FV_CACHE) > _FV_CACHE_CAP:
        _FV_CACHE.clear()
    _FV_CACHE[id(t)] = (t, out)
    return out


def _free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset((name,))
        case Let(bound, binder, body):
            return free_vars(bound) | (free_vars(body) - {binder})
        case Lam(binder, _, body):
            return free_vars(body) - {binder}
        case App(fn, arg):
            return free_vars(fn) | free_vars(arg)
        case CmdBox(cmd):
            return free_vars(cmd)
        case Tuple(items):
            out: frozenset[str] = _EMPTY
            for it in items:
                out |= free_vars(it)
            return out
        case Proj(_, tup):
            return free_vars(tup)
        case If(cond, then, els):
            return free_vars(cond) | free_vars(then) | free_vars(els)
        case Proc(binder, _, body):
            return free_vars(body) - {binder}
        case BoolLit() | UnitVal() | QLoc() | GateConst():
            return _EMPTY
        case Ret(expr):
            return free_vars(expr)
        case Bnd(boxed, binder, rest):
            return free_vars(boxed) | (free_vars(rest) - {binder})
        case New(binder, body, _):
            return free_vars(body) - {binder}
        case GateAp(_, args):
            return free_vars(args)
        case DiagAp(_, _, control, targets):
            return free_vars(control) | free_vars(targets)
        case Meas(expr):
            return free_vars(expr)
        case Scope(_, body):
            return free_vars(body)
        case Block(steps, last):
            out = free_vars(last)
            for binder, cmd in reversed(steps):
                if binder is not None:
                    out -= {binder}
                out |= free_vars(cmd)
            return out
        case Do(body):
            return free_vars(body)
        case Call(fn, arg):
            out = free_vars(fn)
            if arg is not None:
                out |= free_vars(arg)
            return out
        case _:
            raise TypeError(f"not a term: {t!r}")


def _type_symbols(tau: CoreType) -> set[QubitSymbol]:
    match tau:
        case QRef(sym):
            return {sym}
        case Arrow(dom, cod):
            return _type_symbols(dom) | _type_symbols(cod)
        case CmdType(ret):
            return _type_symbols(ret)
        case Prod(items):
            out: set[QubitSymbol] = set()
            for it in items:
                out |= _type_symbols(it)
            return out
        case _:
            return set()


def type_mentions(tau: CoreType, sym: QubitSymbol) -> bool:
    return sym in _type_symbols(tau)


def free_qubit_symbols(t: Term) -> set[QubitSymbol]:
    """Symbols occurring in the term (in qloc values, type annotations, or
    allocation annotations) that are not bound by an enclosing allocation."""
    match t:
        case QLoc(sym):
            return {sym}
        case Lam(_, annot, body):
            return _type_symbols(annot) | free_qubit_symbols(body)
        case Proc(_, annot, body):
            return _type_symbols(annot) | free_qubit_symbols(body)
        case New(_, body, sym):
            out = free_qubit_symbols(body)
            if sym is not None:
                out -= {sym}
            return out
        case Scope(sym, body):
            return free_qubit_symbols(body) - {sym}
        case _:
            out = set()
            for child in _children(t):
                out |= free_qubit_symbols(child)
            return out


def all_qubit_symbols(t: Term) -> set[QubitSymbol]:
    match t:
        case QLoc(sym):
            return {sym}
        case Lam(_, annot, body):
            return _type_symbols(annot) | all_qubit_symbols(body)
        case Proc(_, annot, body):
            return _type_symbols(annot) | all_qubit_symbols(body)
        case New(_, body, sym):
            out = all_qubit_symbols(body)
            if sym is not None:
                out |= {sym}
            return out
        case Scope(sym, body):
            return all_qubit_symbols(body) | {sym}
        case _:
            out = set()
            for child in _children(t):
                out |= all_qubit_symbols(child)
            return out


def _children(t: Term) -> list[Term]:
    match t:
        case Let(bound, _, body):
            return [bound, body]
        case Lam(_, _, body):
            return [body]
        case App(fn, arg):
            return [fn, arg]
        case CmdBox(cmd):
            return [cmd]
        case Tuple(items):
            return list(items)
        case Proj(_, tup):
            return [tup]
        case If(cond, then, els):
            return [cond, then, els]
        case Proc(_, _, body):
            return [body]
        case Ret(expr):
            return [expr]
        case Bnd(boxed, _, rest):
            return [boxed, rest]
        case New(_, body, _):
            return [body]
        case GateAp(_, args):
            return [args]
        case DiagAp(_, _, control, targets):
            return [control, targets]
        case Meas(expr):
            return [expr]
        case Scope(_, body):
            return [body]
        case Block(steps, last):
            return [cmd for _, cmd in steps] + [last]
        case Do(body):
            return [body]
        case Call(fn, arg):
            return [fn] if arg is None else [fn, arg]
        case _:
            return []


# --- substitution ----------------------------------------------------------


def subst(replacement: CoreExpr, name: str, t: Term) -> Term:
    """Capture-avoiding substitution [replacement/name]t."""
    if name not in free_vars(t):
        return t
    repl_fv = free_vars(replacement)

    def under(x: str, body: Term) -> tuple[str, Term]:
        # prepare a binder to be descended through: shadowing stops the
        # substitution; a binder colliding with the replacement is renamed
        if x == name:
            return x, body
        if x in repl_fv:
            x2 = fresh_name(x, repl_fv | free_vars(body) | {name})
            return x2, go(subst(Var(x2), x, body))
        return x, go(body)

    def go(t: Term) -> Term:
        match t:
            case Var(n):
                return replacement if n == name else t
            case Let(b, x, body):
                x2, body2 = under(x, body)
                return Let(go(b), x2, body2)
            case Lam(x, annot, body):
                x2, body2 = under(x, body)
                return Lam(x2, annot, body2)
            case App(fn, arg):
                return App(go(fn), go(arg))
            case CmdBox(cmd):
                return CmdBox(go(cmd))
            case Tuple(items):
                return Tuple(tuple(go(it) for it in items))
            case Proj(i, tup):
                return Proj(i, go(tup))
            case If(c, a, b):
                return If(go(c), go(a), go(b))
            case Proc(x, annot, body):
                x2, body2 = under(x, body)
                return Proc(x2, annot, body2)
            case BoolLit() | UnitVal() | QLoc() | GateConst():
                return t
            case Ret(e):
                return Ret(go(e))
            case Bnd(boxed, x, rest):
                x2, rest2 = under(x, rest)
                return Bnd(go(boxed), x2, rest2)
            case New(x, body, sym):
                x2, body2 = under(x, body)
                return New(x2, body2, sym)
            case GateAp(g, args):
                return GateAp(g, go(args))
            case DiagAp(u, v, c, ts):
                return DiagAp(u, v, go(c), go(ts))
            case Meas(e):
                return Meas(go(e))
            case Scope(sym, body):
                return Scope(sym, go(body))
            case Block(steps, last):
                if not steps:
                    return Block((), go(last))
                (x, cmd), rest = steps[0], steps[1:]
                cmd2 = go(cmd)
                tail = Block(rest, last)
                if x is None or x == name:
                    tail2 = go(tail) if x is None else tail
                    x2 = x
                elif x in repl_fv:
                    x2 = fresh_name(x, repl_fv | free_vars(tail) | {name})
                    tail2 = go(subst(Var(x2), x, tail))
                else:
                    x2 = x
                    tail2 = go(tail)
                assert isinstance(tail2, Block)
                return Block(((x2, cmd2),) + tail2.steps, tail2.last)
            case Do(body):
                return Do(go(body))
            case Call(fn, arg):
                return Call(go(fn), None if arg is None else go(arg))
            case _:
                raise TypeError(f"not a term: {t!r}")

    return go(t)


def qlocs_to_vars(t: Term, names: dict[int, str]) -> Term:
    """Replace reference values of the given symbols by variables (the
    inverse of closing a parsed program over its context)."""

    def go(t: Term) -> Term:
        if isinstance(t, QLoc) and t.sym.id in names:
            return Var(names[t.sym.id])
        match t:
            case Var() | BoolLit() | UnitVal() | GateConst() | QLoc():
                return t
            case Let(b, x, body):
                return Let(go(b), x, go(body))
            case Lam(x, a, body):
                return Lam(x, a, go(body))
            case App(f, a):
                return App(go(f), go(a))
            case CmdBox(m):
                return CmdBox(go(m))
            case Tuple(items):
                return Tuple(tuple(go(i) for i in items))
            case Proj(i, e):
                return Proj(i, go(e))
            case If(c, a, b):
                return If(go(c), go(a), go(b))
            case Proc(x, a, m):
                return Proc(x, a, go(m))
            case Ret(e):
                return Ret(go(e))
            case Bnd(b, x, m):
                return Bnd(go(b), x, go(m))
            case New(x, m, sym):
                return New(x, go(m), sym)
            case GateAp(g, e):
                return GateAp(g, go(e))
            case DiagAp(u, v, c, ts):
                return DiagAp(u, v, go(c), go(ts))
            case Meas(e):
                return Meas(go(e))
            case Scope(sym, m):
                return Scope(sym, go(m))
            case Block(steps, last):
                return Block(tuple((x, go(c)) for x, c in steps), go(last))
            case Do(m):
                return Do(go(m))
            case Call(f, a):
                return Call(go(f), None if a is None else go(a))
            case _:
                raise TypeError(f"not a term: {t!r}")

    return go(t)


def rename_symbols(t: Term, mapping: dict[QubitSymbol, QubitSymbol]) -> Term:
    """Replace qubit symbols throughout a term (qloc values, annotations,
    allocation annotations).  Used for monomorphization and cloning."""

    def ty(tau: CoreType) -> CoreType:
        match tau:
            case QRef(sym):
                return QRef(mapping.get(sym, sym))
            case Arrow(d, c):
                return Arrow(ty(d), ty(c))
            case CmdType(r):
                return CmdType(ty(r))
            case Prod(items):
                return Prod(tuple(ty(i) for i in items))
            case _:
                return tau

    def go(t: Term) -> Term:
        match t:
            case QLoc(sym):
                return QLoc(mapping.get(sym, sym))
            case Var() | BoolLit() | UnitVal() | GateConst():
                return t
            case Let(b, x, body):
                return Let(go(b), x, go(body))
            case Lam(x, annot, body):
                return Lam(x, ty(annot), go(body))
            case App(fn, arg):
                return App(go(fn), go(arg))
            case CmdBox(cmd):
                return CmdBox(go(cmd))
            case Tuple(items):
                return Tuple(tuple(go(i) for i in items))
            case Proj(i, tup):
                return Proj(i, go(tup))
            case If(c, a, b):
                return If(go(c), go(a), go(b))
            case Proc(x, annot, body):
                return Proc(x, ty(annot), go(body))
            case Ret(e):
                return Ret(go(e))
            case Bnd(boxed, x, rest):
                return Bnd(go(boxed), x, go(rest))
            case New(x, body, sym):
                s2 = mapping.get(sym, sym) if sym is not None else None
                return New(x, go(body), s2)
            case GateAp(g, args):
                return GateAp(g, go(args))
            case DiagAp(u, v, c, ts):
                return DiagAp(u, v, go(c), go(ts))
            case Meas(e):
                return Meas(go(e))
            case Scope(sym, body):
                return Scope(mapping.get(sym, sym), go(body))
            case Block(steps, last):
                return Block(tuple((x, go(c)) for x, c in steps), go(last))
            case Do(body):
                return Do(go(body))
            case Call(fn, arg):
                return Call(go(fn), None if arg is None else go(arg))
            case _:
                raise TypeError(f"not a term: {t!r}")

    return go(t)


# --- alpha equivalence ------------------------------------------------------


def alpha_eq(t1: Term, t2: Term, *, match_symbols: bool = False) -> bool:
    """Structural equality up to consistent renaming of bound variables and
    bound qubit symbols.  With match_symbols=True, free qubit symbols are
    also matched up to a bijection (used to compare independently elaborated
    programs)."""
    sym_map: dict[int, int] = {}
    sym_rev: dict[int, int] = {}

    def syms(s1: QubitSymbol, s2: QubitSymbol, env: dict[int, int]) -> bool:
        if s1.id in env:
            return env[s1.id] == s2.id
        if match_symbols:
            if s1.id in sym_map:
                return sym_map[s1.id] == s2.id
            if s2.id in sym_rev:
                return False
            sym_map[s1.id] = s2.id
            sym_rev[s2.id] = s1.id
            return True
        return s1 == s2

    def tys(a: CoreType, b: CoreType, env: dict[int, int]) -> bool:
        match a, b:
            case (QRef(s1), QRef(s2)):
                return syms(s1, s2, env)
            case (Arrow(d1, c1), Arrow(d2, c2)):
                return tys(d1, d2, env) and tys(c1, c2, env)
            case (CmdType(r1), CmdType(r2)):
                return tys(r1, r2, env)
            case (Prod(i1), Prod(i2)):
                return len(i1) == len(i2) and all(
                    tys(x, y, env) for x, y in zip(i1, i2)
                )
            case (Bool(), Bool()) | (Unit(), Unit()):
                return True
            case _:
                return False

    def go(a: Term, b: Term, venv: dict[str, str], senv: dict[int, int]) -> bool:
        match a, b:
            case (Var(n1), Var(n2)):
                return venv.get(n1, n1) == n2
            case (Let(b1, x1, e1), Let(b2, x2, e2)):
                return go(b1, b2, venv, senv) and go(
                    e1, e2, {**venv, x1: x2}, senv
                )
            case (Lam(x1, a1, e1), Lam(x2, a2, e2)):
                return tys(a1, a2, senv) and go(e1, e2, {**venv, x1: x2}, senv)
            case (App(f1, a1), App(f2, a2)):
                return go(f1, f2, venv, senv) and go(a1, a2, venv, senv)
            case (CmdBox(m1), CmdBox(m2)):
                return go(m1, m2, venv, senv)
            case (Tuple(i1), Tuple(i2)):
                return len(i1) == len(i2) and all(
                    go(x, y, venv, senv) for x, y in zip(i1, i2)
                )
            case (Proj(n1, e1), Proj(n2, e2)):
                return n1 == n2 and go(e1, e2, venv, senv)
            case (BoolLit(v1), BoolLit(v2)):
                return v1 == v2
            case (If(c1, t1_, e1), If(c2, t2_, e2)):
                return (
                    go(c1, c2, venv, senv)
                    and go(t1_, t2_, venv, senv)
                    and go(e1, e2, venv, senv)
                )
            case (UnitVal(), UnitVal()):
                return True
            case (QLoc(s1), QLoc(s2)):
                return syms(s1, s2, senv)
            case (GateConst(g1), GateConst(g2)):
                return g1 == g2
            case (Proc(x1, a1, m1), Proc(x2, a2, m2)):
                return tys(a1, a2, senv) and go(m1, m2, {**venv, x1: x2}, senv)
            case (Ret(e1), Ret(e2)):
                return go(e1, e2, venv, senv)
            case (Bnd(b1, x1, m1), Bnd(b2, x2, m2)):
                return go(b1, b2, venv, senv) and go(
                    m1, m2, {**venv, x1: x2}, senv
                )
            case (New(x1, m1, s1), New(x2, m2, s2)):
                venv2 = {**venv, x1: x2}
                if s1 is not None and s2 is not None:
                    return go(m1, m2, venv2, {**senv, s1.id: s2.id})
                return go(m1, m2, venv2, senv)
            case (GateAp(g1, e1), GateAp(g2, e2)):
                return g1 == g2 and go(e1, e2, venv, senv)
            case (DiagAp(u1, v1, c1, t1_), DiagAp(u2, v2, c2, t2_)):
                return (
                    u1 == u2
                    and v1 == v2
                    and go(c1, c2, venv, senv)
                    and go(t1_, t2_, venv, senv)
                )
            case (Meas(e1), Meas(e2)):
                return go(e1, e2, venv, senv)
            case (Scope(s1, m1), Scope(s2, m2)):
                return go(m1, m2, venv, {**senv, s1.id: s2.id})
            case (Block(st1, l1), Block(st2, l2)):
                if len(st1) != len(st2):
                    return False
                venv2 = dict(venv)
                for (x1, c1), (x2, c2) in zip(st1, st2):
                    if (x1 is None) != (x2 is None):
                        return False
                    if not go(c1, c2, venv2, senv):
                        return False
                    if x1 is not None:
                        venv2 = {**venv2, x1: x2}
                return go(l1, l2, venv2, senv)
            case (Do(m1), Do(m2)):
                return go(m1, m2, venv, senv)
            case (Call(f1, a1), Call(f2, a2)):
                if (a1 is None) != (a2 is None):
                    return False
                return go(f1, f2, venv, senv) and (
                    a1 is None or go(a1, a2, venv, senv)
                )
            case _:
                return False

    return go(t1, t2, {}, {})


# --- derived-form expansion -------------------------------------------------


def desugar(t: Term) -> Term:
    """Expand all derived forms: blocks to nested binds, do to a bind that
    returns its result, proc to a lambda over a boxed command, call to a
    bind of an application.  Idempotent; preserves source spans."""
    sp = t.span
    match t:
        case Block(steps, last):
            out = desugar(last)
            for binder, cmd in reversed(steps):
                out = Bnd(CmdBox(desugar(cmd)), binder or "_", out, span=sp)
            return out
        case Do(body):
            return Bnd(CmdBox(desugar(body)), "x", Ret(Var("x")), span=sp)
        case Call(fn, arg):
            arg2 = UNIT_VAL if arg is None else desugar(arg)
            return Bnd(App(desugar(fn), arg2), "x", Ret(Var("x")), span=sp)
        case Proc(x, annot, body):
            return Lam(x, annot, CmdBox(desugar(body)), span=sp)
        case Var() | BoolLit() | UnitVal() | QLoc() | GateConst():
            return t
        case Let(b, x, e):
            return Let(desugar(b), x, desugar(e), span=sp)
        case Lam(x, a, e):
            return Lam(x, a, desugar(e), span=sp)
        case App(f, a):
            return App(desugar(f), desugar(a), span=sp)
        case CmdBox(m):
            return CmdBox(desugar(m), span=sp)
        case Tuple(items):
            return Tuple(tuple(desugar(i) for i in items), span=sp)
        case Proj(i, e):
            return Proj(i, desugar(e), span=sp)
        case If(c, a, b):
            return If(desugar(c), desugar(a), desugar(b), span=sp)
        case Ret(e):
            return Ret(desugar(e), span=sp)
        case Bnd(b, x, m):
            return Bnd(desugar(b), x, desugar(m), span=sp)
        case New(x, m, sym):
            return New(x, desugar(m), sym, span=sp)
        case GateAp(g, e):
            return GateAp(g, desugar(e), span=sp)
        case DiagAp(u, v, c, ts):
            return DiagAp(u, v, desugar(c), desugar(ts), span=sp)
        case Meas(e):
            return Meas(desugar(e), span=sp)
        case Scope(sym, m):
            return Scope(sym, desugar(m), span=sp)
        case _:
            raise TypeError(f"not a term: {t!r}")


def is_value(e: CoreExpr) -> bool:
    """Values of the expression language (relative to any signature)."""
    match e:
        case Lam() | CmdBox() | QLoc() | BoolLit() | UnitVal() | GateConst():
            return True
        case Tuple(items):
            return all(is_value(i) for i in items)
        case _:
            return False
