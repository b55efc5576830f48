"""Statics: expression and command typing relative to a signature.

The signature tracks the qubit symbols in scope and threads through command
typing.  Gate applications demand pairwise-distinct qubit references (the
static no-cloning check); allocation requires the body's type to be
well-formed without the allocated symbol (the scope-escape check).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import syntax as s
from .printer import print_type as _pt
from .gates import GateError, gate_arity, gate_dim
from .syntax import (
    Arrow,
    BOOL,
    Bool,
    CmdType,
    CoreCmd,
    CoreExpr,
    CoreType,
    Prod,
    QRef,
    QubitSymbol,
    Span,
    UNIT,
    Unit,
    fresh_symbol,
)

__all__ = [
    "ErrorKind",
    "TypeCheckError",
    "Signature",
    "types_equiv",
    "type_wf",
    "check_distinct_refs",
    "infer_expr",
    "infer_cmd",
]


class ErrorKind(Enum):
    UNBOUND_VAR = "UnboundVar"
    MISMATCH = "Mismatch"
    NOT_A_FUNCTION = "NotAFunction"
    NOT_A_TUPLE = "NotATuple"
    BAD_ARITY = "BadArity"
    ALIASED_QUBITS = "AliasedQubits"
    ESCAPING_QUBIT = "EscapingQubit"
    UNKNOWN_SYMBOL = "UnknownSymbol"
    DIMENSION_MISMATCH = "DimensionMismatch"


class TypeCheckError(Exception):
    def __init__(self, kind: ErrorKind, detail: str, span: Span | None = None):
        super().__init__(f"{kind.value}: {detail}")
        self.kind = kind
        self.detail = detail
        self.span = span


class Signature:
    """Ordered set of active qubit symbols; extension requires freshness."""

    __slots__ = ("symbols", "_ids")

    def __init__(self, symbols: tuple[QubitSymbol, ...] = ()):
        self.symbols = tuple(symbols)
        self._ids = {q.id for q in symbols}
        if len(self._ids) != len(self.symbols):
            raise ValueError("signature symbols must be distinct")

    def __contains__(self, q: QubitSymbol) -> bool:
        return q.id in self._ids

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def extend(self, q: QubitSymbol) -> "Signature":
        if q in self:
            raise ValueError(f"symbol {q!r} already in signature")
        return Signature(self.symbols + (q,))

    def __repr__(self):
        return "Signature(" + ", ".join(repr(q) for q in self.symbols) + ")"


def _unwrap_singleton(tau: CoreType) -> CoreType:
    while isinstance(tau, Prod) and len(tau.items) == 1:
        tau = tau.items[0]
    return tau


def types_equiv(a: CoreType, b: CoreType) -> bool:
    """Structural type equality modulo singleton-tuple equivalence."""
    a, b = _unwrap_singleton(a), _unwrap_singleton(b)
    match a, b:
        case (QRef(s1), QRef(s2)):
            return s1 == s2
        case (Arrow(d1, c1), Arrow(d2, c2)):
            return types_equiv(d1, d2) and types_equiv(c1, c2)
        case (CmdType(r1), CmdType(r2)):
            return types_equiv(r1, r2)
        case (Prod(i1), Prod(i2)):
            return len(i1) == len(i2) and all(
                types_equiv(x, y) for x, y in zip(i1, i2)
            )
        case (Bool(), Bool()) | (Unit(), Unit()):
            return True
        case _:
            return False


def type_wf(sig: Signature, tau: CoreType) -> bool:
    """True iff every qubit symbol mentioned in the type is in the signature."""
    match tau:
        case QRef(sym):
            return sym in sig
        case Arrow(d, c):
            return type_wf(sig, d) and type_wf(sig, c)
        case CmdType(r):
            return type_wf(sig, r)
        case Prod(items):
            return all(type_wf(sig, t) for t in items)
        case _:
            return True


def _ref_symbols(tau: CoreType, span: Span | None, what: str) -> list[QubitSymbol]:
    """Decompose a type into the list of qubit symbols it references, using
    singleton-tuple equivalence; a single reference counts as a 1-tuple."""
    tau = _unwrap_singleton(tau)
    if isinstance(tau, QRef):
        return [tau.sym]
    if isinstance(tau, Prod):
        out = []
        for item in tau.items:
            item = _unwrap_singleton(item)
            if not isinstance(item, QRef):
                raise TypeCheckError(
                    ErrorKind.MISMATCH,
                    f"{what} must be qubit references, got {_pt(item)}",
                    span,
                )
            out.append(item.sym)
        return out
    raise TypeCheckError(
        ErrorKind.MISMATCH, f"{what} must be a tuple of qubit references, got {_pt(tau)}", span
    )


def check_distinct_refs(types: list[CoreType], span: Span | None = None) -> None:
    """Raises AliasedQubits naming the first colliding pair."""
    seen: dict[int, QubitSymbol] = {}
    for tau in types:
        tau = _unwrap_singleton(tau)
        assert isinstance(tau, QRef), "check_distinct_refs expects reference types"
        q = tau.sym
        if q.id in seen:
            raise TypeCheckError(
                ErrorKind.ALIASED_QUBITS,
                f"qubit reference {q.display_name} used more than once",
                span,
            )
        seen[q.id] = q
    return None


def _check_distinct_syms(syms: list[QubitSymbol], span: Span | None) -> None:
    check_distinct_refs([QRef(q) for q in syms], span)


def _gate_arity(g, span) -> int:
    try:
        return gate_arity(g)
    except GateError as e:
        raise TypeCheckError(ErrorKind.DIMENSION_MISMATCH, str(e), span) from e


def infer_expr(env: dict[str, CoreType], sig: Signature, e: CoreExpr) -> CoreType:
    match e:
        case s.Var(name):
            if name not in env:
                raise TypeCheckError(
                    ErrorKind.UNBOUND_VAR, f"unbound variable {name}", e.span
                )
            return env[name]
        case s.Let(bound, x, body):
            t1 = infer_expr(env, sig, bound)
            return infer_expr({**env, x: t1}, sig, body)
        case s.Lam(x, annot, body):
            if not type_wf(sig, annot):
                raise TypeCheckError(
                    ErrorKind.UNKNOWN_SYMBOL,
                    f"annotation {_pt(annot)} mentions a symbol not in scope",
                    e.span,
                )
            return Arrow(annot, infer_expr({**env, x: annot}, sig, body))
        case s.App(fn, arg):
            tf = _unwrap_singleton(infer_expr(env, sig, fn))
            if not isinstance(tf, Arrow):
                raise TypeCheckError(
                    ErrorKind.NOT_A_FUNCTION, f"applied a non-function of type {_pt(tf)}", e.span
                )
            ta = infer_expr(env, sig, arg)
            if not types_equiv(tf.dom, ta):
                raise TypeCheckError(
                    ErrorKind.MISMATCH,
                    f"argument type {_pt(ta)} does not match domain {_pt(tf.dom)}",
                    e.span,
                )
            return tf.cod
        case s.CmdBox(m):
            return CmdType(infer_cmd(env, sig, m))
        case s.Tuple(items):
            return Prod(tuple(infer_expr(env, sig, it) for it in items))
        case s.Proj(i, tup):
            tt = _unwrap_singleton(infer_expr(env, sig, tup))
            if isinstance(tt, Prod):
                if not 1 <= i <= len(tt.items):
                    raise TypeCheckError(
                        ErrorKind.BAD_ARITY,
                        f"projection index {i} out of range for {_pt(tt)}",
                        e.span,
                    )
                return tt.items[i - 1]
            if i == 1:
                # singleton-tuple equivalence: proj 1 of a non-tuple is itself
                return tt
            raise TypeCheckError(
                ErrorKind.NOT_A_TUPLE, f"projection from non-tuple type {_pt(tt)}", e.span
            )
        case s.BoolLit(_):
            return BOOL
        case s.If(c, a, b):
            tc = infer_expr(env, sig, c)
            if not types_equiv(tc, BOOL):
                raise TypeCheckError(
                    ErrorKind.MISMATCH, f"if scrutinee must be bool, got {_pt(tc)}", e.span
                )
            ta = infer_expr(env, sig, a)
            tb = infer_expr(env, sig, b)
            if not types_equiv(ta, tb):
                raise TypeCheckError(
                    ErrorKind.MISMATCH,
                    f"if branches disagree: {_pt(ta)} vs {_pt(tb)}",
                    e.span,
                )
            return ta
        case s.UnitVal():
            return UNIT
        case s.QLoc(q):
            if q not in sig:
                raise TypeCheckError(
                    ErrorKind.UNKNOWN_SYMBOL,
                    f"qubit symbol {q.display_name} not in scope",
                    e.span,
                )
            return QRef(q)
        case s.GateConst(_):
            raise TypeCheckError(
                ErrorKind.MISMATCH,
                "gate constant outside a gate application",
                e.span,
            )
        case s.Proc(_, _, _):
            return infer_expr(env, sig, s.desugar(e))
        case _:
            raise TypeCheckError(ErrorKind.MISMATCH, f"not an expression: {e!r}", e.span)


def infer_cmd(env: dict[str, CoreType], sig: Signature, m: CoreCmd) -> CoreType:
    match m:
        case s.Ret(expr):
            return infer_expr(env, sig, expr)
        case s.Bnd(boxed, x, rest):
            tb = _unwrap_singleton(infer_expr(env, sig, boxed))
            if not isinstance(tb, CmdType):
                raise TypeCheckError(
                    ErrorKind.MISMATCH,
                    f"bnd expects an encapsulated command, got {_pt(tb)}",
                    m.span,
                )
            return infer_cmd({**env, x: tb.ret}, sig, rest)
        case s.New(x, body, sym):
            q = sym if sym is not None and sym not in sig else fresh_symbol(x)
            tau = infer_cmd({**env, x: QRef(q)}, sig.extend(q), body)
            if not type_wf(sig, tau) or s.type_mentions(tau, q):
                raise TypeCheckError(
                    ErrorKind.ESCAPING_QUBIT,
                    f"allocated qubit {q.display_name} escapes through result type {_pt(tau)}",
                    m.span,
                )
            return tau
        case s.Scope(q, body):
            if q not in sig:
                raise TypeCheckError(
                    ErrorKind.UNKNOWN_SYMBOL,
                    f"scope symbol {q.display_name} not live",
                    m.span,
                )
            tau = infer_cmd(env, sig, body)
            if s.type_mentions(tau, q):
                raise TypeCheckError(
                    ErrorKind.ESCAPING_QUBIT,
                    f"allocated qubit {q.display_name} escapes through result type {_pt(tau)}",
                    m.span,
                )
            return tau
        case s.GateAp(g, args):
            n = _gate_arity(g, m.span)
            ta = infer_expr(env, sig, args)
            syms = _ref_symbols(ta, m.span, "gate arguments")
            if len(syms) != n:
                raise TypeCheckError(
                    ErrorKind.DIMENSION_MISMATCH,
                    f"gate of arity {n} applied to {len(syms)} reference(s)",
                    m.span,
                )
            _check_distinct_syms(syms, m.span)
            return UNIT
        case s.DiagAp(u, v, control, targets):
            du = _gate_arity(u, m.span)
            dv = _gate_arity(v, m.span)
            if gate_dim(u) != gate_dim(v):
                raise TypeCheckError(
                    ErrorKind.DIMENSION_MISMATCH,
                    f"D(U, V) blocks of unequal dimension: {gate_dim(u)} vs {gate_dim(v)}",
                    m.span,
                )
            tc = _unwrap_singleton(infer_expr(env, sig, control))
            if not isinstance(tc, QRef):
                raise TypeCheckError(
                    ErrorKind.MISMATCH,
                    f"control must be a qubit reference, got {_pt(tc)}",
                    m.span,
                )
            tt = infer_expr(env, sig, targets)
            syms = _ref_symbols(tt, m.span, "target arguments")
            if len(syms) != du:
                raise TypeCheckError(
                    ErrorKind.DIMENSION_MISMATCH,
                    f"D(U, V) with {du}-qubit blocks applied to {len(syms)} target(s)",
                    m.span,
                )
            _check_distinct_syms([tc.sym] + syms, m.span)
            del dv
            return UNIT
        case s.Meas(expr):
            te = _unwrap_singleton(infer_expr(env, sig, expr))
            if not isinstance(te, QRef):
                raise TypeCheckError(
                    ErrorKind.MISMATCH,
                    f"measurement target must be a qubit reference, got {_pt(te)}",
                    m.span,
                )
            return BOOL
        case s.Block(_, _) | s.Do(_) | s.Call(_, _):
            return infer_cmd(env, sig, s.desugar(m))
        case _:
            raise TypeCheckError(ErrorKind.MISMATCH, f"not a command: {m!r}", m.span)
