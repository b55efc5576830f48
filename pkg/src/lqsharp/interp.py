"""Operational semantics: small-step transition rules and a faster big-step
evaluator that agrees with them.

Expressions reduce purely, left to right, call by value.  Commands step
against a quantum store.  Allocation pushes a fresh symbol whose scope is
tracked by a runtime bracket; on completion the qubit is traced out in
density mode, while statevector mode defers physical release to program
end and merely forgets the name.

Measurement sampling draws one uniform number per measurement from a
per-shot stream: shot i of seed s uses the counter-based Philox generator
with key s and counter block i * 2^128, so shots are reproducible
independently of execution order.  The outcome is 1 iff the draw is below
the probability of outcome 1.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import qstate, syntax as s
from .gates import Diag, mat_of_gate
from .printer import print_value
from .syntax import (
    CoreCmd,
    CoreExpr,
    QubitSymbol,
    UNIT_VAL,
    desugar,
    fresh_symbol,
    is_value,
    subst,
)

__all__ = [
    "InterpError",
    "QubitBudgetError",
    "StepResult",
    "Stepped",
    "Final",
    "Stuck",
    "QuantumStore",
    "step_expr",
    "step_cmd",
    "eval_expr",
    "exec_cmd",
    "run",
    "RunResult",
    "DEFAULT_QUBIT_BUDGET",
]

DEFAULT_QUBIT_BUDGET = 12


class InterpError(Exception):
    pass


class QubitBudgetError(InterpError):
    pass


@dataclass(frozen=True)
class StepResult:
    pass


@dataclass(frozen=True)
class Stepped(StepResult):
    term: s.Term
    store: "QuantumStore | None" = None


@dataclass(frozen=True)
class Final(StepResult):
    value: CoreExpr
    store: "QuantumStore | None" = None


@dataclass(frozen=True)
class Stuck(StepResult):
    reason: str


class QuantumStore:
    """Runtime quantum state: an allocation stack of live symbols plus a
    density matrix or statevector over them."""

    def __init__(
        self,
        free: tuple[QubitSymbol, ...] = (),
        mode: str = "density",
        rng: np.random.Generator | None = None,
        max_qubits: int = DEFAULT_QUBIT_BUDGET,
    ):
        if mode not in ("density", "statevector"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.live: list[QubitSymbol] = list(free)
        self.released: set[int] = set()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.max_qubits = max_qubits
        dim = 2 ** len(self.live)
        if mode == "density":
            self.state = np.zeros((dim, dim), dtype=complex)
            self.state[0, 0] = 1.0
        else:
            self.state = np.zeros(dim, dtype=complex)
            self.state[0] = 1.0

    # -- bookkeeping --

    def _pos(self, q: QubitSymbol) -> int:
        try:
            return self.live.index(q)
        except ValueError:
            raise InterpError(f"qubit {q!r} is not live") from None

    @property
    def n(self) -> int:
        return len(self.live)

    def active_count(self) -> int:
        return len(self.live) - len(self.released)

    def alloc(self, q: QubitSymbol) -> None:
        if q in self.live:
            raise InterpError(f"symbol {q!r} already live")
        if self.active_count() + 1 > self.max_qubits:
            raise QubitBudgetError(
                f"qubit budget of {self.max_qubits} exceeded"
            )
        n = self.n
        if self.mode == "density":
            self.state = qstate.alloc_dm(self.state, n, n)
        else:
            self.state = qstate.alloc_sv(self.state, n, n)
        self.live.append(q)

    def release(self, q: QubitSymbol) -> None:
        pos = self._pos(q)
        if self.mode == "density":
            self.state = qstate.trace_out_dm(self.state, self.n, pos)
            self.live.pop(pos)
        else:
            # deferred release: forget the name, keep the amplitudes
            self.released.add(q.id)

    def apply_gate(self, mat: np.ndarray, syms: list[QubitSymbol]) -> None:
        positions = [self._pos(q) for q in syms]
        if self.mode == "density":
            self.state = qstate.apply_dm(self.state, self.n, mat, positions)
        else:
            self.state = qstate.apply_sv(self.state, self.n, mat, positions)

    def measure(self, q: QubitSymbol) -> bool:
        pos = self._pos(q)
        if self.mode == "density":
            p1 = qstate.prob_one_dm(self.state, self.n, pos)
        else:
            p1 = qstate.prob_one_sv(self.state, self.n, pos)
        outcome = 1 if self.rng.random() < p1 else 0
        p = p1 if outcome else 1.0 - p1
        if p <= 0.0:
            # numerically impossible branch; take the other one
            outcome = 1 - outcome
            p = 1.0 - p
        if self.mode == "density":
            self.state = qstate.project_dm(self.state, self.n, pos, outcome) / p
        else:
            self.state = qstate.project_sv(self.state, self.n, pos, outcome) / np.sqrt(p)
        return bool(outcome)


# -- small-step expression reduction ----------------------------------------


def step_expr(e: CoreExpr) -> StepResult:
    """One pure reduction step; Final when e is a value."""
    if is_value(e):
        return Final(e)
    match e:
        case s.Let(bound, x, body):
            if is_value(bound):
                return Stepped(subst(bound, x, body))
            r = step_expr(bound)
            if isinstance(r, Stepped):
                return Stepped(s.Let(r.term, x, body))
            return r
        case s.App(fn, arg):
            if not is_value(fn):
                r = step_expr(fn)
                if isinstance(r, Stepped):
                    return Stepped(s.App(r.term, arg))
                return r
            if not is_value(arg):
                r = step_expr(arg)
                if isinstance(r, Stepped):
                    return Stepped(s.App(fn, r.term))
                return r
            if isinstance(fn, s.Lam):
                return Stepped(subst(arg, fn.binder, fn.body))
            return Stuck("application of a non-function value")
        case s.Tuple(items):
            for i, item in enumerate(items):
                if not is_value(item):
                    r = step_expr(item)
                    if isinstance(r, Stepped):
                        new = items[:i] + (r.term,) + items[i + 1 :]
                        return Stepped(s.Tuple(new))
                    return r
            return Final(e)
        case s.Proj(i, tup):
            if not is_value(tup):
                r = step_expr(tup)
                if isinstance(r, Stepped):
                    return Stepped(s.Proj(i, r.term))
                return r
            if isinstance(tup, s.Tuple):
                if 1 <= i <= len(tup.items):
                    return Stepped(tup.items[i - 1])
                return Stuck(f"projection index {i} out of range")
            if i == 1:
                return Stepped(tup)
            return Stuck("projection from a non-tuple value")
        case s.If(cond, then, els):
            if not is_value(cond):
                r = step_expr(cond)
                if isinstance(r, Stepped):
                    return Stepped(s.If(r.term, then, els))
                return r
            if isinstance(cond, s.BoolLit):
                return Stepped(then if cond.value else els)
            return Stuck("if scrutinee is not a boolean value")
        case s.Var(name):
            return Stuck(f"free variable {name}")
        case s.Proc():
            return Stepped(desugar(e))
        case _:
            return Stuck(f"expression cannot step: {e!r}")


def _unpack_refs(v: CoreExpr) -> list[QubitSymbol] | None:
    match v:
        case s.QLoc(q):
            return [q]
        case s.Tuple(items):
            out = []
            for item in items:
                inner = _unpack_refs(item)
                if inner is None or len(inner) != 1:
                    return None
                out.extend(inner)
            return out
        case _:
            return None


def step_cmd(store: QuantumStore, m: CoreCmd) -> StepResult:
    """One command step against the store; Final when the command is a
    completed return of a value."""
    match m:
        case s.Ret(e):
            if is_value(e):
                return Final(e, store)
            r = step_expr(e)
            if isinstance(r, Stepped):
                return Stepped(s.Ret(r.term), store)
            return r
        case s.Bnd(boxed, x, rest):
            if not is_value(boxed):
                r = step_expr(boxed)
                if isinstance(r, Stepped):
                    return Stepped(s.Bnd(r.term, x, rest), store)
                return r
            if not isinstance(boxed, s.CmdBox):
                return Stuck("bnd of a non-command value")
            inner = boxed.cmd
            if isinstance(inner, s.Ret) and is_value(inner.expr):
                return Stepped(subst(inner.expr, x, rest), store)
            r = step_cmd(store, inner)
            if isinstance(r, Stepped):
                return Stepped(s.Bnd(s.CmdBox(r.term), x, rest), r.store)
            if isinstance(r, Final):
                return Stepped(s.Bnd(s.CmdBox(s.Ret(r.value)), x, rest), r.store)
            return r
        case s.New(x, body, sym):
            q = sym if sym is not None and sym not in store.live else fresh_symbol(x)
            store.alloc(q)
            return Stepped(s.Scope(q, subst(s.QLoc(q), x, body)), store)
        case s.Scope(q, body):
            if isinstance(body, s.Ret) and is_value(body.expr):
                store.release(q)
                return Stepped(s.Ret(body.expr), store)
            r = step_cmd(store, body)
            if isinstance(r, Stepped):
                return Stepped(s.Scope(q, r.term), r.store)
            if isinstance(r, Final):
                return Stepped(s.Scope(q, s.Ret(r.value)), r.store)
            return r
        case s.GateAp(g, args):
            if not is_value(args):
                r = step_expr(args)
                if isinstance(r, Stepped):
                    return Stepped(s.GateAp(g, r.term), store)
                return r
            syms = _unpack_refs(args)
            if syms is None:
                return Stuck("gate applied to a non-reference value")
            store.apply_gate(mat_of_gate(g), syms)
            return Stepped(s.Ret(UNIT_VAL), store)
        case s.DiagAp(u, v, control, targets):
            if not is_value(control):
                r = step_expr(control)
                if isinstance(r, Stepped):
                    return Stepped(s.DiagAp(u, v, r.term, targets), store)
                return r
            if not is_value(targets):
                r = step_expr(targets)
                if isinstance(r, Stepped):
                    return Stepped(s.DiagAp(u, v, control, r.term), store)
                return r
            csyms = _unpack_refs(control)
            tsyms = _unpack_refs(targets)
            if csyms is None or len(csyms) != 1 or tsyms is None:
                return Stuck("diagonal gate applied to non-reference values")
            store.apply_gate(mat_of_gate(Diag(u, v)), csyms + tsyms)
            return Stepped(s.Ret(UNIT_VAL), store)
        case s.Meas(e):
            if not is_value(e):
                r = step_expr(e)
                if isinstance(r, Stepped):
                    return Stepped(s.Meas(r.term), store)
                return r
            if not isinstance(e, s.QLoc):
                return Stuck("measurement of a non-reference value")
            outcome = store.measure(e.sym)
            return Stepped(s.Ret(s.BoolLit(outcome)), store)
        case s.Block() | s.Do() | s.Call():
            return Stepped(desugar(m), store)
        case _:
            return Stuck(f"command cannot step: {m!r}")


# -- big-step evaluation ------------------------------------------------------

# Shots re-execute one program, so the values flowing into continuations
# repeat: interning the small values and memoizing substitution on object
# identity makes later shots nearly allocation-free.  Entries hold strong
# references to their keys, keeping ids valid.
_SUBST_CACHE: dict[tuple[int, str, int], tuple[CoreExpr, s.Term, s.Term]] = {}
_SUBST_CACHE_CAP = 100_000
_QLOC_CACHE: dict[int, s.QLoc] = {}


def _qloc(q: QubitSymbol) -> s.QLoc:
    out = _QLOC_CACHE.get(q.id)
    if out is None:
        out = s.QLoc(q)
        _QLOC_CACHE[q.id] = out
    return out


def _subst_cached(v: CoreExpr, x: str, t: s.Term) -> s.Term:
    key = (id(v), x, id(t))
    hit = _SUBST_CACHE.get(key)
    if hit is not None and hit[0] is v and hit[1] is t:
        return hit[2]
    out = subst(v, x, t)
    if len(_SUBST_CACHE) > _SUBST_CACHE_CAP:
        _SUBST_CACHE.clear()
    _SUBST_CACHE[key] = (v, t, out)
    return out


_NEW_SYM: dict[int, tuple[CoreCmd, QubitSymbol]] = {}


def _alloc_sym(node: s.New, store: "QuantumStore") -> QubitSymbol:
    """Symbol for an allocation: the node's own annotation, else a canonical
    per-node symbol (stable across shots so memoized substitutions hit),
    with a fresh fallback when it is already live."""
    q = node.sym
    if q is None:
        hit = _NEW_SYM.get(id(node))
        if hit is not None and hit[0] is node:
            q = hit[1]
        else:
            q = fresh_symbol(node.binder)
            if len(_NEW_SYM) > _SUBST_CACHE_CAP:
                _NEW_SYM.clear()
            _NEW_SYM[id(node)] = (node, q)
    if q in store.live:
        q = fresh_symbol(node.binder)
    return q


def eval_expr(e: CoreExpr) -> CoreExpr:
    """Evaluate a closed pure expression to a value."""
    while True:
        if is_value(e):
            return e
        match e:
            case s.Let(bound, x, body):
                e = _subst_cached(eval_expr(bound), x, body)
            case s.App(fn, arg):
                f = eval_expr(fn)
                a = eval_expr(arg)
                if not isinstance(f, s.Lam):
                    raise InterpError("application of a non-function value")
                e = _subst_cached(a, f.binder, f.body)
            case s.Tuple(items):
                return s.Tuple(tuple(eval_expr(i) for i in items))
            case s.Proj(i, tup):
                v = eval_expr(tup)
                if isinstance(v, s.Tuple):
                    if not 1 <= i <= len(v.items):
                        raise InterpError(f"projection index {i} out of range")
                    return v.items[i - 1]
                if i == 1:
                    return v
                raise InterpError("projection from a non-tuple value")
            case s.If(cond, then, els):
                c = eval_expr(cond)
                if not isinstance(c, s.BoolLit):
                    raise InterpError("if scrutinee is not a boolean value")
                e = then if c.value else els
            case s.Proc():
                e = desugar(e)
            case s.Var(name):
                raise InterpError(f"free variable {name}")
            case _:
                raise InterpError(f"cannot evaluate {e!r}")


def exec_cmd(m: CoreCmd, store: QuantumStore) -> CoreExpr:
    """Run a closed command to its final value (big-step).  Agrees with the
    small-step rules; used as the fast engine for sampling."""
    match m:
        case s.Ret(e):
            return eval_expr(e)
        case s.Bnd(boxed, x, rest):
            v = eval_expr(boxed)
            if not isinstance(v, s.CmdBox):
                raise InterpError("bnd of a non-command value")
            res = exec_cmd(v.cmd, store)
            return exec_cmd(_subst_cached(res, x, rest), store)
        case s.New(x, body, _):
            q = _alloc_sym(m, store)
            store.alloc(q)
            out = exec_cmd(_subst_cached(_qloc(q), x, body), store)
            store.release(q)
            return out
        case s.Scope(q, body):
            out = exec_cmd(body, store)
            store.release(q)
            return out
        case s.GateAp(g, args):
            syms = _unpack_refs(eval_expr(args))
            if syms is None:
                raise InterpError("gate applied to a non-reference value")
            store.apply_gate(mat_of_gate(g), syms)
            return UNIT_VAL
        case s.DiagAp(u, v, control, targets):
            c = eval_expr(control)
            ts = eval_expr(targets)
            csyms = _unpack_refs(c)
            tsyms = _unpack_refs(ts)
            if csyms is None or len(csyms) != 1 or tsyms is None:
                raise InterpError("diagonal gate applied to non-reference values")
            store.apply_gate(mat_of_gate(Diag(u, v)), csyms + tsyms)
            return UNIT_VAL
        case s.Meas(e):
            v = eval_expr(e)
            if not isinstance(v, s.QLoc):
                raise InterpError("measurement of a non-reference value")
            return s.TRUE if store.measure(v.sym) else s.FALSE
        case s.Block() | s.Do() | s.Call():
            return exec_cmd(desugar(m), store)
        case _:
            raise InterpError(f"cannot execute {m!r}")


@dataclass
class RunResult:
    counts: Counter = field(default_factory=Counter)
    outcomes: list[str] = field(default_factory=list)
    shots: int = 0

    def probabilities(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in sorted(self.counts.items())}


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    """The documented per-shot stream split: shot i of seed s draws from
    the counter-based Philox generator with key s and counter block
    i * 2^128, so shots are reproducible independently of execution order
    and never overlap."""
    return np.random.Generator(
        np.random.Philox(key=seed & (2**64 - 1), counter=shot << 128)
    )


def run(
    m: CoreCmd,
    free: tuple[QubitSymbol, ...] = (),
    seed: int = 0,
    shots: int = 1,
    mode: str = "density",
    engine: str = "direct",
    max_qubits: int = DEFAULT_QUBIT_BUDGET,
) -> RunResult:
    """Execute `m` for the given number of shots; free qubits start in the
    all-zero state.  Deterministic given (seed, shots, mode)."""
    m = desugar(m)
    out = RunResult(shots=shots)
    for shot in range(shots):
        store = QuantumStore(free, mode, shot_rng(seed, shot), max_qubits)
        if engine == "direct":
            value = exec_cmd(m, store)
        elif engine == "steps":
            term: s.Term = m
            while True:
                r = step_cmd(store, term)
                if isinstance(r, Final):
                    value = r.value
                    break
                if isinstance(r, Stuck):
                    raise InterpError(f"stuck: {r.reason}")
                term = r.term
        else:
            raise ValueError(f"unknown engine {engine!r}")
        key = print_value(value)
        out.counts[key] += 1
        out.outcomes.append(key)
    return out
