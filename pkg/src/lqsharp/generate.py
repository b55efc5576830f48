"""Seeded random generators for gate expressions and well-typed programs.

Programs are typed by construction: the generator threads the set of live
references and bound booleans and never emits an aliased gate application
or an escaping reference.  Used by the axiom driver, the property tests,
and the acceptance suite.
"""

from __future__ import annotations

import random

from . import syntax as s
from .gates import Adjoint, Diag, GateExpr, Identity, Named, Product, Tensor, gate_arity
from .syntax import BOOL, CoreCmd, CoreExpr, Prod, QubitSymbol, UNIT, UNIT_VAL

__all__ = [
    "random_gate",
    "random_program",
    "random_escaping_program",
    "random_cmd_template",
    "GenConfig",
]

_ONE_QUBIT = ["X", "Y", "Z", "H", "S", "T"]


def random_gate(rng: random.Random, arity: int, depth: int = 4) -> GateExpr:
    """A random gate expression of the given arity with bounded depth."""
    if depth <= 0 or rng.random() < 0.3:
        if arity == 0:
            return Identity(1)
        if arity == 1:
            return Named(rng.choice(_ONE_QUBIT))
        if arity == 2 and rng.random() < 0.4:
            return rng.choice([Named("SWAP"), Diag(Identity(2), Named("X"))])
        return Identity(2**arity)
    roll = rng.random()
    if roll < 0.25:
        return Adjoint(random_gate(rng, arity, depth - 1))
    if roll < 0.55:
        return Product(
            random_gate(rng, arity, depth - 1), random_gate(rng, arity, depth - 1)
        )
    if roll < 0.8 and arity >= 2:
        k = rng.randint(1, arity - 1)
        return Tensor(
            random_gate(rng, k, depth - 1), random_gate(rng, arity - k, depth - 1)
        )
    if arity >= 1:
        return Diag(
            random_gate(rng, arity - 1, depth - 1),
            random_gate(rng, arity - 1, depth - 1),
        )
    return Identity(1)


class GenConfig:
    def __init__(
        self,
        max_qubits: int = 4,
        max_meas: int = 4,
        max_depth: int = 8,
        gate_depth: int = 3,
        result: str = "any",  # "any" | "bools" (bool or tuple of bools)
    ):
        self.max_qubits = max_qubits
        self.max_meas = max_meas
        self.max_depth = max_depth
        self.gate_depth = gate_depth
        self.result = result


class _GenState:
    def __init__(self, cfg: GenConfig, rng: random.Random, refs, bools):
        self.cfg = cfg
        self.rng = rng
        self.refs: list[CoreExpr] = list(refs)  # in-scope qubit references
        self.bools: list[CoreExpr] = list(bools)
        self.qubits_used = len(refs)
        self.meas_used = 0
        self.var_count = 0

    def fresh_var(self, base: str) -> str:
        self.var_count += 1
        return f"{base}{self.var_count}"


def _bool_expr(st: _GenState) -> CoreExpr:
    rng = st.rng
    roll = rng.random()
    if st.bools and roll < 0.6:
        b = rng.choice(st.bools)
        if rng.random() < 0.25:
            # negation through an if expression
            return s.If(b, s.FALSE, s.TRUE)
        if rng.random() < 0.15:
            # beta-redex wrapper for normalization coverage
            return s.App(s.Lam("w", BOOL, s.Var("w")), b)
        return b
    if st.bools and roll < 0.7:
        a, b = rng.choice(st.bools), rng.choice(st.bools)
        return s.If(a, b, s.FALSE)
    return s.BoolLit(rng.random() < 0.5)


def _result_expr(st: _GenState) -> CoreExpr:
    rng = st.rng
    if st.cfg.result == "bools":
        n = rng.randint(1, 3)
        if n == 1:
            return _bool_expr(st)
        return s.Tuple(tuple(_bool_expr(st) for _ in range(n)))
    roll = rng.random()
    if roll < 0.4:
        return _bool_expr(st)
    if roll < 0.6 and st.bools:
        return s.Tuple((_bool_expr(st), _bool_expr(st)))
    return UNIT_VAL


def _gate_cmd(st: _GenState) -> CoreCmd | None:
    rng = st.rng
    if not st.refs:
        return None
    k = rng.randint(1, min(2, len(st.refs)))
    picks = rng.sample(st.refs, k)
    if rng.random() < 0.3 and len(st.refs) >= k + 1:
        # diagonal application with a distinct control
        control = rng.choice([r for r in st.refs if r not in picks])
        u = random_gate(rng, k, st.cfg.gate_depth)
        v = random_gate(rng, k, st.cfg.gate_depth)
        targets = picks[0] if k == 1 else s.Tuple(tuple(picks))
        return s.DiagAp(u, v, control, targets)
    g = random_gate(rng, k, st.cfg.gate_depth)
    args = picks[0] if k == 1 else s.Tuple(tuple(picks))
    return s.GateAp(g, args)


def _gen_cmd(st: _GenState, depth: int) -> CoreCmd:
    rng = st.rng
    cfg = st.cfg
    if depth <= 0:
        return s.Ret(_result_expr(st))
    roll = rng.random()
    if roll < 0.18 and st.qubits_used < cfg.max_qubits:
        st.qubits_used += 1
        x = st.fresh_var("q")
        st.refs.append(s.Var(x))
        body = _gen_cmd(st, depth - 1)
        st.refs.remove(s.Var(x))
        return s.New(x, body)
    if roll < 0.38 and st.refs and st.meas_used < cfg.max_meas:
        st.meas_used += 1
        x = st.fresh_var("b")
        target = rng.choice(st.refs)
        st.bools.append(s.Var(x))
        rest = _gen_cmd(st, depth - 1)
        st.bools.remove(s.Var(x))
        return s.Bnd(s.CmdBox(s.Meas(target)), x, rest)
    if roll < 0.62:
        head = _gate_cmd(st)
        if head is not None:
            if rng.random() < 0.25:
                return head if rng.random() < 0.5 else s.Bnd(
                    s.CmdBox(head), "_", s.Ret(_result_expr(st))
                )
            return s.Bnd(s.CmdBox(head), "_", _gen_cmd(st, depth - 1))
    if roll < 0.74 and st.bools:
        # branch on a measured boolean with boxed unit commands
        c1 = _gate_cmd(st) or s.Ret(UNIT_VAL)
        c2 = _gate_cmd(st) or s.Ret(UNIT_VAL)
        cond = _bool_expr(st)
        x = st.fresh_var("u")
        return s.Bnd(
            s.If(cond, s.CmdBox(c1), s.CmdBox(c2)), x, _gen_cmd(st, depth - 1)
        )
    if roll < 0.84:
        # pure let passed through a bind
        x = st.fresh_var("v")
        bound = _bool_expr(st)
        st.bools.append(s.Var(x))
        rest = _gen_cmd(st, depth - 1)
        st.bools.remove(s.Var(x))
        return s.Bnd(s.CmdBox(s.Ret(bound)), x, rest)
    return s.Ret(_result_expr(st))


def random_program(
    seed: int,
    n_free: int = 0,
    cfg: GenConfig | None = None,
) -> tuple[tuple[QubitSymbol, ...], CoreCmd]:
    """A closed well-typed command over `n_free` free qubit references."""
    cfg = cfg or GenConfig()
    rng = random.Random(seed)
    free = tuple(s.fresh_symbol(f"f{i}") for i in range(n_free))
    st = _GenState(cfg, rng, [s.QLoc(q) for q in free], [])
    depth = rng.randint(2, cfg.max_depth)
    return free, _gen_cmd(st, depth)


def random_escaping_program(seed: int) -> CoreCmd:
    """A program returning an allocated reference at some depth; must always
    be rejected by the typechecker."""
    rng = random.Random(seed)
    x = "esc"
    leak: CoreExpr = s.Var(x)
    if rng.random() < 0.4:
        leak = s.Tuple((s.BoolLit(True), leak))
    elif rng.random() < 0.5:
        leak = s.Lam("u", UNIT, leak)
    body: CoreCmd = s.Ret(leak)
    for _ in range(rng.randint(0, 3)):
        wrap = rng.random()
        if wrap < 0.4:
            body = s.Bnd(s.CmdBox(s.Meas(s.Var(x))), f"b{rng.randint(0, 9)}", body)
        elif wrap < 0.7:
            body = s.Bnd(s.CmdBox(s.GateAp(Named("H"), s.Var(x))), "_", body)
        else:
            body = s.New("other", body)
    return s.New(x, body)


def random_cmd_template(
    rng: random.Random,
    ref_vars: list[str],
    bool_vars: list[str],
    *,
    result: str = "unit",
    max_meas: int = 1,
    allow_new: bool = True,
) -> CoreCmd:
    """A small command over the given reference/bool variables, for
    instantiating the commutativity equations.  `result` is "unit" or
    "bool"."""
    cfg = GenConfig(max_qubits=len(ref_vars) + 1, max_meas=max_meas, max_depth=3)
    st = _GenState(cfg, rng, [s.Var(r) for r in ref_vars], [s.Var(b) for b in bool_vars])
    st.qubits_used = len(ref_vars) if allow_new else cfg.max_qubits
    items: list[tuple[str | None, CoreCmd]] = []
    for _ in range(rng.randint(0, 2)):
        head = _gate_cmd(st)
        if head is not None:
            items.append((None, head))
    if rng.random() < 0.4 and st.refs and max_meas > 0:
        x = st.fresh_var("t")
        items.append((x, s.Meas(rng.choice(st.refs))))
        st.bools.append(s.Var(x))
    last: CoreCmd
    if result == "bool":
        last = s.Ret(_bool_expr(st))
    else:
        tail = _gate_cmd(st)
        last = tail if tail is not None and rng.random() < 0.5 else s.Ret(UNIT_VAL)
    if not items:
        return last
    return s.Block(tuple(items), last)


def count_gate_nodes(t: s.Term) -> int:
    """Number of gate/diagonal application nodes in a term."""
    n = 0
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, (s.GateAp, s.DiagAp)):
            n += 1
        stack.extend(s._children(cur))
    return n
