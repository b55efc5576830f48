"""Elaboration from the Q# subset to the core calculus.

Each callable elaborates once against fresh definition symbols for its
qubit-typed parameters.  Call sites are recorded; emission then
monomorphizes, cloning a callable per distinct call-site symbol tuple and
reusing the plain name for the first clone, so a program whose call sites
agree (like the teleport example) emits exactly one let per callable.
Adjoint/Controlled functors inline their target through mat(), which
unfolds an adjointable operation body to its primitive gate sequence.

The result is a let-chain of procs ending in the unit value, together with
the signature of definition symbols it mentions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qsharp as q, syntax as s
from .gates import Adjoint, Dense, Diag, GateExpr, Identity, Named, gate_arity, mat_of_gate
from .interp import eval_expr, _unpack_refs
from .qstate import embed_unitary
from .syntax import (
    BOOL,
    Block,
    Bnd,
    Call,
    CmdBox,
    CoreCmd,
    CoreExpr,
    CoreType,
    If,
    New,
    Proc,
    Proj,
    QLoc,
    QRef,
    QubitSymbol,
    Ret,
    Tuple,
    UNIT,
    UNIT_VAL,
    Var,
    desugar,
    fresh_symbol,
    rename_symbols,
    subst,
)
from .typecheck import Signature

__all__ = [
    "ElabError",
    "UnknownCallable",
    "NonAdjointable",
    "ElabResult",
    "EmittedCallable",
    "elaborate",
    "elaborate_source",
    "mat_of_operation",
    "entry_command",
]

_GATES_1Q = {"H", "X", "Y", "Z", "S", "T"}
_INTRINSICS = _GATES_1Q | {"CNOT", "SWAP", "M"}


class ElabError(Exception):
    def __init__(self, msg: str, span: s.Span | None = None):
        super().__init__(msg if span is None else f"{span}: {msg}")
        self.msg = msg
        self.span = span


class UnknownCallable(ElabError):
    pass


class NonAdjointable(ElabError):
    pass


@dataclass
class _CallRecord:
    placeholder: str
    callee: str
    arg_syms: tuple[QubitSymbol, ...]  # aligned with the callee's qubit leaves


@dataclass
class _Def:
    decl: q.QsCallable
    dom_type: CoreType
    qubit_leaves: tuple[QubitSymbol, ...]
    local_syms: tuple[QubitSymbol, ...]
    template: CoreExpr  # Proc for operations, Lam for functions
    calls: tuple[_CallRecord, ...]


@dataclass
class EmittedCallable:
    name: str
    source: str  # source callable name
    kind: str
    proc: CoreExpr  # references earlier let-bound names
    closed: CoreExpr  # all callees substituted in
    dom_type: CoreType
    qubit_leaves: tuple[QubitSymbol, ...]
    ret: q.QsType
    characteristics: tuple[str, ...]


@dataclass
class ElabResult:
    program: CoreExpr
    signature: Signature
    callables: dict[str, EmittedCallable]
    order: list[str]


class _Env:
    def __init__(self):
        self.expr: dict[str, CoreExpr] = {}
        self.qtype: dict[str, q.QsType] = {}
        self.path_sym: dict[CoreExpr, QubitSymbol] = {}

    def child(self) -> "_Env":
        out = _Env()
        out.expr = dict(self.expr)
        out.qtype = dict(self.qtype)
        out.path_sym = dict(self.path_sym)
        return out


def _qs_type_to_core(t: q.QsType, leaf_syms: list[QubitSymbol], name_hint: str) -> CoreType:
    match t:
        case q.QTQubit():
            sym = fresh_symbol(name_hint)
            leaf_syms.append(sym)
            return QRef(sym)
        case q.QTBool() | q.QTResult():
            return BOOL
        case q.QTUnit():
            return UNIT
        case q.QTTuple(items):
            return s.Prod(
                tuple(_qs_type_to_core(i, leaf_syms, name_hint) for i in items)
            )
        case q.QTArrow(dom, cod, operation):
            d = _qs_type_to_core(dom, leaf_syms, name_hint)
            c = _qs_type_to_core(cod, leaf_syms, name_hint)
            return s.Arrow(d, s.CmdType(c) if operation else c)
        case _:
            raise ElabError(f"cannot elaborate type {t!r}")


def _pattern_qubit_leaves(pat: q.QsPattern) -> list[tuple[str, q.QsType]]:
    match pat:
        case q.PVar(name, t):
            return [(name, t)]
        case q.PTuple(items):
            out = []
            for i in items:
                out.extend(_pattern_qubit_leaves(i))
            return out
    raise AssertionError


class _Elaborator:
    def __init__(self, prog: q.QsProgram):
        self.prog = prog
        self.defs: dict[str, _Def] = {}
        self.called: set[str] = set()
        self._placeholder_count = 0

    # -- definition elaboration --

    def run(self) -> ElabResult:
        for decl in self.prog.callables:
            if decl.name in self.defs:
                raise ElabError(f"duplicate callable {decl.name}", decl.span)
            if decl.name in _INTRINSICS:
                raise ElabError(f"cannot redefine intrinsic {decl.name}", decl.span)
            self.defs[decl.name] = self._elab_callable(decl)
        roots = [n for n in self.defs if n not in self.called]
        if not roots:
            roots = list(self.defs)
        emitted: list[EmittedCallable] = []
        memo: dict[tuple, str] = {}
        used_names: dict[str, int] = {}
        for root in roots:
            self._specialize(root, {}, emitted, memo, used_names, [])
        program: CoreExpr = UNIT_VAL
        for item in reversed(emitted):
            program = s.Let(item.proc, item.name, program)
        closed: dict[str, CoreExpr] = {}
        for item in emitted:
            c = item.proc
            for prev_name, prev_closed in closed.items():
                c = subst(prev_closed, prev_name, c)
            closed[item.name] = c
            item.closed = c
        syms = _ordered_symbols(program)
        _uniquify_display(syms)
        return ElabResult(
            program,
            Signature(tuple(syms)),
            {e.name: e for e in emitted},
            [e.name for e in emitted],
        )

    def _placeholder(self, callee: str) -> str:
        self._placeholder_count += 1
        return f"__call_{callee}_{self._placeholder_count}"

    def _tmp_name(self) -> str:
        self._placeholder_count += 1
        return f"r{self._placeholder_count}"

    def _elab_callable(self, decl: q.QsCallable) -> _Def:
        env = _Env()
        leaf_syms: list[QubitSymbol] = []
        leaves = _pattern_qubit_leaves(decl.params)

        def bind_pattern(pat: q.QsPattern, path: CoreExpr) -> CoreType:
            match pat:
                case q.PVar(name, t):
                    syms_before = len(leaf_syms)
                    core_t = _qs_type_to_core(t, leaf_syms, name)
                    env.expr[name] = path
                    env.qtype[name] = t
                    if isinstance(t, q.QTQubit):
                        env.path_sym[path] = leaf_syms[syms_before]
                    return core_t
                case q.PTuple(items):
                    parts = tuple(
                        bind_pattern(item, Proj(i + 1, path))
                        for i, item in enumerate(items)
                    )
                    return s.Prod(parts)
            raise AssertionError

        if isinstance(decl.params, q.PTuple) and not decl.params.items:
            binder = "_"
            dom: CoreType = UNIT
        elif isinstance(decl.params, q.PVar):
            binder = decl.params.name
            dom = bind_pattern(decl.params, Var(binder))
        else:
            binder = "args"
            dom = bind_pattern(decl.params, Var(binder))

        calls: list[_CallRecord] = []
        locals_: list[QubitSymbol] = []
        if decl.kind == "operation":
            body = self._elab_stmts(list(decl.body), env, calls, locals_)
            template: CoreExpr = Proc(binder, dom, body)
        else:
            expr = self._elab_fn_body(list(decl.body), env, calls)
            template = s.Lam(binder, dom, expr)
        del leaves
        return _Def(
            decl, dom, tuple(leaf_syms), tuple(locals_), template, tuple(calls)
        )

    def _elab_fn_body(self, stmts: list[q.QsStmt], env: _Env, calls) -> CoreExpr:
        if not stmts:
            return UNIT_VAL
        st = stmts[0]
        match st:
            case q.SLet(name, e):
                val, items, qt = self._elab_pure(e, env, calls, st.span)
                del items
                env2 = env.child()
                env2.expr[name] = Var(name)
                if qt is not None:
                    env2.qtype[name] = qt
                if isinstance(qt, q.QTQubit) and val in env.path_sym:
                    env2.path_sym[Var(name)] = env.path_sym[val]
                return s.Let(val, name, self._elab_fn_body(stmts[1:], env2, calls))
            case q.SReturn(e):
                val, _, _ = self._elab_pure(e, env, calls, st.span)
                return val
            case _:
                raise ElabError(
                    "function bodies are restricted to let and return", st.span
                )

    def _elab_pure(self, e: q.QsExpr, env: _Env, calls, span):
        val, items, qt = self._elab_expr(e, env, calls, None, pure=True)
        if items:
            raise ElabError("functions must be pure (no operation calls)", span)
        return val, items, qt

    # -- statements --

    def _elab_stmts(
        self,
        stmts: list[q.QsStmt],
        env: _Env,
        calls: list[_CallRecord],
        locals_: list[QubitSymbol],
    ) -> CoreCmd:
        items: list[tuple[str | None, CoreCmd]] = []

        def finish(last: CoreCmd) -> CoreCmd:
            if not items:
                return last
            return Block(tuple(items), last)

        i = 0
        while i < len(stmts):
            st = stmts[i]
            match st:
                case q.SLet(name, e):
                    cmd, pre = self._elab_rhs(e, env, calls, locals_)
                    items.extend(pre)
                    items.append((name, cmd))
                    env = env.child()
                    env.expr[name] = Var(name)
                    qt = self._qs_type_of(e, env)
                    if qt is not None:
                        env.qtype[name] = qt
                    src_sym = self._sym_of_expr(e, env)
                    if src_sym is not None:
                        env.path_sym[Var(name)] = src_sym
                case q.SUse(name, block):
                    sym = fresh_symbol(name)
                    locals_.append(sym)
                    inner_env = env.child()
                    inner_env.expr[name] = Var(name)
                    inner_env.qtype[name] = q.QTQubit()
                    inner_env.path_sym[Var(name)] = sym
                    if block is None:
                        rest = self._elab_stmts(stmts[i + 1 :], inner_env, calls, locals_)
                        return finish(New(name, rest, sym))
                    inner = self._elab_stmts(list(block), inner_env, calls, locals_)
                    items.append((None, New(name, inner, sym)))
                case q.SIf(arms, els):
                    cmd, pre = self._elab_if(arms, els, env, calls, locals_)
                    items.extend(pre)
                    items.append((None, cmd))
                case q.SReturn(e):
                    val, pre, _ = self._elab_expr(e, env, calls, locals_)
                    items.extend(pre)
                    return finish(Ret(val))
                case q.SExpr(e):
                    cmd, pre = self._elab_rhs(e, env, calls, locals_)
                    items.extend(pre)
                    items.append((None, cmd))
                case _:
                    raise ElabError(f"cannot elaborate statement {st!r}", st.span)
            i += 1
        # no return statement: a trailing discarding command becomes the
        # final command; otherwise the body ends by returning unit
        if items and items[-1][0] is None:
            binder, last = items.pop()
            return finish(last)
        return finish(Ret(UNIT_VAL))

    def _elab_if(self, arms, els, env, calls, locals_):
        (cond, block), rest = arms[0], arms[1:]
        cval, pre, _ = self._elab_expr(cond, env, calls, locals_)
        then_cmd = self._elab_stmts(list(block), env.child(), calls, locals_)
        if rest:
            else_cmd, pre2 = self._elab_if(rest, els, env, calls, locals_)
            pre = pre + pre2
        elif els is not None:
            else_cmd = self._elab_stmts(list(els), env.child(), calls, locals_)
        else:
            else_cmd = Ret(UNIT_VAL)
        run = Bnd(If(cval, CmdBox(then_cmd), CmdBox(else_cmd)), "y", Ret(Var("y")))
        return run, pre

    # -- expressions --

    def _qs_type_of(self, e: q.QsExpr, env: _Env) -> q.QsType | None:
        match e:
            case q.EVar(name):
                if name in env.qtype:
                    return env.qtype[name]
                if name in self.defs:
                    d = self.defs[name].decl
                    return q.QTArrow(
                        _pattern_type(d.params), d.ret, d.kind == "operation"
                    )
                return None
            case q.EBool(_):
                return q.QTBool()
            case q.EResult(_):
                return q.QTResult()
            case q.EUnit():
                return q.QTUnit()
            case q.ETuple(items):
                ts = [self._qs_type_of(i, env) for i in items]
                if any(t is None for t in ts):
                    return None
                return q.QTTuple(tuple(ts))
            case q.ECmp(_, _, _):
                return q.QTBool()
            case q.ECall(fn, _):
                ft = self._qs_type_of(fn, env)
                if isinstance(ft, q.QTArrow):
                    return ft.cod
                if isinstance(fn, q.EVar) and fn.name == "M":
                    return q.QTResult()
                if isinstance(fn, q.EVar) and fn.name in _INTRINSICS:
                    return q.QTUnit()
                return None
            case _:
                return None

    def _sym_of_expr(self, e: q.QsExpr, env: _Env) -> QubitSymbol | None:
        if isinstance(e, q.EVar) and isinstance(env.qtype.get(e.name), q.QTQubit):
            return env.path_sym.get(env.expr[e.name])
        return None

    def _elab_rhs(self, e: q.QsExpr, env, calls, locals_):
        """Elaborate an expression in command position: returns (cmd, pre)."""
        match e:
            case q.ECall(_, _) | q.ECmp(_, _, _):
                cmd = self._call_command(e, env, calls, locals_)
                if cmd is not None:
                    return cmd
        val, pre, _ = self._elab_expr(e, env, calls, locals_)
        return Ret(val), pre

    def _call_command(self, e: q.QsExpr, env, calls, locals_):
        """A call or comparison as a command, or None when it is pure."""
        match e:
            case q.ECmp(_, _, _):
                val, pre, _ = self._elab_expr(e, env, calls, locals_)
                return Ret(val), pre
            case q.ECall(q.EVar("M"), args):
                if len(args) != 1:
                    raise ElabError("M takes exactly one qubit", e.span)
                a, pre, _ = self._elab_expr(args[0], env, calls, locals_)
                return s.Meas(a), pre
            case q.ECall(q.EVar(name), args) if name in _GATES_1Q:
                if len(args) != 1:
                    raise ElabError(f"{name} takes exactly one qubit", e.span)
                a, pre, _ = self._elab_expr(args[0], env, calls, locals_)
                return s.GateAp(Named(name), a), pre
            case q.ECall(q.EVar("CNOT"), args):
                if len(args) != 2:
                    raise ElabError("CNOT takes two qubits", e.span)
                c, pre1, _ = self._elab_expr(args[0], env, calls, locals_)
                t, pre2, _ = self._elab_expr(args[1], env, calls, locals_)
                return s.DiagAp(Identity(2), Named("X"), c, t), pre1 + pre2
            case q.ECall(q.EVar("SWAP"), args):
                if len(args) != 2:
                    raise ElabError("SWAP takes two qubits", e.span)
                a, pre1, _ = self._elab_expr(args[0], env, calls, locals_)
                b, pre2, _ = self._elab_expr(args[1], env, calls, locals_)
                return s.GateAp(Named("SWAP"), Tuple((a, b))), pre1 + pre2
            case q.ECall(q.EVar(name), args) if name in self.defs:
                d = self.defs[name]
                if d.decl.kind == "function":
                    return None
                self.called.add(name)
                arg_vals: list[CoreExpr] = []
                pre: list = []
                for a in args:
                    v, p, _ = self._elab_expr(a, env, calls, locals_)
                    arg_vals.append(v)
                    pre.extend(p)
                arg_expr = _args_tuple(arg_vals)
                syms = self._match_arg_syms(d.decl.params, args, arg_vals, env, e.span)
                ph = self._placeholder(name)
                calls.append(_CallRecord(ph, name, tuple(syms)))
                return Call(Var(ph), arg_expr), pre
            case q.ECall(q.EAdj(target), args):
                return self._functor_gate(target, args, env, calls, locals_, e.span, adjoint=True)
            case q.ECall(q.ECtl(target), args):
                return self._controlled(target, args, env, calls, locals_, e.span)
            case q.ECall(q.EVar(name), args) if (
                isinstance(env.qtype.get(name), q.QTArrow)
                and env.qtype[name].operation
            ):
                arg_vals = []
                pre = []
                for a in args:
                    v, p, _ = self._elab_expr(a, env, calls, locals_)
                    arg_vals.append(v)
                    pre.extend(p)
                return Call(env.expr[name], _args_tuple(arg_vals)), pre
            case q.ECall(q.EVar(name), _):
                raise UnknownCallable(f"unknown callable {name}", e.span)
        return None

    def _functor_gate(self, target, args, env, calls, locals_, span, adjoint):
        """Adjoint e1 (e2): apply the conjugate transpose of mat(e1)."""
        gate = self._target_gate(target, span)
        arg_vals = []
        pre = []
        for a in args:
            v, p, _ = self._elab_expr(a, env, calls, locals_)
            arg_vals.append(v)
            pre.extend(p)
        if isinstance(gate, Diag):
            # adjoint of a block diagonal keeps the control structure
            u, v_ = (Adjoint(gate.on_zero), Adjoint(gate.on_one))
            if len(arg_vals) < 2:
                raise ElabError("controlled gate needs control and targets", span)
            return s.DiagAp(u, v_, arg_vals[0], _args_tuple(arg_vals[1:])), pre
        g = Adjoint(gate) if adjoint else gate
        return s.GateAp(g, _args_tuple(arg_vals)), pre

    def _controlled(self, target, args, env, calls, locals_, span):
        """Controlled e1 (controls, e2): block diagonal with identity in the
        zero branch; control lists expand to nested single controls with the
        first control outermost."""
        gate = self._target_gate(target, span)
        if len(args) < 2:
            raise ElabError("Controlled needs controls and arguments", span)
        controls_e, rest = args[0], list(args[1:])
        if isinstance(controls_e, q.EArray):
            control_exprs = list(controls_e.items)
        else:
            control_exprs = [controls_e]
        pre: list = []
        cvals = []
        for c in control_exprs:
            v, p, _ = self._elab_expr(c, env, calls, locals_)
            cvals.append(v)
            pre.extend(p)
        tvals = []
        for a in rest:
            v, p, _ = self._elab_expr(a, env, calls, locals_)
            tvals.append(v)
            pre.extend(p)
        g = gate
        for _ in cvals[1:]:
            g = Diag(Identity(2 ** gate_arity(g)), g)
        n_inner = gate_arity(g)
        cmd = s.DiagAp(
            Identity(2**n_inner),
            g,
            cvals[0],
            _args_tuple(cvals[1:] + tvals),
        )
        return cmd, pre

    def _target_gate(self, target: q.QsExpr, span) -> GateExpr:
        if isinstance(target, q.EVar):
            name = target.name
            if name in _GATES_1Q:
                return Named(name)
            if name == "CNOT":
                return Diag(Identity(2), Named("X"))
            if name == "SWAP":
                return Named("SWAP")
            if name == "M":
                raise NonAdjointable("M is not unitary", span)
            if name in self.defs:
                mtx = self.mat(name)
                return Dense.of_matrix(mtx, label=name)
            raise UnknownCallable(f"unknown callable {name}", span)
        if isinstance(target, q.EAdj):
            return Adjoint(self._target_gate(target.inner, span))
        raise ElabError("functor target must be a named callable", span)

    def _elab_expr(self, e: q.QsExpr, env, calls, locals_, pure: bool = False):
        """Returns (core expr, hoisted items, qs type or None)."""
        match e:
            case q.EVar(name):
                if name in env.expr:
                    return env.expr[name], [], env.qtype.get(name)
                if name in self.defs:
                    raise ElabError(
                        f"callable {name} used as a value outside a call or "
                        "functor; pass operation-typed parameters instead",
                        e.span,
                    )
                raise ElabError(f"unbound name {name}", e.span)
            case q.EBool(v):
                return s.BoolLit(v), [], q.QTBool()
            case q.EResult(one):
                return s.BoolLit(one), [], q.QTResult()
            case q.EUnit():
                return UNIT_VAL, [], q.QTUnit()
            case q.ETuple(items):
                vals = []
                pre: list = []
                ts = []
                for i in items:
                    v, p, t = self._elab_expr(i, env, calls, locals_, pure)
                    vals.append(v)
                    pre.extend(p)
                    ts.append(t)
                qt = (
                    q.QTTuple(tuple(ts)) if all(t is not None for t in ts) else None
                )
                return Tuple(tuple(vals)), pre, qt
            case q.ECmp(lhs, rhs, negated):
                return self._elab_cmp(lhs, rhs, negated, env, calls, locals_, e.span)
            case q.ECall(_, _):
                fn_call = self._elab_fn_call(e, env, calls)
                if fn_call is not None:
                    return fn_call
                if pure:
                    raise ElabError(
                        "functions must be pure (no operation calls)", e.span
                    )
                res = self._call_command(e, env, calls, locals_)
                if res is None:
                    raise UnknownCallable(f"unknown callable in {e!r}", e.span)
                cmd, pre = res
                if isinstance(cmd, Ret):
                    return cmd.expr, pre, self._qs_type_of(e, env)
                tmp = self._tmp_name()
                return Var(tmp), pre + [(tmp, cmd)], self._qs_type_of(e, env)
            case q.EArray(_):
                raise q.UnsupportedFeature("arrays", e.span)
            case q.EAdj(_) | q.ECtl(_):
                raise ElabError("functors must be applied to arguments", e.span)
            case _:
                raise ElabError(f"cannot elaborate expression {e!r}", e.span)

    def _elab_fn_call(self, e: q.QsExpr, env, calls):
        """A call that is a pure function application, or None."""
        assert isinstance(e, q.ECall)
        if not isinstance(e.fn, q.EVar):
            return None
        name = e.fn.name
        if name in self.defs and self.defs[name].decl.kind == "function":
            self.called.add(name)
            vals = []
            pre: list = []
            for a in e.args:
                v, p, _ = self._elab_expr(a, env, calls, None)
                vals.append(v)
                pre.extend(p)
            d = self.defs[name]
            syms = self._match_arg_syms(d.decl.params, e.args, vals, env, e.span)
            ph = self._placeholder(name)
            calls.append(_CallRecord(ph, name, tuple(syms)))
            return s.App(Var(ph), _args_tuple(vals)), pre, d.decl.ret
        qt = env.qtype.get(name)
        if isinstance(qt, q.QTArrow) and not qt.operation:
            vals = []
            pre = []
            for a in e.args:
                v, p, _ = self._elab_expr(a, env, calls, None)
                vals.append(v)
                pre.extend(p)
            return s.App(env.expr[name], _args_tuple(vals)), pre, qt.cod
        return None

    def _elab_cmp(self, lhs, rhs, negated, env, calls, locals_, span):
        lit = None
        other = None
        for a, b in ((lhs, rhs), (rhs, lhs)):
            if isinstance(a, q.EResult):
                lit, other = a, b
                break
        if lit is None:
            raise q.UnsupportedFeature(
                "general equality (only comparisons against One/Zero)", span
            )
        base, pre, qt = self._elab_expr(other, env, calls, locals_)
        if qt is not None and not isinstance(qt, (q.QTResult, q.QTBool)):
            raise ElabError("comparison against One/Zero needs a Result", span)
        positive = lit.one != negated
        if positive:
            return base, pre, q.QTBool()
        return If(base, s.FALSE, s.TRUE), pre, q.QTBool()

    def _match_arg_syms(self, pattern, arg_exprs, arg_vals, env, span):
        """Align the callee's qubit leaves with the symbols of the actual
        arguments (projection paths compose through tuple-typed arguments)."""
        out: list[QubitSymbol] = []

        def walk(pat: q.QsPattern, val: CoreExpr):
            match pat:
                case q.PVar(_, q.QTQubit()):
                    sym = env.path_sym.get(val)
                    if sym is None and isinstance(val, QLoc):
                        sym = val.sym
                    if sym is None:
                        raise ElabError(
                            "cannot resolve the qubit argument to a symbol", span
                        )
                    out.append(sym)
                case q.PVar(_, t):
                    if _count_qubits_in_type(t) > 0:
                        raise ElabError(
                            "qubit-typed components must be passed explicitly",
                            span,
                        )
                case q.PTuple(items):
                    if isinstance(val, Tuple) and len(val.items) == len(items):
                        for p2, v2 in zip(items, val.items):
                            walk(p2, v2)
                    else:
                        for i, p2 in enumerate(items):
                            walk(p2, Proj(i + 1, val))

        if isinstance(pattern, q.PTuple):
            if len(arg_vals) == len(pattern.items):
                for p2, v2 in zip(pattern.items, arg_vals):
                    walk(p2, v2)
            elif len(arg_vals) == 1:
                walk(pattern, arg_vals[0])
            else:
                raise ElabError("argument arity mismatch", span)
        else:
            if len(arg_vals) != 1:
                raise ElabError("argument arity mismatch", span)
            walk(pattern, arg_vals[0])
        return out

    # -- monomorphization --

    def _specialize(
        self,
        name: str,
        mapping: dict[int, QubitSymbol],
        emitted: list[EmittedCallable],
        memo: dict,
        used_names: dict[str, int],
        stack: list[str],
    ) -> str:
        if name in stack:
            raise UnknownCallable(f"recursive callable {name} is unsupported")
        d = self.defs[name]
        key = (name, tuple(mapping.get(q2.id, q2).id for q2 in d.qubit_leaves))
        if key in memo:
            return memo[key]
        full_map: dict[QubitSymbol, QubitSymbol] = {}
        for q2 in d.qubit_leaves:
            full_map[q2] = mapping.get(q2.id, q2)
        for loc in d.local_syms:
            full_map[loc] = fresh_symbol(loc.display_name)
        body = rename_symbols(d.template, full_map)
        for rec in d.calls:
            inner = {}
            callee_leaves = self.defs[rec.callee].qubit_leaves
            for leaf, arg in zip(callee_leaves, rec.arg_syms):
                concrete = full_map.get(arg, mapping.get(arg.id, arg))
                inner[leaf.id] = concrete
            inner_name = self._specialize(
                rec.callee, inner, emitted, memo, used_names, stack + [name]
            )
            body = subst(Var(inner_name), rec.placeholder, body)
        count = used_names.get(name, 0) + 1
        used_names[name] = count
        spec_name = name if count == 1 else f"{name}_{count}"
        dom = body.annot if isinstance(body, (Proc, s.Lam)) else d.dom_type
        leaves = tuple(full_map[q2] for q2 in d.qubit_leaves)
        memo[key] = spec_name
        emitted.append(
            EmittedCallable(
                spec_name,
                name,
                d.decl.kind,
                body,
                body,
                dom,
                leaves,
                d.decl.ret,
                d.decl.characteristics,
            )
        )
        return spec_name

    # -- mat --

    def mat(self, name: str) -> np.ndarray:
        """Unitary matrix of an adjointable operation, by unfolding its body
        to primitive gates (definition symbols; matrices are symbol-free)."""
        if name not in self.defs:
            raise UnknownCallable(f"unknown callable {name}")
        closed = self._closed_template(name, [])
        return mat_of_operation(closed)

    def _closed_template(self, name: str, stack: list[str]) -> CoreExpr:
        if name in stack:
            raise UnknownCallable(f"recursive callable {name} is unsupported")
        d = self.defs[name]
        body = d.template
        for rec in d.calls:
            inner = self._closed_template(rec.callee, stack + [name])
            # align the callee's definition symbols with this call site
            ren = {
                leaf: arg
                for leaf, arg in zip(self.defs[rec.callee].qubit_leaves, rec.arg_syms)
            }
            body = subst(rename_symbols(inner, ren), rec.placeholder, body)
        return body


def _count_qubits_in_type(t: q.QsType) -> int:
    match t:
        case q.QTQubit():
            return 1
        case q.QTTuple(items):
            return sum(_count_qubits_in_type(i) for i in items)
        case q.QTArrow(d, c, _):
            return _count_qubits_in_type(d) + _count_qubits_in_type(c)
        case _:
            return 0


def _pattern_type(pat: q.QsPattern) -> q.QsType:
    match pat:
        case q.PVar(_, t):
            return t
        case q.PTuple(items):
            if not items:
                return q.QTUnit()
            return q.QTTuple(tuple(_pattern_type(i) for i in items))
    raise AssertionError


def _args_tuple(vals: list[CoreExpr]) -> CoreExpr:
    if not vals:
        return UNIT_VAL
    if len(vals) == 1:
        return vals[0]
    return Tuple(tuple(vals))


def _ordered_symbols(t: s.Term) -> list[QubitSymbol]:
    seen: list[QubitSymbol] = []

    def ty(tau: CoreType):
        match tau:
            case QRef(sym):
                if sym not in seen:
                    seen.append(sym)
            case s.Arrow(d, c):
                ty(d)
                ty(c)
            case s.CmdType(r):
                ty(r)
            case s.Prod(items):
                for i in items:
                    ty(i)

    def go(t: s.Term, bound: set[int]):
        match t:
            case s.Lam(_, annot, body) | Proc(_, annot, body):
                ty(annot)
                go(body, bound)
            case QLoc(sym):
                if sym.id not in bound and sym not in seen:
                    seen.append(sym)
            case New(_, body, sym):
                go(body, bound | ({sym.id} if sym else set()))
            case s.Scope(sym, body):
                go(body, bound | {sym.id})
            case _:
                for child in s._children(t):
                    go(child, bound)

    go(t, set())
    return seen


def _uniquify_display(syms: list[QubitSymbol]) -> None:
    used: set[str] = set()
    for sym in syms:
        base = sym.display_name
        name = base
        n = 1
        while name in used:
            n += 1
            name = f"{base}_{n}"
        sym.display_name = name
        used.add(name)


def mat_of_operation(proc: CoreExpr, adjoint: bool = False) -> np.ndarray:
    """Unfold a closed operation of type (qubit references) => Unit into its
    unitary matrix, multiplying primitive gates in execution order."""
    proc = desugar(proc)
    if not isinstance(proc, s.Lam):
        raise NonAdjointable("mat target must be an operation value")
    if not isinstance(proc.body, CmdBox):
        raise NonAdjointable("mat target must be an operation, not a function")
    leaves: list[QubitSymbol] = []

    def build(tau: CoreType) -> CoreExpr:
        match tau:
            case QRef(sym):
                leaves.append(sym)
                return QLoc(sym)
            case s.Prod(items):
                return Tuple(tuple(build(i) for i in items))
            case _:
                raise NonAdjointable(
                    f"operation domain must be qubit references, got {tau}"
                )

    arg = build(proc.annot)
    body = subst(arg, proc.binder, proc.body.cmd)
    n = len(leaves)
    pos = {sym.id: i for i, sym in enumerate(leaves)}
    total = np.eye(2**n, dtype=complex)

    def walk(cmd: CoreCmd) -> CoreExpr:
        nonlocal total
        match cmd:
            case Ret(e):
                return eval_expr(e)
            case Bnd(boxed, x, rest):
                v = eval_expr(boxed)
                if not isinstance(v, CmdBox):
                    raise NonAdjointable("bind of a non-command during unfolding")
                r = walk(v.cmd)
                return walk(subst(r, x, rest))
            case s.GateAp(g, args):
                syms = _unpack_refs(eval_expr(args))
                if syms is None:
                    raise NonAdjointable("gate argument did not resolve")
                total = embed_unitary(
                    mat_of_gate(g), n, [pos[q2.id] for q2 in syms]
                ) @ total
                return UNIT_VAL
            case s.DiagAp(u, v, c, ts):
                csyms = _unpack_refs(eval_expr(c))
                tsyms = _unpack_refs(eval_expr(ts))
                if csyms is None or tsyms is None:
                    raise NonAdjointable("gate argument did not resolve")
                full = mat_of_gate(Diag(u, v))
                total = embed_unitary(
                    full, n, [pos[q2.id] for q2 in csyms + tsyms]
                ) @ total
                return UNIT_VAL
            case s.Meas(_):
                raise NonAdjointable("operation measures, so it has no unitary")
            case New(_, _, _) | s.Scope(_, _):
                raise NonAdjointable("operation allocates, so it has no unitary")
            case _:
                raise NonAdjointable(f"cannot unfold {cmd!r}")

    walk(desugar(body))
    return total.conj().T if adjoint else total


def elaborate(prog: q.QsProgram) -> ElabResult:
    return _Elaborator(prog).run()


def elaborate_source(text: str) -> ElabResult:
    return elaborate(q.parse_qs(text))


def entry_command(result: ElabResult, name: str | None = None) -> CoreCmd:
    """A runnable command calling a zero-qubit-parameter operation (the
    named one, or the last such operation)."""
    candidates = [
        c
        for c in (result.callables[n] for n in result.order)
        if c.kind == "operation" and not c.qubit_leaves
    ]
    if name is not None:
        candidates = [c for c in candidates if c.source == name or c.name == name]
    if not candidates:
        raise ElabError("no zero-qubit-parameter operation to run")
    target = candidates[-1]
    return Call(target.closed, UNIT_VAL)
