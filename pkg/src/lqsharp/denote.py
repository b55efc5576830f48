"""Brute-force superoperator oracle.

A closed command over k free qubits denotes a quantum instrument: a finite
map from classical result values to completely positive maps, summing to a
trace-preserving map.  The denotation is computed by symbolic execution on
a doubled system (the free qubits plus an entangled reference copy),
forking on every measurement and carrying unnormalized states; each
surviving branch's final matrix is the Choi matrix of that branch's map.

Output space: free qubit references persist into the output unless the
program measures them, in which case they cross the classical boundary and
are traced out (references returned in the result always persist).  This
is the reading under which the source equational theory is sound; see the
package docs for the full argument.

Choi convention: J = sum_ij Phi(|i><j|) (x) |i><j|, output factor first,
big-endian bit order within each factor; PSD iff the branch map is
completely positive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import qstate, syntax as s
from .gates import Diag, mat_of_gate
from .interp import eval_expr, _unpack_refs
from .syntax import CoreCmd, CoreExpr, QubitSymbol, desugar, fresh_symbol, subst
from .typecheck import Signature, infer_cmd
from . import typecheck as tc

__all__ = [
    "DenoteError",
    "ContextMismatch",
    "Instrument",
    "denote",
    "equiv",
    "EquivReport",
    "is_cptp",
    "DEFAULT_BRANCH_CAP",
    "DEFAULT_DENOTE_QUBITS",
]

DEFAULT_BRANCH_CAP = 2**16
DEFAULT_DENOTE_QUBITS = 10


class DenoteError(Exception):
    pass


class ContextMismatch(DenoteError):
    pass


def _first_order(tau: s.CoreType) -> bool:
    match tau:
        case s.Bool() | s.Unit() | s.QRef(_):
            return True
        case s.Prod(items):
            return all(_first_order(t) for t in items)
        case _:
            return False


@dataclass
class Instrument:
    """Denotation of a closed command.  `free` is the input context (k
    qubits, dimension 2^k); `kept` is the ordered subset of free qubits
    still present in the output; each branch holds the Choi matrix of a
    completely positive map M_{2^k} -> M_{2^|kept|}."""

    free: tuple[QubitSymbol, ...]
    kept: tuple[QubitSymbol, ...]
    branches: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def in_dim(self) -> int:
        return 2 ** len(self.free)

    @property
    def out_dim(self) -> int:
        return 2 ** len(self.kept)

    def branch_sum_trace_map(self) -> np.ndarray:
        """sum_b Tr_out(J_b); equals the identity iff trace preserving."""
        k, ko = self.in_dim, self.out_dim
        total = np.zeros((k, k), dtype=complex)
        for j in self.branches.values():
            total += np.einsum("aiaj->ij", j.reshape(ko, k, ko, k))
        return total

    def is_cptp(self, tol: float = 1e-9) -> bool:
        for j in self.branches.values():
            herm = (j + j.conj().T) / 2.0
            if np.linalg.norm(j - herm) > tol:
                return False
            if np.linalg.eigvalsh(herm).min() < -tol:
                return False
        return bool(
            np.linalg.norm(self.branch_sum_trace_map() - np.eye(self.in_dim)) <= tol
        )

    def apply(self, rho: np.ndarray) -> dict[str, np.ndarray]:
        """Unnormalized output state per outcome for the given input."""
        k, ko = self.in_dim, self.out_dim
        return {
            key: np.einsum("aibj,ij->ab", j.reshape(ko, k, ko, k), rho)
            for key, j in self.branches.items()
        }

    def probabilities(self, rho: np.ndarray | None = None) -> dict[str, float]:
        """Outcome probabilities; default input is the all-zero state."""
        if rho is None:
            rho = np.zeros((self.in_dim, self.in_dim), dtype=complex)
            rho[0, 0] = 1.0
        return {
            key: float(np.real(np.trace(mat)))
            for key, mat in sorted(self.apply(rho).items())
        }

    def trace_to(self, kept: tuple[QubitSymbol, ...]) -> "Instrument":
        """Trace further output qubits, keeping exactly `kept` (must be a
        subset of the current kept set, in free order)."""
        drop = [q for q in self.kept if q not in kept]
        if not drop:
            return self
        k_in = len(self.free)
        branches = {}
        for key, j in self.branches.items():
            cur = j
            n_out = len(self.kept)
            order = list(self.kept)
            for q in drop:
                pos = order.index(q)
                cur = qstate.trace_out_dm(cur, n_out + k_in, pos)
                order.pop(pos)
                n_out -= 1
            branches[key] = cur
        return Instrument(self.free, tuple(kept), branches)

    def to_jsonable(self) -> dict:
        return {
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
            "free": [q.display_name for q in self.free],
            "kept": [self.free.index(q) for q in self.kept],
            "branches": {
                key: [[[float(x.real), float(x.imag)] for x in row] for row in j]
                for key, j in sorted(self.branches.items())
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True)

    @staticmethod
    def from_jsonable(data: dict) -> "Instrument":
        free = tuple(fresh_symbol(name) for name in data["free"])
        kept = tuple(free[i] for i in data["kept"])
        branches = {
            key: np.array([[complex(re, im) for re, im in row] for row in j])
            for key, j in data["branches"].items()
        }
        return Instrument(free, kept, branches)


class _Branch:
    """One unnormalized execution branch over system + reference qubits."""

    __slots__ = ("live", "nref", "mat")

    def __init__(self, live: list[QubitSymbol], nref: int, mat: np.ndarray):
        self.live = live
        self.nref = nref
        self.mat = mat

    @property
    def n(self) -> int:
        return len(self.live) + self.nref

    def _pos(self, q: QubitSymbol) -> int:
        return self.live.index(q)

    def apply(self, gate: np.ndarray, syms: list[QubitSymbol]) -> "_Branch":
        positions = [self._pos(q) for q in syms]
        return _Branch(
            self.live, self.nref, qstate.apply_dm(self.mat, self.n, gate, positions)
        )

    def alloc(self, q: QubitSymbol) -> "_Branch":
        pos = len(self.live)
        return _Branch(
            self.live + [q], self.nref, qstate.alloc_dm(self.mat, self.n, pos)
        )

    def release(self, q: QubitSymbol) -> "_Branch":
        pos = self._pos(q)
        live = self.live[:pos] + self.live[pos + 1 :]
        return _Branch(live, self.nref, qstate.trace_out_dm(self.mat, self.n, pos))

    def project(self, q: QubitSymbol, bit: int) -> "_Branch":
        return _Branch(
            self.live,
            self.nref,
            qstate.project_dm(self.mat, self.n, self._pos(q), bit),
        )

    def weight(self) -> float:
        return float(np.real(np.trace(self.mat)))


def denote(
    free: tuple[QubitSymbol, ...],
    m: CoreCmd,
    *,
    max_qubits: int = DEFAULT_DENOTE_QUBITS,
    max_branches: int = DEFAULT_BRANCH_CAP,
    prune_tol: float = 1e-9,
) -> Instrument:
    """Instrument of a closed, well-typed command whose free qubit
    references appear as qloc values over `free`."""
    m = desugar(m)
    sig = Signature(tuple(free))
    tau = infer_cmd({}, sig, m)
    if not _first_order(tau):
        raise DenoteError(f"higher-order result type {tau} has no instrument")

    counter = {"branches": 1}
    free_ids = {q.id for q in free}
    measured: set[int] = set()
    returned: set[int] = set()

    def go(cmd: CoreCmd, st: _Branch) -> list[tuple[CoreExpr, _Branch]]:
        match cmd:
            case s.Ret(e):
                return [(eval_expr(e), st)]
            case s.Bnd(boxed, x, rest):
                v = eval_expr(boxed)
                if not isinstance(v, s.CmdBox):
                    raise DenoteError("bnd of a non-command value")
                out = []
                for res, st1 in go(v.cmd, st):
                    out.extend(go(subst(res, x, rest), st1))
                return out
            case s.New(x, body, sym):
                q = sym if sym is not None and sym not in st.live else fresh_symbol(x)
                if len(st.live) + 1 > max_qubits:
                    raise DenoteError(f"qubit budget of {max_qubits} exceeded")
                st1 = st.alloc(q)
                leaves = go(subst(s.QLoc(q), x, body), st1)
                return [(v, st2.release(q)) for v, st2 in leaves]
            case s.GateAp(g, args):
                syms = _unpack_refs(eval_expr(args))
                if syms is None:
                    raise DenoteError("gate applied to a non-reference value")
                return [(s.UNIT_VAL, st.apply(mat_of_gate(g), syms))]
            case s.DiagAp(u, v, control, targets):
                csyms = _unpack_refs(eval_expr(control))
                tsyms = _unpack_refs(eval_expr(targets))
                if csyms is None or len(csyms) != 1 or tsyms is None:
                    raise DenoteError("diagonal gate applied to non-reference values")
                full = mat_of_gate(Diag(u, v))
                return [(s.UNIT_VAL, st.apply(full, csyms + tsyms))]
            case s.Meas(e):
                v = eval_expr(e)
                if not isinstance(v, s.QLoc):
                    raise DenoteError("measurement of a non-reference value")
                if v.sym.id in free_ids:
                    measured.add(v.sym.id)
                out = []
                for bit in (0, 1):
                    st2 = st.project(v.sym, bit)
                    if st2.weight() > 1e-30:
                        out.append((s.BoolLit(bool(bit)), st2))
                counter["branches"] += len(out) - 1
                if counter["branches"] > max_branches:
                    raise DenoteError(f"branch cap of {max_branches} exceeded")
                return out
            case _:
                raise DenoteError(f"cannot denote {cmd!r}")

    k = len(free)
    omega = np.eye(2**k, dtype=complex).reshape(-1)
    st0 = _Branch(list(free), k, np.outer(omega, omega.conj()))
    leaves = go(m, st0)

    index = {q.id: i for i, q in enumerate(free)}
    raw: dict[str, np.ndarray] = {}
    for value, st in leaves:
        assert st.live == list(free), "allocation bracket left the store unbalanced"
        key = _value_key(value, index, returned)
        if key in raw:
            raw[key] = raw[key] + st.mat
        else:
            raw[key] = st.mat
    full = Instrument(tuple(free), tuple(free), dict(sorted(raw.items())))
    kept = tuple(
        q for q in free if q.id not in measured or q.id in returned
    )
    inst = full.trace_to(kept)
    inst.branches = {
        key: j for key, j in inst.branches.items() if np.linalg.norm(j) > prune_tol
    }
    return inst


def _value_key(v: CoreExpr, index: dict[int, int], returned: set[int]) -> str:
    match v:
        case s.BoolLit(b):
            return "tt" if b else "ff"
        case s.UnitVal():
            return "<>"
        case s.Tuple(items):
            return "<" + ", ".join(_value_key(i, index, returned) for i in items) + ">"
        case s.QLoc(q):
            if q.id not in index:
                raise DenoteError("result mentions a non-free qubit reference")
            returned.add(q.id)
            return f"qref:{index[q.id]}"
        case _:
            raise DenoteError(f"result value {v!r} is not first-order")


@dataclass
class EquivReport:
    equal: bool
    max_deviation: float
    detail: str = ""


def equiv(
    free: tuple[QubitSymbol, ...],
    m1: CoreCmd,
    m2: CoreCmd,
    tol: float = 1e-9,
    **kwargs,
) -> EquivReport:
    """Denotational equivalence of two commands in a common context.  Both
    instruments are traced to the common kept set first, so a reference
    measured by either side is compared classically."""
    sig = Signature(tuple(free))
    t1 = infer_cmd({}, sig, desugar(m1))
    t2 = infer_cmd({}, sig, desugar(m2))
    if not tc.types_equiv(t1, t2):
        raise ContextMismatch(f"result types differ: {t1} vs {t2}")
    i1 = denote(free, m1, prune_tol=tol, **kwargs)
    i2 = denote(free, m2, prune_tol=tol, **kwargs)
    kept = tuple(q for q in free if q in i1.kept and q in i2.kept)
    i1 = i1.trace_to(kept)
    i2 = i2.trace_to(kept)
    keys = set(i1.branches) | set(i2.branches)
    max_dev = 0.0
    worst = ""
    for key in sorted(keys):
        a = i1.branches.get(key)
        b = i2.branches.get(key)
        if a is None:
            a = np.zeros_like(b)
        if b is None:
            b = np.zeros_like(a)
        dev = float(np.linalg.norm(a - b))
        if dev > max_dev:
            max_dev = dev
            worst = key
    equal = max_dev <= tol
    detail = "" if equal else f"largest deviation {max_dev:.3e} on branch {worst!r}"
    return EquivReport(equal, max_dev, detail)


def is_cptp(inst: Instrument, tol: float = 1e-9) -> bool:
    return inst.is_cptp(tol)
