"""Machine-readable schemas for the program equations.

Each schema instantiates to a pair of commands over a common free-qubit
context, built from the core constructors plus derived forms; checking is
delegated to the superoperator oracle.  Stable ids:

  A  gate-then-measure vs negated measure        (for the X gate)
  B  block-diagonal-then-measure vs measure-then-branch
  D  measuring a fresh qubit yields ff
  E  a fresh qubit as control selects the zero block
  F  an in-scope SWAP equals renaming the two references
  G  identity gates are no-ops
  H  sequential composition of gates fuses into a product
  I  tensor composition splits across disjoint reference tuples
  J  measurements of distinct qubits commute
  K  allocations commute
  L  allocation commutes with measurement of another qubit
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import syntax as s
from .denote import EquivReport, equiv
from .gates import Diag, GateExpr, Identity, Named, Product, Tensor, gate_arity
from .generate import random_cmd_template, random_gate
from .syntax import (
    Block,
    Bnd,
    CmdBox,
    CoreCmd,
    Do,
    GateAp,
    DiagAp,
    If,
    Let,
    Meas,
    New,
    Proj,
    QLoc,
    QubitSymbol,
    Ret,
    Tuple,
    UNIT_VAL,
    Var,
    fresh_symbol,
    subst,
)

__all__ = ["AXIOM_IDS", "AxiomInstance", "instantiate", "check_axiom", "random_params"]

AXIOM_IDS = ("A", "B", "D", "E", "F", "G", "H", "I", "J", "K", "L")


@dataclass
class AxiomInstance:
    axiom: str
    free: tuple[QubitSymbol, ...]
    lhs: CoreCmd
    rhs: CoreCmd
    params: dict = field(default_factory=dict)


def _refs(n: int, base: str) -> list[QubitSymbol]:
    return [fresh_symbol(f"{base}{i}" if n > 1 else base) for i in range(n)]


def _tuple_or_single(items: list[s.CoreExpr]) -> s.CoreExpr:
    return items[0] if len(items) == 1 else Tuple(tuple(items))


def _negate(e: s.CoreExpr) -> s.CoreExpr:
    return If(e, s.FALSE, s.TRUE)


def _run(e: s.CoreExpr) -> CoreCmd:
    """Run an encapsulated-command expression and return its result."""
    return Bnd(e, "y", Ret(Var("y")))


def instantiate(axiom: str, params: dict) -> AxiomInstance:
    """Build the two sides of an equation over a fresh free-qubit context.

    Parameters by schema: B/E/H need gates u, v of equal dimension; G needs
    n; I needs gates u, v of any dimensions; F/J/K/L take command templates
    (m, or m1/m2) over the variables named in each schema below.
    """
    match axiom:
        case "A":
            (a,) = _refs(1, "a")
            aref = QLoc(a)
            lhs = Do(Block(((None, GateAp(Named("X"), aref)),), Meas(aref)))
            rhs = Block((("x", Meas(aref)),), Ret(_negate(Var("x"))))
            return AxiomInstance(axiom, (a,), lhs, rhs, params)
        case "B":
            u: GateExpr = params["u"]
            v: GateExpr = params["v"]
            n = gate_arity(u)
            a = fresh_symbol("a")
            targets = _refs(n, "r")
            tref = _tuple_or_single([QLoc(q) for q in targets])
            aref = QLoc(a)
            lhs = Block(
                ((None, DiagAp(u, v, aref, tref)), (None, Meas(aref))),
                Ret(UNIT_VAL),
            )
            rhs = Block(
                (("x", Meas(aref)),),
                _run(If(Var("x"), CmdBox(GateAp(v, tref)), CmdBox(GateAp(u, tref)))),
            )
            return AxiomInstance(axiom, (a, *targets), lhs, rhs, params)
        case "D":
            lhs = Do(New("a", Meas(Var("a"))))
            rhs = Ret(s.FALSE)
            return AxiomInstance(axiom, (), lhs, rhs, params)
        case "E":
            u, v = params["u"], params["v"]
            n = gate_arity(u)
            targets = _refs(n, "b")
            tref = _tuple_or_single([QLoc(q) for q in targets])
            lhs = Do(New("a", DiagAp(u, v, Var("a"), tref)))
            rhs = Do(Block(((None, GateAp(u, tref)),), New("a", Ret(UNIT_VAL))))
            return AxiomInstance(axiom, tuple(targets), lhs, rhs, params)
        case "F":
            m1: CoreCmd = params["m1"]
            m2: CoreCmd = params["m2"]
            swap = GateAp(Named("SWAP"), Tuple((Var("a"), Var("b"))))
            lhs = Do(New("a", New("b", Block(((None, m1), (None, swap)), m2))))
            # let <b, a> = <a, b> in cmd m2, rendered with a fresh tuple
            # binder and projections, then run
            m2_sw = subst(Proj(2, Var("p")), "a", subst(Proj(1, Var("p")), "b", m2))
            renamed = _run(Let(Tuple((Var("a"), Var("b"))), "p", CmdBox(m2_sw)))
            rhs = Do(New("a", New("b", Block(((None, m1),), renamed))))
            return AxiomInstance(axiom, (), lhs, rhs, params)
        case "G":
            n = params.get("n", 1)
            qs = _refs(n, "q")
            eref = _tuple_or_single([QLoc(q) for q in qs])
            lhs = Do(GateAp(Identity(2**n), eref))
            rhs = Ret(UNIT_VAL)
            return AxiomInstance(axiom, tuple(qs), lhs, rhs, params)
        case "H":
            u, v = params["u"], params["v"]
            n = gate_arity(u)
            qs = _refs(n, "q")
            eref = _tuple_or_single([QLoc(q) for q in qs])
            lhs = Do(GateAp(Product(v, u), eref))
            rhs = Do(Block(((None, GateAp(u, eref)),), GateAp(v, eref)))
            return AxiomInstance(axiom, tuple(qs), lhs, rhs, params)
        case "I":
            u, v = params["u"], params["v"]
            nu, nv = gate_arity(u), gate_arity(v)
            qs = _refs(nu, "q")
            rs = _refs(nv, "r")
            e1 = _tuple_or_single([QLoc(q) for q in qs])
            e2 = _tuple_or_single([QLoc(q) for q in rs])
            both = Tuple(tuple(QLoc(q) for q in qs + rs))
            lhs = Do(GateAp(Tensor(u, v), both))
            rhs = Do(Block(((None, GateAp(u, e1)),), GateAp(v, e2)))
            return AxiomInstance(axiom, tuple(qs + rs), lhs, rhs, params)
        case "J":
            m: CoreCmd = params["m"]
            a, b = fresh_symbol("a"), fresh_symbol("b")
            m = subst(QLoc(a), "a", subst(QLoc(b), "b", m))
            lhs = Do(Block((("x", Meas(QLoc(a))), ("y", Meas(QLoc(b)))), m))
            rhs = Do(Block((("y", Meas(QLoc(b))), ("x", Meas(QLoc(a)))), m))
            return AxiomInstance(axiom, (a, b), lhs, rhs, params)
        case "K":
            m: CoreCmd = params["m"]
            lhs = Do(New("a", New("b", m)))
            rhs = Do(New("b", New("a", m)))
            return AxiomInstance(axiom, (), lhs, rhs, params)
        case "L":
            m: CoreCmd = params["m"]
            b = fresh_symbol("b")
            m = subst(QLoc(b), "b", m)
            lhs = Do(New("a", Block((("y", Meas(QLoc(b))),), m)))
            rhs = Do(Block((("y", Meas(QLoc(b))),), New("a", m)))
            return AxiomInstance(axiom, (b,), lhs, rhs, params)
        case _:
            raise ValueError(f"unknown axiom id {axiom!r}")


def check_axiom(axiom: str, params: dict, tol: float = 1e-9) -> EquivReport:
    inst = instantiate(axiom, params)
    return equiv(inst.free, inst.lhs, inst.rhs, tol)


def random_params(axiom: str, rng: random.Random, max_n: int = 2) -> dict:
    """Random parameters for one instantiation; unitaries are bounded-depth
    gate expressions over the built-in set, n <= max_n."""
    n = rng.randint(1, max_n)
    match axiom:
        case "A" | "D":
            return {}
        case "B" | "E" | "H":
            return {"u": random_gate(rng, n), "v": random_gate(rng, n)}
        case "G":
            return {"n": n}
        case "I":
            return {
                "u": random_gate(rng, rng.randint(1, max_n)),
                "v": random_gate(rng, rng.randint(1, max_n)),
            }
        case "F":
            return {
                "m1": random_cmd_template(
                    rng, ["a", "b"], [], result="unit", allow_new=False
                ),
                "m2": random_cmd_template(
                    rng, ["a", "b"], [], result="unit", allow_new=False
                ),
            }
        case "J":
            return {
                "m": random_cmd_template(
                    rng, ["a", "b"], ["x", "y"], result="bool", max_meas=0
                )
            }
        case "K":
            return {
                "m": random_cmd_template(
                    rng, ["a", "b"], [], result="unit", allow_new=False
                )
            }
        case "L":
            return {
                "m": random_cmd_template(
                    rng, ["a", "b"], ["y"], result="unit", max_meas=1
                )
            }
        case _:
            raise ValueError(f"unknown axiom id {axiom!r}")
