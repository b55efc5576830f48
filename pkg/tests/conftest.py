"""Shared sources and golden terms for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from lqsharp import syntax as s
from lqsharp.gates import Identity, Named
from lqsharp.syntax import (
    Block,
    BoolLit,
    Call,
    CmdBox,
    Bnd,
    DiagAp,
    GateAp,
    If,
    Let,
    Meas,
    New,
    Proc,
    Prod,
    Proj,
    QRef,
    Ret,
    Tuple,
    UNIT_VAL,
    Var,
    fresh_symbol,
)

TELEPORT_QS = """
namespace Quantum.Kata.Teleportation {

    open Microsoft.Quantum.Intrinsic; // for H, X, Z, CNOT, and M

    operation Entangle (qAlice : Qubit, qBob : Qubit) : Unit is Adj {
        H(qAlice);
        CNOT(qAlice, qBob);
    }

    operation SendMsg (qAlice : Qubit, qMsg : Qubit) : (Bool, Bool) {
        CNOT(qMsg, qAlice);
        H(qMsg);
        return (M(qMsg) == One, M(qAlice) == One);
    }

    operation DecodeMsg (qBob : Qubit, (b1 : Bool, b2 : Bool)) : Unit {
        if b1 { Z(qBob); }
        if b2 { X(qBob); }
    }

    operation Teleport (qAlice : Qubit, qBob : Qubit, qMsg : Qubit) : Unit {
        Entangle(qAlice, qBob);
        let classicalBits = SendMsg(qAlice, qMsg);
        DecodeMsg(qBob, classicalBits);
    }
}
"""

RETURNS_QUBIT_QS = """
operation NewQubit () : Qubit {
    use q = Qubit();
    return q;
}
"""

CLONING_QS = """
operation Cloning () : Unit {
    use q1 = Qubit();
    let q2 = q1;
    CNOT(q1, q2);
}
"""


@pytest.fixture(scope="session")
def teleport_elab():
    from lqsharp.elaborate import elaborate_source

    return elaborate_source(TELEPORT_QS)


def golden_teleport_term():
    """Hand-encoded elaboration of the teleport program: one let per
    operation over three shared qubit symbols, in declaration order."""
    a = fresh_symbol("a")
    b = fresh_symbol("b")
    m = fresh_symbol("m")

    def p1(v):
        return Proj(1, Var(v))

    def p2(v):
        return Proj(2, Var(v))

    def p3(v):
        return Proj(3, Var(v))

    entangle = Proc(
        "p",
        Prod((QRef(a), QRef(b))),
        Block(
            ((None, GateAp(Named("H"), p1("p"))),),
            DiagAp(Identity(2), Named("X"), p1("p"), p2("p")),
        ),
    )
    sendmsg = Proc(
        "p",
        Prod((QRef(a), QRef(m))),
        Block(
            (
                (None, DiagAp(Identity(2), Named("X"), p2("p"), p1("p"))),
                (None, GateAp(Named("H"), p2("p"))),
                ("t1", Meas(p2("p"))),
                ("t2", Meas(p1("p"))),
            ),
            Ret(Tuple((Var("t1"), Var("t2")))),
        ),
    )

    def run_if(cond, then_cmd):
        return Bnd(
            If(cond, CmdBox(then_cmd), CmdBox(Ret(UNIT_VAL))), "y", Ret(Var("y"))
        )

    decode = Proc(
        "p",
        Prod((QRef(b), Prod((s.BOOL, s.BOOL)))),
        Block(
            ((None, run_if(Proj(1, p2("p")), GateAp(Named("Z"), p1("p")))),),
            run_if(Proj(2, p2("p")), GateAp(Named("X"), p1("p"))),
        ),
    )
    teleport = Proc(
        "p",
        Prod((QRef(a), QRef(b), QRef(m))),
        Block(
            (
                (None, Call(Var("Entangle"), Tuple((p1("p"), p2("p"))))),
                ("cb", Call(Var("SendMsg"), Tuple((p1("p"), p3("p"))))),
            ),
            Call(Var("DecodeMsg"), Tuple((p2("p"), Var("cb")))),
        ),
    )
    return Let(
        entangle,
        "Entangle",
        Let(sendmsg, "SendMsg", Let(decode, "DecodeMsg", Let(teleport, "Teleport", UNIT_VAL))),
    )


def teleport_harness(elab, prep_gate):
    """Allocate the message and Alice's qubit, prepare the message with the
    given gate, teleport onto the free Bob qubit, and return unit."""
    tele = elab.callables["Teleport"]
    qa, qb, qm = tele.qubit_leaves
    inner = Block(
        (
            (
                None,
                Call(tele.closed, Tuple((Var("xa"), s.QLoc(qb), Var("xm")))),
            ),
        ),
        Ret(UNIT_VAL),
    )
    cmd = New(
        "xm",
        Block(
            ((None, GateAp(prep_gate, Var("xm"))),),
            New("xa", inner, sym=qa),
        ),
        sym=qm,
    )
    return (qb,), cmd


def zero_state(n: int) -> np.ndarray:
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def binomial_bound(p: float, n: int, sigmas: float = 5.0) -> float:
    return sigmas * np.sqrt(max(p * (1.0 - p), 1e-12) / n)
