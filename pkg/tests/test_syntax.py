"""Parsing, printing, derived forms, substitution, and alpha equivalence."""

import random

import pytest

from lqsharp import syntax as s
from lqsharp.gates import Identity, Named
from lqsharp.generate import GenConfig, random_program
from lqsharp.parser import ParseError, parse_core
from lqsharp.printer import context_header, print_term
from lqsharp.syntax import (
    Block,
    Bnd,
    BoolLit,
    CmdBox,
    DiagAp,
    Do,
    GateAp,
    If,
    Lam,
    Let,
    Meas,
    New,
    Proc,
    QLoc,
    Ret,
    Tuple,
    UNIT,
    UNIT_VAL,
    Var,
    alpha_eq,
    desugar,
    free_qubit_symbols,
    fresh_symbol,
    subst,
)


def test_parse_unit_return():
    assert parse_core("ret <>").term == Ret(UNIT_VAL)


def test_parse_new_meas():
    assert parse_core("new a in meas a").term == New("a", Meas(Var("a")))


def test_parse_do_block_keeps_sugar_then_desugars():
    t = parse_core("do {X(a); meas a}").term
    assert isinstance(t, Do)
    d = desugar(t)
    # do {X(a); meas a} expands to a bind of the boxed sequence
    assert isinstance(d, Bnd)
    inner = d.boxed.cmd
    assert inner == Bnd(CmdBox(GateAp(Named("X"), Var("a"))), "_", Meas(Var("a")))


def test_desugar_do():
    t = desugar(Do(Meas(Var("a"))))
    assert t == Bnd(CmdBox(Meas(Var("a"))), "x", Ret(Var("x")))


def test_desugar_proc():
    t = desugar(parse_core("proc (x : unit) {ret x}").term)
    assert t == Lam("x", UNIT, CmdBox(Ret(Var("x"))))


def test_desugar_singleton_block_is_transparent():
    t = desugar(parse_core("{meas a}").term)
    assert t == Meas(Var("a"))


def test_desugar_call_binds_application():
    t = desugar(parse_core("call f(tt)").term)
    assert t == Bnd(s.App(Var("f"), BoolLit(True)), "x", Ret(Var("x")))
    t2 = desugar(parse_core("call f").term)
    assert t2 == Bnd(s.App(Var("f"), UNIT_VAL), "x", Ret(Var("x")))


def test_desugar_multi_bind_block():
    t = desugar(parse_core("{x <- meas a; y <- meas b; ret <x, y>}").term)
    assert t == Bnd(
        CmdBox(Meas(Var("a"))),
        "x",
        Bnd(CmdBox(Meas(Var("b"))), "y", Ret(Tuple((Var("x"), Var("y"))))),
    )


def test_desugar_idempotent():
    for seed in range(25):
        _, prog = random_program(seed, n_free=1, cfg=GenConfig(max_depth=5))
        once = desugar(prog)
        assert desugar(once) == once


def test_subst_into_if():
    t = subst(BoolLit(True), "x", If(Var("x"), UNIT_VAL, UNIT_VAL))
    assert t == If(BoolLit(True), UNIT_VAL, UNIT_VAL)


def test_subst_reference():
    q = fresh_symbol("q")
    assert subst(QLoc(q), "x", Meas(Var("x"))) == Meas(QLoc(q))


def test_subst_is_capture_avoiding():
    # [y/x](fun (y : bool) x) must rename the binder
    t = Lam("y", s.BOOL, Var("x"))
    out = subst(Var("y"), "x", t)
    assert isinstance(out, Lam)
    assert out.binder != "y"
    assert out.body == Var("y")
    # oracle: renaming the binder first, then substituting naively, agrees
    renamed = Lam("z", s.BOOL, Var("x"))
    assert alpha_eq(out, subst(Var("y"), "x", renamed))


def test_subst_shadowing_stops():
    t = Let(Var("x"), "x", Var("x"))
    out = subst(BoolLit(False), "x", t)
    assert out == Let(BoolLit(False), "x", Var("x"))


def test_subst_respects_alpha_eq():
    rng = random.Random(4)
    for seed in range(20):
        _, prog = random_program(seed, n_free=0, cfg=GenConfig(max_depth=4))
        prog = desugar(prog)
        # alpha-rename a binder-rich wrapper around the program
        t1 = Bnd(CmdBox(prog), "u", Ret(Var("u")))
        t2 = Bnd(CmdBox(prog), "w", Ret(Var("w")))
        assert alpha_eq(t1, t2)
        v = BoolLit(rng.random() < 0.5)
        assert alpha_eq(subst(v, "z", t1), subst(v, "z", t2))


def test_alpha_eq_renames_binders():
    t1 = New("a", Meas(Var("a")))
    t2 = New("b", Meas(Var("b")))
    assert alpha_eq(t1, t2)
    assert t1 != t2


def test_alpha_eq_distinguishes_free_vars():
    assert not alpha_eq(Meas(Var("a")), Meas(Var("b")))


def test_alpha_eq_bound_symbols():
    qa, qb = fresh_symbol("a"), fresh_symbol("b")
    t1 = New("x", Meas(Var("x")), sym=qa)
    t2 = New("x", Meas(Var("x")), sym=qb)
    assert alpha_eq(t1, t2)


def test_alpha_eq_free_symbols_strict_by_default():
    qa, qb = fresh_symbol("a"), fresh_symbol("b")
    assert not alpha_eq(Meas(QLoc(qa)), Meas(QLoc(qb)))
    assert alpha_eq(Meas(QLoc(qa)), Meas(QLoc(qb)), match_symbols=True)
    # the bijection must stay consistent
    t1 = Tuple((QLoc(qa), QLoc(qa)))
    t2 = Tuple((QLoc(qb), QLoc(fresh_symbol("c"))))
    assert not alpha_eq(t1, t2, match_symbols=True)


def test_free_qubit_symbols():
    q = fresh_symbol("q")
    assert free_qubit_symbols(GateAp(Named("X"), QLoc(q))) == {q}
    bound = New("x", Meas(Var("x")), sym=q)
    assert free_qubit_symbols(bound) == set()


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as exc:
        parse_core("ret ??")
    assert exc.value.span.line == 1
    with pytest.raises(ParseError, match="unknown gate"):
        parse_core("{G(a); meas a}")


def test_context_header_roundtrip():
    res = parse_core("-- context: q r\nD(I(2), X)(q; r)")
    assert [sym.display_name for sym in res.context] == ["q", "r"]
    assert isinstance(res.term, DiagAp)


def test_print_parse_roundtrip_on_generated_programs():
    for seed in range(60):
        free, prog = random_program(
            seed, n_free=seed % 3, cfg=GenConfig(max_qubits=3, max_depth=6)
        )
        source_form = s.qlocs_to_vars(prog, {q.id: q.display_name for q in free})
        text = context_header(free) + print_term(source_form)
        back = parse_core(text)
        assert [q2.display_name for q2 in back.context] == [
            q2.display_name for q2 in free
        ]
        assert alpha_eq(back.term, source_form, match_symbols=True), text


def test_unicode_aliases_accepted():
    t = parse_core("ret ⟨⟩").term
    assert t == Ret(UNIT_VAL)
    t2 = parse_core("{x ← meas a; ret x}").term
    assert isinstance(t2, Block)
