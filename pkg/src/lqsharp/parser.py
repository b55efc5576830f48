"""Concrete-syntax parser for .lqs files.

One top-level expression or command per file.  ASCII spellings are accepted
for every typeset token (<> for the unit value, <- for binding arrows).
A leading `-- context: q r ...` comment declares free qubit symbols in
order; `qref[name]` occurrences register further symbols on first use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import syntax as s
from .gates import Adjoint, Diag, GateExpr, Identity, Named, Product, Tensor
from .syntax import Span

__all__ = ["ParseError", "ParseResult", "parse_core", "parse_file"]

KEYWORDS = {
    "ret",
    "bnd",
    "as",
    "in",
    "new",
    "meas",
    "do",
    "let",
    "fun",
    "cmd",
    "proj",
    "tt",
    "ff",
    "if",
    "then",
    "else",
    "proc",
    "call",
    "adj",
    "qref",
    "bool",
    "unit",
}

GATE_NAMES = {"X", "Y", "Z", "H", "S", "T", "SWAP"}
GATE_HEADS = GATE_NAMES | {"I", "D", "adj"}

_PUNCT = [
    "->",
    "=>",
    "<-",
    "(",
    ")",
    "{",
    "}",
    "[",
    "]",
    "<",
    ">",
    ",",
    ";",
    ":",
    "*",
    "@",
    "=",
]

_UNICODE_ALIASES = {
    "⟨": "<",
    "⟩": ">",
    "←": "<-",
    "→": "->",
    "⇒": "=>",
    "λ": "fun",
}


class ParseError(Exception):
    def __init__(self, msg: str, span: Span):
        super().__init__(f"{span}: {msg}")
        self.msg = msg
        self.span = span


@dataclass
class Token:
    kind: str  # "ident", "nat", "punct", "eof"
    text: str
    span: Span


def _lex(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = Span(line, col)
        if c in _UNICODE_ALIASES:
            alias = _UNICODE_ALIASES[c]
            kind = "ident" if alias.isalpha() else "punct"
            toks.append(Token(kind, alias, span))
            i += 1
            col += 1
            continue
        matched = False
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(Token("punct", p, span))
                i += len(p)
                col += len(p)
                matched = True
                break
        if matched:
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("nat", text[i:j], span))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            toks.append(Token("ident", text[i:j], span))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", span)
    toks.append(Token("eof", "", Span(line, col)))
    return toks


@dataclass
class ParseResult:
    term: s.Term
    context: tuple[s.QubitSymbol, ...]
    symbols: dict[str, s.QubitSymbol] = field(default_factory=dict)


def _scan_context(text: str) -> list[str]:
    names: list[str] = []
    for raw in text.splitlines():
        stripped = raw.strip()
        if not stripped:
            continue
        if not stripped.startswith("--"):
            break
        body = stripped[2:].strip()
        if body.startswith("context:"):
            names.extend(body[len("context:") :].split())
    return names


class Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.pos = 0
        self.symbols: dict[str, s.QubitSymbol] = {}
        self.context: list[s.QubitSymbol] = []
        for name in _scan_context(text):
            self._symbol(name, context=True)

    def _symbol(self, name: str, context: bool = False) -> s.QubitSymbol:
        if name not in self.symbols:
            self.symbols[name] = s.fresh_symbol(name)
            if context:
                self.context.append(self.symbols[name])
        return self.symbols[name]

    # -- token helpers --

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str, k: int = 0) -> bool:
        return self.peek(k).text == text and self.peek(k).kind != "eof"

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text or tok.kind == "eof":
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.span)
        return tok

    def ident(self) -> str:
        tok = self.next()
        if tok.kind != "ident":
            raise ParseError(f"expected identifier, found {tok.text!r}", tok.span)
        if tok.text in KEYWORDS or tok.text in GATE_NAMES or tok.text in ("I", "D"):
            raise ParseError(f"{tok.text!r} is reserved", tok.span)
        return tok.text

    def nat(self) -> int:
        tok = self.next()
        if tok.kind != "nat":
            raise ParseError(f"expected a number, found {tok.text!r}", tok.span)
        return int(tok.text)

    # -- entry points --

    def parse_term(self) -> s.Term:
        if self._cmd_ahead():
            t = self.cmd()
        elif self.at("("):
            # could be a parenthesized gate head or an expression; try the
            # gate application first and back off on failure
            mark = self.pos
            try:
                t = self.cmd()
            except ParseError:
                self.pos = mark
                t = self.expr()
        else:
            t = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"trailing input starting at {tok.text!r}", tok.span)
        return t

    def _cmd_ahead(self) -> bool:
        tok = self.peek()
        if tok.text in ("ret", "bnd", "new", "meas", "do", "call", "{"):
            return True
        if tok.text in GATE_HEADS and tok.kind == "ident":
            return True
        return False

    # -- commands --

    def cmd(self) -> s.CoreCmd:
        tok = self.peek()
        span = tok.span
        if self.at("ret"):
            self.next()
            return s.Ret(self.expr(), span=span)
        if self.at("bnd"):
            self.next()
            e = self.expr()
            self.expect("as")
            x = self.ident()
            self.expect("in")
            return s.Bnd(e, x, self.cmd(), span=span)
        if self.at("new"):
            self.next()
            x = self.ident()
            self.expect("in")
            return s.New(x, self.cmd(), span=span)
        if self.at("meas"):
            self.next()
            return s.Meas(self.expr(), span=span)
        if self.at("do"):
            self.next()
            return s.Do(self.cmd(), span=span)
        if self.at("call"):
            self.next()
            fn = self.expr_atom()
            groups: list[s.CoreExpr] = []
            while self.at("("):
                self.next()
                groups.append(self.expr())
                self.expect(")")
            # the last parenthesized group is the call argument; earlier
            # ones apply to the callee
            arg = groups.pop() if groups else None
            for g in groups:
                fn = s.App(fn, g)
            return s.Call(fn, arg, span=span)
        if self.at("{"):
            return self.block()
        if (tok.text in GATE_HEADS and tok.kind == "ident") or self.at("("):
            return self.gate_application()
        if tok.kind == "ident" and self.at("(", 1):
            raise ParseError(f"unknown gate name {tok.text!r}", span)
        raise ParseError(f"expected a command, found {tok.text!r}", span)

    def block(self) -> s.CoreCmd:
        span = self.expect("{").span
        items: list[tuple[str | None, s.CoreCmd]] = []
        while True:
            binder: str | None = None
            if (
                self.peek().kind == "ident"
                and self.peek().text not in KEYWORDS
                and self.peek().text not in GATE_HEADS
                and self.at("<-", 1)
            ):
                binder = self.ident()
                self.expect("<-")
            items.append((binder, self.cmd()))
            if self.at(";"):
                self.next()
                continue
            self.expect("}")
            break
        last_binder, last = items[-1]
        if last_binder is not None:
            raise ParseError("the final command of a block cannot bind", span)
        return s.Block(tuple(items[:-1]), last, span=span)

    def gate_application(self) -> s.CoreCmd:
        span = self.peek().span
        if self.at("D"):
            self.next()
            self.expect("(")
            u = self.gate()
            self.expect(",")
            v = self.gate()
            self.expect(")")
            self.expect("(")
            control = self.expr()
            self.expect(";")
            targets = self.expr_list()
            self.expect(")")
            return s.DiagAp(u, v, control, targets, span=span)
        g = self.gate()
        self.expect("(")
        args = self.expr_list(allow_empty=True)
        self.expect(")")
        return s.GateAp(g, args, span=span)

    def expr_list(self, allow_empty: bool = False) -> s.CoreExpr:
        if allow_empty and self.at(")"):
            return s.Tuple(())
        items = [self.expr()]
        while self.at(","):
            self.next()
            items.append(self.expr())
        if len(items) == 1:
            return items[0]
        return s.Tuple(tuple(items))

    # -- gates --

    def gate(self) -> GateExpr:
        g = self.gate_prod()
        while self.at("@"):
            self.next()
            g = Tensor(g, self.gate_prod())
        return g

    def gate_prod(self) -> GateExpr:
        g = self.gate_atom()
        while self.at("*"):
            self.next()
            g = Product(g, self.gate_atom())
        return g

    def gate_atom(self) -> GateExpr:
        tok = self.next()
        if tok.text == "I":
            self.expect("(")
            dim = self.nat()
            self.expect(")")
            return Identity(dim)
        if tok.text in GATE_NAMES:
            return Named(tok.text)
        if tok.text == "adj":
            self.expect("(")
            g = self.gate()
            self.expect(")")
            return Adjoint(g)
        if tok.text == "D":
            self.expect("(")
            u = self.gate()
            self.expect(",")
            v = self.gate()
            self.expect(")")
            return Diag(u, v)
        if tok.text == "(":
            g = self.gate()
            self.expect(")")
            return g
        raise ParseError(f"expected a gate, found {tok.text!r}", tok.span)

    # -- expressions --

    def expr(self) -> s.CoreExpr:
        tok = self.peek()
        span = tok.span
        if self.at("let"):
            self.next()
            x = self.ident()
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            return s.Let(bound, x, self.expr(), span=span)
        if self.at("fun"):
            self.next()
            self.expect("(")
            x = self.ident()
            self.expect(":")
            annot = self.typ()
            self.expect(")")
            return s.Lam(x, annot, self.expr(), span=span)
        if self.at("proc"):
            self.next()
            self.expect("(")
            x = self.ident()
            self.expect(":")
            annot = self.typ()
            self.expect(")")
            self.expect("{")
            body = self.block_body()
            return s.Proc(x, annot, body, span=span)
        if self.at("if"):
            self.next()
            cond = self.expr()
            self.expect("then")
            then = self.expr()
            self.expect("else")
            return s.If(cond, then, self.expr(), span=span)
        if self.at("cmd"):
            self.next()
            return s.CmdBox(self.cmd(), span=span)
        if self.at("proj"):
            self.next()
            i = self.nat()
            return s.Proj(i, self.expr_atom_postfix(), span=span)
        return self.expr_atom_postfix()

    def block_body(self) -> s.CoreCmd:
        """The inside of a proc body: `{` already consumed; reuses block
        item parsing so multi-statement bodies work."""
        items: list[tuple[str | None, s.CoreCmd]] = []
        while True:
            binder: str | None = None
            if (
                self.peek().kind == "ident"
                and self.peek().text not in KEYWORDS
                and self.peek().text not in GATE_HEADS
                and self.at("<-", 1)
            ):
                binder = self.ident()
                self.expect("<-")
            items.append((binder, self.cmd()))
            if self.at(";"):
                self.next()
                continue
            self.expect("}")
            break
        last_binder, last = items[-1]
        if last_binder is not None:
            raise ParseError("the final command of a block cannot bind", self.peek().span)
        if len(items) == 1:
            return last
        return s.Block(tuple(items[:-1]), last)

    def expr_atom_postfix(self) -> s.CoreExpr:
        e = self.expr_atom()
        while self.at("("):
            self.next()
            arg = self.expr()
            self.expect(")")
            e = s.App(e, arg)
        return e

    def expr_atom(self) -> s.CoreExpr:
        tok = self.next()
        span = tok.span
        if tok.text == "tt":
            return s.BoolLit(True, span=span)
        if tok.text == "ff":
            return s.BoolLit(False, span=span)
        if tok.text == "<":
            if self.at(">"):
                self.next()
                return s.UnitVal(span=span)
            items = [self.expr()]
            while self.at(","):
                self.next()
                items.append(self.expr())
            self.expect(">")
            return s.Tuple(tuple(items), span=span)
        if tok.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "ident":
            if tok.text in KEYWORDS or tok.text in GATE_HEADS:
                raise ParseError(
                    f"expected an expression, found {tok.text!r}", span
                )
            return s.Var(tok.text, span=span)
        raise ParseError(f"expected an expression, found {tok.text!r}", span)

    # -- types --

    def typ(self) -> s.CoreType:
        t = self.typ_prod()
        if self.at("->"):
            self.next()
            return s.Arrow(t, self.typ())
        if self.at("=>"):
            # t1 => t2 expands to t1 -> cmd(t2)
            self.next()
            return s.Arrow(t, s.CmdType(self.typ()))
        return t

    def typ_prod(self) -> s.CoreType:
        items = [self.typ_atom()]
        while self.at("*"):
            self.next()
            items.append(self.typ_atom())
        if len(items) == 1:
            return items[0]
        return s.Prod(tuple(items))

    def typ_atom(self) -> s.CoreType:
        tok = self.next()
        if tok.text == "bool":
            return s.BOOL
        if tok.text == "unit":
            return s.UNIT
        if tok.text == "qref":
            self.expect("[")
            name_tok = self.next()
            if name_tok.kind != "ident":
                raise ParseError("expected a qubit symbol name", name_tok.span)
            self.expect("]")
            return s.QRef(self._symbol(name_tok.text))
        if tok.text == "cmd":
            self.expect("(")
            t = self.typ()
            self.expect(")")
            return s.CmdType(t)
        if tok.text == "(":
            t = self.typ()
            self.expect(")")
            return t
        raise ParseError(f"expected a type, found {tok.text!r}", tok.span)


def parse_core(text: str) -> ParseResult:
    """Parse one top-level expression or command.  Derived forms are kept
    as sugar nodes until `desugar`."""
    p = Parser(text)
    term = p.parse_term()
    return ParseResult(term, tuple(p.context), p.symbols)


def parse_file(path: str) -> ParseResult:
    with open(path, encoding="utf-8") as fh:
        return parse_core(fh.read())
