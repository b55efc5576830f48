"""Parser for the supported Q# subset.

Accepts namespaces (recorded, then stripped), function and operation
declarations with tuple parameter patterns, `is Adj`/`is Ctl` markers, and
the statement and expression forms of the subset.  Anything outside the
subset raises UnsupportedFeature with a source span; plain syntax errors
raise QsParseError.  Array literals are admitted only so a Controlled
functor can take a control list.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import Span

__all__ = [
    "QsParseError",
    "UnsupportedFeature",
    "QsType",
    "QTQubit",
    "QTBool",
    "QTResult",
    "QTUnit",
    "QTTuple",
    "QTArrow",
    "QsPattern",
    "PVar",
    "PTuple",
    "QsStmt",
    "SLet",
    "SUse",
    "SIf",
    "SReturn",
    "SExpr",
    "QsExpr",
    "EVar",
    "EBool",
    "EResult",
    "EUnit",
    "ETuple",
    "EArray",
    "ECall",
    "EAdj",
    "ECtl",
    "ECmp",
    "QsCallable",
    "QsProgram",
    "parse_qs",
]


class QsParseError(Exception):
    def __init__(self, msg: str, span: Span):
        super().__init__(f"{span}: {msg}")
        self.msg = msg
        self.span = span


class UnsupportedFeature(QsParseError):
    def __init__(self, feature: str, span: Span):
        super().__init__(f"unsupported feature: {feature}", span)
        self.feature = feature


# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class QsType:
    pass


@dataclass(frozen=True)
class QTQubit(QsType):
    pass


@dataclass(frozen=True)
class QTBool(QsType):
    pass


@dataclass(frozen=True)
class QTResult(QsType):
    pass


@dataclass(frozen=True)
class QTUnit(QsType):
    pass


@dataclass(frozen=True)
class QTTuple(QsType):
    items: tuple[QsType, ...]


@dataclass(frozen=True)
class QTArrow(QsType):
    dom: QsType
    cod: QsType
    operation: bool


# -- patterns, statements, expressions ----------------------------------------


@dataclass(frozen=True)
class QsPattern:
    pass


@dataclass(frozen=True)
class PVar(QsPattern):
    name: str
    type: QsType


@dataclass(frozen=True)
class PTuple(QsPattern):
    items: tuple[QsPattern, ...]


@dataclass(frozen=True)
class QsExpr:
    span: Span | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class EVar(QsExpr):
    name: str


@dataclass(frozen=True)
class EBool(QsExpr):
    value: bool


@dataclass(frozen=True)
class EResult(QsExpr):
    one: bool


@dataclass(frozen=True)
class EUnit(QsExpr):
    pass


@dataclass(frozen=True)
class ETuple(QsExpr):
    items: tuple[QsExpr, ...]


@dataclass(frozen=True)
class EArray(QsExpr):
    items: tuple[QsExpr, ...]


@dataclass(frozen=True)
class ECall(QsExpr):
    fn: QsExpr
    args: tuple[QsExpr, ...]


@dataclass(frozen=True)
class EAdj(QsExpr):
    inner: QsExpr


@dataclass(frozen=True)
class ECtl(QsExpr):
    inner: QsExpr


@dataclass(frozen=True)
class ECmp(QsExpr):
    lhs: QsExpr
    rhs: QsExpr
    negated: bool


@dataclass(frozen=True)
class QsStmt:
    span: Span | None = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class SLet(QsStmt):
    name: str
    expr: QsExpr


@dataclass(frozen=True)
class SUse(QsStmt):
    name: str
    block: tuple[QsStmt, ...] | None  # None: scopes to the rest of the block


@dataclass(frozen=True)
class SIf(QsStmt):
    arms: tuple[tuple[QsExpr, tuple[QsStmt, ...]], ...]
    els: tuple[QsStmt, ...] | None


@dataclass(frozen=True)
class SReturn(QsStmt):
    expr: QsExpr


@dataclass(frozen=True)
class SExpr(QsStmt):
    expr: QsExpr


@dataclass(frozen=True)
class QsCallable:
    kind: str  # "function" | "operation"
    name: str
    params: QsPattern
    ret: QsType
    characteristics: tuple[str, ...]
    body: tuple[QsStmt, ...]
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass
class QsProgram:
    namespaces: tuple[str, ...]
    opens: tuple[str, ...]
    callables: tuple[QsCallable, ...]


_KEYWORDS = {
    "namespace",
    "open",
    "operation",
    "function",
    "let",
    "use",
    "return",
    "if",
    "elif",
    "else",
    "is",
    "true",
    "false",
    "One",
    "Zero",
    "Qubit",
    "Bool",
    "Result",
    "Unit",
    "Adjoint",
    "Controlled",
    "Adj",
    "Ctl",
}

_UNSUPPORTED_KEYWORDS = {
    "mutable": "mutable bindings",
    "set": "mutable bindings",
    "borrow": "borrowed qubits",
    "borrowing": "borrowed qubits",
    "for": "iteration",
    "while": "iteration",
    "repeat": "iteration",
    "until": "iteration",
    "within": "within-apply blocks",
    "apply": "within-apply blocks",
    "newtype": "user-defined types",
    "body": "custom specializations",
    "adjoint": "custom specializations",
    "controlled": "custom specializations",
    "fail": "fail statements",
}

_PUNCT = ["==", "!=", "=>", "->", "(", ")", "{", "}", "[", "]", ",", ";", ":", "=", "+", "."]


@dataclass
class _Tok:
    kind: str  # ident, nat, punct, eof
    text: str
    span: Span


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(text)
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
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        span = Span(line, col)
        matched = False
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(_Tok("punct", p, span))
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
            toks.append(_Tok("nat", text[i:j], span))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("ident", text[i:j], span))
            col += j - i
            i = j
            continue
        if c == "<":
            raise UnsupportedFeature("type parameters", span)
        raise QsParseError(f"unexpected character {c!r}", span)
    toks.append(_Tok("eof", "", Span(line, col)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.pos = 0

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.text == text and t.kind != "eof"

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text or tok.kind == "eof":
            raise QsParseError(f"expected {text!r}, found {tok.text!r}", tok.span)
        return tok

    def ident(self) -> str:
        tok = self.next()
        if tok.kind != "ident":
            raise QsParseError(f"expected identifier, found {tok.text!r}", tok.span)
        if tok.text in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(_UNSUPPORTED_KEYWORDS[tok.text], tok.span)
        return tok.text

    def _check_unsupported(self) -> None:
        tok = self.peek()
        if tok.kind == "ident" and tok.text in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(_UNSUPPORTED_KEYWORDS[tok.text], tok.span)

    def qualified(self) -> str:
        name = self.ident()
        while self.at("."):
            self.next()
            name += "." + self.ident()
        return name

    # -- program structure --

    def program(self) -> QsProgram:
        namespaces: list[str] = []
        opens: list[str] = []
        callables: list[QsCallable] = []
        while self.peek().kind != "eof":
            if self.at("namespace"):
                self.next()
                namespaces.append(self.qualified())
                self.expect("{")
                while not self.at("}"):
                    if self.at("open"):
                        self.next()
                        opens.append(self.qualified())
                        self.expect(";")
                    else:
                        callables.append(self.callable())
                self.expect("}")
            elif self.at("open"):
                self.next()
                opens.append(self.qualified())
                self.expect(";")
            else:
                callables.append(self.callable())
        return QsProgram(tuple(namespaces), tuple(opens), tuple(callables))

    def callable(self) -> QsCallable:
        self._check_unsupported()
        tok = self.next()
        if tok.text not in ("operation", "function"):
            raise QsParseError(
                f"expected a callable declaration, found {tok.text!r}", tok.span
            )
        kind = tok.text
        name = self.ident()
        params = self.param_pattern()
        self.expect(":")
        ret = self.type_()
        chars: list[str] = []
        if self.at("is"):
            self.next()
            while True:
                c = self.next()
                if c.text not in ("Adj", "Ctl"):
                    raise QsParseError(
                        f"unknown characteristic {c.text!r}", c.span
                    )
                chars.append(c.text)
                if self.at("+"):
                    self.next()
                    continue
                break
        body = self.block()
        return QsCallable(kind, name, params, ret, tuple(chars), body, span=tok.span)

    def param_pattern(self) -> QsPattern:
        self.expect("(")
        if self.at(")"):
            self.next()
            return PTuple(())
        items = [self.pattern()]
        while self.at(","):
            self.next()
            items.append(self.pattern())
        self.expect(")")
        if len(items) == 1:
            return items[0]
        return PTuple(tuple(items))

    def pattern(self) -> QsPattern:
        if self.at("("):
            self.next()
            items = [self.pattern()]
            while self.at(","):
                self.next()
                items.append(self.pattern())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            return PTuple(tuple(items))
        name = self.ident()
        self.expect(":")
        return PVar(name, self.type_())

    def type_(self) -> QsType:
        t = self.type_atom()
        if self.at("->"):
            self.next()
            return QTArrow(t, self.type_(), operation=False)
        if self.at("=>"):
            self.next()
            return QTArrow(t, self.type_(), operation=True)
        return t

    def type_atom(self) -> QsType:
        tok = self.next()
        out: QsType
        if tok.text == "Qubit":
            out = QTQubit()
        elif tok.text == "Bool":
            out = QTBool()
        elif tok.text == "Result":
            out = QTResult()
        elif tok.text == "Unit":
            out = QTUnit()
        elif tok.text == "(":
            items = [self.type_()]
            while self.at(","):
                self.next()
                items.append(self.type_())
            self.expect(")")
            out = items[0] if len(items) == 1 else QTTuple(tuple(items))
        else:
            if tok.kind == "ident" and tok.text in _UNSUPPORTED_KEYWORDS:
                raise UnsupportedFeature(_UNSUPPORTED_KEYWORDS[tok.text], tok.span)
            raise UnsupportedFeature(f"base type {tok.text!r}", tok.span)
        if self.at("["):
            raise UnsupportedFeature("arrays", self.peek().span)
        return out

    # -- statements --

    def block(self) -> tuple[QsStmt, ...]:
        self.expect("{")
        out: list[QsStmt] = []
        while not self.at("}"):
            out.append(self.stmt())
        self.expect("}")
        return tuple(out)

    def stmt(self) -> QsStmt:
        self._check_unsupported()
        tok = self.peek()
        if self.at("let"):
            self.next()
            if self.at("("):
                raise UnsupportedFeature("tuple-pattern let bindings", tok.span)
            name = self.ident()
            self.expect("=")
            e = self.expr()
            self.expect(";")
            return SLet(name, e, span=tok.span)
        if self.at("use") or self.at("using"):
            self.next()
            if self.at("("):
                raise UnsupportedFeature("parenthesized use bindings", tok.span)
            name = self.ident()
            self.expect("=")
            self.expect("Qubit")
            self.expect("(")
            self.expect(")")
            if self.at("{"):
                return SUse(name, self.block(), span=tok.span)
            self.expect(";")
            return SUse(name, None, span=tok.span)
        if self.at("return"):
            self.next()
            e = self.expr()
            self.expect(";")
            return SReturn(e, span=tok.span)
        if self.at("if"):
            arms: list[tuple[QsExpr, tuple[QsStmt, ...]]] = []
            self.next()
            cond = self.expr()
            arms.append((cond, self.block()))
            els: tuple[QsStmt, ...] | None = None
            while self.at("elif"):
                self.next()
                c = self.expr()
                arms.append((c, self.block()))
            if self.at("else"):
                self.next()
                els = self.block()
            return SIf(tuple(arms), els, span=tok.span)
        e = self.expr()
        self.expect(";")
        return SExpr(e, span=tok.span)

    # -- expressions --

    def expr(self) -> QsExpr:
        lhs = self.primary()
        if self.at("==") or self.at("!="):
            op = self.next()
            rhs = self.primary()
            return ECmp(lhs, rhs, negated=(op.text == "!="), span=op.span)
        return lhs

    def primary(self) -> QsExpr:
        self._check_unsupported()
        tok = self.peek()
        if self.at("Adjoint"):
            self.next()
            return self._postfix(EAdj(self.head(), span=tok.span))
        if self.at("Controlled"):
            self.next()
            return self._postfix(ECtl(self.head(), span=tok.span))
        return self._postfix(self.head())

    def head(self) -> QsExpr:
        self._check_unsupported()
        tok = self.next()
        span = tok.span
        if tok.text == "true":
            return EBool(True, span=span)
        if tok.text == "false":
            return EBool(False, span=span)
        if tok.text == "One":
            return EResult(True, span=span)
        if tok.text == "Zero":
            return EResult(False, span=span)
        if tok.text == "(":
            if self.at(")"):
                self.next()
                return EUnit(span=span)
            items = [self.expr()]
            while self.at(","):
                self.next()
                items.append(self.expr())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            return ETuple(tuple(items), span=span)
        if tok.text == "[":
            items = [self.expr()]
            while self.at(","):
                self.next()
                items.append(self.expr())
            self.expect("]")
            return EArray(tuple(items), span=span)
        if tok.kind == "ident":
            name = tok.text
            while self.at("."):
                self.next()
                name = self.ident()  # qualified: keep the last segment
            return EVar(name, span=span)
        raise QsParseError(f"expected an expression, found {tok.text!r}", span)

    def _postfix(self, e: QsExpr) -> QsExpr:
        while self.at("("):
            span = self.next().span
            args: list[QsExpr] = []
            if not self.at(")"):
                args.append(self.expr())
                while self.at(","):
                    self.next()
                    args.append(self.expr())
            self.expect(")")
            e = ECall(e, tuple(args), span=span)
        return e


def parse_qs(text: str) -> QsProgram:
    p = _Parser(text)
    prog = p.program()
    tok = p.peek()
    if tok.kind != "eof":
        raise QsParseError(f"trailing input at {tok.text!r}", tok.span)
    return prog
