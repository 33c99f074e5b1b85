"""Tokenizer and class-expression grammar shared by the text formats.

Expression grammar (``and`` binds tighter than ``or``)::

    expr    := term ("or" term)*
    term    := factor ("and" factor)*
    factor  := "(" expr ")"
             | "[" ID CMP NUMBER "]"                 data range
             | ID "only" ID                          universal restriction
             | ID ("exactly"|"min"|"max") INT [ID]   cardinality restriction
             | ID                                    named class
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .errors import Diagnostic
from .model import (
    And,
    CardinalityRestriction,
    ClassAtom,
    ClassExpression,
    DataRangeAtom,
    Or,
    UniversalRestriction,
    format_decimal,
)

_TOKEN_RE = re.compile(
    r'''(?P<ws>[ \t]+)
      | (?P<string>"(?:[^"\\\n]|\\.)*")
      | (?P<punct>[()\[\],])
      | (?P<word>[^\s()\[\],"]+)''',
    re.VERBOSE,
)
_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)")
_UNICODE_CMP = {"≤": "<=", "≥": ">="}
COMPARATOR_WORDS = ("<=", ">=", "<", ">", "=")


@dataclass(frozen=True)
class Token:
    kind: str  # string | punct | word | eol
    text: str
    line: int
    column: int

    @property
    def value(self) -> str:
        if self.kind == "string":
            return unquote(self.text)
        return self.text


class SyntaxProblem(Exception):
    """Internal: carries a diagnostic out of a recursive-descent parse."""

    def __init__(self, diag: Diagnostic):
        self.diag = diag
        super().__init__(str(diag))


def unquote(text: str) -> str:
    body = text[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append({"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}.get(nxt, nxt))
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def quote(text: str) -> str:
    escaped = (text.replace("\\", "\\\\").replace('"', '\\"')
               .replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r"))
    return f'"{escaped}"'


def tokenize_line(line: str, lineno: int, source: str = "") -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if not m:
            raise SyntaxProblem(Diagnostic("syntax-error", f"unexpected character {line[pos]!r}", source, lineno, pos + 1))
        kind = m.lastgroup
        if kind != "ws":
            text = m.group()
            if kind == "word":
                text = _UNICODE_CMP.get(text, text)
            tokens.append(Token(kind, text, lineno, pos + 1))
        pos = m.end()
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token], lineno: int, source: str = "", line_len: int = 0):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno
        self.source = source
        self.line_len = line_len

    def peek(self, offset: int = 0) -> Token:
        i = self.pos + offset
        if i < len(self.tokens):
            return self.tokens[i]
        return Token("eol", "", self.lineno, self.line_len + 1)

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def error(self, message: str, tok: Token | None = None, code: str = "syntax-error") -> SyntaxProblem:
        tok = tok or self.peek()
        return SyntaxProblem(Diagnostic(code, message, self.source, tok.line, tok.column))

    def expect_word(self, *expected: str) -> Token:
        tok = self.next()
        if tok.kind != "word" or (expected and tok.text not in expected):
            want = " or ".join(repr(e) for e in expected) if expected else "a word"
            raise self.error(f"expected {want}, found {tok.text or 'end of line'!r}", tok)
        return tok

    def expect_punct(self, ch: str) -> Token:
        tok = self.next()
        if tok.kind != "punct" or tok.text != ch:
            raise self.error(f"expected {ch!r}, found {tok.text or 'end of line'!r}", tok)
        return tok

    def expect_string(self) -> str:
        tok = self.next()
        if tok.kind != "string":
            raise self.error(f"expected a quoted string, found {tok.text or 'end of line'!r}", tok)
        return tok.value

    def expect_end(self) -> None:
        if not self.at_end():
            tok = self.peek()
            raise self.error(f"expected end of line, found {tok.text!r}", tok)


def is_number(text: str) -> bool:
    return bool(_NUMBER_RE.fullmatch(text))


KEYWORDS = frozenset({"and", "or", "only", "exactly", "min", "max"})

IdFn = Callable[[Token], object]
NumFn = Callable[[Token], object]
IntFn = Callable[[Token], int]


def parse_expression(ts: TokenStream, id_fn: IdFn, num_fn: NumFn, int_fn: IntFn | None = None) -> ClassExpression:
    """Parse an expression from ``ts``; ``id_fn``/``num_fn`` turn tokens into values."""
    int_fn = int_fn or _default_int(ts)

    def expr():
        items = [term()]
        while ts.peek().kind == "word" and ts.peek().text == "or":
            ts.next()
            items.append(term())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def term():
        items = [factor()]
        while ts.peek().kind == "word" and ts.peek().text == "and":
            ts.next()
            items.append(factor())
        return items[0] if len(items) == 1 else And(tuple(items))

    def factor():
        tok = ts.peek()
        if tok.kind == "punct" and tok.text == "(":
            ts.next()
            inner = expr()
            ts.expect_punct(")")
            return inner
        if tok.kind == "punct" and tok.text == "[":
            ts.next()
            prop = id_fn(_id_token(ts))
            cmp_tok = ts.next()
            if cmp_tok.kind != "word" or cmp_tok.text not in COMPARATOR_WORDS:
                raise ts.error(f"expected a comparator, found {cmp_tok.text or 'end of line'!r}", cmp_tok)
            value = num_fn(ts.next())
            ts.expect_punct("]")
            return DataRangeAtom(prop, cmp_tok.text, value)
        ident_tok = _id_token(ts)
        nxt = ts.peek()
        if nxt.kind == "word" and nxt.text == "only":
            ts.next()
            return UniversalRestriction(id_fn(ident_tok), id_fn(_id_token(ts)))
        if nxt.kind == "word" and nxt.text in ("exactly", "min", "max"):
            ts.next()
            n = int_fn(ts.next())
            filler = None
            after = ts.peek()
            if after.kind == "word" and after.text not in KEYWORDS:
                filler = id_fn(_id_token(ts))
            return CardinalityRestriction(id_fn(ident_tok), nxt.text, n, filler)
        return ClassAtom(id_fn(ident_tok))

    return expr()


def _id_token(ts: TokenStream) -> Token:
    tok = ts.next()
    if tok.kind != "word" or tok.text in KEYWORDS or tok.text in COMPARATOR_WORDS:
        raise ts.error(f"expected an identifier, found {tok.text or 'end of line'!r}", tok)
    return tok


def _default_int(ts: TokenStream) -> IntFn:
    def fn(tok: Token) -> int:
        if tok.kind != "word" or not tok.text.isdigit():
            raise ts.error(f"expected a non-negative integer, found {tok.text or 'end of line'!r}", tok)
        return int(tok.text)
    return fn


def format_atom(atom) -> str:
    if isinstance(atom, DataRangeAtom):
        return f"[{atom.property} {atom.comparator} {format_decimal(atom.value)}]"
    return str(atom)


def format_conjunction(atoms) -> str:
    return " and ".join(format_atom(a) for a in atoms)


def format_dnf(expr: Or) -> str:
    """Text for a canonical DNF; the empty disjunction is written ``owl:Nothing``."""
    if not expr.items:
        return "owl:Nothing"
    parts = []
    for conj in expr.items:
        text = format_conjunction(conj.items)
        if len(expr.items) > 1 and len(conj.items) > 1:
            text = f"({text})"
        parts.append(text)
    return " or ".join(parts)
