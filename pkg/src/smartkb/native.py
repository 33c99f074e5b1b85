"""Native ``.sksm`` module format: a line-oriented block grammar.

See ``docs/format.md`` for the full grammar. Parsing collects every
diagnostic it can and only returns a module for a clean document.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterator

from .errors import Diagnostic, ModelError, ParseError
from .model import (
    ATOM_TYPES,
    BUILTIN_PREFIXES,
    CURIE_RE,
    PREFIX_RE,
    RDFS_COMMENT,
    Annotation,
    ClassAtom,
    ClassDef,
    Individual,
    Module,
    ModuleKind,
    Or,
    PropertyDef,
    PropertyKind,
    ResourceId,
    SourceRef,
    XSD_DECIMAL,
    format_decimal,
    to_decimal,
)
from .syntax import (
    SyntaxProblem,
    Token,
    TokenStream,
    format_atom,
    format_dnf,
    is_number,
    parse_expression,
    quote,
    tokenize_line,
)

BLOCK_KINDS = ("class", "object-property", "data-property", "annotation-property", "individual")
HEADER_KEYWORDS = ("module", "kind", "version", "prefix", "import")
_MODULE_KINDS = tuple(k.value for k in ModuleKind)


@dataclass
class Line:
    number: int
    indented: bool
    text: str
    tokens: list[Token]

    def stream(self, source: str) -> TokenStream:
        return TokenStream(self.tokens, self.number, source, len(self.text))


def iter_lines(text: str, source: str, diags: list[Diagnostic]) -> Iterator[Line]:
    """Yield non-blank, non-comment lines; tokenization errors become diagnostics."""
    if text.startswith("﻿"):
        text = text[1:]
    for number, raw in enumerate(text.split("\n"), start=1):
        raw = raw.rstrip("\r")
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            tokens = tokenize_line(raw, number, source)
        except SyntaxProblem as exc:
            diags.append(exc.diag)
            continue
        yield Line(number, raw[:1] in (" ", "\t"), raw, tokens)


class IdResolver:
    """Turns word tokens into ResourceIds, checking the prefix table."""

    def __init__(self, prefixes: dict[str, str], ts: TokenStream):
        self.prefixes = prefixes
        self.ts = ts

    def __call__(self, tok: Token) -> ResourceId:
        m = CURIE_RE.fullmatch(tok.text) if tok.kind == "word" else None
        if not m:
            raise self.ts.error(f"expected a prefixed identifier (prefix:local), found {tok.text or 'end of line'!r}", tok)
        if m["ns"] not in self.prefixes and m["ns"] not in BUILTIN_PREFIXES:
            raise self.ts.error(f"prefix {m['ns']!r} is not declared", tok, code="unknown-prefix")
        return ResourceId(m["ns"], m["local"])


def number_fn(ts: TokenStream):
    def fn(tok: Token) -> Decimal:
        if tok.kind != "word" or not is_number(tok.text):
            raise ts.error(f"expected a number, found {tok.text or 'end of line'!r}", tok)
        return to_decimal(tok.text)
    return fn


def parse_source_ref(ts: TokenStream) -> SourceRef:
    tok = ts.peek()
    std, ed, loc = ts.expect_string(), ts.expect_string(), ts.expect_string()
    try:
        return SourceRef(std, ed, loc)
    except ModelError as exc:
        raise ts.error(str(exc), tok) from None


@dataclass
class _Block:
    kind: str
    id: ResourceId
    line: int
    attrs: dict[str, list] = field(default_factory=dict)

    def add(self, name: str, value) -> None:
        self.attrs.setdefault(name, []).append(value)

    def one(self, name: str, default=None):
        values = self.attrs.get(name, [])
        return values[0] if values else default

    def many(self, name: str) -> tuple:
        return tuple(self.attrs.get(name, ()))


_SINGLE = {"label", "equivalent", "domain", "range", "unit"}
_ATTRS = {
    "class": {"label", "subclass-of", "equivalent", "equivalent-source", "disjoint-with", "restriction",
              "comment", "annotation", "source"},
    "object-property": {"label", "subproperty-of", "domain", "range", "unit", "comment", "annotation", "source"},
    "individual": {"label", "type", "fact", "value", "comment", "annotation", "source"},
}
_ATTRS["data-property"] = _ATTRS["object-property"]
_ATTRS["annotation-property"] = _ATTRS["object-property"]


def parse_module(text: str, source: str = "<module>") -> Module:
    """Parse a ``.sksm`` document; raise :class:`ParseError` listing every diagnostic."""
    diags: list[Diagnostic] = []
    header: dict[str, object] = {"imports": [], "prefixes": {}}
    blocks: list[_Block] = []
    declared: dict[ResourceId, int] = {}
    current: _Block | None = None
    in_body = False

    for line in iter_lines(text, source, diags):
        ts = line.stream(source)
        try:
            if line.indented:
                if current is None:
                    raise ts.error("indented attribute outside a declaration block")
                _parse_attribute(current, ts, header["prefixes"])
                continue
            head = ts.peek()
            if head.kind == "word" and head.text in BLOCK_KINDS:
                in_body = True
                ts.next()
                ident = IdResolver(header["prefixes"], ts)(ts.next())
                ts.expect_end()
                current = _Block(head.text, ident, line.number)
                if ident in declared:
                    current = None
                    raise ts.error(f"{ident} already declared on line {declared[ident]}", head,
                                   code="duplicate-declaration")
                declared[ident] = line.number
                blocks.append(current)
            elif head.kind == "word" and head.text in HEADER_KEYWORDS:
                current = None
                if in_body:
                    raise ts.error(f"header line {head.text!r} after the first declaration", head)
                _parse_header(header, ts)
            else:
                expected = ", ".join(HEADER_KEYWORDS + BLOCK_KINDS)
                raise ts.error(f"expected one of {expected}; found {head.text!r}", head)
        except SyntaxProblem as exc:
            diags.append(exc.diag)

    for key in ("module", "kind"):
        if key not in header:
            diags.append(Diagnostic("missing-header", f"document has no {key!r} line", source, 1, 1))
    if "module" in header:
        tok = header["module"]
        try:
            header["module"] = IdResolver(header["prefixes"], TokenStream([], tok.line, source))(tok)
        except SyntaxProblem as exc:
            diags.append(exc.diag)
    if diags:
        raise ParseError(sorted(diags, key=lambda d: (d.line, d.column, d.code)))

    classes, props, inds = [], [], []
    for b in blocks:
        try:
            if b.kind == "class":
                classes.append(_build_class(b))
            elif b.kind == "individual":
                inds.append(_build_individual(b))
            else:
                props.append(_build_property(b))
        except ModelError as exc:
            diags.append(Diagnostic("invalid-declaration", str(exc), source, b.line, 1))
    if diags:
        raise ParseError(diags)
    try:
        return Module(id=header["module"], kind=header["kind"], imports=tuple(header["imports"]),
                      prefixes=header["prefixes"], classes=tuple(classes), properties=tuple(props),
                      individuals=tuple(inds), version=header.get("version", ""))
    except ModelError as exc:
        raise ParseError([Diagnostic("invalid-module", str(exc), source, 1, 1)]) from None


def _parse_header(header: dict, ts: TokenStream) -> None:
    kw = ts.next()
    prefixes = header["prefixes"]
    if kw.text in ("module", "kind", "version") and kw.text in header:
        raise ts.error(f"duplicate {kw.text!r} line", kw)
    if kw.text == "module":
        # resolved once the whole header is read: prefix lines may follow
        header["module"] = ts.next()
        if header["module"].kind != "word" or not CURIE_RE.fullmatch(header["module"].text):
            raise ts.error(f"expected a prefixed identifier, found {header['module'].text or 'end of line'!r}",
                           header["module"])
    elif kw.text == "kind":
        tok = ts.expect_word()
        if tok.text not in _MODULE_KINDS:
            raise ts.error(f"expected one of {', '.join(_MODULE_KINDS)}; found {tok.text!r}", tok)
        header["kind"] = ModuleKind(tok.text)
    elif kw.text == "version":
        header["version"] = ts.expect_string()
    elif kw.text == "prefix":
        name = ts.expect_word()
        if not PREFIX_RE.fullmatch(name.text):
            raise ts.error(f"invalid prefix name {name.text!r}", name)
        uri_tok = ts.next()
        uri = uri_tok.text[1:-1] if uri_tok.kind == "word" and uri_tok.text.startswith("<") and uri_tok.text.endswith(">") else None
        if not uri:
            raise ts.error(f"expected <base-uri>, found {uri_tok.text or 'end of line'!r}", uri_tok)
        if name.text in BUILTIN_PREFIXES and BUILTIN_PREFIXES[name.text] != uri:
            raise ts.error(f"built-in prefix {name.text!r} cannot be rebound", name)
        if name.text in prefixes and prefixes[name.text] != uri:
            raise ts.error(f"prefix {name.text!r} bound twice", name, code="prefix-conflict")
        prefixes[name.text] = uri
    else:  # import
        header["imports"].append(IdResolver(prefixes, ts)(ts.next()))
    ts.expect_end()


def _parse_attribute(block: _Block, ts: TokenStream, prefixes: dict[str, str]) -> None:
    ids = IdResolver(prefixes, ts)
    name_tok = ts.expect_word()
    name = name_tok.text
    if name not in _ATTRS[block.kind]:
        allowed = ", ".join(sorted(_ATTRS[block.kind]))
        raise ts.error(f"expected one of {allowed}; found {name!r}", name_tok)
    if name in _SINGLE and block.attrs.get(name):
        raise ts.error(f"{name!r} given more than once for {block.id}", name_tok, code="duplicate-attribute")

    if name in ("label", "unit", "comment"):
        value = ts.expect_string()
    elif name in ("subclass-of", "disjoint-with", "subproperty-of", "domain", "range", "type"):
        value = ids(ts.next())
    elif name == "equivalent":
        if ts.peek().text == "owl:Nothing" and len(ts.tokens) == 2:
            ts.next()
            value = Or(())
        else:
            value = parse_expression(ts, ids, number_fn(ts))
    elif name == "restriction":
        tok = ts.peek()
        value = parse_expression(ts, ids, number_fn(ts))
        if not isinstance(value, ATOM_TYPES) or isinstance(value, ClassAtom):
            raise ts.error("a restriction is a single property restriction or data range", tok)
    elif name in ("source", "equivalent-source"):
        value = parse_source_ref(ts)
    elif name == "annotation":
        value = Annotation(ids(ts.next()), ts.expect_string())
    elif name == "fact":
        value = (ids(ts.next()), ids(ts.next()))
    else:  # value
        prop = ids(ts.next())
        value = (prop, number_fn(ts)(ts.next()))
    ts.expect_end()
    block.add(name, value)


def _annotations(b: _Block) -> tuple:
    comments = tuple(Annotation(RDFS_COMMENT, c) for c in b.many("comment"))
    return comments + b.many("annotation") + b.many("source")


def _build_class(b: _Block) -> ClassDef:
    return ClassDef(id=b.id, label=b.one("label", ""), superclasses=b.many("subclass-of"),
                    equivalent=b.one("equivalent"), disjoint_with=b.many("disjoint-with"),
                    restrictions=b.many("restriction"), annotations=_annotations(b),
                    equivalent_sources=b.many("equivalent-source"))


def _build_property(b: _Block) -> PropertyDef:
    return PropertyDef(id=b.id, kind=PropertyKind(b.kind.split("-")[0]), label=b.one("label", ""),
                       superproperties=b.many("subproperty-of"), domain=b.one("domain"),
                       range=b.one("range"), unit_note=b.one("unit"), annotations=_annotations(b))


def _build_individual(b: _Block) -> Individual:
    return Individual(id=b.id, label=b.one("label", ""), asserted_types=b.many("type"),
                      object_assertions=b.many("fact"), data_assertions=b.many("value"),
                      annotations=_annotations(b))


# -- writing ----------------------------------------------------------------------

def _source_line(keyword: str, ref: SourceRef) -> str:
    return f"  {keyword} {quote(ref.standard_id)} {quote(ref.edition)} {quote(ref.locator)}"


def _annotation_lines(annotations) -> list[str]:
    out = []
    for a in annotations:
        if isinstance(a, SourceRef):
            continue
        if a.property == RDFS_COMMENT:
            out.append(f"  comment {quote(a.value)}")
        else:
            out.append(f"  annotation {a.property} {quote(a.value)}")
    out += [_source_line("source", s) for s in annotations if isinstance(s, SourceRef)]
    return out


def write_module(m: Module) -> str:
    """Canonical ``.sksm`` text; equal modules give byte-identical output."""
    out = [f"module {m.id}", f"kind {m.kind.value}"]
    if m.version:
        out.append(f"version {quote(m.version)}")
    out += [f"prefix {p} <{uri}>" for p, uri in m.prefixes.items()]
    out += [f"import {i}" for i in m.imports]

    for c in m.classes:
        out += ["", f"class {c.id}"]
        if c.label:
            out.append(f"  label {quote(c.label)}")
        out += [f"  subclass-of {s}" for s in c.superclasses]
        if c.equivalent is not None:
            out.append(f"  equivalent {format_dnf(c.equivalent)}")
        out += [_source_line("equivalent-source", s) for s in c.equivalent_sources]
        out += [f"  disjoint-with {d}" for d in c.disjoint_with]
        out += [f"  restriction {format_atom(r)}" for r in c.restrictions]
        out += _annotation_lines(c.annotations)
    for p in m.properties:
        out += ["", f"{p.kind.value}-property {p.id}"]
        if p.label:
            out.append(f"  label {quote(p.label)}")
        out += [f"  subproperty-of {s}" for s in p.superproperties]
        if p.domain is not None:
            out.append(f"  domain {p.domain}")
        if p.range is not None and not (p.kind is PropertyKind.DATA and p.range == XSD_DECIMAL):
            out.append(f"  range {p.range}")
        if p.unit_note is not None:
            out.append(f"  unit {quote(p.unit_note)}")
        out += _annotation_lines(p.annotations)
    for i in m.individuals:
        out += ["", f"individual {i.id}"]
        if i.label:
            out.append(f"  label {quote(i.label)}")
        out += [f"  type {t}" for t in i.asserted_types]
        out += [f"  fact {p} {t}" for p, t in i.object_assertions]
        out += [f"  value {p} {format_decimal(v)}" for p, v in i.data_assertions]
        out += _annotation_lines(i.annotations)
    return "\n".join(out) + "\n"


def read_module_file(path) -> Module:
    from pathlib import Path
    p = Path(path)
    return parse_module(p.read_text(encoding="utf-8"), source=str(p))
