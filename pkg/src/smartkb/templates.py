"""Parameterized, nestable axiom templates (``.skt`` files).

A template body is a list of axiom schemas, written exactly like axioms
but with ``?var`` placeholders, plus ``call`` lines that invoke other
templates. Placeholders may also be interpolated into identifiers and
strings with ``{?var}`` (``{?var.ns}`` gives an identifier's prefix).
A schema that mentions an absent optional argument is skipped.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .axioms import Axiom, parse_axiom_tokens, sort_axioms
from .errors import Diagnostic, ModelError, TemplateError
from .model import CURIE_RE, ResourceId, format_decimal, to_decimal
from .native import iter_lines
from .syntax import SyntaxProblem, Token, TokenStream, is_number, quote, unquote

PARAM_KINDS = ("class-id", "property-id", "individual-id", "decimal", "string")
ID_KINDS = frozenset({"class-id", "property-id", "individual-id"})
NONE_WORD = "none"

_VAR = r"\?[A-Za-z_][A-Za-z0-9_]*"
VAR_RE = re.compile(_VAR)
INTERP_RE = re.compile(r"\{(" + _VAR + r")(\.ns)?\}")


@dataclass(frozen=True)
class Parameter:
    name: str  # without the leading '?'
    kind: str
    optional: bool = False

    def __post_init__(self) -> None:
        if self.kind not in PARAM_KINDS:
            raise ModelError(f"unknown parameter kind {self.kind!r}")


@dataclass(frozen=True)
class Schema:
    """An axiom line with placeholders, kept as tokens until substitution."""

    tokens: tuple[Token, ...]
    line: int

    def variables(self) -> set[str]:
        return _token_vars(self.tokens)


@dataclass(frozen=True)
class Call:
    target: ResourceId
    args: tuple[Token, ...]
    line: int

    def variables(self) -> set[str]:
        return _token_vars(self.args)


@dataclass(frozen=True)
class Template:
    id: ResourceId
    parameters: tuple[Parameter, ...]
    body: tuple[Schema | Call, ...]
    source: str = ""
    line: int = 0

    def parameter(self, name: str) -> Parameter | None:
        for p in self.parameters:
            if p.name == name:
                return p
        return None


def _token_vars(tokens: Iterable[Token]) -> set[str]:
    out = set()
    for tok in tokens:
        if tok.kind == "word" and VAR_RE.fullmatch(tok.text):
            out.add(tok.text[1:])
        for m in INTERP_RE.finditer(tok.text):
            out.add(m.group(1)[1:])
    return out


Library = Mapping[ResourceId, Template]


def as_library(templates: Iterable[Template] | Library) -> dict[ResourceId, Template]:
    if isinstance(templates, Mapping):
        return dict(templates)
    return {t.id: t for t in templates}


# -- parsing -----------------------------------------------------------------------

def parse_templates(text: str, source: str = "<templates>") -> list[Template]:
    """Parse a ``.skt`` document holding one or more templates."""
    diags: list[Diagnostic] = []
    out: list[Template] = []
    current: dict | None = None

    def finish():
        if current is not None:
            out.append(Template(current["id"], tuple(current["params"]), tuple(current["body"]),
                                source, current["line"]))

    for line in iter_lines(text, source, diags):
        ts = line.stream(source)
        try:
            if not line.indented:
                ts.expect_word("template")
                tok = ts.next()
                if tok.kind != "word" or not CURIE_RE.fullmatch(tok.text):
                    raise ts.error(f"expected a template identifier, found {tok.text or 'end of line'!r}", tok)
                ts.expect_end()
                finish()
                current = {"id": ResourceId.parse(tok.text), "params": [], "body": [], "line": line.number}
                if any(t.id == current["id"] for t in out):
                    raise ts.error(f"template {tok.text} defined twice", tok, code="duplicate-declaration")
                continue
            if current is None:
                raise ts.error("indented line outside a template block")
            head = ts.peek()
            if head.kind == "word" and head.text == "param":
                ts.next()
                name = ts.next()
                if name.kind != "word" or not VAR_RE.fullmatch(name.text):
                    raise ts.error(f"expected a ?variable, found {name.text or 'end of line'!r}", name)
                kind = ts.expect_word(*PARAM_KINDS).text
                optional = False
                if not ts.at_end():
                    ts.expect_word("optional")
                    optional = True
                ts.expect_end()
                if current["body"]:
                    raise ts.error("parameters must come before the template body", head)
                if any(p.name == name.text[1:] for p in current["params"]):
                    raise ts.error(f"parameter {name.text} declared twice", name)
                current["params"].append(Parameter(name.text[1:], kind, optional))
            elif head.kind == "word" and head.text == "call":
                ts.next()
                tok = ts.next()
                if tok.kind != "word" or not CURIE_RE.fullmatch(tok.text):
                    raise ts.error(f"expected a template identifier, found {tok.text or 'end of line'!r}", tok)
                ts.expect_punct("(")
                args: list[Token] = []
                if ts.peek().text != ")":
                    while True:
                        arg = ts.next()
                        if arg.kind not in ("word", "string"):
                            raise ts.error(f"expected an argument, found {arg.text or 'end of line'!r}", arg)
                        args.append(arg)
                        if ts.peek().text == ",":
                            ts.next()
                            continue
                        break
                ts.expect_punct(")")
                ts.expect_end()
                current["body"].append(Call(ResourceId.parse(tok.text), tuple(args), line.number))
            else:
                current["body"].append(Schema(tuple(line.tokens), line.number))
        except SyntaxProblem as exc:
            diags.append(exc.diag)
    finish()
    if diags:
        raise TemplateError(diags)
    return out


def read_template_file(path) -> list[Template]:
    p = Path(path)
    return parse_templates(p.read_text(encoding="utf-8"), source=str(p))


def write_template(t: Template) -> str:
    lines = [f"template {t.id}"]
    for p in t.parameters:
        lines.append(f"  param ?{p.name} {p.kind}" + (" optional" if p.optional else ""))
    for item in t.body:
        if isinstance(item, Call):
            args = ", ".join(a.text for a in item.args)
            lines.append(f"  call {item.target}({args})")
        else:
            lines.append("  " + " ".join(tok.text for tok in item.tokens))
    return "\n".join(lines) + "\n"


# -- values --------------------------------------------------------------------------

def coerce_argument(param: Parameter, value) -> ResourceId | Decimal | str | None:
    """Check and convert one argument; ``None`` or ``''`` mean absent."""
    if value is None or (isinstance(value, str) and value.strip() == ""):
        return None
    if param.kind in ID_KINDS:
        if isinstance(value, ResourceId):
            return value
        if isinstance(value, str) and CURIE_RE.fullmatch(value.strip()):
            return ResourceId.parse(value)
        raise _kind_error(param, value)
    if param.kind == "decimal":
        if isinstance(value, bool):
            raise _kind_error(param, value)
        if isinstance(value, (int, Decimal)) or (isinstance(value, str) and is_number(value.strip())):
            return Decimal(format_decimal(to_decimal(value)))
        raise _kind_error(param, value)
    if isinstance(value, str):
        return value
    raise _kind_error(param, value)


class _KindMismatch(Exception):
    pass


def _kind_error(param: Parameter, value) -> _KindMismatch:
    return _KindMismatch(f"argument {value!r} for ?{param.name} is not a {param.kind}")


def _render(value, part: str | None = None) -> str:
    """Text inserted for ``{?var}`` inside an identifier or string."""
    if isinstance(value, ResourceId):
        return value.namespace if part == ".ns" else value.local
    if isinstance(value, Decimal):
        return format_decimal(value)
    return value


def _substitute(tok: Token, env: dict) -> Token:
    if tok.kind == "word" and VAR_RE.fullmatch(tok.text):
        value = env[tok.text[1:]]
        if isinstance(value, ResourceId):
            return Token("word", str(value), tok.line, tok.column)
        if isinstance(value, Decimal):
            return Token("word", format_decimal(value), tok.line, tok.column)
        return Token("string", quote(value), tok.line, tok.column)
    if "{?" in tok.text:
        def repl(m):
            return _render(env[m.group(1)[1:]], m.group(2))
        if tok.kind == "string":
            return Token("string", quote(INTERP_RE.sub(repl, unquote(tok.text))), tok.line, tok.column)
        return Token(tok.kind, INTERP_RE.sub(repl, tok.text), tok.line, tok.column)
    return tok


def _call_argument(tok: Token, env: dict):
    """Value passed to a nested template for one call argument token."""
    if tok.kind == "word" and tok.text == NONE_WORD:
        return None
    if tok.kind == "word" and VAR_RE.fullmatch(tok.text):
        return env[tok.text[1:]]
    sub = _substitute(tok, env)
    if sub.kind == "string":
        return unquote(sub.text)
    return sub.text


# -- expansion ---------------------------------------------------------------------

def expand(template: Template | ResourceId, rows: Iterable[Sequence | Mapping],
           library: Iterable[Template] | Library = ()) -> list[Axiom]:
    """Expand ``template`` over argument rows into a deduplicated, canonically sorted axiom list.

    Rows are sequences (positional, matching the parameter list) or
    mappings from parameter name to value.
    """
    lib = as_library(library)
    if isinstance(template, ResourceId):
        if template not in lib:
            raise TemplateError([Diagnostic("unknown-template", f"no template {template}")])
        template = lib[template]
    lib.setdefault(template.id, template)
    out: list[Axiom] = []
    for i, row in enumerate(rows, start=1):
        env = _bind(template, row, f"row {i}")
        _expand_into(template, env, lib, (), out)
    return sort_axioms(out)


def _bind(t: Template, row, where: str) -> dict:
    if isinstance(row, Mapping):
        unknown = sorted(set(row) - {p.name for p in t.parameters})
        if unknown:
            raise TemplateError([Diagnostic("arity-mismatch", f"{where}: {t.id} has no parameter ?{unknown[0]}",
                                            t.source, t.line)])
        values = [row.get(p.name) for p in t.parameters]
    else:
        values = list(row)
        if len(values) != len(t.parameters):
            raise TemplateError([Diagnostic(
                "arity-mismatch", f"{where}: {t.id} takes {len(t.parameters)} arguments, got {len(values)}",
                t.source, t.line)])
    env = {}
    for p, v in zip(t.parameters, values):
        try:
            env[p.name] = coerce_argument(p, v)
        except _KindMismatch as exc:
            raise TemplateError([Diagnostic("kind-mismatch", f"{where}: {exc}", t.source, t.line)]) from None
        if env[p.name] is None and not p.optional:
            raise TemplateError([Diagnostic("arity-mismatch", f"{where}: required argument ?{p.name} is missing",
                                            t.source, t.line)])
    return env


def _expand_into(t: Template, env: dict, lib: dict, stack: tuple, out: list[Axiom]) -> None:
    if t.id in stack:
        chain = " -> ".join(str(x) for x in stack + (t.id,))
        raise TemplateError([Diagnostic("cycle-detected", f"template invocation cycle {chain}", t.source, t.line)])
    stack = stack + (t.id,)
    for item in t.body:
        needed = item.variables()
        missing = needed - set(env)
        if missing:
            raise TemplateError([Diagnostic("unbound-variable", f"?{sorted(missing)[0]} is not a parameter of {t.id}",
                                            t.source, item.line)])
        if any(env[v] is None for v in needed):
            continue
        if isinstance(item, Call):
            callee = lib.get(item.target)
            if callee is None:
                raise TemplateError([Diagnostic("unknown-template", f"{t.id} calls unknown template {item.target}",
                                                t.source, item.line)])
            args = [_call_argument(tok, env) for tok in item.args]
            sub_env = _bind(callee, args, f"{t.source}:{item.line}: call from {t.id}")
            _expand_into(callee, sub_env, lib, stack, out)
        else:
            tokens = [_substitute(tok, env) for tok in item.tokens]
            ts = TokenStream(tokens, item.line, t.source)
            try:
                out.append(parse_axiom_tokens(ts))
            except (SyntaxProblem, ModelError) as exc:
                msg = exc.diag.message if isinstance(exc, SyntaxProblem) else str(exc)
                raise TemplateError([Diagnostic("kind-mismatch", f"{t.id}: {msg}", t.source, item.line)]) from None


def read_rows(source: str | Path, template: Template) -> list[dict]:
    """Argument rows from CSV; the header must list the template's parameter names."""
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, Path) else source
    reader = csv.reader(io.StringIO(text))
    header = [h.strip() for h in next(reader, [])]
    names = [p.name for p in template.parameters]
    if header != names:
        raise TemplateError([Diagnostic("arity-mismatch",
                                        f"row header {','.join(header)} does not match parameters {','.join(names)}")])
    rows = []
    for lineno, fields in enumerate(reader, start=2):
        if not any(f.strip() for f in fields):
            continue
        if len(fields) != len(names):
            raise TemplateError([Diagnostic("arity-mismatch", f"expected {len(names)} fields, got {len(fields)}",
                                            str(source) if isinstance(source, Path) else "<rows>", lineno)])
        rows.append(dict(zip(names, (f.strip() for f in fields))))
    return rows


# -- validation ----------------------------------------------------------------------

_DUMMY = {
    "class-id": ResourceId("x", "C"),
    "property-id": ResourceId("x", "p"),
    "individual-id": ResourceId("x", "i"),
    "decimal": Decimal(1),
    "string": "s",
}


def validate_template(template: Template, library: Iterable[Template] | Library = ()) -> list[Diagnostic]:
    """Static checks: unbound variables, unknown callees, call arity/kinds, schema kinds, cycles."""
    lib = as_library(library)
    lib.setdefault(template.id, template)
    diags: list[Diagnostic] = []
    params = {p.name: p for p in template.parameters}
    env = {name: _DUMMY[p.kind] for name, p in params.items()}
    for item in template.body:
        unbound = sorted(item.variables() - set(params))
        for name in unbound:
            diags.append(Diagnostic("unbound-variable", f"?{name} is not a parameter of {template.id}",
                                    template.source, item.line))
        if unbound:
            continue
        if isinstance(item, Call):
            callee = lib.get(item.target)
            if callee is None:
                diags.append(Diagnostic("unknown-template", f"{template.id} calls unknown template {item.target}",
                                        template.source, item.line))
                continue
            if len(item.args) != len(callee.parameters):
                diags.append(Diagnostic("arity-mismatch",
                                        f"{item.target} takes {len(callee.parameters)} arguments, got {len(item.args)}",
                                        template.source, item.line))
                continue
            for tok, p in zip(item.args, callee.parameters):
                if tok.kind == "word" and VAR_RE.fullmatch(tok.text):
                    own = params[tok.text[1:]]
                    if (own.kind in ID_KINDS) != (p.kind in ID_KINDS) or (own.kind not in ID_KINDS and own.kind != p.kind):
                        diags.append(Diagnostic("kind-mismatch", f"?{own.name} ({own.kind}) passed as ?{p.name} ({p.kind})",
                                                template.source, item.line))
                elif tok.kind == "word" and tok.text == NONE_WORD:
                    if not p.optional:
                        diags.append(Diagnostic("arity-mismatch", f"none passed for required ?{p.name}",
                                                template.source, item.line))
                else:
                    try:
                        coerce_argument(p, _call_argument(tok, env))
                    except _KindMismatch as exc:
                        diags.append(Diagnostic("kind-mismatch", str(exc), template.source, item.line))
        else:
            tokens = [_substitute(tok, env) for tok in item.tokens]
            try:
                parse_axiom_tokens(TokenStream(tokens, item.line, template.source))
            except SyntaxProblem as exc:
                diags.append(Diagnostic("kind-mismatch", f"{template.id}: {exc.diag.message}", template.source, item.line))
            except ModelError as exc:
                diags.append(Diagnostic("kind-mismatch", f"{template.id}: {exc}", template.source, item.line))
    cycle = find_cycle(template.id, lib)
    if cycle:
        diags.append(Diagnostic("cycle-detected", "template invocation cycle " + " -> ".join(map(str, cycle)),
                                template.source, template.line))
    return diags


def find_cycle(start: ResourceId, lib: Mapping[ResourceId, Template]) -> list[ResourceId] | None:
    """First invocation cycle reachable from ``start``, as a closed path."""
    path: list[ResourceId] = []
    done: set[ResourceId] = set()

    def visit(tid: ResourceId):
        if tid in path:
            return path[path.index(tid):] + [tid]
        if tid in done or tid not in lib:
            return None
        path.append(tid)
        for item in lib[tid].body:
            if isinstance(item, Call):
                found = visit(item.target)
                if found:
                    return found
        path.pop()
        done.add(tid)
        return None

    return visit(start)
