"""Completeness shapes (``.skshape``) and their validation.

A shape targets every member of a class and lists what such an individual
must carry: object links to members of a filler class, and decimal data
values within an inclusive range::

    prefix pc <https://w3id.org/smartkb/piping-core/>
    prefix lis <http://rds.posccaesar.org/ontology/lis14/rdl/>

    shape area-line
      target pc:AreaLine
      object lis:contains pc:ProcessLine min 1
      data pc:hasSpecifiedMaxDesignTemperatureDegC xsd:decimal -200 850
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path

from .errors import Diagnostic, ParseError
from .kb import KnowledgeBase
from .model import BUILTIN_PREFIXES, PREFIX_RE, XSD_DECIMAL, ResourceId, format_decimal
from .native import IdResolver, iter_lines, number_fn
from .reasoner import Reasoner
from .syntax import SyntaxProblem

DATATYPES = (XSD_DECIMAL,)
_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_.")


@dataclass(frozen=True, order=True)
class ObjectConstraint:
    path: ResourceId
    filler: ResourceId
    min_count: int = 1

    def __post_init__(self) -> None:
        if self.min_count < 1:
            raise ValueError("min count must be at least 1")

    def __str__(self) -> str:
        return f"object {self.path} {self.filler} min {self.min_count}"


@dataclass(frozen=True, order=True)
class DataConstraint:
    property: ResourceId
    low: Decimal
    high: Decimal
    datatype: ResourceId = XSD_DECIMAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "low", Decimal(format_decimal(self.low)))
        object.__setattr__(self, "high", Decimal(format_decimal(self.high)))
        if self.low > self.high:
            raise ValueError(f"empty range [{self.low}, {self.high}] for {self.property}")
        if self.datatype not in DATATYPES:
            raise ValueError(f"unsupported datatype {self.datatype}")

    def __str__(self) -> str:
        return f"data {self.property} {self.datatype} {format_decimal(self.low)} {format_decimal(self.high)}"


@dataclass(frozen=True)
class Shape:
    name: str
    target: ResourceId
    objects: tuple[ObjectConstraint, ...] = ()
    data: tuple[DataConstraint, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "objects", tuple(sorted(set(self.objects))))
        object.__setattr__(self, "data", tuple(sorted(set(self.data))))

    @property
    def constraints(self) -> tuple:
        return (*self.objects, *self.data)


@dataclass(frozen=True, order=True)
class Violation:
    individual: ResourceId
    shape: str
    constraint: str
    kind: str  # missing-link | missing-value | out-of-range
    observed: str

    def __str__(self) -> str:
        return f"{self.individual}: shape {self.shape}: {self.constraint}: {self.kind} ({self.observed})"

    def as_dict(self) -> dict:
        return {"individual": str(self.individual), "shape": self.shape, "constraint": self.constraint,
                "kind": self.kind, "observed": self.observed}


# -- validation ------------------------------------------------------------------

def validate_shapes(kb: KnowledgeBase, shapes, *, reasoner: Reasoner | None = None,
                    individuals=None) -> list[Violation]:
    """One violation per unmet constraint per targeted individual, sorted."""
    r = reasoner or Reasoner(kb)
    pool = sorted(individuals) if individuals is not None else sorted(set(kb.individuals) | set(r.overlay))
    out: list[Violation] = []
    for shape in shapes:
        for ident in pool:
            if r.member(ident, shape.target):
                out += _check(r, shape, ident)
    return sorted(out)


def _check(r: Reasoner, shape: Shape, ident: ResourceId) -> list[Violation]:
    out = []
    for c in shape.objects:
        targets = r.targets(ident, c.path)
        good = [t for t in targets if r.member(t, c.filler)]
        if len(good) < c.min_count:
            seen = ", ".join(map(str, targets)) or "no targets"
            out.append(Violation(ident, shape.name, str(c), "missing-link",
                                 f"{len(good)} of {c.min_count} required {c.filler} via {c.path}; found {seen}"))
    facts = r.facts(ident)
    for c in shape.data:
        v = facts.data.get(c.property)
        if v is None:
            out.append(Violation(ident, shape.name, str(c), "missing-value", "no value"))
        elif not c.low <= v <= c.high:
            out.append(Violation(ident, shape.name, str(c), "out-of-range",
                                 f"{format_decimal(v)} outside [{format_decimal(c.low)}, {format_decimal(c.high)}]"))
    return out


# -- text format -----------------------------------------------------------------

def parse_shapes(text: str, source: str = "<shapes>") -> list[Shape]:
    diags: list[Diagnostic] = []
    prefixes: dict[str, str] = {}
    shapes: list[Shape] = []
    current: dict | None = None

    def close():
        if current is None:
            return
        if current["target"] is None:
            diags.append(Diagnostic("invalid-declaration", f"shape {current['name']} has no target", source,
                                    current["line"]))
        else:
            shapes.append(Shape(current["name"], current["target"], tuple(current["objects"]),
                                tuple(current["data"])))

    for line in iter_lines(text, source, diags):
        ts = line.stream(source)
        try:
            kw = ts.expect_word()
            if not line.indented:
                if kw.text == "prefix":
                    name = ts.expect_word()
                    uri = ts.next()
                    if not PREFIX_RE.fullmatch(name.text) or name.text in BUILTIN_PREFIXES:
                        raise ts.error(f"invalid prefix name {name.text!r}", name)
                    if not (uri.text.startswith("<") and uri.text.endswith(">") and len(uri.text) > 2):
                        raise ts.error(f"expected <base-uri>, found {uri.text or 'end of line'!r}", uri)
                    if prefixes.get(name.text, uri.text[1:-1]) != uri.text[1:-1]:
                        raise ts.error(f"prefix {name.text!r} bound twice", name, code="prefix-conflict")
                    prefixes[name.text] = uri.text[1:-1]
                elif kw.text == "shape":
                    close()
                    name = ts.expect_word()
                    if not set(name.text) <= _NAME_CHARS:
                        raise ts.error(f"invalid shape name {name.text!r}", name)
                    if any(s.name == name.text for s in shapes):
                        raise ts.error(f"duplicate shape {name.text!r}", name, code="duplicate-declaration")
                    current = {"name": name.text, "target": None, "objects": [], "data": [], "line": line.number}
                else:
                    raise ts.error(f"expected 'prefix' or 'shape', found {kw.text!r}", kw)
                ts.expect_end()
                continue
            if current is None:
                raise ts.error("constraint outside a shape block", kw)
            ids, num = IdResolver(prefixes, ts), number_fn(ts)
            if kw.text == "target":
                if current["target"] is not None:
                    raise ts.error("duplicate target", kw, code="duplicate-attribute")
                current["target"] = ids(ts.next())
            elif kw.text == "object":
                path, filler = ids(ts.next()), ids(ts.next())
                ts.expect_word("min")
                tok = ts.next()
                if not tok.text.isdigit() or int(tok.text) < 1:
                    raise ts.error(f"expected a positive count, found {tok.text!r}", tok)
                current["objects"].append(ObjectConstraint(path, filler, int(tok.text)))
            elif kw.text == "data":
                prop, dtype = ids(ts.next()), ids(ts.next())
                if dtype not in DATATYPES:
                    raise ts.error(f"unsupported datatype {dtype}", code="invalid-declaration")
                lo, hi = num(ts.next()), num(ts.next())
                if lo > hi:
                    raise ts.error(f"empty range [{format_decimal(lo)}, {format_decimal(hi)}]",
                                   code="invalid-declaration")
                current["data"].append(DataConstraint(prop, lo, hi, dtype))
            else:
                raise ts.error(f"unknown constraint {kw.text!r}", kw)
            ts.expect_end()
        except SyntaxProblem as exc:
            diags.append(exc.diag)
    close()
    if diags:
        raise ParseError(sorted(diags, key=lambda d: (d.line or 0, d.column or 0, d.code)))
    return shapes


def write_shapes(shapes, prefixes: dict[str, str]) -> str:
    lines = [f"prefix {p} <{u}>" for p, u in sorted(prefixes.items())]
    for s in shapes:
        lines += ["", f"shape {s.name}", f"  target {s.target}"]
        lines += [f"  {c}" for c in s.constraints]
    return "\n".join(lines) + "\n"


def read_shapes_file(path) -> list[Shape]:
    p = Path(path)
    return parse_shapes(p.read_text(encoding="utf-8"), str(p))
