"""Flat axiom view of a module.

A module and its axiom set carry the same information; the axiom set is
what template expansion produces and what the equality checks compare.
Each axiom is a kind tag plus positional arguments whose types are fixed
by :data:`SIGNATURES`.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable

from .errors import ModelError, ParseError
from .model import (
    And,
    Annotation,
    ClassAtom,
    CURIE_RE,
    ClassDef,
    Individual,
    Module,
    ModuleKind,
    Or,
    PropertyDef,
    PropertyKind,
    ResourceId,
    SourceRef,
    atom_key,
    format_decimal,
    normalize,
    to_decimal,
)
from .syntax import (
    SyntaxProblem,
    Token,
    TokenStream,
    format_atom,
    format_conjunction,
    is_number,
    parse_expression,
    quote,
    tokenize_line,
)

# argument kinds: id, text, decimal, atom, conjunction, source, slot
SIGNATURES: dict[str, tuple[str, ...]] = {
    "class": ("id",),
    "object-property": ("id",),
    "data-property": ("id",),
    "annotation-property": ("id",),
    "individual": ("id",),
    "label": ("id", "text"),
    "annotation": ("id", "id", "text"),
    "subclass-of": ("id", "id"),
    "equivalent-disjunct": ("id", "conjunction"),
    "equivalent-nothing": ("id",),
    "restriction": ("id", "atom"),
    "disjoint": ("id", "id"),
    "subproperty-of": ("id", "id"),
    "domain": ("id", "id"),
    "range": ("id", "id"),
    "unit": ("id", "text"),
    "type": ("id", "id"),
    "fact": ("id", "id", "id"),
    "value": ("id", "id", "decimal"),
    "source": ("id", "slot", "source"),
}
AXIOM_KINDS = tuple(SIGNATURES)
_KIND_RANK = {k: i for i, k in enumerate(AXIOM_KINDS)}
DECLARATION_KINDS = ("class", "object-property", "data-property", "annotation-property", "individual")
SLOTS = ("class", "equivalence")


@dataclass(frozen=True)
class Axiom:
    kind: str
    args: tuple

    def __post_init__(self) -> None:
        sig = SIGNATURES.get(self.kind)
        if sig is None:
            raise ModelError(f"unknown axiom kind {self.kind!r}")
        args = tuple(self.args)
        if len(args) != len(sig):
            raise ModelError(f"{self.kind} takes {len(sig)} arguments, got {len(args)}")
        object.__setattr__(self, "args", tuple(_check_arg(k, a, self.kind) for k, a in zip(sig, args)))
        if self.kind == "disjoint" and self.args[0] == self.args[1]:
            raise ModelError(f"{self.args[0]} declared disjoint with itself")

    @property
    def subject(self) -> ResourceId:
        return self.args[0]

    def sort_key(self) -> tuple:
        return (_KIND_RANK[self.kind],) + tuple(_arg_key(k, a) for k, a in zip(SIGNATURES[self.kind], self.args))

    def __lt__(self, other: Axiom) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return format_axiom(self)


def _check_arg(kind: str, value, axiom_kind: str):
    ok = {
        "id": lambda v: isinstance(v, ResourceId),
        "text": lambda v: isinstance(v, str),
        "decimal": lambda v: isinstance(v, Decimal),
        "atom": lambda v: not isinstance(v, (And, Or, ClassAtom)) and hasattr(v, "property"),
        "conjunction": lambda v: isinstance(v, tuple),
        "source": lambda v: isinstance(v, SourceRef),
        "slot": lambda v: v in SLOTS,
    }[kind](value)
    if not ok:
        raise ModelError(f"{axiom_kind}: bad {kind} argument {value!r}")
    if kind == "decimal":
        return Decimal(format_decimal(value))
    if kind == "conjunction":
        canon = normalize(And(value)).items
        if len(canon) != 1:
            raise ModelError(f"{axiom_kind}: conjunction is unsatisfiable")
        return canon[0].items
    return value


def _arg_key(kind: str, value) -> tuple:
    if kind == "conjunction":
        return tuple(atom_key(a) for a in value)
    if kind == "atom":
        return atom_key(value)
    if kind == "source":
        return (value.standard_id, value.edition, value.locator)
    if kind == "decimal":
        return (value,)
    return (str(value),)


def format_axiom(ax: Axiom) -> str:
    parts = [ax.kind]
    for kind, value in zip(SIGNATURES[ax.kind], ax.args):
        if kind == "text":
            parts.append(quote(value))
        elif kind == "decimal":
            parts.append(format_decimal(value))
        elif kind == "atom":
            parts.append(format_atom(value))
        elif kind == "conjunction":
            parts.append(format_conjunction(value))
        elif kind == "source":
            parts.extend(quote(x) for x in (value.standard_id, value.edition, value.locator))
        else:
            parts.append(str(value))
    return " ".join(parts)


def sort_axioms(axioms: Iterable[Axiom]) -> list[Axiom]:
    return sorted(set(axioms), key=Axiom.sort_key)


# -- module <-> axioms ----------------------------------------------------------

def _annotation_axioms(subject: ResourceId, annotations, slot: str = "class") -> list[Axiom]:
    out = []
    for a in annotations:
        if isinstance(a, SourceRef):
            out.append(Axiom("source", (subject, slot, a)))
        else:
            out.append(Axiom("annotation", (subject, a.property, a.value)))
    return out


def class_axioms(c: ClassDef) -> list[Axiom]:
    out = [Axiom("class", (c.id,))]
    if c.label:
        out.append(Axiom("label", (c.id, c.label)))
    out += [Axiom("subclass-of", (c.id, s)) for s in c.superclasses]
    if c.equivalent is not None:
        if not c.equivalent.items:
            out.append(Axiom("equivalent-nothing", (c.id,)))
        out += [Axiom("equivalent-disjunct", (c.id, d.items)) for d in c.equivalent.items]
    out += [Axiom("disjoint", (c.id, d)) for d in c.disjoint_with]
    out += [Axiom("restriction", (c.id, r)) for r in c.restrictions]
    out += _annotation_axioms(c.id, c.annotations)
    out += [Axiom("source", (c.id, "equivalence", s)) for s in c.equivalent_sources]
    return out


def property_axioms(p: PropertyDef) -> list[Axiom]:
    out = [Axiom(f"{p.kind.value}-property", (p.id,))]
    if p.label:
        out.append(Axiom("label", (p.id, p.label)))
    out += [Axiom("subproperty-of", (p.id, s)) for s in p.superproperties]
    if p.domain is not None:
        out.append(Axiom("domain", (p.id, p.domain)))
    if p.range is not None:
        out.append(Axiom("range", (p.id, p.range)))
    if p.unit_note is not None:
        out.append(Axiom("unit", (p.id, p.unit_note)))
    out += _annotation_axioms(p.id, p.annotations)
    return out


def individual_axioms(i: Individual) -> list[Axiom]:
    out = [Axiom("individual", (i.id,))]
    if i.label:
        out.append(Axiom("label", (i.id, i.label)))
    out += [Axiom("type", (i.id, t)) for t in i.asserted_types]
    out += [Axiom("fact", (i.id, p, t)) for p, t in i.object_assertions]
    out += [Axiom("value", (i.id, p, v)) for p, v in i.data_assertions]
    out += _annotation_axioms(i.id, i.annotations)
    return out


def module_axioms(module: Module) -> list[Axiom]:
    """Sorted axiom set of a module's declarations (header excluded)."""
    out: list[Axiom] = []
    for c in module.classes:
        out += class_axioms(c)
    for p in module.properties:
        out += property_axioms(p)
    for i in module.individuals:
        out += individual_axioms(i)
    return sort_axioms(out)


def axioms_to_module(axioms: Iterable[Axiom], *, id: ResourceId, kind: ModuleKind | str,
                     imports=(), prefixes=None, version: str = "") -> Module:
    """Rebuild a module from axioms; every subject must have a declaration axiom."""
    decl: dict[ResourceId, str] = {}
    by_subject: dict[ResourceId, list[Axiom]] = defaultdict(list)
    for ax in sort_axioms(axioms):
        if ax.kind in DECLARATION_KINDS:
            if ax.subject in decl and decl[ax.subject] != ax.kind:
                raise ModelError(f"{ax.subject} declared as both {decl[ax.subject]} and {ax.kind}")
            decl[ax.subject] = ax.kind
        else:
            by_subject[ax.subject].append(ax)
    undeclared = sorted(set(by_subject) - set(decl))
    if undeclared:
        raise ModelError(f"axioms about undeclared resource {undeclared[0]}")

    classes, props, inds = [], [], []
    for ident, dkind in decl.items():
        axs = by_subject.get(ident, [])
        if dkind == "class":
            classes.append(_build_class(ident, axs))
        elif dkind == "individual":
            inds.append(_build_individual(ident, axs))
        else:
            props.append(_build_property(ident, PropertyKind(dkind.split("-")[0]), axs))
    return Module(id=id, kind=kind, imports=tuple(imports), prefixes=dict(prefixes or {}),
                  classes=tuple(classes), properties=tuple(props), individuals=tuple(inds), version=version)


def _single(axs: list[Axiom], kind: str, ident: ResourceId):
    found = [a for a in axs if a.kind == kind]
    if len(found) > 1:
        raise ModelError(f"{ident}: more than one {kind} axiom")
    return found[0] if found else None


def _allowed(axs: list[Axiom], ident: ResourceId, allowed: set[str]) -> None:
    for a in axs:
        if a.kind not in allowed:
            raise ModelError(f"{ident}: {a.kind} axiom does not apply to this kind of resource")


def _annotations(axs: list[Axiom], ident: ResourceId, allow_equivalence: bool = False):
    anns, eq_sources = [], []
    for a in axs:
        if a.kind == "annotation":
            anns.append(Annotation(a.args[1], a.args[2]))
        elif a.kind == "source":
            if a.args[1] == "equivalence":
                if not allow_equivalence:
                    raise ModelError(f"{ident}: equivalence source on a resource without definitions")
                eq_sources.append(a.args[2])
            else:
                anns.append(a.args[2])
    return anns, eq_sources


def _label(axs: list[Axiom], ident: ResourceId) -> str:
    lab = _single(axs, "label", ident)
    return lab.args[1] if lab else ""


def _build_class(ident: ResourceId, axs: list[Axiom]) -> ClassDef:
    _allowed(axs, ident, {"label", "annotation", "subclass-of", "equivalent-disjunct", "equivalent-nothing",
                          "restriction", "disjoint", "source"})
    disjuncts = [And(a.args[1]) for a in axs if a.kind == "equivalent-disjunct"]
    nothing = any(a.kind == "equivalent-nothing" for a in axs)
    if nothing and disjuncts:
        raise ModelError(f"{ident}: equivalent-nothing together with equivalent-disjunct")
    equivalent = Or(tuple(disjuncts)) if (disjuncts or nothing) else None
    anns, eq_sources = _annotations(axs, ident, allow_equivalence=True)
    return ClassDef(
        id=ident,
        label=_label(axs, ident),
        superclasses=tuple(a.args[1] for a in axs if a.kind == "subclass-of"),
        equivalent=equivalent,
        disjoint_with=tuple(a.args[1] for a in axs if a.kind == "disjoint"),
        restrictions=tuple(a.args[1] for a in axs if a.kind == "restriction"),
        annotations=tuple(anns),
        equivalent_sources=tuple(eq_sources),
    )


def _build_property(ident: ResourceId, kind: PropertyKind, axs: list[Axiom]) -> PropertyDef:
    _allowed(axs, ident, {"label", "annotation", "subproperty-of", "domain", "range", "unit", "source"})
    anns, _ = _annotations(axs, ident)
    dom = _single(axs, "domain", ident)
    rng = _single(axs, "range", ident)
    unit = _single(axs, "unit", ident)
    return PropertyDef(
        id=ident,
        kind=kind,
        label=_label(axs, ident),
        superproperties=tuple(a.args[1] for a in axs if a.kind == "subproperty-of"),
        domain=dom.args[1] if dom else None,
        range=rng.args[1] if rng else None,
        unit_note=unit.args[1] if unit else None,
        annotations=tuple(anns),
    )


def _build_individual(ident: ResourceId, axs: list[Axiom]) -> Individual:
    _allowed(axs, ident, {"label", "annotation", "type", "fact", "value", "source"})
    anns, _ = _annotations(axs, ident)
    return Individual(
        id=ident,
        label=_label(axs, ident),
        asserted_types=tuple(a.args[1] for a in axs if a.kind == "type"),
        object_assertions=tuple((a.args[1], a.args[2]) for a in axs if a.kind == "fact"),
        data_assertions=tuple((a.args[1], a.args[2]) for a in axs if a.kind == "value"),
        annotations=tuple(anns),
    )


# -- axiom text ------------------------------------------------------------------

def parse_axiom_tokens(ts: TokenStream, id_fn=None, num_fn=None) -> Axiom:
    """Parse ``kind arg...`` from a token stream (the format :func:`format_axiom` writes)."""
    id_fn = id_fn or _curie_fn(ts)
    num_fn = num_fn or _number_fn(ts)
    kind_tok = ts.expect_word()
    sig = SIGNATURES.get(kind_tok.text)
    if sig is None:
        raise ts.error(f"expected an axiom kind ({', '.join(AXIOM_KINDS)}); found {kind_tok.text!r}", kind_tok)
    args = []
    for arg_kind in sig:
        tok = ts.peek()
        if arg_kind == "id":
            args.append(id_fn(ts.next()))
        elif arg_kind == "text":
            args.append(ts.expect_string())
        elif arg_kind == "decimal":
            args.append(num_fn(ts.next()))
        elif arg_kind == "slot":
            args.append(ts.expect_word(*SLOTS).text)
        elif arg_kind == "source":
            std, ed, loc = ts.expect_string(), ts.expect_string(), ts.expect_string()
            try:
                args.append(SourceRef(std, ed, loc))
            except ModelError as exc:
                raise ts.error(str(exc), tok) from None
        else:
            expr = parse_expression(ts, id_fn, num_fn)
            atoms = expr.items if isinstance(expr, And) else (expr,)
            if isinstance(expr, Or) or any(isinstance(a, (And, Or)) for a in atoms):
                raise ts.error(f"{kind_tok.text} takes a plain conjunction of atoms", tok)
            if arg_kind == "atom":
                if len(atoms) != 1 or isinstance(atoms[0], ClassAtom):
                    raise ts.error("expected a single property restriction or data range", tok)
                args.append(atoms[0])
            else:
                args.append(tuple(atoms))
    ts.expect_end()
    try:
        return Axiom(kind_tok.text, tuple(args))
    except ModelError as exc:
        raise ts.error(str(exc), kind_tok) from None


def parse_axiom(text: str, source: str = "<axiom>", lineno: int = 1) -> Axiom:
    try:
        return parse_axiom_tokens(TokenStream(tokenize_line(text, lineno, source), lineno, source, len(text)))
    except SyntaxProblem as exc:
        raise ParseError([exc.diag]) from None


def _curie_fn(ts: TokenStream):
    def fn(tok: Token) -> ResourceId:
        m = CURIE_RE.fullmatch(tok.text) if tok.kind == "word" else None
        if not m:
            raise ts.error(f"expected a prefixed identifier (prefix:local), found {tok.text or 'end of line'!r}", tok)
        return ResourceId(m["ns"], m["local"])
    return fn


def _number_fn(ts: TokenStream):
    def fn(tok: Token) -> Decimal:
        if tok.kind != "word" or not is_number(tok.text):
            raise ts.error(f"expected a number, found {tok.text or 'end of line'!r}", tok)
        return to_decimal(tok.text)
    return fn
