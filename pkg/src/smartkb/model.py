"""Core data model: identifiers, class expressions, declarations and modules.

Every container type canonicalizes itself on construction (sorted,
deduplicated tuples, normalized class expressions), so structural equality
is equality up to declaration order.
"""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import Iterable, Iterator, Union

from .errors import ModelError, NormalizationOverflow

log = logging.getLogger(__name__)

BUILTIN_PREFIXES: dict[str, str] = {
    "owl": "http://www.w3.org/2002/07/owl#",
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
    "xsd": "http://www.w3.org/2001/XMLSchema#",
}

NUMERIC_DATATYPES = frozenset({"decimal", "integer", "double", "float", "nonNegativeInteger"})

PREFIX_RE = re.compile(r"[A-Za-z](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?")
LOCAL_RE = re.compile(r"[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?")
CURIE_RE = re.compile(rf"(?P<ns>{PREFIX_RE.pattern}):(?P<local>{LOCAL_RE.pattern})")


@dataclass(frozen=True, order=True)
class ResourceId:
    """A namespaced identifier written ``prefix:local``."""

    namespace: str
    local: str

    def __post_init__(self) -> None:
        if not isinstance(self.namespace, str) or not PREFIX_RE.fullmatch(self.namespace):
            raise ModelError(f"invalid namespace prefix {self.namespace!r}")
        if not isinstance(self.local, str) or not LOCAL_RE.fullmatch(self.local):
            raise ModelError(f"invalid local name {self.local!r}")
        # ids are hashed constantly by the reasoner; compute once
        object.__setattr__(self, "_hash", hash((self.namespace, self.local)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if other.__class__ is not ResourceId:
            return NotImplemented
        return self._hash == other._hash and self.local == other.local and self.namespace == other.namespace

    def __reduce__(self):
        # string hashes differ between processes, so never pickle the cached one
        return (ResourceId, (self.namespace, self.local))

    @classmethod
    def parse(cls, text: str) -> ResourceId:
        m = CURIE_RE.fullmatch(text.strip())
        if not m:
            raise ModelError(f"not a CURIE: {text!r}")
        return cls(m["ns"], m["local"])

    def __str__(self) -> str:
        return f"{self.namespace}:{self.local}"

    def __repr__(self) -> str:
        return f"RID({self})"


def rid(text: str | ResourceId) -> ResourceId:
    """Coerce ``prefix:local`` text to a :class:`ResourceId`."""
    return text if isinstance(text, ResourceId) else ResourceId.parse(text)


OWL_THING = ResourceId("owl", "Thing")
XSD_DECIMAL = ResourceId("xsd", "decimal")
XSD_STRING = ResourceId("xsd", "string")
RDFS_COMMENT = ResourceId("rdfs", "comment")
RDFS_LABEL = ResourceId("rdfs", "label")


# -- decimals ---------------------------------------------------------------

def to_decimal(value: object) -> Decimal:
    """Exact decimal from int/str/Decimal (floats go through ``repr``)."""
    if isinstance(value, bool):
        raise ModelError("booleans are not numeric values")
    if isinstance(value, float):
        value = repr(value)
    try:
        d = value if isinstance(value, Decimal) else Decimal(str(value).strip())
    except (InvalidOperation, ValueError) as exc:
        raise ModelError(f"not a decimal: {value!r}") from exc
    if not d.is_finite():
        raise ModelError(f"not a finite decimal: {value!r}")
    return d


def format_decimal(d: Decimal) -> str:
    """Canonical text for a decimal: no exponent, no trailing zeros."""
    text = format(to_decimal(d).normalize(), "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


# -- atoms and expressions ---------------------------------------------------

COMPARATORS = ("<=", "<", "=", ">=", ">")
_COMPARATOR_RANK = {c: i for i, c in enumerate(COMPARATORS)}
CARDINALITY_KINDS = ("exactly", "min", "max")


@dataclass(frozen=True)
class ClassAtom:
    cls: ResourceId

    def __str__(self) -> str:
        return str(self.cls)


@dataclass(frozen=True)
class DataRangeAtom:
    property: ResourceId
    comparator: str
    value: Decimal

    def __post_init__(self) -> None:
        if self.comparator not in _COMPARATOR_RANK:
            raise ModelError(f"unknown comparator {self.comparator!r}")
        object.__setattr__(self, "value", Decimal(format_decimal(to_decimal(self.value))))

    def holds(self, v: Decimal) -> bool:
        c, b = self.comparator, self.value
        if c == "<=":
            return v <= b
        if c == "<":
            return v < b
        if c == ">=":
            return v >= b
        if c == ">":
            return v > b
        return v == b

    def __str__(self) -> str:
        return f"[{self.property} {self.comparator} {format_decimal(self.value)}]"


@dataclass(frozen=True)
class UniversalRestriction:
    property: ResourceId
    filler: ResourceId

    def __str__(self) -> str:
        return f"{self.property} only {self.filler}"


@dataclass(frozen=True)
class CardinalityRestriction:
    property: ResourceId
    kind: str
    n: int
    filler: ResourceId | None = None

    def __post_init__(self) -> None:
        if self.kind not in CARDINALITY_KINDS:
            raise ModelError(f"unknown cardinality kind {self.kind!r}")
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 0:
            raise ModelError(f"cardinality must be a non-negative integer, got {self.n!r}")

    def accepts(self, count: int) -> bool:
        if self.kind == "exactly":
            return count == self.n
        if self.kind == "min":
            return count >= self.n
        return count <= self.n

    def __str__(self) -> str:
        tail = f" {self.filler}" if self.filler is not None else ""
        return f"{self.property} {self.kind} {self.n}{tail}"


Atom = Union[ClassAtom, DataRangeAtom, UniversalRestriction, CardinalityRestriction]
ATOM_TYPES = (ClassAtom, DataRangeAtom, UniversalRestriction, CardinalityRestriction)


@dataclass(frozen=True)
class And:
    items: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))


@dataclass(frozen=True)
class Or:
    items: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))


ClassExpression = Union[Atom, And, Or]

_EMPTY = ""
_ZERO = Decimal(0)


def atom_key(atom: Atom) -> tuple:
    """Total order on atoms: (kind, property, comparator, value, filler, ...)."""
    if isinstance(atom, ClassAtom):
        return (0, _EMPTY, 0, _ZERO, str(atom.cls), 0, 0)
    if isinstance(atom, DataRangeAtom):
        return (1, str(atom.property), _COMPARATOR_RANK[atom.comparator], atom.value, _EMPTY, 0, 0)
    if isinstance(atom, UniversalRestriction):
        return (2, str(atom.property), 0, _ZERO, str(atom.filler), 0, 0)
    if isinstance(atom, CardinalityRestriction):
        filler = str(atom.filler) if atom.filler is not None else _EMPTY
        return (3, str(atom.property), 0, _ZERO, filler, CARDINALITY_KINDS.index(atom.kind), atom.n)
    raise ModelError(f"not an atom: {atom!r}")


def disjunct_key(conj: And) -> tuple:
    return tuple(atom_key(a) for a in conj.items)


def iter_atoms(expr: ClassExpression) -> Iterator[Atom]:
    if isinstance(expr, (And, Or)):
        for item in expr.items:
            yield from iter_atoms(item)
    else:
        yield expr


MAX_DEPTH = 64
MAX_DISJUNCTS = 4096


def _dnf(expr: ClassExpression, depth: int, limit: int) -> list[tuple]:
    if depth > MAX_DEPTH:
        raise NormalizationOverflow(f"expression deeper than {MAX_DEPTH}")
    if isinstance(expr, ATOM_TYPES):
        return [(expr,)]
    if isinstance(expr, Or):
        out: list[tuple] = []
        for item in expr.items:
            out.extend(_dnf(item, depth + 1, limit))
            if len(out) > limit:
                raise NormalizationOverflow(f"more than {limit} disjuncts")
        return out
    if isinstance(expr, And):
        acc: list[tuple] = [()]
        for item in expr.items:
            sub = _dnf(item, depth + 1, limit)
            if len(acc) * len(sub) > limit:
                raise NormalizationOverflow(f"more than {limit} disjuncts")
            acc = [a + b for a in acc for b in sub]
        return acc
    raise ModelError(f"not a class expression: {expr!r}")


@dataclass
class Interval:
    """A (possibly unbounded) numeric interval used to merge comparator atoms."""

    lo: Decimal | None = None
    lo_closed: bool = True
    hi: Decimal | None = None
    hi_closed: bool = True

    def add(self, atom: DataRangeAtom) -> None:
        c, v = atom.comparator, atom.value
        if c in ("<=", "<", "="):
            closed = c != "<"
            if self.hi is None or v < self.hi or (v == self.hi and not closed):
                self.hi, self.hi_closed = v, closed
        if c in (">=", ">", "="):
            closed = c != ">"
            if self.lo is None or v > self.lo or (v == self.lo and not closed):
                self.lo, self.lo_closed = v, closed

    @property
    def empty(self) -> bool:
        if self.lo is None or self.hi is None:
            return False
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def contains_interval(self, other: Interval) -> bool:
        """True when every point of ``other`` lies in ``self``."""
        if other.empty:
            return True
        if self.lo is not None:
            if other.lo is None or other.lo < self.lo:
                return False
            if other.lo == self.lo and other.lo_closed and not self.lo_closed:
                return False
        if self.hi is not None:
            if other.hi is None or other.hi > self.hi:
                return False
            if other.hi == self.hi and other.hi_closed and not self.hi_closed:
                return False
        return True

    def contains(self, v: Decimal) -> bool:
        if self.lo is not None and (v < self.lo or (v == self.lo and not self.lo_closed)):
            return False
        if self.hi is not None and (v > self.hi or (v == self.hi and not self.hi_closed)):
            return False
        return True

    def atoms(self, prop: ResourceId) -> list[DataRangeAtom]:
        if self.lo is not None and self.lo == self.hi:
            return [DataRangeAtom(prop, "=", self.lo)]
        out = []
        if self.lo is not None:
            out.append(DataRangeAtom(prop, ">=" if self.lo_closed else ">", self.lo))
        if self.hi is not None:
            out.append(DataRangeAtom(prop, "<=" if self.hi_closed else "<", self.hi))
        return out

    @classmethod
    def of(cls, atoms: Iterable[DataRangeAtom]) -> Interval:
        iv = cls()
        for a in atoms:
            iv.add(a)
        return iv


def _canonical_conjunction(atoms: tuple) -> And | None:
    ranges: dict[ResourceId, Interval] = {}
    rest = set()
    for a in atoms:
        if isinstance(a, DataRangeAtom):
            ranges.setdefault(a.property, Interval()).add(a)
        else:
            rest.add(a)
    for prop, iv in ranges.items():
        if iv.empty:
            log.warning("dropping unsatisfiable conjunct: empty range on %s", prop)
            return None
        rest.update(iv.atoms(prop))
    return And(tuple(sorted(rest, key=atom_key)))


def normalize(expr: ClassExpression, *, max_disjuncts: int = MAX_DISJUNCTS) -> Or:
    """Canonical DNF: a sorted, duplicate-free disjunction of sorted conjunctions.

    Comparator atoms on one property inside a conjunction are merged by
    interval intersection; conjunctions with an empty range are dropped.
    The result is idempotent under ``normalize``.
    """
    seen = {}
    for conj in _dnf(expr, 0, max_disjuncts):
        canon = _canonical_conjunction(conj)
        if canon is not None:
            seen[canon] = None
    return Or(tuple(sorted(seen, key=disjunct_key)))


def is_dnf(expr: ClassExpression) -> bool:
    return isinstance(expr, Or) and all(
        isinstance(c, And) and all(isinstance(a, ATOM_TYPES) for a in c.items) for c in expr.items
    )


def conj(*items: ClassExpression) -> And:
    return And(items)


def disj(*items: ClassExpression) -> Or:
    return Or(items)


# -- annotations --------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Annotation:
    property: ResourceId
    value: str

    def __post_init__(self) -> None:
        if not isinstance(self.value, str):
            raise ModelError("annotation values are strings")


@dataclass(frozen=True, order=True)
class SourceRef:
    """Provenance: which edition of which standard, and where in it."""

    standard_id: str
    edition: str
    locator: str

    def __post_init__(self) -> None:
        for name in ("standard_id", "edition", "locator"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                raise ModelError(f"SourceRef.{name} must be a non-empty string")

    def __str__(self) -> str:
        return f"{self.standard_id} ({self.edition}) {self.locator}"


AnyAnnotation = Union[Annotation, SourceRef]


def _annotation_key(a: AnyAnnotation) -> tuple:
    if isinstance(a, SourceRef):
        return (1, a.standard_id, a.edition, a.locator)
    return (0, str(a.property), a.value, "")


def _sorted_unique(items: Iterable, key=None) -> tuple:
    return tuple(sorted(set(items), key=key))


def source_refs(annotations: Iterable[AnyAnnotation]) -> tuple[SourceRef, ...]:
    return tuple(a for a in annotations if isinstance(a, SourceRef))


# -- declarations ---------------------------------------------------------------

@dataclass(frozen=True)
class ClassDef:
    id: ResourceId
    label: str = ""
    superclasses: tuple[ResourceId, ...] = ()
    equivalent: Or | None = None
    disjoint_with: tuple[ResourceId, ...] = ()
    restrictions: tuple[Atom, ...] = ()
    annotations: tuple[AnyAnnotation, ...] = ()
    equivalent_sources: tuple[SourceRef, ...] = ()

    def __post_init__(self) -> None:
        s = object.__setattr__
        s(self, "superclasses", _sorted_unique(self.superclasses))
        s(self, "disjoint_with", _sorted_unique(self.disjoint_with))
        if self.equivalent is not None:
            s(self, "equivalent", normalize(self.equivalent))
        for r in self.restrictions:
            if isinstance(r, ClassAtom) or not isinstance(r, ATOM_TYPES):
                raise ModelError(f"{self.id}: restrictions must be property restrictions, got {r!r}")
        s(self, "restrictions", _sorted_unique(self.restrictions, key=atom_key))
        s(self, "annotations", _sorted_unique(self.annotations, key=_annotation_key))
        s(self, "equivalent_sources", _sorted_unique(self.equivalent_sources))
        if self.id in self.disjoint_with:
            raise ModelError(f"{self.id} declared disjoint with itself")

    @property
    def sources(self) -> tuple[SourceRef, ...]:
        return source_refs(self.annotations)

    @property
    def comments(self) -> tuple[str, ...]:
        return tuple(a.value for a in self.annotations if isinstance(a, Annotation) and a.property == RDFS_COMMENT)

    def references(self) -> Iterator[ResourceId]:
        yield from self.superclasses
        yield from self.disjoint_with
        for expr in ([self.equivalent] if self.equivalent is not None else []) + list(self.restrictions):
            for atom in iter_atoms(expr):
                yield from atom_references(atom)
        for a in self.annotations:
            if isinstance(a, Annotation):
                yield a.property


def atom_references(atom: Atom) -> Iterator[ResourceId]:
    if isinstance(atom, ClassAtom):
        yield atom.cls
    else:
        yield atom.property
        filler = getattr(atom, "filler", None)
        if filler is not None:
            yield filler


class PropertyKind(str, Enum):
    OBJECT = "object"
    DATA = "data"
    ANNOTATION = "annotation"


_PROPERTY_KIND_RANK = {PropertyKind.OBJECT: 0, PropertyKind.DATA: 1, PropertyKind.ANNOTATION: 2}


@dataclass(frozen=True)
class PropertyDef:
    id: ResourceId
    kind: PropertyKind
    label: str = ""
    superproperties: tuple[ResourceId, ...] = ()
    domain: ResourceId | None = None
    range: ResourceId | None = None
    unit_note: str | None = None
    annotations: tuple[AnyAnnotation, ...] = ()

    def __post_init__(self) -> None:
        s = object.__setattr__
        s(self, "kind", PropertyKind(self.kind))
        s(self, "superproperties", _sorted_unique(self.superproperties))
        s(self, "annotations", _sorted_unique(self.annotations, key=_annotation_key))
        if self.kind is PropertyKind.DATA:
            if self.range is None:
                s(self, "range", XSD_DECIMAL)
            if self.range.namespace != "xsd" or self.range.local not in NUMERIC_DATATYPES:
                raise ModelError(f"data property {self.id} needs a numeric datatype range, got {self.range}")
        elif self.kind is PropertyKind.OBJECT and self.range is not None and self.range.namespace == "xsd":
            raise ModelError(f"object property {self.id} needs a class range, got {self.range}")

    @property
    def sources(self) -> tuple[SourceRef, ...]:
        return source_refs(self.annotations)

    def references(self) -> Iterator[ResourceId]:
        yield from self.superproperties
        if self.domain is not None:
            yield self.domain
        if self.range is not None:
            yield self.range


@dataclass(frozen=True)
class Individual:
    id: ResourceId
    asserted_types: tuple[ResourceId, ...] = ()
    object_assertions: tuple[tuple[ResourceId, ResourceId], ...] = ()
    data_assertions: tuple[tuple[ResourceId, Decimal], ...] = ()
    annotations: tuple[AnyAnnotation, ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        s = object.__setattr__
        s(self, "asserted_types", _sorted_unique(self.asserted_types))
        s(self, "object_assertions", _sorted_unique((p, t) for p, t in self.object_assertions))
        data = _sorted_unique((p, to_decimal(v)) for p, v in self.data_assertions)
        props = [p for p, _ in data]
        if len(props) != len(set(props)):
            dup = sorted({p for p in props if props.count(p) > 1})[0]
            raise ModelError(f"{self.id}: data property {dup} has more than one value (data properties are functional)")
        s(self, "data_assertions", data)
        s(self, "annotations", _sorted_unique(self.annotations, key=_annotation_key))

    def values(self, prop: ResourceId) -> list[Decimal]:
        return [v for p, v in self.data_assertions if p == prop]

    def targets(self, prop: ResourceId) -> list[ResourceId]:
        return [t for p, t in self.object_assertions if p == prop]

    @property
    def sources(self) -> tuple[SourceRef, ...]:
        return source_refs(self.annotations)

    def references(self) -> Iterator[ResourceId]:
        yield from self.asserted_types
        for p, t in self.object_assertions:
            yield p
            yield t
        for p, _ in self.data_assertions:
            yield p
        for a in self.annotations:
            if isinstance(a, Annotation):
                yield a.property


class ModuleKind(str, Enum):
    TOP_LEVEL = "top-level"
    DOMAIN_INDEPENDENT = "domain-independent"
    DOMAIN = "domain"
    STANDARD = "standard"
    COLLECT = "collect"
    COMPANY = "company"
    ASSET = "asset"

    @property
    def layer(self) -> int:
        """Pyramid height; a module may import only modules of equal or higher layer."""
        return _LAYER[self]


_LAYER = {
    ModuleKind.TOP_LEVEL: 6,
    ModuleKind.DOMAIN_INDEPENDENT: 5,
    ModuleKind.DOMAIN: 4,
    ModuleKind.STANDARD: 3,
    ModuleKind.COLLECT: 3,
    ModuleKind.COMPANY: 2,
    ModuleKind.ASSET: 1,
}


@dataclass(frozen=True)
class Module:
    id: ResourceId
    kind: ModuleKind
    imports: tuple[ResourceId, ...] = ()
    prefixes: dict[str, str] = field(default_factory=dict)
    classes: tuple[ClassDef, ...] = ()
    properties: tuple[PropertyDef, ...] = ()
    individuals: tuple[Individual, ...] = ()
    version: str = ""

    def __post_init__(self) -> None:
        s = object.__setattr__
        s(self, "kind", ModuleKind(self.kind))
        s(self, "imports", _sorted_unique(self.imports))
        s(self, "prefixes", dict(sorted(self.prefixes.items())))
        for name, key in (("classes", lambda c: c.id),
                          ("properties", lambda p: (_PROPERTY_KIND_RANK[p.kind], p.id)),
                          ("individuals", lambda i: i.id)):
            items = tuple(sorted(getattr(self, name), key=key))
            s(self, name, items)
        self._validate()

    def _validate(self) -> None:
        for prefix, base in self.prefixes.items():
            if not PREFIX_RE.fullmatch(prefix):
                raise ModelError(f"invalid prefix name {prefix!r}")
            if prefix in BUILTIN_PREFIXES and BUILTIN_PREFIXES[prefix] != base:
                raise ModelError(f"built-in prefix {prefix!r} cannot be rebound")
            if not base or any(ch.isspace() for ch in base) or any(ch in base for ch in '<>"{}|^`\\'):
                raise ModelError(f"invalid base URI for prefix {prefix!r}: {base!r}")
        seen: set[ResourceId] = set()
        for decl in itertools.chain(self.classes, self.properties, self.individuals):
            if decl.id in seen:
                raise ModelError(f"{self.id}: duplicate declaration of {decl.id}")
            seen.add(decl.id)
        for ident in self.all_references():
            if not self.resolves(ident):
                raise ModelError(f"{self.id}: unknown prefix {ident.namespace!r} in {ident}")

    def resolves(self, ident: ResourceId) -> bool:
        return ident.namespace in self.prefixes or ident.namespace in BUILTIN_PREFIXES

    def expand(self, ident: ResourceId) -> str:
        base = self.prefixes.get(ident.namespace) or BUILTIN_PREFIXES.get(ident.namespace)
        if base is None:
            raise ModelError(f"unknown prefix {ident.namespace!r}")
        return base + ident.local

    def declared_ids(self) -> Iterator[ResourceId]:
        for decl in itertools.chain(self.classes, self.properties, self.individuals):
            yield decl.id

    def all_references(self) -> Iterator[ResourceId]:
        yield self.id
        yield from self.imports
        for decl in itertools.chain(self.classes, self.properties, self.individuals):
            yield decl.id
            yield from decl.references()

    @property
    def is_empty(self) -> bool:
        return not (self.classes or self.properties or self.individuals)

    def replace(self, **changes) -> Module:
        from dataclasses import replace
        return replace(self, **changes)


def merge_modules(base: Module, *others: Module, **header) -> Module:
    """Union the declarations of several modules under ``base``'s header.

    Declarations with the same id must be identical.
    """
    classes = {c.id: c for c in base.classes}
    props = {p.id: p for p in base.properties}
    inds = {i.id: i for i in base.individuals}
    prefixes = dict(base.prefixes)
    imports = set(base.imports)
    for other in others:
        for table, items in ((classes, other.classes), (props, other.properties), (inds, other.individuals)):
            for item in items:
                if item.id in table and table[item.id] != item:
                    raise ModelError(f"conflicting declarations of {item.id}")
                table[item.id] = item
        prefixes.update(other.prefixes)
        imports.update(other.imports)
    imports.discard(header.get("id", base.id))
    fields = dict(id=base.id, kind=base.kind, imports=tuple(imports), prefixes=prefixes,
                  classes=tuple(classes.values()), properties=tuple(props.values()),
                  individuals=tuple(inds.values()), version=base.version)
    fields.update(header)
    return Module(**fields)
