"""Canonical Turtle (OWL 2 RDF mapping) export of one module.

Output is deterministic: prefixes sorted, subjects sorted, predicates in a
fixed order, class expressions written as nested blank nodes.
"""

from __future__ import annotations

from .kb import KnowledgeBase
from .model import (
    BUILTIN_PREFIXES,
    CardinalityRestriction,
    ClassAtom,
    DataRangeAtom,
    Module,
    Or,
    PropertyKind,
    ResourceId,
    SourceRef,
    UniversalRestriction,
    format_decimal,
)
from . import vocab

EQUIVALENCE_SOURCE = ResourceId("smk", "equivalenceDefinedInEditionOfSpecification")
_FACETS = {"<=": "xsd:maxInclusive", "<": "xsd:maxExclusive", ">=": "xsd:minInclusive", ">": "xsd:minExclusive"}
_CARD = {"exactly": "qualifiedCardinality", "min": "minQualifiedCardinality", "max": "maxQualifiedCardinality"}
_CARD_PLAIN = {"exactly": "cardinality", "min": "minCardinality", "max": "maxCardinality"}
_PROPERTY_TYPES = {PropertyKind.OBJECT: "owl:ObjectProperty", PropertyKind.DATA: "owl:DatatypeProperty",
                   PropertyKind.ANNOTATION: "owl:AnnotationProperty"}


def literal(text: str) -> str:
    out = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\r", "\\r")
    return f'"{out}"'


def decimal_literal(value) -> str:
    return f'"{format_decimal(value)}"^^xsd:decimal'


def source_literal(ref: SourceRef) -> str:
    return literal(f"{ref.standard_id} {ref.edition} {ref.locator}")


def _term(ident: ResourceId) -> str:
    return str(ident)


def _atom(atom, pad: str) -> str:
    inner = pad + "    "
    if isinstance(atom, ClassAtom):
        return _term(atom.cls)
    if isinstance(atom, DataRangeAtom):
        head = f"[ a owl:Restriction ;\n{inner}owl:onProperty {_term(atom.property)} ;\n{inner}"
        if atom.comparator == "=":
            return head + f"owl:hasValue {decimal_literal(atom.value)} ]"
        rng = (f"[ a rdfs:Datatype ; owl:onDatatype xsd:decimal ; owl:withRestrictions "
               f"( [ {_FACETS[atom.comparator]} {decimal_literal(atom.value)} ] ) ]")
        return head + f"owl:someValuesFrom {rng} ]"
    if isinstance(atom, UniversalRestriction):
        return (f"[ a owl:Restriction ;\n{inner}owl:onProperty {_term(atom.property)} ;\n"
                f"{inner}owl:allValuesFrom {_term(atom.filler)} ]")
    if isinstance(atom, CardinalityRestriction):
        n = f'"{atom.n}"^^xsd:nonNegativeInteger'
        head = f"[ a owl:Restriction ;\n{inner}owl:onProperty {_term(atom.property)} ;\n{inner}"
        if atom.filler is None:
            return head + f"owl:{_CARD_PLAIN[atom.kind]} {n} ]"
        return head + f"owl:{_CARD[atom.kind]} {n} ;\n{inner}owl:onClass {_term(atom.filler)} ]"
    raise TypeError(f"not an atom: {atom!r}")


def class_expression(dnf: Or, pad: str = "    ") -> str:
    """Turtle for a DNF expression; the empty disjunction is ``owl:Nothing``."""
    if not dnf.items:
        return "owl:Nothing"

    def conj(c, p):
        if len(c.items) == 1:
            return _atom(c.items[0], p)
        parts = " ".join(_atom(a, p + "    ") for a in c.items)
        return f"[ a owl:Class ; owl:intersectionOf ( {parts} ) ]"

    if len(dnf.items) == 1:
        return conj(dnf.items[0], pad)
    parts = " ".join(conj(c, pad + "    ") for c in dnf.items)
    return f"[ a owl:Class ; owl:unionOf ( {parts} ) ]"


def _block(subject: ResourceId, pairs: list[tuple[str, str]]) -> str:
    body = " ;\n    ".join(f"{p} {o}" for p, o in pairs)
    return f"{_term(subject)} {body} ."


def export_turtle(module: Module | KnowledgeBase, module_id: ResourceId | None = None) -> str:
    """Serialize ``module`` (or ``kb.modules[module_id]``) as Turtle."""
    if isinstance(module, KnowledgeBase):
        module = module.module(module_id)
    prefixes = dict(BUILTIN_PREFIXES)
    prefixes.update(module.prefixes)
    prefixes.setdefault("smk", vocab.NAMESPACES["smk"])
    lines = [f"@prefix {p}: <{u}> ." for p, u in sorted(prefixes.items())]
    lines.append("")
    onto = [("a", "owl:Ontology")]
    onto += [("owl:imports", f"<{_import_uri(module, i)}>") for i in module.imports]
    if module.version:
        onto.append(("owl:versionInfo", literal(module.version)))
    onto.append(("rdfs:comment", literal(f"module kind: {module.kind.value}")))
    lines += [f"<{_module_uri(module)}> " + " ;\n    ".join(f"{p} {o}" for p, o in onto) + " .", ""]

    uses_smk = False
    for c in module.classes:
        pairs = [("a", "owl:Class")]
        if c.label:
            pairs.append(("rdfs:label", literal(c.label)))
        pairs += [("rdfs:subClassOf", _term(s)) for s in c.superclasses]
        pairs += [("rdfs:subClassOf", _atom(r, "    ")) for r in c.restrictions]
        if c.equivalent is not None:
            pairs.append(("owl:equivalentClass", class_expression(c.equivalent)))
        pairs += [("owl:disjointWith", _term(d)) for d in c.disjoint_with]
        pairs += _annotation_pairs(c.annotations)
        for ref in c.equivalent_sources:
            pairs.append((_term(EQUIVALENCE_SOURCE), source_literal(ref)))
        uses_smk |= bool(c.sources or c.equivalent_sources)
        lines += [_block(c.id, pairs), ""]
    for p in module.properties:
        pairs = [("a", _PROPERTY_TYPES[p.kind])]
        if p.label:
            pairs.append(("rdfs:label", literal(p.label)))
        pairs += [("rdfs:subPropertyOf", _term(s)) for s in p.superproperties]
        if p.domain is not None:
            pairs.append(("rdfs:domain", _term(p.domain)))
        if p.range is not None:
            pairs.append(("rdfs:range", _term(p.range)))
        if p.unit_note:
            pairs.append(("rdfs:comment", literal(f"unit: {p.unit_note}")))
        pairs += _annotation_pairs(p.annotations)
        uses_smk |= bool(p.sources)
        lines += [_block(p.id, pairs), ""]
    for i in module.individuals:
        pairs = [("a", "owl:NamedIndividual")] + [("a", _term(t)) for t in i.asserted_types]
        if i.label:
            pairs.append(("rdfs:label", literal(i.label)))
        pairs += [(_term(p), _term(t)) for p, t in i.object_assertions]
        pairs += [(_term(p), decimal_literal(v)) for p, v in i.data_assertions]
        pairs += _annotation_pairs(i.annotations)
        uses_smk |= bool(i.sources)
        lines += [_block(i.id, pairs), ""]
    if uses_smk:
        for prop in (vocab.DEFINED_IN_EDITION, EQUIVALENCE_SOURCE):
            lines += [_block(prop, [("a", "owl:AnnotationProperty")]), ""]
    return "\n".join(lines).rstrip("\n") + "\n"


def _annotation_pairs(annotations) -> list[tuple[str, str]]:
    out = []
    for a in annotations:
        if isinstance(a, SourceRef):
            out.append((_term(vocab.DEFINED_IN_EDITION), source_literal(a)))
        else:
            out.append((_term(a.property), literal(a.value)))
    return out


def _module_uri(module: Module) -> str:
    return module.expand(module.id)


def _import_uri(module: Module, ident: ResourceId) -> str:
    if module.resolves(ident):
        return module.expand(ident)
    return vocab.NAMESPACES.get(ident.namespace, vocab.BASE) + ident.local
