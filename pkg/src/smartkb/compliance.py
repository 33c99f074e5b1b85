"""Competency checks: does a VDS fit a line location, does a product meet a VDS.

Both checks return a :class:`ComplianceReport` whose verdict is one of
``Compliant``, ``NonCompliant`` or ``Incomplete``. Missing data gives
``Incomplete``; only a demonstrated conflict gives ``NonCompliant``.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import Decimal
from enum import Enum
from typing import Iterable, Sequence

from . import vocab
from .errors import UnknownResourceError
from .kb import KnowledgeBase
from .model import (
    And,
    ClassAtom,
    DataRangeAtom,
    Individual,
    Or,
    ResourceId,
    SourceRef,
    UniversalRestriction,
    format_decimal,
)
from .reasoner import (
    Clash,
    Explanation,
    Reasoner,
    index,
    individual_clashes,
    missing_assertions,
    subsumes,
    unfold,
)
from .syntax import format_atom

# Asserted location types under these roots are functional requirements the VDS must meet.
FUNCTIONAL_ROOTS = (vocab.VALVE, vocab.NOMINAL_SIZE_OBJECT, vocab.PRESSURE_RATED_OBJECT)
REPORT_SCHEMA_VERSION = 1


class Outcome(str, Enum):
    COMPLIANT = "Compliant"
    NON_COMPLIANT = "NonCompliant"
    INCOMPLETE = "Incomplete"


@dataclass(frozen=True)
class Finding:
    severity: str  # info | warning | error
    message: str
    sources: tuple[SourceRef, ...] = ()


@dataclass(frozen=True)
class FailingAtom:
    """An atom the subject does not satisfy, with the bound and what was asserted."""

    atom: str
    asserted: str
    bound: str | None = None
    via: ResourceId | None = None
    disjunct: str | None = None


@dataclass(frozen=True)
class ComplianceReport:
    check: str
    verdict: Outcome
    subject: ResourceId
    target: ResourceId
    explanations: tuple[Explanation, ...] = ()
    findings: tuple[Finding, ...] = ()
    failing: tuple[FailingAtom, ...] = ()
    clashes: tuple[Clash, ...] = ()
    missing: tuple[str, ...] = ()
    # hypothetical individuals the explanations were derived against
    overlay: tuple[Individual, ...] = field(default=(), compare=False)

    def to_dict(self, kb: KnowledgeBase | None = None) -> dict:
        def ref(r: SourceRef) -> dict:
            return {"standard": r.standard_id, "edition": r.edition, "locator": r.locator}
        return {
            "schema": REPORT_SCHEMA_VERSION,
            "check": self.check,
            "verdict": self.verdict.value,
            "subject": str(self.subject),
            "target": str(self.target),
            "failing_atoms": [{"atom": f.atom, "asserted": f.asserted, "bound": f.bound,
                               "via": None if f.via is None else str(f.via), "disjunct": f.disjunct}
                              for f in self.failing],
            "clashes": [{"kind": c.kind, "individual": str(c.individual), "classes": [str(x) for x in c.classes],
                         "detail": c.detail} for c in self.clashes],
            "missing": list(self.missing),
            "findings": [{"severity": f.severity, "message": f.message, "sources": [ref(r) for r in f.sources]}
                         for f in self.findings],
            "explanations": [explanation_dict(e, kb) for e in self.explanations],
        }

    def to_json(self, kb: KnowledgeBase | None = None) -> str:
        return json.dumps(self.to_dict(kb), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def render_text(self, kb: KnowledgeBase | None = None) -> str:
        lines = [f"{self.check}: {self.subject} against {self.target}: {self.verdict.value}"]
        for f in self.failing:
            where = f" via {f.via}" if f.via is not None else ""
            bound = f" (bound {f.bound})" if f.bound is not None else ""
            lines.append(f"  failing: {f.atom}{where}{bound}: asserted {f.asserted}")
            if f.disjunct:
                lines.append(f"    in disjunct: {f.disjunct}")
        for c in self.clashes:
            lines.append(f"  clash: {c}")
        for m in self.missing:
            lines.append(f"  missing: {m}")
        for f in self.findings:
            lines.append(f"  {f.severity}: {f.message}")
            for r in f.sources:
                lines.append(f"    source: {r.standard_id} ({r.edition}) {r.locator}")
        for e in self.explanations:
            lines.append("  explanation:")
            lines.append(e.render(kb, indent=2))
        return "\n".join(lines) + "\n"

    @property
    def exit_code(self) -> int:
        return {Outcome.COMPLIANT: 0, Outcome.NON_COMPLIANT: 1, Outcome.INCOMPLETE: 2}[self.verdict]


def explanation_dict(e: Explanation, kb: KnowledgeBase | None = None) -> dict:
    out: dict = {"kind": e.kind, "individual": str(e.individual), "holds": e.holds}
    if e.cls is not None:
        out["class"] = str(e.cls)
        if kb is not None:
            out["label"] = kb.label(e.cls)
    if e.via is not None:
        out["via"] = str(e.via)
    if e.atom is not None:
        out["atom"] = format_atom(e.atom)
    if e.kind == "data":
        out["value"] = None if e.value is None else format_decimal(e.value)
    if e.targets:
        out["targets"] = [str(t) for t in e.targets]
    if e.pair is not None:
        out["pair"] = [str(p) for p in e.pair]
    if e.children:
        out["children"] = [explanation_dict(c, kb) for c in e.children]
    return out


# -- helpers -----------------------------------------------------------------------

def _resolve_individual(kb: KnowledgeBase, ind: Individual | ResourceId) -> Individual:
    if isinstance(ind, Individual):
        return ind
    return kb.individual(ind)


def _require_class(kb: KnowledgeBase, cls: ResourceId) -> None:
    if cls not in kb.classes:
        raise UnknownResourceError("class", cls)


def _single_disjunct(kb: KnowledgeBase, cls: ResourceId) -> tuple:
    cd = kb.classes[cls]
    if cd.equivalent is not None and len(cd.equivalent.items) == 1:
        return cd.equivalent.items[0].items
    return ()


def _has_data_atoms(kb: KnowledgeBase, cls: ResourceId) -> bool:
    cd = kb.classes.get(cls)
    if cd is None or cd.equivalent is None:
        return False
    return any(isinstance(a, DataRangeAtom) for conj in unfold(kb, cd.equivalent).items for a in conj.items)


def _data_atoms(kb: KnowledgeBase, atom) -> list[DataRangeAtom]:
    """Data atoms a single conjunct atom stands for (through one-disjunct definitions)."""
    if isinstance(atom, DataRangeAtom):
        return [atom]
    if isinstance(atom, ClassAtom):
        dnf = unfold(kb, atom)
        if len(dnf.items) == 1:
            return [a for a in dnf.items[0].items if isinstance(a, DataRangeAtom)]
    return []


def _describe_conj(kb: KnowledgeBase, conj: And) -> str:
    return " and ".join(kb.label(a.cls) if isinstance(a, ClassAtom) else format_atom(a) for a in conj.items)


def _upper_key(kb: KnowledgeBase, prop: ResourceId):
    """Sort key for disjuncts: the smallest upper bound on ``prop`` (governing row first)."""
    def key(conj: And):
        bounds = [d.value for a in conj.items for d in _data_atoms(kb, a)
                  if d.property == prop and d.comparator in ("<=", "<")]
        return (min(bounds) if bounds else Decimal("Infinity"),)
    return key


def _pt_failures(kb: KnowledgeBase, r: Reasoner, ident: ResourceId, cls: ResourceId) -> list[FailingAtom]:
    """Failing atoms of a data-bearing definition.

    When a value exceeds every upper bound on its property, the loosest
    such atom is reported; otherwise the disjunct(s) with the fewest
    failing atoms, first in canonical order.
    """
    dnf: Or = kb.classes[cls].equivalent
    data = r.facts(ident).data
    rows = []  # (conj, [(named, DataRangeAtom)])
    for conj in dnf.items:
        atoms = []
        for a in conj.items:
            for d in _data_atoms(kb, a):
                atoms.append((a.cls if isinstance(a, ClassAtom) else None, d))
        rows.append((conj, atoms))

    def fails(d: DataRangeAtom) -> bool:
        v = data.get(d.property)
        return v is None or not d.holds(v)

    def record(named, d, conj) -> FailingAtom:
        v = data.get(d.property)
        return FailingAtom(kb.label(named) if named is not None else format_atom(d),
                           "no value" if v is None else format_decimal(v), format_decimal(d.value),
                           named, _describe_conj(kb, conj))

    out = []
    props = sorted({d.property for _, atoms in rows for _, d in atoms})
    for prop in props:
        uppers = [(named, d, conj) for conj, atoms in rows for named, d in atoms
                  if d.property == prop and d.comparator in ("<=", "<")]
        if prop in data and uppers and all(fails(d) for _, d, _ in uppers):
            loosest = max(uppers, key=lambda x: (x[1].value, x[1].comparator == "<="))
            out.append(record(*loosest))
    if out:
        return out
    counted = [(sum(1 for _, d in atoms if fails(d)), i) for i, (_, atoms) in enumerate(rows)]
    if not counted:
        return []
    fewest = min(c for c, _ in counted)
    conj, atoms = rows[min(i for c, i in counted if c == fewest)]
    return [record(named, d, conj) for named, d in atoms if fails(d)]


def trace(kb: KnowledgeBase, subject: ResourceId) -> list[SourceRef]:
    """SourceRefs on ``subject`` and, transitively, on the classes its definition uses.

    Order: breadth-first from the subject, each ref once.
    """
    decl = kb.classes.get(subject) or kb.properties.get(subject) or kb.individuals.get(subject)
    if decl is None:
        raise UnknownResourceError("resource", subject)
    out: list[SourceRef] = []
    seen_refs: set[SourceRef] = set()
    queue, visited = [subject], {subject}
    while queue:
        ident = queue.pop(0)
        d = kb.classes.get(ident) or kb.properties.get(ident) or kb.individuals.get(ident)
        if d is None:
            continue
        for ref in (*d.sources, *getattr(d, "equivalent_sources", ())):
            if ref not in seen_refs:
                seen_refs.add(ref)
                out.append(ref)
        eq = getattr(d, "equivalent", None)
        if eq is None:
            continue
        for conj in eq.items:
            for a in conj.items:
                nxt = a.cls if isinstance(a, ClassAtom) else getattr(a, "filler", None)
                if nxt is not None and nxt not in visited:
                    visited.add(nxt)
                    queue.append(nxt)
    return out


# -- VDS against location -----------------------------------------------------------

def check_vds_for_location(kb: KnowledgeBase, vds_class: ResourceId, location: Individual | ResourceId, *,
                           shapes: Sequence = ()) -> ComplianceReport:
    """Does the VDS meet the design conditions and functional requirements of a line location?"""
    from .shapes import validate_shapes

    _require_class(kb, vds_class)
    loc = _resolve_individual(kb, location)
    overlay = (loc,) if loc.id not in kb.individuals or kb.individuals[loc.id] != loc else ()
    r = Reasoner(kb, overlay, disjunct_order=_upper_key(kb, vocab.MAX_DESIGN_TEMPERATURE))
    base = dict(check="vds-location", subject=loc.id, target=vds_class, overlay=overlay)

    # shape gate: the location and what it links to
    linked = {loc.id} | {t for _, t in loc.object_assertions}
    violations = validate_shapes(kb, shapes, reasoner=r, individuals=linked) if shapes else []
    rating_classes = sorted(a for a in kb.ancestors(vds_class) if a != vds_class and _has_data_atoms(kb, a))
    needed = sorted({d.property for c in rating_classes for conj in unfold(kb, kb.classes[c].equivalent).items
                     for d in conj.items if isinstance(d, DataRangeAtom)})
    absent = [p for p in needed if p not in r.facts(loc.id).data]
    if violations or absent:
        missing = tuple([str(v) for v in violations] + [f"{loc.id}: no value for {p}" for p in absent])
        return ComplianceReport(verdict=Outcome.INCOMPLETE, missing=missing, **base)

    explanations, failing, findings, clashes = [], [], [], []

    # (a) design conditions against each rating class
    for rc in rating_classes:
        expl = r.explain_member(loc.id, rc)
        explanations.append(expl)
        srcs = tuple(trace(kb, rc))
        if expl.holds:
            chosen = _cited_disjunct(expl)
            msg = f"design conditions within {kb.label(rc)}"
            if chosen:
                msg += f" via {chosen}"
            findings.append(Finding("info", msg, _cited_sources(kb, expl) or srcs[:1]))
        else:
            failing += _pt_failures(kb, r, loc.id, rc)
            findings.append(Finding("error", f"design conditions outside {kb.label(rc)}", srcs[:1]))

    # (b) asserted functional types must hold for every valve built to the VDS
    roots = [x for x in FUNCTIONAL_ROOTS if x in kb.classes]
    functional = sorted(t for t in loc.asserted_types
                        if t in kb.classes and any(root in kb.ancestors(t) for root in roots))
    hypo = replace(loc, asserted_types=loc.asserted_types + (vds_class,))
    hr = None
    for t in functional:
        if subsumes(kb, t, vds_class):
            continue
        hr = hr or Reasoner(kb, (hypo,))
        pair_clashes = [c for c in individual_clashes(hr, loc.id) if c.kind == "disjoint"]
        relevant = [c for c in pair_clashes if t in kb.ancestors(c.classes[0]) | kb.ancestors(c.classes[1])
                    or any(t in hr.idx.implies.get(x, ()) for x in c.classes)]
        relevant = relevant or pair_clashes
        if relevant:
            clashes += relevant
            explanations += [c.explanation for c in relevant]
            base["overlay"] = (hypo,)
        else:
            explanations.append(r.explain_member(loc.id, vds_class))
        failing.append(FailingAtom(kb.label(t), "required by the location", None, t))
        findings.append(Finding("error", f"location requires {kb.label(t)}, which {kb.label(vds_class)} "
                                         f"does not guarantee", tuple(trace(kb, vds_class))[:1]))

    # universal restrictions on the VDS constrain what the location links to
    for atom in _single_disjunct(kb, vds_class):
        if isinstance(atom, UniversalRestriction) and r.targets(loc.id, atom.property):
            e = r.explain_atom(loc.id, atom)
            if not e.holds:
                explanations.append(e)
                bad = [c.individual for c in e.children if not c.holds]
                failing.append(FailingAtom(format_atom(atom), ", ".join(map(str, bad)) + f" not {atom.filler}"))

    verdict = Outcome.NON_COMPLIANT if failing else Outcome.COMPLIANT
    return ComplianceReport(verdict=verdict, explanations=tuple(explanations), findings=tuple(findings),
                            failing=tuple(failing), clashes=tuple(sorted(set(clashes))), **base)


def _cited_disjunct(expl: Explanation) -> str:
    for node in expl.walk():
        if node.kind == "or" and node.holds and node.children:
            names = [str(c.cls) for c in node.children[0].children if c.kind == "member"]
            return " and ".join(names)
    return ""


def _cited_sources(kb: KnowledgeBase, expl: Explanation) -> tuple[SourceRef, ...]:
    for node in expl.walk():
        if node.kind == "or" and node.holds and node.children:
            out = []
            for c in node.children[0].children:
                if c.kind == "member" and c.cls in kb.classes:
                    out += kb.classes[c.cls].sources
            return tuple(dict.fromkeys(out))
    return ()


# -- product against VDS ------------------------------------------------------------

def check_product_against_vds(kb: KnowledgeBase, product: Individual | ResourceId,
                              vds_class: ResourceId) -> ComplianceReport:
    """Does a vendor product meet the VDS?

    Precedence: any clash once the product is asserted to be a VDS valve
    (NonCompliant), then missing mandatory parts (Incomplete), then failed
    membership (NonCompliant).
    """
    _require_class(kb, vds_class)
    prod = _resolve_individual(kb, product)
    extra = (prod,) if prod.id not in kb.individuals or kb.individuals[prod.id] != prod else ()
    base = dict(check="product-vds", subject=prod.id, target=vds_class)

    hypo = replace(prod, asserted_types=prod.asserted_types + (vds_class,))
    hr = Reasoner(kb, (hypo,))
    clashes = individual_clashes(hr, prod.id)
    if clashes:
        failing = tuple(FailingAtom(" disjoint with ".join(kb.label(c) for c in cl.classes), "both inferred")
                        if cl.kind == "disjoint" else FailingAtom(str(cl.detail), "too many targets")
                        for cl in clashes)
        findings = tuple(Finding("error", f"{cl}", tuple(trace(kb, vds_class))[:1]) for cl in clashes)
        return ComplianceReport(verdict=Outcome.NON_COMPLIANT, clashes=tuple(clashes), failing=failing,
                                findings=findings, explanations=tuple(c.explanation for c in clashes),
                                overlay=(hypo,), **base)

    r = Reasoner(kb, extra)
    missing = missing_assertions(r, prod.id, vds_class)
    if missing:
        lines = tuple(f"{prod.id}: {format_atom(res)} required by {cls}, found {n}" for cls, res, n in missing)
        return ComplianceReport(verdict=Outcome.INCOMPLETE, missing=lines, overlay=extra, **base)

    expl = r.explain_member(prod.id, vds_class)
    if not expl.holds:
        return ComplianceReport(verdict=Outcome.NON_COMPLIANT, explanations=(expl,),
                                failing=tuple(_leaf_failures(kb, expl)), overlay=extra,
                                findings=(Finding("error", f"{prod.id} is not a {kb.label(vds_class)}",
                                                  tuple(trace(kb, vds_class))[:1]),), **base)
    return ComplianceReport(verdict=Outcome.COMPLIANT, explanations=(expl,), overlay=extra,
                            findings=(Finding("info", f"{prod.id} is a {kb.label(vds_class)}",
                                              tuple(trace(kb, vds_class))[:1]),), **base)


def _leaf_failures(kb: KnowledgeBase, expl: Explanation) -> list[FailingAtom]:
    """Failing atoms at the first failing level of a negative membership tree.

    These are the unmet atoms of each disjunct of the target's own
    definition; deeper nodes only say why those atoms fail.
    """
    out = []
    for node in _first_level(expl):
        if node.holds:
            continue
        if node.kind == "data":
            out.append(FailingAtom(format_atom(node.atom),
                                   "no value" if node.value is None else format_decimal(node.value),
                                   format_decimal(node.atom.value)))
        elif node.kind in ("universal", "cardinality"):
            out.append(FailingAtom(format_atom(node.atom), "targets " + (", ".join(map(str, node.targets)) or "none")))
        elif node.kind in ("member", "loop"):
            out.append(FailingAtom(kb.label(node.cls), "not asserted or inferred", None, node.cls))
    return list(dict.fromkeys(out))


def _first_level(expl: Explanation) -> list[Explanation]:
    for node in expl.walk():
        if node.kind == "or":
            return [atom for conj in node.children for atom in (conj.children if conj.kind == "and" else (conj,))]
    return []


# -- batches ------------------------------------------------------------------------

def check_many(kb: KnowledgeBase, jobs: Iterable[tuple[str, ResourceId, ResourceId]], *,
               workers: int = 4, shapes: Sequence = ()) -> list[ComplianceReport]:
    """Run ``(kind, a, b)`` jobs concurrently; results come back in job order.

    ``kind`` is ``vds-location`` (a = VDS, b = location) or ``product-vds``
    (a = product, b = VDS).
    """
    jobs = list(jobs)
    index(kb)  # build the shared index once, before threads read it

    def run(job):
        kind, a, b = job
        if kind == "vds-location":
            return check_vds_for_location(kb, a, b, shapes=shapes)
        if kind == "product-vds":
            return check_product_against_vds(kb, a, b)
        raise ValueError(f"unknown check kind {kind!r}")

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(run, jobs))
