"""Resolution of module sets into an indexed, immutable knowledge base."""

from __future__ import annotations

import threading
from collections import defaultdict
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

from .errors import Diagnostic, ResolutionError, UnknownResourceError
from .model import (
    BUILTIN_PREFIXES,
    OWL_THING,
    ClassAtom,
    ClassDef,
    Individual,
    Module,
    ModuleKind,
    PropertyDef,
    PropertyKind,
    ResourceId,
    SourceRef,
    iter_atoms,
)


class KnowledgeBase:
    """Merged, indexed view of a resolved module set.

    Built only by :func:`resolve_module_set`; treat it as read-only.  Derived
    indexes (told ancestors, sub-property closure) are computed eagerly so
    that concurrent readers never race on lazy initialisation.
    """

    def __init__(self, modules: Iterable[Module]):
        mods = sorted(modules, key=lambda m: m.id)
        self.modules: Mapping[ResourceId, Module] = MappingProxyType({m.id: m for m in mods})
        prefixes: dict[str, str] = dict(BUILTIN_PREFIXES)
        classes: dict[ResourceId, ClassDef] = {}
        properties: dict[ResourceId, PropertyDef] = {}
        individuals: dict[ResourceId, Individual] = {}
        owner: dict[ResourceId, ResourceId] = {}
        for m in mods:
            prefixes.update(m.prefixes)
            for c in m.classes:
                classes[c.id] = c
                owner[c.id] = m.id
            for p in m.properties:
                properties[p.id] = p
                owner[p.id] = m.id
            for i in m.individuals:
                individuals[i.id] = i
                owner[i.id] = m.id
        self.prefixes: Mapping[str, str] = MappingProxyType(dict(sorted(prefixes.items())))
        self.classes: Mapping[ResourceId, ClassDef] = MappingProxyType(dict(sorted(classes.items())))
        self.properties: Mapping[ResourceId, PropertyDef] = MappingProxyType(dict(sorted(properties.items())))
        self.individuals: Mapping[ResourceId, Individual] = MappingProxyType(dict(sorted(individuals.items())))
        self.owner: Mapping[ResourceId, ResourceId] = MappingProxyType(owner)

        self._ancestors = {c: frozenset(_closure(c, lambda x: classes[x].superclasses if x in classes else ()))
                           for c in classes}
        children: dict[ResourceId, set[ResourceId]] = defaultdict(set)
        for c in classes.values():
            for sup in c.superclasses:
                children[sup].add(c.id)
        self._descendants = {c: frozenset(_closure(c, lambda x: children.get(x, ()))) for c in set(classes) | set(children)}
        sub_props: dict[ResourceId, set[ResourceId]] = defaultdict(set)
        for p in properties.values():
            for sup in p.superproperties:
                sub_props[sup].add(p.id)
        self._sub_properties = {p: frozenset(_closure(p, lambda x: sub_props.get(x, ())))
                                for p in set(properties) | set(sub_props)}
        pairs = set()
        for c in classes.values():
            for other in c.disjoint_with:
                pairs.add(tuple(sorted((c.id, other))))
        self.disjoint_pairs: tuple[tuple[ResourceId, ResourceId], ...] = tuple(sorted(pairs))
        self._lock = threading.Lock()
        self._cache: dict = {}

    # -- lookups ---------------------------------------------------------

    def class_def(self, cls: ResourceId) -> ClassDef:
        try:
            return self.classes[cls]
        except KeyError:
            raise UnknownResourceError("class", cls) from None

    def individual(self, ind: ResourceId) -> Individual:
        try:
            return self.individuals[ind]
        except KeyError:
            raise UnknownResourceError("individual", ind) from None

    def module(self, mid: ResourceId) -> Module:
        try:
            return self.modules[mid]
        except KeyError:
            raise UnknownResourceError("module", mid) from None

    def has_class(self, cls: ResourceId) -> bool:
        return cls in self.classes or cls == OWL_THING

    def ancestors(self, cls: ResourceId) -> frozenset[ResourceId]:
        """Told superclass closure, reflexive."""
        found = self._ancestors.get(cls)
        return found if found is not None else frozenset((cls,))

    def descendants(self, cls: ResourceId) -> frozenset[ResourceId]:
        """Told subclass closure, reflexive."""
        found = self._descendants.get(cls)
        return found if found is not None else frozenset((cls,))

    def sub_properties(self, prop: ResourceId) -> frozenset[ResourceId]:
        found = self._sub_properties.get(prop)
        return found if found is not None else frozenset((prop,))

    def told_types(self, ind: Individual) -> frozenset[ResourceId]:
        out: set[ResourceId] = set()
        for t in ind.asserted_types:
            out |= self.ancestors(t)
        return frozenset(out)

    def label(self, ident: ResourceId) -> str:
        decl = self.classes.get(ident) or self.properties.get(ident) or self.individuals.get(ident)
        return getattr(decl, "label", "") or str(ident)

    def expand(self, ident: ResourceId) -> str:
        return self.prefixes[ident.namespace] + ident.local

    def import_closure(self, mid: ResourceId) -> frozenset[ResourceId]:
        return frozenset(_closure(mid, lambda x: self.modules[x].imports if x in self.modules else ()))

    def lookup(self, text: str) -> ResourceId:
        """Resolve a CLI-style reference: a CURIE, or a bare local name that is unique."""
        text = text.strip()
        if ":" in text:
            try:
                ident = ResourceId.parse(text)
            except ValueError:
                raise UnknownResourceError("resource", text) from None
            if self.knows(ident):
                return ident
            raise UnknownResourceError("resource", text)
        matches = sorted({i for i in self.all_ids() if i.local == text})
        if len(matches) == 1:
            return matches[0]
        if not matches:
            raise UnknownResourceError("resource", text)
        raise UnknownResourceError("resource (ambiguous: " + ", ".join(map(str, matches)) + ")", text)

    def knows(self, ident: ResourceId) -> bool:
        return (ident in self.classes or ident in self.properties or ident in self.individuals
                or ident in self.modules)

    def all_ids(self) -> Iterable[ResourceId]:
        yield from self.classes
        yield from self.properties
        yield from self.individuals
        yield from self.modules

    def cached(self, key, factory):
        """Memoize a derived, immutable structure keyed on this KB."""
        try:
            return self._cache[key]
        except KeyError:
            pass
        with self._lock:
            if key not in self._cache:
                self._cache[key] = factory()
            return self._cache[key]

    def index_signature(self) -> tuple:
        """Everything the KB indexes, as plain tuples (used for order-independence checks)."""
        return (
            tuple(self.modules),
            tuple(self.prefixes.items()),
            tuple(self.classes.items()),
            tuple(self.properties.items()),
            tuple(self.individuals.items()),
            tuple(sorted(self.owner.items())),
            self.disjoint_pairs,
        )

    def __getstate__(self):
        return {"modules": tuple(self.modules.values())}

    def __setstate__(self, state):
        self.__init__(state["modules"])


def _closure(start, step) -> set:
    seen = {start}
    stack = [start]
    while stack:
        for nxt in step(stack.pop()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _builtin(ident: ResourceId) -> bool:
    return ident.namespace in BUILTIN_PREFIXES


def resolve_module_set(modules: Iterable[Module]) -> KnowledgeBase:
    """Check and merge a module set.

    Raises :class:`ResolutionError` carrying every problem found:
    ``duplicate-module``, ``missing-import``, ``import-cycle``,
    ``layer-violation``, ``collect-module-not-empty``, ``prefix-conflict``,
    ``duplicate-declaration`` and ``dangling-reference``.
    """
    mods = sorted(modules, key=lambda m: m.id)
    diags: list[Diagnostic] = []
    by_id: dict[ResourceId, Module] = {}
    for m in mods:
        if m.id in by_id:
            diags.append(Diagnostic("duplicate-module", f"module {m.id} given more than once", str(m.id)))
        by_id[m.id] = m

    for m in mods:
        for imp in m.imports:
            if imp not in by_id:
                diags.append(Diagnostic("missing-import", f"{m.id} imports {imp}, which is not in the module set", str(m.id)))
            elif by_id[imp].kind.layer < m.kind.layer:
                diags.append(Diagnostic(
                    "layer-violation",
                    f"{m.id} ({m.kind.value}) imports {imp} ({by_id[imp].kind.value}) from a lower layer",
                    str(m.id)))
        if m.kind is ModuleKind.COLLECT and not m.is_empty:
            diags.append(Diagnostic(
                "collect-module-not-empty",
                f"collect module {m.id} declares {len(m.classes)} classes, {len(m.properties)} properties, "
                f"{len(m.individuals)} individuals",
                str(m.id)))

    diags.extend(_cycles(by_id))

    bases: dict[str, tuple[str, ResourceId]] = {}
    uris: dict[str, tuple[str, ResourceId]] = {}
    for p, base in BUILTIN_PREFIXES.items():
        uris[base] = (p, OWL_THING)
        bases[p] = (base, OWL_THING)
    for m in mods:
        for p, base in m.prefixes.items():
            if p in bases and bases[p][0] != base:
                diags.append(Diagnostic("prefix-conflict",
                                        f"prefix {p!r} bound to {base} in {m.id} but {bases[p][0]} in {bases[p][1]}",
                                        str(m.id)))
            elif base in uris and uris[base][0] != p:
                diags.append(Diagnostic("prefix-conflict",
                                        f"{base} bound to {p!r} in {m.id} but {uris[base][0]!r} in {uris[base][1]}",
                                        str(m.id)))
            else:
                bases.setdefault(p, (base, m.id))
                uris.setdefault(base, (p, m.id))

    declared_in: dict[ResourceId, ResourceId] = {}
    for m in mods:
        for ident in m.declared_ids():
            if ident in declared_in:
                diags.append(Diagnostic("duplicate-declaration",
                                        f"{ident} declared in both {declared_in[ident]} and {m.id}", str(m.id)))
            else:
                declared_in[ident] = m.id

    if not any(d.code in ("missing-import", "import-cycle") for d in diags):
        for m in mods:
            closure = _closure(m.id, lambda x: by_id[x].imports if x in by_id else ())
            visible = set(closure)
            for mid in closure:
                visible.update(by_id[mid].declared_ids())
            for ident in sorted(set(m.all_references())):
                if ident not in visible and not _builtin(ident):
                    diags.append(Diagnostic("dangling-reference",
                                            f"{m.id} references {ident}, not declared in its import closure",
                                            str(m.id)))
            for ind in m.individuals:
                for p, _ in ind.data_assertions:
                    owner = declared_in.get(p)
                    pdef = _find_property(by_id, owner, p)
                    if pdef is not None and pdef.kind is not PropertyKind.DATA:
                        diags.append(Diagnostic("dangling-reference",
                                                f"{ind.id} asserts a value for {p}, which is not a data property",
                                                str(m.id)))

    if diags:
        raise ResolutionError(sorted(set(diags), key=lambda d: (d.code, d.source, d.message)))
    return KnowledgeBase(mods)


def _find_property(by_id, owner, p):
    if owner is None or owner not in by_id:
        return None
    for pdef in by_id[owner].properties:
        if pdef.id == p:
            return pdef
    return None


def _cycles(by_id: dict[ResourceId, Module]) -> list[Diagnostic]:
    white, grey, black = 0, 1, 2
    color = {m: white for m in by_id}
    out: list[Diagnostic] = []
    reported: set[frozenset] = set()

    def visit(node: ResourceId, path: list[ResourceId]) -> None:
        color[node] = grey
        path.append(node)
        for nxt in by_id[node].imports:
            if nxt not in by_id:
                continue
            if color[nxt] == grey:
                cycle = path[path.index(nxt):] + [nxt]
                key = frozenset(cycle)
                if key not in reported:
                    reported.add(key)
                    out.append(Diagnostic("import-cycle", " -> ".join(map(str, cycle)), str(nxt)))
            elif color[nxt] == white:
                visit(nxt, path)
        path.pop()
        color[node] = black

    for m in sorted(by_id):
        if color[m] == white:
            visit(m, [])
    return out


@dataclass(frozen=True, order=True)
class LintFinding:
    module: ResourceId
    subject: ResourceId
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.module}: {self.subject}: {self.rule}: {self.message}"


def lint_provenance(kb: KnowledgeBase, scope: ModuleKind | str = ModuleKind.STANDARD) -> list[LintFinding]:
    """Every class, and every equivalence axiom, in modules of kind ``scope`` needs a SourceRef."""
    scope = ModuleKind(scope)
    findings = []
    for m in kb.modules.values():
        if m.kind is not scope:
            continue
        for c in m.classes:
            if not c.sources:
                findings.append(LintFinding(m.id, c.id, "class-without-source",
                                            "class declaration carries no SourceRef"))
            if c.equivalent is not None and not c.equivalent_sources:
                findings.append(LintFinding(m.id, c.id, "equivalence-without-source",
                                            "equivalence axiom carries no SourceRef"))
    return sorted(findings)


def class_atoms(expr) -> list[ResourceId]:
    return [a.cls for a in iter_atoms(expr) if isinstance(a, ClassAtom)]


def all_source_refs(module: Module) -> list[tuple[ResourceId, str, SourceRef]]:
    """(subject, slot, ref) for every SourceRef in a module; slot is ``class`` or ``equivalence``."""
    out = []
    for decl in (*module.classes, *module.properties, *module.individuals):
        for ref in decl.sources:
            out.append((decl.id, "class", ref))
        for ref in getattr(decl, "equivalent_sources", ()):
            out.append((decl.id, "equivalence", ref))
    return out
