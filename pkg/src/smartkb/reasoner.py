"""Closed-world reasoning over the negation-free DNF fragment.

Membership is the least model of the KB read under closed-world
assumptions: an individual belongs to a class when it is asserted to be a
member of a class that implies it (told subclass, or a definition that
names it in every disjunct), or when it satisfies the definition of such a
class.  Data atoms only look at asserted values of the exact property;
universal and cardinality restrictions only look at asserted targets.

Evaluation is goal directed and memoized.  A goal that recurses into
itself (possible through object-property cycles) is cut and treated as
false; results that depended on a cut are not memoized.
"""

from __future__ import annotations

import logging
import operator
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Mapping, Sequence

from . import vocab
from .errors import NormalizationOverflow, UnknownResourceError
from .kb import KnowledgeBase
from .model import (
    OWL_THING,
    And,
    Atom,
    CardinalityRestriction,
    ClassAtom,
    DataRangeAtom,
    Individual,
    Interval,
    Or,
    ResourceId,
    UniversalRestriction,
    format_decimal,
    normalize,
)

log = logging.getLogger(__name__)


# -- precomputed index ---------------------------------------------------------------

@dataclass(frozen=True)
class _Index:
    defs: Mapping[ResourceId, Or]
    implies: Mapping[ResourceId, frozenset]   # reflexive up-closure
    sources: Mapping[ResourceId, frozenset]   # reflexive down-closure
    defined_sources: Mapping[ResourceId, tuple]
    defined: tuple
    # classes decided by the individual's own types and data alone; no memo needed
    flat: frozenset = frozenset()
    compiled: dict = field(default_factory=dict)

    def flat_check(self, cls: ResourceId):
        """Membership test for a flat class as a closure over ``_Facts``."""
        fn = self.compiled.get(cls)
        if fn is None:
            fn = self.compiled[cls] = self._compile(cls)
        return fn

    def _compile(self, cls: ResourceId):
        srcs = self.sources.get(cls, frozenset((cls,)))
        disjuncts = []
        for x in self.defined_sources.get(cls, ()):
            for conj in self.defs[x].items:
                tests = []
                for a in conj.items:
                    if isinstance(a, DataRangeAtom):
                        tests.append(_data_test(a))
                    else:
                        tests.append(self.flat_check(a.cls))
                disjuncts.append(tuple(tests))

        def check(f) -> bool:
            if not srcs.isdisjoint(f.asserted):
                return True
            for tests in disjuncts:
                for t in tests:
                    if not t(f):
                        break
                else:
                    return True
            return False
        return check

    def compiled_def(self, x: ResourceId) -> tuple:
        """The definition of ``x`` as disjuncts of tests ``(reasoner, ident, facts) -> bool``."""
        key = ("def", x)
        out = self.compiled.get(key)
        if out is None:
            out = self.compiled[key] = tuple(tuple(self._atom_test(a) for a in conj.items)
                                             for conj in self.defs[x].items)
        return out

    def _atom_test(self, a: Atom):
        if isinstance(a, DataRangeAtom):
            t = _data_test(a)
            return lambda r, i, f: t(f)
        if isinstance(a, ClassAtom):
            c = a.cls
            if c == OWL_THING:
                return lambda r, i, f: True
            if c in self.flat:
                fc = self.flat_check(c)
                return lambda r, i, f: fc(f)
            return lambda r, i, f: r.member(i, c)
        return lambda r, i, f: r.atom(i, a)


_OPS = {"<=": operator.le, "<": operator.lt, ">=": operator.ge, ">": operator.gt, "=": operator.eq}


def _data_test(atom: DataRangeAtom):
    prop, op, bound = atom.property, _OPS[atom.comparator], atom.value

    def test(f) -> bool:
        v = f.data.get(prop)
        return v is not None and op(v, bound)
    return test


def _build_index(kb: KnowledgeBase) -> _Index:
    defs = {c: cd.equivalent for c, cd in kb.classes.items() if cd.equivalent is not None}
    direct: dict[ResourceId, set] = {c: set(cd.superclasses) for c, cd in kb.classes.items()}
    for c, d in defs.items():
        if d.items:
            common = set.intersection(*({a.cls for a in conj.items if isinstance(a, ClassAtom)} for conj in d.items))
            direct[c] |= common
    nodes = set(direct)
    for sups in direct.values():
        nodes |= sups
    implies: dict[ResourceId, frozenset] = {}
    for n in nodes:
        seen = {n}
        stack = [n]
        while stack:
            for s in direct.get(stack.pop(), ()):
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        implies[n] = frozenset(seen)
    sources: dict[ResourceId, set] = {n: set() for n in nodes}
    for n, ups in implies.items():
        for u in ups:
            sources[u].add(n)
    sources_f = {n: frozenset(s) for n, s in sources.items()}
    defined_sources = {n: tuple(sorted(x for x in s if x in defs)) for n, s in sources_f.items()}
    return _Index(defs, implies, sources_f, defined_sources, tuple(sorted(defs)),
                  _flat_classes(defs, defined_sources))


def _flat_classes(defs: Mapping[ResourceId, Or], defined_sources: Mapping[ResourceId, tuple]) -> frozenset:
    """Greatest set whose definitions use only data atoms and other flat classes, minus cycles."""
    state: dict[ResourceId, bool] = {}

    def flat(cls: ResourceId) -> bool:
        if cls in state:
            return state[cls]
        state[cls] = False  # provisional: a cycle through cls makes it non-flat
        ok = True
        for x in defined_sources.get(cls, ()):
            for conj in defs[x].items:
                for a in conj.items:
                    if isinstance(a, DataRangeAtom):
                        continue
                    if not (isinstance(a, ClassAtom) and flat(a.cls)):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        state[cls] = ok
        return ok

    return frozenset(c for c in defined_sources if flat(c))


def index(kb: KnowledgeBase) -> _Index:
    return kb.cached("reasoner-index", lambda: _build_index(kb))


# -- explanations -----------------------------------------------------------------------

@dataclass(frozen=True)
class Explanation:
    """A node of a derivation tree.

    ``kind`` is one of ``member`` (individual in class), ``asserted``,
    ``definition``, ``or``, ``and``, ``data``, ``universal``,
    ``cardinality``, ``loop``, ``disjoint`` and ``clash``.  ``holds`` is the verdict
    the node certifies; a false ``member`` node lists every way it could
    have held.  A ``loop`` node refers back to an enclosing ``member`` node
    for the same individual and class instead of repeating it.
    """

    kind: str
    individual: ResourceId
    holds: bool
    cls: ResourceId | None = None
    via: ResourceId | None = None
    atom: Atom | None = None
    value: Decimal | None = None
    targets: tuple[ResourceId, ...] = ()
    pair: tuple[ResourceId, ResourceId] | None = None
    children: tuple[Explanation, ...] = ()

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def render(self, kb: KnowledgeBase | None = None, indent: int = 0) -> str:
        lines = []
        self._render(kb, indent, lines)
        return "\n".join(lines)

    def _render(self, kb, indent, lines):
        name = (lambda r: f"{r} ({kb.label(r)})" if kb is not None and kb.label(r) != str(r) else str(r))
        pad = "  " * indent
        mark = "yes" if self.holds else "no"
        if self.kind == "member":
            text = f"{self.individual} in {name(self.cls)}: {mark}"
        elif self.kind == "asserted":
            text = f"{self.individual} asserted as {name(self.via)}, which implies {name(self.cls)}"
        elif self.kind == "definition":
            text = f"definition of {name(self.via)}: {mark}"
        elif self.kind in ("or", "and"):
            text = f"{'any' if self.kind == 'or' else 'all'} of: {mark}"
        elif self.kind == "data":
            val = "no value" if self.value is None else format_decimal(self.value)
            text = f"{self.atom}: asserted {val}: {mark}"
        elif self.kind == "universal":
            text = f"{self.atom}: targets {', '.join(map(str, self.targets)) or 'none'}: {mark}"
        elif self.kind == "cardinality":
            text = f"{self.atom}: targets {', '.join(map(str, self.targets)) or 'none'}: {mark}"
        elif self.kind == "disjoint":
            text = f"{self.individual} in disjoint classes {name(self.pair[0])} and {name(self.pair[1])}"
        elif self.kind == "clash":
            text = f"{self.individual} violates {self.atom} required by {name(self.cls)}"
        elif self.kind == "loop":
            text = f"{self.individual} in {name(self.cls)}: {'yes' if self.holds else 'no'}, derived above"
        else:
            text = f"{self.kind}: {mark}"
        lines.append(pad + text)
        for c in self.children:
            c._render(kb, indent + 1, lines)


# -- evaluation context ---------------------------------------------------------------------

class _Facts:
    __slots__ = ("asserted", "data", "objects")

    def __init__(self, ind: Individual):
        self.asserted = frozenset(ind.asserted_types)
        self.data = dict(ind.data_assertions)
        objs: dict[ResourceId, list] = {}
        for p, t in ind.object_assertions:
            objs.setdefault(p, []).append(t)
        self.objects = objs


class Reasoner:
    """Evaluation context with a membership memo; cheap to create, not thread-safe."""

    def __init__(self, kb: KnowledgeBase, overlay: Iterable[Individual] = (), *, disjunct_order=None):
        self.kb = kb
        # optional sort key over disjuncts; decides which satisfied disjunct an explanation cites
        self.disjunct_order = disjunct_order
        self.idx = index(kb)
        self.overlay = {i.id: i for i in overlay}
        self.memo: dict[tuple, bool] = {}
        self.active: set[tuple] = set()
        self.cuts = 0
        self._facts: dict[ResourceId, _Facts] = {}

    # individuals

    def individual(self, ident: ResourceId) -> Individual:
        found = self.overlay.get(ident) or self.kb.individuals.get(ident)
        return found if found is not None else Individual(ident)

    def facts(self, ident: ResourceId) -> _Facts:
        f = self._facts.get(ident)
        if f is None:
            f = self._facts[ident] = _Facts(self.individual(ident))
        return f

    def targets(self, ident: ResourceId, prop: ResourceId) -> tuple[ResourceId, ...]:
        objs = self.facts(ident).objects
        out = set()
        for p in self.kb.sub_properties(prop):
            out.update(objs.get(p, ()))
        return tuple(sorted(out))

    # membership

    def member(self, ident: ResourceId, cls: ResourceId) -> bool:
        if cls == OWL_THING:
            return True
        if cls in self.idx.flat:
            return self.idx.flat_check(cls)(self.facts(ident))
        key = (ident, cls)
        found = self.memo.get(key)
        if found is not None:
            return found
        if key in self.active:
            self.cuts += 1
            return False
        self.active.add(key)
        before = self.cuts
        try:
            result = self._member(ident, cls)
        finally:
            self.active.discard(key)
        if result or self.cuts == before:
            self.memo[key] = result
        return result

    def _member(self, ident: ResourceId, cls: ResourceId) -> bool:
        sources = self.idx.sources.get(cls)
        facts = self.facts(ident)
        if sources is None:
            return cls in facts.asserted
        if not sources.isdisjoint(facts.asserted):
            return True
        idx = self.idx
        for x in idx.defined_sources[cls]:
            for tests in idx.compiled_def(x):
                for t in tests:
                    if not t(self, ident, facts):
                        break
                else:
                    return True
        return False

    def satisfies(self, ident: ResourceId, dnf: Or) -> bool:
        for conj in dnf.items:
            for atom in conj.items:
                if not self.atom(ident, atom):
                    break
            else:
                return True
        return False

    def atom(self, ident: ResourceId, atom: Atom) -> bool:
        if isinstance(atom, ClassAtom):
            return self.member(ident, atom.cls)
        if isinstance(atom, DataRangeAtom):
            v = self.facts(ident).data.get(atom.property)
            return v is not None and atom.holds(v)
        if isinstance(atom, UniversalRestriction):
            return all(self.member(t, atom.filler) for t in self.targets(ident, atom.property))
        return atom.accepts(self._count(ident, atom))

    def _count(self, ident: ResourceId, atom: CardinalityRestriction) -> int:
        targets = self.targets(ident, atom.property)
        if atom.filler is None:
            return len(targets)
        return sum(1 for t in targets if self.member(t, atom.filler))

    def inferred_types(self, ident: ResourceId) -> frozenset[ResourceId]:
        facts = self.facts(ident)
        roots = set(facts.asserted)
        defs = self.idx.defs
        for x in self.idx.defined:
            if x not in roots and self.member(ident, x):
                roots.add(x)
        out = {OWL_THING}
        for r in roots:
            out |= self.idx.implies.get(r, {r})
        return frozenset(out)

    # explanations

    def explain_member(self, ident: ResourceId, cls: ResourceId, _seen: frozenset = frozenset()) -> Explanation:
        holds = self.member(ident, cls)
        key = (ident, cls)
        if key in _seen:
            return Explanation("loop", ident, holds, cls=cls)
        seen = _seen | {key}
        if cls == OWL_THING:
            return Explanation("member", ident, True, cls=cls)
        sources = self.idx.sources.get(cls, frozenset((cls,)))
        asserted = sorted(sources & self.facts(ident).asserted)
        if holds and asserted:
            return Explanation("member", ident, True, cls=cls,
                               children=(Explanation("asserted", ident, True, cls=cls, via=asserted[0]),))
        children = []
        for x in self.idx.defined_sources.get(cls, ()):
            sub = self._explain_dnf(ident, self.idx.defs[x], seen)
            node = Explanation("definition", ident, sub.holds, cls=cls, via=x, children=(sub,))
            if holds and sub.holds:
                return Explanation("member", ident, True, cls=cls, children=(node,))
            children.append(node)
        return Explanation("member", ident, holds, cls=cls, children=tuple(children))

    def _explain_dnf(self, ident: ResourceId, dnf: Or, seen: frozenset) -> Explanation:
        kids = []
        items = dnf.items if self.disjunct_order is None else sorted(dnf.items, key=self.disjunct_order)
        for conj in items:
            node = self._explain_conj(ident, conj, seen)
            if node.holds:
                return Explanation("or", ident, True, children=(node,))
            kids.append(node)
        return Explanation("or", ident, False, children=tuple(kids))

    def _explain_conj(self, ident: ResourceId, conj: And, seen: frozenset) -> Explanation:
        kids = []
        for atom in conj.items:
            node = self.explain_atom(ident, atom, seen)
            kids.append(node)
            if not node.holds:
                return Explanation("and", ident, False, children=tuple(kids))
        return Explanation("and", ident, True, children=tuple(kids))

    def explain_atom(self, ident: ResourceId, atom: Atom, seen: frozenset = frozenset()) -> Explanation:
        if isinstance(atom, ClassAtom):
            return self.explain_member(ident, atom.cls, seen)
        if isinstance(atom, DataRangeAtom):
            v = self.facts(ident).data.get(atom.property)
            return Explanation("data", ident, v is not None and atom.holds(v), atom=atom, value=v)
        targets = self.targets(ident, atom.property)
        if isinstance(atom, UniversalRestriction):
            kids = []
            for t in targets:
                node = self.explain_member(t, atom.filler, seen)
                kids.append(node)
                if not node.holds:
                    return Explanation("universal", ident, False, atom=atom, targets=targets, children=tuple(kids))
            return Explanation("universal", ident, True, atom=atom, targets=targets, children=tuple(kids))
        kids = tuple(self.explain_member(t, atom.filler, seen) for t in targets) if atom.filler is not None else ()
        count = len(targets) if atom.filler is None else sum(1 for k in kids if k.holds)
        return Explanation("cardinality", ident, atom.accepts(count), atom=atom, targets=targets, children=kids)


# -- public operations ------------------------------------------------------------------

def _check_class(kb: KnowledgeBase, cls: ResourceId) -> None:
    if not kb.has_class(cls):
        raise UnknownResourceError("class", cls)


def _ident(ind: Individual | ResourceId) -> tuple[ResourceId, list[Individual]]:
    if isinstance(ind, Individual):
        return ind.id, [ind]
    return ind, []


@dataclass(frozen=True)
class Verdict:
    holds: bool
    explanation: Explanation | None

    def __bool__(self) -> bool:
        return self.holds


def instance_of(kb: KnowledgeBase, ind: Individual | ResourceId, cls: ResourceId, *, explain: bool = True,
                overlay: Iterable[Individual] = ()) -> Verdict:
    """Closed-world membership test, with a derivation tree when ``explain`` is set."""
    _check_class(kb, cls)
    ident, extra = _ident(ind)
    r = Reasoner(kb, list(overlay) + extra)
    holds = r.member(ident, cls)
    return Verdict(holds, r.explain_member(ident, cls) if explain else None)


@dataclass(frozen=True)
class ClassificationResult:
    individual: ResourceId
    inferred_types: frozenset[ResourceId]
    justification: Mapping[ResourceId, Explanation] = field(default_factory=dict, compare=False)

    def sorted_types(self) -> list[ResourceId]:
        return sorted(self.inferred_types)


def classify(kb: KnowledgeBase, ind: Individual | ResourceId, *, explain: bool = True,
             overlay: Iterable[Individual] = ()) -> ClassificationResult:
    ident, extra = _ident(ind)
    r = Reasoner(kb, list(overlay) + extra)
    return _classify(r, ident, explain)


def _classify(r: Reasoner, ident: ResourceId, explain: bool) -> ClassificationResult:
    types = r.inferred_types(ident)
    just = {c: r.explain_member(ident, c) for c in sorted(types)} if explain else {}
    return ClassificationResult(ident, types, just)


_WORKER_KB: KnowledgeBase | None = None


def _init_worker(kb: KnowledgeBase) -> None:
    global _WORKER_KB
    _WORKER_KB = kb


def _classify_chunk(chunk: list[Individual]) -> list[frozenset]:
    r = Reasoner(_WORKER_KB, chunk)
    return [r.inferred_types(i.id) for i in chunk]


def classify_many(kb: KnowledgeBase, individuals: Sequence[Individual], *, workers: int | None = None,
                  chunk_size: int = 500) -> list[ClassificationResult]:
    """Classify many individuals (without justifications); output order follows input order.

    Individuals are classified as an overlay on the KB, so they may refer to
    each other.  With ``workers > 1`` chunks run in a process pool; the merged
    output is identical to the sequential run.
    """
    individuals = list(individuals)
    workers = 1 if workers is None else workers
    if workers <= 1 or len(individuals) <= chunk_size:
        r = Reasoner(kb, individuals)
        return [ClassificationResult(i.id, r.inferred_types(i.id)) for i in individuals]
    chunks = _chunks(individuals, chunk_size)
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(kb,)) as pool:
        results = list(pool.map(_classify_chunk, chunks))
    found = {i.id: types for c, res in zip(chunks, results) for i, types in zip(c, res)}
    return [ClassificationResult(i.id, found[i.id]) for i in individuals]


def _chunks(individuals: list[Individual], size: int) -> list[list[Individual]]:
    """Pack individuals into chunks of about ``size`` without splitting linked groups.

    Each chunk is evaluated with only its own members as overlay, so any two
    individuals joined by an object assertion must land in the same chunk.
    """
    parent = {i.id: i.id for i in individuals}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in individuals:
        for _, t in i.object_assertions:
            if t in parent:
                parent[find(t)] = find(i.id)
    groups: dict[ResourceId, list[Individual]] = {}
    for i in individuals:
        groups.setdefault(find(i.id), []).append(i)
    chunks: list[list[Individual]] = [[]]
    for members in groups.values():
        if chunks[-1] and len(chunks[-1]) + len(members) > size:
            chunks.append([])
        chunks[-1].extend(members)
    return chunks


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


# -- consistency ----------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Clash:
    individual: ResourceId
    kind: str  # disjoint | cardinality
    classes: tuple[ResourceId, ...]
    detail: str
    explanation: Explanation | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"{self.individual}: {self.kind} clash: {self.detail}"


def individual_clashes(r: Reasoner, ident: ResourceId) -> list[Clash]:
    kb = r.kb
    types = r.inferred_types(ident)
    out = []
    for a, b in kb.disjoint_pairs:
        if a in types and b in types:
            expl = Explanation("disjoint", ident, True, pair=(a, b),
                               children=(r.explain_member(ident, a), r.explain_member(ident, b)))
            out.append(Clash(ident, "disjoint", (a, b),
                             f"member of disjoint classes {kb.label(a)} and {kb.label(b)}", expl))
    for c in sorted(types):
        cd = kb.classes.get(c)
        if cd is None:
            continue
        for res in cd.restrictions:
            if isinstance(res, CardinalityRestriction) and res.kind in ("exactly", "max"):
                count = r._count(ident, res)
                if count > res.n:
                    expl = Explanation("clash", ident, True, cls=c, atom=res, children=(
                        r.explain_member(ident, c), r.explain_atom(ident, res)))
                    out.append(Clash(ident, "cardinality", (c,),
                                     f"{count} targets for {res} required by {kb.label(c)}", expl))
    return sorted(out)


def check_consistency(kb: KnowledgeBase, individuals: Iterable[Individual] | None = None) -> list[Clash]:
    """Disjointness and cardinality clashes of every KB individual (or of the given ones)."""
    extra = list(individuals) if individuals is not None else []
    r = Reasoner(kb, extra)
    idents = [i.id for i in extra] if individuals is not None else list(kb.individuals)
    out: list[Clash] = []
    for ident in idents:
        out += individual_clashes(r, ident)
    return sorted(out)


def missing_assertions(r: Reasoner, ident: ResourceId, cls: ResourceId, *,
                       inherited: bool = False) -> list[tuple[ResourceId, CardinalityRestriction, int]]:
    """Lower-bound cardinalities (``min``/``exactly``) on ``cls`` that the individual under-fills.

    With ``inherited`` the restrictions of every implied class count too.
    """
    kb = r.kb
    out = []
    for c in sorted(r.idx.implies.get(cls, {cls}) if inherited else {cls}):
        cd = kb.classes.get(c)
        if cd is None:
            continue
        atoms = list(cd.restrictions)
        if cd.equivalent is not None and len(cd.equivalent.items) == 1:
            atoms += [a for a in cd.equivalent.items[0].items if isinstance(a, CardinalityRestriction)]
        for res in atoms:
            if isinstance(res, CardinalityRestriction) and res.kind in ("exactly", "min"):
                count = r._count(ident, res)
                if count < res.n:
                    out.append((c, res, count))
    return sorted(set(out), key=lambda x: (x[0], str(x[1])))


# -- replay -----------------------------------------------------------------------------------

def replay(kb: KnowledgeBase, expl: Explanation, overlay: Iterable[Individual] = ()) -> bool:
    """Check that every node of ``expl`` is justified by the KB and its children.

    Returns True when the explanation re-derives its verdict.
    """
    r = Reasoner(kb, overlay)
    return _replay(r, expl)


def _replay(r: Reasoner, e: Explanation, above: frozenset = frozenset()) -> bool:
    kb, idx = r.kb, r.idx
    if e.kind == "loop":
        # a back-reference to an enclosing member node with the same verdict
        return (e.individual, e.cls, e.holds) in above and e.holds == r.member(e.individual, e.cls)
    if e.kind == "member":
        above = above | {(e.individual, e.cls, e.holds)}
    kids_ok = all(_replay(r, c, above) for c in e.children)
    if not kids_ok:
        return False
    facts = r.facts(e.individual)
    if e.kind == "member":
        if e.cls == OWL_THING:
            return e.holds
        if e.holds:
            return any(c.holds and c.kind in ("asserted", "definition") and c.cls == e.cls for c in e.children)
        sources = idx.sources.get(e.cls, frozenset((e.cls,)))
        if not sources.isdisjoint(facts.asserted):
            return False
        covered = {c.via for c in e.children if c.kind == "definition" and not c.holds}
        return covered == set(idx.defined_sources.get(e.cls, ()))
    if e.kind == "asserted":
        return e.via in facts.asserted and e.cls in idx.implies.get(e.via, {e.via})
    if e.kind == "definition":
        dnf = idx.defs.get(e.via)
        if dnf is None or e.cls not in idx.implies.get(e.via, ()):
            return False
        return len(e.children) == 1 and e.children[0].kind == "or" and e.children[0].holds == e.holds \
            and _matches_dnf(e.children[0], dnf)
    if e.kind == "or":
        if e.holds:
            return any(c.holds for c in e.children)
        return all(not c.holds for c in e.children)
    if e.kind == "and":
        if e.holds:
            return all(c.holds for c in e.children)
        return any(not c.holds for c in e.children)
    if e.kind == "data":
        v = facts.data.get(e.atom.property)
        return v == e.value and (v is not None and e.atom.holds(v)) == e.holds
    if e.kind == "universal":
        targets = r.targets(e.individual, e.atom.property)
        if tuple(e.targets) != targets:
            return False
        if any(c.cls != e.atom.filler or c.individual not in targets for c in e.children):
            return False
        if e.holds:
            return {c.individual for c in e.children} == set(targets) and all(c.holds for c in e.children)
        return any(not c.holds for c in e.children)
    if e.kind == "cardinality":
        targets = r.targets(e.individual, e.atom.property)
        if tuple(e.targets) != targets:
            return False
        if e.atom.filler is None:
            count = len(targets)
        else:
            if {c.individual for c in e.children} != set(targets):
                return False
            count = sum(1 for c in e.children if c.holds)
        return e.atom.accepts(count) == e.holds
    if e.kind == "disjoint":
        a, b = e.pair
        return (a, b) in kb.disjoint_pairs and len(e.children) == 2 and all(c.holds for c in e.children) \
            and {c.cls for c in e.children} == {a, b}
    if e.kind == "clash":
        if len(e.children) != 2:
            return False
        membership, card = e.children
        return (membership.kind == "member" and membership.holds and membership.cls == e.cls
                and card.kind == "cardinality" and card.atom == e.atom and not card.holds
                and e.atom in r.kb.class_def(e.cls).restrictions)
    return False


def _matches_dnf(node: Explanation, dnf: Or) -> bool:
    """The ``or`` node's conjunction children correspond to disjuncts of ``dnf``."""
    for child in node.children:
        atoms = [c.atom if c.atom is not None else ClassAtom(c.cls) for c in child.children]
        if not any(all(a in conj.items for a in atoms) for conj in dnf.items):
            return False
    if not node.holds:
        return len(node.children) == len(dnf.items)
    return True


# -- structural subsumption ----------------------------------------------------------------

_MAX_SATURATION_ROUNDS = 32


def unfold(kb: KnowledgeBase, expr, *, limit: int = 4096) -> Or:
    """Replace class atoms of defined classes by their definitions, recursively."""
    idx = index(kb)
    dnf = normalize(expr, max_disjuncts=limit)
    for _ in range(_MAX_SATURATION_ROUNDS):
        changed = False
        items = []
        for conj in dnf.items:
            named = [a for a in conj.items if isinstance(a, ClassAtom) and a.cls in idx.defs]
            if not named:
                items.append(conj)
                continue
            changed = True
            rest = tuple(a for a in conj.items if a not in named)
            items.append(And(rest + tuple(idx.defs[a.cls] for a in named)))
        if not changed:
            return dnf
        dnf = normalize(Or(tuple(items)), max_disjuncts=limit)
    raise NormalizationOverflow("definitions unfold too deeply (cyclic definitions?)")


def _saturate(kb: KnowledgeBase, dnf: Or, limit: int) -> list[And]:
    """Close each disjunct under implied classes, necessary restrictions and definitions."""
    idx = index(kb)
    pending = [(conj, frozenset()) for conj in dnf.items]
    out = []
    rounds = 0
    while pending:
        rounds += 1
        if rounds > limit:
            raise NormalizationOverflow("saturation produced too many disjuncts")
        conj, expanded = pending.pop()
        new_atoms = set(conj.items)
        defs_to_add = []
        for a in conj.items:
            if isinstance(a, ClassAtom) and a.cls not in expanded:
                expanded = expanded | {a.cls}
                for sup in idx.implies.get(a.cls, (a.cls,)):
                    new_atoms.add(ClassAtom(sup))
                    cd = kb.classes.get(sup)
                    if cd is not None:
                        new_atoms.update(cd.restrictions)
                if a.cls in idx.defs:
                    defs_to_add.append(idx.defs[a.cls])
        if new_atoms == set(conj.items) and not defs_to_add:
            out.append(conj)
            continue
        expr = And(tuple(new_atoms) + tuple(defs_to_add))
        for c in normalize(expr, max_disjuncts=limit).items:
            pending.append((c, expanded))
            if len(pending) > limit:
                raise NormalizationOverflow("saturation produced too many disjuncts")
    return out


def _unsatisfiable(kb: KnowledgeBase, conj: And) -> bool:
    classes = {a.cls for a in conj.items if isinstance(a, ClassAtom)}
    return any(a in classes and b in classes for a, b in kb.disjoint_pairs)


class _Subsumption:
    def __init__(self, kb: KnowledgeBase, limit: int):
        self.kb = kb
        self.idx = index(kb)
        self.limit = limit
        self.active: set = set()

    def conj_implies_class(self, conj: And, cls: ResourceId) -> bool:
        if cls == OWL_THING:
            return True
        names = {a.cls for a in conj.items if isinstance(a, ClassAtom)}
        sources = self.idx.sources.get(cls, frozenset((cls,)))
        if not sources.isdisjoint(names):
            return True
        key = (conj, cls)
        if key in self.active:
            return False
        self.active.add(key)
        try:
            for x in self.idx.defined_sources.get(cls, ()):
                if any(self.conj_implies_conj(conj, g) for g in self.idx.defs[x].items):
                    return True
            return False
        finally:
            self.active.discard(key)

    def conj_implies_conj(self, conj: And, general: And) -> bool:
        ranges: dict[ResourceId, list] = {}
        for a in conj.items:
            if isinstance(a, DataRangeAtom):
                ranges.setdefault(a.property, []).append(a)
        for g in general.items:
            if isinstance(g, ClassAtom):
                if not self.conj_implies_class(conj, g.cls):
                    return False
            elif isinstance(g, DataRangeAtom):
                have = ranges.get(g.property)
                if not have or not Interval.of([g]).contains_interval(Interval.of(have)):
                    return False
            elif isinstance(g, UniversalRestriction):
                if not self._universal(conj, g):
                    return False
            elif not self._cardinality(conj, g):
                return False
        return True

    def _universal(self, conj: And, g: UniversalRestriction) -> bool:
        for a in conj.items:
            if isinstance(a, UniversalRestriction) and a.property == g.property:
                if a.filler == g.filler or subsumes(self.kb, g.filler, a.filler, _limit=self.limit):
                    return True
            if isinstance(a, CardinalityRestriction) and a.property == g.property and a.filler is None \
                    and a.kind in ("max", "exactly") and a.n == 0:
                return True
        return False

    def _cardinality(self, conj: And, g: CardinalityRestriction) -> bool:
        if g.kind == "min" and g.n == 0:
            return True
        for a in conj.items:
            if not isinstance(a, CardinalityRestriction) or a.property != g.property:
                continue
            same_filler = a.filler == g.filler
            lower_ok = a.kind in ("min", "exactly") and same_filler
            upper_ok = a.kind in ("max", "exactly") and (same_filler or a.filler is None)
            if g.kind == "min" and lower_ok and a.n >= g.n:
                return True
            if g.kind == "max" and upper_ok and a.n <= g.n:
                return True
            if g.kind == "exactly" and a.kind == "exactly" and same_filler and a.n == g.n:
                return True
        return False


def subsumes(kb: KnowledgeBase, general: ResourceId, specific: ResourceId, *, _limit: int = 4096) -> bool:
    """Structural subsumption: is every member of ``specific`` a member of ``general``?

    Sound, not complete: a specific disjunct must be implied by a single
    general disjunct, so coverage by a union of general disjuncts is missed.
    Returns False when normalization would overflow.
    """
    _check_class(kb, general)
    _check_class(kb, specific)
    idx = index(kb)
    if general == OWL_THING or general in idx.implies.get(specific, {specific}):
        return True
    try:
        start = ClassAtom(specific)
        spec = _saturate(kb, normalize(start), _limit)
    except NormalizationOverflow:
        log.warning("subsumption %s <= %s: normalization overflow, answering no", specific, general)
        return False
    checker = _Subsumption(kb, _limit)
    return all(_unsatisfiable(kb, d) or checker.conj_implies_class(d, general) for d in spec)


# -- PT ratings ---------------------------------------------------------------------------------

def allowable_pressure_at(kb: KnowledgeBase, rating_class: ResourceId, temperature,
                          pressure_property: ResourceId = vocab.MAX_DESIGN_PRESSURE,
                          temperature_property: ResourceId = vocab.MAX_DESIGN_TEMPERATURE) -> Decimal | None:
    """Highest pressure bound over the rating's disjuncts whose temperature range admits ``temperature``.

    ``None`` when no disjunct covers the temperature.
    """
    _check_class(kb, rating_class)
    from .model import to_decimal
    t = to_decimal(temperature)
    best: Decimal | None = None
    for conj in pt_disjuncts(kb, rating_class, pressure_property, temperature_property):
        p_iv, t_iv = conj
        if t_iv.contains(t) and p_iv.hi is not None:
            if best is None or p_iv.hi > best:
                best = p_iv.hi
    return best


def pt_disjuncts(kb: KnowledgeBase, rating_class: ResourceId,
                 pressure_property: ResourceId = vocab.MAX_DESIGN_PRESSURE,
                 temperature_property: ResourceId = vocab.MAX_DESIGN_TEMPERATURE) -> list[tuple[Interval, Interval]]:
    """(pressure interval, temperature interval) per disjunct of the unfolded rating definition."""
    cd = kb.class_def(rating_class)
    if cd.equivalent is None:
        return []
    out = []
    for conj in unfold(kb, cd.equivalent).items:
        p = [a for a in conj.items if isinstance(a, DataRangeAtom) and a.property == pressure_property]
        t = [a for a in conj.items if isinstance(a, DataRangeAtom) and a.property == temperature_property]
        out.append((Interval.of(p), Interval.of(t)))
    return out
