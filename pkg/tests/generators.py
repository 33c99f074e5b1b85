"""Random workloads shared by the property, scale and acceptance tests."""

from __future__ import annotations

import random
from decimal import Decimal

from smartkb import content as c, vocab
from smartkb.model import Individual, ResourceId

VALVE_TYPES = (c.FLOATING, c.TRUNNION, c.WEDGE_GATE, c.GATE_VALVE, c.BALL_VALVE, c.B1610_NPS3)
SIZES = (c.DN80, c.DN20)
RATINGS = (c.CL150, c.CL600)
ENDS = (c.RF, c.RTJ, c.FF)


def generate_valves(n: int, seed: int = 0) -> list[Individual]:
    """``n`` valve individuals, each followed by its body (and sometimes bonnet) part."""
    rng = random.Random(seed)
    grades = [g.class_id for g in c.ALL_GRADES]
    out: list[Individual] = []
    for k in range(n):
        vid = ResourceId("gen", f"V{k}")
        types = [rng.choice(VALVE_TYPES), rng.choice(SIZES), rng.choice(RATINGS), rng.choice(ENDS)]
        if rng.random() < 0.5:
            types.append(c.FULL_BORE)
        parts = [(vocab.HAS_VALVE_BODY, ResourceId("gen", f"V{k}-body"))]
        if rng.random() < 0.7:
            parts.append((vocab.HAS_VALVE_BONNET_OR_COVER, ResourceId("gen", f"V{k}-bonnet")))
        data = ((vocab.MAX_DESIGN_PRESSURE, Decimal(rng.randint(0, 250)) / 10),
                (vocab.MAX_DESIGN_TEMPERATURE, Decimal(rng.randint(-50, 850))))
        out.append(Individual(vid, tuple(types), tuple(parts), data))
        for prop, pid in parts:
            kind = c.VALVE_BODY if prop == vocab.HAS_VALVE_BODY else c.VALVE_BONNET_OR_COVER
            out.append(Individual(pid, (kind, rng.choice(grades))))
    return out


# -- hypothesis strategies for whole modules ---------------------------------------

from hypothesis import strategies as st  # noqa: E402

from smartkb.model import (  # noqa: E402
    Annotation,
    CardinalityRestriction,
    ClassAtom,
    ClassDef,
    DataRangeAtom,
    Module,
    ModuleKind,
    PropertyDef,
    PropertyKind,
    SourceRef,
    UniversalRestriction,
    And,
    Or,
)

PREFIXES = {"ex": "https://example.org/ex/", "ot": "https://example.org/other/"}
_local = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}(\.[0-9]{1,2})?", fullmatch=True)
ids = st.builds(ResourceId, st.sampled_from(sorted(PREFIXES)), _local)
text = st.text(st.characters(blacklist_categories=("Cs",)), max_size=12)
nonblank = text.filter(lambda s: s.strip() != "")
decimals = st.decimals(min_value=-1000, max_value=1000, places=2, allow_nan=False, allow_infinity=False)
source_refs = st.builds(SourceRef, nonblank, nonblank, nonblank)

atoms = st.one_of(
    st.builds(ClassAtom, ids),
    st.builds(DataRangeAtom, ids, st.sampled_from(["<=", "<", "=", ">=", ">"]), decimals),
    st.builds(UniversalRestriction, ids, ids),
    st.builds(CardinalityRestriction, ids, st.sampled_from(["exactly", "min", "max"]), st.integers(0, 3),
              st.one_of(st.none(), ids)),
)
restrictions = atoms.filter(lambda a: not isinstance(a, ClassAtom))
expressions = st.lists(st.lists(atoms, min_size=1, max_size=3).map(lambda xs: And(tuple(xs))),
                       min_size=0, max_size=3).map(lambda cs: Or(tuple(cs)))
annotations = st.one_of(source_refs, st.builds(Annotation, ids, text))


@st.composite
def class_defs(draw, ident):
    return ClassDef(ident, draw(text), tuple(draw(st.lists(ids, max_size=2))),
                    draw(st.one_of(st.none(), expressions)),
                    tuple(x for x in draw(st.lists(ids, max_size=2)) if x != ident),
                    tuple(draw(st.lists(restrictions, max_size=2))),
                    tuple(draw(st.lists(annotations, max_size=2))),
                    tuple(draw(st.lists(source_refs, max_size=1))))


@st.composite
def property_defs(draw, ident):
    kind = draw(st.sampled_from(list(PropertyKind)))
    rng = None if kind is not PropertyKind.OBJECT else draw(st.one_of(st.none(), ids))
    return PropertyDef(ident, kind, draw(text), tuple(draw(st.lists(ids, max_size=1))),
                       draw(st.one_of(st.none(), ids)), rng, draw(st.one_of(st.none(), text)),
                       tuple(draw(st.lists(annotations, max_size=1))))


@st.composite
def individuals(draw, ident):
    props = draw(st.lists(ids, max_size=2, unique=True))
    return Individual(ident, tuple(draw(st.lists(ids, max_size=2))),
                      tuple(draw(st.lists(st.tuples(ids, ids), max_size=2))),
                      tuple((p, draw(decimals)) for p in props),
                      tuple(draw(st.lists(annotations, max_size=1))), draw(text))


@st.composite
def modules(draw):
    decl_ids = draw(st.lists(ids, max_size=6, unique=True))
    builders = [class_defs, property_defs, individuals]
    decls = [draw(st.sampled_from(builders).flatmap(lambda b, i=i: b(i))) for i in decl_ids]
    return Module(draw(ids), draw(st.sampled_from(list(ModuleKind))), tuple(draw(st.lists(ids, max_size=2))),
                  dict(PREFIXES),
                  tuple(d for d in decls if isinstance(d, ClassDef)),
                  tuple(d for d in decls if isinstance(d, PropertyDef)),
                  tuple(d for d in decls if isinstance(d, Individual)),
                  draw(text))


# -- random small knowledge bases for the reasoner oracle ---------------------------

from smartkb.kb import resolve_module_set  # noqa: E402

RK = "https://example.org/rk/"
RK_CLASSES = [ResourceId("rk", f"C{i}") for i in range(6)]
RK_DATA = [ResourceId("rk", "p"), ResourceId("rk", "q")]
RK_LINK, RK_SUBLINK = ResourceId("rk", "r"), ResourceId("rk", "s")
RK_INDS = [ResourceId("rk", f"i{i}") for i in range(5)]

_rk_class = st.sampled_from(RK_CLASSES)
_rk_atom = st.one_of(
    _rk_class.map(ClassAtom),
    st.builds(DataRangeAtom, st.sampled_from(RK_DATA), st.sampled_from(["<=", "<", ">=", ">", "="]),
              st.integers(0, 3)),
    st.builds(UniversalRestriction, st.just(RK_LINK), _rk_class),
    st.builds(lambda n, f: CardinalityRestriction(RK_LINK, "min", n, f), st.integers(1, 2),
              st.one_of(st.none(), _rk_class)),
)
_rk_expr = st.lists(st.lists(_rk_atom, min_size=1, max_size=3).map(lambda xs: And(tuple(xs))),
                    min_size=1, max_size=3).map(lambda cs: Or(tuple(cs)))


@st.composite
def random_kbs(draw):
    """A resolved KB of six classes (some defined, possibly cyclically) and five linked individuals."""
    classes = []
    for c in RK_CLASSES:
        sup = tuple(x for x in draw(st.lists(_rk_class, max_size=1)) if x != c)
        eq = draw(st.one_of(st.none(), _rk_expr))
        classes.append(ClassDef(c, superclasses=sup, equivalent=eq))
    props = [PropertyDef(p, PropertyKind.DATA) for p in RK_DATA]
    props += [PropertyDef(RK_LINK, PropertyKind.OBJECT), PropertyDef(RK_SUBLINK, PropertyKind.OBJECT, superproperties=(RK_LINK,))]
    inds = []
    for i in RK_INDS:
        types = tuple(draw(st.lists(_rk_class, max_size=2)))
        links = tuple(draw(st.lists(st.tuples(st.sampled_from([RK_LINK, RK_SUBLINK]), st.sampled_from(RK_INDS)),
                                    max_size=3)))
        values = tuple((p, draw(st.integers(0, 3))) for p in RK_DATA if draw(st.booleans()))
        inds.append(Individual(i, types, links, values))
    m = Module(ResourceId("rk", "m"), ModuleKind.DOMAIN, (), {"rk": RK}, tuple(classes), tuple(props), tuple(inds))
    return resolve_module_set([m])


# -- random DNF classes over a value grid, for the subsumption oracle -------------------

GRID_PROPS = [ResourceId("gd", n) for n in ("p", "q", "w")]
GRID_BOUNDS = [0, 1, 2, 3]


def random_dnf(rng: random.Random, props=GRID_PROPS) -> Or:
    """At most four disjuncts over at most three properties, bounds on a small grid."""
    conjs = []
    for _ in range(rng.randint(1, 4)):
        atoms = []
        for p in rng.sample(props, rng.randint(1, len(props))):
            for _ in range(rng.randint(1, 2)):
                atoms.append(DataRangeAtom(p, rng.choice(["<=", "<", ">=", ">", "="]), rng.choice(GRID_BOUNDS)))
        conjs.append(And(tuple(atoms)))
    return Or(tuple(conjs))


def tighten(rng: random.Random, dnf: Or) -> Or:
    """A random expression likely (not certain) to be subsumed by ``dnf``."""
    conjs = list(dnf.items)
    rng.shuffle(conjs)
    kept = conjs[:rng.randint(1, len(conjs))]
    out = []
    for c in kept:
        extra = [DataRangeAtom(rng.choice(GRID_PROPS), rng.choice(["<=", ">="]), rng.choice(GRID_BOUNDS))
                 for _ in range(rng.randint(0, 2))]
        out.append(And(tuple(c.items) + tuple(extra)))
    return Or(tuple(out))


def grid_points():
    """Every assignment of the grid properties to a value or to nothing."""
    values = [None] + [Decimal(v) / 2 for v in range(-1, 2 * max(GRID_BOUNDS) + 2)]
    import itertools
    return list(itertools.product(values, repeat=len(GRID_PROPS)))


def grid_kb(pairs: list[tuple[Or, Or]]):
    """One KB with classes ``gd:G{k}`` (general) and ``gd:S{k}`` (specific) per pair."""
    classes = []
    for k, (g, s) in enumerate(pairs):
        classes.append(ClassDef(ResourceId("gd", f"G{k}"), equivalent=g))
        classes.append(ClassDef(ResourceId("gd", f"S{k}"), equivalent=s))
    props = tuple(PropertyDef(p, PropertyKind.DATA) for p in GRID_PROPS)
    m = Module(ResourceId("gd", "m"), ModuleKind.DOMAIN, (), {"gd": "https://example.org/gd/"}, tuple(classes), props)
    return resolve_module_set([m])
