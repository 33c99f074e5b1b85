from __future__ import annotations

import random
from decimal import Decimal

import pytest
from hypothesis import given, settings, strategies as st

from smartkb import content as c, vocab
from smartkb.errors import UnknownResourceError
from smartkb.model import (
    And,
    ClassAtom,
    DataRangeAtom,
    Individual,
    Or,
    ResourceId,
)
from smartkb.reasoner import (
    Reasoner,
    allowable_pressure_at,
    check_consistency,
    classify,
    classify_many,
    instance_of,
    missing_assertions,
    pt_disjuncts,
    replay,
    subsumes,
    unfold,
)

from generators import (
    GRID_PROPS,
    generate_valves,
    grid_kb,
    grid_points,
    random_dnf,
    random_kbs,
    tighten,
)
from oracles import CL150_PAIRS, eval_dnf, fixpoint_types, pt_allows, pt_ceiling


P, T = vocab.MAX_DESIGN_PRESSURE, vocab.MAX_DESIGN_TEMPERATURE


def point(p, t, ident="x:pt") -> Individual:
    data = tuple((k, Decimal(v)) for k, v in ((P, p), (T, t)) if v is not None)
    return Individual(ResourceId("x", ident.split(":")[1]), data_assertions=data)


# -- least model against the bottom-up oracle -------------------------------------------

def test_inferred_types_match_fixpoint_on_shipped_kb(kb):
    extra = generate_valves(300, seed=3)
    want = fixpoint_types(kb, extra)
    r = Reasoner(kb, extra)
    for ident in list(kb.individuals) + [i.id for i in extra]:
        assert r.inferred_types(ident) == want[ident], ident


@settings(max_examples=150)
@given(random_kbs())
def test_inferred_types_match_fixpoint_on_random_kbs(rkb):
    want = fixpoint_types(rkb)
    r = Reasoner(rkb)
    for ident in rkb.individuals:
        assert r.inferred_types(ident) == want[ident]


@settings(max_examples=60)
@given(random_kbs())
def test_member_is_order_independent(rkb):
    idents = list(rkb.individuals)
    forward = Reasoner(rkb)
    a = {i: forward.inferred_types(i) for i in idents}
    backward = Reasoner(rkb)
    b = {i: backward.inferred_types(i) for i in reversed(idents)}
    assert a == b


@settings(max_examples=60)
@given(random_kbs())
def test_explanations_replay_on_random_kbs(rkb):
    r = Reasoner(rkb)
    for ident in rkb.individuals:
        for cls in sorted(rkb.classes):
            e = r.explain_member(ident, cls)
            assert e.holds == r.member(ident, cls)
            assert replay(rkb, e)


# -- PT ratings -----------------------------------------------------------------------------

def test_pt_disjuncts_are_the_table_pairs(kb):
    got = sorted((p.hi, t.hi) for p, t in pt_disjuncts(kb, c.MG22_CL150))
    assert got == sorted(CL150_PAIRS)


@pytest.mark.parametrize("p,t", CL150_PAIRS)
def test_allowable_pressure_at_each_row(kb, p, t):
    # the ceiling at a row temperature is that row's pressure (pressures fall with temperature)
    assert allowable_pressure_at(kb, c.MG22_CL150, t) == p
    assert pt_ceiling(CL150_PAIRS, t) == p


@pytest.mark.parametrize("t,p", [("38", "19"), ("50", "18.4"), ("300", "10.2"), ("-29", "19"),
                                 ("60", "16.2"), ("816", "1.0")])
def test_allowable_pressure_examples(kb, t, p):
    assert allowable_pressure_at(kb, c.MG22_CL150, t) == Decimal(p)


def test_allowable_pressure_above_table_is_none(kb):
    assert allowable_pressure_at(kb, c.MG22_CL150, 817) is None
    assert allowable_pressure_at(kb, c.MG22_CL150, "816.1") is None


@pytest.mark.parametrize("p,t,ok", [("18.4", "50", True), ("18.5", "50", False), ("13", "60", True),
                                    ("19", "38", True), ("19.1", "38", False), ("1.0", "816", True),
                                    ("0", "817", False), (None, "50", False), ("5", None, False)])
def test_pt_boundaries(kb, p, t, ok):
    assert instance_of(kb, point(p, t), c.MG22_CL150).holds is ok


def test_60_degrees_is_carried_by_the_100_degree_disjunct(kb):
    from smartkb.compliance import _upper_key
    r = Reasoner(kb, [point("13", "60")], disjunct_order=_upper_key(kb, T))
    e = r.explain_member(ResourceId("x", "pt"), c.MG22_CL150)
    used = {n.atom.value for n in e.walk() if n.kind == "data" and n.holds and n.atom.property == T}
    assert used == {Decimal("100")}


def test_grid_agrees_with_brute_force(kb):
    # a coarse cut of the full grid; the acceptance test runs every point
    pts = [point(Decimal(p) / 10, t, f"x:g{p}_{t}") for p in range(0, 201, 3) for t in range(0, 851, 7)]
    r = Reasoner(kb, pts)
    for ind in pts:
        d = dict(ind.data_assertions)
        assert r.member(ind.id, c.MG22_CL150) == pt_allows(CL150_PAIRS, d[P], d[T]), d


@given(st.integers(0, 250), st.integers(-50, 900), st.integers(0, 30), st.integers(0, 60))
def test_pt_membership_is_monotone(kb, p, t, dp, dt):
    # lowering pressure or temperature never loses a rating
    hi = point(Decimal(p) / 10, t)
    lo = point(Decimal(max(p - dp, 0)) / 10, t - dt)
    if instance_of(kb, hi, c.MG22_CL150, explain=False).holds:
        assert instance_of(kb, lo, c.MG22_CL150, explain=False).holds


# -- subsumption -------------------------------------------------------------------------------

def test_pressure_limits_nest(kb):
    wp162 = ResourceId("b1634", "WP_le_16.2_barG")
    wp137 = ResourceId("b1634", "WP_le_13.7_barG")
    assert wp162 in kb.classes and wp137 in kb.classes
    assert subsumes(kb, wp162, wp137)
    assert not subsumes(kb, wp137, wp162)


def test_told_and_defined_subsumption(kb):
    assert subsumes(kb, c.BALL_VALVE, c.FLOATING)
    assert subsumes(kb, vocab.VALVE, c.TRUNNION)
    assert subsumes(kb, c.MG22_VALVE, c.MG22_CL150)
    assert not subsumes(kb, c.FLOATING, c.BALL_VALVE)
    assert not subsumes(kb, c.FLOATING, c.TRUNNION)


def test_subsumes_rejects_unknown_class(kb):
    with pytest.raises(UnknownResourceError):
        subsumes(kb, ResourceId("x", "Nope"), c.FLOATING)


def test_structural_subsumption_is_sound_on_random_classes():
    rng = random.Random(7)
    pairs = []
    for _ in range(250):
        g = random_dnf(rng)
        pairs.append((g, tighten(rng, g) if rng.random() < 0.6 else random_dnf(rng)))
    gkb = grid_kb(pairs)
    pts = [({}, {p: v for p, v in zip(GRID_PROPS, vals) if v is not None}) for vals in grid_points()]
    agree = incomplete = 0
    for k, (g, s) in enumerate(pairs):
        for gen, spec, gd, sd in ((f"G{k}", f"S{k}", g, s), (f"S{k}", f"G{k}", s, g)):
            structural = subsumes(gkb, ResourceId("gd", gen), ResourceId("gd", spec))
            oracle = all(eval_dnf(gd, set(), data) for types, data in pts if eval_dnf(sd, set(), data))
            if structural:
                assert oracle, (gen, spec)
            if structural == oracle:
                agree += 1
            else:
                incomplete += 1
    assert agree + incomplete == 500
    assert agree > 400


def test_union_coverage_is_a_known_gap():
    # x <= 2 is covered by (x <= 1) or (x > 1) but by neither disjunct alone
    x = GRID_PROPS[0]
    general = Or((And((DataRangeAtom(x, "<=", 1),)), And((DataRangeAtom(x, ">", 1),))))
    specific = Or((And((DataRangeAtom(x, "<=", 2),)),))
    gkb = grid_kb([(general, specific)])
    assert not subsumes(gkb, ResourceId("gd", "G0"), ResourceId("gd", "S0"))


def test_unfold_replaces_defined_classes(kb):
    out = unfold(kb, Or((And((ClassAtom(c.MG22_CL150),)),)))
    assert len(out.items) == 28
    assert all(isinstance(a, DataRangeAtom) for conj in out.items for a in conj.items)


# -- batch and consistency ------------------------------------------------------------------

def test_classify_many_parallel_equals_sequential(kb):
    valves = generate_valves(400, seed=11)
    seq = classify_many(kb, valves, workers=1)
    par = classify_many(kb, valves, workers=2, chunk_size=90)
    assert [r.individual for r in par] == [i.id for i in valves]
    assert seq == par


def test_classify_many_matches_single_classify(kb):
    valves = generate_valves(40, seed=5)
    many = {r.individual: r.inferred_types for r in classify_many(kb, valves)}
    for v in valves[:10]:
        assert classify(kb, v.id, overlay=valves, explain=False).inferred_types == many[v.id]


def test_classify_justifications_replay(kb):
    res = classify(kb, c.OMS)
    assert c.BALL_VALVE in res.inferred_types
    for cls, e in res.justification.items():
        assert e.holds and replay(kb, e), cls


def test_shipped_kb_is_consistent(kb):
    assert check_consistency(kb) == []


def test_disjoint_types_clash(kb):
    bad = Individual(ResourceId("x", "both"), (c.FLOATING, c.TRUNNION))
    clashes = check_consistency(kb, [bad])
    assert [cl.kind for cl in clashes] == ["disjoint"]
    assert set(clashes[0].classes) == {c.FLOATING, c.TRUNNION}
    assert replay(kb, clashes[0].explanation, [bad])


def test_missing_body_is_reported(kb):
    bare = Individual(ResourceId("x", "bare"), (c.FLOATING,))
    r = Reasoner(kb, [bare])
    missing = missing_assertions(r, bare.id, c.BCAS302R.class_id)
    assert [(m[1].property, m[2]) for m in missing] == [(vocab.HAS_VALVE_BODY, 0)]


def test_unknown_class_is_an_error(kb):
    with pytest.raises(UnknownResourceError):
        instance_of(kb, c.OMS, ResourceId("x", "Nope"))
