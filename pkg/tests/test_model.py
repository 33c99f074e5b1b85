from __future__ import annotations

import pickle
from decimal import Decimal

import pytest
from hypothesis import given, strategies as st

from smartkb.errors import ModelError, NormalizationOverflow
from smartkb.model import (
    MAX_DEPTH,
    And,
    CardinalityRestriction,
    ClassAtom,
    ClassDef,
    DataRangeAtom,
    Individual,
    Interval,
    Module,
    ModuleKind,
    Or,
    PropertyDef,
    PropertyKind,
    ResourceId,
    SourceRef,
    UniversalRestriction,
    format_decimal,
    is_dnf,
    normalize,
    to_decimal,
)

R = ResourceId.parse
P, T = R("x:p"), R("x:t")


class TestResourceId:
    def test_parse_and_str(self):
        r = R("b1634:WP_le_18.4_barG")
        assert (r.namespace, r.local) == ("b1634", "WP_le_18.4_barG")
        assert str(r) == "b1634:WP_le_18.4_barG"

    @pytest.mark.parametrize("bad", ["nocolon", ":x", "x:", "1a:b", "a:b c", "a:.b"])
    def test_rejects_malformed(self, bad):
        with pytest.raises(ModelError):
            R(bad)

    def test_equality_hash_and_order(self):
        a, b = ResourceId("a", "x"), ResourceId("a", "x")
        assert a == b and hash(a) == hash(b) and a is not b
        assert ResourceId("a", "x") < ResourceId("a", "y") < ResourceId("b", "a")
        assert a != "a:x"

    def test_pickle_recomputes_hash(self):
        a = R("vc:Valve")
        b = pickle.loads(pickle.dumps(a))
        assert b == a and hash(b) == hash(a)
        assert {b: 1}[a] == 1


class TestDecimal:
    @pytest.mark.parametrize("text,canon", [("19.0", "19"), ("18.40", "18.4"), ("-0", "0"), ("1E+2", "100"),
                                            ("0.010", "0.01"), (".5", "0.5")])
    def test_canonical_text(self, text, canon):
        assert format_decimal(Decimal(text)) == canon

    def test_float_goes_through_repr(self):
        assert to_decimal(18.4) == Decimal("18.4")

    @pytest.mark.parametrize("bad", ["abc", "nan", "inf", True])
    def test_rejects(self, bad):
        with pytest.raises(ModelError):
            to_decimal(bad)

    @given(st.decimals(allow_nan=False, allow_infinity=False, places=3, min_value=-10**6, max_value=10**6))
    def test_format_round_trips(self, d):
        assert Decimal(format_decimal(d)) == d


class TestNormalize:
    def test_distributes_and_sorts(self):
        a, b, c = (ClassAtom(R(f"x:{n}")) for n in "abc")
        out = normalize(And((Or((b, a)), c)))
        assert out == Or((And((a, c)), And((b, c))))
        assert is_dnf(out)

    def test_merges_ranges_on_one_property(self):
        out = normalize(And((DataRangeAtom(P, "<=", 20), DataRangeAtom(P, "<=", "18.4"), DataRangeAtom(P, ">", 1))))
        assert out.items[0].items == (DataRangeAtom(P, "<=", "18.4"), DataRangeAtom(P, ">", 1))

    def test_point_interval_becomes_equality(self):
        out = normalize(And((DataRangeAtom(P, "<=", 5), DataRangeAtom(P, ">=", 5))))
        assert out.items[0].items == (DataRangeAtom(P, "=", 5),)

    def test_empty_range_drops_disjunct(self):
        empty = And((DataRangeAtom(P, "<", 1), DataRangeAtom(P, ">", 1)))
        assert normalize(empty) == Or(())
        assert normalize(Or((empty, ClassAtom(R("x:a"))))) == Or((And((ClassAtom(R("x:a")),)),))

    def test_duplicate_disjuncts_collapse(self):
        a = ClassAtom(R("x:a"))
        assert normalize(Or((a, a, And((a, a))))) == Or((And((a,)),))

    def test_depth_limit(self):
        e = ClassAtom(R("x:a"))
        for _ in range(MAX_DEPTH + 1):
            e = And((e,))
        with pytest.raises(NormalizationOverflow):
            normalize(e)

    def test_disjunct_limit(self):
        pairs = [Or((ClassAtom(R(f"x:a{i}")), ClassAtom(R(f"x:b{i}")))) for i in range(13)]
        with pytest.raises(NormalizationOverflow):
            normalize(And(tuple(pairs)))

    def test_unknown_comparator(self):
        with pytest.raises(ModelError):
            DataRangeAtom(P, "!=", 1)

    def test_cardinality_validation(self):
        with pytest.raises(ModelError):
            CardinalityRestriction(P, "exactly", -1)
        with pytest.raises(ModelError):
            CardinalityRestriction(P, "some", 1)
        assert CardinalityRestriction(P, "max", 1).accepts(0)


class TestInterval:
    def test_contains_interval(self):
        wide = Interval.of([DataRangeAtom(P, "<=", "16.2")])
        narrow = Interval.of([DataRangeAtom(P, "<=", "13.7")])
        assert wide.contains_interval(narrow) and not narrow.contains_interval(wide)

    def test_open_closed_boundary(self):
        closed = Interval.of([DataRangeAtom(P, "<=", 5)])
        opened = Interval.of([DataRangeAtom(P, "<", 5)])
        assert closed.contains_interval(opened) and not opened.contains_interval(closed)
        assert closed.contains(Decimal(5)) and not opened.contains(Decimal(5))


# -- hypothesis: normalization is idempotent and meaning-preserving ---------------------

_names = st.sampled_from(["a", "b", "c"])
_atoms = st.one_of(
    _names.map(lambda n: ClassAtom(R(f"x:{n}"))),
    st.builds(lambda p, c, v: DataRangeAtom(R(f"x:{p}"), c, v), st.sampled_from("pq"),
              st.sampled_from(["<=", "<", ">=", ">", "="]), st.integers(0, 4)),
)
_exprs = st.recursive(_atoms, lambda inner: st.one_of(
    st.lists(inner, min_size=1, max_size=3).map(lambda xs: And(tuple(xs))),
    st.lists(inner, min_size=1, max_size=3).map(lambda xs: Or(tuple(xs))),
), max_leaves=10)


def _eval(expr, types: set, data: dict) -> bool:
    if isinstance(expr, ClassAtom):
        return expr.cls in types
    if isinstance(expr, DataRangeAtom):
        v = data.get(expr.property)
        return v is not None and expr.holds(v)
    if isinstance(expr, And):
        return all(_eval(x, types, data) for x in expr.items)
    return any(_eval(x, types, data) for x in expr.items)


@given(_exprs)
def test_normalize_idempotent(expr):
    once = normalize(expr)
    assert normalize(once) == once
    assert is_dnf(once)


@given(_exprs, st.sets(_names), st.dictionaries(st.sampled_from("pq"), st.integers(-1, 5)))
def test_normalize_preserves_meaning(expr, names, raw):
    types = {R(f"x:{n}") for n in names}
    data = {R(f"x:{k}"): Decimal(v) for k, v in raw.items()}
    assert _eval(expr, types, data) == _eval(normalize(expr), types, data)


class TestDeclarations:
    def test_classdef_sorts_and_normalizes(self):
        c = ClassDef(R("x:c"), superclasses=(R("x:b"), R("x:a"), R("x:a")), equivalent=ClassAtom(R("x:a")))
        assert c.superclasses == (R("x:a"), R("x:b"))
        assert isinstance(c.equivalent, Or)

    def test_class_atom_not_a_restriction(self):
        with pytest.raises(ModelError):
            ClassDef(R("x:c"), restrictions=(ClassAtom(R("x:a")),))

    def test_self_disjoint(self):
        with pytest.raises(ModelError):
            ClassDef(R("x:c"), disjoint_with=(R("x:c"),))

    def test_data_property_range(self):
        assert PropertyDef(R("x:p"), PropertyKind.DATA).range == R("xsd:decimal")
        with pytest.raises(ModelError):
            PropertyDef(R("x:p"), PropertyKind.DATA, range=R("xsd:string"))
        with pytest.raises(ModelError):
            PropertyDef(R("x:p"), PropertyKind.OBJECT, range=R("xsd:decimal"))

    def test_data_properties_are_functional(self):
        with pytest.raises(ModelError, match="functional"):
            Individual(R("x:i"), data_assertions=((P, 1), (P, 2)))
        assert Individual(R("x:i"), data_assertions=((P, 1), (P, "1.0"))).values(P) == [Decimal(1)]

    def test_sourceref_requires_text(self):
        with pytest.raises(ModelError):
            SourceRef("ASME B16.34", "", "Table 1")

    def test_module_prefix_checks(self):
        with pytest.raises(ModelError, match="unknown prefix"):
            Module(R("x:m"), ModuleKind.DOMAIN, prefixes={"x": "http://x/"}, classes=(ClassDef(R("y:c")),))
        with pytest.raises(ModelError, match="rebound"):
            Module(R("x:m"), ModuleKind.DOMAIN, prefixes={"x": "http://x/", "owl": "http://other/"})
        with pytest.raises(ModelError, match="duplicate"):
            Module(R("x:m"), ModuleKind.DOMAIN, prefixes={"x": "http://x/"},
                   classes=(ClassDef(R("x:c")), ClassDef(R("x:c"), label="again")))

    def test_module_layers(self):
        layers = [k.layer for k in (ModuleKind.TOP_LEVEL, ModuleKind.DOMAIN_INDEPENDENT, ModuleKind.DOMAIN,
                                    ModuleKind.STANDARD, ModuleKind.COMPANY, ModuleKind.ASSET)]
        assert layers == sorted(layers, reverse=True)
        assert ModuleKind.COLLECT.layer == ModuleKind.STANDARD.layer

    def test_atoms_render(self):
        assert str(UniversalRestriction(P, R("x:c"))) == "x:p only x:c"
        assert str(CardinalityRestriction(P, "exactly", 1, R("x:c"))) == "x:p exactly 1 x:c"
