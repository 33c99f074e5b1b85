from __future__ import annotations

import dataclasses
from decimal import Decimal

import pytest
from hypothesis import given, strategies as st

from smartkb import content as c, vocab
from smartkb.errors import ParseError
from smartkb.model import ResourceId
from smartkb.reasoner import Reasoner
from smartkb.shapes import DataConstraint, ObjectConstraint, Shape, parse_shapes, validate_shapes, write_shapes

SHAPES = c.build_shapes()


def test_fixture_file_is_the_canonical_text(fixtures_dir):
    text = (fixtures_dir / "shapes" / "lines.skshape").read_text(encoding="utf-8")
    assert parse_shapes(text) == SHAPES
    assert write_shapes(SHAPES, c.shape_prefixes()) == text


def test_shipped_lines_conform(kb, shapes):
    assert validate_shapes(kb, shapes) == []


def _deletions(ind):
    for k in range(len(ind.object_assertions)):
        yield f"object:{ind.object_assertions[k][0]}", dataclasses.replace(
            ind, object_assertions=ind.object_assertions[:k] + ind.object_assertions[k + 1:])
    for k in range(len(ind.data_assertions)):
        yield f"data:{ind.data_assertions[k][0]}", dataclasses.replace(
            ind, data_assertions=ind.data_assertions[:k] + ind.data_assertions[k + 1:])


def _cases():
    kb_inds = {i.id: i for m in c.build_all() for i in m.individuals}
    for ident in (c.AREA_LINE_63, c.PROCESS_LINE_63):
        for name, ind in _deletions(kb_inds[ident]):
            yield pytest.param(ind, id=f"{ident.local}-{name}")


@pytest.mark.parametrize("edited", list(_cases()))
def test_each_single_field_deletion_gives_one_violation(kb, edited):
    r = Reasoner(kb, [edited])
    found = validate_shapes(kb, SHAPES, reasoner=r)
    assert len(found) == 1
    assert found[0].individual == edited.id
    assert found[0].kind in ("missing-link", "missing-value")


def test_deletion_cases_cover_every_constraint():
    assert len(list(_cases())) == sum(len(s.constraints) for s in SHAPES)


def test_out_of_range_value(kb):
    line = kb.individuals[c.PROCESS_LINE_63]
    data = tuple((p, Decimal("99999") if p == c.VELOCITY else v) for p, v in line.data_assertions)
    r = Reasoner(kb, [dataclasses.replace(line, data_assertions=data)])
    (v,) = validate_shapes(kb, SHAPES, reasoner=r)
    assert v.kind == "out-of-range" and v.observed == "99999 outside [0, 50]"


def test_link_to_wrong_class_is_missing(kb):
    area = kb.individuals[c.AREA_LINE_63]
    links = tuple((p, c.P_63 if p == vocab.RESIDES_IN else t) for p, t in area.object_assertions)
    r = Reasoner(kb, [dataclasses.replace(area, object_assertions=links)])
    (v,) = validate_shapes(kb, SHAPES, reasoner=r)
    assert v.kind == "missing-link" and str(c.P_63) in v.observed


def test_untargeted_individuals_are_ignored(kb):
    assert validate_shapes(kb, SHAPES, individuals=[c.P_63, c.OMS]) == []


def test_violation_text_and_dict(kb):
    line = kb.individuals[c.PROCESS_LINE_63]
    r = Reasoner(kb, [dataclasses.replace(line, data_assertions=())])
    v = validate_shapes(kb, SHAPES, reasoner=r)[0]
    assert str(v) == f"{v.individual}: shape process-line: {v.constraint}: missing-value (no value)"
    assert v.as_dict() == {"individual": str(c.PROCESS_LINE_63), "shape": "process-line",
                           "constraint": v.constraint, "kind": "missing-value", "observed": "no value"}


@pytest.mark.parametrize("text,code", [
    ("shape a\n  target pc:X\n  data pc:p xsd:decimal 5 1\n", "invalid-declaration"),
    ("shape a\n  object pc:p pc:X min 1\n", "invalid-declaration"),
    ("shape a\n  target pc:X\n  frob\n", "syntax-error"),
])
def test_malformed_shapes(text, code):
    with pytest.raises(ParseError) as exc:
        parse_shapes("prefix pc <https://w3id.org/smartkb/piping-core/>\n" + text)
    assert code in exc.value.codes


_names = st.text("abcdefghij-", min_size=1, max_size=8).filter(lambda s: s[0] != "-")
_ids = st.sampled_from([ResourceId("pc", n) for n in ("A", "B", "p", "q", "r")])
_dec = st.decimals(min_value=-1000, max_value=1000, places=2, allow_nan=False)


@st.composite
def shape_lists(draw):
    out = []
    for name in draw(st.lists(_names, max_size=3, unique=True)):
        objects = draw(st.lists(st.builds(ObjectConstraint, _ids, _ids, st.integers(1, 3)), max_size=3))
        data = []
        for p in draw(st.lists(_ids, max_size=3, unique=True)):
            lo, hi = sorted((draw(_dec), draw(_dec)))
            data.append(DataConstraint(p, lo, hi))
        out.append(Shape(name, draw(_ids), tuple(objects), tuple(data)))
    return out


@given(shape_lists())
def test_write_then_parse_is_identity(shapes):
    text = write_shapes(shapes, {"pc": "https://w3id.org/smartkb/piping-core/"})
    assert parse_shapes(text) == shapes
    assert write_shapes(parse_shapes(text), {"pc": "https://w3id.org/smartkb/piping-core/"}) == text
