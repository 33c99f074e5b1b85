from __future__ import annotations

from decimal import Decimal

import pytest
from hypothesis import given, strategies as st

from smartkb import content
from smartkb.axioms import Axiom, axioms_to_module, sort_axioms
from smartkb.errors import TemplateError
from smartkb.model import ClassAtom, DataRangeAtom, ModuleKind, ResourceId, SourceRef
from smartkb.tables import (
    InvalidRow,
    PTTableRow,
    ingest_pt_table,
    pt_table_axioms,
    read_pt_csv,
    write_pt_csv,
)
from smartkb.templates import (
    as_library,
    expand,
    parse_templates,
    read_rows,
    read_template_file,
    validate_template,
    write_template,
)

R = ResourceId.parse


@pytest.fixture(scope="module")
def lib(fixtures_dir):
    return as_library(read_template_file(fixtures_dir / "templates" / "pt.skt"))


@pytest.fixture(scope="module")
def csv_text(fixtures_dir):
    return (fixtures_dir / "tables" / "mg22-cl150.csv").read_text(encoding="utf-8")


def codes(exc_info) -> list[str]:
    return exc_info.value.codes


# -- PT tables ------------------------------------------------------------------------

class TestPTRows:
    def test_variant_aliases(self):
        assert PTTableRow("CL150", "A", "19", "38").variant == "A-Standard"
        assert PTTableRow("CL150", "B-Special", "19", "38").variant == "B-Special"

    @pytest.mark.parametrize("args", [("CL 150", "A", 1, 1), ("CL150", "C", 1, 1), ("CL150", "A", 0, 1),
                                      ("CL150", "A", 1, 2001), ("CL150", "A", "x", 1)])
    def test_invalid(self, args):
        with pytest.raises(InvalidRow):
            PTTableRow(*args)

    def test_csv_round_trip(self, csv_text):
        rows = read_pt_csv(csv_text)
        assert len(rows) == 28
        assert write_pt_csv(rows) == csv_text

    def test_bad_header_and_field_count(self):
        with pytest.raises(InvalidRow, match="header"):
            read_pt_csv("a,b,c,d\n")
        with pytest.raises(InvalidRow, match="line 2"):
            read_pt_csv("rating,variant,max_pressure_barg,max_temp_degC\nCL150,A,19\n")

    def test_ingest_reproduces_shipped_module(self, csv_text):
        m = ingest_pt_table(read_pt_csv(csv_text), content.MG22_VALVE, content.B1634_PT,
                            imports=(content.MG22_MODULE, content.PC_MODULE),
                            prefixes=content.vocab.prefixes("lis", "pc", "b1634"), group_label=content.MG22_LABEL)
        assert m == content.build_pt_group_2_2_cl150()

    def test_naming_and_shared_limit_classes(self):
        rows = [PTTableRow("CL150", "A", "1.4", "538"), PTTableRow("CL150", "A", "1.4", "550"),
                PTTableRow("CL300", "B", "1.4", "538")]
        m = ingest_pt_table(rows, R("b1634:G"), SourceRef("S", "1", "T"))
        ids = {c.id.local for c in m.classes}
        assert ids == {"WP_le_1.4_barG", "WT_le_538_degC", "WT_le_550_degC", "G_CL150_A-Standard",
                       "G_CL300_B-Special", "CL150PressureRatedObject", "CL300PressureRatedObject"}
        rc = {c.id.local: c for c in m.classes}["G_CL150_A-Standard"]
        assert len(rc.equivalent.items) == 2
        assert m.kind is ModuleKind.STANDARD and m.id == R("b1634:G-pt")

    def test_empty_table(self):
        with pytest.raises(InvalidRow):
            pt_table_axioms([], R("b1634:G"), SourceRef("S", "1", "T"))

    @given(st.lists(st.tuples(st.integers(1, 300), st.integers(-50, 900)), min_size=1, max_size=8))
    def test_row_order_irrelevant(self, pairs):
        rows = [PTTableRow("CL150", "A", Decimal(p) / 10, t) for p, t in pairs]
        ref = SourceRef("S", "1", "T")
        assert pt_table_axioms(rows, R("g:G"), ref) == pt_table_axioms(rows[::-1] + rows, R("g:G"), ref)


# -- templates ------------------------------------------------------------------------

def test_template_route_equals_ingest_route(lib, csv_text):
    t = lib[R("tpl:mg22-pt-row")]
    via_template = expand(t, read_rows(csv_text, t), lib)
    via_ingest = pt_table_axioms(read_pt_csv(csv_text), content.MG22_VALVE, content.B1634_PT, content.MG22_LABEL)
    assert via_template == via_ingest


def test_single_row_expansion(lib):
    axioms = expand(R("tpl:mg22-pt-row"), [("CL150", "A-Standard", "18.40", "50")], lib)
    wp = R("b1634:WP_le_18.4_barG")
    assert Axiom("equivalent-disjunct", (wp, (DataRangeAtom(content.vocab.MAX_DESIGN_PRESSURE, "<=", "18.4"),))) in axioms
    rc = R("b1634:MaterialGroup2_2Valve_CL150_A-Standard")
    assert Axiom("equivalent-disjunct", (rc, (ClassAtom(wp), ClassAtom(R("b1634:WT_le_50_degC"))))) in axioms
    assert axioms == sort_axioms(axioms)


def test_expanded_axioms_build_a_module(lib, csv_text):
    t = lib[R("tpl:mg22-pt-row")]
    m = axioms_to_module(expand(t, read_rows(csv_text, t), lib), id=content.MG22_PT_MODULE,
                         kind="standard", imports=(content.MG22_MODULE, content.PC_MODULE),
                         prefixes=content.vocab.prefixes("lis", "pc", "b1634"), version="2020")
    assert m == content.build_pt_group_2_2_cl150()


def test_optional_argument_skips_schema(lib):
    t = lib[R("tpl:valve-part")]
    with_comment = expand(t, [("vc:Valve", "vc:hasValveBody", "vc:ValveBody", "one body")], lib)
    without = expand(t, [{"valve": "vc:Valve", "part": "vc:hasValveBody", "filler": "vc:ValveBody"}], lib)
    assert sorted(a.kind for a in with_comment) == ["annotation", "restriction"]
    assert [a.kind for a in without] == ["restriction"]


def test_library_validates_and_round_trips(lib):
    for t in lib.values():
        assert validate_template(t, lib) == []
        again = parse_templates(write_template(t))[0]
        assert (again.id, again.parameters, len(again.body)) == (t.id, t.parameters, len(t.body))


SIMPLE = """template tpl:a
  param ?c class-id
  param ?n decimal
  class ?c
  restriction ?c [ex:p <= ?n]
"""


class TestTemplateErrors:
    def lib(self, text):
        return as_library(parse_templates(text))

    def test_kind_mismatch(self):
        with pytest.raises(TemplateError) as e:
            expand(R("tpl:a"), [("ex:C", "lots")], self.lib(SIMPLE))
        assert codes(e) == ["kind-mismatch"]

    def test_arity(self):
        with pytest.raises(TemplateError) as e:
            expand(R("tpl:a"), [("ex:C",)], self.lib(SIMPLE))
        assert codes(e) == ["arity-mismatch"]
        with pytest.raises(TemplateError) as e:
            expand(R("tpl:a"), [{"c": "ex:C"}], self.lib(SIMPLE))
        assert codes(e) == ["arity-mismatch"]

    def test_unbound_variable(self):
        lib = self.lib("template tpl:b\n  param ?c class-id\n  subclass-of ?c ?d\n")
        with pytest.raises(TemplateError) as e:
            expand(R("tpl:b"), [("ex:C",)], lib)
        assert codes(e) == ["unbound-variable"]
        assert [d.code for d in validate_template(lib[R("tpl:b")], lib)] == ["unbound-variable"]

    def test_unknown_template(self):
        lib = self.lib("template tpl:b\n  param ?c class-id\n  call tpl:zz(?c)\n")
        with pytest.raises(TemplateError) as e:
            expand(R("tpl:b"), [("ex:C",)], lib)
        assert codes(e) == ["unknown-template"]

    def test_cycle(self):
        lib = self.lib("template tpl:b\n  param ?c class-id\n  call tpl:d(?c)\n"
                       "template tpl:d\n  param ?c class-id\n  call tpl:b(?c)\n")
        with pytest.raises(TemplateError) as e:
            expand(R("tpl:b"), [("ex:C",)], lib)
        assert codes(e) == ["cycle-detected"]
        assert "cycle-detected" in [d.code for d in validate_template(lib[R("tpl:b")], lib)]

    def test_nested_calls(self):
        lib = self.lib(SIMPLE + "template tpl:b\n  param ?c class-id\n  call tpl:a(?c, 7.50)\n"
                       "template tpl:c\n  param ?c class-id\n  call tpl:b(?c)\n")
        out = expand(R("tpl:c"), [("ex:C",)], lib)
        assert "7.5" in str(out[-1].args)

    def test_parse_errors(self):
        with pytest.raises(TemplateError):
            parse_templates("template tpl:a\n  class ?c\n  param ?c class-id\n")
        with pytest.raises(TemplateError):
            parse_templates("template tpl:a\ntemplate tpl:a\n")
        with pytest.raises(TemplateError):
            parse_templates("  param ?c class-id\n")

    def test_row_header_must_match(self):
        t = self.lib(SIMPLE)[R("tpl:a")]
        with pytest.raises(TemplateError):
            read_rows("c,x\nex:C,1\n", t)

    @given(st.decimals(min_value=0, max_value=999, places=2, allow_nan=False))
    def test_decimal_interpolation_is_canonical(self, v):
        out = expand(R("tpl:a"), [("ex:C", str(v))], self.lib(SIMPLE))
        restriction = [a for a in out if a.kind == "restriction"][0]
        assert restriction.args[1].value == v
