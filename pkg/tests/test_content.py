from __future__ import annotations

import pytest

from smartkb import content as c, vocab
from smartkb.kb import lint_provenance, resolve_module_set
from smartkb.model import ClassAtom, Individual, ModuleKind, ResourceId, UniversalRestriction
from smartkb.reasoner import Reasoner, instance_of, subsumes

GROUP_2_2_LABELS = [
    "ASTM A 312 Grade TP316", "ASTM A 358 Grade 316", "ASTM A 182 Grade F316", "ASTM A 240 Grade 316",
    "ASTM A 351 Grade CF8M", "ASTM A 182 Grade F316H", "ASTM A 182 Grade F317", "ASTM A 240 Grade 316H",
    "ASTM A 240 Grade 317", "ASTM A 312 Grade TP316H", "ASTM A 312 Grade TP317", "ASTM A 351 Grade CF3A",
    "ASTM A 351 Grade CF8A", "ASTM A 351 Grade CG8M", "ASTM A 376 Grade TP316", "ASTM A 376 Grade TP316H",
    "ASTM A 351 Grade CF10M", "ASTM A 351 Grade CG3M", "ASTM A 430 Gr. FP316", "ASTM A 430 Gr. FP316H",
    "ASTM A 479 Grade 316H",
]


def group_members(kb) -> list[ResourceId]:
    eq = kb.classes[c.MG22_OBJECT].equivalent
    assert all(len(conj.items) == 1 and isinstance(conj.items[0], ClassAtom) for conj in eq.items)
    return [conj.items[0].cls for conj in eq.items]


def test_group_equivalence_has_exactly_the_21_grades(kb):
    members = group_members(kb)
    assert len(members) == 21 == len(set(members))
    assert sorted(kb.label(m) for m in members) == sorted(f"{x} Compliant Object" for x in GROUP_2_2_LABELS)


def test_grades_outside_the_group_exist_but_are_not_members(kb):
    members = set(group_members(kb))
    for g in c.EXTRA_GRADES:
        assert g.class_id in kb.classes and g.class_id not in members


def _valve(body_grade: ResourceId) -> list[Individual]:
    v, b = ResourceId("x", "v"), ResourceId("x", "v-body")
    return [Individual(v, (c.FLOATING,), ((vocab.HAS_VALVE_BODY, b),)), Individual(b, (c.VALVE_BODY, body_grade))]


@pytest.mark.parametrize("g", c.GROUP_2_2_GRADES, ids=lambda g: g.class_id.local)
def test_every_member_grade_makes_a_group_valve(kb, g):
    assert instance_of(kb, ResourceId("x", "v"), c.MG22_VALVE, overlay=_valve(g.class_id)).holds


@pytest.mark.parametrize("g", c.EXTRA_GRADES, ids=lambda g: g.class_id.local)
def test_non_member_body_fails_the_only_restriction(kb, g):
    v = instance_of(kb, ResourceId("x", "v"), c.MG22_VALVE, overlay=_valve(g.class_id))
    assert not v.holds
    failed = [n for n in v.explanation.walk() if n.kind == "universal" and not n.holds]
    assert failed and failed[0].atom == UniversalRestriction(vocab.HAS_VALVE_BODY, c.MG22_OBJECT)


def test_unknown_grade_is_rejected_when_building_the_group():
    from smartkb.errors import ResolutionError
    from smartkb.content import MaterialGrade
    bogus = MaterialGrade("ASTM A 999", "X", ResourceId("astm", "A999_X"))
    with pytest.raises(ResolutionError) as exc:
        c.build_material_group_2_2(c.GROUP_2_2_GRADES + (bogus,))
    assert exc.value.codes == ["dangling-reference"]


def test_shipped_content_lints_clean(kb):
    assert lint_provenance(kb, "standard") == []


def test_module_layers(kb):
    kinds = {m.id: m.kind for m in kb.modules.values()}
    assert kinds[c.LIS_MODULE] == ModuleKind.TOP_LEVEL
    assert kinds[c.MG22_PT_MODULE] == ModuleKind.STANDARD
    assert kinds[c.VALVE_COLLECT] == ModuleKind.COLLECT
    assert kinds[c.TR_MODULE] == ModuleKind.COMPANY
    assert kinds[c.EQ_MODULE] == ModuleKind.ASSET


def test_every_module_has_a_fixture_file_name():
    assert {m.id for m in c.build_all()} == set(c.FILE_NAMES)


def test_pt_class_naming(kb):
    assert c.MG22_CL150 == ResourceId("b1634", "MaterialGroup2_2Valve_CL150_A-Standard")
    assert kb.label(ResourceId("b1634", "WP_le_18.4_barG")) == "WP <= 18.4 barG"
    assert subsumes(kb, vocab.rated_object("CL150"), c.MG22_CL150)


def test_floating_and_trunnion_are_disjoint(kb):
    assert (c.FLOATING, c.TRUNNION) in kb.disjoint_pairs or (c.TRUNNION, c.FLOATING) in kb.disjoint_pairs


def test_vds_needs_exactly_one_body(kb):
    r = Reasoner(kb)
    assert r.member(c.OMS, c.BCAS302R.class_id)
    two = Individual(ResourceId("x", "two"), (c.FLOATING, c.FULL_BORE, c.DN80, c.CL150, c.RF, c.B1610_NPS3),
                     ((vocab.HAS_VALVE_BODY, ResourceId("eq", "OMS-SALERI-S7100SF-body")),
                      (vocab.HAS_VALVE_BODY, ResourceId("eq", "DAFRAM-F1FS-body"))))
    assert not instance_of(kb, two, c.BCAS302R.class_id).holds


def test_building_twice_gives_equal_modules():
    assert c.build_all() == c.build_all()
    resolve_module_set(c.build_all())
