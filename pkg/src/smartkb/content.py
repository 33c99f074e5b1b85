"""Bundled desk-scale module set for the valve use case.

Builders are pure functions returning :class:`Module` values; ``build_all``
assembles the complete set and ``python3 -m smartkb.content DIR`` writes it
as ``.sksm`` files plus the PT table CSV and a provenance manifest.
"""

from __future__ import annotations

import csv
import io
import sys
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path

from . import vocab
from .errors import ResolutionError
from .kb import all_source_refs
from .model import (
    RDFS_COMMENT,
    XSD_DECIMAL,
    And,
    Annotation,
    CardinalityRestriction,
    ClassAtom,
    ClassDef,
    Individual,
    Module,
    ModuleKind,
    Or,
    PropertyDef,
    PropertyKind,
    ResourceId,
    SourceRef,
    UniversalRestriction,
    merge_modules,
)
from .native import write_module
from .tables import PTTableRow, ingest_pt_table, rating_class, write_pt_csv

N = vocab.ns
OBJ, DATA = PropertyKind.OBJECT, PropertyKind.DATA


def _cls(ident: ResourceId, label: str, *supers: ResourceId, equivalent=None, restrictions=(),
         disjoint=(), comment: str | None = None, source: SourceRef | None = None,
         eq_source: SourceRef | None = None) -> ClassDef:
    notes: list = []
    if comment:
        notes.append(Annotation(RDFS_COMMENT, comment))
    if source is not None:
        notes.append(source)
    if equivalent is not None and eq_source is None:
        eq_source = source
    return ClassDef(ident, label, tuple(supers), equivalent, tuple(disjoint), tuple(restrictions),
                    tuple(notes), (eq_source,) if eq_source is not None and equivalent is not None else ())


def _prop(ident: ResourceId, kind: PropertyKind, label: str, *supers: ResourceId, domain=None, range=None,
          unit: str | None = None) -> PropertyDef:
    if kind is DATA and range is None:
        range = XSD_DECIMAL
    return PropertyDef(ident, kind, label, tuple(supers), domain, range, unit)


def _any_of(*classes: ResourceId) -> Or:
    return Or(tuple(And((ClassAtom(c),)) for c in classes))


def _all_of(*atoms) -> Or:
    return Or((And(tuple(ClassAtom(a) if isinstance(a, ResourceId) else a for a in atoms)),))


# -- top-level and domain modules ---------------------------------------------------

LIS_MODULE = N("lis", "ido-core")
PC_MODULE = N("pc", "piping-core")
VC_MODULE = N("vc", "valve-core")
MC_MODULE = N("mc", "materials-core")

PHYSICAL_OBJECT = N("lis", "PhysicalObject")
PHYSICAL_ARTEFACT = N("lis", "PhysicalArtefact")
FUNCTIONAL_OBJECT = N("lis", "FunctionalObject")
STREAM = N("lis", "Stream")
SITE = N("lis", "Site")


def build_ido_core() -> Module:
    """The small slice of the top-level ontology the other modules align to."""
    classes = [
        _cls(PHYSICAL_OBJECT, "Physical Object"),
        _cls(PHYSICAL_ARTEFACT, "Physical Artefact", PHYSICAL_OBJECT),
        _cls(FUNCTIONAL_OBJECT, "Functional Object"),
        _cls(STREAM, "Stream", PHYSICAL_OBJECT),
        _cls(SITE, "Site", PHYSICAL_OBJECT),
    ]
    props = [
        _prop(N("lis", "hasPart"), OBJ, "has part"),
        _prop(vocab.HAS_ASSEMBLED_PART, OBJ, "has assembled part", N("lis", "hasPart")),
        _prop(vocab.ASSEMBLED_PART_OF, OBJ, "assembled part of"),
        _prop(vocab.CONTAINS, OBJ, "contains"),
        _prop(vocab.RESIDES_IN, OBJ, "resides in"),
    ]
    return Module(LIS_MODULE, ModuleKind.TOP_LEVEL, (), vocab.prefixes("lis"), tuple(classes), tuple(props))


# piping-core -----------------------------------------------------------------------

DN80 = N("pc", "DN80_NPS3")
DN20 = N("pc", "DN20_NPS3_4")
CL150 = vocab.rated_object("CL150")
CL600 = vocab.rated_object("CL600")
FLANGED_END = N("pc", "FlangedEndObject")
AREA_LINE = N("pc", "AreaLine")
PROCESS_LINE = N("pc", "ProcessLine")
PLANT_AREA = N("pc", "PlantArea")
VALVE_TAG = N("pc", "ValveTag")
PLANT_AIR = N("pc", "PlantAirStream")
NITROGEN = N("pc", "NitrogenStream")
POTABLE_WATER = N("pc", "PotableWaterStream")

DENSITY = N("pc", "hasSpecifiedActualDensityKGM3")
VELOCITY = N("pc", "hasSpecifiedNormalOperatingVelocityMS")
PRESSURE_DROP = N("pc", "hasSpecifiedNormalOperatingPressureDropBarPer100m")
MASS_FLOW = N("pc", "hasSpecifiedActualMassFlowrateKgPerH")


def build_piping_core() -> Module:
    """Piping domain terms: design-condition properties, ratings, sizes, lines and services."""
    classes = [
        _cls(vocab.WORKING_PRESSURE_OBJECT, "Object with working pressure", PHYSICAL_OBJECT),
        _cls(vocab.WORKING_TEMPERATURE_OBJECT, "Object with working temperature", PHYSICAL_OBJECT),
        _cls(vocab.PRESSURE_RATED_OBJECT, "Pressure Rated Object", PHYSICAL_OBJECT),
        _cls(CL150, "CL150 Rated Object", vocab.PRESSURE_RATED_OBJECT),
        _cls(CL600, "CL600 Rated Object", vocab.PRESSURE_RATED_OBJECT),
        _cls(vocab.NOMINAL_SIZE_OBJECT, "Nominal Size Object", PHYSICAL_OBJECT),
        _cls(DN80, "DN 80 - NPS 3", vocab.NOMINAL_SIZE_OBJECT, disjoint=(DN20,)),
        _cls(DN20, "DN 20 - NPS 3/4", vocab.NOMINAL_SIZE_OBJECT),
        _cls(N("pc", "EndFeatureObject"), "End Feature Object", PHYSICAL_OBJECT),
        _cls(FLANGED_END, "Flanged End Object", N("pc", "EndFeatureObject")),
        _cls(AREA_LINE, "Area Line", PHYSICAL_ARTEFACT),
        _cls(PROCESS_LINE, "Process Line", STREAM),
        _cls(PLANT_AREA, "Plant Area", SITE),
        _cls(VALVE_TAG, "Valve Tag", FUNCTIONAL_OBJECT),
        _cls(PLANT_AIR, "Plant Air Stream", STREAM),
        _cls(NITROGEN, "Nitrogen Stream", STREAM),
        _cls(POTABLE_WATER, "Potable Water Stream", STREAM),
    ]
    props = [
        _prop(vocab.MAX_DESIGN_PRESSURE, DATA, "has specified max design pressure", unit="barg"),
        _prop(vocab.MIN_DESIGN_PRESSURE, DATA, "has specified min design pressure", unit="barg"),
        _prop(vocab.MAX_DESIGN_TEMPERATURE, DATA, "has specified max design temperature", unit="degC"),
        _prop(vocab.MIN_DESIGN_TEMPERATURE, DATA, "has specified min design temperature", unit="degC"),
        _prop(DENSITY, DATA, "has specified actual density", unit="kg/m3"),
        _prop(VELOCITY, DATA, "has specified normal operating velocity", unit="m/s"),
        _prop(PRESSURE_DROP, DATA, "has specified normal operating pressure drop", unit="bar/100m"),
        _prop(MASS_FLOW, DATA, "has specified actual mass flowrate", unit="kg/h"),
    ]
    return Module(PC_MODULE, ModuleKind.DOMAIN, (LIS_MODULE,), vocab.prefixes("lis", "pc"),
                  tuple(classes), tuple(props))


# valve-core ------------------------------------------------------------------------

VALVE_BODY = N("vc", "ValveBody")
VALVE_BONNET_OR_COVER = N("vc", "ValveBonnetOrCover")
BALL_VALVE = N("vc", "BallValve")
FLOATING = N("vc", "BallValveFloating")
TRUNNION = N("vc", "BallValveTrunnionMounted")
GATE_VALVE = N("vc", "GateValve")
WEDGE_GATE = N("vc", "WedgeGateValve")
FULL_BORE = N("vc", "ValveWithFullBore")
LONG_PATTERN = N("vc", "ValveLongPattern")
ON_OFF = N("vc", "ValveOnOff")
HAS_CLOSURE_MEMBER = N("vc", "hasClosureMember")
HAS_VALVE_STEM = N("vc", "hasValveStem")
BALL_VALVE_COMMENT = "A rotary valve that has a ball closure member"


def build_valve_core() -> Module:
    """Valve taxonomy by function, feature, shape and type, plus the valve part model."""
    v = vocab.VALVE
    fn, feat = N("vc", "ValveWithSpecifiedFunction"), N("vc", "ValveWithSpecifiedFeature")
    shape, vtype = N("vc", "ValveWithSpecifiedShape"), N("vc", "ValveWithSpecifiedValveType")
    part, closure = N("vc", "ValvePart"), N("vc", "ValveClosureMember")
    classes = [
        _cls(v, "Valve", PHYSICAL_ARTEFACT,
             restrictions=(CardinalityRestriction(vocab.HAS_VALVE_BODY, "exactly", 1, VALVE_BODY),),
             comment="A piping component that controls flow by moving a closure member in a flow passage"),
        _cls(fn, "Valve with Specified Function", v),
        _cls(feat, "Valve with Specified Feature", v),
        _cls(shape, "Valve with Specified Shape", v),
        _cls(vtype, "Valve with Specified Valve Type", v),
        _cls(ON_OFF, "Valve on-off", fn),
        _cls(N("vc", "FailCloseValve"), "Fail Close Valve", fn),
        _cls(N("vc", "ThreeWayValve"), "Three Way Valve", fn),
        _cls(FULL_BORE, "Valve with Full Bore", feat, disjoint=(N("vc", "ValveWithReducedBore"),)),
        _cls(N("vc", "ValveWithReducedBore"), "Valve with Reduced Bore", feat),
        _cls(LONG_PATTERN, "Valve Long Pattern", shape, disjoint=(N("vc", "ValveShortPattern"),)),
        _cls(N("vc", "ValveShortPattern"), "Valve Short Pattern", shape),
        _cls(N("vc", "ValveThreeWay"), "Valve Three-way", shape),
        _cls(BALL_VALVE, "Ball Valve", vtype,
             restrictions=(CardinalityRestriction(HAS_CLOSURE_MEMBER, "min", 1, N("vc", "Ball")),),
             comment=BALL_VALVE_COMMENT),
        _cls(FLOATING, "Ball Valve Floating", BALL_VALVE, disjoint=(TRUNNION,)),
        _cls(TRUNNION, "Ball Valve Trunnion Mounted", BALL_VALVE),
        _cls(N("vc", "ButterflyValve"), "Butterfly Valve", vtype),
        _cls(GATE_VALVE, "Gate Valve", vtype, disjoint=(BALL_VALVE, N("vc", "ButterflyValve"))),
        _cls(WEDGE_GATE, "Wedge Gate Valve", GATE_VALVE),
        _cls(part, "Valve Part", PHYSICAL_ARTEFACT),
        _cls(N("vc", "ValveStem"), "Valve Stem", part),
        _cls(VALVE_BODY, "Valve Body", part),
        _cls(VALVE_BONNET_OR_COVER, "Valve Bonnet or Cover", part),
        _cls(N("vc", "ValveBonnet"), "Valve Bonnet", VALVE_BONNET_OR_COVER),
        _cls(N("vc", "ValveCover"), "Valve Cover", VALVE_BONNET_OR_COVER),
        _cls(closure, "Valve Closure Member", part),
        _cls(N("vc", "Ball"), "Ball", closure),
        _cls(N("vc", "Wedge"), "Wedge", closure),
    ]
    hap = vocab.HAS_ASSEMBLED_PART
    props = [
        _prop(HAS_VALVE_STEM, OBJ, "has valve stem", hap, domain=v, range=N("vc", "ValveStem")),
        _prop(vocab.HAS_VALVE_BODY, OBJ, "has valve body", hap, domain=v, range=VALVE_BODY),
        _prop(vocab.HAS_VALVE_BONNET_OR_COVER, OBJ, "has valve bonnet or cover", hap, domain=v,
              range=VALVE_BONNET_OR_COVER),
        _prop(HAS_CLOSURE_MEMBER, OBJ, "has closure member", hap, domain=v, range=closure),
    ]
    return Module(VC_MODULE, ModuleKind.DOMAIN, (LIS_MODULE,), vocab.prefixes("lis", "vc"),
                  tuple(classes), tuple(props))


MATERIAL_OBJECT = N("mc", "MaterialObject")
GRADE_OBJECT = N("mc", "MaterialGradeCompliantObject")


def build_materials_core() -> Module:
    classes = [
        _cls(MATERIAL_OBJECT, "Material Object", PHYSICAL_OBJECT),
        _cls(GRADE_OBJECT, "Material Grade Compliant Object", MATERIAL_OBJECT),
    ]
    return Module(MC_MODULE, ModuleKind.DOMAIN, (LIS_MODULE,), vocab.prefixes("lis", "mc"), tuple(classes))


# -- ASTM grades ---------------------------------------------------------------------

ASTM_MODULE = N("astm", "astm-grades")

# (specification number, grade, edition); editions follow the standards table,
# "current" where none is listed.
_EDITIONS = {"A182": "2024", "A240": "2024", "A351": "2024", "A358": "2024", "A376": "2022",
             "A430": "1991", "A961": "2024"}
_NO_SUFFIX = {"A430"}


@dataclass(frozen=True)
class MaterialGrade:
    standard: str
    grade: str
    class_id: ResourceId

    @property
    def number(self) -> str:
        return self.standard.split()[-1]

    @property
    def label(self) -> str:
        word = "Gr." if self.number in ("430",) else "Grade"
        return f"{self.standard} {word} {self.grade} Compliant Object"

    @property
    def source(self) -> SourceRef:
        spec = "A" + self.number
        name = f"ASTM {spec}" if spec in _NO_SUFFIX else f"ASTM {spec}/{spec}M"
        return SourceRef(name, _EDITIONS.get(spec, "current"), f"Grade {self.grade}")


def _grade(number: str, grade: str) -> MaterialGrade:
    return MaterialGrade(f"ASTM A {number}", grade, N("astm", f"A{number}_{grade}"))


# The 21 members of Material Group 2.2, in listing order.
GROUP_2_2_GRADES: tuple[MaterialGrade, ...] = tuple(_grade(n, g) for n, g in (
    ("312", "TP316"), ("358", "316"), ("182", "F316"), ("240", "316"), ("351", "CF8M"),
    ("182", "F316H"), ("182", "F317"), ("240", "316H"), ("240", "317"), ("312", "TP316H"),
    ("312", "TP317"), ("351", "CF3A"), ("351", "CF8A"), ("351", "CG8M"), ("376", "TP316"),
    ("376", "TP316H"), ("351", "CF10M"), ("351", "CG3M"), ("430", "FP316"), ("430", "FP316H"),
    ("479", "316H"),
))
# Grades referenced elsewhere but outside the group.
EXTRA_GRADES: tuple[MaterialGrade, ...] = (_grade("479", "316"), _grade("105", "A105"))
ALL_GRADES = GROUP_2_2_GRADES + EXTRA_GRADES


def grade(number: str, name: str) -> ResourceId:
    """Class id of ``ASTM A <number> Grade <name>``; raises KeyError if not bundled."""
    for g in ALL_GRADES:
        if g.number == number and g.grade == name:
            return g.class_id
    raise KeyError(f"ASTM A {number} {name}")


def build_astm_grades() -> Module:
    classes = []
    for g in ALL_GRADES:
        label = "ASTM A 105 Compliant Object" if g.number == "105" else g.label
        classes.append(_cls(g.class_id, label, GRADE_OBJECT, source=g.source))
    return Module(ASTM_MODULE, ModuleKind.STANDARD, (MC_MODULE,), vocab.prefixes("lis", "mc", "astm"),
                  tuple(classes), version="current")


# -- ASME B16.34 ---------------------------------------------------------------------

B1634 = SourceRef("ASME B16.34", "2020", "Table 1 Material Group 2.2")
B1634_PT = SourceRef("ASME B16.34", "2020", "Table 2-2.2")
MG22_MODULE = N("b1634", "material-group-2.2")
MG22_OBJECT = N("b1634", "MaterialGroup2_2Object")
MG22_VALVE = N("b1634", "MaterialGroup2_2Valve")
MG22_LABEL = "ASME B16.34 Material Group 2.2 Valve"


def _group_valve_definition(group_object: ResourceId) -> Or:
    return _all_of(vocab.VALVE, UniversalRestriction(vocab.HAS_VALVE_BODY, group_object),
                   UniversalRestriction(vocab.HAS_VALVE_BONNET_OR_COVER, group_object))


def build_material_group_2_2(grades: tuple[MaterialGrade, ...] = GROUP_2_2_GRADES,
                             available: Module | None = None) -> Module:
    """Material Group 2.2 object (union of its grades) and the group valve.

    ``available`` is the module the grade classes are checked against; a
    grade not declared there raises :class:`ResolutionError`.
    """
    available = available if available is not None else build_astm_grades()
    known = set(available.declared_ids())
    missing = [g.class_id for g in grades if g.class_id not in known]
    if missing:
        from .errors import Diagnostic
        raise ResolutionError([Diagnostic("dangling-reference", f"grade class {c} is not declared", str(c))
                               for c in missing])
    classes = [
        _cls(MG22_OBJECT, "ASME B16.34 Material Group 2.2 Object", MATERIAL_OBJECT,
             equivalent=_any_of(*(g.class_id for g in grades)), source=B1634),
        _cls(MG22_VALVE, MG22_LABEL, vocab.VALVE, equivalent=_group_valve_definition(MG22_OBJECT),
             source=B1634),
    ]
    return Module(MG22_MODULE, ModuleKind.STANDARD, (ASTM_MODULE, VC_MODULE),
                  vocab.prefixes("lis", "mc", "astm", "vc", "b1634"), tuple(classes), version="2020")


CL150_PAIRS: tuple[tuple[str, str], ...] = (
    ("19", "38"), ("18.4", "50"), ("16.2", "100"), ("14.8", "150"), ("13.7", "200"), ("12.1", "250"),
    ("10.2", "300"), ("9.3", "325"), ("8.4", "350"), ("7.4", "375"), ("6.5", "400"), ("5.5", "425"),
    ("4.6", "450"), ("3.7", "475"), ("2.8", "500"), ("1.4", "538"), ("1.4", "550"), ("1.4", "575"),
    ("1.4", "600"), ("1.4", "625"), ("1.4", "650"), ("1.4", "675"), ("1.4", "700"), ("1.4", "725"),
    ("1.4", "750"), ("1.4", "775"), ("1.2", "800"), ("1.0", "816"),
)
MG22_CL150 = rating_class(MG22_VALVE, "CL150", "A")


def group_2_2_cl150_rows() -> list[PTTableRow]:
    return [PTTableRow("CL150", "A", p, t) for p, t in CL150_PAIRS]


def build_pt_group_2_2_cl150() -> Module:
    """PT classes for Group 2.2 CL150 A-Standard, ingested from the table rows."""
    return ingest_pt_table(group_2_2_cl150_rows(), MG22_VALVE, B1634_PT, imports=(MG22_MODULE, PC_MODULE),
                           prefixes=vocab.prefixes("lis", "pc", "b1634"), group_label=MG22_LABEL)


# -- synthetic CL600 group (fixture only) -------------------------------------------

FXG_SOURCE = SourceRef("SMARTKB FIXTURE GROUP", "synthetic", "CL600 table")
FXG_MODULE = N("fxg", "fixture-group")
FXG_OBJECT = N("fxg", "FixtureGroupObject")
FXG_VALVE = N("fxg", "FixtureGroupValve")
FXG_CL600_PAIRS = (("100", "38"), ("95", "50"), ("85", "100"), ("75", "200"), ("60", "300"))
FXG_CL600 = rating_class(FXG_VALVE, "CL600", "A")


def build_fixture_group() -> Module:
    """A made-up CL600 group so the gate-valve case has a rating table to check against."""
    core = Module(FXG_MODULE, ModuleKind.STANDARD, (ASTM_MODULE, VC_MODULE, PC_MODULE),
                  vocab.prefixes("lis", "mc", "astm", "vc", "pc", "fxg"), (
                      _cls(FXG_OBJECT, "Fixture Group Object", MATERIAL_OBJECT,
                           equivalent=_any_of(grade("182", "F316"), grade("351", "CF8M")), source=FXG_SOURCE),
                      _cls(FXG_VALVE, "Fixture Group Valve", vocab.VALVE,
                           equivalent=_group_valve_definition(FXG_OBJECT), source=FXG_SOURCE),
                  ), version="synthetic")
    rows = [PTTableRow("CL600", "A", p, t) for p, t in FXG_CL600_PAIRS]
    pt = ingest_pt_table(rows, FXG_VALVE, FXG_SOURCE, group_label="Fixture Group Valve")
    return merge_modules(core, pt, id=FXG_MODULE, kind=ModuleKind.STANDARD, version="synthetic")


# -- other standards -----------------------------------------------------------------

B165_MODULE = N("b165", "asme-b16.5-features")
RF = N("b165", "RaisedFaceFlangedObject")
RTJ = N("b165", "RingTypeJointFlangedObject")
FF = N("b165", "FlatFaceFlangedObject")


def build_b16_5() -> Module:
    ref = SourceRef("ASME B16.5", "2020", "flange facings")
    classes = [
        _cls(RF, "ASME B16.5 Raised Face Flanged Object", FLANGED_END, disjoint=(RTJ, FF), source=ref),
        _cls(RTJ, "ASME B16.5 Ring Type Joint Flanged Object", FLANGED_END, disjoint=(FF,), source=ref),
        _cls(FF, "ASME B16.5 Flat Face Flanged Object", FLANGED_END, source=ref),
    ]
    return Module(B165_MODULE, ModuleKind.STANDARD, (PC_MODULE,), vocab.prefixes("lis", "pc", "b165"),
                  tuple(classes), version="2020")


B1610_MODULE = N("b1610", "asme-b16.10-patterns")
B1610_LONG = N("b1610", "LongPatternValve")
B1610_NPS3 = N("b1610", "LongPatternBallValve_NPS3_CL150_RF")
B1610_NPS10 = N("b1610", "LongPatternBallValve_NPS10_CL150_RF")


def build_b16_10() -> Module:
    def ref(loc: str) -> SourceRef:
        return SourceRef("ASME B16.10", "2009", loc)
    classes = [
        _cls(B1610_LONG, "ASME B16.10 Long Pattern Valve", LONG_PATTERN, source=ref("long pattern dimensions")),
        _cls(B1610_NPS3, "ASME B16.10 Long Pattern Ball Valve NPS 3 Class 150 RF", B1610_LONG, BALL_VALVE,
             source=ref("ball valve long pattern NPS 3 Class 150 RF")),
        _cls(B1610_NPS10, "ASME B16.10 Long Pattern Ball Valve NPS 10 Class 150 RF", B1610_LONG, BALL_VALVE,
             source=ref("ball valve long pattern NPS 10 Class 150 RF")),
    ]
    return Module(B1610_MODULE, ModuleKind.STANDARD, (VC_MODULE,), vocab.prefixes("lis", "vc", "b1610"),
                  tuple(classes), version="2009")


API6D_MODULE = N("api6d", "api-6d")
API602_MODULE = N("api602", "api-602")


def build_api_6d() -> Module:
    ref = SourceRef("API 6D", "2021", "valve types")
    classes = [
        _cls(N("api6d", "API6DValve"), "API 6D Pipeline Valve", vocab.VALVE, source=ref),
        _cls(N("api6d", "API6DBallValve"), "API 6D Ball Valve", N("api6d", "API6DValve"), BALL_VALVE, source=ref),
        _cls(N("api6d", "API6DGateValve"), "API 6D Gate Valve", N("api6d", "API6DValve"), GATE_VALVE, source=ref),
    ]
    return Module(API6D_MODULE, ModuleKind.STANDARD, (VC_MODULE,), vocab.prefixes("lis", "vc", "api6d"),
                  tuple(classes), version="2021")


def build_api_602() -> Module:
    ref = SourceRef("API 602", "current", "valve types")
    classes = [
        _cls(N("api602", "CompactSteelGateValve"), "API 602 Compact Steel Gate Valve", GATE_VALVE, source=ref),
    ]
    return Module(API602_MODULE, ModuleKind.STANDARD, (VC_MODULE,), vocab.prefixes("lis", "vc", "api602"),
                  tuple(classes), version="current")


# -- collect modules -----------------------------------------------------------------

VALVE_COLLECT = N("col", "valve-collect")
PIPING_COLLECT = N("col", "piping-collect")
MATERIALS_COLLECT = N("col", "materials-collect")
MG22_PT_MODULE = N("b1634", "MaterialGroup2_2Valve-pt")


def build_collects() -> list[Module]:
    return [
        Module(VALVE_COLLECT, ModuleKind.COLLECT,
               (MG22_MODULE, MG22_PT_MODULE, B1610_MODULE, API6D_MODULE, API602_MODULE),
               vocab.prefixes("col", "b1634", "b1610", "api6d", "api602")),
        Module(PIPING_COLLECT, ModuleKind.COLLECT, (PC_MODULE, B165_MODULE), vocab.prefixes("col", "pc", "b165")),
        Module(MATERIALS_COLLECT, ModuleKind.COLLECT, (MC_MODULE, ASTM_MODULE), vocab.prefixes("col", "mc", "astm")),
    ]


# -- company VDS modules -------------------------------------------------------------

@dataclass(frozen=True)
class VDSSpec:
    """One valve data sheet at one size.

    ``rating_class`` is the PT rating class the VDS is a subclass of and
    ``rating`` the generic class-rating atom (``pc:CL150RatedObject``).
    ``materials`` lists the grade classes allowed for body and bonnet.
    ``purposes`` are told superclasses recording why the valve is there.
    """

    vds_id: str
    size_code: str
    size: ResourceId
    rating: ResourceId
    rating_class: ResourceId
    type_atoms: tuple[ResourceId, ...]
    end_feature: ResourceId
    pattern: ResourceId | None = None
    materials: tuple[ResourceId, ...] = ()
    service: ResourceId | None = None
    purposes: tuple[ResourceId, ...] = ()
    label: str = ""
    source: SourceRef | None = None
    part_properties: tuple[ResourceId, ...] = (vocab.HAS_VALVE_BODY, vocab.HAS_VALVE_BONNET_OR_COVER)

    @property
    def class_id(self) -> ResourceId:
        return ResourceId(self.vds_id, self.size_code)

    @property
    def family_id(self) -> ResourceId:
        return ResourceId(self.vds_id, self.vds_id)

    @property
    def material_class(self) -> ResourceId:
        return ResourceId(self.vds_id, "AllowedPressureRetainingMaterial")

    def atoms(self) -> tuple:
        out: list = [ClassAtom(c) for c in (*self.type_atoms, self.size, self.rating, self.end_feature)]
        if self.pattern is not None:
            out.append(ClassAtom(self.pattern))
        out.append(CardinalityRestriction(vocab.HAS_VALVE_BODY, "exactly", 1, VALVE_BODY))
        if self.materials:
            out += [UniversalRestriction(p, self.material_class) for p in self.part_properties]
        if self.service is not None:
            out.append(UniversalRestriction(vocab.CONTAINS, self.service))
        return tuple(out)


def vds_classes(spec: VDSSpec) -> list[ClassDef]:
    """The family class, the optional material union and the sized VDS class."""
    out = [_cls(spec.family_id, f"{spec.vds_id} Valve Data Sheet", vocab.VALVE, source=spec.source)]
    if spec.materials:
        out.append(_cls(spec.material_class, f"{spec.vds_id} allowed pressure-retaining material",
                        MATERIAL_OBJECT, equivalent=_any_of(*spec.materials), source=spec.source))
    out.append(_cls(spec.class_id, spec.label or f"{spec.vds_id} {spec.size_code}",
                    spec.family_id, spec.rating_class, *spec.purposes,
                    equivalent=Or((And(spec.atoms()),)), source=spec.source))
    return out


def build_vds(spec: VDSSpec | list[VDSSpec], *, module_id: ResourceId | None = None,
              imports: tuple[ResourceId, ...] = (VALVE_COLLECT, PIPING_COLLECT, MATERIALS_COLLECT),
              prefixes: dict[str, str] | None = None, extra_classes: tuple[ClassDef, ...] = ()) -> Module:
    """Company-layer module holding one class per VDS and size.

    References are checked against the import closure of the bundled set
    (plus ``extra_classes``); an unknown one raises ``ResolutionError``.
    """
    specs = [spec] if isinstance(spec, VDSSpec) else list(spec)
    classes: dict[ResourceId, ClassDef] = {}
    for s in specs:
        for c in vds_classes(s):
            classes[c.id] = c
    for c in extra_classes:
        classes[c.id] = c
    mid = module_id or ResourceId(specs[0].vds_id, "vds")
    pref = dict(prefixes) if prefixes is not None else {}
    for s in specs:
        pref.setdefault(s.vds_id, vocab.NAMESPACES.get(s.vds_id, f"{vocab.BASE}vds/{s.vds_id}/"))
    for name in ("lis", "pc", "vc", "mc", "astm", "b1634", "b165", "b1610", "fxg", "col"):
        pref.setdefault(name, vocab.NAMESPACES[name])
    module = Module(mid, ModuleKind.COMPANY, imports, pref, tuple(classes.values()))
    _check_resolves(module)
    return module


def _check_resolves(module: Module) -> None:
    from .kb import resolve_module_set
    by_id = {m.id: m for m in standard_modules()}
    needed, stack = set(), list(module.imports)
    while stack:
        mid = stack.pop()
        if mid in needed or mid not in by_id:
            continue
        needed.add(mid)
        stack.extend(by_id[mid].imports)
    resolve_module_set([by_id[m] for m in sorted(needed)] + [module])


# bundled company content -----------------------------------------------------------

TR_MODULE = N("tr", "tr2000-valve")
AKBP_MODULE = N("akbp", "akerbp-valve")
PDS_VD01 = N("akbp", "PDS_VD01")
SECTION_D = (grade("182", "F316"), grade("351", "CF8M"), grade("479", "316"))


def _equinor_spec(vds_id: str, ball_type: ResourceId, what: str) -> VDSSpec:
    return VDSSpec(
        vds_id=vds_id, size_code="DN80", size=DN80, rating=CL150, rating_class=MG22_CL150,
        type_atoms=(ball_type, FULL_BORE), end_feature=RF, pattern=B1610_LONG, materials=SECTION_D,
        service=PLANT_AIR, purposes=(ON_OFF,),
        label=f"{vds_id} DN 80 - NPS 3 EQUINOR VALVE",
        source=SourceRef("Equinor TR2000", "current", f"VDS {vds_id} {what}"))


BCAS302R = _equinor_spec("BCAS302R", FLOATING, "full bore floating ball valve")
BMAS302R = _equinor_spec("BMAS302R", TRUNNION, "full bore trunnion mounted ball valve")
AB_GTDD00J = VDSSpec(
    vds_id="AB-GTDD00J", size_code="DN20", size=DN20, rating=CL600, rating_class=FXG_CL600,
    type_atoms=(WEDGE_GATE,), end_feature=RTJ, service=NITROGEN, purposes=(PDS_VD01,),
    label="AB-GTDD00J DN 20 - NPS 3/4 AKER BP VALVE",
    source=SourceRef("Aker BP VDS", "current", "VDS AB-GTDD00J wedge gate valve"))


def build_tr2000_valve() -> Module:
    return build_vds([BCAS302R, BMAS302R], module_id=TR_MODULE, prefixes=vocab.prefixes("tr"))


def build_akerbp_valve() -> Module:
    purpose = _cls(PDS_VD01, "PDS VD01 Drainage Valve", N("vc", "ValveWithSpecifiedFunction"),
                   comment="drainage on purge line",
                   source=SourceRef("Aker BP VDS", "current", "purpose PDS VD01"))
    return build_vds(AB_GTDD00J, module_id=AKBP_MODULE, prefixes=vocab.prefixes("akbp"),
                     imports=(VALVE_COLLECT, PIPING_COLLECT, MATERIALS_COLLECT, FXG_MODULE),
                     extra_classes=(purpose,))


# -- asset modules -------------------------------------------------------------------

EQ_MODULE = N("eq", "equinor-myplant")
AKM_MODULE = N("akm", "akerbp-myplant")
P_63 = N("eq", "P-63-CW032")
AREA_LINE_63 = N("eq", "AI-63-006_120-A")
PROCESS_LINE_63 = N("eq", "3in-AI-63-006-AS200")
PLANT_AREA_63 = N("eq", "PlantArea-63")
OMS = N("eq", "OMS-SALERI-S7100SF")
DAFRAM = N("eq", "DAFRAM-F1FS")
A_64 = N("akm", "A-64GT0073")
PROCESS_LINE_64 = N("akm", "A-64L00154A-0200GI-DD20-000000N")
AREA_LINE_64 = N("akm", "A-64-AL-00154")
PLANT_AREA_64 = N("akm", "PlantArea-64")
IKM = N("akm", "IKM-FLUX-L6RR104")

# Line-list attributes every process line carries.
LINE_ATTRIBUTES = (DENSITY, VELOCITY, vocab.MAX_DESIGN_TEMPERATURE, vocab.MIN_DESIGN_TEMPERATURE,
                   vocab.MIN_DESIGN_PRESSURE, PRESSURE_DROP, MASS_FLOW)


def _data(**kw) -> tuple:
    names = {"density": DENSITY, "velocity": VELOCITY, "max_t": vocab.MAX_DESIGN_TEMPERATURE,
             "min_t": vocab.MIN_DESIGN_TEMPERATURE, "max_p": vocab.MAX_DESIGN_PRESSURE,
             "min_p": vocab.MIN_DESIGN_PRESSURE, "drop": PRESSURE_DROP, "flow": MASS_FLOW}
    return tuple((names[k], Decimal(v)) for k, v in kw.items())


def _product(ident: ResourceId, label: str, types: tuple, body_grade: ResourceId, *,
             bonnet: bool = True) -> list[Individual]:
    body = ResourceId(ident.namespace, f"{ident.local}-body")
    parts = [Individual(body, (VALVE_BODY, body_grade), label=f"{label} body")]
    links = [(vocab.HAS_VALVE_BODY, body)]
    if bonnet:
        bon = ResourceId(ident.namespace, f"{ident.local}-bonnet")
        parts.append(Individual(bon, (N("vc", "ValveBonnet"), body_grade), label=f"{label} bonnet"))
        links.append((vocab.HAS_VALVE_BONNET_OR_COVER, bon))
    return [Individual(ident, types, tuple(links), label=label), *parts]


def build_equinor_myplant() -> Module:
    table3 = _data(density="10.4", velocity="0", max_t="60", min_t="-7", max_p="13", drop="0", min_p="-1",
                   flow="4040")
    line_data = _data(density="10.4", velocity="0", max_t="60", min_t="-7", min_p="-1", drop="0", flow="4040")
    cf8m = grade("351", "CF8M")
    inds = [
        Individual(P_63, (VALVE_TAG, ON_OFF, FLOATING, DN80, CL150),
                   ((vocab.ASSEMBLED_PART_OF, AREA_LINE_63), (vocab.CONTAINS, PROCESS_LINE_63)),
                   table3, label="P-63-CW032"),
        Individual(AREA_LINE_63, (AREA_LINE,),
                   ((vocab.CONTAINS, PROCESS_LINE_63), (vocab.RESIDES_IN, PLANT_AREA_63)), label="AI-63-006_120-A"),
        Individual(PROCESS_LINE_63, (PROCESS_LINE, PLANT_AIR), (), line_data, label='3"-AI-63-006-AS200'),
        Individual(PLANT_AREA_63, (PLANT_AREA,), label="Plant area 63"),
        *_product(OMS, "O.M.S.SALERI S7100.SF", (FLOATING, FULL_BORE, DN80, CL150, RF, B1610_NPS3), cf8m),
        *_product(DAFRAM, "DAFRAM S.p.a. F1FS NPS3 CL150", (TRUNNION, FULL_BORE, DN80, CL150, RF, B1610_NPS3),
                  cf8m),
    ]
    return Module(EQ_MODULE, ModuleKind.ASSET, (TR_MODULE,),
                  vocab.prefixes("lis", "pc", "vc", "astm", "b165", "b1610", "tr", "eq"), (), (), tuple(inds))


def build_akerbp_myplant() -> Module:
    """Aker BP asset slice; process conditions are synthetic (chosen inside the CL600 table)."""
    note = Annotation(RDFS_COMMENT, "synthetic process conditions for fixture use")
    line_data = _data(density="1.2", velocity="2", max_t="40", min_t="-10", min_p="0", drop="0.1", flow="120")
    inds = [
        Individual(A_64, (VALVE_TAG, WEDGE_GATE, DN20, CL600, PDS_VD01),
                   ((vocab.ASSEMBLED_PART_OF, AREA_LINE_64), (vocab.CONTAINS, PROCESS_LINE_64)),
                   _data(max_p="50", max_t="40", min_p="0", min_t="-10"), (note,), label="A-64GT0073"),
        Individual(AREA_LINE_64, (AREA_LINE,),
                   ((vocab.CONTAINS, PROCESS_LINE_64), (vocab.RESIDES_IN, PLANT_AREA_64)), label="purge area line"),
        Individual(PROCESS_LINE_64, (PROCESS_LINE, NITROGEN), (), line_data, (note,),
                   label="A-64L00154A-0200GI-DD20-000000N"),
        Individual(PLANT_AREA_64, (PLANT_AREA,), label="Plant area 64"),
        *_product(IKM, "IKM Flux Fig.No L6RR104", (WEDGE_GATE, DN20, CL600, RTJ), grade("182", "F316"),
                  bonnet=False),
    ]
    return Module(AKM_MODULE, ModuleKind.ASSET, (AKBP_MODULE,),
                  vocab.prefixes("lis", "pc", "vc", "astm", "b165", "akbp", "akm"), (), (), tuple(inds))


# -- completeness shapes --------------------------------------------------------------

# Ranges are repo-chosen plausibility bounds, not values from any standard.
LINE_RANGES = {
    DENSITY: ("0", "2000"), VELOCITY: ("0", "50"), vocab.MAX_DESIGN_TEMPERATURE: ("-200", "850"),
    vocab.MIN_DESIGN_TEMPERATURE: ("-200", "850"), vocab.MIN_DESIGN_PRESSURE: ("-1", "500"),
    PRESSURE_DROP: ("0", "100"), MASS_FLOW: ("0", "10000000"),
}


def build_shapes():
    from .shapes import DataConstraint, ObjectConstraint, Shape
    return [
        Shape("area-line", AREA_LINE, (ObjectConstraint(vocab.CONTAINS, PROCESS_LINE),
                                       ObjectConstraint(vocab.RESIDES_IN, PLANT_AREA))),
        Shape("process-line", PROCESS_LINE, (),
              tuple(DataConstraint(p, Decimal(lo), Decimal(hi)) for p, (lo, hi) in LINE_RANGES.items())),
    ]


def shape_prefixes() -> dict[str, str]:
    return vocab.prefixes("lis", "pc")


# -- assembly ------------------------------------------------------------------------

def standard_modules() -> list[Module]:
    """Everything below the company layer."""
    return [build_ido_core(), build_piping_core(), build_valve_core(), build_materials_core(),
            build_astm_grades(), build_material_group_2_2(), build_pt_group_2_2_cl150(), build_fixture_group(),
            build_b16_5(), build_b16_10(), build_api_6d(), build_api_602(), *build_collects()]


def build_all() -> list[Module]:
    return [*standard_modules(), build_tr2000_valve(), build_akerbp_valve(), build_equinor_myplant(),
            build_akerbp_myplant()]


FILE_NAMES = {
    LIS_MODULE: "ido-core", PC_MODULE: "piping-core", VC_MODULE: "valve-core", MC_MODULE: "materials-core",
    ASTM_MODULE: "astm-grades", MG22_MODULE: "asme-b16.34-mg2.2", MG22_PT_MODULE: "asme-b16.34-mg2.2-pt",
    FXG_MODULE: "fixture-group-cl600", B165_MODULE: "asme-b16.5", B1610_MODULE: "asme-b16.10",
    API6D_MODULE: "api-6d", API602_MODULE: "api-602", VALVE_COLLECT: "valve-collect",
    PIPING_COLLECT: "piping-collect", MATERIALS_COLLECT: "materials-collect", TR_MODULE: "tr2000-valve",
    AKBP_MODULE: "akerbp-valve", EQ_MODULE: "equinor-myplant", AKM_MODULE: "akerbp-myplant",
}


def provenance_manifest(modules: list[Module]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("module", "subject", "slot", "standard", "edition", "locator"))
    for m in sorted(modules, key=lambda m: m.id):
        for subject, slot, ref in sorted(all_source_refs(m), key=lambda x: (x[0], x[1], x[2])):
            w.writerow((m.id, subject, slot, ref.standard_id, ref.edition, ref.locator))
    return out.getvalue()


def write_fixtures(root: Path) -> list[Path]:
    """Write every bundled module plus the PT CSV and provenance manifest under ``root``."""
    modules = build_all()
    mdir = root / "modules"
    mdir.mkdir(parents=True, exist_ok=True)
    written = []
    for m in modules:
        path = mdir / f"{FILE_NAMES[m.id]}.sksm"
        path.write_text(write_module(m), encoding="utf-8")
        written.append(path)
    tdir = root / "tables"
    tdir.mkdir(exist_ok=True)
    for name, text in (("mg22-cl150.csv", write_pt_csv(group_2_2_cl150_rows())),):
        (tdir / name).write_text(text, encoding="utf-8")
        written.append(tdir / name)
    from .shapes import write_shapes
    sdir = root / "shapes"
    sdir.mkdir(exist_ok=True)
    (sdir / "lines.skshape").write_text(write_shapes(build_shapes(), shape_prefixes()), encoding="utf-8")
    written.append(sdir / "lines.skshape")
    (root / "provenance.csv").write_text(provenance_manifest(modules), encoding="utf-8")
    written.append(root / "provenance.csv")
    return written


def main(argv: list[str] | None = None) -> int:
    args = sys.argv[1:] if argv is None else argv
    root = Path(args[0] if args else "fixtures")
    for p in write_fixtures(root):
        print(p)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
