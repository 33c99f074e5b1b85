"""Namespaces and well-known identifiers of the bundled module set."""

from __future__ import annotations

from .model import ResourceId

BASE = "https://w3id.org/smartkb/"

NAMESPACES: dict[str, str] = {
    "lis": "http://rds.posccaesar.org/ontology/lis14/rdl/",
    "pc": BASE + "piping-core/",
    "vc": BASE + "valve-core/",
    "mc": BASE + "materials-core/",
    "astm": BASE + "astm/",
    "b1634": BASE + "asme-b16.34/",
    "b165": BASE + "asme-b16.5/",
    "b1610": BASE + "asme-b16.10/",
    "api6d": BASE + "api-6d/",
    "api602": BASE + "api-602/",
    "fxg": BASE + "fixture-group/",
    "col": BASE + "collect/",
    "tr": BASE + "equinor-tr2000/",
    "BCAS302R": BASE + "equinor-tr2000/BCAS302R/",
    "BMAS302R": BASE + "equinor-tr2000/BMAS302R/",
    "akbp": BASE + "akerbp-valve/",
    "AB-GTDD00J": BASE + "akerbp-valve/AB-GTDD00J/",
    "eq": BASE + "equinor-myplant/",
    "akm": BASE + "akerbp-myplant/",
    "smk": BASE + "meta/",
}


def ns(prefix: str, local: str) -> ResourceId:
    return ResourceId(prefix, local)


def prefixes(*names: str) -> dict[str, str]:
    return {n: NAMESPACES[n] for n in names}


# piping-core data properties (units live in the names)
MAX_DESIGN_PRESSURE = ns("pc", "hasSpecifiedMaxDesignPressureBarg")
MAX_DESIGN_TEMPERATURE = ns("pc", "hasSpecifiedMaxDesignTemperatureDegC")
MIN_DESIGN_PRESSURE = ns("pc", "hasSpecifiedMinDesignPressureBarg")
MIN_DESIGN_TEMPERATURE = ns("pc", "hasSpecifiedMinDesignTemperatureDegC")
WORKING_PRESSURE_OBJECT = ns("pc", "ObjectWithWorkingPressure")
WORKING_TEMPERATURE_OBJECT = ns("pc", "ObjectWithWorkingTemperature")
PRESSURE_RATED_OBJECT = ns("pc", "PressureRatedObject")
NOMINAL_SIZE_OBJECT = ns("pc", "NominalSizeObject")

# lis (IDO) relations used across modules
CONTAINS = ns("lis", "contains")
HAS_ASSEMBLED_PART = ns("lis", "hasAssembledPart")
ASSEMBLED_PART_OF = ns("lis", "assembledPartOf")
RESIDES_IN = ns("lis", "residesIn")

VALVE = ns("vc", "Valve")
HAS_VALVE_BODY = ns("vc", "hasValveBody")
HAS_VALVE_BONNET_OR_COVER = ns("vc", "hasValveBonnetOrCover")

# provenance annotation property used in Turtle export
DEFINED_IN_EDITION = ns("smk", "isDefinedInEditionOfSpecification")


def rated_object(rating: str) -> ResourceId:
    """Generic piping-core class for a pressure class designation (``CL150`` ...)."""
    return ns("pc", f"{rating}RatedObject")
