"""Pressure-temperature rating tables: CSV rows in, PT classes out.

Every row ``(rating, variant, p, t)`` contributes a pressure-limit class
``WP <= p barG``, a temperature-limit class ``WT <= t deg.C`` and one
disjunct ``WP and WT`` of the rating class for ``(rating, variant)``.
Limit classes are keyed by value, so rating groups share them.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Iterable

from . import vocab
from .axioms import Axiom, axioms_to_module, sort_axioms
from .errors import IngestError, ModelError
from .model import ClassAtom, DataRangeAtom, Module, ModuleKind, ResourceId, SourceRef, format_decimal, to_decimal

CSV_HEADER = ("rating", "variant", "max_pressure_barg", "max_temp_degC")
VARIANTS = {"A": "A-Standard", "B": "B-Special", "A-Standard": "A-Standard", "B-Special": "B-Special"}
MIN_TEMPERATURE = Decimal("-273.15")
MAX_TEMPERATURE = Decimal("2000")


class InvalidRow(IngestError):
    code = "invalid-row"


@dataclass(frozen=True, order=True)
class PTTableRow:
    rating: str
    variant: str
    max_pressure_barg: Decimal
    max_temp_degC: Decimal

    def __post_init__(self) -> None:
        if not isinstance(self.rating, str) or not self.rating.strip() or any(c.isspace() for c in self.rating):
            raise InvalidRow(f"invalid rating designation {self.rating!r}")
        variant = VARIANTS.get(self.variant)
        if variant is None:
            raise InvalidRow(f"variant must be one of A, B, A-Standard, B-Special; got {self.variant!r}")
        object.__setattr__(self, "variant", variant)
        try:
            p, t = to_decimal(self.max_pressure_barg), to_decimal(self.max_temp_degC)
        except ModelError as exc:
            raise InvalidRow(str(exc)) from None
        if p <= 0:
            raise InvalidRow(f"max pressure must be positive, got {format_decimal(p)} barg")
        if not MIN_TEMPERATURE <= t <= MAX_TEMPERATURE:
            raise InvalidRow(f"max temperature {format_decimal(t)} degC outside [-273.15, 2000]")
        object.__setattr__(self, "max_pressure_barg", Decimal(format_decimal(p)))
        object.__setattr__(self, "max_temp_degC", Decimal(format_decimal(t)))


def read_pt_csv(source: str | Path | io.TextIOBase) -> list[PTTableRow]:
    """Read rows from a CSV file, path or text with the fixed header."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and source.endswith(".csv")):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
        raise InvalidRow(f"expected header {','.join(CSV_HEADER)}, got {','.join(header or [])!r}")
    rows = []
    for lineno, fields in enumerate(reader, start=2):
        if not any(f.strip() for f in fields):
            continue
        if len(fields) != len(CSV_HEADER):
            raise InvalidRow(f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(fields)}")
        try:
            rows.append(PTTableRow(*(f.strip() for f in fields)))
        except InvalidRow as exc:
            raise InvalidRow(f"line {lineno}: {exc}") from None
    return rows


def write_pt_csv(rows: Iterable[PTTableRow]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.rating, r.variant, format_decimal(r.max_pressure_barg), format_decimal(r.max_temp_degC)])
    return out.getvalue()


# -- naming shared with the pt-disjunct template ---------------------------------

def pressure_class(namespace: str, p: Decimal) -> ResourceId:
    return ResourceId(namespace, f"WP_le_{format_decimal(p)}_barG")


def temperature_class(namespace: str, t: Decimal) -> ResourceId:
    return ResourceId(namespace, f"WT_le_{format_decimal(t)}_degC")


def rating_class(group: ResourceId, rating: str, variant: str) -> ResourceId:
    return ResourceId(group.namespace, f"{group.local}_{rating}_{VARIANTS[variant]}")


def rated_object_class(namespace: str, rating: str) -> ResourceId:
    return ResourceId(namespace, f"{rating}PressureRatedObject")


def _ref(standard: SourceRef, suffix: str) -> SourceRef:
    return SourceRef(standard.standard_id, standard.edition, f"{standard.locator} {suffix}")


def pt_row_axioms(row: PTTableRow, group: ResourceId, group_label: str, standard: SourceRef) -> list[Axiom]:
    """Axioms contributed by one table row (limit classes, rating class, rated object)."""
    nsp = group.namespace
    p, t = row.max_pressure_barg, row.max_temp_degC
    ps, ts = format_decimal(p), format_decimal(t)
    wp, wt = pressure_class(nsp, p), temperature_class(nsp, t)
    rc = rating_class(group, row.rating, row.variant)
    ro = rated_object_class(nsp, row.rating)
    wp_ref = _ref(standard, f"pressure {ps} barg")
    wt_ref = _ref(standard, f"row {ts} degC")
    rc_ref = _ref(standard, f"column {row.rating} {row.variant}")
    ro_ref = _ref(standard, f"column {row.rating}")
    return [
        Axiom("class", (wp,)),
        Axiom("label", (wp, f"WP <= {ps} barG")),
        Axiom("subclass-of", (wp, vocab.WORKING_PRESSURE_OBJECT)),
        Axiom("equivalent-disjunct", (wp, (DataRangeAtom(vocab.MAX_DESIGN_PRESSURE, "<=", p),))),
        Axiom("source", (wp, "class", wp_ref)),
        Axiom("source", (wp, "equivalence", wp_ref)),
        Axiom("class", (wt,)),
        Axiom("label", (wt, f"WT <= {ts} deg.C")),
        Axiom("subclass-of", (wt, vocab.WORKING_TEMPERATURE_OBJECT)),
        Axiom("equivalent-disjunct", (wt, (DataRangeAtom(vocab.MAX_DESIGN_TEMPERATURE, "<=", t),))),
        Axiom("source", (wt, "class", wt_ref)),
        Axiom("source", (wt, "equivalence", wt_ref)),
        Axiom("class", (rc,)),
        Axiom("label", (rc, f"{group_label} {row.rating} {row.variant} Class")),
        Axiom("subclass-of", (rc, group)),
        Axiom("subclass-of", (rc, ro)),
        Axiom("equivalent-disjunct", (rc, (ClassAtom(wp), ClassAtom(wt)))),
        Axiom("source", (rc, "class", rc_ref)),
        Axiom("source", (rc, "equivalence", rc_ref)),
        Axiom("class", (ro,)),
        Axiom("label", (ro, f"{standard.standard_id} {row.rating} Pressure Rated Object")),
        Axiom("subclass-of", (ro, vocab.rated_object(row.rating))),
        Axiom("source", (ro, "class", ro_ref)),
    ]


def pt_table_axioms(rows: Iterable[PTTableRow], group: ResourceId, standard: SourceRef,
                    group_label: str | None = None) -> list[Axiom]:
    rows = list(rows)
    if not rows:
        raise InvalidRow("a PT table needs at least one row")
    label = group_label or group.local
    out: list[Axiom] = []
    for row in set(rows):
        out += pt_row_axioms(row, group, label, standard)
    return sort_axioms(out)


def ingest_pt_table(rows: Iterable[PTTableRow], material_group: ResourceId, standard: SourceRef, *,
                    module_id: ResourceId | None = None, imports: Iterable[ResourceId] = (),
                    prefixes: dict[str, str] | None = None, group_label: str | None = None,
                    version: str | None = None) -> Module:
    """Build a standard-layer module holding the PT classes for one material group."""
    axioms = pt_table_axioms(rows, material_group, standard, group_label)
    nsp = material_group.namespace
    pref = dict(prefixes) if prefixes is not None else {}
    for name in (nsp, "pc"):
        if name not in pref and name in vocab.NAMESPACES:
            pref[name] = vocab.NAMESPACES[name]
    mid = module_id or ResourceId(nsp, f"{material_group.local}-pt")
    return axioms_to_module(axioms, id=mid, kind=ModuleKind.STANDARD, imports=tuple(imports),
                            prefixes=pref, version=standard.edition if version is None else version)
