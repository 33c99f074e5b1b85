"""Exception hierarchy shared by every smartkb subsystem."""

from __future__ import annotations

from dataclasses import dataclass


class SmartKBError(Exception):
    """Base class for all errors raised by smartkb."""


class ModelError(SmartKBError, ValueError):
    """A model object violates one of its structural invariants."""


class NormalizationOverflow(SmartKBError):
    """Raised when a class expression is too deep or expands too many disjuncts."""


@dataclass(frozen=True)
class Diagnostic:
    """One problem found while parsing, resolving or validating input.

    ``code`` is a stable kebab-case identifier (``import-cycle``,
    ``unknown-prefix`` ...) that tests and the CLI match on.
    """

    code: str
    message: str
    source: str = ""
    line: int = 0
    column: int = 0

    def __str__(self) -> str:
        where = self.source
        if self.line:
            where = f"{where}:{self.line}:{self.column}" if where else f"{self.line}:{self.column}"
        prefix = f"{where}: " if where else ""
        return f"{prefix}{self.code}: {self.message}"


class DiagnosticError(SmartKBError):
    """Carries a non-empty list of diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]


class ParseError(DiagnosticError):
    """A document could not be parsed; no object was produced."""


class ResolutionError(DiagnosticError):
    """A module set could not be resolved into a knowledge base."""


class TemplateError(DiagnosticError):
    """Template expansion failed (unknown template, arity, kind or cycle)."""


class UnknownResourceError(SmartKBError, KeyError):
    """A class, individual, module or other resource is not in the knowledge base."""

    def __init__(self, kind: str, ident: object):
        self.kind = kind
        self.ident = ident
        super().__init__(f"unknown {kind}: {ident}")

    def __str__(self) -> str:
        return self.args[0]


class IngestError(SmartKBError, ValueError):
    """A tabular row cannot be ingested."""
