"""``smartkb`` command line.

Exit codes: 0 clean or Compliant, 1 NonCompliant / violations / lint
findings in a strict workspace, 2 Incomplete or diagnostics, 3 usage, IO
or unknown-id errors.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import json
import sys

import click

from .errors import DiagnosticError, SmartKBError, UnknownResourceError
from .model import ModelError, ResourceId

EXIT_OK, EXIT_FAIL, EXIT_INCOMPLETE, EXIT_USAGE = 0, 1, 2, 3


class Halt(Exception):
    """Stop with an exit code after output has been written."""

    def __init__(self, code: int):
        self.code = code


class App:
    def __init__(self, workspace: str | None, fmt: str | None):
        from .workspace import Workspace
        self.ws = Workspace.open(workspace)
        self.format = fmt or self.ws.config.format

    @property
    def kb(self):
        return self.ws.kb

    def resolve(self, text: str) -> ResourceId:
        return self.kb.lookup(text)

    def emit(self, data: dict | list, text: str) -> None:
        if self.format == "json":
            click.echo(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False))
        else:
            click.echo(text, nl=not text.endswith("\n"))


@click.group()
@click.option("-w", "--workspace", type=click.Path(), default=None,
              help="Workspace directory or config file (default: $SMARTKB_WORKSPACE or the current directory).")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default=None,
              help="Output format; overrides the workspace config.")
@click.pass_context
def cli(ctx: click.Context, workspace: str | None, fmt: str | None) -> None:
    """Standards knowledge base: load, classify, check compliance, trace provenance."""
    ctx.obj = (workspace, fmt)


def _app(ctx: click.Context) -> App:
    if not isinstance(ctx.obj, App):
        ctx.obj = App(*ctx.obj)
    return ctx.obj


@cli.command()
@click.option("--scope", default="standard", show_default=True, help="Module kind the provenance lint covers.")
@click.pass_context
def load(ctx: click.Context, scope: str) -> None:
    """Resolve the module set and lint provenance (findings fail only in a strict workspace)."""
    from .kb import lint_provenance
    app = _app(ctx)
    kb = app.kb
    findings = lint_provenance(kb, scope)
    for f in findings:
        click.echo(str(f), err=True)
    data = {"modules": len(kb.modules), "classes": len(kb.classes), "properties": len(kb.properties),
            "individuals": len(kb.individuals), "lint_findings": [str(f) for f in findings]}
    app.emit(data, f"{len(kb.modules)} modules, {len(kb.classes)} classes, {len(kb.properties)} properties, "
                   f"{len(kb.individuals)} individuals; {len(findings)} lint findings")
    if findings and app.ws.config.strict:
        raise Halt(EXIT_FAIL)


@cli.command()
@click.argument("individual")
@click.option("--explain", "explain_cls", default=None, help="Print the derivation for membership in this class.")
@click.pass_context
def classify(ctx: click.Context, individual: str, explain_cls: str | None) -> None:
    """List every class INDIVIDUAL belongs to."""
    from .reasoner import classify as run, instance_of
    app = _app(ctx)
    kb = app.kb
    ident = app.resolve(individual)
    result = run(kb, kb.individual(ident), explain=False)
    types = result.sorted_types()
    data: dict = {"individual": str(ident), "types": [str(t) for t in types]}
    text = "\n".join([f"{ident}:"] + [f"  {t}  {kb.label(t)}" if kb.label(t) != str(t) else f"  {t}"
                                      for t in types])
    if explain_cls:
        v = instance_of(kb, ident, app.resolve(explain_cls))
        from .compliance import explanation_dict
        data["explanation"] = explanation_dict(v.explanation, kb)
        text += "\n" + v.explanation.render(kb)
    app.emit(data, text)


def _report(app: App, report) -> None:
    if app.format == "json":
        click.echo(report.to_json(app.kb), nl=False)
    else:
        click.echo(report.render_text(app.kb), nl=False)
    raise Halt(report.exit_code)


@cli.command("check-vds-location")
@click.argument("vds")
@click.argument("location")
@click.pass_context
def check_vds_location(ctx: click.Context, vds: str, location: str) -> None:
    """Does VDS meet the requirements of line LOCATION?"""
    from .compliance import check_vds_for_location
    app = _app(ctx)
    vds_id, loc = app.resolve(vds), app.resolve(location)
    _report(app, check_vds_for_location(app.kb, vds_id, loc, shapes=app.ws.shapes()))


@cli.command("check-product-vds")
@click.argument("product")
@click.argument("vds")
@click.pass_context
def check_product_vds(ctx: click.Context, product: str, vds: str) -> None:
    """Does PRODUCT meet the requirements of VDS?"""
    from .compliance import check_product_against_vds
    app = _app(ctx)
    prod, vds_id = app.resolve(product), app.resolve(vds)
    _report(app, check_product_against_vds(app.kb, prod, vds_id))


@cli.command()
@click.pass_context
def shapes(ctx: click.Context) -> None:
    """Validate the workspace shapes against every individual."""
    from .shapes import validate_shapes
    app = _app(ctx)
    violations = validate_shapes(app.kb, app.ws.shapes())
    app.emit({"violations": [v.as_dict() for v in violations]},
             "\n".join(map(str, violations)) if violations else "no violations")
    if violations:
        raise Halt(EXIT_FAIL)


@cli.command()
@click.argument("subject")
@click.pass_context
def trace(ctx: click.Context, subject: str) -> None:
    """Print the standards provenance of SUBJECT and of the classes defining it."""
    from .compliance import trace as run
    app = _app(ctx)
    ident = app.resolve(subject)
    refs = run(app.kb, ident)
    app.emit({"subject": str(ident),
              "sources": [{"standard": r.standard_id, "edition": r.edition, "locator": r.locator} for r in refs]},
             "\n".join(f"{r.standard_id}\t{r.edition}\t{r.locator}" for r in refs) if refs
             else f"{ident}: no provenance")


@cli.command("export-ttl")
@click.argument("module")
@click.pass_context
def export_ttl(ctx: click.Context, module: str) -> None:
    """Write MODULE as Turtle to stdout."""
    from .turtle import export_turtle
    app = _app(ctx)
    kb = app.kb
    mid = app.resolve(module)
    click.echo(export_turtle(kb.module(mid)), nl=False)


@cli.command()
@click.argument("template")
@click.argument("rows_file", type=click.Path(dir_okay=False))
@click.pass_context
def expand(ctx: click.Context, template: str, rows_file: str) -> None:
    """Expand TEMPLATE over the CSV argument rows in ROWS_FILE."""
    from pathlib import Path

    from .axioms import format_axiom
    from .templates import as_library, expand as run, read_rows
    app = _app(ctx)
    lib = as_library(app.ws.templates())
    try:
        tid = ResourceId.parse(template)
    except ModelError:
        raise UnknownResourceError("template", template) from None
    if tid not in lib:
        raise UnknownResourceError("template", template)
    try:
        text = Path(rows_file).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.FileError(rows_file, exc.strerror) from None
    axioms = run(lib[tid], read_rows(text, lib[tid]), lib)
    app.emit([format_axiom(a) for a in axioms], "\n".join(format_axiom(a) for a in axioms))


def run(argv: list[str] | None = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        cli.main(args=argv, prog_name="smartkb", standalone_mode=False)
    except Halt as h:
        return h.code
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except UnknownResourceError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_USAGE
    except DiagnosticError as e:
        for d in e.diagnostics:
            click.echo(str(d), err=True)
        return EXIT_INCOMPLETE
    except (OSError, SmartKBError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run())
