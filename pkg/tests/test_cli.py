from __future__ import annotations

import json
import shutil
import subprocess
import sys

import pytest

from smartkb.cli import run
from smartkb.workspace import Workspace, WorkspaceConfig, WorkspaceError

from conftest import FIXTURES


def invoke(capsys, *args: str) -> tuple[int, str, str]:
    code = run(["-w", str(FIXTURES), *args])
    out, err = capsys.readouterr()
    return code, out, err


TABLE = [
    (("check-vds-location", "BCAS302R:DN80", "P-63-CW032"), 0),
    (("check-product-vds", "OMS-SALERI-S7100SF", "BCAS302R:DN80"), 0),
    (("check-product-vds", "DAFRAM-F1FS", "BCAS302R:DN80"), 1),
    (("check-vds-location", "AB-GTDD00J:DN20", "A-64GT0073"), 0),
    (("check-product-vds", "IKM-FLUX-L6RR104", "AB-GTDD00J:DN20"), 0),
]


@pytest.mark.parametrize("args,code", TABLE)
def test_competency_questions_exit_codes(capsys, args, code):
    got, out, _ = invoke(capsys, *args)
    assert got == code
    assert out.splitlines()[0].endswith("Compliant") if code == 0 else "NonCompliant" in out.splitlines()[0]


def test_no_case_names_the_ball_support_clash(capsys):
    _, out, _ = invoke(capsys, "check-product-vds", "DAFRAM-F1FS", "BCAS302R:DN80")
    assert "clash" in out and "Floating" in out and "Trunnion" in out


@pytest.mark.parametrize("args,code", TABLE)
def test_json_output(capsys, args, code):
    got, out, _ = invoke(capsys, "--format", "json", *args)
    data = json.loads(out)
    assert got == code and data["schema"] == 1
    assert data["verdict"] == ("Compliant" if code == 0 else "NonCompliant")


def test_output_is_byte_identical_across_runs(capsys):
    first = [invoke(capsys, *args)[1] for args, _ in TABLE]
    second = [invoke(capsys, *args)[1] for args, _ in TABLE]
    assert first == second


def test_output_does_not_depend_on_load_order(tmp_path, capsys):
    ws = tmp_path / "ws"
    shutil.copytree(FIXTURES, ws)
    names = sorted(p.name for p in (ws / "modules").glob("*.sksm"))
    listing = ", ".join(f'"modules/{n}"' for n in reversed(names))
    (ws / "smartkb.toml").write_text(
        f'[workspace]\nmodules = [{listing}]\nshapes = ["shapes/*.skshape"]\ntemplates = ["templates/*.skt"]\n')
    for args, _ in TABLE + [(("classify", "OMS-SALERI-S7100SF"), 0), (("export-ttl", "b1634:material-group-2.2"), 0)]:
        a = run(["-w", str(FIXTURES), *args]), capsys.readouterr().out
        b = run(["-w", str(ws), *args]), capsys.readouterr().out
        assert a == b, args


def test_load_reports_counts(capsys):
    code, out, err = invoke(capsys, "load")
    assert code == 0 and "19 modules" in out and "0 lint findings" in out and err == ""


def test_classify_lists_inferred_types(capsys):
    code, out, _ = invoke(capsys, "classify", "OMS-SALERI-S7100SF", "--explain", "BCAS302R:DN80")
    assert code == 0
    assert "vc:BallValve" in out and "BCAS302R:DN80" in out and ": yes" in out


def test_shapes_command(capsys):
    code, out, _ = invoke(capsys, "shapes")
    assert (code, out) == (0, "no violations\n")


def test_trace_command(capsys):
    code, out, _ = invoke(capsys, "trace", "b1634:WP_le_18.4_barG")
    assert (code, out) == (0, "ASME B16.34\t2020\tTable 2-2.2 pressure 18.4 barg\n")
    code, out, _ = invoke(capsys, "trace", "P-63-CW032")
    assert (code, out) == (0, "eq:P-63-CW032: no provenance\n")


def test_export_ttl_command(capsys):
    code, out, _ = invoke(capsys, "export-ttl", "b1634:MaterialGroup2_2Valve-pt")
    assert code == 0 and out.startswith("@prefix ") and "owl:unionOf" in out


def test_expand_command(capsys):
    rows = FIXTURES / "tables" / "mg22-cl150.csv"
    code, out, _ = invoke(capsys, "expand", "tpl:mg22-pt-row", str(rows))
    assert code == 0
    assert len(out.splitlines()) == 314


@pytest.mark.parametrize("args", [
    ("classify", "no:SuchThing"),
    ("check-product-vds", "OMS-SALERI-S7100SF", "NoSuchVDS:DN80"),
    ("trace", "Nothing"),
    ("expand", "tpl:nope", "x.csv"),
])
def test_unknown_ids_exit_3(capsys, args):
    code, out, err = invoke(capsys, *args)
    assert code == 3 and out == "" and err.startswith("error: ")


def test_unknown_command_exits_3(capsys):
    code, _, err = invoke(capsys, "frobnicate")
    assert code == 3 and "frobnicate" in err


def test_missing_rows_file_exits_3(capsys, tmp_path):
    code, _, _ = invoke(capsys, "expand", "tpl:mg22-pt-row", str(tmp_path / "absent.csv"))
    assert code == 3


def test_workspace_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("SMARTKB_WORKSPACE", str(FIXTURES))
    code = run(["trace", "b1634:WP_le_19_barG"])
    assert code == 0 and "pressure 19 barg" in capsys.readouterr().out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "smartkb", "-w", str(FIXTURES), "check-product-vds",
                           "DAFRAM-F1FS", "BCAS302R:DN80"], capture_output=True, text=True)
    assert proc.returncode == 1 and "NonCompliant" in proc.stdout


# -- workspace configuration ------------------------------------------------------------------

def test_default_config_without_toml(tmp_path):
    (tmp_path / "modules").mkdir()
    ws = Workspace.open(tmp_path)
    assert ws.config == WorkspaceConfig(tmp_path)
    with pytest.raises(WorkspaceError):
        ws.kb


@pytest.mark.parametrize("body,fragment", [
    ("[workspace]\nformat = \"xml\"\n", "format"),
    ("[workspace]\nstrict = \"yes\"\n", "strict"),
    ("[workspace]\nmodules = \"a\"\n", "modules"),
    ("[workspace]\ncolour = 1\n", "unknown keys colour"),
    ("[workspace\n", "smartkb.toml"),
    ("workspace = 3\n", "table"),
])
def test_bad_config(tmp_path, body, fragment):
    (tmp_path / "smartkb.toml").write_text(body)
    with pytest.raises(WorkspaceError) as exc:
        Workspace.open(tmp_path)
    assert fragment in str(exc.value)


def test_bad_config_exits_3(tmp_path, capsys):
    (tmp_path / "smartkb.toml").write_text("[workspace]\nformat = \"xml\"\n")
    assert run(["-w", str(tmp_path), "load"]) == 3


def test_missing_named_file(tmp_path):
    (tmp_path / "smartkb.toml").write_text('[workspace]\nmodules = ["nope.sksm"]\n')
    with pytest.raises(WorkspaceError, match="module file not found"):
        Workspace.open(tmp_path)


def test_no_workspace_at_path(tmp_path):
    with pytest.raises(WorkspaceError, match="no workspace"):
        Workspace.open(tmp_path / "missing")


def test_config_file_path_is_accepted():
    ws = Workspace.open(FIXTURES / "smartkb.toml")
    assert ws.config.root == FIXTURES and len(ws.module_files) == 19
    assert ws.config.shapes == ("shapes/*.skshape",)


def test_syntax_error_in_a_module_exits_2(tmp_path, capsys):
    ws = tmp_path / "ws"
    shutil.copytree(FIXTURES, ws)
    (ws / "modules" / "broken.sksm").write_text("module x:y\nkind asset\nclass (\n")
    code = run(["-w", str(ws), "load"])
    assert code == 2 and "syntax-error" in capsys.readouterr().err


def test_lint_findings_fail_only_when_strict(tmp_path, capsys):
    ws = tmp_path / "ws"
    shutil.copytree(FIXTURES, ws)
    path = ws / "modules" / "asme-b16.5.sksm"
    text = path.read_text()
    lines = [ln for ln in text.splitlines() if not ln.strip().startswith("source ")]
    path.write_text("\n".join(lines) + "\n")
    code = run(["-w", str(ws), "load"])
    assert code == 0 and "class-without-source" in capsys.readouterr().err
    cfg = ws / "smartkb.toml"
    cfg.write_text(cfg.read_text().replace("strict = false", "strict = true"))
    code = run(["-w", str(ws), "load"])
    assert code == 1 and "class-without-source" in capsys.readouterr().err
