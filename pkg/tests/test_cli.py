import glob
import io
import json
import os
import subprocess
import sys

import jsonschema
import pytest

import regionfj.cli as cli
from regionfj.checker import CheckDiagnostic
from regionfj.output import load_schema, parse_text, render_text

HERE = os.path.dirname(__file__)
CORPUS = sorted(glob.glob(os.path.join(HERE, "corpus", "*.fj")))
LINKED_LIST = os.path.join(HERE, "corpus", "linked_list.fj")
EMPTY = os.path.join(HERE, "corpus", "empty.fj")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_linked_list_json_check():
    code, out, err = run("analyze", LINKED_LIST, "--format", "json", "--check")
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema())
    linear = [e for e in doc["methodTable"] if e["method"] == "linear"]
    assert linear and all({"Created@l1", "Created@l2"} <= set(e["regions"]) for e in linear)


def test_empty_program():
    code, out, _ = run("analyze", EMPTY, "--format", "json")
    assert code == 0
    assert json.loads(out) == {"regions": ["Null"], "fieldTable": [], "methodTable": []}


def test_syntax_error_exit_code(tmp_path):
    bad = tmp_path / "bad.fj"
    bad.write_text("class A extends Object {\n  A m( { }\n}\n")
    code, out, err = run("analyze", str(bad))
    assert code == 1 and out == ""
    assert err.startswith(f"{bad}:2:")


def test_unreadable_file(tmp_path):
    code, _, err = run("analyze", str(tmp_path / "missing.fj"))
    assert code == 1 and "cannot read" in err


@pytest.mark.parametrize("argv", [
    ["analyze"],
    ["analyze", "x.fj", "--emit", "nothing"],
    ["analyze", "x.fj", "--max-iter", "0"],
    ["analyze", "x.fj", "--max-contexts", "lots"],
    ["frobnicate", "x.fj"],
])
def test_malformed_flags(argv):
    code, _, err = run(*argv)
    assert code == 1 and "error" in err


def test_cap_exceeded():
    assert run("analyze", LINKED_LIST, "--max-iter", "1")[0] == 3
    assert run("analyze", LINKED_LIST, "--max-contexts", "3")[0] == 3


def test_check_diagnostics_exit_code(monkeypatch):
    monkeypatch.setattr(cli, "check_well_typed", lambda p, ct: [CheckDiagnostic("here", "bad")])
    code, out, err = run("analyze", LINKED_LIST, "--check")
    assert code == 2 and "here: bad" in err and out


@pytest.mark.parametrize("path", CORPUS, ids=os.path.basename)
@pytest.mark.parametrize("emit", ["types", "summaries", "all"])
def test_json_validates_and_matches_text(path, emit):
    code, out, _ = run("analyze", path, "--format", "json", "--emit", emit, "--stats")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema())
    code, text, _ = run("analyze", path, "--emit", emit, "--stats")
    assert code == 0
    assert text == render_text(doc)
    assert parse_text(text) == doc


def test_arrays_are_sorted():
    _, out, _ = run("analyze", LINKED_LIST, "--format", "json", "--emit", "all")
    doc = json.loads(out)
    assert doc["regions"] == sorted(doc["regions"])
    keys = [(e["class"], e["method"], e["region"], e["argRegions"]) for e in doc["methodTable"]]
    assert keys == sorted(keys)
    keys = [(e["class"], e["region"], e["field"]) for e in doc["fieldTable"]]
    assert keys == sorted(keys)


def test_summary_rendering():
    _, out, _ = run("analyze", LINKED_LIST, "--emit", "summaries")
    assert "this :↦ this ∨ this.next ∨ this.⟨next | (next,next) | next⟩" in out
    assert "returns this ∨ this.next ∨ this.⟨next | (next,next) | next⟩" in out


class _Tty(io.StringIO):
    def isatty(self):
        return True


def test_color_toggle(monkeypatch):
    monkeypatch.delenv("REGIONFJ_COLOR", raising=False)
    out = _Tty()
    cli.run(["analyze", LINKED_LIST], stdout=out, stderr=io.StringIO())
    assert "\x1b[" in out.getvalue()
    monkeypatch.setenv("REGIONFJ_COLOR", "0")
    out = _Tty()
    cli.run(["analyze", LINKED_LIST], stdout=out, stderr=io.StringIO())
    assert "\x1b[" not in out.getvalue()


def test_colored_text_still_parses():
    _, out, _ = run("analyze", LINKED_LIST, "--format", "json", "--emit", "all")
    doc = json.loads(out)
    assert parse_text(render_text(doc, color=True)) == doc


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "regionfj.cli", "analyze", LINKED_LIST,
                           "--format", "json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["regions"][0] == "Created@l1"
