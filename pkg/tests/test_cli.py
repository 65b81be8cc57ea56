import io
import json
import re
import subprocess
import sys

import pytest

from lieflow.cli import main
from lieflow.report import Report

CHECK_LINE = re.compile(r"^CHECK \S+ residual=\S+ threshold=\S+ (PASS|FAIL)$")


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def write(tmp_path, obj, name="doc.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def test_jordan_catmap_generator():
    code, text = run("jordan", "--input", "catmap-generator")
    assert code == 0
    assert "OVERALL jordan PASS" in text
    code, text = run("jordan", "--input", "catmap-generator", "--format", "json")
    parts = json.loads(text)["data"]["parts"]
    assert all(abs(float(v)) < 1e-12 for row in parts["E"] + parts["N"] for v in row)


def test_jordan_zero_matrix(tmp_path):
    code, text = run("jordan", "--input", write(tmp_path, {"entries": [["0", "0"], ["0", "0"]]}))
    assert code == 0
    assert "E =\n  [0, 0]\n  [0, 0]" in text


def test_non_square_matrix_is_input_error(tmp_path, capsys):
    p = write(tmp_path, {"dim": 2, "entries": [["1", "2", "3"], ["4", "5", "6"]]})
    assert main(["jordan", "--input", p], out=io.StringIO()) == 2
    assert "/entries/0" in capsys.readouterr().err


def test_other_input_errors(tmp_path):
    assert run("jordan", "--input", write(tmp_path, "{broken"))[0] == 2
    assert run("jordan", "--input", str(tmp_path / "missing.json"))[0] == 2
    assert run("jordan")[0] == 2
    assert run("bogus-command")[0] == 2
    assert run("cocycle", "--input", "heisenberg")[0] == 2


def test_failed_check_exits_one(tmp_path):
    # ad(H) is a derivation of sl2 but not skew for the Cartan inner product
    doc = {"dim": 3, "labels": ["H", "E", "F"],
           "structure": [[0, 1, 1, "2"], [0, 2, 2, "-2"], [1, 2, 0, "1"]],
           "theta": {"entries": [["-1", "0", "0"], ["0", "0", "-1"], ["0", "-1", "0"]]},
           "derivation": {"entries": [["0", "0", "0"], ["0", "2", "0"], ["0", "0", "-2"]]}}
    code, text = run("isometry", "--input", write(tmp_path, doc))
    assert code == 1 and "OVERALL isometry FAIL" in text


def test_text_format_is_line_oriented():
    code, text = run("grade", "--input", "heisenberg")
    assert code == 0
    lines = text.splitlines()
    assert lines[0].startswith("# input models:heisenberg sha256=")
    checks = [l for l in lines if l.startswith("CHECK ")]
    assert checks and all(CHECK_LINE.match(l) for l in checks)
    assert lines[-2] == "OVERALL grade PASS"


def test_json_round_trip_and_determinism():
    args = ("recurrent", "--input", "semidirect-example", "--samples", "5", "--format", "json")
    code1, a = run(*args)
    code2, b = run(*args)
    assert code1 == code2 == 0
    da, db = json.loads(a), json.loads(b)
    da.pop("wall_time"), db.pop("wall_time")
    assert da == db
    rep = Report.from_dict(json.loads(a))
    assert rep.passed and rep.to_dict()["checks"] == json.loads(a)["checks"]


@pytest.mark.parametrize("command, model", [
    ("flow", "semidirect-example"),
    ("cocycle", "cocycle-contracting"),
    ("catmap", "catmap"),
    ("isometry", "sl2"),
    ("isometry", "heisenberg-elliptic"),
])
def test_commands_pass_on_bundled_models(command, model):
    code, text = run(command, "--input", model, "--samples", "10", "--qmax", "12")
    assert code == 0, text


def test_catmap_without_input():
    code, text = run("catmap", "--qmax", "5", "--format", "json")
    # distinct points with exact denominator q <= 5: 1 + 3 + 8 + 12 + 24
    assert code == 0 and json.loads(text)["data"]["points"] == 48


def test_verify_single_document():
    code, text = run("verify", "--input", "semidirect-xi0", "--samples", "5")
    assert code == 0
    assert "CHECK recurrent.candidates_recurrent" in text
    assert "CHECK flow.homomorphism" in text


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "lieflow.cli", "jordan", "--input", "abelian-rotation"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "OVERALL jordan PASS" in res.stdout
