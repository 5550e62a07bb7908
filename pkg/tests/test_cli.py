import json
import os
import subprocess
import sys

import pytest

from brstkit import cli


def run(*argv):
    code, out, err = cli.run(list(argv))
    return code, out.decode(), err.decode()


def test_validate_builtin():
    code, out, err = run("validate", "--algebra", "iso21")
    assert code == 0 and err == ""
    assert out.startswith("iso21: valid")


def test_validate_reports_violations_from_a_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "bad", "basis": ["a", "b", "c"], "structure": [[0, 1, 2, "1"], [1, 2, 0, "1"], [1, 2, 1, "1"], [0, 2, 1, "-1"]]}))
    code, out, err = run("validate", "--spec-file", str(path), "--format", "json")
    assert code == 3
    assert json.loads(out)["valid"] is False
    assert json.loads(err)["error"] == "jacobi"


def test_unreadable_spec_file_is_a_parse_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"name": "x", "basis": ["a"], "structure": [}')
    code, out, err = run("validate", "--spec-file", str(path))
    assert code == 2 and out == ""
    payload = json.loads(err)
    assert payload["error"] == "algebra"
    assert payload["where"] == "line 1 column 45"
    assert "Expecting value" in payload["message"]


@pytest.mark.parametrize(
    "argv, code",
    [
        (["validate", "--algebra", "nope"], 2),
        (["hs-table", "--algebra", "iso3", "--split", "K=0,1,2;Q=3"], 2),
        (["frobnicate"], 2),
        (["hs-table", "--algebra", "iso3", "--split", "K=3,4,5;J=0,1,2"], 3),
        (["killing", "--algebra", "iso3", "--max-curv-degree", "0"], 4),
        (["hs-table", "--algebra", "iso3", "--max-slice", "5"], 4),
    ],
)
def test_exit_codes(argv, code):
    got, out, err = run(*argv)
    assert got == code
    assert out == ""
    assert "error" in json.loads(err)


def test_hs_table_trivial_module():
    code, out, _ = run("hs-table", "--algebra", "iso3", "--module", "trivial", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["ghost_dims"] == [1, 0, 0, 2, 0, 0, 1]
    assert data["crosscheck"] is True


def test_hs_table_text_has_relative_rows_per_ideal_ghost():
    code, out, _ = run("hs-table", "--algebra", "iso21", "--max-curv-degree", "2")
    assert code == 0
    rel = out.split("relative part:\n")[1].splitlines()
    assert rel[0].split()[0] == "gh_C"
    assert [line.split()[0] for line in rel[1:]] == ["0", "1", "2", "3"]
    assert rel[1].split()[1:] == ["1", "0", "2"]


def test_descent_table_json():
    code, out, _ = run("descent", "table", "--algebra", "iso21", "--max-curv-degree", "2", "--format", "json")
    assert code == 0
    rows = json.loads(out)["rows"]
    pattern = [[int(bool(c)) for c in r["columns"]] for r in rows]
    assert pattern == [[1, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 0], [1, 1, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0], [1, 0, 0, 0]]
    assert [r["ghost"] for r in rows] == list(range(7))


def test_descent_classify_lists_kinds():
    code, out, _ = run("descent", "classify", "--algebra", "iso3", "--max-curv-degree", "1", "--format", "json")
    kinds = {c["kind"] for c in json.loads(out)["classes"]}
    assert {"E2:1", "F1", "E2:F3"} <= kinds


def test_deform_check():
    code, out, _ = run("deform-check", "--lam", "1", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert data["killing_rank"] == 6 and data["jacobi_valid"] and data["metric_invariant"]


def test_empty_cohomology_bytes():
    code, out, _ = run("cohomology", "--algebra", "so3", "--scheme", "ce_ghost", "--slice", "ghost=2", "--format", "json")
    assert code == 0
    assert out == '{"dim":0,"representatives":[]}\n'


def test_cohomology_grid():
    code, out, _ = run("cohomology", "--algebra", "so3", "--scheme", "ce_ghost", "--max-ghost", "3", "--format", "json")
    assert json.loads(out)["dims"] == [[1], [0], [0], [1]]


def test_derivation_table():
    code, out, _ = run("derivation", "--algebra", "so3", "--scheme", "ce_ghost", "--derivation", "gammaS")
    assert out.splitlines() == ["gammaS(C1) = -C2 C3", "gammaS(C2) = C1 C3", "gammaS(C3) = -C1 C2"]


def test_transgress_text():
    code, out, _ = run("transgress", "--algebra", "so21")
    assert code == 0
    assert "rung 3:" in out
    assert out.count("primitive") == 1


def test_cache_hit_is_byte_identical(tmp_path):
    argv = ["hs-table", "--algebra", "iso3", "--max-curv-degree", "2", "--format", "json", "--cache-dir", str(tmp_path)]
    cold = run(*argv)
    files = os.listdir(tmp_path)
    assert len(files) == 1 and not files[0].startswith(".tmp")
    warm = run(*argv)
    assert cold == warm
    uncached = run(*argv[:-2])
    assert uncached == cold


def test_cache_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("BRST_CACHE_DIR", str(tmp_path))
    run("killing", "--algebra", "so3")
    assert len(os.listdir(tmp_path)) == 1


def test_parallel_run_matches_serial():
    argv = ["hs-table", "--algebra", "iso21", "--max-curv-degree", "2", "--format", "json"]
    assert run(*argv, "--jobs", "2") == run(*argv, "--jobs", "1")


def test_repeated_runs_are_identical():
    argv = ["descent", "table", "--algebra", "iso3", "--max-curv-degree", "1", "--format", "json"]
    assert run(*argv) == run(*argv)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "brstkit.cli", "validate", "--algebra", "so3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("so3: valid")
