import json
import subprocess
import sys

import pytest

from uniequiv.cli import build_parser, main
from uniequiv.complexes import icosphere, save_complex


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_compute_report_and_determinism(tmp_path, capsys):
    args = ["compute", "--complex", "icosphere:level=0", "--field-a", "builtin:diag_const:values=0,1",
            "--field-b", "builtin:cp1_projection:k=1"]
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(p1)]) == 0
    assert main(args + ["--out", str(p2), "--jobs", "3"]) == 0
    assert p1.read_bytes() == p2.read_bytes()
    data = json.loads(p1.read_text())
    assert data["obstruction"]["rebased_class"] == [1, -1]
    assert data["obstruction"]["vanishing"] is False
    assert data["H2"] == {"k": 2, "free_rank": 2, "torsion": []}


def test_compute_seeded_conjugate_vanishes(capsys):
    code, out, _ = _run(["compute", "--complex", "circle:m=12", "--field-a", "builtin:root_swap_circle",
                         "--field-b", "builtin:conjugated:base=root_swap_circle", "--seed", "3"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["obstruction"]["vanishing"] and data["intertwiner_certificate"]["passed"]
    assert data["monodromy"]["generators"] == [{"edge": [6, 7], "permutation": [1, 0]}]


def test_compute_inadmissible_exit_2(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["compute", "--complex", "interval:m=16", "--field-a", "builtin:jump_interval",
                 "--field-b", "builtin:jump_interval", "--out", str(out)])
    assert code == 2
    data = json.loads(out.read_text())
    assert data["admissible"] is False
    assert data["admissibility"]["A"]["passed"] is False


def test_compute_char_poly_mismatch_exit_2(capsys):
    code, out, _ = _run(["compute", "--complex", "icosphere:level=0", "--field-a", "builtin:diag_const:values=0,2",
                         "--field-b", "builtin:cp1_projection:k=1"], capsys)
    assert code == 2 and json.loads(out)["same_char_poly"] is False


def test_refinement_exceeded_exit_3(capsys):
    code, _, err = _run(["compute", "--complex", "icosphere:level=0", "--field-a", "builtin:diag_const:values=0,1",
                         "--field-b", "builtin:cp1_projection:k=2", "--max-subdiv", "0", "--match-threshold", "0.01"], capsys)
    assert code == 3 and "refinement" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["compute", "--complex", "torus:m=3", "--field-a", "builtin:diag_const", "--field-b", "builtin:diag_const"],
        ["compute", "--complex", "circle:m=2", "--field-a", "builtin:diag_const", "--field-b", "builtin:diag_const"],
        ["compute", "--complex", "circle:m=5", "--field-a", "builtin:nope", "--field-b", "builtin:diag_const"],
        ["compute", "--complex", "circle:m=5", "--field-a", "builtin:cp1_projection", "--field-b", "builtin:cp1_projection"],
        ["examples", "bogus"],
    ],
)
def test_bad_input_exit_1(argv, capsys):
    code, _, err = _run(argv, capsys)
    assert code == 1 and err.startswith("error:")


def test_bad_tolerance_usage_error(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["compute", "--complex", "circle:m=5", "--field-a", "x", "--field-b", "y", "--tol-gap", "-1"])
    assert ei.value.code == 2


def test_complex_file_input(tmp_path, capsys):
    path = tmp_path / "s.json"
    save_complex(icosphere(0), path)
    code, out, _ = _run(["cohomology", "--complex", str(path), "--trivial", "2", "--degree", "2"], capsys)
    assert code == 0
    assert json.loads(out)["groups"] == [{"k": 2, "free_rank": 2, "torsion": []}]


def test_cohomology_sign(capsys):
    code, out, _ = _run(["cohomology", "--complex", "circle:m=12", "--sign"], capsys)
    groups = json.loads(out)["groups"]
    assert code == 0
    assert groups[0]["free_rank"] == 0 and groups[1]["torsion"] == [2]


def test_cohomology_from_field(capsys):
    code, out, _ = _run(["cohomology", "--complex", "mapping_torus_antipodal:level=0",
                         "--field-a", "builtin:twisted_A", "--degree", "2"], capsys)
    assert code == 0 and json.loads(out)["groups"][0]["free_rank"] == 1


@pytest.mark.parametrize("name", ["circle", "cp1_chern"])
def test_examples(name, capsys):
    code, out, err = _run(["examples", name], capsys)
    assert code == 0
    assert json.loads(out)[name]["passed"] is True
    assert f"{name}: PASS" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "uniequiv", "cohomology", "--complex", "circle:m=4"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["groups"][1]["free_rank"] == 1


def test_parser_has_expected_flags():
    text = build_parser().parse_args(["compute", "--complex", "a", "--field-a", "b", "--field-b", "c"])
    for flag in ("out", "tol_gap", "tol_norm", "match_threshold", "max_subdiv", "seed", "jobs"):
        assert hasattr(text, flag)
