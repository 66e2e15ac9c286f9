import json
import pathlib
import subprocess
import sys

import pytest

from universefan.cli import main

INPUTS = pathlib.Path(__file__).resolve().parent.parent / "inputs"
STAR = "1/(s:1*s:12) + 1/(s:1*s:13) + 1/(s:12*s:2) + 1/(s:13*s:3) + 1/(s:2*s:23) + 1/(s:23*s:3)"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_amplitude_from_json_file(capsys):
    code, out, _ = run(capsys, "amplitude", "--input", str(INPUTS / "star.json"))
    assert code == 0 and out.strip() == STAR


def test_amplitude_json_mode(capsys):
    code, out, _ = run(capsys, "amplitude", "--input", "star", "--json")
    assert code == 0 and json.loads(out)


def test_physics_psi4(capsys):
    code, out, _ = run(capsys, "physics", "--n", "3", "--what", "psi")
    assert code == 0
    assert out.strip() == "1/((Em:12+Ep:123)*Ep:12*Ep:123) + 1/((Em:23+Ep:123)*Ep:123*Ep:23)"


def test_physics_factor_at(capsys):
    code, out, _ = run(capsys, "physics", "--n", "4", "--factor-at", "1234;12")
    assert code == 0 and "equal: True" in out


def test_check_table(capsys):
    code, out, _ = run(capsys, "check", "--input", "nonbuild-nestoid")
    assert code == 0
    assert "building  no" in out and "nestoid   yes" in out


def test_nested_sets(capsys):
    code, out, _ = run(capsys, "nested-sets", "--input", "bowtie", "--maximal")
    assert code == 0 and len(out.splitlines()) == 38


def test_residue_and_factor_checks(capsys):
    assert run(capsys, "residue-check", "--input", "star")[0] == 0
    assert run(capsys, "residue-check", "--input", "star", "--region", "123;12")[0] == 0
    assert run(capsys, "factor-check", "--input", "bowtie", "--at", "ae")[0] == 0


def test_universe_fan_views(capsys):
    code, out, _ = run(capsys, "universe-fan", "--input", "bool2", "--faces")
    assert code == 0 and len(json.loads(out)["nodes"]) == 13
    code, out, _ = run(capsys, "universe-fan", "--input", "star", "--cone", "123,12,1", "--json")
    assert code == 0 and json.loads(out)["ok"]
    assert run(capsys, "universe-fan", "--input", "star")[0] == 0


def test_refine_outputs_fan_json(capsys):
    code, out, _ = run(capsys, "refine", "--input", "bool2", "--mode", "min")
    fan = json.loads(out)
    assert code == 0 and set(fan) == {"rays", "cones", "labels"}
    code, out, _ = run(capsys, "refine", "--input", "polygon-n3", "--diagonal")
    assert code == 0 and json.loads(out)


def test_input_errors_exit_2(capsys):
    assert run(capsys, "amplitude")[0] == 2
    assert run(capsys, "amplitude", "--input", "nope")[0] == 2
    assert run(capsys, "factor-check", "--input", "star", "--at", "99")[0] == 2
    assert run(capsys, "residue-check", "--input", "star", "--region", "12;3")[0] == 2
    assert run(capsys, "physics", "--n", "13")[0] == 2
    assert run(capsys, "amplitude", "--input", "bowtie", "--max-terms", "5")[0] == 2
    assert run(capsys, "refine", "--input", "star", "--diagonal")[0] == 2


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["physics", "--what", "psi"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["no-such-command"])
    assert e.value.code == 2


def test_selftest_subset(capsys):
    code, out, _ = run(capsys, "selftest", "--only", "1,2,12")
    assert code == 0 and out.count("[PASS]") == 3


def test_selftest_reports_failure(capsys):
    code, out, _ = run(capsys, "selftest", "--only", "5")
    assert code == 1 and "[FAIL]" in out


def test_deterministic_bytes_across_processes():
    cmd = [sys.executable, "-m", "universefan.cli", "wavefunction", "--input", "bool2", "--seed", "11"]
    a = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    assert a == b and a.strip()
