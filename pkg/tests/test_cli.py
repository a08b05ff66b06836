import json
import shutil
import subprocess

import pytest

from maass_poincare import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_coeff_json_skips_off_class(capsys):
    code, out, _ = run(capsys, "coeff", "--plus", "--m", "-3", "--twice-k", "1", "--N", "4", "--s", "0.75",
                       "--n", "1..6", "--tol", "0.05", "--c-max", "2048", "--reproducible")
    assert code == 0
    data = json.loads(out)
    assert [r[0] for r in data["rows"]] == [1, 4, 5]
    assert data["skipped_off_class"] == [2, 3, 6]
    assert "generated_at" not in data
    # the q^1 coefficient of f_{-3} is b(1) - 8 * 3 H(3) = b(1) - 8 = -248
    assert data["rows"][0][1] == pytest.approx(-240, abs=1.0)


def test_coeff_csv_and_file_output(capsys, tmp_path):
    path = tmp_path / "out.csv"
    code, out, _ = run(capsys, "coeff", "--m", "0", "--twice-k", "8", "--N", "1", "--s", "2", "--n", "1,2",
                       "--format", "csv", "--out", str(path))
    assert code == 0 and out == ""
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert lines[0] == "n,re,im,err,c_used,converged"
    assert len(lines) == 3


def test_output_is_reproducible(capsys):
    argv = ("coeff", "--m", "1", "--twice-k", "0", "--s", "1.2", "--n", "-2..2", "--tol", "1e-6", "--reproducible")
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv)[1]
    assert a == b


def test_strict_unconverged_exit_code(capsys):
    code, _, err = run(capsys, "coeff", "--plus", "--m", "-3", "--twice-k", "1", "--N", "4", "--s", "0.75",
                       "--n", "1", "--tol", "1e-12", "--c-max", "64", "--strict")
    assert code == 2
    assert "did not converge" in err


@pytest.mark.parametrize("argv", [
    ["coeff", "--m", "1"],
    ["coeff", "--plus", "--m", "1", "--twice-k", "2", "--N", "4", "--s", "1", "--n", "1"],
    ["coeff", "--plus", "--m", "0", "--twice-k", "1", "--N", "4", "--s", "0.75", "--n", "4"],
    ["coeff", "--m", "1", "--twice-k", "0", "--s", "1.2", "--n", "5..1"],
    ["coeff", "--m", "1", "--twice-k", "0", "--s", "1.2", "--n", "1", "--stability-factor", "1"],
    ["basis", "f"],
    ["basis", "f", "--d", "-2"],
    ["verify", "nonsense"],
    ["kloosterman", "--twice-k", "1", "--m", "1", "--n", "1", "--c", "3"],
    ["frobnicate"],
])
def test_usage_errors_exit_one(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "error" in err


def test_thread_env_override(capsys, monkeypatch):
    monkeypatch.setenv("MAASS_THREADS", "zero")
    code, _, _ = run(capsys, "coeff", "--m", "1", "--twice-k", "0", "--s", "1.2", "--n", "1")
    assert code == 1
    monkeypatch.setenv("MAASS_THREADS", "2")
    code, _, _ = run(capsys, "coeff", "--m", "1", "--twice-k", "0", "--s", "1.2", "--n", "1", "--tol", "1e-6")
    assert code == 0


def test_basis_theta_and_f(capsys):
    code, out, _ = run(capsys, "basis", "theta", "--nmax", "9", "--reproducible")
    assert code == 0
    assert json.loads(out)["coeffs"] == [[0, 1, 0], [1, 2, 0], [4, 2, 0], [9, 2, 0]]
    code, out, _ = run(capsys, "basis", "f", "--d", "-3", "--nmax", "5", "--tol", "0.05", "--c-max", "2048")
    assert code == 0
    coeffs = {row[0]: row[1] for row in json.loads(out)["coeffs"]}
    assert coeffs[-3] == 1 and coeffs[1] == pytest.approx(-248, abs=1.0)


def test_kloosterman_command(capsys):
    code, out, _ = run(capsys, "kloosterman", "--twice-k", "0", "--m", "0", "--n", "0", "--c", "12")
    assert code == 0
    re, im = map(float, out.split())
    assert (re, im) == (4.0, 0.0)


@pytest.mark.parametrize("suite", ["kloosterman-symmetry", "plus-identities", "theta-automorphy", "specfun", "eisenstein"])
def test_fast_suites_pass(capsys, suite):
    code, out, _ = run(capsys, "verify", suite, "--reproducible")
    data = json.loads(out)
    assert code == 0 and data["passed"] is True
    assert all(c["passed"] for c in data["checks"])


def test_console_script_installed():
    exe = shutil.which("maass-poincare")
    if exe is None:
        pytest.skip("console script not on PATH")
    res = subprocess.run([exe, "kloosterman", "--twice-k", "1", "--m", "-3", "--n", "4", "--c", "8"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert len(res.stdout.split()) == 2
