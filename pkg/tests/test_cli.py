import csv

import pytest

from pshcurrents.cli import main


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    rows = list(csv.DictReader(out.open())) if out.exists() else []
    return code, rows, out


def test_nu_on_t0_is_constant(tmp_path):
    code, rows, _ = run(tmp_path, "nu", "--fixture", "T0")
    assert code == 0
    assert len(rows) == 3
    for row in rows:
        assert float(row["nu"]) == pytest.approx(1.0, abs=1e-9)
        assert float(row["error"]) < 1e-9


def test_custom_grid(tmp_path):
    code, rows, _ = run(tmp_path, "nu", "--fixture", "T2", "--grid", "0.2,0.4")
    assert code == 0
    assert [float(r["r"]) for r in rows] == [0.2, 0.4]
    assert float(rows[1]["nu"]) == pytest.approx(0.08, rel=1e-9)


def test_jensen_calibrated_passes(tmp_path):
    code, rows, _ = run(tmp_path, "jensen", "--fixture", "T2")
    assert code == 0
    assert rows and all(r["status"] == "pass" for r in rows)


def test_jensen_literal_kappa_flags_without_failing(tmp_path):
    code, rows, _ = run(tmp_path, "jensen", "--fixture", "T2", "--kappa", "paper")
    assert code == 0
    assert rows and all(r["status"] == "flag" for r in rows)
    assert all(float(r["kappa"]) == 1.0 for r in rows)


def test_unknown_fixture_is_a_config_error(tmp_path):
    code, _, out = run(tmp_path, "nu", "--fixture", "nope")
    assert code == 2
    assert not out.exists()


@pytest.mark.parametrize(
    "extra",
    [["--grid", "1,0.5"], ["--budget", "10"], ["--tol", "0"], ["--grid", "a,b"]],
)
def test_bad_arguments_exit_2(tmp_path, extra):
    code, _, _ = run(tmp_path, "nu", "--fixture", "T0", *extra)
    assert code == 2


def test_list_fixtures(tmp_path):
    code, rows, _ = run(tmp_path, "list-fixtures")
    assert code == 0
    by_id = {r["id"]: r for r in rows}
    assert "conic; nu constant; dd^c = -delta_0" in by_id["T0"]["facts"]
    assert "nu = 1" in by_id["H"]["facts"]
    assert by_id["S3"]["bidimension"] == "(2;2)"
    code, some, _ = run(tmp_path, "list-fixtures", "chart", name="f.csv")
    assert code == 0
    assert [r["id"] for r in some] == ["Hprime"]


def test_config_file(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[experiment]\noperation = nu\nfixture = T2\ngrid = 0.5, 1\nseed = 3\n")
    code, rows, _ = run(tmp_path, "--config", str(cfg))
    assert code == 0
    assert float(rows[-1]["nu"]) == pytest.approx(0.5, rel=1e-9)


def test_command_line_overrides_config(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[experiment]\noperation = nu\nfixture = T2\n")
    code, rows, _ = run(tmp_path, "nu", "--config", str(cfg), "--fixture", "H")
    assert code == 0
    assert all(float(r["nu"]) == pytest.approx(1.0, abs=1e-9) for r in rows)


@pytest.mark.parametrize(
    "body",
    [
        "[experiment]\noperation = nu\ncolour = red\n",
        "[experiment]\noperation = nu\nbudget = 5\n",
        "[other]\noperation = nu\n",
        "[experiment]\noperation = teleport\n",
    ],
)
def test_bad_config_exit_2(tmp_path, body):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(body)
    code, _, _ = run(tmp_path, "--config", str(cfg))
    assert code == 2


def test_missing_config_file(tmp_path):
    code, _, _ = run(tmp_path, "--config", str(tmp_path / "absent.ini"))
    assert code == 2


def test_refused_cone_is_a_failure(tmp_path):
    code, _, _ = run(tmp_path, "cone", "--fixture", "T1")
    assert code == 1


def test_chart_invisible_fixture(tmp_path):
    code, _, _ = run(tmp_path, "coeff-masses", "--fixture", "T1")
    assert code == 1


def test_stdout_when_no_out(capsys):
    assert main(["nu", "--fixture", "H", "--grid", "0.5,1"]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == "r,nu,error"
    assert "exit 0" in captured.err


def test_rerun_gives_identical_bytes(tmp_path):
    _, _, a = run(tmp_path, "lelong-number", "--fixture", "S_rad", name="a.csv")
    _, _, b = run(tmp_path, "lelong-number", "--fixture", "S_rad", name="b.csv")
    assert a.read_bytes() == b.read_bytes()
