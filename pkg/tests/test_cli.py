import json

import pandas as pd
import pytest

from conftest import write_scenario
from mgcf.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from mgcf.config import DIAG_COLUMNS, FINAL_U_COLUMNS, VERDICT_TAGS


def test_check_f_mean_exits_with_failure(capsys):
    code = main(["check-f", "--family", "mean", "--n", "2", "--samples", "500"])
    assert code == EXIT_FAIL
    payload = json.loads(capsys.readouterr().out)
    assert payload["status"] == "FAIL"
    assert payload["conditions"]["Int20"]["witness"] == pytest.approx([0.1, 1.8])
    assert payload["conditions"]["Int7"]["status"] == "FAIL"


def test_check_f_gauss_passes(capsys):
    assert main(["check-f", "--family", "gauss", "--n", "2", "--samples", "500"]) == EXIT_OK


@pytest.mark.parametrize(
    "argv",
    [["bogus"], ["check-f", "--n", "2"], ["flow"], ["check-f", "--family", "mean", "--n", "two"]],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert "0.0.1" in capsys.readouterr().out


def test_unknown_family_is_an_execution_error(capsys):
    assert main(["check-f", "--family", "harmonic", "--n", "2"]) == 1
    assert "ParameterError" in capsys.readouterr().err


def test_bad_scenario_is_an_execution_error(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("flow:\n  sigma: 1.2\n", encoding="utf-8")
    assert main(["flow", str(path)]) == 1
    err = capsys.readouterr().err
    assert "sigma must lie in (0,1)" in err
    assert "line 2" in err


def test_missing_scenario_file(tmp_path, capsys):
    assert main(["flow", str(tmp_path / "missing.yaml")]) == 1


def test_flow_writes_three_files(tmp_path):
    scenario = write_scenario(tmp_path / "ball.yaml")
    out = tmp_path / "out"
    assert main(["flow", str(scenario), "--output-dir", str(out), "--prefix", "ball"]) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["ball_diag.csv", "ball_final_u.csv", "ball_summary.json"]

    diag = pd.read_csv(out / "ball_diag.csv")
    assert tuple(diag.columns) == DIAG_COLUMNS
    final = pd.read_csv(out / "ball_final_u.csv")
    assert tuple(final.columns) == FINAL_U_COLUMNS
    assert len(final) == 48

    summary = json.loads((out / "ball_summary.json").read_text(encoding="utf-8"))
    assert [row["tag"] for row in summary["verdicts"]] == list(VERDICT_TAGS)
    assert summary["termination"] == "TMaxReached"
    assert summary["scenario"]["domain"]["nodes"] == 48
    assert "wall_time_s" in summary


def test_flow_output_is_deterministic(tmp_path):
    scenario = write_scenario(tmp_path / "ball.yaml")
    for name in ("a", "b"):
        assert main(["flow", str(scenario), "--output-dir", str(tmp_path / name)]) == EXIT_OK
    for file in ("run_diag.csv", "run_final_u.csv"):
        assert (tmp_path / "a" / file).read_bytes() == (tmp_path / "b" / file).read_bytes()


def test_compare_identical_scenarios(tmp_path, capsys):
    a = write_scenario(tmp_path / "a.yaml")
    b = write_scenario(tmp_path / "b.yaml")
    assert main(["compare", str(a), str(b)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    unf2 = [row for row in payload["verdicts"] if row["tag"] == "Unf2"][0]
    assert unf2["status"] == "INCONCLUSIVE"
    assert payload["comparison"]["ordering"] == "INCONCLUSIVE"


def test_stationary_failure_still_writes_outputs(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "ball.yaml", t_max=0.01)
    out = tmp_path / "out"
    assert main(["stationary", str(scenario), "--output-dir", str(out)]) == 1
    assert "termination=TMaxReached" in capsys.readouterr().err
    assert (out / "run_summary.json").exists()


def test_identities_command(tmp_path, capsys):
    scenario = write_scenario(tmp_path / "ball.yaml", nodes=64)
    assert main(["identities", str(scenario)]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "PASS"
    assert payload["linearized"]["C2b3"] <= 1e-10
