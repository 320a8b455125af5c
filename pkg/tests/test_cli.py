import json

import pytest

from binet import cli
from binet.errors import ParseError, ValidationError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_minimal_simulate_flags():
    cfg = cli.parse_config(["simulate", "--eta", "0.5", "--v", "1.0", "--joint", "bsm", "--charu-G", "1.0"])
    sc = cfg.scenario_config()
    assert sc.m == 1 and sc.n == 1
    assert cfg.source1.eta == 0.5 and cfg.source1.visibility == 1.0


def test_out_of_range_precision_names_field(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"charu_G": [0.5, 1.2]}))
    with pytest.raises(ValidationError) as info:
        cli.parse_config(["simulate", "--config", str(path)])
    assert info.value.field == "charu_G"


def test_sweep_grid_is_inclusive():
    cfg = cli.parse_config(["sweep", "--family", "werner", "--param", "v", "--start", "0.3", "--stop", "1.0", "--steps", "141"])
    pts = cfg.grid.points()
    assert len(pts) == 141
    assert pts[0] == 0.3 and pts[-1] == 1.0


def test_flags_override_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"eta": 0.3, "v": 0.9, "charu_G": [0.5, 1.0]}))
    cfg = cli.parse_config(["simulate", "--config", str(path), "--v", "0.8"])
    assert cfg.eta == 0.3 and cfg.v == 0.8 and cfg.charu_G == [0.5, 1.0]


def test_parse_error_reports_position(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "eta": 0.5,\n  "v": \n}')
    with pytest.raises(ParseError, match="line 4 column 1"):
        cli.parse_config(["simulate", "--config", str(path)])


def test_unknown_field_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"gamma": 1}')
    with pytest.raises(ParseError, match="gamma"):
        cli.parse_config(["simulate", "--config", str(path)])


def test_sweep_needs_bounds():
    with pytest.raises(ParseError):
        cli.parse_config(["sweep", "--family", "werner"])


def test_jobs_from_environment(monkeypatch):
    monkeypatch.setenv("BINET_JOBS", "3")
    assert cli.parse_config(["verify"]).jobs == 3
    assert cli.parse_config(["verify", "--jobs", "1"]).jobs == 1


def test_validation_exit_code(capsys):
    code, _, err = run(capsys, "simulate", "--charu-G", "1.2")
    assert code == 2 and "charu_G" in err


def test_simulate_prints_both_values(capsys, tmp_path):
    code, out, _ = run(capsys, "simulate", "--eta", "0.3", "--v", "0.9", "--charu-G", "0.5", "0.8",
                       "--charu-angle", "0.5", "0.9", "--out", str(tmp_path))
    assert code == 0
    assert "brute-force B" in out and "closed-form B" in out and "|difference|" in out
    data = json.loads((tmp_path / "results.json").read_text())
    assert data["difference"] < 1e-9


def test_simulate_ejm(capsys):
    code, out, _ = run(capsys, "simulate", "--joint", "ejm", "--charu-G", "0.7142857142857143")
    assert code == 0
    assert "brute-force BE = 3.0000" in out


def test_simulate_table_csv(capsys, tmp_path):
    path = tmp_path / "table.csv"
    assert run(capsys, "simulate", "--table-csv", str(path))[0] == 0
    assert path.read_text().startswith("x,z,a,bob_label,c,p\n")


def test_critical_output(capsys):
    code, out, _ = run(capsys, "critical", "--scenario", "uni-brgp", "--eta", "0.5", "--v", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "0.500 0.536 0.581 0.641 0.725 0.859"
    assert lines[-1] == "max rounds: 6"


def test_critical_without_violation_fails(capsys):
    code, _, err = run(capsys, "critical", "--v", "0.6")
    assert code == 2 and "NoViolation" in err


def test_threshold_output(capsys):
    code, out, _ = run(capsys, "threshold", "--rounds", "2", "--family", "werner", "--scenario", "uni-brgp")
    assert code == 0
    value = float(out.split()[2])
    assert value == pytest.approx(0.574, abs=1e-3)


def test_max_rounds_and_frontier(capsys):
    assert run(capsys, "max-rounds", "--scenario", "uni-ejm")[1].strip() == "max rounds: 2"
    assert run(capsys, "frontier")[1].strip() == "frontier: (1,6) (2,3) (3,2) (6,1)"
    assert run(capsys, "frontier", "--equal-precision")[1].strip() == "frontier: (2,2)"


def test_sweep_csv(capsys, tmp_path):
    code, _, _ = run(capsys, "sweep", "--family", "werner", "--start", "0.3", "--stop", "1.0",
                     "--steps", "8", "--jobs", "2", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().split("\n")
    assert lines[0] == "v,entanglement,max_rounds"
    assert len(lines) == 10 and lines[-1] == ""
    assert lines[-2].split(",")[-1] == "6"


def test_sweep_of_B(capsys, tmp_path):
    code, out, _ = run(capsys, "sweep", "--quantity", "B", "--param", "eta", "--start", "0.1", "--stop", "0.5",
                       "--steps", "3", "--jobs", "1")
    assert code == 0
    last = out.splitlines()[-1].split(",")
    assert float(last[0]) == 0.5 and float(last[2]) == pytest.approx(2 ** 0.5)


def test_figures(capsys, tmp_path):
    code, _, _ = run(capsys, "figures", "--steps", "6", "--jobs", "1", "--out", str(tmp_path))
    assert code == 0
    fig1 = (tmp_path / "figure1.csv").read_text().splitlines()
    assert fig1[0] == "round,uni_brgp,bi_equal_brgp,uni_ejm"
    assert fig1[1].startswith("1,0.5")
    for name in ("figure2.csv", "figure3.csv"):
        rows = (tmp_path / name).read_text().splitlines()
        assert len(rows) == 7
        assert rows[0].endswith("max_rounds_bsm,max_rounds_ejm")


def test_verify_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    out = []
    for path, jobs in ((a, "1"), (b, "2")):
        code, text, _ = run(capsys, "verify", "--samples", "12", "--seed", "7", "--jobs", jobs, "--out", str(path))
        assert code == 0
        out.append(text)
    assert out[0] == out[1]
    assert "12 passed, 0 failed" in out[0]
    assert (a / "results.json").read_bytes() == (b / "results.json").read_bytes()
