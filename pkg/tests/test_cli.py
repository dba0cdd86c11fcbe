"""CLI dispatch: exit codes, JSON round trip, CSV shape, determinism."""

import json
import math

import pytest

from bolzaspec.cli import dispatch, to_json


def run(argv, capsys):
    code = dispatch(argv)
    return code, capsys.readouterr().out


def test_usage_error_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        dispatch(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        dispatch(["integrals"])  # missing required --theta
    assert exc.value.code == 2


def test_integrals_json_round_trip(capsys):
    code, out = run(["integrals", "--theta", "0.6"], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["tool"] == "bolzaspec"
    assert report["subcommand"] == "integrals"
    assert report["config"]["theta"] == 0.6
    assert report["pass"] is True
    r = report["results"]
    assert 0.0 < r["C"] < r["A"]
    assert all(c["name"] for c in report["checks"])


def test_json_serializer_17_digits():
    text = to_json({"x": 0.1, "flag": True, "n": 3, "s": 'a"b'})
    assert '"x": 0.10000000000000001' in text
    assert '"flag": true' in text
    assert '"s": "a\\"b"' in text
    assert json.loads(text)["x"] == 0.1


def test_determinism_with_pinned_timestamp(capsys, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    _, first = run(["integrals", "--theta", "0.7"], capsys)
    _, second = run(["integrals", "--theta", "0.7"], capsys)
    assert first == second
    assert json.loads(first)["timestamp"] == "2023-11-14T22:13:20Z"


def test_output_file_written(tmp_path, capsys):
    target = tmp_path / "report.json"
    code = dispatch(["--output", str(target), "integrals", "--theta", "0.6"])
    assert code == 0
    assert json.loads(target.read_text())["pass"] is True


def test_sweep_csv_shape(capsys):
    code, out = run(
        ["sweep", "--from", "0.55", "--to", "0.7", "--steps", "3", "--h", "0.06"],
        capsys,
    )
    assert code == 0
    lines = out.split("\n")
    assert lines[0] == "theta,sector,branch_index,eigenvalue"
    # 3 thetas x 2 sectors x 4 branches, plus header and trailing newline
    assert len([ln for ln in lines if ln]) == 1 + 3 * 2 * 4
    # comma separated, dot decimal
    first = lines[1].split(",")
    assert len(first) == 4
    float(first[0]), float(first[3])


def test_index_table_csv(capsys):
    code, out = run(
        ["index-table", "--thetas", str(math.pi / 4), "--h", "0.06"], capsys
    )
    assert code == 0
    lines = [ln for ln in out.split("\n") if ln]
    assert lines[0] == "theta,Ind,Nul"
    theta, ind, nul = lines[1].split(",")
    assert int(ind) == 1
    assert int(nul) >= 3


def test_nullspace_failing_check_exits_1(capsys, monkeypatch):
    # force a failing check by shrinking every tolerance to zero
    import bolzaspec.cli as cli

    def strict_check(name, value, tolerance, ok=None):
        return {"name": name, "value": value, "tolerance": 0.0, "pass": False}

    monkeypatch.setattr(cli, "check", strict_check)
    code, out = run(["integrals", "--theta", "0.6"], capsys)
    assert code == 1
    assert json.loads(out)["pass"] is False
