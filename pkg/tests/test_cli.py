import csv
import io
import json

import pytest

from qtchain import cli, verify


def run(capsys, *argv):
    code = cli.dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_e1(capsys):
    code, out, _ = run(capsys, "eval", "--nu", "1", "--points", "1,0.5")
    assert code == 0 and json.loads(out)["value"] == "1.5"


def test_kernel_row_sums_to_one(capsys):
    code, out, _ = run(capsys, "kernel-row", "--q", "0.5", "--t", "0.5", "--plus", "0", "--minus", "0", "--dps", "30")
    obj = json.loads(out)
    total = sum(float(a["weight"]) for a in obj["atoms"]) + float(obj["tail_bound"])
    assert code == 0 and abs(total - 1) < 1e-8


def test_kernel_row_csv(capsys):
    code, out, _ = run(capsys, "kernel-row", "--plus", "1,0", "--t", "0.3", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0] == ["plus", "minus", "weight"] and rows[-1][0] == "tail"


def test_tau_flag(capsys):
    code, out, _ = run(capsys, "kernel-row", "--q", "0.5", "--tau", "2", "--plus", "1", "--minus", "0", "--dps", "20")
    assert code == 0 and json.loads(out)["source"]["params"]["t"] == "0.25"


@pytest.mark.parametrize(
    "argv",
    [
        ["kernel-row", "--bogus"],
        ["kernel-row", "--q", "1.5"],
        ["kernel-row", "--t", "0.5", "--tau", "2"],
        ["kernel-row", "--plus", "0,1"],
        ["eval", "--nu", "a"],
        ["frobnicate"],
    ],
)
def test_validation_errors_exit_1(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = cli.dispatch(argv)
        raise SystemExit(code)
    assert exc.value.code == 1


def test_verify_failure_exit_2(tmp_path, capsys):
    manifest = tmp_path / "m.ini"
    manifest.write_text("[under]\ncheck = stochastic\nq = 0.5\nt = 0.3\nplus = 1\nminus = 0\nm_max = 1\n")
    code, out, _ = run(capsys, "verify", "--manifest", str(manifest))
    assert code == 2 and json.loads(out)[0]["passed"] is False


def test_verify_subset_passes(capsys):
    code, out, _ = run(capsys, "verify", "--only", "okounkov")
    assert code == 0 and len(json.loads(out)) == 2


def test_verify_parallel_matches_serial(capsys):
    _, serial, _ = run(capsys, "verify", "--only", "stochastic")
    _, parallel, _ = run(capsys, "verify", "--only", "stochastic", "--jobs", "2")
    assert serial == parallel


def test_emit_report_formats():
    assert json.loads(cli.emit_report([])) == []
    rep = verify.CheckReport("x", {"a": 1}, 0.5, 1.0, True, 0.1)
    js = json.loads(cli.emit_report([rep]))[0]
    row = next(csv.DictReader(io.StringIO(cli.emit_report([rep], "csv"))))
    assert js["passed"] is True and row["passed"] == "true"
    assert js["residual"] == row["residual"] and js["tolerance"] == row["tolerance"]
    assert json.loads(row["inputs"]) == js["inputs"]
    assert "runtime" not in js and "runtime" in json.loads(cli.emit_report([rep], timing=True))[0]


def test_sample_reproducible(capsys, tmp_path):
    args = ["sample", "--t", "0.3", "--plus", "1,0", "--minus", "1", "--paths", "3", "--seed", "8"]
    _, a, _ = run(capsys, *args)
    out = tmp_path / "b.json"
    run(capsys, *args, "--output", str(out))
    assert out.read_text() == a
    assert len(json.loads(a)) == 3


def test_sample_row_draws(capsys):
    code, out, _ = run(capsys, "sample", "--t", "0.3", "--plus", "1", "--minus", "0", "--row-draws", "1000")
    rows = json.loads(out)
    assert code == 0 and sum(r["count"] for r in rows) == 1000


def test_compose_and_boundary_and_extended(capsys):
    code, out, _ = run(capsys, "compose", "--t", "0.3", "--plus", "2,1,0", "--K", "1", "--dps", "20")
    assert code == 0 and json.loads(out)["atoms"]
    code, out, _ = run(capsys, "boundary", "--t", "0.3", "--plus", "2,1,0;constant", "--K", "1", "--N-list", "2,3", "--nus", "1|2", "--dps", "20")
    assert code == 0 and len(json.loads(out)) == 4
    code, out, _ = run(capsys, "extended-row", "--t", "0.3", "--plus", "1", "--minus", "0", "--N", "3", "--A", "20", "--dps", "20")
    obj = json.loads(out)
    assert code == 0 and "violating_mass" in obj and obj["N"] == 3


def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.dispatch(["kernel-row", "--help"])
    assert exc.value.code == 0
    assert "--m-max" in capsys.readouterr().out
