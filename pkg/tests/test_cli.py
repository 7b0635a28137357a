import csv
import io
import json
from contextlib import redirect_stderr, redirect_stdout

import pytest

from stopping.cli import COMMANDS, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = run(list(argv))
    return code, out.getvalue(), err.getvalue()


def rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(body))


def test_subcommand_names():
    assert set(COMMANDS) == {
        "rbm-lt", "rbm-density", "rbm-mc", "lehoczky-curve", "lehoczky-rate",
        "dde-solve", "levy-rate", "levy-exit", "levy-mc", "verify",
    }


def test_rbm_lt_example():
    code, out, _ = call("rbm-lt", "--mu", "0", "--sigma", "1", "--x", "0", "--delta", "1", "--theta", "0.5")
    assert code == 0
    (row,) = rows(out)
    assert float(row["laplace_transform"]) == pytest.approx(0.6480543, abs=5e-8)


def test_levy_rate_example():
    code, out, _ = call("levy-rate", "--model", "caballero", "--beta", "1.5", "--delta", "1")
    assert code == 0
    assert round(float(rows(out)[0]["rate"]), 4) == 0.2910


def test_levy_rate_reports_printed_rate():
    _, out, _ = call("levy-rate", "--model", "cpp-exp", "--c", "2", "--lam", "1", "--jump-mu", "1", "--delta", "1")
    (row,) = rows(out)
    assert float(row["rate"]) == pytest.approx(0.21763329919679192)
    assert float(row["printed_rate"]) == pytest.approx(0.7707470412683991)


def test_verify_analytic_suite():
    code, out, err = call("verify", "--suite", "analytic")
    assert code == 0
    assert all(r["passed"] == "1" for r in rows(out))
    assert "[PASS]" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["bogus"],
        ["rbm-lt", "--no-such-flag"],
        ["rbm-lt", "--sigma", "-1"],
        ["rbm-lt", "--theta", "nan"],
        ["rbm-mc", "--n-paths", "500"],
        ["levy-mc", "--n-paths", "500"],
        ["rbm-lt", "--seed", "3"],
        ["levy-rate", "--model", "cpp-exp", "--c", "0.5"],
        ["rbm-density", "--method", "gaver_stehfest", "--order", "30"],
        ["lehoczky-curve", "--model", "linear-phi", "--delta", "3"],
        [],
    ],
)
def test_usage_and_validation_errors(argv):
    code, out, err = call(*argv)
    assert code == 1
    assert out == ""
    assert err


def test_every_analytic_command_runs():
    for argv in (
        ["rbm-density", "--n-t", "5"],
        ["lehoczky-curve", "--model", "linear-phi", "--xi-max", "3", "--n-xi", "4"],
        ["lehoczky-rate", "--model", "bm-drift", "--xi", "0", "1"],
        ["dde-solve", "--xi-max", "2", "--n-xi", "3"],
        ["levy-exit", "--model", "bm-drift"],
    ):
        code, out, _ = call(*argv)
        assert code == 0, argv
        assert rows(out)


def test_lehoczky_outputs():
    _, out, _ = call("lehoczky-rate", "--model", "linear-phi", "--xi", "0")
    assert float(rows(out)[0]["hazard"]) == pytest.approx(4 / 3)
    _, out, _ = call("levy-exit", "--model", "bm-drift", "--x", "1", "--y", "1")
    assert float(rows(out)[0]["exit_up_probability"]) == pytest.approx(0.880797, abs=1e-6)


def test_mc_csv_has_metadata_header(tmp_path):
    path = tmp_path / "s.csv"
    code, out, _ = call("rbm-mc", "--n-paths", "300", "--seed", "4", "--mu", "1", "--out", str(path))
    assert code == 0 and out == ""
    lines = path.read_text().splitlines()
    meta = [line for line in lines if line.startswith("#")]
    assert "# seed=4" in meta and "# n_paths=300" in meta
    body = rows(path.read_text())
    assert len(body) == 300
    assert all("," not in r["first_passage_time"] for r in body)


@pytest.mark.parametrize(
    "argv",
    [
        ["rbm-lt", "--mu", "0.3", "--theta", "0.5", "2"],
        ["rbm-density", "--n-t", "4", "--method", "gaver_stehfest"],
        ["lehoczky-curve", "--n-xi", "3"],
        ["lehoczky-rate", "--model", "linear-phi"],
        ["dde-solve", "--n-xi", "3"],
        ["levy-rate", "--model", "cpp-exp", "--delta", "0.5"],
        ["levy-exit", "--model", "caballero", "--x", "2"],
        ["rbm-mc", "--n-paths", "300", "--seed", "9", "--mu", "1", "--dt", "0.01"],
        ["levy-mc", "--n-paths", "300", "--seed", "9", "--experiment", "exit"],
        ["levy-mc", "--n-paths", "300", "--seed", "9"],
    ],
)
def test_json_config_round_trip(tmp_path, argv):
    code, first, _ = call(*argv, "--format", "json")
    assert code == 0
    doc = json.loads(first)
    assert doc["config"]["schema_version"] == 1
    # the whole result file and the bare config record are both accepted
    res = tmp_path / "res.json"
    res.write_text(first)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(doc["config"]))
    for path in (res, cfg):
        code, again, _ = call(argv[0], "--config", str(path), "--format", "json", "--workers", "2")
        assert code == 0
        assert again == first


def test_config_overrides_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema_version": 1, "command": "rbm-lt", "params": {"theta": [0.5]}}))
    _, out, _ = call("rbm-lt", "--theta", "3", "--config", str(cfg))
    assert float(rows(out)[0]["theta"]) == 0.5


@pytest.mark.parametrize(
    "doc",
    [
        {"schema_version": 2, "params": {}},
        {"schema_version": 1, "params": {"thetaa": [1.0]}},
        {"schema_version": 1, "params": {}, "comment": "x"},
        {"schema_version": 1, "command": "levy-rate", "params": {}},
        [1, 2],
    ],
)
def test_bad_configs_rejected(tmp_path, doc):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(doc))
    code, _, err = call("rbm-lt", "--config", str(cfg))
    assert code == 1 and "error" in err


def test_numbers_use_full_precision_and_dot():
    _, out, _ = call("rbm-lt", "--theta", "0.5")
    value = rows(out)[0]["laplace_transform"]
    assert value == repr(float(value))
    assert "." in value


def test_mc_determinism_across_workers():
    base = ["rbm-mc", "--n-paths", "1000", "--seed", "123", "--mu", "0.5", "--dt", "0.001"]
    outs = {call(*base, "--workers", w)[1] for w in ("1", "2", "4")}
    assert len(outs) == 1
