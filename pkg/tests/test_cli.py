import io
import json
import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from fracspde import cli
from fracspde import green as gr
from fracspde.cli import OutputRecord, UsageError, format_number, parse_grid, read_csv, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_green_example():
    code, out, _ = call("green", "--beta", "1", "--t", "1", "--x", "0")
    assert code == 0
    cols, rows = read_csv(out)
    assert cols[-1] == "value" and len(rows) == 1
    assert rows[0][-1] == pytest.approx(1 / math.sqrt(4 * math.pi), rel=1e-15)
    assert "0.282094791" in out


def test_ml_example():
    code, out, _ = call("ml", "--alpha", "1", "--beta2", "1", "--z", "1")
    assert code == 0 and "2.71828182" in out


def test_wave_indicator():
    code, out, _ = call("green", "--beta", "2", "--t", "1", "--x", "1.5")
    assert code == 0 and read_csv(out)[1][0][-1] == 0.0


def test_usage_errors():
    assert call("green", "--beta", "1", "--t", "1")[0] == 2
    assert call("green", "--beta", "1", "--t", "1", "--x", "0", "--bogus", "3")[0] == 2
    assert call("nonsense")[0] == 2
    assert call("green", "--beta", "1", "--t", "1", "--x", "1,0")[0] == 2
    assert call("moments", "--beta", "0.5", "--t", "1", "--mu", "weird")[0] == 2
    assert call("ml", "--alpha", "1", "--z", "1", "--format", "svg")[0] == 2


def test_precondition_errors_name_the_operation():
    code, _, err = call("green", "--beta", "0.5", "--t", "-1", "--x", "0")
    assert code == 2 and err.startswith("green:") and "t" in err
    code, _, err = call("green", "--beta", "2", "--kind", "star", "--t", "1", "--x", "0")
    assert code == 2


def test_numerical_failure_exit_code():
    code, _, err = call("simulate", "--beta", "0.5", "--lam", "1e7", "--t-max", "1", "--n-time", "16",
                        "--n-space", "32", "--replicates", "2")
    assert code == 3 and "numerical failure" in err


def test_parse_grid():
    assert_allclose(parse_grid("0:1:5"), [0, 0.25, 0.5, 0.75, 1.0])
    assert_allclose(parse_grid("1,2,5"), [1, 2, 5])
    assert_allclose(parse_grid("1/2"), [0.5])
    for bad in ("1:0:3", "1,1", "0:1", "", "0:1:0"):
        with pytest.raises(UsageError):
            parse_grid(bad)


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_format_number_round_trip(v):
    assert float(format_number(v)) == v


def test_csv_round_trip_and_json_identity():
    code, csv_text, _ = call("mainardi", "--lam", "0.25", "--mu", "1", "--z", "0:6:13")
    code2, json_text, _ = call("mainardi", "--lam", "0.25", "--mu", "1", "--z", "0:6:13", "--format", "json")
    assert code == code2 == 0
    cols, rows = read_csv(csv_text)
    doc = json.loads(json_text)
    assert set(doc) == {"command", "params", "columns", "rows"}
    assert doc["columns"] == cols and doc["rows"] == rows
    from fracspde.specfun import mainardi

    assert [r[-1] for r in rows] == list(mainardi((0.25, 1.0), np.linspace(0, 6, 13)))


def test_output_record_json_matches_csv():
    rec = OutputRecord("x", {"a": 1}, ["u", "v"], [[0.1, 1 / 3], [2, 1e-300]])
    cols, rows = read_csv(rec.to_csv())
    assert json.loads(rec.to_json())["rows"] == rows


def test_same_seed_same_bytes():
    argv = ("simulate", "--beta", "0.5", "--t-max", "0.2", "--n-time", "8", "--n-space", "64",
            "--replicates", "6", "--seed", "17", "--probes", "0,1")
    a, b = call(*argv), call(*argv)
    assert a[0] == 0 and a[1] == b[1]
    c = call(*argv[:-4], "--seed", "18", "--probes", "0,1")
    assert c[1] != a[1]


def test_out_path_and_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    code, out, _ = call("green", "--beta", "0.5", "--t", "1", "--x", "0:1:3", "--out", "sub/g.csv")
    assert code == 0 and out == ""
    cols, rows = read_csv((tmp_path / "sub" / "g.csv").read_text())
    assert len(rows) == 3


def test_kernel_methods():
    for method in ("upper", "heat-exact"):
        code, out, _ = call("kernel", "--beta", "1", "--method", method, "--t", "0.5", "--x", "0")
        assert code == 0 and read_csv(out)[1][0][-1] > 0
    code, out, _ = call("kernel", "--beta", "0.5", "--method", "lower", "--t", "0.5", "--x", "0")
    assert code == 0
    code, _, _ = call("kernel", "--beta", "1", "--method", "lower", "--t", "0.5", "--x", "0")
    assert code == 2


def test_moments_and_lyapunov():
    code, out, _ = call("moments", "--beta", "0.5", "--lip", "1", "--lip-lower", "0.5", "--t", "0.5,1")
    assert code == 0 and len(read_csv(out)[1]) == 2
    code, out, _ = call("lyapunov", "--beta", "0.5", "--p", "2,4", "--lip-lower", "0.5")
    assert code == 0 and len(read_csv(out)[1]) == 2
    assert call("lyapunov", "--beta", "1", "--p", "2")[0] == 2


def test_verify_specfun_report():
    code, out, _ = call("verify", "--suite", "specfun")
    report = json.loads(out)
    assert code == 0 and report["passed"]
    checks = report["results"]["specfun"]
    assert checks and all(c["passed"] for c in checks)


def test_verify_failure_exit_code(monkeypatch):
    monkeypatch.setitem(cli.SUITES, "specfun", lambda opts: [{"check": "x", "passed": False}])
    assert call("verify", "--suite", "specfun")[0] == 1


def test_plot_green_default_panel(tmp_path):
    svg, data = cli.plot_green()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    for label in ("1/8", "1/2", "3/2", "5/3", "15/8"):
        assert f"beta={label}" in svg
    assert len(data) == 6
    code, out, _ = call("plot-green", "--scale", "log10", "--betas", "1")
    assert code == 0 and "log10" in out


def test_plot_green_heat_curve_is_gaussian():
    x = np.linspace(-5, 5, 11)
    svg, data = cli.plot_green([1.0], x_grid=x)
    assert data[0]["beta"] == 1.0
    assert_allclose(gr.green(1.0, "primary", 1.0, x), np.exp(-x * x / 4) / math.sqrt(4 * math.pi), rtol=1e-12)


def test_space_time_panel():
    code, out, _ = call("plot-green", "--panel", "space-time")
    assert code == 0
    for label in ("6/5", "3/2", "15/8"):
        assert f"beta={label}" in out


def test_plot_legend_carries_tail_exponent():
    svg, _ = cli.plot_green([1.5], scale="log10")
    assert re.search(r"c=4\b", svg)
