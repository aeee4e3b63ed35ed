import csv
import io
import json
import math

import numpy as np
import pytest

from maxdiv import (
    build_finite_space,
    diversity_profile,
    max_diversity_exact,
    maximise,
    scaling_profile,
    space_from_points,
)
from maxdiv.cli import main
from maxdiv.errors import ValidationError
from maxdiv.io import (
    dumps,
    format_float,
    load_space,
    read_matrix_csv,
    read_measure,
    save_space,
    write_matrix_csv,
    write_profile_csv,
)

from conftest import CHAIN


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_format_float_round_trips():
    for x in (0.1, 1 / 3, 1e-300, 1.4621171572600093, -2.5):
        assert float(format_float(x)) == x
    assert format_float(math.inf) == "inf"
    assert format_float(math.nan) == "nan"


def test_dumps_handles_inf_and_nan():
    obj = json.loads(dumps({"a": math.inf, "b": math.nan, "c": [1, 2.5]}))
    assert obj == {"a": "inf", "b": None, "c": [1, 2.5]}


@pytest.mark.parametrize("make", [
    lambda: space_from_points(np.random.default_rng(0).random((5, 3)), t=2.5),
    lambda: build_finite_space(CHAIN, labels=["x", "y", "z"]),
])
def test_save_load_round_trip(tmp_path, make):
    s = make()
    desc = save_space(s, tmp_path)
    back = load_space(desc)
    np.testing.assert_array_equal(back.kernel, s.kernel)
    assert back.labels == s.labels
    assert back.metric_origin == s.metric_origin


def test_matrix_csv_with_inf(tmp_path):
    D = np.array([[0, math.inf], [math.inf, 0]])
    write_matrix_csv(tmp_path / "d.csv", D)
    np.testing.assert_array_equal(read_matrix_csv(tmp_path / "d.csv"), D)


def test_malformed_csv(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3\n")
    with pytest.raises(ValidationError):
        read_matrix_csv(p)
    p.write_text("1,x\n")
    with pytest.raises(ValidationError):
        read_matrix_csv(p)


def test_read_measure(tmp_path):
    s = build_finite_space(np.eye(3), labels=["a", "b", "c"])
    p = tmp_path / "m.csv"
    p.write_text("label,weight\na,0.25\nc,0.75\n")
    np.testing.assert_array_equal(read_measure(p, s).weights, [0.25, 0, 0.75])
    p.write_text("a,1\nb,3\n")
    np.testing.assert_array_equal(read_measure(p, s, normalize=True).weights, [0.25, 0.75, 0])
    p.write_text("a,1\nzz,3\n")
    with pytest.raises(ValidationError):
        read_measure(p, s)


def test_profile_csv_is_parseable():
    prof = diversity_profile(build_finite_space(np.eye(3)), [0.8, 0.1, 0.1], [0, 1, math.inf])
    buf = io.StringIO()
    write_profile_csv(buf, prof)
    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert [r["q"] for r in rows] == ["0", "1", "inf"]
    assert float(rows[-1]["diversity"]) == 1.25


@pytest.fixture
def files(tmp_path):
    write_matrix_csv(tmp_path / "id4.csv", np.eye(4))
    write_matrix_csv(tmp_path / "two.csv", [[0.0], [1.0]])
    write_matrix_csv(tmp_path / "chain.csv", CHAIN)
    write_matrix_csv(tmp_path / "asym.csv", [[1, 0.5], [0.2, 1]])
    write_matrix_csv(tmp_path / "line.csv", np.linspace(0, 1, 21)[:, None])
    (tmp_path / "bad.csv").write_text("1,0\n0\n")
    return tmp_path


def test_cli_profile(files, capsys):
    code, out, _ = _run(capsys, "profile", "--space", files / "id4.csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert all(float(r["diversity"]) == pytest.approx(4.0) for r in rows)


def test_cli_maxdiv(files, capsys):
    code, out, _ = _run(capsys, "maxdiv", "--space", files / "two.csv", "--kind", "points")
    assert code == 0
    res = json.loads(out)
    assert res["value"] == 1.4621171572600093
    assert res["certificates"]["passed"]
    assert res["method"] == "enumeration"


def test_cli_maxdiv_convex_with_trace(files, capsys):
    trace = files / "trace.csv"
    code, out, _ = _run(capsys, "maxdiv", "--space", files / "line.csv", "--kind", "points",
                        "--scale", "10", "--solver", "convex", "--trace", trace)
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(1 + 20 * math.tanh(0.25), rel=1e-10)
    assert trace.read_text().startswith("iteration,gap\n")


def test_cli_verify_chain(files, capsys):
    m = files / "m.csv"
    m.write_text("0,0.5\n2,0.5\n")
    code, out, _ = _run(capsys, "verify", "--space", files / "chain.csv", "--measure", m)
    assert code == 0
    assert json.loads(out)["passed"]


def test_cli_magnitude_and_weighting(files, capsys):
    code, out, _ = _run(capsys, "magnitude", "--space", files / "two.csv", "--kind", "points")
    assert code == 0
    assert json.loads(out)["magnitude"] == pytest.approx(2 / (1 + math.exp(-1)))
    code, out, _ = _run(capsys, "weighting", "--space", files / "id4.csv")
    assert code == 0
    assert out.splitlines()[0] == "label,weight"


def test_cli_crossing(files, capsys):
    write_matrix_csv(files / "id3.csv", np.eye(3))
    (files / "a.csv").write_text("0,0.5\n1,0.5\n")
    (files / "b.csv").write_text("0,0.8\n1,0.1\n2,0.1\n")
    code, out, _ = _run(capsys, "crossing", "--space", files / "id3.csv",
                        "--measure", files / "a.csv", "--measure2", files / "b.csv")
    assert code == 0
    assert json.loads(out)["crossing_order"] == pytest.approx(0.8526039, abs=1e-6)


def test_cli_scaling_and_estimators(files, capsys):
    code, out, _ = _run(capsys, "scaling", "--space", files / "line.csv", "--kind", "points",
                        "--t-grid", "1,2,4")
    assert code == 0
    assert out.splitlines()[0] == "t,dmax,magnitude,tv_step"
    code, out, _ = _run(capsys, "dimension", "--space", files / "line.csv",
                        "--t-min", "2", "--t-max", "10", "--samples", "3")
    assert code == 0 and 0 < json.loads(out)["slope"] < 1
    code, out, _ = _run(capsys, "volume", "--space", files / "line.csv", "--dim", "1",
                        "--t-min", "2", "--t-max", "10", "--samples", "3")
    assert code == 0 and json.loads(out)["estimate"] > 0
    code, out, _ = _run(capsys, "uniform", "--space", files / "line.csv", "--kind", "points",
                        "--t-grid", "1,5,10")
    assert code == 0 and len(json.loads(out)["measure"]) == 21


def test_cli_config_overrides(files, capsys):
    cfg = files / "cfg.json"
    cfg.write_text(json.dumps({"kind": "points", "scale": 2.0}))
    code, out, _ = _run(capsys, "maxdiv", "--space", files / "two.csv", "--config", cfg)
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(2 / (1 + math.exp(-2)))
    cfg.write_text(json.dumps({"nonsense": 1}))
    code, _, err = _run(capsys, "maxdiv", "--space", files / "two.csv", "--config", cfg)
    assert code == 2 and "nonsense" in err


def test_cli_exit_codes(files, capsys):
    code, _, err = _run(capsys, "maxdiv", "--space", files / "asym.csv")
    assert code == 2 and "symmetric" in err
    code, _, _ = _run(capsys, "profile", "--space", files / "bad.csv")
    assert code == 2
    code, _, _ = _run(capsys, "maxdiv", "--space", files / "missing.csv")
    assert code == 2
    code, out, _ = _run(capsys, "maxdiv", "--space", files / "line.csv", "--kind", "points",
                        "--scale", "5", "--solver", "convex", "--max-iters", "1", "--tol", "1e-300")
    assert code == 3
    assert json.loads(out)["converged"] is False


def test_cli_output_file(files, capsys):
    out = files / "res.json"
    code, stdout, _ = _run(capsys, "maxdiv", "--space", files / "id4.csv", "--out", out)
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["value"] == pytest.approx(4.0)


def test_cli_exact_too_large(files, capsys):
    write_matrix_csv(files / "p25.csv", np.random.default_rng(0).random((25, 2)))
    code, _, err = _run(capsys, "maxdiv", "--space", files / "p25.csv", "--kind", "points",
                        "--solver", "exact")
    assert code == 2 and "cap" in err


def test_cli_byte_identical_outputs(files, capsys):
    write_matrix_csv(files / "p30.csv", np.random.default_rng(1).random((30, 2)))
    outs = []
    for _ in range(2):
        code, out, _ = _run(capsys, "maxdiv", "--space", files / "p30.csv", "--kind", "points",
                            "--scale", "6", "--seed", "4")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]


def test_thread_count_does_not_change_results(monkeypatch):
    s = space_from_points(np.random.default_rng(5).random((10, 2)), t=3)
    runs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("MAXDIV_THREADS", threads)
        ex = max_diversity_exact(s)
        runs.append((ex.value, ex.diagnostics["subset"], maximise(s).value,
                     scaling_profile(s, [0.5, 1, 2]).dmax_values.tolist()))
    assert runs[0] == runs[1]
