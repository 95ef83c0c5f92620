import json

import numpy as np
import pytest

from gtoda import cli


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_tau_suite(capsys):
    code, out, _ = run(["verify", "tau", "--quick"], capsys)
    assert code == 0
    lines = [l for l in out.splitlines() if l.startswith("[")]
    assert lines and all(l.startswith("[PASS]") for l in lines)
    assert "max_residual=" in lines[0] and "tolerance=" in lines[0]


def test_verify_unknown_suite_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["verify", "nosuch"])
    assert e.value.code == 2


def test_verify_json_report(tmp_path, capsys):
    out_file = tmp_path / "rep.json"
    code, _, _ = run(["verify", "tau", "--quick", "--out", str(out_file)], capsys)
    assert code == 0
    reports = json.loads(out_file.read_text())
    assert all({"check", "max_residual", "tolerance", "pass"} <= set(r)
               for r in reports)


def test_flow_csv_flat_start(tmp_path, capsys):
    out_file = tmp_path / "flow.csv"
    code, _, _ = run(["flow", "--n", "2", "--t-end", "1.0", "--dt", "1e-3",
                      "--out", str(out_file)], capsys)
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0] == "t,x_1_1,x_2_1,x_2_2"
    last = [float(v) for v in lines[-1].split(",")]
    assert last[0] == pytest.approx(1.0)
    assert last[2] == pytest.approx(np.log(2.0), abs=1e-7)
    assert last[3] == pytest.approx(-np.log(2.0), abs=1e-7)


def test_flow_critical_start(tmp_path, capsys):
    out_file = tmp_path / "flow.csv"
    code, _, _ = run(["flow", "--n", "2", "--lambda", "1,-1", "--t-end", "1.0",
                      "--start", "critical", "--out", str(out_file)], capsys)
    assert code == 0
    lines = out_file.read_text().splitlines()
    last = [float(v) for v in lines[-1].split(",")]
    ey = np.sqrt(2.0) - 1.0
    assert last[2] == pytest.approx(np.log(np.exp(1.0) + ey * np.sinh(1.0)),
                                    abs=1e-6)


def test_critical_json(capsys):
    code, out, _ = run(["critical", "--n", "2", "--lambda", "0,0",
                        "--x", "0,0"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert set(rep) == {"triangle", "u", "grad_u", "residual"}
    assert rep["u"] == pytest.approx(2.0)
    assert np.allclose(rep["grad_u"], [-1.0, 1.0], atol=1e-9)
    assert rep["residual"] < 1e-9


def test_tau_csv(tmp_path, capsys):
    out_file = tmp_path / "tau.csv"
    code, _, _ = run(["tau", "--n", "3", "--lambda", "0,0,0", "--t-end", "1.0",
                      "--dt", "0.25", "--out", str(out_file)], capsys)
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0] == "t,tau_1,tau_2,tau_3"
    row = dict(zip(lines[0].split(","),
                   [float(v) for v in lines[-1].split(",")]))
    assert row["t"] == pytest.approx(1.0)
    assert row["tau_1"] == pytest.approx(0.5)  # t^2/2 at n=3


def test_simulate_few_replicas_emits_samples(tmp_path, capsys):
    out_file = tmp_path / "samples.csv"
    code = cli.main(["simulate", "--n", "2", "--replicas", "10",
                     "--t-end", "0.2", "--dt", "1e-2", "--out", str(out_file)])
    captured = capsys.readouterr()
    assert code == 0
    assert "warning" in captured.err
    lines = out_file.read_text().splitlines()
    assert lines[0] == "x_1_1,x_2_1,x_2_2"
    assert len(lines) == 11


def test_simulate_rejects_other_n(capsys):
    code, _, err = run(["simulate", "--n", "3", "--replicas", "10"], capsys)
    assert code == 2


def test_seed_determinism(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for f in (a, b):
        code = cli.main(["simulate", "--n", "2", "--replicas", "10",
                         "--t-end", "0.2", "--dt", "1e-2", "--seed", "5",
                         "--out", str(f)])
        capsys.readouterr()
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_defaults(tmp_path, capsys):
    conf = tmp_path / "conf.txt"
    conf.write_text("n = 3\nlambda = 0,0,0\nt-end = 0.5\ndt = 0.25\n")
    out_file = tmp_path / "tau.csv"
    code, _, _ = run(["--config", str(conf), "tau", "--out", str(out_file)],
                     capsys)
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0] == "t,tau_1,tau_2,tau_3"
    assert lines[-1].split(",")[0] == "0.5"
