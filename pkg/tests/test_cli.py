import json

import numpy as np
import pytest

from transportlab.cli import main
from transportlab.measures import load_measure, measure_to_dict
from transportlab import Distribution1D


@pytest.fixture
def measures(tmp_path):
    paths = {}
    payloads = {
        "a": {"atoms": {"values": [0.0, 1.0], "weights": [0.5, 0.5]}},
        "b": {"atoms": {"values": [0.0, 2.0], "weights": [0.5, 0.5]}},
        "g": {"gaussian": True},
        "far": {"atoms": {"values": [0.0, 1e6], "weights": [0.5, 0.5]}},
    }
    for name, payload in payloads.items():
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(payload))
        paths[name] = str(p)
    return paths


def run_json(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_dist_roundtrip(measures, tmp_path, capsys):
    coup = tmp_path / "coupling.json"
    code, report = run_json(capsys, [
        "dist", "--mu", measures["a"], "--nu", measures["b"],
        "--cost", "power:2", "--coupling", str(coup)])
    assert code == 0
    assert report["schema_version"] == "1"
    assert report["tc"] == 0.5
    assert report["certificate"]["passed"]
    payload = json.loads(coup.read_text())
    assert set(payload) == {"cost", "pi", "dual_u", "dual_v"}


def test_dist1d_wasserstein(measures, capsys):
    code, report = run_json(capsys, [
        "dist1d", "--mu", measures["a"], "--nu", measures["b"], "--p", "1"])
    assert code == 0
    assert report["distance"] == 0.5


def test_dist1d_divergence_exit_code(measures, capsys):
    code = main(["dist1d", "--mu", measures["far"], "--nu", measures["g"],
                 "--cost", "exp"])
    capsys.readouterr()
    assert code == 2


def test_example1_report(capsys):
    code, report = run_json(capsys, [
        "example1", "--n", "10", "--xn", "pow2", "--cost", "exp",
        "--grid", "0.001"])
    assert code == 0
    assert report["tv"] == 0.2
    assert report["tv_discrete"] == 0.2
    assert report["moment_divergence"]["verdict"] == "DIVERGES"


def test_example1_with_tc_curve(capsys):
    code, report = run_json(capsys, [
        "example1", "--n", "16", "--xn", "const:2", "--cost", "power:2",
        "--grid", "0.02", "--tc", "lp", "--ns", "2,4,8,16"])
    assert code == 0
    tcs = [row["tc"] for row in report["tc_curve"]]
    assert tcs == sorted(tcs, reverse=True)


def test_theorem2_all_directions(capsys):
    code, report = run_json(capsys, [
        "theorem2", "--family", "delta", "--cost", "power:2",
        "--ns", "2,4,8,16,32", "--direction", "all"])
    assert code == 0
    assert not report["forward"]["verdicts"]["violation"]
    assert not report["converse"]["verdicts"]["violation"]
    assert report["corollary1"]["verdicts"]["verdicts_agree"]


def test_clt_report_and_determinism(capsys):
    argv = ["clt", "--model", "iid:rademacher", "--ns", "4,16", "--m", "2000",
            "--p", "2", "--seed", "42"]
    code1 = main(argv)
    out1 = capsys.readouterr().out
    code2 = main(argv)
    out2 = capsys.readouterr().out
    assert code1 == code2 == 0
    assert out1 == out2
    report = json.loads(out1)
    assert report["config"]["seed"] == 42
    assert len(report["curve"]) == 2
    assert report["conditions"]["series"]["verdict"] == "diverged_by_terms"


def test_clt_seed_echoed_when_drawn(capsys):
    code, report = run_json(capsys, [
        "clt", "--model", "iid:gaussian", "--ns", "4", "--m", "1000"])
    assert code == 0
    assert isinstance(report["config"]["seed"], int)


def test_clt_ar1_model(capsys):
    code, report = run_json(capsys, [
        "clt", "--model", "ar1:0.5", "--ns", "8,16", "--m", "2000",
        "--seed", "3"])
    assert code == 0
    assert report["conditions"]["yokoyama"]["converged"]
    assert report["conditions"]["cox_grimmett"]["satisfied"]


def test_check_cost(capsys):
    code, report = run_json(capsys, [
        "check-cost", "--cost", "power:3", "--seed", "5"])
    assert code == 0
    assert report["doubling"]["holds"]
    assert report["doubling"]["worst_ratio"] == pytest.approx(8.0, abs=1e-12)
    assert report["split_inequality"]["holds"]
    assert report["reverse_split"]["holds"]


def test_exit_codes(measures, tmp_path, capsys):
    assert main(["bogus"]) == 1
    capsys.readouterr()
    assert main(["dist", "--mu", "/no/such.json", "--nu", measures["a"],
                 "--cost", "power:2"]) == 1
    capsys.readouterr()
    assert main(["dist", "--mu", measures["a"], "--nu", measures["b"],
                 "--cost", "power:0.2"]) == 1
    capsys.readouterr()
    assert main(["clt", "--model", "iid:rademacher", "--ns", "4", "--m", "10",
                 "--seed", "1"]) == 1
    capsys.readouterr()
    assert main(["dist1d", "--mu", measures["a"], "--nu", measures["b"]]) == 1
    capsys.readouterr()


def test_out_flag_writes_file(measures, tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["dist1d", "--mu", measures["a"], "--nu", measures["b"],
                 "--p", "2", "--out", str(out)])
    capsys.readouterr()
    assert code == 0
    assert json.loads(out.read_text())["schema_version"] == "1"


def test_measure_write_read_bit_exact(tmp_path):
    original = Distribution1D.from_atoms([0.1, 0.2, 0.7000000001], [1 / 3, 1 / 3, 1 / 3])
    path = tmp_path / "m.json"
    path.write_text(json.dumps(measure_to_dict(original)))
    back = load_measure(str(path))
    assert np.array_equal(back.values, original.values)
    assert np.array_equal(back.weights, original.weights)
