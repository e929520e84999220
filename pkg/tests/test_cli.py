import json

import numpy as np
import pytest

from sigpow.channels import identity_channel, random_cptp
from sigpow.cli import main
from sigpow.processes import direct_cause_process
from sigpow.wires import LabeledOperator, Wire, identity_operator


@pytest.fixture
def id2_path(tmp_path):
    path = tmp_path / "id2.json"
    identity_channel(2).op.to_json_file(path)
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


def test_signalling_subcommand(capsys, id2_path):
    code, payload = run_cli(capsys, "signalling", "--channel", id2_path)
    assert code == 0
    assert abs(payload["s_value"] - 2.0) < 1e-6
    assert "tolerances" in payload and payload["gap"] < 1e-6


def test_exclusion_subcommand(capsys, id2_path):
    code, payload = run_cli(capsys, "exclusion", "--channel", id2_path)
    assert code == 0
    assert abs(payload["p_value"] - 1.0) < 1e-6


def test_strategy_subcommand(capsys, id2_path):
    code, payload = run_cli(capsys, "strategy", "--channel", id2_path)
    assert code == 0
    assert abs(payload["coincidence_sum"] - payload["raw_primal"]) < 1e-6


def test_invalid_channel_exits_2(capsys, tmp_path):
    path = tmp_path / "bad.json"
    (identity_channel(2).op * 1.7).to_json_file(path)
    code, payload = run_cli(capsys, "signalling", "--channel", str(path))
    assert code == 2
    assert "error" in payload


def test_comb_validate_garbage_exits_2(capsys, tmp_path):
    op_path = tmp_path / "garbage.json"
    (identity_operator(Wire("A", 2), Wire("B", 2)) * 3.0).to_json_file(op_path)
    pairs_path = tmp_path / "pairs.json"
    pairs_path.write_text(json.dumps({"pairs": [{"in": "A", "out": "B"}]}))
    code, payload = run_cli(
        capsys, "comb-validate", "--op", str(op_path), "--pairs", str(pairs_path)
    )
    assert code == 2
    assert payload["first_violation"] == "trace"


def test_comb_validate_good_comb(capsys, tmp_path, rng):
    ch = random_cptp(Wire("A", 2), Wire("B", 2), rng)
    op_path = tmp_path / "comb.json"
    ch.op.to_json_file(op_path)
    pairs_path = tmp_path / "pairs.json"
    pairs_path.write_text(json.dumps({"pairs": [{"in": "A", "out": "B"}]}))
    code, payload = run_cli(
        capsys, "comb-validate", "--op", str(op_path), "--pairs", str(pairs_path)
    )
    assert code == 0 and payload["valid"]


def test_pm_validate(capsys, tmp_path):
    path = tmp_path / "dc.json"
    direct_cause_process().op.to_json_file(path)
    code, payload = run_cli(capsys, "pm-validate", "--op", str(path))
    assert code == 0 and payload["valid"]

    bad_path = tmp_path / "bad_pm.json"
    (direct_cause_process().op * 2.0).to_json_file(bad_path)
    code, payload = run_cli(capsys, "pm-validate", "--op", str(bad_path))
    assert code == 2 and payload["first_violation"] == "trace"


def test_pm_curve_writes_csv(capsys, tmp_path):
    out = tmp_path / "curve.csv"
    code, payload = run_cli(
        capsys, "pm-curve", "--kind", "incoherent", "--grid", "5", "--out", str(out)
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "alpha,s_bits"
    assert len(lines) == 6
    assert abs(payload["endpoints"]["first"] - 2.0) < 1e-5


def test_causal_loop_random(capsys):
    code, payload = run_cli(capsys, "causal-loop", "--trials", "3", "--seed", "11")
    assert code == 0
    assert payload["max_total"] <= 1.0 + 1e-6


def test_dpi_check_random(capsys):
    code, payload = run_cli(capsys, "dpi-check", "--trials", "3", "--seed", "5")
    assert code == 0
    assert payload["max_violation"] <= 1e-6
    assert all(case["bistochastic"] for case in payload["cases"])


def test_pc_scan_csv(capsys, tmp_path):
    out = tmp_path / "scan.csv"
    code, payload = run_cli(
        capsys, "pc-scan", "--model", "kappa", "--param", "kappa=2.0",
        "--tmax", "6.0", "--grid", "601", "--out", str(out),
    )
    assert code == 0
    assert payload["min_backflow_lhs"] < 0.0
    header = out.read_text().splitlines()[0]
    assert header.startswith("t,G,H,Gamma_z")


def test_pc_thresholds_json(capsys, tmp_path):
    out = tmp_path / "thresholds.json"
    code, payload = run_cli(
        capsys, "pc-thresholds", "--model", "kappa", "--tmax", "20",
        "--grid", "1000", "--out", str(out),
    )
    assert code == 0
    saved = json.loads(out.read_text())
    assert abs(saved["td"] - np.cosh(np.pi / 16)) < 1e-3
    assert abs(saved["p_div"] - 1.0) < 1e-2


def test_jc_scan_deterministic(capsys, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    code1, p1 = run_cli(
        capsys, "jc-scan", "--grid", "5", "--tmax", "3.0", "--seed", "0",
        "--out", str(out1),
    )
    code2, p2 = run_cli(
        capsys, "jc-scan", "--grid", "5", "--tmax", "3.0", "--seed", "0",
        "--out", str(out2),
    )
    assert code1 == code2 == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert p1["max_witness"] == p2["max_witness"]


def test_jc_scan_intercept_flag(capsys, tmp_path):
    code, payload = run_cli(
        capsys, "jc-scan", "--grid", "4", "--tmax", "3.0", "--intercept"
    )
    assert code == 0
    assert payload["max_witness"] <= 1e-6


def test_dpi_check_with_explicit_superchannel(capsys, tmp_path, id2_path):
    from sigpow.channels import identity_superchannel

    t_path = tmp_path / "t.json"
    identity_superchannel(2).op.to_json_file(t_path)
    code, payload = run_cli(
        capsys, "dpi-check", "--op", str(t_path), "--channel", id2_path
    )
    assert code == 0
    case = payload["cases"][0]
    assert case["bistochastic"]
    assert abs(case["s_before"] - 2.0) < 1e-6
    assert abs(case["s_after"] - 2.0) < 1e-6


def test_strategy_full_payload(capsys, id2_path):
    code, payload = run_cli(capsys, "strategy", "--channel", id2_path, "--full")
    assert code == 0
    assert len(payload["povm"]) == 4 and len(payload["encodings"]) == 4
    first = payload["povm"][0]
    assert {w["name"] for w in first["wires"]} == {"B_ref", "B"}


def test_hand_written_operator_json(capsys, tmp_path):
    # the documented wire/re/im format, written by hand rather than the library
    payload = {
        "wires": [{"name": "A", "dim": 2}, {"name": "B", "dim": 2}],
        "re": [
            [1.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 1.0],
        ],
    }
    path = tmp_path / "manual.json"
    path.write_text(json.dumps(payload))
    code, report = run_cli(capsys, "signalling", "--channel", str(path))
    assert code == 0
    assert abs(report["s_value"] - 2.0) < 1e-6


def test_randomized_subcommands_are_seed_deterministic(capsys):
    _, first = run_cli(capsys, "causal-loop", "--trials", "2", "--seed", "9")
    _, second = run_cli(capsys, "causal-loop", "--trials", "2", "--seed", "9")
    assert first == second
    _, third = run_cli(capsys, "causal-loop", "--trials", "2", "--seed", "10")
    assert third["terms"] != first["terms"]
