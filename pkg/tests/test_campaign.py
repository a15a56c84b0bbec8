"""RMS metric, comparison table, and scenario runner tests."""

import csv
import json
import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantloop.campaign import (
    CampaignSpec,
    analyze_trajectory,
    format_table1,
    load_scenario,
    rms_quantized_error,
    run_scenario,
    run_table1,
    scenario_from_dict,
    write_table1_csv,
)
from quantloop.dynamics import (
    Disturbance,
    LoopConfig,
    read_trajectory_csv,
    simulate,
)


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return path


RAMP_SCENARIO = {
    "alpha": "11/8",
    "controller": "switched-pi",
    "disturbance": {"kind": "piecewise-linear",
                    "breakpoints": [[20, "2.6"], [40, "2.4"]]},
    "e0": "0",
    "u0": "0",
    "horizon": 200,
    "mode": "exact",
}


# --- RMS --------------------------------------------------------------------

def test_rms_all_zero_trajectory():
    config = LoopConfig(alpha=F(11, 8), controller="switched-pi",
                        disturbance=Disturbance.constant(0),
                        e0=0, u0=0, horizon=100)
    assert rms_quantized_error(simulate(config), 100) == 0.0


def test_rms_counts_transient_from_step_zero():
    config = LoopConfig(alpha=F(11, 8), controller="switched-pi",
                        disturbance=Disturbance.constant(F(12, 10)),
                        e0=F(2), u0=0, horizon=10)
    traj = simulate(config)
    expected = math.sqrt(sum(r.rho_e ** 2 for r in traj.records[:10]) / 10)
    assert rms_quantized_error(traj, 10) == expected
    assert traj.records[0].rho_e == 2  # the transient is part of the score


def test_rms_horizon_too_short():
    config = LoopConfig(alpha=F(11, 8), controller="switched-pi",
                        disturbance=Disturbance.constant(0),
                        e0=0, u0=0, horizon=5)
    with pytest.raises(ValueError):
        rms_quantized_error(simulate(config), 10)


def test_reference_rms_values_single_rows():
    spec = CampaignSpec(disturbances=(F(1, 10),))
    [row] = run_table1(spec)
    assert abs(row.rms_switched - 0.316) <= 0.01
    assert abs(row.rms_standard - 0.446) <= 0.01
    assert row.improvement > 0.25


# --- campaign ---------------------------------------------------------------

def test_run_table1_empty():
    assert run_table1(CampaignSpec(disturbances=())) == []


def test_campaign_spec_needs_both_controllers():
    with pytest.raises(ValueError):
        CampaignSpec(controllers=("switched-pi",))
    with pytest.raises(ValueError):
        CampaignSpec(horizon=0)


@settings(max_examples=20, deadline=None)
@given(st.fractions(min_value=F(1, 50), max_value=F(49, 50),
                    max_denominator=50))
def test_rms_sign_symmetry_from_rest(dbar):
    spec = CampaignSpec(disturbances=(dbar,), horizon=200)
    [row] = run_table1(spec)  # raises if +dbar and -dbar disagree
    assert row.rms_standard >= 0 and row.rms_switched >= 0


def test_table1_csv_and_text_output(tmp_path):
    rows = run_table1(CampaignSpec(disturbances=(F(1, 10), F(2, 5)),
                                   horizon=300))
    path = tmp_path / "table1.csv"
    write_table1_csv(rows, path)
    with open(path) as fh:
        parsed = list(csv.DictReader(fh))
    assert [r["disturbance"] for r in parsed] == ["1/10", "2/5"]
    assert all("." in r["rms_standard"] for r in parsed)
    text = format_table1(rows)
    assert "1/10" in text and "switched" in text.splitlines()[0]


# --- scenario configs -------------------------------------------------------

def test_load_scenario_round_trip(tmp_path):
    path = write_json(tmp_path / "scenario.json", RAMP_SCENARIO)
    config = load_scenario(path)
    assert config.alpha == F(11, 8)
    assert config.controller == "switched-pi"
    assert config.disturbance.eval(30) == F(5, 2)
    assert config.horizon == 200
    assert config.mode == "exact"


def test_load_scenario_decimal_strings_stay_exact(tmp_path):
    payload = dict(RAMP_SCENARIO)
    payload["disturbance"] = {"kind": "constant", "value": 1.2}
    path = write_json(tmp_path / "scenario.json", payload)
    config = load_scenario(path)
    # JSON floats are re-parsed from their text, not from binary doubles
    assert config.disturbance.value == F(6, 5)


def test_load_scenario_mode_override(tmp_path):
    path = write_json(tmp_path / "scenario.json", RAMP_SCENARIO)
    assert load_scenario(path, "float").mode == "float"


def test_scenario_errors_name_the_key(tmp_path):
    payload = dict(RAMP_SCENARIO)
    del payload["alpha"]
    with pytest.raises(ValueError, match="alpha"):
        load_scenario(write_json(tmp_path / "s1.json", payload))

    payload = dict(RAMP_SCENARIO)
    payload["e0"] = "abc"
    with pytest.raises(ValueError, match="e0"):
        load_scenario(write_json(tmp_path / "s2.json", payload))

    payload = dict(RAMP_SCENARIO)
    payload["disturbance"] = {"kind": "brownian"}
    with pytest.raises(ValueError, match="disturbance"):
        load_scenario(write_json(tmp_path / "s3.json", payload))


def test_scenario_parse_error_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "alpha": "11/8",\n  oops\n}\n')
    with pytest.raises(ValueError, match="line 3"):
        load_scenario(path)


def test_scenario_from_dict_samples_kind():
    payload = dict(RAMP_SCENARIO)
    payload["disturbance"] = {"kind": "samples", "values": ["1/2", "1/4"]}
    config = scenario_from_dict(payload)
    assert config.disturbance.eval(5) == F(1, 4)


# --- scenario runner --------------------------------------------------------

def test_run_scenario_writes_trajectory(tmp_path):
    path = write_json(tmp_path / "scenario.json", RAMP_SCENARIO)
    outputs = run_scenario(path, tmp_path / "out")
    traj = read_trajectory_csv(outputs["trajectory"], mode="exact")
    assert len(traj) == 201
    # transient crossing flips the quantized error into both signs ...
    window = [r.rho_e for r in traj.records[25:60]]
    assert 1 in window and -1 in window
    # ... and the new invariant set has unit excursion in {0, 1}
    tail = [r.rho_e for r in traj.records[-100:]]
    assert set(tail) == {0, 1}


def test_run_scenario_ramp_without_threshold_crossing(tmp_path):
    payload = dict(RAMP_SCENARIO)
    payload["disturbance"] = {"kind": "piecewise-linear",
                              "breakpoints": [[20, "2.6"], [40, "2.501"]]}
    path = write_json(tmp_path / "scenario.json", payload)
    outputs = run_scenario(path, tmp_path / "out")
    traj = read_trajectory_csv(outputs["trajectory"], mode="exact")
    tail = [r.rho_e for r in traj.records[50:]]
    # same invariant set as before the ramp: excursion stays in {-1, 0}
    assert set(tail) <= {-1, 0}
    assert -1 in tail


def test_run_scenario_standard_pi_keeps_oscillating(tmp_path):
    payload = dict(RAMP_SCENARIO)
    payload["controller"] = "standard-pi"
    path = write_json(tmp_path / "scenario.json", payload)
    outputs = run_scenario(path, tmp_path / "out")
    traj = read_trajectory_csv(outputs["trajectory"], mode="exact")
    for lo in range(50, 150, 25):
        window = {r.rho_e for r in traj.records[lo:lo + 50]}
        assert {-1, 1} <= window


def test_run_scenario_with_analysis(tmp_path):
    scenario = {
        "alpha": "11/10", "controller": "switched-pi",
        "disturbance": {"kind": "constant", "value": "0.4"},
        "e0": "0.2", "u0": "0.6", "horizon": 100,
    }
    path = write_json(tmp_path / "scenario.json", scenario)
    outputs = run_scenario(path, tmp_path / "out", with_analysis=True)
    report = json.loads(outputs["report"].read_text())
    assert report["delta_d"] == "2/5"
    assert report["capture"]["status"] == "pass"
    assert report["control-lock"]["status"] == "pass"
    assert report["cycle"]["periodic"] is True
    assert (report["cycle"]["n"], report["cycle"]["m"]) == (2, 5)
    assert report["cycle-agreement"] is True
    assert report["band"]["status"] == "pass"
    assert report["band"]["interval"]["lo"] == "-1/10"


def test_analysis_rejects_time_varying_disturbance(tmp_path):
    config = scenario_from_dict(RAMP_SCENARIO)
    traj = simulate(config)
    with pytest.raises(ValueError):
        analyze_trajectory(traj, config)
