"""Scenario and campaign runners with CSV/report export.

The comparison campaign runs the standard and the switched PI controller
from rest (e0 = u0 = 0) against a list of constant disturbances and scores
each run by the root-mean-square of the quantized error over the horizon:

    rms = sqrt( (1/H) * sum_{i=0..H-1} rho(e(i))^2 )

The window starts at step 0 on purpose: the transient is part of the
score.  By the odd symmetry of the loop, +dbar and -dbar give identical
scores from rest; the runner computes both and treats any asymmetry as a
hard error since it would falsify the reported table.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .analysis import (
    EntryRegion,
    cycle_error_band,
    detect_cycle,
    detect_cycle_approx,
    predict_cycle,
    verify_band,
    verify_capture,
    verify_control_lock,
)
from .dynamics import (
    Disturbance,
    LoopConfig,
    Trajectory,
    shift_trajectory,
    simulate,
    write_trajectory_csv,
)
from .numerics import (
    SQRT2_MINUS_1,
    Scalar,
    format_scalar,
    is_exact,
    parse_scalar,
    round_half_away,
)

#: Disturbance magnitudes of the reference comparison table.  All exact
#: rationals except the deliberately irrational last entry.
TABLE1_DISTURBANCES = (
    Fraction(1, 100), Fraction(1, 50), Fraction(1, 25), Fraction(1, 20),
    Fraction(1, 10), Fraction(1, 5), Fraction(2, 5), SQRT2_MINUS_1,
)

TABLE1_CSV_COLUMNS = ("disturbance", "rms_standard", "rms_switched",
                      "improvement")


@dataclass(frozen=True)
class CampaignSpec:
    """Comparison campaign: disturbance magnitudes, gain, horizon, init."""

    disturbances: tuple = TABLE1_DISTURBANCES
    alpha: Scalar = Fraction(11, 8)
    horizon: int = 1000
    controllers: tuple = ("standard-pi", "switched-pi")
    e0: Scalar = 0
    u0: Scalar = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        missing = {"standard-pi", "switched-pi"} - set(self.controllers)
        if missing:
            raise ValueError(f"campaign needs both PI variants; missing {missing}")


@dataclass(frozen=True)
class RmsRow:
    """One table row: scores of both controllers for one |dbar|."""

    disturbance: Scalar
    rms_standard: float
    rms_switched: float
    improvement: float


def rms_quantized_error(traj: Trajectory, horizon: int) -> float:
    """RMS of the quantized error over steps 0..horizon-1."""
    if len(traj) < horizon:
        raise ValueError(
            f"trajectory has {len(traj)} records, horizon {horizon} needs "
            f"at least {horizon}")
    total = sum(r.rho_e ** 2 for r in traj.records[:horizon])
    return math.sqrt(total / horizon)


def _campaign_rms(spec: CampaignSpec, controller: str, dbar: Scalar) -> float:
    mode = "exact" if is_exact(dbar) else "float"
    config = LoopConfig(alpha=spec.alpha, controller=controller,
                        disturbance=Disturbance.constant(dbar),
                        e0=spec.e0, u0=spec.u0, horizon=spec.horizon,
                        mode=mode)
    return rms_quantized_error(simulate(config), spec.horizon)


def run_table1(spec: Optional[CampaignSpec] = None) -> list:
    """Run the comparison campaign; one row per disturbance magnitude.

    Each magnitude is simulated at +dbar and -dbar for both controllers;
    the scores must agree (exactly in exact arithmetic, to within float
    noise otherwise) and the row reports the +dbar value.
    """
    spec = spec or CampaignSpec()
    rows = []
    for dbar in spec.disturbances:
        scores = {}
        for controller in ("standard-pi", "switched-pi"):
            plus = _campaign_rms(spec, controller, dbar)
            minus = _campaign_rms(spec, controller, -dbar)
            if abs(plus - minus) > 1e-12:
                raise ArithmeticError(
                    f"sign symmetry violated for {controller}, dbar={dbar}: "
                    f"{plus} vs {minus}")
            scores[controller] = plus
        std, sw = scores["standard-pi"], scores["switched-pi"]
        improvement = (std - sw) / std if std > 0 else 0.0
        rows.append(RmsRow(dbar, std, sw, improvement))
    return rows


def write_table1_csv(rows: Sequence[RmsRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE1_CSV_COLUMNS)
        for row in rows:
            writer.writerow([format_scalar(row.disturbance),
                             f"{row.rms_standard:.3f}",
                             f"{row.rms_switched:.3f}",
                             f"{row.improvement:.3f}"])


def format_table1(rows: Sequence[RmsRow]) -> str:
    lines = ["disturbance      standard   switched   improvement"]
    for row in rows:
        lines.append(f"{format_scalar(row.disturbance):<16} "
                     f"{row.rms_standard:>8.3f} {row.rms_switched:>10.3f} "
                     f"{row.improvement:>12.3f}")
    return "\n".join(lines)


def load_scenario(path, mode_override: Optional[str] = None) -> LoopConfig:
    """Load a scenario config from JSON.

    Keys: alpha, controller, disturbance (kind + payload), e0, u0,
    horizon, mode.  Scalar values may be strings in the literal syntax of
    :func:`quantloop.numerics.parse_scalar` or bare integers; decimal
    numbers should be quoted so they stay exact.  Raises ValueError with
    the offending key on malformed input.
    """
    with open(path) as fh:
        try:
            raw = json.load(fh, parse_float=str)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return scenario_from_dict(raw, mode_override, source=str(path))


def scenario_from_dict(raw: dict, mode_override: Optional[str] = None,
                       source: str = "scenario") -> LoopConfig:
    def need(key):
        if key not in raw:
            raise ValueError(f"{source}: missing key {key!r}")
        return raw[key]

    def scalar(key, value):
        try:
            return parse_scalar(value)
        except (ValueError, TypeError) as exc:
            raise ValueError(f"{source}: key {key!r}: {exc}") from None

    dist_raw = need("disturbance")
    if not isinstance(dist_raw, dict) or "kind" not in dist_raw:
        raise ValueError(f"{source}: key 'disturbance' needs a 'kind'")
    kind = dist_raw["kind"]
    if kind == "constant":
        dist = Disturbance.constant(scalar("disturbance.value",
                                           dist_raw.get("value")))
    elif kind == "piecewise-linear":
        points = dist_raw.get("breakpoints") or []
        dist = Disturbance.ramp(
            [(int(k), scalar("disturbance.breakpoints", v)) for k, v in points])
    elif kind == "samples":
        values = dist_raw.get("values") or []
        dist = Disturbance.from_samples(
            [scalar("disturbance.values", v) for v in values])
    else:
        raise ValueError(f"{source}: unknown disturbance kind {kind!r}")

    try:
        return LoopConfig(
            alpha=scalar("alpha", need("alpha")),
            controller=need("controller"),
            disturbance=dist,
            e0=scalar("e0", need("e0")),
            u0=scalar("u0", need("u0")),
            horizon=int(need("horizon")),
            mode=mode_override or raw.get("mode", "exact"),
        )
    except ValueError as exc:
        raise ValueError(f"{source}: {exc}") from None


def analyze_trajectory(traj: Trajectory, config: LoopConfig) -> dict:
    """Shift a constant-disturbance run and attach the full analysis:
    capture verdict, control-lock verdict, cycle report (detected and,
    in exact mode, predicted), and the error-band check."""
    if not config.disturbance.is_constant:
        raise ValueError("analysis requires a constant disturbance")
    dbar = traj.records[0].d  # already coerced to the run's mode
    delta_d = dbar - round_half_away(dbar)
    shifted = shift_trajectory(traj, dbar)

    region = EntryRegion(config.alpha, delta_d)
    capture = verify_capture(shifted, region)
    report: dict = {"delta_d": format_scalar(delta_d),
                    "capture": capture.to_record()}

    if capture.status != "not-entered":
        lock = verify_control_lock(shifted, config.alpha, capture.entry_step)
        report["control-lock"] = lock.to_record()

    if traj.mode == "exact":
        detected = detect_cycle(shifted)
        report["cycle"] = detected.to_record()
        predicted = predict_cycle(delta_d)
        report["predicted-cycle"] = predicted.to_record()
        report["cycle-agreement"] = (
            detected.periodic == predicted.periodic
            and (not detected.periodic or (detected.n == predicted.n
                                           and detected.m == predicted.m)))
    else:
        detected = detect_cycle_approx(shifted)
        report["cycle"] = detected.to_record()

    if detected.periodic and abs(delta_d) < Fraction(1, 2):
        band = cycle_error_band(delta_d)
        band_verdict = verify_band(shifted, band, detected.entry_step)
        report["band"] = band_verdict.to_record()
        report["band"]["interval"] = band.to_record()
    return report


def run_scenario(config_path, out_dir, with_analysis: bool = False,
                 mode_override: Optional[str] = None) -> dict:
    """Simulate a scenario config and write its outputs.

    Always writes ``trajectory.csv``; with analysis enabled also writes
    ``report.json``.  Returns the mapping of artifact names to paths.
    """
    config = load_scenario(config_path, mode_override)
    traj = simulate(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {}
    csv_path = out_dir / "trajectory.csv"
    write_trajectory_csv(traj, csv_path)
    outputs["trajectory"] = csv_path
    if with_analysis:
        report = analyze_trajectory(traj, config)
        report_path = out_dir / "report.json"
        with open(report_path, "w") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
        outputs["report"] = report_path
    return outputs
