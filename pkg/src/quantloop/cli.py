"""Command line interface.

Subcommands::

    simulate  -c scenario.json -o OUT [--mode exact|float]
    analyze   -c scenario.json -o OUT [--mode exact|float]
    cycles    -c scenario.json -o OUT [--mode exact|float]
    sweep     [-c grid.json]    -o OUT [--jobs N]
    table1    [-c campaign.json] -o OUT

Everything is deterministic, so there is no seed flag.  Exit codes:
0 success, 1 runtime error (bad config contents, I/O), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import campaign, reachability
from .analysis import detect_cycle, detect_cycle_approx, predict_cycle
from .dynamics import shift_trajectory, simulate
from .numerics import format_scalar, parse_scalar, round_half_away


def _add_scenario_args(sub, name, help_text):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("-c", "--config", required=True, help="scenario JSON file")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--mode", choices=("exact", "float"),
                   help="override the config's arithmetic mode")
    return p


def _cmd_simulate(args) -> int:
    outputs = campaign.run_scenario(args.config, args.out,
                                    with_analysis=False,
                                    mode_override=args.mode)
    print(f"wrote {outputs['trajectory']}")
    return 0


def _cmd_analyze(args) -> int:
    outputs = campaign.run_scenario(args.config, args.out,
                                    with_analysis=True,
                                    mode_override=args.mode)
    print(f"wrote {outputs['trajectory']}")
    print(f"wrote {outputs['report']}")
    return 0


def _cmd_cycles(args) -> int:
    config = campaign.load_scenario(args.config, args.mode)
    if not config.disturbance.is_constant:
        raise ValueError("cycle analysis requires a constant disturbance")
    traj = simulate(config)
    dbar = traj.records[0].d
    delta_d = dbar - round_half_away(dbar)
    shifted = shift_trajectory(traj, dbar)
    report = {"delta_d": format_scalar(delta_d)}
    if traj.mode == "exact":
        detected = detect_cycle(shifted)
        predicted = predict_cycle(delta_d)
        report["predicted"] = predicted.to_record()
        report["agreement"] = (
            detected.periodic == predicted.periodic
            and (not detected.periodic
                 or (detected.n, detected.m) == (predicted.n, predicted.m)))
    else:
        detected = detect_cycle_approx(shifted)
    report["detected"] = detected.to_record()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "cycles.json"
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    if detected.periodic:
        print(f"periodic: n={detected.n} switches per period, "
              f"m={detected.m} steps, entry step {detected.entry_step}")
    else:
        print("no recurrence detected within the horizon")
    print(f"wrote {path}")
    return 0


def _load_grid_spec(path) -> reachability.GridSpec:
    with open(path) as fh:
        try:
            raw = json.load(fh, parse_float=str)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: line {exc.lineno}: {exc.msg}") from None

    kwargs = {}
    for axis, prefix in (("alpha", "alpha"), ("delta_d", "delta_d")):
        if axis in raw:
            block = raw[axis]
            kwargs[f"{prefix}_lo"] = parse_scalar(block["lo"])
            kwargs[f"{prefix}_hi"] = parse_scalar(block["hi"])
            kwargs[f"{prefix}_count"] = int(block["count"])
    if "init" in raw:
        kwargs["init_box"] = parse_scalar(raw["init"]["box"])
        kwargs["init_count"] = int(raw["init"]["count"])
    if "budget" in raw:
        kwargs["budget"] = int(raw["budget"])
    if "mode" in raw:
        kwargs["mode"] = raw["mode"]
    return reachability.GridSpec(**kwargs)


def _cmd_sweep(args) -> int:
    spec = _load_grid_spec(args.config) if args.config else reachability.GridSpec()
    result = reachability.sweep(spec, jobs=args.jobs)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid_path = out_dir / "grid.csv"
    region_path = out_dir / "region.csv"
    reachability.write_grid_csv(result, grid_path)
    reachability.write_region_csv(result, region_path)
    n_region = len(reachability.attraction_region(result))
    print(f"{len(result.cells)} cells, {n_region} fully captured")
    print(f"wrote {grid_path}")
    print(f"wrote {region_path}")
    return 0


def _load_campaign_spec(path) -> campaign.CampaignSpec:
    with open(path) as fh:
        try:
            raw = json.load(fh, parse_float=str)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    kwargs = {}
    if "disturbances" in raw:
        kwargs["disturbances"] = tuple(parse_scalar(v)
                                       for v in raw["disturbances"])
    for key in ("alpha", "e0", "u0"):
        if key in raw:
            kwargs[key] = parse_scalar(raw[key])
    if "horizon" in raw:
        kwargs["horizon"] = int(raw["horizon"])
    if "controllers" in raw:
        kwargs["controllers"] = tuple(raw["controllers"])
    return campaign.CampaignSpec(**kwargs)


def _cmd_table1(args) -> int:
    spec = _load_campaign_spec(args.config) if args.config else None
    rows = campaign.run_table1(spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "table1.csv"
    campaign.write_table1_csv(rows, path)
    print(campaign.format_table1(rows))
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantloop",
        description="Simulate and analyze PI control loops with quantized "
                    "input and output signals.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = _add_scenario_args(sub, "simulate", "run a scenario, write its trajectory")
    p.set_defaults(func=_cmd_simulate)

    p = _add_scenario_args(sub, "analyze",
                           "run a scenario, write trajectory and analysis report")
    p.set_defaults(func=_cmd_analyze)

    p = _add_scenario_args(sub, "cycles",
                           "detect and predict the limit cycle of a scenario")
    p.set_defaults(func=_cmd_cycles)

    p = sub.add_parser("sweep", help="classify attractors over a parameter grid")
    p.add_argument("-c", "--config", help="grid JSON file (defaults to the "
                                          "desk-scale grid)")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for cells (default 1)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("table1", help="run the controller comparison campaign")
    p.add_argument("-c", "--config", help="campaign JSON file (defaults to "
                                          "the reference campaign)")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_table1)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, TypeError, KeyError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
