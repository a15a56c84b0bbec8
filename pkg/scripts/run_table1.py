#!/usr/bin/env python3
"""Reproduce the controller comparison table.

Runs the standard and switched PI loops from rest against the reference
disturbance magnitudes (exact rationals plus sqrt(2)-1) over 1000 steps
and reports the RMS of the quantized error for each.
"""

import argparse
from pathlib import Path

from quantloop.campaign import (
    CampaignSpec,
    format_table1,
    run_table1,
    write_table1_csv,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--out", default="results/table1",
                        help="output directory (default results/table1)")
    parser.add_argument("--horizon", type=int, default=1000)
    args = parser.parse_args()

    rows = run_table1(CampaignSpec(horizon=args.horizon))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "table1.csv"
    write_table1_csv(rows, path)
    print(format_table1(rows))
    mean_improvement = sum(r.improvement for r in rows) / len(rows)
    print(f"\nmean RMS improvement: {mean_improvement:.1%}")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
