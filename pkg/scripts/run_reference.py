#!/usr/bin/env python3
"""Run the two bundled reference scenarios and write their outputs.

Produces out/stationary and out/circle with trajectories.csv,
diagnostics.csv, and verdict.json each, then prints a one-line summary.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from containment_ref.cli import cmd_run

REPO = Path(__file__).resolve().parent.parent
SCENARIOS = {
    "stationary": REPO / "scenarios" / "stationary_triangle.json",
    "circle": REPO / "scenarios" / "circling_triangle.json",
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out", help="output root directory")
    ap.add_argument("--tol", type=float, default=1e-3, help="convergence tolerance")
    args = ap.parse_args()

    worst = 0
    for name, path in SCENARIOS.items():
        out_dir = Path(args.out) / name
        verdict, code = cmd_run(str(path), str(out_dir), convergence_tol=args.tol)
        worst = max(worst, code)
        summary = {
            "scenario": name,
            "exit": code,
            "convergenceTime": None if verdict is None else verdict.convergence_time,
            "out": str(out_dir),
        }
        print(json.dumps(summary))
    return worst


if __name__ == "__main__":
    sys.exit(main())
