#!/usr/bin/env python3
"""Plot a finished run: agent paths over the leader hulls, plus error decay.

Reads the CSV files written by `containment-ref run` and saves two PNGs next
to them. Plotting is a convenience for humans; nothing in the library or the
test suite depends on it.
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", help="directory containing trajectories.csv etc.")
    ap.add_argument("--scenario", default=None,
                    help="scenario JSON, used to draw the leader hulls")
    args = ap.parse_args()

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(args.out_dir)
    traj = np.genfromtxt(out / "trajectories.csv", delimiter=",", names=True)
    diag = np.genfromtxt(out / "diagnostics.csv", delimiter=",", names=True)

    fig, ax = plt.subplots(figsize=(6, 6))
    agents = np.unique(traj["agent"]).astype(int)
    for a in agents:
        rows = traj[traj["agent"] == a]
        ax.plot(rows["x"], rows["y"], lw=0.8, label=f"agent {a}")
        ax.plot(rows["x"][-1], rows["y"][-1], "o", ms=4)

    if args.scenario:
        scenario = json.loads(Path(args.scenario).read_text())
        offs = np.array(scenario["leaders"]["offsets"])[:, :2]
        mu = scenario["leaders"]["mu"]
        from containment_ref import hull_of_offsets

        for scale, style in ((1.0, "k-"), (mu, "k--")):
            hull = hull_of_offsets(scale * offs).vertices
            closed = np.vstack([hull, hull[0]])
            ax.plot(closed[:, 0], closed[:, 1], style, lw=1.2)

    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(fontsize=8)
    fig.savefig(out / "paths.png", dpi=150, bbox_inches="tight")

    fig2, ax2 = plt.subplots(figsize=(7, 4))
    ax2.semilogy(diag["t"], np.maximum(diag["containment_err_norm"], 1e-300),
                 label="containment error")
    ax2.semilogy(diag["t"], np.maximum(diag["lyapunov"], 1e-300), label="Lyapunov value")
    ax2.semilogy(diag["t"], np.maximum(diag["envelope"], 1e-300), "--", label="envelope")
    ax2.set_xlabel("t")
    ax2.legend(fontsize=8)
    fig2.savefig(out / "decay.png", dpi=150, bbox_inches="tight")
    print(f"wrote {out/'paths.png'} and {out/'decay.png'}")


if __name__ == "__main__":
    main()
