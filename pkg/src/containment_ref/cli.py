"""Command-line front end: validate, run, margins, sweep.

Exit codes are a stable contract: 0 when every check passes, 2 when the
verdict fails (pre-run validation or post-run checks), 3 on runtime
divergence, 64 on usage or parse errors. Floating-point CSV output uses 17
significant digits so reruns are byte-comparable.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import hull as hull_geometry
from .errors import (
    ContainmentError,
    NonFiniteStateError,
    ScenarioParseError,
    ValidationFailedError,
)
from .scenario import load_scenario
from .sim import ScenarioConfig, SimulationRun, convergence_time, run, validate

EXIT_OK = 0
EXIT_VERDICT_FAILED = 2
EXIT_DIVERGED = 3
EXIT_USAGE = 64

# Frame-by-frame envelope check tolerances (relative, absolute).
ENVELOPE_RTOL = 1e-6
ENVELOPE_ATOL = 1e-12

DEFAULT_CONVERGENCE_TOL = 1e-3
DEFAULT_CONTAINMENT_TOL = 1e-9

_FLOAT_FMT = "%.17g"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we own exit codes
        raise UsageError(message)


@dataclass(frozen=True)
class Verdict:
    """Machine-readable outcome of validation and (optionally) a run."""

    assumption1_ok: bool
    connected_followers: bool
    every_follower_reaches_leader: bool
    assumption2_ok: bool
    assumption3_ok: bool
    origin_enclosed: bool
    convex: bool
    theta_straddles_zero: bool
    gain_ok: bool
    gain_slack: float
    drive_bound: float
    alpha_p: float | None
    alpha_theta: float | None
    issues: tuple[str, ...]
    convergence_tol: float | None = None
    convergence_time: float | None = None
    containment_final: bool | None = None
    envelope_violations: int | None = None

    @property
    def validation_ok(self) -> bool:
        return self.assumption1_ok and self.assumption2_ok and self.assumption3_ok and self.gain_ok

    @property
    def all_ok(self) -> bool:
        ok = self.validation_ok
        if self.containment_final is not None:
            ok = ok and self.containment_final
        if self.envelope_violations is not None:
            ok = ok and self.envelope_violations == 0
        if self.convergence_tol is not None:
            ok = ok and self.convergence_time is not None
        return ok

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.all_ok else EXIT_VERDICT_FAILED

    def to_dict(self) -> dict:
        return {
            "assumption1": {
                "ok": self.assumption1_ok,
                "connectedFollowers": self.connected_followers,
                "everyFollowerReachesLeader": self.every_follower_reaches_leader,
            },
            "assumption2": {"ok": self.assumption2_ok},
            "assumption3": {
                "ok": self.assumption3_ok,
                "originEnclosed": self.origin_enclosed,
                "convex": self.convex,
                "thetaStraddlesZero": self.theta_straddles_zero,
            },
            "gainCondition": {
                "ok": self.gain_ok,
                "slack": self.gain_slack,
                "driveBound": self.drive_bound,
            },
            "margins": {"alphaP": self.alpha_p, "alphaTheta": self.alpha_theta},
            "convergenceTol": self.convergence_tol,
            "convergenceTime": self.convergence_time,
            "containmentFinal": self.containment_final,
            "envelopeViolations": self.envelope_violations,
            "issues": list(self.issues),
            "exitCode": self.exit_code,
        }

    @staticmethod
    def from_dict(d: dict) -> "Verdict":
        return Verdict(
            assumption1_ok=d["assumption1"]["ok"],
            connected_followers=d["assumption1"]["connectedFollowers"],
            every_follower_reaches_leader=d["assumption1"]["everyFollowerReachesLeader"],
            assumption2_ok=d["assumption2"]["ok"],
            assumption3_ok=d["assumption3"]["ok"],
            origin_enclosed=d["assumption3"]["originEnclosed"],
            convex=d["assumption3"]["convex"],
            theta_straddles_zero=d["assumption3"]["thetaStraddlesZero"],
            gain_ok=d["gainCondition"]["ok"],
            gain_slack=d["gainCondition"]["slack"],
            drive_bound=d["gainCondition"]["driveBound"],
            alpha_p=d["margins"]["alphaP"],
            alpha_theta=d["margins"]["alphaTheta"],
            issues=tuple(d["issues"]),
            convergence_tol=d["convergenceTol"],
            convergence_time=d["convergenceTime"],
            containment_final=d["containmentFinal"],
            envelope_violations=d["envelopeViolations"],
        )


def _validation_verdict(config: ScenarioConfig) -> Verdict:
    report = validate(config)
    try:
        m = hull_geometry.margins(config.leaders)
        alpha_p, alpha_theta = m.alpha_p, m.alpha_theta
    except ContainmentError:
        alpha_p = alpha_theta = None
    return Verdict(
        assumption1_ok=report.connected_followers and report.every_follower_reaches_leader,
        connected_followers=report.connected_followers,
        every_follower_reaches_leader=report.every_follower_reaches_leader,
        assumption2_ok=report.trajectory_smooth,
        assumption3_ok=report.origin_enclosed and report.convex and report.theta_straddles_zero,
        origin_enclosed=report.origin_enclosed,
        convex=report.convex,
        theta_straddles_zero=report.theta_straddles_zero,
        gain_ok=report.gains_ok,
        gain_slack=report.gain_slack,
        drive_bound=report.drive_bound,
        alpha_p=alpha_p,
        alpha_theta=alpha_theta,
        issues=report.issues,
    )


def _containment_final(run_: SimulationRun, tol: float) -> bool:
    """Whether every final pose sits in the scaled hull and heading interval."""
    model = run_.config.leaders
    t_end = float(run_.times[-1])
    center = model.trajectory.derivatives(t_end).eta
    scaled_pts = [
        (center.x + model.mu * o.x, center.y + model.mu * o.y) for o in model.offsets
    ]
    poly = hull_geometry.hull_of_offsets(scaled_pts)
    lo, hi = hull_geometry.theta_interval(model, t_end, scaled=True)
    final = run_.states[-1]
    for row in final:
        if not hull_geometry.contains_point(poly, (row[0], row[1]), tol):
            return False
        if not lo - tol <= row[2] <= hi + tol:
            return False
    return True


def _envelope_violations(run_: SimulationRun) -> int:
    count = 0
    for f in run_.frames:
        if f.lyapunov > f.envelope * (1.0 + ENVELOPE_RTOL) + ENVELOPE_ATOL:
            count += 1
    return count


def _run_verdict(
    config: ScenarioConfig,
    run_: SimulationRun,
    convergence_tol: float,
    containment_tol: float,
) -> Verdict:
    base = _validation_verdict(config)
    return dataclasses.replace(
        base,
        convergence_tol=convergence_tol,
        convergence_time=convergence_time(run_, convergence_tol),
        containment_final=_containment_final(run_, containment_tol),
        envelope_violations=_envelope_violations(run_),
    )


def _fmt(x: float) -> str:
    return _FLOAT_FMT % x


def write_trajectories_csv(path: Path, run_: SimulationRun) -> None:
    lines = ["t,agent,x,y,theta,phi_x,phi_y,phi_theta,rho_x,rho_y,rho_theta"]
    for t, snap in zip(run_.times, run_.states):
        ts = _fmt(t)
        for a, row in enumerate(snap, start=1):
            lines.append(ts + f",{a}," + ",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_diagnostics_csv(path: Path, run_: SimulationRun) -> None:
    lines = ["t,containment_err_norm,filtered_err_norm,lyapunov,envelope"]
    for f in run_.frames:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    f.t,
                    float(np.linalg.norm(f.containment_err)),
                    float(np.linalg.norm(f.filtered_err)),
                    f.lyapunov,
                    f.envelope,
                )
            )
        )
    path.write_text("\n".join(lines) + "\n")


def write_verdict_json(path: Path, verdict: Verdict) -> None:
    path.write_text(json.dumps(verdict.to_dict(), indent=2) + "\n")


def cmd_validate(config_path: str) -> tuple[Verdict, int]:
    """Validate a scenario without simulating."""
    config = load_scenario(config_path)
    verdict = _validation_verdict(config)
    code = EXIT_OK if verdict.validation_ok else EXIT_VERDICT_FAILED
    print(json.dumps(verdict.to_dict(), indent=2))
    return verdict, code


def cmd_run(
    config_path: str,
    out_dir: str,
    convergence_tol: float = DEFAULT_CONVERGENCE_TOL,
    containment_tol: float = DEFAULT_CONTAINMENT_TOL,
    seed: int | None = None,
    override_validation: bool = False,
) -> tuple[Verdict | None, int]:
    """Run a scenario and write trajectories, diagnostics, and the verdict."""
    config = load_scenario(config_path)
    if seed is not None:
        config = dataclasses.replace(config, seed=seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        run_ = run(config, override_validation=override_validation)
    except ValidationFailedError as exc:
        verdict = _validation_verdict(config)
        write_verdict_json(out / "verdict.json", verdict)
        print(f"validation failed: {exc}", file=sys.stderr)
        print(json.dumps(verdict.to_dict(), indent=2))
        return verdict, EXIT_VERDICT_FAILED
    except NonFiniteStateError as exc:
        # Flush whatever was logged before the blow-up.
        if exc.partial_run is not None:
            write_trajectories_csv(out / "trajectories.csv", exc.partial_run)
            write_diagnostics_csv(out / "diagnostics.csv", exc.partial_run)
        print(f"integration diverged: {exc}", file=sys.stderr)
        return None, EXIT_DIVERGED
    verdict = _run_verdict(config, run_, convergence_tol, containment_tol)
    write_trajectories_csv(out / "trajectories.csv", run_)
    write_diagnostics_csv(out / "diagnostics.csv", run_)
    write_verdict_json(out / "verdict.json", verdict)
    print(json.dumps(verdict.to_dict(), indent=2))
    return verdict, verdict.exit_code


def _margins_entry(config: ScenarioConfig, mu: float) -> dict:
    model = dataclasses.replace(config.leaders, mu=mu)
    m = hull_geometry.margins(model)
    points = [(o.x, o.y) for o in model.offsets]
    original = hull_geometry.hull_of_offsets(points)
    scaled = hull_geometry.scale_polygon(original, (0.0, 0.0), mu)
    return {
        "mu": mu,
        "alphaP": m.alpha_p,
        "alphaTheta": m.alpha_theta,
        "originalHull": original.vertices.tolist(),
        "scaledHull": scaled.vertices.tolist(),
    }


def cmd_margins(config_path: str, mu_sweep: list[float] | None = None) -> int:
    """Print hull margins and vertices (offset frame) as JSON."""
    config = load_scenario(config_path)
    try:
        if mu_sweep:
            payload = {"sweep": [_margins_entry(config, mu) for mu in mu_sweep]}
        else:
            payload = _margins_entry(config, config.leaders.mu)
    except ContainmentError as exc:
        print(f"margins failed: {exc}", file=sys.stderr)
        return EXIT_VERDICT_FAILED
    print(json.dumps(payload, indent=2))
    return EXIT_OK


SWEEP_PARAMETERS = ("g3", "g4", "mu", "dt")


def _config_with(config: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    if parameter in ("g3", "g4"):
        return dataclasses.replace(
            config, gains=dataclasses.replace(config.gains, **{parameter: value})
        )
    if parameter == "mu":
        return dataclasses.replace(
            config, leaders=dataclasses.replace(config.leaders, mu=value)
        )
    if parameter == "dt":
        return dataclasses.replace(config, dt=value)
    raise UsageError(f"unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")


def _sweep_one(args) -> dict:
    config, parameter, value, convergence_tol, containment_tol = args
    row = {
        "parameter": parameter,
        "value": value,
        "exit": EXIT_OK,
        "convergenceTime": None,
        "finalErrNorm": None,
        "envelopeViolations": None,
        "containmentFinal": None,
    }
    try:
        variant = _config_with(config, parameter, value)
        run_ = run(variant)
    except (ValidationFailedError, ValueError, ScenarioParseError):
        row["exit"] = EXIT_VERDICT_FAILED
        return row
    except NonFiniteStateError:
        row["exit"] = EXIT_DIVERGED
        return row
    verdict = _run_verdict(variant, run_, convergence_tol, containment_tol)
    row["exit"] = verdict.exit_code
    row["convergenceTime"] = verdict.convergence_time
    row["finalErrNorm"] = float(np.linalg.norm(run_.frames[-1].containment_err))
    row["envelopeViolations"] = verdict.envelope_violations
    row["containmentFinal"] = verdict.containment_final
    return row


def cmd_sweep(
    config_path: str,
    parameter: str,
    values: list[float],
    out_dir: str | None = None,
    convergence_tol: float = DEFAULT_CONVERGENCE_TOL,
    containment_tol: float = DEFAULT_CONTAINMENT_TOL,
) -> tuple[list[dict], int]:
    """Run one scenario variant per value; rows follow input order."""
    if parameter not in SWEEP_PARAMETERS:
        raise UsageError(
            f"sweep parameter must be one of {', '.join(SWEEP_PARAMETERS)}; got {parameter!r}"
        )
    if not values:
        raise UsageError("sweep needs a non-empty value list")
    config = load_scenario(config_path)
    jobs = [(config, parameter, v, convergence_tol, containment_tol) for v in values]
    workers = int(os.environ.get("CONTAINMENT_REF_THREADS", "1"))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]

    header = "parameter,value,exit,convergenceTime,finalErrNorm,envelopeViolations,containmentFinal"
    lines = [header]
    for r in rows:
        lines.append(
            ",".join(
                [
                    r["parameter"],
                    _fmt(r["value"]),
                    str(r["exit"]),
                    "" if r["convergenceTime"] is None else _fmt(r["convergenceTime"]),
                    "" if r["finalErrNorm"] is None else _fmt(r["finalErrNorm"]),
                    "" if r["envelopeViolations"] is None else str(r["envelopeViolations"]),
                    "" if r["containmentFinal"] is None else str(r["containmentFinal"]).lower(),
                ]
            )
        )
    table = "\n".join(lines) + "\n"
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(table)
    print(table, end="")
    code = EXIT_OK if all(r["exit"] == EXIT_OK for r in rows) else EXIT_VERDICT_FAILED
    return rows, code


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="containment-ref", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="scenario JSON file")

    p_validate = sub.add_parser("validate", parents=[common], help="check a scenario without running it")

    p_run = sub.add_parser("run", parents=[common], help="simulate and write CSV/JSON outputs")
    p_run.add_argument("--out", default="out", help="output directory (default: out)")
    p_run.add_argument("--tol", type=float, default=DEFAULT_CONVERGENCE_TOL,
                       help="convergence tolerance on the containment error norm")
    p_run.add_argument("--containment-tol", type=float, default=DEFAULT_CONTAINMENT_TOL,
                       help="tolerance for the final hull membership test")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--override-validation", action="store_true",
                       help="integrate even if validation fails")

    p_margins = sub.add_parser("margins", parents=[common], help="print hull margins as JSON")
    p_margins.add_argument("--mu-sweep", default=None,
                           help="comma-separated scale factors to sweep instead of the scenario value")

    p_sweep = sub.add_parser("sweep", parents=[common], help="rerun the scenario over a parameter grid")
    p_sweep.add_argument("--parameter", required=True, help=f"one of {', '.join(SWEEP_PARAMETERS)}")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out", default=None, help="also write sweep.csv into this directory")
    p_sweep.add_argument("--tol", type=float, default=DEFAULT_CONVERGENCE_TOL)
    p_sweep.add_argument("--containment-tol", type=float, default=DEFAULT_CONTAINMENT_TOL)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "validate":
            _, code = cmd_validate(args.config)
            return code
        if args.command == "run":
            _, code = cmd_run(
                args.config,
                args.out,
                convergence_tol=args.tol,
                containment_tol=args.containment_tol,
                seed=args.seed,
                override_validation=args.override_validation,
            )
            return code
        if args.command == "margins":
            mu_sweep = _parse_floats(args.mu_sweep) if args.mu_sweep else None
            return cmd_margins(args.config, mu_sweep)
        if args.command == "sweep":
            values = _parse_floats(args.values)
            _, code = cmd_sweep(
                args.config,
                args.parameter,
                values,
                out_dir=args.out,
                convergence_tol=args.tol,
                containment_tol=args.containment_tol,
            )
            return code
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioParseError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ContainmentError as exc:
        # e.g. an override-validation run on a graph too broken to analyze
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERDICT_FAILED


if __name__ == "__main__":
    sys.exit(main())
