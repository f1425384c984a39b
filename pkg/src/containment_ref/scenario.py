"""Scenario files: JSON in, ScenarioConfig out.

The schema is documented in the README. Indices are 1-based; leader links
are written [leader, follower]. Parse failures raise
:class:`ScenarioParseError` with the offending field in the message.
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import ContainmentError, ScenarioParseError
from .graph import build_graph
from .leaders import (
    CircleTrajectory,
    LeaderModel,
    LineTrajectory,
    LissajousTrajectory,
    StationaryTrajectory,
)
from .observer import Gains
from .pose import Pose
from .sim import ScenarioConfig

_GAIN_KEYS = ("g1", "g2", "g3", "g4", "gamma1", "gamma2")


def _require(mapping, key, context):
    if not isinstance(mapping, dict):
        raise ScenarioParseError(f"{context}: expected an object")
    if key not in mapping:
        raise ScenarioParseError(f"{context}.{key}: missing required field")
    return mapping[key]


def _number(value, context):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioParseError(f"{context}: expected a number, got {value!r}")
    return float(value)


def _triple(value, context):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ScenarioParseError(f"{context}: expected a 3-element array")
    return tuple(_number(v, context) for v in value)


def _parse_trajectory(block, context):
    kind = _require(block, "kind", context)
    try:
        if kind == "stationary":
            return StationaryTrajectory(Pose(*_triple(_require(block, "pose", context), f"{context}.pose")))
        if kind == "line":
            return LineTrajectory(
                start=Pose(*_triple(_require(block, "start", context), f"{context}.start")),
                velocity=Pose(*_triple(_require(block, "velocity", context), f"{context}.velocity")),
            )
        if kind == "circle":
            return CircleTrajectory(
                radius=_number(_require(block, "R", context), f"{context}.R"),
                omega=_number(_require(block, "omega", context), f"{context}.omega"),
                theta0=_number(block.get("theta0", 0.0), f"{context}.theta0"),
                rotate_heading=bool(block.get("rotateHeading", False)),
            )
        if kind == "lissajous":
            return LissajousTrajectory(
                amplitude=_triple(_require(block, "amp", context), f"{context}.amp"),
                omega=_triple(_require(block, "omega", context), f"{context}.omega"),
                phase=_triple(block.get("phase", [0.0, 0.0, 0.0]), f"{context}.phase"),
                offset=_triple(block.get("offset", [0.0, 0.0, 0.0]), f"{context}.offset"),
            )
    except ScenarioParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError(f"{context}: {exc}") from exc
    raise ScenarioParseError(
        f"{context}.kind: unknown trajectory kind {kind!r}; "
        "expected stationary|line|circle|lissajous"
    )


def parse_scenario(data: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from already-decoded JSON data."""
    graph_block = _require(data, "graph", "scenario")
    n = _require(graph_block, "n", "scenario.graph")
    m = _require(graph_block, "m", "scenario.graph")
    if not isinstance(n, int) or not isinstance(m, int):
        raise ScenarioParseError("scenario.graph: n and m must be integers")
    edges = _require(graph_block, "edges", "scenario.graph")
    if not isinstance(edges, list):
        raise ScenarioParseError("scenario.graph.edges: expected a list of pairs")
    for k, e in enumerate(edges):
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise ScenarioParseError(f"scenario.graph.edges[{k}]: expected a pair")
    try:
        graph = build_graph(n, m, edges)
    except (ValueError, IndexError, ContainmentError) as exc:
        raise ScenarioParseError(f"scenario.graph: {exc}") from exc

    leader_block = _require(data, "leaders", "scenario")
    mu = _number(_require(leader_block, "mu", "scenario.leaders"), "scenario.leaders.mu")
    traj = _parse_trajectory(
        _require(leader_block, "trajectory", "scenario.leaders"), "scenario.leaders.trajectory"
    )
    offs_raw = _require(leader_block, "offsets", "scenario.leaders")
    if not isinstance(offs_raw, list) or len(offs_raw) != m:
        raise ScenarioParseError(
            f"scenario.leaders.offsets: expected {m} offsets to match graph.m"
        )
    offsets = tuple(
        Pose(*_triple(o, f"scenario.leaders.offsets[{k}]"))
        for k, o in enumerate(offs_raw)
    )
    try:
        leaders = LeaderModel(trajectory=traj, offsets=offsets, mu=mu)
    except ValueError as exc:
        raise ScenarioParseError(f"scenario.leaders: {exc}") from exc

    gains_block = _require(data, "gains", "scenario")
    gains = Gains(
        **{k: _number(_require(gains_block, k, "scenario.gains"), f"scenario.gains.{k}") for k in _GAIN_KEYS}
    )

    sim_block = _require(data, "sim", "scenario")
    dt = _number(_require(sim_block, "dt", "scenario.sim"), "scenario.sim.dt")
    t_final = _number(_require(sim_block, "tFinal", "scenario.sim"), "scenario.sim.tFinal")
    log_every = sim_block.get("logEvery", 1)
    if not isinstance(log_every, int) or log_every < 1:
        raise ScenarioParseError("scenario.sim.logEvery: expected a positive integer")
    seed = sim_block.get("seed", 0)
    if not isinstance(seed, int):
        raise ScenarioParseError("scenario.sim.seed: expected an integer")
    init_halfwidth = _number(sim_block.get("initHalfwidth", 2.0), "scenario.sim.initHalfwidth")

    initial = None
    if "initial" in sim_block and sim_block["initial"] is not None:
        raw = sim_block["initial"]
        if not isinstance(raw, list) or len(raw) != graph.n:
            raise ScenarioParseError(
                f"scenario.sim.initial: expected {graph.n} agent entries"
            )
        rows = []
        for k, entry in enumerate(raw):
            ctx = f"scenario.sim.initial[{k}]"
            eta = _triple(_require(entry, "eta", ctx), f"{ctx}.eta")
            phi = _triple(entry.get("phi", [0.0, 0.0, 0.0]), f"{ctx}.phi")
            rho = _triple(entry.get("rho", [0.0, 0.0, 0.0]), f"{ctx}.rho")
            rows.append([*eta, *phi, *rho])
        initial = rows

    try:
        return ScenarioConfig(
            graph=graph,
            leaders=leaders,
            gains=gains,
            dt=dt,
            t_final=t_final,
            log_every=log_every,
            initial=initial,
            seed=seed,
            init_halfwidth=init_halfwidth,
        )
    except ValueError as exc:
        raise ScenarioParseError(f"scenario.sim: {exc}") from exc


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Read and parse a scenario JSON file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_scenario(data)
