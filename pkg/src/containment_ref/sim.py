"""Deterministic fixed-step integration of the coupled follower system.

The state of all n followers is a flat array of 9n floats (pose, velocity,
acceleration per agent). Classical fourth-order Runge-Kutta advances it with
a fixed step; the dynamics are non-autonomous through the time-decaying
regularizer and moving leaders, so every substage rebuilds each agent's
neighbor view at the substage state and substage time. Identical configs
produce bit-identical runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import analysis
from .errors import (
    DegenerateFormationError,
    NonFiniteStateError,
    ValidationFailedError,
)
from .graph import InteractionGraph, LaplacianPartition, check_connectivity, partition
from .leaders import LeaderModel, check_formation, drive_bound
from .observer import (
    AgentState,
    Gains,
    NeighborView,
    coupling_signal,
    state_derivative,
    validate_gains,
)
from .pose import Pose

BLOWUP_GUARD = 1e9


@dataclass(frozen=True)
class SystemModel:
    """Graph, leader model, and gains bundled for the integrator."""

    graph: InteractionGraph
    leaders: LeaderModel
    gains: Gains
    follower_nbrs: tuple = field(init=False)
    leader_nbrs: tuple = field(init=False)

    def __post_init__(self):
        if self.graph.m != self.leaders.m:
            raise ValueError(
                f"graph has {self.graph.m} leaders but the model has {self.leaders.m}"
            )
        g = self.graph
        object.__setattr__(
            self,
            "follower_nbrs",
            tuple(g.follower_neighbors(i) for i in range(1, g.n + 1)),
        )
        object.__setattr__(
            self,
            "leader_nbrs",
            tuple(g.leader_neighbors(i) for i in range(1, g.n + 1)),
        )


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one run."""

    graph: InteractionGraph
    leaders: LeaderModel
    gains: Gains
    dt: float
    t_final: float
    log_every: int = 1
    initial: np.ndarray | None = None
    seed: int = 0
    init_halfwidth: float = 2.0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_final < self.dt:
            raise ValueError("t_final must be at least one step")
        if self.log_every < 1:
            raise ValueError("log_every must be a positive stride")
        if self.initial is not None:
            arr = np.asarray(self.initial, dtype=float)
            if arr.shape != (self.graph.n, 9):
                raise ValueError(
                    f"initial states must have shape ({self.graph.n}, 9), got {arr.shape}"
                )
            if not np.isfinite(arr).all():
                raise ValueError("initial states must be finite")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, "initial", arr)


class ValidationReport(NamedTuple):
    """Pre-run checks: connectivity, smoothness, formation, gain condition."""

    connected_followers: bool
    every_follower_reaches_leader: bool
    trajectory_smooth: bool
    origin_enclosed: bool
    convex: bool
    theta_straddles_zero: bool
    gains_ok: bool
    gain_slack: float
    drive_bound: float
    issues: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.issues


@dataclass(frozen=True)
class SimulationRun:
    """Time grid, state history, and per-frame verification data."""

    config: ScenarioConfig
    times: np.ndarray
    states: np.ndarray  # (frames, n, 9)
    frames: tuple
    partition: LaplacianPartition
    drive_bound: float

    def __post_init__(self):
        self.times.setflags(write=False)
        self.states.setflags(write=False)

    def containment_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(f.containment_err) for f in self.frames])


def _derivative_flat(system: SystemModel, t: float, y: np.ndarray) -> np.ndarray:
    """Vector field of the coupled system at time t.

    Rebuilds every agent's neighbor view from the snapshot ``y`` and the
    leader signals at ``t``, then evaluates the per-agent dynamics. The
    regularizer is time-varying, so substage times must be passed exactly.
    """
    n = system.graph.n
    vals = y.tolist()
    states = []
    o = 0
    for _ in range(n):
        states.append(
            AgentState(
                Pose(vals[o], vals[o + 1], vals[o + 2]),
                Pose(vals[o + 3], vals[o + 4], vals[o + 5]),
                Pose(vals[o + 6], vals[o + 7], vals[o + 8]),
            )
        )
        o += 9
    der = system.leaders.trajectory.derivatives(t)
    ec = der.eta
    vel = der.d1
    acc = der.d2
    mu = system.leaders.mu
    scaled = [
        Pose(ec.x + mu * d.x, ec.y + mu * d.y, ec.theta + mu * d.theta)
        for d in system.leaders.offsets
    ]
    gains = system.gains
    out = [0.0] * (9 * n)
    o = 0
    for i in range(n):
        st = states[i]
        view = NeighborView(
            tuple((j, states[j - 1]) for j in system.follower_nbrs[i]),
            tuple((j, scaled[j - n - 1], vel, acc) for j in system.leader_nbrs[i]),
        )
        s = coupling_signal(i + 1, st, view, gains)
        d_eta, d_phi, d_rho = state_derivative(st, s, gains, t)
        out[o] = d_eta.x
        out[o + 1] = d_eta.y
        out[o + 2] = d_eta.theta
        out[o + 3] = d_phi.x
        out[o + 4] = d_phi.y
        out[o + 5] = d_phi.theta
        out[o + 6] = d_rho.x
        out[o + 7] = d_rho.y
        out[o + 8] = d_rho.theta
        o += 9
    return np.asarray(out)


def _rk4_step(system: SystemModel, t: float, dt: float, y: np.ndarray) -> np.ndarray:
    k1 = _derivative_flat(system, t, y)
    k2 = _derivative_flat(system, t + 0.5 * dt, y + (0.5 * dt) * k1)
    k3 = _derivative_flat(system, t + 0.5 * dt, y + (0.5 * dt) * k2)
    k4 = _derivative_flat(system, t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def step(
    states: list[AgentState], t: float, dt: float, system: SystemModel
) -> list[AgentState]:
    """Advance all agents by one Runge-Kutta step of size dt."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    y = states_to_array(states).ravel()
    y1 = _rk4_step(system, t, dt, y)
    if not np.isfinite(y1).all() or np.abs(y1).max() > BLOWUP_GUARD:
        raise NonFiniteStateError(f"state blew up during step at t={t}", time=t)
    return array_to_states(y1.reshape(len(states), 9))


def states_to_array(states: list[AgentState]) -> np.ndarray:
    return np.array([[*s.eta, *s.phi, *s.rho] for s in states])


def array_to_states(arr: np.ndarray) -> list[AgentState]:
    return [
        AgentState(Pose(*row[0:3]), Pose(*row[3:6]), Pose(*row[6:9]))
        for row in np.asarray(arr, dtype=float)
    ]


def validate(config: ScenarioConfig) -> ValidationReport:
    """Run all pre-flight checks and collect human-readable issues."""
    issues = []
    conn = check_connectivity(config.graph)
    if not conn.connected_followers:
        issues.append("follower subgraph is not connected")
    if not conn.every_follower_reaches_leader:
        issues.append("some follower has no path to any leader")

    # Built-in trajectory families are closed-form; probe a few times anyway
    # so a pathological parameterization (e.g. inf amplitude) is caught.
    smooth = True
    for t in (0.0, 0.5 * config.t_final, config.t_final):
        der = config.leaders.trajectory.derivatives(t)
        for p in der:
            if not all(map(math.isfinite, p)):
                smooth = False
    if not smooth:
        issues.append("trajectory derivatives are not finite over the horizon")

    try:
        form = check_formation(config.leaders)
    except DegenerateFormationError as exc:
        form = None
        issues.append(f"formation check failed: {exc}")
    if form is not None:
        if not form.origin_enclosed:
            issues.append("leader offsets do not strictly enclose the origin")
        if not form.convex:
            issues.append("leader offsets are not in convex position")
        if not form.theta_straddles_zero:
            issues.append("heading offsets do not straddle zero")

    bound = drive_bound(config.leaders, config.gains.g1, config.gains.g2)
    gcheck = validate_gains(config.gains, config.graph.n, bound)
    issues.extend(gcheck.issues)

    return ValidationReport(
        connected_followers=conn.connected_followers,
        every_follower_reaches_leader=conn.every_follower_reaches_leader,
        trajectory_smooth=smooth,
        origin_enclosed=form.origin_enclosed if form else False,
        convex=form.convex if form else False,
        theta_straddles_zero=form.theta_straddles_zero if form else False,
        gains_ok=gcheck.ok,
        gain_slack=gcheck.slack,
        drive_bound=bound,
        issues=tuple(issues),
    )


def default_initial(config: ScenarioConfig) -> np.ndarray:
    """Seeded default start: poses uniform in a box around the leader centroid.

    Velocities and accelerations start at zero. Convergence is global, so the
    box is a convention for reproducibility, not a requirement.
    """
    rng = np.random.default_rng(config.seed)
    center = config.leaders.trajectory.derivatives(0.0).eta.as_array()
    offs = np.array([[o.x, o.y, o.theta] for o in config.leaders.offsets])
    centroid = center + offs.mean(axis=0)
    n = config.graph.n
    init = np.zeros((n, 9))
    init[:, 0:3] = centroid + rng.uniform(
        -config.init_halfwidth, config.init_halfwidth, size=(n, 3)
    )
    return init


def _build_frames(
    times: np.ndarray,
    states: np.ndarray,
    system: SystemModel,
    part: LaplacianPartition,
    bound: float,
) -> tuple:
    """Attach centralized diagnostics to every logged frame.

    The coupling stack is recomputed through the per-agent path so the frame
    carries the distributed quantity; everything else is centralized.
    """
    gains = system.gains
    n = system.graph.n
    v1_0 = None
    frames = []
    for t, snap in zip(times, states):
        eta = snap[:, 0:3]
        phi = snap[:, 3:6]
        rho = snap[:, 6:9]
        err = analysis.containment_error(eta, part, system.leaders, t)
        err_rate = analysis.containment_error_rate(phi, part, system.leaders, t)
        filt = analysis.filtered_error(eta, phi, rho, part, system.leaders, gains, t)
        coupling = _agent_coupling_stack(system, t, snap)
        v1 = analysis.lyapunov_value(filt, part)
        if v1_0 is None:
            v1_0 = v1
        env = analysis.decay_envelope(v1_0, t - times[0], gains, part, n, bound)
        frames.append(
            analysis.DiagnosticsFrame(
                t=float(t),
                containment_err=err,
                containment_err_rate=err_rate,
                filtered_err=filt,
                coupling=coupling,
                lyapunov=v1,
                envelope=env,
            )
        )
    return tuple(frames)


def _agent_coupling_stack(system: SystemModel, t: float, snap: np.ndarray) -> np.ndarray:
    """Stack of per-agent coupling signals evaluated the distributed way."""
    n = system.graph.n
    states = array_to_states(snap)
    der = system.leaders.trajectory.derivatives(t)
    mu = system.leaders.mu
    ec, vel, acc = der.eta, der.d1, der.d2
    scaled = [
        Pose(ec.x + mu * d.x, ec.y + mu * d.y, ec.theta + mu * d.theta)
        for d in system.leaders.offsets
    ]
    out = np.empty(3 * n)
    for i in range(n):
        view = NeighborView(
            tuple((j, states[j - 1]) for j in system.follower_nbrs[i]),
            tuple((j, scaled[j - n - 1], vel, acc) for j in system.leader_nbrs[i]),
        )
        s = coupling_signal(i + 1, states[i], view, system.gains)
        out[3 * i : 3 * i + 3] = s
    return out


def run(config: ScenarioConfig, override_validation: bool = False) -> SimulationRun:
    """Integrate from t=0 to t_final, logging states and diagnostics.

    The horizon is rounded to a whole number of steps. Validation failures
    abort with the full report unless overridden. On blow-up the raised
    :class:`NonFiniteStateError` carries the partial run so callers can
    flush what was logged.
    """
    report = validate(config)
    if not report.ok and not override_validation:
        raise ValidationFailedError(
            "scenario failed validation: " + "; ".join(report.issues), report=report
        )
    system = SystemModel(config.graph, config.leaders, config.gains)
    part = partition(config.graph)
    bound = report.drive_bound

    y = (
        config.initial.copy()
        if config.initial is not None
        else default_initial(config)
    ).ravel()
    n = config.graph.n
    nsteps = int(round(config.t_final / config.dt))
    log_times = [0.0]
    log_states = [y.reshape(n, 9).copy()]

    def finish(times_list, states_list):
        times = np.array(times_list)
        states = np.array(states_list)
        frames = _build_frames(times, states, system, part, bound)
        return SimulationRun(
            config=config,
            times=times,
            states=states,
            frames=frames,
            partition=part,
            drive_bound=bound,
        )

    for k in range(nsteps):
        t = k * config.dt
        y = _rk4_step(system, t, config.dt, y)
        t_next = (k + 1) * config.dt
        if not np.isfinite(y).all() or np.abs(y).max() > BLOWUP_GUARD:
            raise NonFiniteStateError(
                f"state blew up at t={t_next:.6g}",
                time=t_next,
                partial_run=finish(log_times, log_states),
            )
        if (k + 1) % config.log_every == 0 or k + 1 == nsteps:
            log_times.append(t_next)
            log_states.append(y.reshape(n, 9).copy())

    return finish(log_times, log_states)


def convergence_time(run_: SimulationRun, tol: float) -> float | None:
    """First logged time after which the containment error stays within tol.

    Returns None when the tail never settles below tol.
    """
    norms = run_.containment_norms()
    above = np.flatnonzero(norms > tol)
    if len(above) == 0:
        return float(run_.times[0])
    last = int(above[-1])
    if last == len(norms) - 1:
        return None
    return float(run_.times[last + 1])
