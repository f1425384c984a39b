"""Leader formation: a shared center trajectory plus constant offsets.

Every leader tracks the same center path shifted by its own constant offset,
so all leaders share the center's time derivatives. The built-in trajectory
families are closed-form through the third derivative; the integrator needs
exact derivatives at every substep, so no numeric differentiation happens on
this path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Protocol, runtime_checkable

from . import hull as hull_geometry
from .errors import DegenerateFormationError
from .pose import Pose, ZERO_POSE

# Sampled suprema get this headroom over the grid maximum.
DRIVE_BOUND_SAFETY = 1.1


class TrajectoryDerivatives(NamedTuple):
    eta: Pose
    d1: Pose
    d2: Pose
    d3: Pose


@runtime_checkable
class Trajectory(Protocol):
    def derivatives(self, t: float) -> TrajectoryDerivatives: ...

    def sample_horizon(self) -> float: ...


@dataclass(frozen=True)
class StationaryTrajectory:
    """Center fixed at one pose."""

    pose: Pose

    def derivatives(self, t: float) -> TrajectoryDerivatives:
        return TrajectoryDerivatives(self.pose, ZERO_POSE, ZERO_POSE, ZERO_POSE)

    def sample_horizon(self) -> float:
        return 1.0


@dataclass(frozen=True)
class LineTrajectory:
    """Constant-velocity straight-line motion."""

    start: Pose
    velocity: Pose

    def derivatives(self, t: float) -> TrajectoryDerivatives:
        eta = Pose(
            self.start.x + t * self.velocity.x,
            self.start.y + t * self.velocity.y,
            self.start.theta + t * self.velocity.theta,
        )
        return TrajectoryDerivatives(eta, self.velocity, ZERO_POSE, ZERO_POSE)

    def sample_horizon(self) -> float:
        return 1.0


@dataclass(frozen=True)
class CircleTrajectory:
    """Circular position path about the origin with fixed or spinning heading.

    Heading defaults to the constant ``theta0``; with ``rotate_heading`` it
    grows linearly as ``theta0 + omega*t``, which keeps all time derivatives
    bounded even though the heading itself is unbounded.
    """

    radius: float
    omega: float
    theta0: float = 0.0
    rotate_heading: bool = False

    def derivatives(self, t: float) -> TrajectoryDerivatives:
        r, w = self.radius, self.omega
        c = math.cos(w * t)
        s = math.sin(w * t)
        if self.rotate_heading:
            eta = Pose(r * c, r * s, self.theta0 + w * t)
            d1 = Pose(-r * w * s, r * w * c, w)
        else:
            eta = Pose(r * c, r * s, self.theta0)
            d1 = Pose(-r * w * s, r * w * c, 0.0)
        w2 = w * w
        d2 = Pose(-r * w2 * c, -r * w2 * s, 0.0)
        d3 = Pose(r * w2 * w * s, -r * w2 * w * c, 0.0)
        return TrajectoryDerivatives(eta, d1, d2, d3)

    def sample_horizon(self) -> float:
        if self.omega == 0.0:
            return 1.0
        return 2.0 * math.pi / abs(self.omega)


@dataclass(frozen=True)
class LissajousTrajectory:
    """Componentwise sinusoids: offset_k + amp_k * sin(omega_k * t + phase_k)."""

    amplitude: tuple[float, float, float]
    omega: tuple[float, float, float]
    phase: tuple[float, float, float] = (0.0, 0.0, 0.0)
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def derivatives(self, t: float) -> TrajectoryDerivatives:
        vals = [[0.0] * 3 for _ in range(4)]
        for k in range(3):
            a, w, p, o = self.amplitude[k], self.omega[k], self.phase[k], self.offset[k]
            s = math.sin(w * t + p)
            c = math.cos(w * t + p)
            vals[0][k] = o + a * s
            vals[1][k] = a * w * c
            vals[2][k] = -a * w * w * s
            vals[3][k] = -a * w * w * w * c
        return TrajectoryDerivatives(*(Pose(*v) for v in vals))

    def sample_horizon(self) -> float:
        # Cover a few periods of the slowest component; with incommensurate
        # frequencies the sampled supremum still relies on the safety factor.
        nonzero = [abs(w) for w in self.omega if w != 0.0]
        if not nonzero:
            return 1.0
        return 3.0 * 2.0 * math.pi / min(nonzero)


class FormationReport(NamedTuple):
    origin_enclosed: bool
    convex: bool
    theta_straddles_zero: bool

    @property
    def ok(self) -> bool:
        return self.origin_enclosed and self.convex and self.theta_straddles_zero


@dataclass(frozen=True)
class LeaderModel:
    """Center trajectory, per-leader offsets, and the hull scale factor."""

    trajectory: Trajectory
    offsets: tuple[Pose, ...]
    mu: float

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError(f"scale factor mu must lie in (0, 1), got {self.mu}")
        if len(self.offsets) < 1:
            raise ValueError("need at least one leader offset")
        object.__setattr__(self, "offsets", tuple(Pose(*o) for o in self.offsets))

    @property
    def m(self) -> int:
        return len(self.offsets)


def eval_center(model: LeaderModel, t: float) -> TrajectoryDerivatives:
    """Center pose and its first three time derivatives at time t."""
    return model.trajectory.derivatives(t)


def _check_leader_index(model: LeaderModel, j: int) -> None:
    if not 1 <= j <= model.m:
        raise IndexError(f"leader index {j} out of range 1..{model.m}")


def eval_leader(model: LeaderModel, j: int, t: float) -> Pose:
    """Pose of leader j (local index 1..m): center plus its offset."""
    _check_leader_index(model, j)
    return eval_center(model, t).eta + model.offsets[j - 1]


def eval_scaled_leader(model: LeaderModel, j: int, t: float) -> Pose:
    """Scaled target of leader j: center plus mu times its offset."""
    _check_leader_index(model, j)
    return eval_center(model, t).eta + model.offsets[j - 1].scaled(model.mu)


def drive_bound(
    model: LeaderModel,
    g1: float,
    g2: float,
    horizon: float | None = None,
    samples: int = 2001,
    t_start: float = 0.0,
) -> float:
    """Sampled supremum of the gain-weighted center-derivative norm.

    Returns max over a time grid of ``|d3 + g1*d2 + g2*d1|`` times a safety
    factor. Built-in families are periodic or have constant derivatives, so
    one period plus the margin is sound; callers supplying custom horizons
    own that judgement. A stationary center gives exactly zero.
    """
    if horizon is None:
        horizon = model.trajectory.sample_horizon()
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    if samples < 2:
        raise ValueError("need at least two samples")
    worst = 0.0
    step = horizon / (samples - 1)
    for k in range(samples):
        der = model.trajectory.derivatives(t_start + k * step)
        v = der.d3 + der.d2.scaled(g1) + der.d1.scaled(g2)
        worst = max(worst, v.norm())
    return DRIVE_BOUND_SAFETY * worst


def check_formation(model: LeaderModel) -> FormationReport:
    """Verify the offset geometry needed for positive hull margins.

    The position offsets must sit in convex position with the origin strictly
    inside their hull, and the heading offsets must straddle zero. Fewer than
    three leaders or collinear offsets raise
    :class:`DegenerateFormationError`.
    """
    if model.m < 3:
        raise DegenerateFormationError(
            f"need at least 3 leaders for a convex formation, got {model.m}"
        )
    points = [(o.x, o.y) for o in model.offsets]
    poly = hull_geometry.hull_of_offsets(points)
    convex = len(poly.vertices) == model.m
    origin_enclosed = hull_geometry.contains_point(poly, (0.0, 0.0), tol=-1e-12)
    thetas = [o.theta for o in model.offsets]
    straddles = min(thetas) <= 0.0 <= max(thetas)
    return FormationReport(origin_enclosed, convex, straddles)
