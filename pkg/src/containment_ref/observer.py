"""Per-agent reference generator: coupling signal and state derivative.

Each follower integrates a third-order chain whose acceleration-level input
mixes plain and regularized-sign feedback on a neighborhood disagreement
signal. The functions here are deliberately scalar and per-agent: an agent
sees only the data packed into its :class:`NeighborView`, which makes the
distributed-information contract testable and keeps evaluations independent
across agents at a fixed time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InconsistentViewError
from .pose import Pose


@dataclass(frozen=True)
class Gains:
    """Feedback gains; positivity is checked by :func:`validate_gains`."""

    g1: float
    g2: float
    g3: float
    g4: float
    gamma1: float
    gamma2: float


class AgentState(NamedTuple):
    """One follower's generator state: pose, velocity, acceleration."""

    eta: Pose
    phi: Pose
    rho: Pose


class NeighborView(NamedTuple):
    """Exactly the data one agent may read: its graph neighbors.

    ``follower_neighbors`` holds ``(index, AgentState)`` pairs and
    ``leader_neighbors`` holds ``(index, scaled_pose, velocity, acceleration)``
    tuples, with 1-based global agent indices matching nonzero adjacency
    entries of the agent's row.
    """

    follower_neighbors: tuple
    leader_neighbors: tuple


@dataclass(frozen=True)
class GainCheck:
    ok: bool
    slack: float
    issues: tuple[str, ...]


def coupling_signal(
    i: int,
    state: AgentState,
    view: NeighborView,
    gains: Gains,
    graph=None,
) -> Pose:
    """Neighborhood disagreement signal for agent i.

    Sums acceleration, velocity, and pose differences against follower
    neighbors (weighted 1, g1, g2) plus the same differences against leader
    neighbors, where the pose term uses the scaled leader pose while the
    derivative terms use the unscaled ones (they differ by a constant, so the
    derivatives coincide).

    Passing ``graph`` verifies the view against row i of the adjacency matrix
    and raises :class:`InconsistentViewError` on a mismatch; the integrator
    skips this check because it builds views from the graph itself.
    """
    if graph is not None:
        _check_view(i, view, graph)
    g1 = gains.g1
    g2 = gains.g2
    ex, ey, et = state.eta
    px, py, pt = state.phi
    rx, ry, rt = state.rho
    sx = sy = st = 0.0
    for _, nb in view.follower_neighbors:
        nex, ney, net = nb.eta
        npx, npy, npt = nb.phi
        nrx, nry, nrt = nb.rho
        sx += (rx - nrx) + g1 * (px - npx) + g2 * (ex - nex)
        sy += (ry - nry) + g1 * (py - npy) + g2 * (ey - ney)
        st += (rt - nrt) + g1 * (pt - npt) + g2 * (et - net)
    for _, pose_s, vel, acc in view.leader_neighbors:
        lsx, lsy, lst = pose_s
        lvx, lvy, lvt = vel
        lax, lay, lat = acc
        sx += (rx - lax) + g1 * (px - lvx) + g2 * (ex - lsx)
        sy += (ry - lay) + g1 * (py - lvy) + g2 * (ey - lsy)
        st += (rt - lat) + g1 * (pt - lvt) + g2 * (et - lst)
    return Pose(sx, sy, st)


def state_derivative(
    state: AgentState, s: Pose, gains: Gains, t: float
) -> tuple[Pose, Pose, Pose]:
    """Right-hand side of one agent's third-order generator dynamics.

    The acceleration derivative combines damping with plain and
    regularized-sign feedback on the coupling signal; the regularizer
    ``gamma1*exp(-gamma2*t)`` keeps the denominator positive for finite t,
    and the sign term's magnitude never exceeds g4.
    """
    sx, sy, st = s
    px, py, pt = state.phi
    rx, ry, rt = state.rho
    g1, g2, g3 = gains.g1, gains.g2, gains.g3
    reg = gains.gamma1 * math.exp(-gains.gamma2 * t)
    den = math.sqrt(sx * sx + sy * sy + st * st + reg * reg)
    drx = -g1 * px - g2 * rx - g3 * sx
    dry = -g1 * py - g2 * ry - g3 * sy
    drt = -g1 * pt - g2 * rt - g3 * st
    # At exact consensus with an underflowed regularizer the sign term has
    # limit zero, so the fixed point stays a fixed point.
    if den > 0.0:
        f = gains.g4 / den
        drx -= f * sx
        dry -= f * sy
        drt -= f * st
    return state.phi, state.rho, Pose(drx, dry, drt)


def validate_gains(gains: Gains, n: int, drive_bound: float) -> GainCheck:
    """Check gain positivity and the sign-gain lower bound n*drive_bound.

    The slack ``g4 - n*drive_bound`` is reported either way; a negative
    slack means the sign gain cannot dominate the leader-motion drive.
    """
    issues = []
    for name in ("g1", "g2", "g3", "g4", "gamma1", "gamma2"):
        if getattr(gains, name) <= 0.0:
            issues.append(f"gain {name} must be positive, got {getattr(gains, name)}")
    slack = gains.g4 - n * drive_bound
    if slack < 0.0:
        issues.append(
            "gain condition g4 >= n*driveBound violated: "
            f"g4={gains.g4}, n*driveBound={n * drive_bound}, slack={slack}"
        )
    return GainCheck(ok=not issues, slack=slack, issues=tuple(issues))


def _check_view(i: int, view: NeighborView, graph) -> None:
    row = graph.adjacency[i - 1]
    for j, _ in view.follower_neighbors:
        if j > graph.n or row[j - 1] == 0.0:
            raise InconsistentViewError(
                f"agent {i} view lists follower {j} which is not a neighbor"
            )
    for entry in view.leader_neighbors:
        j = entry[0]
        if j <= graph.n or j > graph.size or row[j - 1] == 0.0:
            raise InconsistentViewError(
                f"agent {i} view lists leader {j} which is not a neighbor"
            )
