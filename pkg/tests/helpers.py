"""Shared test utilities: independent oracles and random-instance generators.

The oracles here deliberately avoid the library's own code paths: matrix
inversion goes through cofactor expansion, line distances through direct
point projection, and Kronecker expressions through literal np.kron.
"""
from __future__ import annotations

import math

import numpy as np

from containment_ref import (
    AgentState,
    InteractionGraph,
    NeighborView,
    Pose,
    build_graph,
)


def adjugate_inverse(a: np.ndarray) -> np.ndarray:
    """Inverse via cofactor expansion; independent of any factorization."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    det = _det_recursive(a)
    cof = np.empty_like(a)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(a, i, axis=0), j, axis=1)
            cof[i, j] = (-1.0) ** (i + j) * _det_recursive(minor)
    return cof.T / det


def _det_recursive(a: np.ndarray) -> float:
    n = a.shape[0]
    if n == 0:
        return 1.0
    if n == 1:
        return float(a[0, 0])
    if n == 2:
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(a[1:], j, axis=1)
        total += (-1.0) ** j * a[0, j] * _det_recursive(minor)
    return total


def point_to_line_distance(p, a, b) -> float:
    """Distance from point p to the infinite line through a and b."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    t = np.dot(p - a, d) / np.dot(d, d)
    foot = a + t * d
    return float(np.linalg.norm(p - foot))


def parallel_edge_distance_oracle(d_i, d_j, mu: float, samples: int = 7) -> float:
    """Min distance from sampled points of the scaled edge to the original line."""
    d_i = np.asarray(d_i, dtype=float)
    d_j = np.asarray(d_j, dtype=float)
    best = math.inf
    for k in range(samples):
        lam = k / (samples - 1)
        p = mu * ((1 - lam) * d_i + lam * d_j)
        best = min(best, point_to_line_distance(p, d_i, d_j))
    return best


def random_connected_graph(rng: np.random.Generator, n: int, m: int) -> InteractionGraph:
    """Random graph with a connected follower subgraph and >= 1 leader link."""
    edges = []
    order = rng.permutation(n) + 1
    for k in range(1, n):
        attach = order[rng.integers(0, k)]
        edges.append((int(order[k]), int(attach)))
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if rng.random() < 0.2:
                edges.append((i, j))
    nlinks = int(rng.integers(1, n * m + 1))
    for _ in range(nlinks):
        leader = int(rng.integers(n + 1, n + m + 1))
        follower = int(rng.integers(1, n + 1))
        edges.append((leader, follower))
    return build_graph(n, m, edges)


def random_formation_offsets(
    rng: np.random.Generator, m: int, with_zero_theta: bool = False
) -> tuple[Pose, ...]:
    """Offsets in convex position, strictly enclosing the origin.

    Heading offsets straddle zero; unless ``with_zero_theta`` they stay away
    from zero so the heading margin is positive.
    """
    from containment_ref import contains_point, hull_of_offsets

    while True:
        pts = rng.uniform(-3.0, 3.0, size=(m, 2))
        r = np.linalg.norm(pts, axis=1)
        if np.any(r < 0.8):
            continue
        try:
            poly = hull_of_offsets(pts)
        except Exception:
            continue
        if len(poly.vertices) != m:
            continue
        if not contains_point(poly, (0.0, 0.0), tol=-0.15):
            continue
        break
    thetas = rng.uniform(0.05, 0.5, size=m)
    signs = np.ones(m)
    signs[rng.integers(0, m)] = -1.0  # force the straddle
    thetas *= signs
    if with_zero_theta:
        thetas[rng.integers(0, m)] = 0.0
    # order Poses to match the sampled points (hull ordering happens downstream)
    return tuple(Pose(float(p[0]), float(p[1]), float(th)) for p, th in zip(pts, thetas))


def contains_mask(poly, pts: np.ndarray) -> np.ndarray:
    """Vectorized closed-membership test for an array of points."""
    v = poly.vertices
    nxt = np.roll(v, -1, axis=0)
    edges = nxt - v
    rel_x = pts[:, None, 0] - v[None, :, 0]
    rel_y = pts[:, None, 1] - v[None, :, 1]
    cross = edges[None, :, 0] * rel_y - edges[None, :, 1] * rel_x
    return np.all(cross >= 0.0, axis=1)


def sample_in_polygon(rng: np.random.Generator, poly, count: int) -> np.ndarray:
    """Uniform samples inside a convex polygon via fan triangulation."""
    v = poly.vertices
    a = np.repeat(v[0][None, :], len(v) - 2, axis=0)
    b = v[1:-1]
    c = v[2:]
    ab = b - a
    ac = c - a
    areas = np.abs(ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0]) / 2.0
    picks = rng.choice(len(areas), size=count, p=areas / areas.sum())
    u = rng.random(count)
    w = rng.random(count)
    flip = u + w > 1.0
    u[flip] = 1.0 - u[flip]
    w[flip] = 1.0 - w[flip]
    pa, pb, pc = a[picks], b[picks], c[picks]
    return pa + u[:, None] * (pb - pa) + w[:, None] * (pc - pa)


def sample_outside_polygon(
    rng: np.random.Generator, poly, count: int, band: float = 3.0
) -> np.ndarray:
    """Points strictly outside the polygon, within a box band around it."""
    v = poly.vertices
    lo = v.min(axis=0) - band
    hi = v.max(axis=0) + band
    chunks = []
    have = 0
    while have < count:
        cand = rng.uniform(lo, hi, size=(2 * count, 2))
        keep = cand[~contains_mask(poly, cand)]
        chunks.append(keep)
        have += len(keep)
    return np.concatenate(chunks)[:count]


def random_states(rng: np.random.Generator, n: int, scale: float = 2.0) -> list[AgentState]:
    vals = rng.uniform(-scale, scale, size=(n, 9))
    return [
        AgentState(Pose(*row[0:3]), Pose(*row[3:6]), Pose(*row[6:9])) for row in vals
    ]


def views_from_full_state(graph, states, leader_signals):
    """Test harness: build every agent's view from the full system state.

    ``leader_signals`` maps local leader index (0-based) to a tuple of
    (scaled_pose, velocity, acceleration).
    """
    views = []
    for i in range(1, graph.n + 1):
        followers = tuple((j, states[j - 1]) for j in graph.follower_neighbors(i))
        leaders = tuple(
            (j, *leader_signals[j - graph.n - 1]) for j in graph.leader_neighbors(i)
        )
        views.append(NeighborView(followers, leaders))
    return views
