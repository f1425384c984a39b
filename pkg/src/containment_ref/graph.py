"""Interaction graph between follower and leader agents.

Agents are numbered 1..n+m: followers first, then leaders. The follower
subgraph is undirected with 0/1 weights; leader links point one way into a
follower's row, so the leader rows of the adjacency matrix (and hence of the
Laplacian) are identically zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import LeaderReceivesEdgeError, SelfLoopError, SingularFollowerBlockError

# Scale-relative positive-definiteness test for the follower block.
SINGULAR_EIG_RTOL = 1e-10


@dataclass(frozen=True)
class InteractionGraph:
    """Fixed interaction topology for n followers and m leaders."""

    n: int
    m: int
    adjacency: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("need at least one follower and one leader")
        a = np.asarray(self.adjacency, dtype=float)
        size = self.n + self.m
        if a.shape != (size, size):
            raise ValueError(f"adjacency must be {size}x{size}, got {a.shape}")
        if np.any(np.diag(a) != 0.0):
            raise ValueError("self interaction is not allowed")
        ff = a[: self.n, : self.n]
        if not np.array_equal(ff, ff.T):
            raise ValueError("follower subgraph must be undirected")
        if np.any(a[self.n :, :] != 0.0):
            raise ValueError("leader rows must be zero; leaders receive nothing")
        if not np.all(np.isin(a, (0.0, 1.0))):
            raise ValueError("weights are restricted to {0, 1}")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @property
    def size(self) -> int:
        return self.n + self.m

    def follower_neighbors(self, i: int) -> tuple[int, ...]:
        """Follower neighbors of follower i (1-based indices)."""
        row = self.adjacency[i - 1, : self.n]
        return tuple(int(j) + 1 for j in np.flatnonzero(row))

    def leader_neighbors(self, i: int) -> tuple[int, ...]:
        """Leader neighbors of follower i (1-based global indices)."""
        row = self.adjacency[i - 1, self.n :]
        return tuple(int(j) + self.n + 1 for j in np.flatnonzero(row))


@dataclass(frozen=True)
class LaplacianPartition:
    """Follower/leader blocks of the Laplacian and derived quantities.

    ``projection`` maps stacked leader data onto follower limit weights; its
    rows are non-negative and sum to one whenever the follower block is
    positive definite.
    """

    l1: np.ndarray
    l2: np.ndarray
    min_eig: float
    max_eig: float
    projection: np.ndarray

    def __post_init__(self):
        for name in ("l1", "l2", "projection"):
            a = np.asarray(getattr(self, name), dtype=float).copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)


class ConnectivityReport(NamedTuple):
    connected_followers: bool
    every_follower_reaches_leader: bool

    @property
    def ok(self) -> bool:
        return self.connected_followers and self.every_follower_reaches_leader


def build_graph(n: int, m: int, edges) -> InteractionGraph:
    """Build the interaction graph from 1-based (source, receiver) pairs.

    Follower-follower edges are stored symmetrically regardless of listed
    order. A leader source puts weight only in the follower's row. Any edge
    whose receiver is a leader is rejected.
    """
    size = n + m
    a = np.zeros((size, size))
    for edge in edges:
        i, j = int(edge[0]), int(edge[1])
        if not (1 <= i <= size and 1 <= j <= size):
            raise IndexError(f"edge ({i}, {j}) out of range for {size} agents")
        if i == j:
            raise SelfLoopError(f"edge ({i}, {j}): self interaction is not allowed")
        if j > n:
            raise LeaderReceivesEdgeError(
                f"edge ({i}, {j}): receiver {j} is a leader and accepts no input"
            )
        if i <= n:
            a[i - 1, j - 1] = 1.0
            a[j - 1, i - 1] = 1.0
        else:
            a[j - 1, i - 1] = 1.0
    return InteractionGraph(n=n, m=m, adjacency=a)


def laplacian(g: InteractionGraph) -> np.ndarray:
    """Graph Laplacian: row sums on the diagonal, negated weights elsewhere."""
    a = g.adjacency
    return np.diag(a.sum(axis=1)) - a


def partition(g: InteractionGraph) -> LaplacianPartition:
    """Split the Laplacian into follower/leader blocks and derived data.

    The projection is computed by simultaneous SPD linear solves, never via
    an explicit inverse. Raises :class:`SingularFollowerBlockError` when the
    follower block fails a scale-relative positive-definiteness test, which
    signals a connectivity violation.
    """
    lap = laplacian(g)
    l1 = lap[: g.n, : g.n]
    l2 = lap[: g.n, g.n :]
    eigs = np.linalg.eigvalsh(l1)
    min_eig = float(eigs[0])
    max_eig = float(eigs[-1])
    if min_eig <= SINGULAR_EIG_RTOL * max(1.0, max_eig):
        raise SingularFollowerBlockError(
            f"follower Laplacian block is singular (min eig {min_eig:.3e}); "
            "check follower connectivity and leader links"
        )
    factor = cho_factor(l1)
    proj = cho_solve(factor, -l2)
    return LaplacianPartition(
        l1=l1, l2=l2, min_eig=min_eig, max_eig=max_eig, projection=proj
    )


def check_connectivity(g: InteractionGraph) -> ConnectivityReport:
    """Report follower-subgraph connectivity and leader reachability.

    Both facts come from traversal of the follower subgraph: a follower
    reaches a leader when some follower in its component has a leader link.
    """
    n = g.n
    comp = np.full(n, -1, dtype=int)
    ncomp = 0
    for start in range(n):
        if comp[start] >= 0:
            continue
        stack = [start]
        comp[start] = ncomp
        while stack:
            v = stack.pop()
            for w in np.flatnonzero(g.adjacency[v, :n]):
                if comp[w] < 0:
                    comp[w] = ncomp
                    stack.append(int(w))
        ncomp += 1
    connected = ncomp == 1
    has_leader_link = g.adjacency[:n, n:].sum(axis=1) > 0
    comp_reaches = np.zeros(ncomp, dtype=bool)
    for v in range(n):
        if has_leader_link[v]:
            comp_reaches[comp[v]] = True
    reaches = bool(comp_reaches.all())
    return ConnectivityReport(connected, reaches)
