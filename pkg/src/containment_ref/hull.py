"""Convex-hull geometry for the leader formation.

The followers converge into a scaled copy of the leader hull. These routines
build the hull of the leader offsets, dilate it about a center, and measure
the separation margins between the scaled and original hull boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

from .errors import DegenerateEdgeError, DegenerateFormationError, ZeroDistanceError

if TYPE_CHECKING:  # pragma: no cover
    from .leaders import LeaderModel

_DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon with counterclockwise vertex order."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polygon needs at least 3 planar vertices")
        nxt = np.roll(v, -1, axis=0)
        edges = nxt - v
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
            edges, -1, axis=0
        )[:, 0]
        if not np.all(cross > 0.0):
            raise ValueError("vertices must be in strictly convex CCW order")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def edges(self) -> list[tuple[np.ndarray, np.ndarray]]:
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]


class ThetaInterval(NamedTuple):
    lo: float
    hi: float


@dataclass(frozen=True)
class HullMargins:
    alpha_p: float
    alpha_theta: float


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_of_offsets(points) -> ConvexPolygon:
    """Convex hull (monotone chain) in CCW order, collinear points dropped.

    Inputs already in convex position come back complete; interior points
    are discarded. Fewer than three distinct non-collinear points raise
    :class:`DegenerateFormationError`.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) < 3:
        raise DegenerateFormationError("need at least 3 distinct offsets")
    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    verts = lower[:-1] + upper[:-1]
    if len(verts) < 3:
        raise DegenerateFormationError("offsets are collinear")
    return ConvexPolygon(np.array(verts))


def scale_polygon(poly: ConvexPolygon, center, mu: float) -> ConvexPolygon:
    """Dilate the polygon about ``center`` by factor ``mu``.

    Every vertex maps to ``center + mu*(v - center)``; the result is similar
    to the input with edge lengths scaled by ``mu``.
    """
    if not 0.0 < mu < 1.0:
        raise ValueError(f"scale factor mu must lie in (0, 1), got {mu}")
    c = np.asarray(center, dtype=float)
    return ConvexPolygon(c + mu * (poly.vertices - c))


def edge_distance(d_i, d_j, mu: float) -> float:
    """Distance between a formation edge line and its scaled counterpart.

    The edge through offsets ``d_i`` and ``d_j`` is parallel to the edge
    through ``mu*d_i`` and ``mu*d_j``; their separation is ``(1 - mu)`` times
    the distance from the origin to the original edge line:

        (1 - mu) * |d_jx*d_iy - d_ix*d_jy|
            / sqrt((d_jy - d_iy)**2 + (d_ix - d_jx)**2)

    Coincident offsets raise :class:`DegenerateEdgeError`. An edge line that
    passes through the origin raises :class:`ZeroDistanceError`, since strict
    enclosure of the origin then fails.
    """
    dix, diy = float(d_i[0]), float(d_i[1])
    djx, djy = float(d_j[0]), float(d_j[1])
    scale = max(1.0, abs(dix), abs(diy), abs(djx), abs(djy))
    den = math.hypot(djy - diy, dix - djx)
    if den <= _DEGENERATE_RTOL * scale:
        raise DegenerateEdgeError(f"offsets {d_i} and {d_j} coincide")
    num = abs(djx * diy - dix * djy)
    line_origin_dist = num / den
    if line_origin_dist <= _DEGENERATE_RTOL * scale:
        raise ZeroDistanceError(
            f"edge line through {d_i} and {d_j} passes through the origin"
        )
    return (1.0 - mu) * line_origin_dist


def margins(model: "LeaderModel") -> HullMargins:
    """Separation margins between the scaled and original formation hulls.

    The position margin is the minimum edge-line distance over consecutive
    offset pairs taken in CCW hull order (wrapping last to first). The
    heading margin is ``(1 - mu)`` times the smallest absolute heading
    offset; a zero heading offset legitimately makes it zero.
    """
    points = [(o.x, o.y) for o in model.offsets]
    poly = hull_of_offsets(points)
    if len(poly.vertices) != len(points):
        raise DegenerateFormationError(
            "offsets are not in convex position; some lie inside the hull"
        )
    verts = poly.vertices
    alpha_p = math.inf
    for i in range(len(verts)):
        j = (i + 1) % len(verts)
        alpha_p = min(alpha_p, edge_distance(verts[i], verts[j], model.mu))
    alpha_theta = (1.0 - model.mu) * min(abs(o.theta) for o in model.offsets)
    return HullMargins(alpha_p=alpha_p, alpha_theta=alpha_theta)


def contains_point(poly: ConvexPolygon, p, tol: float) -> bool:
    """Whether ``p`` lies inside the polygon or within ``tol`` of it.

    Signed-distance test against every edge; a negative ``tol`` demands the
    point sit strictly inside by at least ``|tol|``.
    """
    px, py = float(p[0]), float(p[1])
    v = poly.vertices
    for i in range(len(v)):
        ax, ay = v[i]
        bx, by = v[(i + 1) % len(v)]
        ex, ey = bx - ax, by - ay
        signed = (ex * (py - ay) - ey * (px - ax)) / math.hypot(ex, ey)
        if signed < -tol:
            return False
    return True


def theta_interval(model: "LeaderModel", t: float, scaled: bool) -> ThetaInterval:
    """Heading interval spanned by the (optionally scaled) leader poses."""
    center_theta = model.trajectory.derivatives(t).eta.theta
    s = model.mu if scaled else 1.0
    thetas = [o.theta for o in model.offsets]
    return ThetaInterval(
        lo=center_theta + s * min(thetas),
        hi=center_theta + s * max(thetas),
    )
