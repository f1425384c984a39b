"""Planar pose values: position plus heading.

A :class:`Pose` doubles as a generic 3-vector in pose space, so leader
offsets and time derivatives of trajectories reuse the same type.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class Pose(NamedTuple):
    x: float
    y: float
    theta: float

    def __add__(self, other: "Pose") -> "Pose":  # type: ignore[override]
        return Pose(self.x + other.x, self.y + other.y, self.theta + other.theta)

    def __sub__(self, other: "Pose") -> "Pose":
        return Pose(self.x - other.x, self.y - other.y, self.theta - other.theta)

    def scaled(self, k: float) -> "Pose":
        return Pose(k * self.x, k * self.y, k * self.theta)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.theta * self.theta)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    @staticmethod
    def from_array(a) -> "Pose":
        return Pose(float(a[0]), float(a[1]), float(a[2]))


ZERO_POSE = Pose(0.0, 0.0, 0.0)
