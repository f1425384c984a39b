"""Centralized verification quantities for a containment run.

Everything here evaluates stacked whole-system expressions with dense linear
algebra, independently of the per-agent scalar path in :mod:`observer`. That
independence is the point: the distributed implementation is checked against
these centralized forms, so the two sides must never share code.

Kronecker products with the 3x3 identity are applied blockwise; tests that
want a literal Kronecker matrix build their own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import LaplacianPartition
from .leaders import LeaderModel
from .observer import Gains

# Relative window for treating the two envelope decay rates as equal.
_RATE_EQ_RTOL = 1e-9


@dataclass(frozen=True)
class DiagnosticsFrame:
    """Per-frame verification data attached to a simulation run."""

    t: float
    containment_err: np.ndarray
    containment_err_rate: np.ndarray
    filtered_err: np.ndarray
    coupling: np.ndarray
    lyapunov: float
    envelope: float


def _leader_stacks(model: LeaderModel, t: float):
    """Scaled leader poses and shared derivatives as (m, 3) arrays."""
    der = model.trajectory.derivatives(t)
    offs = np.array([[o.x, o.y, o.theta] for o in model.offsets])
    center = np.array(der.eta)
    h = center + model.mu * offs
    m = len(offs)
    hd = np.tile(np.array(der.d1), (m, 1))
    hdd = np.tile(np.array(der.d2), (m, 1))
    hddd = np.tile(np.array(der.d3), (m, 1))
    return h, hd, hdd, hddd


def limit_target(
    partition: LaplacianPartition, model: LeaderModel, t: float
) -> np.ndarray:
    """Stacked limit poses: projection weights applied to scaled leaders.

    Each follower's 3-block is a convex combination of the scaled leader
    poses, so every limit sits inside the scaled hull.
    """
    h, _, _, _ = _leader_stacks(model, t)
    return (partition.projection @ h).ravel()


def containment_error(
    eta: np.ndarray, partition: LaplacianPartition, model: LeaderModel, t: float
) -> np.ndarray:
    """Stacked follower poses minus their limit targets."""
    return np.asarray(eta, dtype=float).ravel() - limit_target(partition, model, t)


def containment_error_rate(
    phi: np.ndarray, partition: LaplacianPartition, model: LeaderModel, t: float
) -> np.ndarray:
    """Time derivative of the containment error, evaluated analytically."""
    _, hd, _, _ = _leader_stacks(model, t)
    return np.asarray(phi, dtype=float).ravel() - (partition.projection @ hd).ravel()


def filtered_error(
    eta: np.ndarray,
    phi: np.ndarray,
    rho: np.ndarray,
    partition: LaplacianPartition,
    model: LeaderModel,
    gains: Gains,
    t: float,
) -> np.ndarray:
    """Second-order filtered containment error.

    Equals err'' + g1*err' + g2*err, expanded so it needs only the current
    states and leader derivatives. Its decay forces the containment error to
    decay.
    """
    h, hd, hdd, _ = _leader_stacks(model, t)
    p = partition.projection
    acc_term = np.asarray(rho, dtype=float).ravel() - (p @ hdd).ravel()
    vel_term = np.asarray(phi, dtype=float).ravel() - (p @ hd).ravel()
    pos_term = np.asarray(eta, dtype=float).ravel() - (p @ h).ravel()
    return acc_term + gains.g1 * vel_term + gains.g2 * pos_term


def stacked_coupling(
    eta: np.ndarray,
    phi: np.ndarray,
    rho: np.ndarray,
    partition: LaplacianPartition,
    model: LeaderModel,
    gains: Gains,
    t: float,
) -> np.ndarray:
    """Centralized form of all coupling signals at once.

    Follower block of the Laplacian applied to the gain-weighted state stack
    plus the leader block applied to the gain-weighted leader stack. Used as
    an independent oracle for the per-agent signals.
    """
    h, hd, hdd, _ = _leader_stacks(model, t)
    x = (
        np.asarray(rho, dtype=float)
        + gains.g1 * np.asarray(phi, dtype=float)
        + gains.g2 * np.asarray(eta, dtype=float)
    )
    y = hdd + gains.g1 * hd + gains.g2 * h
    return (partition.l1 @ x).ravel() + (partition.l2 @ y).ravel()


def lyapunov_value(filtered: np.ndarray, partition: LaplacianPartition) -> float:
    """Quadratic decay certificate: 0.5 * S^T (L1 (x) I3) S, blockwise."""
    s = np.asarray(filtered, dtype=float).reshape(-1, 3)
    return 0.5 * float(np.sum(s * (partition.l1 @ s)))


def decay_rate(partition: LaplacianPartition, g3: float) -> float:
    """Certified exponential rate: 2*g3*min_eig**2 / max_eig."""
    return 2.0 * g3 * partition.min_eig**2 / partition.max_eig


def decay_envelope(
    v1_0: float,
    t: float,
    gains: Gains,
    partition: LaplacianPartition,
    n: int,
    drive_bound: float,
) -> float:
    """Comparison-principle bound on the Lyapunov value at time t.

    The homogeneous part decays at :func:`decay_rate`; leader motion adds a
    forced term whose shape depends on whether that rate coincides with the
    regularizer rate gamma2. The two branches agree in the limit where the
    rates approach each other.
    """
    lam = decay_rate(partition, gains.g3)
    gamma2 = gains.gamma2
    forcing = n * n * gains.gamma1 * drive_bound
    if abs(lam - gamma2) <= _RATE_EQ_RTOL * max(lam, gamma2):
        return math.exp(-lam * t) * v1_0 + forcing * t * math.exp(-lam * t)
    return math.exp(-lam * t) * v1_0 + forcing * (
        math.exp(-lam * t) - math.exp(-gamma2 * t)
    ) / (gamma2 - lam)


def fit_decay_rate(times, values) -> float:
    """Least-squares slope of log(values) against time.

    A negative slope certifies exponential decay of the series. Requires at
    least 10 samples, all strictly positive.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-D arrays of equal length")
    if len(t) < 10:
        raise ValueError(f"need at least 10 samples, got {len(t)}")
    if np.any(v <= 0.0):
        raise ValueError("all values must be strictly positive for a log fit")
    slope, _ = np.polyfit(t, np.log(v), 1)
    return float(slope)
