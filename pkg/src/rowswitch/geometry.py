"""Planar pose/velocity types and small vector helpers shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped == -math.pi:
        return math.pi
    return wrapped


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def heading(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta)])

    @property
    def left(self) -> np.ndarray:
        return np.array([-math.sin(self.theta), math.cos(self.theta)])

    def to_world(self, bx: float, by: float) -> np.ndarray:
        """Body-frame point (x forward, y left) to world coordinates."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([self.x + c * bx - s * by, self.y + s * bx + c * by])

    def to_body(self, points: np.ndarray) -> np.ndarray:
        """World points (N, 2) into the body frame."""
        pts = np.atleast_2d(np.asarray(points, dtype=float)) - self.position
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.column_stack([c * pts[:, 0] + s * pts[:, 1], -s * pts[:, 0] + c * pts[:, 1]])

    def offset(self, forward: float, lateral: float = 0.0, dtheta: float = 0.0) -> "Pose2D":
        p = self.to_world(forward, lateral)
        return Pose2D(float(p[0]), float(p[1]), self.theta + dtheta)


@dataclass(frozen=True)
class Twist:
    v: float = 0.0
    omega: float = 0.0

    def clipped(self, v_max: float, omega_max: float) -> "Twist":
        return Twist(float(np.clip(self.v, -v_max, v_max)), float(np.clip(self.omega, -omega_max, omega_max)))


def unit(v: np.ndarray) -> np.ndarray:
    n = float(np.hypot(v[0], v[1]))
    if n == 0.0:
        raise ValueError("zero-length vector has no direction")
    return np.asarray(v, dtype=float) / n


def signed_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Angle that rotates vector a onto vector b, CCW positive, in (-pi, pi]."""
    return wrap_angle(math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]))


def point_line_distance(p: np.ndarray, point: np.ndarray, direction: np.ndarray) -> float:
    """Signed distance of p from the line; positive to the left of direction."""
    d = np.asarray(p, dtype=float) - point
    return float(direction[0] * d[1] - direction[1] * d[0])


def line_intersection(p1, d1, p2, d2) -> np.ndarray | None:
    """Intersection of two parametric lines, None when parallel."""
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(denom) < 1e-12:
        return None
    diff = np.asarray(p2, dtype=float) - np.asarray(p1, dtype=float)
    t = (diff[0] * d2[1] - diff[1] * d2[0]) / denom
    return np.asarray(p1, dtype=float) + t * np.asarray(d1, dtype=float)
