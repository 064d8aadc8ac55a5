"""Geometric stand-in for the in-row navigation framework.

Skeleton pixels are back-projected onto the ground, straight rows are found with
a Hough vote over (angle, offset), one row is tracked across frames using the
odometry pose for prediction, and a proportional law steers onto it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose2D, wrap_angle
from .sensor import CameraModel, ground_table


@dataclass(frozen=True)
class RowEstimate:
    """A row line in the body frame.

    psi: direction of the row relative to the robot heading (rad, positive = row bends left).
    rho: signed perpendicular offset of the line from the body origin (m, positive = line to the left).
    """

    psi: float
    rho: float
    support: int = 0

    def to_world(self, pose: Pose2D) -> tuple[np.ndarray, np.ndarray]:
        n = np.array([-math.sin(self.psi), math.cos(self.psi)])
        p = pose.to_world(*(self.rho * n))
        th = pose.theta + self.psi
        return p, np.array([math.cos(th), math.sin(th)])

    @classmethod
    def from_world(cls, point, direction, pose: Pose2D, support: int = 0) -> "RowEstimate":
        psi = wrap_angle(math.atan2(direction[1], direction[0]) - pose.theta)
        if abs(psi) > math.pi / 2:
            psi = wrap_angle(psi + math.pi)
        p = pose.to_body(np.asarray(point, dtype=float)[None, :])[0]
        rho = -math.sin(psi) * p[0] + math.cos(psi) * p[1]
        return cls(psi, rho, support)


@dataclass(frozen=True)
class FollowerGains:
    k_psi: float = 4.0
    k_rho: float = 4.0  # k_psi**2 = 4 k_rho gives a critically damped approach, 0.5 m time constant

    def omega(self, est: RowEstimate, v: float, omega_max: float) -> float:
        w = v * (self.k_psi * est.psi + self.k_rho * est.rho)
        return float(np.clip(w, -omega_max, omega_max))


def ground_points(mask: np.ndarray, cam: CameraModel, max_forward: float = 3.5) -> np.ndarray:
    """Body-frame ground coordinates (N, 2) of all mask pixels."""
    table = ground_table(cam)
    sel = (mask > 0) & table.valid
    pts = np.column_stack([table.gx[sel], table.gy[sel]])
    return pts[pts[:, 0] <= max_forward]


def hough_rows(points: np.ndarray, *, max_angle: float = math.radians(40), angle_step: float = math.radians(1.0),
               rho_step: float = 0.02, rho_max: float = 2.0, min_votes: int = 20, max_lines: int = 6,
               inlier_tol: float = 0.04, min_coverage: float = 0.6) -> list[RowEstimate]:
    """Straight-row candidates, strongest first, each refined by a total least-squares fit of its inliers.

    A candidate must be backed by inliers covering at least `min_coverage` of
    its length in 0.1 m bins; lines that merely cut across several rows are
    supported only at the crossings and fail this test.
    """
    if len(points) < min_votes:
        return []
    psis = np.arange(-max_angle, max_angle + 1e-9, angle_step)
    nb = int(round(2 * rho_max / rho_step)) + 1
    rho = -np.outer(np.sin(psis), points[:, 0]) + np.outer(np.cos(psis), points[:, 1])
    bins = np.rint((rho + rho_max) / rho_step).astype(np.int64)
    ok = (bins >= 0) & (bins < nb)
    flat = (np.arange(len(psis))[:, None] * nb + bins)[ok]
    acc = np.bincount(flat, minlength=len(psis) * nb).reshape(len(psis), nb)

    out: list[RowEstimate] = []
    da, dr = int(round(math.radians(10) / angle_step)), int(round(0.1 / rho_step))
    for _ in range(max_lines):
        ai, bi = np.unravel_index(int(np.argmax(acc)), acc.shape)
        if acc[ai, bi] < min_votes:
            break
        acc[max(ai - da, 0): ai + da + 1, max(bi - dr, 0): bi + dr + 1] = 0
        est = _refine(points, psis[ai], bi * rho_step - rho_max, inlier_tol)
        if est is not None:
            est = _refine(points, est.psi, est.rho, inlier_tol, min_coverage)
        if est is not None and est.support >= min_votes:
            if all(abs(est.rho - o.rho) > 0.1 or abs(est.psi - o.psi) > math.radians(10) for o in out):
                out.append(est)
    return out


def _refine(points: np.ndarray, psi: float, rho: float, tol: float, min_coverage: float = 0.0) -> RowEstimate | None:
    n = np.array([-math.sin(psi), math.cos(psi)])
    inl = points[np.abs(points @ n - rho) <= tol]
    if len(inl) < 2:
        return None
    if min_coverage > 0:
        along = inl @ np.array([math.cos(psi), math.sin(psi)])
        cells = np.unique(np.floor(along / 0.1))
        if len(cells) < min_coverage * (cells[-1] - cells[0] + 1):
            return None
    c = inl.mean(axis=0)
    _, _, vt = np.linalg.svd(inl - c, full_matrices=False)
    d = vt[0] if vt[0][0] >= 0 else -vt[0]
    psi2 = math.atan2(d[1], d[0])
    rho2 = float(-math.sin(psi2) * c[0] + math.cos(psi2) * c[1])
    return RowEstimate(psi2, rho2, len(inl))


class RowTracker:
    """Keeps hold of one row across frames.

    The tracked line is stored in the odometry frame, so between frames it is
    predicted from dead reckoning alone; a new candidate is accepted only if it is
    close to that prediction.
    """

    def __init__(self, gate_rho: float = 0.15, gate_psi: float = math.radians(15)):
        self.gate_rho = gate_rho
        self.gate_psi = gate_psi
        self._line: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def locked(self) -> bool:
        return self._line is not None

    def reset(self) -> None:
        self._line = None

    def predict(self, odom: Pose2D) -> RowEstimate | None:
        if self._line is None:
            return None
        return RowEstimate.from_world(*self._line, odom)

    def acquire(self, candidates: list[RowEstimate], odom: Pose2D, max_rho: float | None = None) -> RowEstimate | None:
        """Lock onto the candidate nearest to the body origin."""
        pool = [c for c in candidates if max_rho is None or abs(c.rho) <= max_rho]
        if not pool:
            return None
        best = min(pool, key=lambda c: abs(c.rho))
        self._line = best.to_world(odom)
        return best

    def update(self, candidates: list[RowEstimate], odom: Pose2D) -> RowEstimate | None:
        """Measured estimate of the tracked row, or None when no candidate passes the gate."""
        pred = self.predict(odom)
        if pred is None:
            raise RuntimeError("tracker has no row; call acquire first")
        ok = [c for c in candidates if abs(c.rho - pred.rho) <= self.gate_rho and abs(c.psi - pred.psi) <= self.gate_psi]
        if not ok:
            return None
        best = min(ok, key=lambda c: abs(c.rho - pred.rho) / self.gate_rho + abs(c.psi - pred.psi) / self.gate_psi)
        self._line = best.to_world(odom)
        return best
