"""Skid-steer robot as a unicycle, plus wheel odometry and terrain disturbances it cannot see."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose2D, Twist


@dataclass(frozen=True)
class RobotSpec:
    length: float = 0.526
    width: float = 0.507
    gnss_offset: float = 0.45  # behind the front edge
    v_max: float = 1.0
    omega_max: float = 1.0

    def __post_init__(self) -> None:
        if self.length <= 0 or self.width <= 0:
            raise ValueError("robot dimensions must be positive")

    @property
    def front_offset(self) -> float:
        return self.length / 2

    @property
    def antenna_offset(self) -> float:
        """Signed forward offset of the GNSS antenna from the body centre."""
        return self.length / 2 - self.gnss_offset

    @property
    def gnss_ratio(self) -> float:
        return self.gnss_offset / self.length


@dataclass(frozen=True)
class OdometryModel:
    """Error model of the wheel odometry and of the terrain effects it misses.

    trans_std_per_m / rot_std_per_rad are the spread of a scale error drawn once
    per motion segment, so the error grows linearly with the distance or angle
    driven. trans_bias / rot_bias shift those scale errors.

    rot_drift_gain: metres of unobserved translation per radian of rotation per unit roughness.
    drift_pivot_only: apply that drift only while pivoting in place (v = 0); when False,
        any non-zero yaw rate drifts, including small steering corrections.
    rot_slip_std: unobserved heading slip while turning, rad per sqrt(rad) per unit roughness.
    yaw_walk_std: unobserved heading random walk while driving, rad per sqrt(m).
    """

    trans_std_per_m: float = 0.0
    rot_std_per_rad: float = 0.0
    rot_drift_gain: float = 0.0
    trans_bias: float = 0.0
    rot_bias: float = 0.0
    rot_slip_std: float = 0.0
    yaw_walk_std: float = 0.0
    drift_pivot_only: bool = True

    def __post_init__(self) -> None:
        for name in ("trans_std_per_m", "rot_std_per_rad", "rot_drift_gain", "rot_slip_std", "yaw_walk_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def is_noise_free(self) -> bool:
        return all(v == 0 for v in (self.trans_std_per_m, self.rot_std_per_rad, self.rot_drift_gain,
                                    self.trans_bias, self.rot_bias, self.rot_slip_std, self.yaw_walk_std))


def integrate(pose: Pose2D, v: float, omega: float, dt: float) -> Pose2D:
    """Exact constant-twist unicycle update."""
    th = pose.theta
    if abs(omega) < 1e-12:
        return Pose2D(pose.x + v * dt * math.cos(th), pose.y + v * dt * math.sin(th), th)
    th2 = th + omega * dt
    r = v / omega
    return Pose2D(pose.x + r * (math.sin(th2) - math.sin(th)), pose.y - r * (math.cos(th2) - math.cos(th)), th2)


def step_true(pose: Pose2D, cmd: Twist, dt: float, roughness: float, rng: np.random.Generator,
              model: OdometryModel) -> Pose2D:
    """Advance the true pose: commanded motion plus terrain disturbances.

    While rotating on rough ground the body is shoved sideways by a displacement of
    random direction whose signed magnitude has std rot_drift_gain*|omega|*dt*roughness
    (only for pivots, v = 0, unless model.drift_pivot_only is False).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    new = integrate(pose, cmd.v, cmd.omega, dt)
    dx = dy = dth = 0.0
    if cmd.omega != 0.0 and roughness > 0.0:
        if model.rot_drift_gain > 0.0 and (cmd.v == 0.0 or not model.drift_pivot_only):
            sigma = model.rot_drift_gain * abs(cmd.omega) * dt * roughness
            mag = rng.normal(0.0, sigma)
            ang = rng.uniform(-math.pi, math.pi)
            dx, dy = mag * math.cos(ang), mag * math.sin(ang)
        if model.rot_slip_std > 0.0:
            dth += rng.normal(0.0, model.rot_slip_std * roughness * math.sqrt(abs(cmd.omega) * dt))
    if cmd.v != 0.0 and model.yaw_walk_std > 0.0:
        dth += rng.normal(0.0, model.yaw_walk_std * math.sqrt(abs(cmd.v) * dt))
    if dx == dy == dth == 0.0:
        return new
    return Pose2D(new.x + dx, new.y + dy, new.theta + dth)


@dataclass(frozen=True)
class OdometryScales:
    trans: float = 1.0
    rot: float = 1.0


def step_odom(est: Pose2D, cmd: Twist, dt: float, scales: OdometryScales = OdometryScales()) -> Pose2D:
    """Dead-reckoned pose from the commanded wheel motion, seen through the odometry scale errors."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return integrate(est, cmd.v * scales.trans, cmd.omega * scales.rot, dt)


class WheelOdometry:
    """Odometry estimator whose scale errors are redrawn at the start of every motion segment."""

    def __init__(self, model: OdometryModel, rng: np.random.Generator, pose: Pose2D):
        self.model = model
        self.rng = rng
        self.pose = pose
        self.scales = OdometryScales()

    def begin_segment(self, z_trans: float | None = None, z_rot: float | None = None,
                      extra_rot_bias: float = 0.0) -> OdometryScales:
        """Draw the scale errors of a new segment; z_trans / z_rot fix the standard-normal draws."""
        m = self.model
        if z_trans is None and m.trans_std_per_m > 0:
            z_trans = self.rng.standard_normal()
        if z_rot is None and m.rot_std_per_rad > 0:
            z_rot = self.rng.standard_normal()
        trans = 1.0 + m.trans_bias + m.trans_std_per_m * (z_trans or 0.0)
        rot = 1.0 + m.rot_bias + extra_rot_bias + m.rot_std_per_rad * (z_rot or 0.0)
        self.scales = OdometryScales(trans, rot)
        return self.scales

    def step(self, cmd: Twist, dt: float) -> Pose2D:
        self.pose = step_odom(self.pose, cmd, dt, self.scales)
        return self.pose
