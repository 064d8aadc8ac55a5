"""The seven-state row-switching controller and the per-trial simulation driver.

States follow InRow -> A -> B -> C -> D -> E -> F -> G, or drop to Failed:

    A  EOR close ahead: re-entry point detected, reference scene captured
    B  front edge at the EOR (similarity score below threshold)
    C  one robot length further, clear of the row
    D  after the first 90 degree rotation
    E  after driving d_r along the headland
    F  after the second rotation, facing the next row
    G  centre back across the EOR inside the next row

Between states the robot runs open loop on wheel odometry; only InRow and F->G
steer from vision. The full true trajectory is logged at the GNSS antenna.
"""

from __future__ import annotations

import bisect
import csv
import io
import math
from dataclasses import asdict, dataclass, field as dc_field, replace
from enum import Enum
from typing import Callable

import numpy as np

from .field import FieldSpec, inter_row_distance
from .follower import FollowerGains, RowEstimate, RowTracker, ground_points, hough_rows
from .geometry import Pose2D, Twist, wrap_angle
from .profiles import NoiseProfile
from .reentry import LEFT, RIGHT, ReentryResult, locate_reentry
from .robot import RobotSpec, WheelOdometry, step_true
from .sensor import CameraModel, FootprintScorer, StateError, detect_eor, eor_ground_point, render


class SwitchState(str, Enum):
    IN_ROW = "InRow"
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"
    G = "G"
    FAILED = "Failed"


ORDER = [SwitchState.IN_ROW, SwitchState.A, SwitchState.B, SwitchState.C, SwitchState.D,
         SwitchState.E, SwitchState.F, SwitchState.G]

FAILURE_REASONS = ("lost_row", "eor_not_found", "eor_lost_at_a", "eor_stop_timeout", "no_dr",
                   "no_row_in_view", "no_entry", "same_row", "skip_row")

# per-trial standard-normal draws, in the order they are taken from the trial rng
DRAW_CHANNELS = ("eor", "dr", "heading_a", "trans_bc", "rot_cd", "trans_de", "rot_ef")


class TransitionError(RuntimeError):
    pass


@dataclass(frozen=True)
class TransitionRecord:
    source: str
    target: str
    commanded: float
    achieved_true: float
    achieved_odom: float
    error: float
    unit: str  # "m" or "rad"


@dataclass
class SwitchContext:
    turn: str
    L_R: float
    state: SwitchState = SwitchState.IN_ROW
    d_r: float | None = None
    reference: object | None = None
    reentry: ReentryResult | None = None
    failure: str | None = None
    anchors: dict[str, Pose2D] = dc_field(default_factory=dict)  # true body-centre pose on entering each state
    odom_anchors: dict[str, Pose2D] = dc_field(default_factory=dict)

    def advance(self, new: SwitchState) -> None:
        if self.state == SwitchState.FAILED:
            raise TransitionError("Failed is absorbing")
        if new == SwitchState.FAILED:
            self.state = new
            return
        if ORDER.index(new) != ORDER.index(self.state) + 1:
            raise TransitionError(f"illegal transition {self.state.value} -> {new.value}")
        self.state = new

    def fail(self, reason: str) -> None:
        self.failure = reason
        self.advance(SwitchState.FAILED)


@dataclass(frozen=True)
class ControlConfig:
    dt: float = 0.05
    v_in_row: float = 0.4
    v_switch: float = 0.3
    omega: float = 0.5
    omega_max: float = 0.5
    gains: FollowerGains = FollowerGains()
    trigger_range: float = 1.5  # detected EOR distance ahead of the camera that declares state A
    eor_lateral_tol: float = 0.15
    lost_after: float = 1.0
    max_ab_travel: float = 3.0
    max_in_row_travel: float = 12.0
    threshold: float = 0.3
    eval_depth: float = 2.0  # F->G outcome is judged once the centre is this far inside the row
    max_entry_travel: float = 6.0
    vision_every: int = 1
    log_every: int = 1  # trajectory sample every N control steps; anchors are always logged
    omega_slew: float = 0.15  # follower yaw-rate change limit (rad/s^2)

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.v_in_row <= 0 or self.v_switch <= 0 or self.omega <= 0:
            raise ValueError("dt, speeds and turn rate must be positive")
        if self.vision_every < 1 or self.log_every < 1:
            raise ValueError("vision_every and log_every must be >= 1")


@dataclass(frozen=True)
class TrialConfig:
    row: int
    turn: str
    seed: int = 0
    start_distance: float = 3.0  # body centre before the EOR at the start
    start_offset: float = 0.0  # lateral offset toward higher row indices (m)
    start_heading: float = 0.0  # deg, relative to the row direction
    inject_heading_at_a: float = 0.0  # deg, added to the true heading when A is declared
    perfect_dr: bool = False  # replace the detected d_r by the true inter-row distance
    stop_after: str | None = None  # state label to stop at (e.g. "A")
    draws: dict[str, float] | None = None  # fixed standard-normal draws per channel (batch stratification)

    @property
    def target_row(self) -> int:
        return self.row - 1 if self.turn == LEFT else self.row + 1


@dataclass
class TrialResult:
    config: TrialConfig
    outcome: str  # "Success" or a failure reason
    final_state: str
    records: list[TransitionRecord]
    trajectory: list[tuple[float, float, float, float, str]]
    anchor_index: dict[str, int]
    anchor_poses: dict[str, tuple[float, float, float]]
    d_r: float | None = None  # value used for D->E
    d_r_detected: float | None = None  # raw detector output
    inter_row_true: float | None = None
    reentry: dict | None = None

    @property
    def success(self) -> bool:
        return self.outcome == "Success"

    def record(self, source: str) -> TransitionRecord | None:
        return next((r for r in self.records if r.source == source), None)

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "theta", "state"])
        for t, x, y, th, s in self.trajectory:
            w.writerow([f"{t:.3f}", f"{x:.9f}", f"{y:.9f}", f"{th:.9f}", s])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "row": self.config.row,
            "turn": self.config.turn,
            "seed": self.config.seed,
            "target_row": self.config.target_row,
            "outcome": self.outcome,
            "final_state": self.final_state,
            "d_r": self.d_r,
            "d_r_detected": self.d_r_detected,
            "inter_row_true": self.inter_row_true,
            "records": [asdict(r) for r in self.records],
            "anchor_index": self.anchor_index,
        }


class Simulation:
    """True robot, wheel odometry, camera and the trajectory log of one run."""

    def __init__(self, field: FieldSpec, robot: RobotSpec, cam: CameraModel, profile: NoiseProfile,
                 control: ControlConfig, rng: np.random.Generator, pose: Pose2D):
        self.field = field
        self.robot = robot
        self.cam = cam
        self.profile = profile
        self.control = control
        self.rng = rng
        self.true = pose
        self.odom = WheelOdometry(profile.odometry, rng, pose)
        self.t = 0.0
        self.label = SwitchState.IN_ROW.value
        self.trajectory: list[tuple[float, float, float, float, str]] = []
        self.anchor_index: dict[str, int] = {}
        self.draws: dict[str, float] = {}
        self._times: list[float] = []
        self._poses: list[Pose2D] = []
        self._steps = 0
        self._remember()
        self._log()

    def _remember(self) -> None:
        self._times.append(self.t)
        self._poses.append(self.true)

    def _log(self) -> None:
        p = self.true
        ax, ay = p.to_world(self.robot.antenna_offset, 0.0)
        self.trajectory.append((self.t, float(ax), float(ay), p.theta, self.label))

    def enter(self, state: SwitchState) -> None:
        """Label the current pose as the anchor of `state` and log it."""
        self.label = state.value
        if state.value not in self.anchor_index:
            self.anchor_index[state.value] = len(self.trajectory)
        self._log()

    def step(self, v: float, omega: float, dt: float | None = None) -> None:
        dt = self.control.dt if dt is None else dt
        if dt <= 0:
            return
        cmd = Twist(v, omega)
        rough = self.field.roughness_at(*self.true.position)
        self.true = step_true(self.true, cmd, dt, rough, self.rng, self.profile.odometry)
        self.odom.step(cmd, dt)
        self.t += dt
        self._steps += 1
        self._remember()
        if self._steps % self.control.log_every == 0:
            self._log()

    def perturb_heading(self, dtheta: float) -> None:
        """Rotate the true pose in place, unseen by odometry; the current log sample is rewritten."""
        p = self.true
        self.true = Pose2D(p.x, p.y, p.theta + dtheta)
        self._poses[-1] = self.true
        t, _, _, _, label = self.trajectory[-1]
        if t == self.t:
            ax, ay = self.true.to_world(self.robot.antenna_offset, 0.0)
            self.trajectory[-1] = (t, float(ax), float(ay), self.true.theta, label)

    def pose_at(self, t: float) -> Pose2D:
        """True pose at the latest logged time not after t."""
        i = bisect.bisect_right(self._times, t + 1e-12) - 1
        return self._poses[max(i, 0)]

    def observe(self) -> tuple[np.ndarray, np.ndarray]:
        noise = self.profile.perception.mask_noise
        return render(self.field, self.true, self.cam, mask_noise=noise, rng=self.rng if noise > 0 else None)

    def front_point(self, pose: Pose2D | None = None) -> np.ndarray:
        return (pose or self.true).to_world(self.robot.front_offset, 0.0)


def _turn_sign(turn: str) -> int:
    if turn not in (LEFT, RIGHT):
        raise ValueError(f"turn must be 'left' or 'right', got {turn!r}")
    return 1 if turn == LEFT else -1


def _see_rows(sim: Simulation) -> tuple[list[RowEstimate], np.ndarray]:
    mask, _ = sim.observe()
    return hough_rows(ground_points(mask, sim.cam)), mask


# -- in-row ---------------------------------------------------------------

def run_in_row(sim: Simulation, ctx: SwitchContext) -> None:
    """Follow the current row until the EOR is detected within the trigger range, then enter A."""
    c = sim.control
    tracker = RowTracker()
    half = sim.field.nominal_inter_row / 2
    travel = last_seen = 0.0
    est: RowEstimate | None = None
    k = 0
    omega = 0.0
    while True:
        measured = False
        if k % c.vision_every == 0:
            cands, mask = _see_rows(sim)
            if tracker.locked:
                est = tracker.update(cands, sim.odom.pose)
            else:
                est = tracker.acquire(cands, sim.odom.pose, max_rho=half)
            measured = est is not None
            if measured:
                last_seen = travel
                if _eor_trigger(sim, mask, est):
                    sim.enter(SwitchState.A)
                    ctx.advance(SwitchState.A)
                    return
        if not measured:
            est = tracker.predict(sim.odom.pose)
        if travel - last_seen > c.lost_after:
            ctx.fail("lost_row")
            return
        if travel > c.max_in_row_travel:
            ctx.fail("eor_not_found")
            return
        target = c.gains.omega(est, c.v_in_row, c.omega_max) if est is not None else 0.0
        omega = _slew(omega, target, c)
        sim.step(c.v_in_row, omega)
        travel += c.v_in_row * c.dt
        k += 1


def _slew(current: float, target: float, c: ControlConfig) -> float:
    step = c.omega_slew * c.dt
    return float(min(max(target, current - step), current + step))


def _eor_trigger(sim: Simulation, mask: np.ndarray, est: RowEstimate) -> bool:
    eor = detect_eor(mask)
    g = eor_ground_point(sim.cam, eor)
    if g is None or g[0] - sim.cam.mount_x >= sim.control.trigger_range:
        return False
    lateral = -math.sin(est.psi) * g[0] + math.cos(est.psi) * g[1] - est.rho
    return abs(lateral) <= sim.control.eor_lateral_tol


# -- state A and row exit -------------------------------------------------

def at_state_a(sim: Simulation, ctx: SwitchContext, scorer: FootprintScorer, eor_error: float, dr_error: float,
               heading_error: float, perfect_dr: float | None = None) -> None:
    """Heading disturbance (if any), re-entry detection and reference capture at A."""
    if heading_error:
        sim.perturb_heading(heading_error)
        ctx.anchors[SwitchState.A.value] = sim.true
    mask, depth = sim.observe()
    eor = detect_eor(mask)
    res = locate_reentry(mask, depth, eor, sim.cam, ctx.turn)
    ctx.reentry = res
    if perfect_dr is not None:
        ctx.d_r = perfect_dr
    elif res.valid:
        ctx.d_r = max(res.d_r + dr_error, 0.0)
    try:
        ctx.reference = scorer.capture(mask, eor, sim.true, sim.cam, eor_error=eor_error)
    except StateError:
        ctx.fail("eor_lost_at_a")


def transition_a_to_b(sim: Simulation, ctx: SwitchContext, scorer: FootprintScorer) -> TransitionRecord | None:
    """Drive straight until the similarity score drops below the threshold.

    Scores arrive `latency` seconds after capture. When the score trend says the
    crossing falls inside the next step, that step is shortened to end on it.
    """
    c = sim.control
    latency = sim.profile.perception.latency
    start, odom0 = sim.true, sim.odom.pose
    needed = -sim.field.depth_past_eor(sim.front_point())
    sim.odom.begin_segment()
    travel = 0.0
    prev = None
    while True:
        s = scorer.score(ctx.reference, sim.pose_at(sim.t - latency), sim.field)
        if s < c.threshold:
            break
        if travel >= c.max_ab_travel:
            ctx.fail("eor_stop_timeout")
            return None
        frac = 1.0
        if prev is not None and prev > s and c.threshold > 0.0:  # scores never drop below 0
            frac = min((s - c.threshold) / (prev - s), 1.0)
        sim.step(c.v_switch, 0.0, c.dt * frac)
        travel += c.v_switch * c.dt * frac
        prev = s
        if frac < 1.0:
            break
    sim.enter(SwitchState.B)
    ctx.advance(SwitchState.B)
    overshoot = sim.field.depth_past_eor(sim.front_point())
    true_travel = float(np.linalg.norm(sim.true.position - start.position))
    odom_travel = float(np.linalg.norm(sim.odom.pose.position - odom0.position))
    return TransitionRecord("A", "B", needed, true_travel, odom_travel, overshoot, "m")


def _drive(sim: Simulation, distance: float, z: float | None = None) -> None:
    """Drive straight until the odometry has counted `distance`."""
    c = sim.control
    scales = sim.odom.begin_segment(z_trans=z)
    rate = c.v_switch * scales.trans
    if rate <= 0:
        raise ValueError("odometry translation scale must be positive")
    counted = 0.0
    while counted < distance - 1e-12:
        dt = min(c.dt, (distance - counted) / rate)
        sim.step(c.v_switch, 0.0, dt)
        counted += rate * dt


def _rotate(sim: Simulation, angle: float, z: float | None = None, bias: float = 0.0) -> float:
    """Rotate in place until the odometry has counted `angle` (signed); returns the true heading change."""
    c = sim.control
    scales = sim.odom.begin_segment(z_rot=z, extra_rot_bias=bias)
    omega = math.copysign(c.omega, angle)
    rate = abs(omega * scales.rot)
    if rate <= 0:
        raise ValueError("odometry rotation scale must be positive")
    counted = 0.0
    turned = 0.0
    while counted < abs(angle) - 1e-12:
        dt = min(c.dt, (abs(angle) - counted) / rate)
        before = sim.true.theta
        sim.step(0.0, omega, dt)
        turned += wrap_angle(sim.true.theta - before)
        counted += rate * dt
    return turned


def transition_b_to_c(sim: Simulation, ctx: SwitchContext) -> TransitionRecord:
    start, odom0 = sim.true, sim.odom.pose
    _drive(sim, ctx.L_R, sim.draws.get("trans_bc"))
    sim.enter(SwitchState.C)
    ctx.advance(SwitchState.C)
    true_d = float(np.linalg.norm(sim.true.position - start.position))
    odom_d = float(np.linalg.norm(sim.odom.pose.position - odom0.position))
    return TransitionRecord("B", "C", ctx.L_R, true_d, odom_d, true_d - ctx.L_R, "m")


def transition_rotate(sim: Simulation, ctx: SwitchContext, which: str) -> TransitionRecord:
    if which not in ("C->D", "E->F"):
        raise ValueError("which must be 'C->D' or 'E->F'")
    src, dst = (SwitchState.C, SwitchState.D) if which == "C->D" else (SwitchState.E, SwitchState.F)
    if ctx.state != src:
        raise TransitionError(f"{which} needs state {src.value}, robot is in {ctx.state.value}")
    s = _turn_sign(ctx.turn)
    odom0 = sim.odom.pose.theta
    first = which == "C->D"
    turned = _rotate(sim, s * math.pi / 2, sim.draws.get("rot_cd" if first else "rot_ef"),
                     sim.profile.turn_bias[0 if first else 1])
    sim.enter(dst)
    ctx.advance(dst)
    odom_turned = wrap_angle(sim.odom.pose.theta - odom0)
    return TransitionRecord(src.value, dst.value, math.pi / 2, s * turned, s * odom_turned,
                            s * turned - math.pi / 2, "rad")


def transition_d_to_e(sim: Simulation, ctx: SwitchContext) -> TransitionRecord | None:
    if ctx.d_r is None:
        ctx.fail("no_dr")
        return None
    start, odom0 = sim.true, sim.odom.pose
    _drive(sim, ctx.d_r, sim.draws.get("trans_de"))
    sim.enter(SwitchState.E)
    ctx.advance(SwitchState.E)
    true_d = float(np.linalg.norm(sim.true.position - start.position))
    odom_d = float(np.linalg.norm(sim.odom.pose.position - odom0.position))
    return TransitionRecord("D", "E", ctx.d_r, true_d, odom_d, true_d - ctx.d_r, "m")


# -- re-entry -------------------------------------------------------------

def transition_f_to_g(sim: Simulation, ctx: SwitchContext, origin_row: int | None, target_row: int) -> str:
    """Follow the nearest visible row into the field and report which row the robot ended up in."""
    c = sim.control
    tracker = RowTracker()
    cands, _ = _see_rows(sim)
    est = tracker.acquire(cands, sim.odom.pose)
    if est is None:
        ctx.fail("no_row_in_view")
        return "no_row_in_view"
    travel = last_seen = 0.0
    k = 1
    omega = 0.0
    while True:
        target = c.gains.omega(est, c.v_switch, c.omega_max) if est is not None else 0.0
        omega = _slew(omega, target, c)
        sim.step(c.v_switch, omega)
        travel += c.v_switch * c.dt
        depth = sim.field.depth_past_eor(sim.true.position)
        if depth <= 0 and ctx.state == SwitchState.F:
            sim.enter(SwitchState.G)
            ctx.advance(SwitchState.G)
        if depth <= -c.eval_depth:
            break
        if travel > c.max_entry_travel:
            ctx.fail("no_entry")
            return "no_entry"
        measured = False
        if k % c.vision_every == 0:
            cands, _ = _see_rows(sim)
            est = tracker.update(cands, sim.odom.pose)
            measured = est is not None
            if measured:
                last_seen = travel
        if not measured:
            est = tracker.predict(sim.odom.pose)
        if travel - last_seen > c.lost_after:
            ctx.fail("lost_row")
            return "lost_row"
        k += 1
    row, _ = sim.field.nearest_row(sim.true.position)
    if row == target_row:
        return "Success"
    outcome = "same_row" if row == origin_row else "skip_row"
    ctx.fail(outcome)
    return outcome


# -- drivers --------------------------------------------------------------

def _start_pose(field: FieldSpec, row: int, distance: float, offset: float, heading_deg: float) -> Pose2D:
    r = field.row(row)
    d = r.direction
    side = np.array([d[1], -d[0]])  # toward higher row index when rows run along +y
    p = np.asarray(r.end) - distance * d + offset * side
    th = math.atan2(d[1], d[0]) + math.radians(heading_deg)
    return Pose2D(float(p[0]), float(p[1]), th)


def draw_trial_noise(rng: np.random.Generator) -> dict[str, float]:
    return {k: float(rng.standard_normal()) for k in DRAW_CHANNELS}


def run_trial(field: FieldSpec, config: TrialConfig, profile: NoiseProfile | None = None,
              robot: RobotSpec | None = None, cam: CameraModel | None = None, control: ControlConfig | None = None,
              hook: Callable[[SwitchState, Simulation, SwitchContext], None] | None = None) -> TrialResult:
    """One complete row switch from inside `config.row` into its neighbour on the `config.turn` side.

    `hook`, if given, is called on entering every state; it may adjust the
    simulation (a place to plug in heading correction or sensor fusion).
    """
    profile = profile or NoiseProfile()
    robot = robot or RobotSpec()
    cam = cam or CameraModel()
    control = control or ControlConfig()
    _turn_sign(config.turn)
    n = len(field.rows)
    if not (0 <= config.row < n and 0 <= config.target_row < n):
        raise ValueError(f"row {config.row} has no neighbour on the {config.turn}")

    rng = np.random.default_rng(config.seed)
    drawn = draw_trial_noise(rng)
    draws = {**drawn, **(config.draws or {})}
    pn = profile.perception
    eor_error = pn.eor_bias + pn.eor_std * draws["eor"]
    dr_error = pn.dr_bias + pn.dr_std * draws["dr"]
    heading_error = math.radians(pn.heading_at_a_std * draws["heading_a"] + config.inject_heading_at_a)
    true_d = inter_row_distance(field, config.row, config.target_row)

    pose = _start_pose(field, config.row, config.start_distance, config.start_offset, config.start_heading)
    sim = Simulation(field, robot, cam, profile, control, rng, pose)
    sim.draws = draws
    ctx = SwitchContext(config.turn, robot.length)
    scorer = FootprintScorer(cam, robot.front_offset, control.threshold)
    records: list[TransitionRecord] = []
    outcome = None

    def entered(state: SwitchState) -> bool:
        if ctx.state == SwitchState.FAILED:
            return False
        ctx.anchors.setdefault(state.value, sim.true)
        ctx.odom_anchors.setdefault(state.value, sim.odom.pose)
        if hook is not None:
            hook(state, sim, ctx)
        return config.stop_after != state.value

    ctx.anchors[SwitchState.IN_ROW.value] = sim.true
    run_in_row(sim, ctx)
    go_on = entered(SwitchState.A)
    if ctx.state == SwitchState.A:
        at_state_a(sim, ctx, scorer, eor_error, dr_error, heading_error, true_d if config.perfect_dr else None)
    steps = [
        (lambda: transition_a_to_b(sim, ctx, scorer), SwitchState.B),
        (lambda: transition_b_to_c(sim, ctx), SwitchState.C),
        (lambda: transition_rotate(sim, ctx, "C->D"), SwitchState.D),
        (lambda: transition_d_to_e(sim, ctx), SwitchState.E),
        (lambda: transition_rotate(sim, ctx, "E->F"), SwitchState.F),
    ]
    stopped = not go_on and ctx.state != SwitchState.FAILED
    for fn, state in steps:
        if stopped or ctx.state == SwitchState.FAILED:
            break
        rec = fn()
        if rec is not None:
            records.append(rec)
        if not entered(state):
            stopped = ctx.state != SwitchState.FAILED
            break
    if not stopped and ctx.state == SwitchState.F:
        outcome = transition_f_to_g(sim, ctx, config.row, config.target_row)
        if ctx.state == SwitchState.G:
            entered(SwitchState.G)
    if outcome is None:
        outcome = ctx.failure if ctx.state == SwitchState.FAILED else f"stopped_at_{ctx.state.value}"
    if ctx.state == SwitchState.FAILED:
        sim.label = SwitchState.FAILED.value
        sim.anchor_index.setdefault(SwitchState.FAILED.value, len(sim.trajectory))
        sim._log()

    return TrialResult(
        config=config,
        outcome=outcome,
        final_state=ctx.state.value,
        records=records,
        trajectory=sim.trajectory,
        anchor_index=dict(sim.anchor_index),
        anchor_poses={k: (p.x, p.y, p.theta) for k, p in ctx.anchors.items()},
        d_r=ctx.d_r,
        d_r_detected=ctx.reentry.d_r if ctx.reentry is not None and ctx.reentry.valid else None,
        inter_row_true=true_d,
        reentry=ctx.reentry.to_dict() if ctx.reentry is not None else None,
    )


def f_pose(field: FieldSpec, row: int, offset: float, heading_deg: float, depth: float) -> Pose2D:
    """Pose in the headland `depth` beyond the EOR, facing into `row`.

    offset is lateral, toward higher row indices; heading is relative to the
    into-row direction, counter-clockwise positive.
    """
    r = field.row(row)
    d = r.direction
    side = np.array([d[1], -d[0]])
    p = np.asarray(r.end) + depth * d + offset * side
    th = math.atan2(-d[1], -d[0]) + math.radians(heading_deg)
    return Pose2D(float(p[0]), float(p[1]), th)


def run_reentry(field: FieldSpec, target_row: int, pose: Pose2D, *, origin_row: int | None = None,
                profile: NoiseProfile | None = None, robot: RobotSpec | None = None, cam: CameraModel | None = None,
                control: ControlConfig | None = None, seed: int = 0) -> str:
    """Run only F->G from an injected F pose; returns "Success" or the failure reason."""
    profile = profile or NoiseProfile()
    robot = robot or RobotSpec()
    sim = Simulation(field, robot, cam or CameraModel(), profile, control or ControlConfig(),
                     np.random.default_rng(seed), pose)
    ctx = SwitchContext(LEFT, robot.length, state=SwitchState.F)
    sim.enter(SwitchState.F)
    return transition_f_to_g(sim, ctx, origin_row, target_row)


def nominal_f_depth(robot: RobotSpec) -> float:
    """Centre depth past the EOR at F for an error-free manoeuvre: front at the EOR, then one robot length."""
    return robot.length - robot.front_offset


def with_seed(config: TrialConfig, seed: int) -> TrialConfig:
    return replace(config, seed=seed)
