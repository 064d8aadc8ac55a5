"""Transition errors from logged trajectories, normalised error tables and the headland width rule.

Distances are in metres and angles in degrees. The error of each transition is
measured from the GNSS-antenna trajectory at the state anchors, the way the
field experiment measured it:

    A->B  front edge past the true EOR at B
    B->C  |BC| - L_R
    C->D  angle from AC to DE, signed toward the turn, minus 90
    D->E  |DE| - true inter-row distance
    E->F  angle from DE to F F_N (F_N = N samples after F), signed toward the turn, minus 90
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .field import FieldSpec, inter_row_distance
from .robot import RobotSpec

TRANSITIONS = ("A->B", "B->C", "C->D", "D->E", "E->F")
KIND = {"A->B": "distance", "B->C": "distance", "C->D": "angle", "D->E": "distance", "E->F": "angle"}
UNIT = {"distance": "m", "angle": "deg"}

COEFFICIENT_PRESETS = {"paper-equation": 1.85, "paper-result": 1.5}


@dataclass(frozen=True)
class TransitionError:
    trial: int
    transition: str
    commanded: float
    achieved: float
    error: float
    unit: str


def _signed_deg(a: np.ndarray, b: np.ndarray) -> float:
    return math.degrees(math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]))


def errors_from_trajectory(xy: np.ndarray, theta: np.ndarray, anchors: Mapping[str, int], field: FieldSpec,
                           row: int, target_row: int, turn: str, robot: RobotSpec | None = None,
                           n_after: int = 5, trial: int = 0) -> dict[str, TransitionError | None]:
    """Five paper-style errors; a transition whose anchors are missing maps to None."""
    robot = robot or RobotSpec()
    s = 1.0 if turn == "left" else -1.0
    xy = np.asarray(xy, dtype=float)
    pt = {k: xy[i] for k, i in anchors.items() if 0 <= i < len(xy)}
    out: dict[str, TransitionError | None] = dict.fromkeys(TRANSITIONS)

    def has(*keys):
        return all(k in pt for k in keys)

    if has("A", "B"):
        def front(i):
            th = theta[anchors[i]]
            return pt[i] + robot.gnss_offset * np.array([math.cos(th), math.sin(th)])
        needed = -field.depth_past_eor(front("A"))
        over = field.depth_past_eor(front("B"))
        out["A->B"] = TransitionError(trial, "A->B", needed, float(np.linalg.norm(pt["B"] - pt["A"])), over, "m")
    if has("B", "C"):
        d = float(np.linalg.norm(pt["C"] - pt["B"]))
        out["B->C"] = TransitionError(trial, "B->C", robot.length, d, d - robot.length, "m")
    if has("A", "C", "D", "E"):
        ang = s * _signed_deg(pt["C"] - pt["A"], pt["E"] - pt["D"])
        out["C->D"] = TransitionError(trial, "C->D", 90.0, ang, ang - 90.0, "deg")
    if has("D", "E"):
        d = float(np.linalg.norm(pt["E"] - pt["D"]))
        ref = inter_row_distance(field, row, target_row)
        out["D->E"] = TransitionError(trial, "D->E", ref, d, d - ref, "m")
    if has("D", "E", "F") and anchors["F"] + n_after < len(xy):
        fn = xy[anchors["F"] + n_after]
        ang = s * _signed_deg(pt["E"] - pt["D"], fn - pt["F"])
        out["E->F"] = TransitionError(trial, "E->F", 90.0, ang, ang - 90.0, "deg")
    return out


def transition_errors(trial, field: FieldSpec, robot: RobotSpec | None = None, n_after: int = 5,
                      index: int = 0) -> dict[str, TransitionError | None]:
    """Errors of one TrialResult."""
    traj = trial.trajectory
    xy = np.array([(r[1], r[2]) for r in traj])
    th = np.array([r[3] for r in traj])
    c = trial.config
    return errors_from_trajectory(xy, th, trial.anchor_index, field, c.row, c.target_row, c.turn, robot,
                                  n_after, index)


def median(values: Sequence[float]) -> float:
    """Median; for an even count, the mean of the two middle values."""
    if len(values) == 0:
        raise ValueError("median of an empty sequence")
    return float(np.median(np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class TransitionSummary:
    transition: str
    count: int
    median: float
    median_abs: float
    alpha: float | None  # percent; None when the type's E_max is zero
    unit: str


@dataclass(frozen=True)
class ErrorTable:
    rows: tuple[TransitionSummary, ...]
    e_max: dict[str, float]  # per type: "distance" (m), "angle" (deg)

    def get(self, transition: str) -> TransitionSummary:
        for r in self.rows:
            if r.transition == transition:
                return r
        raise KeyError(transition)


def alpha(median_error: float, e_max: float) -> float | None:
    """Normalised median percentage error; None (not applicable) when e_max is zero."""
    if e_max < 0:
        raise ValueError("E_max must be non-negative")
    if e_max == 0:
        return None
    return 100.0 * median_error / e_max


def alpha_table(errors: Iterable[Mapping[str, TransitionError | None]]) -> ErrorTable:
    """Medians and alpha per transition, E_max pooled over absolute errors of each type."""
    per: dict[str, list[float]] = {t: [] for t in TRANSITIONS}
    n = 0
    for trial in errors:
        n += 1
        for t in TRANSITIONS:
            e = trial.get(t)
            if e is not None:
                per[t].append(e.error)
    if n == 0:
        raise ValueError("alpha_table needs at least one trial")
    if not any(per.values()):
        raise ValueError("no complete transition records in the batch")
    e_max = {}
    for kind in ("distance", "angle"):
        pooled = [abs(v) for t in TRANSITIONS if KIND[t] == kind for v in per[t]]
        e_max[kind] = max(pooled) if pooled else 0.0
    rows = []
    for t in TRANSITIONS:
        vals = per[t]
        if not vals:
            rows.append(TransitionSummary(t, 0, math.nan, math.nan, None, UNIT[KIND[t]]))
            continue
        med = median(vals)
        rows.append(TransitionSummary(t, len(vals), med, median([abs(v) for v in vals]),
                                      alpha(med, e_max[KIND[t]]), UNIT[KIND[t]]))
    return ErrorTable(tuple(rows), e_max)


def alpha_from_medians(medians: Mapping[str, float], e_max_distance: float, e_max_angle: float) -> dict[str, float | None]:
    return {t: alpha(m, e_max_distance if KIND[t] == "distance" else e_max_angle) for t, m in medians.items()}


def e_abc_max(errors: Iterable[Mapping[str, TransitionError | None]]) -> float:
    """Largest distance past the desired C position over the batch: A->B plus B->C error."""
    worst = 0.0
    for trial in errors:
        ab, bc = trial.get("A->B"), trial.get("B->C")
        if ab is not None and bc is not None:
            worst = max(worst, ab.error + bc.error)
    return worst


@dataclass(frozen=True)
class HeadlandRequirement:
    W_H_min: float
    coefficient: float
    E_ABC_max: float
    L_robot: float


def headland_requirement(L_robot: float, E_ABC_max: float, gnss_ratio: float | None = None,
                         coefficient: float | str | None = None) -> HeadlandRequirement:
    """Minimum headland width: coefficient * L_robot + E_ABC_max.

    The coefficient is (1 + gnss_ratio) unless given explicitly, either as a
    number or as the name of a preset in COEFFICIENT_PRESETS.
    """
    if L_robot <= 0:
        raise ValueError("L_robot must be positive")
    if E_ABC_max < 0:
        raise ValueError("E_ABC_max must be non-negative")
    if isinstance(coefficient, str):
        if coefficient not in COEFFICIENT_PRESETS:
            raise ValueError(f"unknown coefficient preset {coefficient!r}")
        coefficient = COEFFICIENT_PRESETS[coefficient]
    if coefficient is None:
        if gnss_ratio is None:
            raise ValueError("give either gnss_ratio or coefficient")
        if gnss_ratio < 0:
            raise ValueError("gnss_ratio must be non-negative")
        coefficient = 1.0 + gnss_ratio
    if coefficient <= 0:
        raise ValueError("coefficient must be positive")
    return HeadlandRequirement(coefficient * L_robot + E_ABC_max, float(coefficient), E_ABC_max, L_robot)


def success_rate(outcomes: Sequence[str]) -> float:
    if not outcomes:
        raise ValueError("no trials")
    return sum(o == "Success" for o in outcomes) / len(outcomes)
