"""Batch reports: CSV tables, a short text summary and two SVG figures.

Layout of a report directory:

    trials.csv          one line per trial (row, turn, seed, outcome, d_r ...)
    errors.csv          trial, transition, commanded, achieved, error, unit
    summary.csv         per transition: count, median, median |error|, alpha, E_max of its type
    headland.json       minimum headland width from the batch's worst A->C overshoot
    report.md           human-readable summary
    trajectories/       trial_NN.csv with t, x, y, theta, state (GNSS antenna, world frame)
    errors.svg          normalised errors per transition, scatter over box-whisker
    trajectories.svg    top-down view with the rows' regression lines

Floats in errors.csv are written with repr() so re-reading them gives back the
same ErrorTable bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .field import FieldSpec, ground_truth_line
from .metrics import (
    KIND,
    TRANSITIONS,
    ErrorTable,
    HeadlandRequirement,
    TransitionError,
    alpha_table,
    e_abc_max,
    errors_from_trajectory,
    headland_requirement,
    success_rate,
    transition_errors,
)
from .robot import RobotSpec

TRIAL_FIELDS = ("trial", "row", "turn", "target_row", "seed", "outcome", "final_state",
                "d_r", "d_r_detected", "inter_row_true")
ERROR_FIELDS = ("trial", "transition", "commanded", "achieved", "error", "unit")
SUMMARY_FIELDS = ("transition", "count", "median", "median_abs", "alpha_percent", "e_max", "unit")

COEFFICIENT_NOTE = (
    "The headland rule's printed coefficient 1.85 does not reproduce the published 143.17 cm "
    "for L_robot = 52.6 cm and E_ABC,max = 64.27 cm; a coefficient of 1.5 does. "
    "Both presets are available and the one used is named above."
)


@dataclass(frozen=True)
class BatchReport:
    table: ErrorTable
    success_rate: float
    trials: int
    headland: HeadlandRequirement
    coefficient_label: str
    out_dir: Path


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


# -- trial level ------------------------------------------------------------

def trial_rows(results) -> list[dict]:
    rows = []
    for i, r in enumerate(results):
        c = r.config
        rows.append({"trial": i, "row": c.row, "turn": c.turn, "target_row": c.target_row, "seed": c.seed,
                     "outcome": r.outcome, "final_state": r.final_state, "d_r": _num(r.d_r),
                     "d_r_detected": _num(r.d_r_detected), "inter_row_true": _num(r.inter_row_true)})
    return rows


def write_csv(path: Path, fields: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)


def write_errors_csv(path: Path, errors: Sequence[dict[str, TransitionError | None]]) -> None:
    rows = []
    for per in errors:
        for t in TRANSITIONS:
            e = per.get(t)
            if e is not None:
                rows.append({"trial": e.trial, "transition": t, "commanded": _num(e.commanded),
                             "achieved": _num(e.achieved), "error": _num(e.error), "unit": e.unit})
    write_csv(path, ERROR_FIELDS, rows)


def read_errors_csv(path) -> list[dict[str, TransitionError | None]]:
    """Per-trial error maps from errors.csv (trials with no entries at all are not recoverable)."""
    by_trial: dict[int, dict[str, TransitionError | None]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            i = int(row["trial"])
            per = by_trial.setdefault(i, dict.fromkeys(TRANSITIONS))
            per[row["transition"]] = TransitionError(i, row["transition"], float(row["commanded"]),
                                                     float(row["achieved"]), float(row["error"]), row["unit"])
    return [by_trial[k] for k in sorted(by_trial)]


def write_summary_csv(path: Path, table: ErrorTable) -> None:
    rows = []
    for r in table.rows:
        rows.append({"transition": r.transition, "count": r.count, "median": _num(r.median),
                     "median_abs": _num(r.median_abs), "alpha_percent": _num(r.alpha),
                     "e_max": _num(table.e_max[KIND[r.transition]]), "unit": r.unit})
    write_csv(path, SUMMARY_FIELDS, rows)


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """(xy, theta, state labels) of one trajectory file."""
    xy, th, states = [], [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            xy.append((float(row["x"]), float(row["y"])))
            th.append(float(row["theta"]))
            states.append(row["state"])
    return np.array(xy).reshape(-1, 2), np.array(th), states


def anchors_from_states(states: Sequence[str]) -> dict[str, int]:
    """Index of the first sample carrying each state label."""
    out: dict[str, int] = {}
    for i, s in enumerate(states):
        out.setdefault(s, i)
    return out


# -- figures ----------------------------------------------------------------

def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "rowswitch"
    return plt


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})


def plot_errors(path: Path, errors: Sequence[dict[str, TransitionError | None]], table: ErrorTable) -> None:
    """Errors of each transition divided by E_max of their type (percent), dots over a box plot."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    data = []
    for t in TRANSITIONS:
        emax = table.e_max[KIND[t]]
        vals = [per[t].error for per in errors if per.get(t) is not None]
        data.append([100.0 * v / emax for v in vals] if emax > 0 else [0.0 for _ in vals])
    pos = np.arange(1, len(TRANSITIONS) + 1)
    ax.boxplot([d if d else [np.nan] for d in data], positions=pos, widths=0.5, showfliers=False)
    jitter = np.random.default_rng(0)
    for p, d in zip(pos, data):
        ax.scatter(p + jitter.uniform(-0.12, 0.12, len(d)), d, s=12, alpha=0.7)
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xticks(pos, TRANSITIONS)
    ax.set_ylabel("error / E_max of its type (%)")
    ax.set_title("Normalised transition errors")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def plot_trajectories(path: Path, field: FieldSpec, trajectories: Sequence[tuple[np.ndarray, str]]) -> None:
    """Top-down view: regression line of every row, EOR line, and each trial's antenna track."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 7))
    for row in field.rows:
        line = ground_truth_line(field, row.index)
        s0 = float((np.asarray(row.start) - line.p) @ line.d)
        s1 = float((np.asarray(row.end) - line.p) @ line.d)
        pts = line.p + np.outer([s0 - 0.5, s1 + 0.5], line.d)
        ax.plot(pts[:, 0], pts[:, 1], color="green", lw=0.8)
    ends = np.array([r.end for r in field.rows], dtype=float)
    ep, ed = field.eor_line.p, field.eor_line.d
    t = (ends - ep) @ ed
    e = ep + np.outer([t.min() - 1.0, t.max() + 1.0], ed)
    ax.plot(e[:, 0], e[:, 1], color="0.5", ls="--", lw=0.8)
    for xy, outcome in trajectories:
        if len(xy):
            ax.plot(xy[:, 0], xy[:, 1], lw=1.0, color="tab:blue" if outcome == "Success" else "tab:red")
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title("Antenna trajectories (blue success, red failure)")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


# -- the report -------------------------------------------------------------

def _coefficient(coefficient) -> tuple[float | str, str]:
    if coefficient is None:
        return "paper-equation", "paper-equation (1.85)"
    if isinstance(coefficient, str):
        from .metrics import COEFFICIENT_PRESETS

        if coefficient not in COEFFICIENT_PRESETS:
            raise ValueError(f"unknown coefficient preset {coefficient!r}")
        return coefficient, f"{coefficient} ({COEFFICIENT_PRESETS[coefficient]})"
    return float(coefficient), f"custom ({float(coefficient)})"


def _write_report(out: Path, field: FieldSpec, rows: list[dict], errors, trajectories, robot: RobotSpec,
                  coefficient, profile_name: str | None) -> BatchReport:
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "trials.csv", TRIAL_FIELDS, rows)
    write_errors_csv(out / "errors.csv", errors)
    table = alpha_table(errors) if any(any(v is not None for v in per.values()) for per in errors) else None
    rate = success_rate([r["outcome"] for r in rows])
    coeff, label = _coefficient(coefficient)
    head = headland_requirement(robot.length, e_abc_max(errors), coefficient=coeff)
    (out / "headland.json").write_text(json.dumps({**asdict(head), "coefficient_label": label}, indent=1) + "\n")
    if table is not None:
        write_summary_csv(out / "summary.csv", table)
        plot_errors(out / "errors.svg", errors, table)
    plot_trajectories(out / "trajectories.svg", field, trajectories)

    lines = ["# Row-switching batch report", ""]
    if profile_name:
        lines += [f"Noise profile: {profile_name}. Its parameters were tuned to land near the field "
                  "experiment's medians (calibration by construction, not a model of that robot).", ""]
    n_ok = sum(r["outcome"] == "Success" for r in rows)
    lines += [f"Success: {n_ok}/{len(rows)} = {100 * rate:.1f}%", ""]
    if table is not None:
        lines += ["| transition | n | median | median abs | alpha (%) | unit |", "|---|---|---|---|---|---|"]
        for s in table.rows:
            a = "n/a" if s.alpha is None else f"{s.alpha:.2f}"
            scale = 100.0 if s.unit == "m" else 1.0
            unit = "cm" if s.unit == "m" else "deg"
            lines.append(f"| {s.transition} | {s.count} | {scale * s.median:.2f} | {scale * s.median_abs:.2f} | {a} | {unit} |")
        lines += ["", f"E_max: distance {100 * table.e_max['distance']:.2f} cm, angle {table.e_max['angle']:.2f} deg", ""]
    lines += [f"Headland width: W_H,min = {100 * head.W_H_min:.2f} cm with coefficient {label}, "
              f"L_robot = {100 * head.L_robot:.1f} cm, E_ABC,max = {100 * head.E_ABC_max:.2f} cm.", "",
              COEFFICIENT_NOTE, ""]
    (out / "report.md").write_text("\n".join(lines))
    return BatchReport(table, rate, len(rows), head, label, out)


def batch_report(results, field: FieldSpec, out_dir, robot: RobotSpec | None = None, coefficient=None,
                 profile_name: str | None = None, n_after: int = 5) -> BatchReport:
    """Write the full report directory for a list of TrialResults."""
    if not results:
        raise ValueError("batch_report needs at least one trial")
    robot = robot or RobotSpec()
    out = Path(out_dir)
    (out / "trajectories").mkdir(parents=True, exist_ok=True)
    errors = [transition_errors(r, field, robot, n_after, i) for i, r in enumerate(results)]
    trajs = []
    for i, r in enumerate(results):
        (out / "trajectories" / f"trial_{i:02d}.csv").write_text(r.trajectory_csv())
        trajs.append((np.array([(p[1], p[2]) for p in r.trajectory]).reshape(-1, 2), r.outcome))
    return _write_report(out, field, trial_rows(results), errors, trajs, robot, coefficient, profile_name)


def report_from_dir(run_dir, field: FieldSpec, out_dir=None, robot: RobotSpec | None = None, coefficient=None,
                    n_after: int = 5) -> BatchReport:
    """Rebuild a report from trials.csv and the trajectory files of an earlier run."""
    run = Path(run_dir)
    robot = robot or RobotSpec()
    with open(run / "trials.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{run / 'trials.csv'} lists no trials")
    errors, trajs = [], []
    for r in rows:
        i = int(r["trial"])
        xy, th, states = read_trajectory_csv(run / "trajectories" / f"trial_{i:02d}.csv")
        errors.append(errors_from_trajectory(xy, th, anchors_from_states(states), field, int(r["row"]),
                                             int(r["target_row"]), r["turn"], robot, n_after, i))
        trajs.append((xy, r["outcome"]))
    out = Path(out_dir) if out_dir is not None else run
    return _write_report(out, field, rows, errors, trajs, robot, coefficient, None)
