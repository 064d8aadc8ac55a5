import math
from dataclasses import replace

import pytest

from conftest import flat_config
from rowswitch.field import CropRow, field_from_rows, generate_field
from rowswitch.fsm import (
    ControlConfig,
    SwitchContext,
    SwitchState,
    TransitionError,
    TrialConfig,
    f_pose,
    nominal_f_depth,
    run_reentry,
    run_trial,
)
from rowswitch.profiles import PROFILES
from rowswitch.robot import RobotSpec

DEPTH = nominal_f_depth(RobotSpec())


def test_states_advance_in_order_only():
    ctx = SwitchContext("left", 0.5)
    ctx.advance(SwitchState.A)
    with pytest.raises(TransitionError):
        ctx.advance(SwitchState.C)
    with pytest.raises(TransitionError):
        ctx.advance(SwitchState.IN_ROW)
    ctx.advance(SwitchState.B)
    ctx.fail("no_dr")
    assert ctx.state == SwitchState.FAILED and ctx.failure == "no_dr"
    with pytest.raises(TransitionError):
        ctx.advance(SwitchState.C)
    with pytest.raises(TransitionError):
        ctx.fail("again")


def test_control_config_validation():
    with pytest.raises(ValueError):
        ControlConfig(dt=0)
    with pytest.raises(ValueError):
        ControlConfig(vision_every=0)


def test_bad_trial_config(flat_field):
    with pytest.raises(ValueError):
        run_trial(flat_field, TrialConfig(0, "left"))
    with pytest.raises(ValueError):
        run_trial(flat_field, TrialConfig(4, "up"))


@pytest.fixture(scope="module")
def clean_trial(flat_field):
    seen = []
    res = run_trial(flat_field, TrialConfig(4, "right", seed=3), PROFILES["none"],
                    hook=lambda state, sim, ctx: seen.append(state.value))
    return res, seen


def test_noise_free_switch_succeeds(clean_trial):
    res, seen = clean_trial
    assert res.outcome == "Success" and res.final_state == "G"
    assert seen == ["A", "B", "C", "D", "E", "F", "G"]
    assert [(r.source, r.target) for r in res.records] == [("A", "B"), ("B", "C"), ("C", "D"), ("D", "E"),
                                                           ("E", "F")]
    assert abs(res.d_r - res.inter_row_true) < 0.03
    for r in res.records:
        assert abs(r.error) < (0.02 if r.unit == "m" else math.radians(1))


def test_trajectory_anchors_follow_the_state_order(clean_trial):
    res, _ = clean_trial
    idx = [res.anchor_index[s] for s in "ABCDEFG"]
    assert idx == sorted(idx)
    labels = [row[4] for row in res.trajectory]
    assert labels[0] == "InRow" and labels[-1] == "G"


def test_same_seed_same_trajectory(flat_field, clean_trial):
    again = run_trial(flat_field, TrialConfig(4, "right", seed=3), PROFILES["none"])
    assert again.trajectory_csv() == clean_trial[0].trajectory_csv()


def test_noisy_trial_is_repeatable(field0):
    cfg = TrialConfig(5, "left", seed=21)
    a = run_trial(field0, cfg, PROFILES["paper-calibrated"])
    b = run_trial(field0, cfg, PROFILES["paper-calibrated"])
    assert a.to_dict() == b.to_dict() and a.trajectory_csv() == b.trajectory_csv()


def test_stop_after_a_keeps_the_detection(flat_field):
    res = run_trial(flat_field, TrialConfig(6, "left", stop_after="A"), PROFILES["none"])
    assert res.outcome == "stopped_at_A" and res.final_state == "A"
    assert res.d_r_detected == pytest.approx(res.inter_row_true, abs=0.03)
    assert res.records == []


def test_follower_coasts_across_a_gap():
    cfg = flat_config(gap_count=0)
    base = generate_field(cfg, 2)
    rows = list(base.rows)
    r = rows[4]
    rows[4] = CropRow(r.index, r.start, r.end, gaps=((0.62, 0.75),))  # about 1 m missing in front of the start
    field = field_from_rows(rows, base.nominal_inter_row, r.end[1], base.headland_depth)
    res = run_trial(field, TrialConfig(4, "left", stop_after="A"), PROFILES["none"])
    assert res.outcome == "stopped_at_A"


def test_row_without_plants_is_lost():
    base = generate_field(flat_config(gap_count=0), 2)
    rows = list(base.rows)
    r = rows[4]
    rows[4] = CropRow(r.index, r.start, r.end, gaps=((0.3, 1.0),))  # planted only far behind the start
    field = field_from_rows(rows, base.nominal_inter_row, r.end[1], base.headland_depth)
    res = run_trial(field, TrialConfig(4, "left"), PROFILES["none"])
    assert res.outcome == "lost_row" and res.final_state == "Failed"
    assert res.trajectory[-1][4] == "Failed"


def test_zero_threshold_never_stops(flat_field):
    res = run_trial(flat_field, TrialConfig(4, "left"), PROFILES["none"], control=ControlConfig(threshold=0.0))
    assert res.outcome == "eor_stop_timeout"


def test_reentry_from_a_clean_f_pose(flat_field):
    assert run_reentry(flat_field, 5, f_pose(flat_field, 5, 0.0, 0.0, DEPTH), origin_row=4) == "Success"
    assert run_reentry(flat_field, 5, f_pose(flat_field, 5, 0.2, 10.0, DEPTH), origin_row=4) == "Success"


def test_reentry_far_off_lands_in_a_neighbour(flat_field):
    pose = f_pose(flat_field, 5, 0.45, 0.0, DEPTH)
    assert run_reentry(flat_field, 5, pose, origin_row=4) == "skip_row"
    pose = f_pose(flat_field, 5, -0.45, 0.0, DEPTH)
    assert run_reentry(flat_field, 5, pose, origin_row=4) == "same_row"


def test_f_pose_faces_into_the_row(flat_field):
    p = f_pose(flat_field, 3, 0.1, 0.0, 0.5)
    r = flat_field.row(3)
    assert p.theta == pytest.approx(-math.pi / 2)
    assert (p.x, p.y) == pytest.approx((r.end[0] + 0.1, r.end[1] + 0.5))
    assert flat_field.depth_past_eor((p.x, p.y)) == pytest.approx(0.5)


def test_injected_heading_shows_up_at_a(flat_field):
    base = TrialConfig(4, "right", stop_after="A")
    a = run_trial(flat_field, base, PROFILES["none"])
    b = run_trial(flat_field, replace(base, inject_heading_at_a=3.0), PROFILES["none"])
    assert a.anchor_poses["A"][:2] == b.anchor_poses["A"][:2]
    assert b.anchor_poses["A"][2] - a.anchor_poses["A"][2] == pytest.approx(math.radians(3.0))
    # a right turn seen with the heading rotated left reads a longer lateral distance
    assert b.d_r_detected > a.d_r_detected + 0.05
