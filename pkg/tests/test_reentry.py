import json
import math

import numpy as np
import pytest

from masks import random_mask
from oracles import brute_argmax, oracle_sum
from rowswitch.geometry import Pose2D
from rowswitch.images import load_depth, load_intrinsics, load_mask
from rowswitch.reentry import (
    DetectionUnavailable,
    build_roi,
    horizon_row,
    intersect_eor,
    joint_argmax,
    locate_reentry,
    roi_weights,
    scan_at,
    scan_pt,
)
from rowswitch.sensor import CameraModel, EorDetection, detect_eor, render

CAM = CameraModel()


def sequential_vs_oracle(mask, turn, apex):
    eor = detect_eor(mask)
    try:
        roi = build_roi(mask, eor, turn, apex_row=apex)
    except DetectionUnavailable:
        return None
    weights = roi_weights(mask, roi)
    ref_p = brute_argmax(weights, roi.A, roi.corner_path, roi.mirror_axis2)
    try:
        P_t = scan_pt(mask, roi.A, roi)
    except DetectionUnavailable:
        assert ref_p is None
        return "empty"
    assert ref_p is not None and P_t == tuple(roi.corner_path[ref_p[0]])
    ref_a = brute_argmax(weights, P_t, roi.top_segment, roi.mirror_axis2)
    A_t = scan_at(mask, P_t, roi)
    assert ref_a is not None and A_t == tuple(roi.top_segment[ref_a[0]])
    return "ok"


@pytest.mark.parametrize("seed", range(12))
def test_scans_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    mask = random_mask(rng, 100, 80)
    eor = detect_eor(mask)
    if not eor.valid:
        pytest.skip("generator produced no central row")
    apex = int(rng.integers(0, eor.image_row + 1))
    for turn in ("left", "right"):
        sequential_vs_oracle(mask, turn, apex)


def test_mirrored_mask_gives_mirrored_points():
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(20):
        mask = random_mask(rng, 90, 70)
        eor, eor_m = detect_eor(mask), detect_eor(mask[:, ::-1].copy())
        if not (eor.valid and eor_m.valid) or eor.image_row != eor_m.image_row:
            continue
        w = mask.shape[1]
        try:
            roi = build_roi(mask, eor, "left", apex_row=eor.image_row)
            roi_m = build_roi(mask[:, ::-1].copy(), eor_m, "right", apex_row=eor.image_row)
            P = scan_pt(mask, roi.A, roi)
            Pm = scan_pt(mask[:, ::-1].copy(), roi_m.A, roi_m)
        except DetectionUnavailable:
            continue
        if roi.A != (w - 1 - roi_m.A[0], roi_m.A[1]):
            continue  # the two traces fitted differently; nothing to compare
        assert P == (w - 1 - Pm[0], Pm[1])
        checked += 1
    assert checked >= 3


def fixture(fixtures_dir):
    truth = json.loads((fixtures_dir / "truth.json").read_text())
    return (load_mask(fixtures_dir / "mask.png"), load_depth(fixtures_dir / "depth.png"),
            load_intrinsics(fixtures_dir / "intrinsics.json"), truth)


def test_fixture_distance(fixtures_dir):
    mask, depth, cam, truth = fixture(fixtures_dir)
    res = locate_reentry(mask, depth, detect_eor(mask), cam, truth["turn"])
    assert res.valid
    assert abs(res.d_r - truth["d_r"]) < 0.03


def test_fixture_mirrored(fixtures_dir):
    mask, depth, cam, truth = fixture(fixtures_dir)
    mm, dm = mask[:, ::-1].copy(), depth[:, ::-1].copy()
    res = locate_reentry(mm, dm, detect_eor(mm), cam, "left")
    assert res.valid and abs(res.d_r - truth["d_r"]) < 0.03


def test_joint_search_never_beats_by_much(fixtures_dir):
    mask, depth, cam, truth = fixture(fixtures_dir)
    eor = detect_eor(mask)
    res = locate_reentry(mask, depth, eor, cam, truth["turn"])
    roi = res.roi
    w = roi_weights(mask, roi)
    seq = oracle_sum(w, res.A_t, res.P_t, roi.mirror_axis2)
    # the exhaustive pair search is slow at full size; restrict to every 8th candidate
    sub = roi.__class__(roi.side, roi.A, roi.B, roi.L1, roi.L2, roi.L3, roi.corner_path[::8], roi.top_segment[::8],
                        roi.region)
    _, _, joint = joint_argmax(mask, sub)
    assert seq > 0 and seq >= 0.9 * joint


def test_lateral_offset_shrinks_the_distance(flat_field):
    r = flat_field.row(5)
    pose = Pose2D(r.end[0] + 0.1, r.end[1] - 1.4, math.pi / 2)
    mask, depth = render(flat_field, pose, CAM)
    res = locate_reentry(mask, depth, detect_eor(mask), CAM, "right")
    assert res.valid and res.d_r == pytest.approx(0.55, abs=0.03)
    res = locate_reentry(mask, depth, detect_eor(mask), CAM, "left")
    assert res.valid and res.d_r == pytest.approx(0.75, abs=0.03)


def test_no_eor_is_invalid():
    z = np.zeros((CAM.height, CAM.width), np.uint8)
    res = locate_reentry(z, np.ones(z.shape, np.float32), detect_eor(z), CAM, "left")
    assert not res.valid and res.d_r is None


def test_no_depth_is_invalid(fixtures_dir):
    mask, depth, cam, truth = fixture(fixtures_dir)
    res = locate_reentry(mask, np.zeros_like(depth), detect_eor(mask), cam, truth["turn"])
    assert not res.valid and "depth" in res.reason


def test_lonely_row_is_invalid(flat_field):
    r = flat_field.row(0)
    pose = Pose2D(r.end[0], r.end[1] - 1.4, math.pi / 2)
    mask, depth = render(flat_field, pose, CAM)
    # row 0 has no neighbour at lower x, which is on the robot's left
    res = locate_reentry(mask, depth, detect_eor(mask), CAM, "left")
    assert not res.valid


def test_bad_inputs(fixtures_dir):
    mask, depth, cam, _ = fixture(fixtures_dir)
    with pytest.raises(ValueError):
        locate_reentry(mask, depth, detect_eor(mask), cam, "up")
    with pytest.raises(ValueError):
        locate_reentry(mask, depth[:-1], detect_eor(mask), cam, "left")
    with pytest.raises(DetectionUnavailable):
        build_roi(mask, EorDetection(), "left")
    with pytest.raises(DetectionUnavailable):
        intersect_eor((1, 5), (9, 5), 7)


def test_horizon_row():
    assert horizon_row(CAM) == round(CAM.cy - CAM.fy * math.tan(CAM.pitch))
    assert horizon_row(CameraModel(pitch=0.0)) == 240
