"""Re-entry point detection on a skeleton mask.

Two sequential argmax scans find the image line through the adjacent row: first
the far end P_t (scanning the ROI's side and bottom edges from the anchor A),
then the near end A_t (scanning the ROI's top edge toward P_t). Where that line
meets the EOR image row is the re-entry point R; its depth gives the lateral
distance d_r to the next row.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .raster import line_pixels, line_sum
from .sensor import CameraModel, EorDetection

LEFT, RIGHT = "left", "right"


class DetectionUnavailable(RuntimeError):
    pass


def _turn_sign(turn: str) -> int:
    if turn == LEFT:
        return 1
    if turn == RIGHT:
        return -1
    raise ValueError(f"turn must be 'left' or 'right', got {turn!r}")


@dataclass(frozen=True)
class ScanRoi:
    side: str
    A: tuple[int, int]
    B: tuple[int, int]
    L1: tuple[int, int]
    L2: tuple[int, int]
    L3: tuple[int, int]
    corner_path: np.ndarray = dc_field(repr=False)  # (N, 2) u, v in scan order
    top_segment: np.ndarray = dc_field(repr=False)  # (M, 2) u, v ordered from A to L1
    region: np.ndarray = dc_field(repr=False)  # bool (H, W), pixels counted by the scans

    @property
    def shape(self) -> tuple[int, int]:
        return self.region.shape

    @property
    def mirror_axis2(self) -> int:
        return self.region.shape[1] - 1


@dataclass(frozen=True)
class ReentryResult:
    valid: bool
    R_px: tuple[float, int] | None = None
    R_3d: tuple[float, float, float] | None = None
    d_r: float | None = None
    P_t: tuple[int, int] | None = None
    A_t: tuple[int, int] | None = None
    reason: str = ""
    roi: ScanRoi | None = dc_field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "R_px": list(self.R_px) if self.R_px else None,
            "R_3d": list(self.R_3d) if self.R_3d else None,
            "d_r": self.d_r,
            "P_t": list(self.P_t) if self.P_t else None,
            "A_t": list(self.A_t) if self.A_t else None,
            "reason": self.reason,
        }


def _round_u(x: float, width: int) -> int:
    """Round a column, resolving exact halves away from the image's vertical centre."""
    lo = int(np.floor(x))
    frac = x - lo
    if frac > 0.5 or (frac == 0.5 and 2 * lo + 1 > width - 1):
        return lo + 1
    return lo


def horizon_row(cam: CameraModel) -> int:
    """Image row of the ground plane's vanishing line (clamped into the image)."""
    v = cam.cy - cam.fy * np.tan(cam.pitch)
    return int(min(max(round(v), 0), cam.height - 1))


def build_roi(mask: np.ndarray, eor: EorDetection, turn: str, margin: int = 3, apex_row: int = 0) -> ScanRoi:
    """ROI on the turn side of the current row, below the line from A to the top image corner.

    A is the apex of the current row's image line at `apex_row`. With the horizon
    row as apex every parallel row's line passes (nearly) through A, which is what
    lets a single A->P line cover the adjacent row. B is the bottom of the row's trace.
    """
    sign = _turn_sign(turn)
    if not eor.valid or eor.trace is None:
        raise DetectionUnavailable("no central row skeleton")
    h, w = mask.shape
    tr = eor.trace
    apex_row = min(apex_row, tr.v_top)
    A = (_round_u(tr.u_at(apex_row), w), int(apex_row))
    B = (_round_u(tr.u_at(tr.v_bottom), w), int(tr.v_bottom))
    if not (0 <= A[0] < w and 0 <= B[0] < w) or B[1] <= A[1]:
        raise DetectionUnavailable("central row trace is degenerate")
    B_edge = (min(max(_round_u(tr.u_at(h - 1), w), 0), w - 1), h - 1)
    if sign > 0:
        L1, L2 = (0, 0), (0, h - 1)
        bottom = np.arange(1, B_edge[0] + 1)
    else:
        L1, L2 = (w - 1, 0), (w - 1, h - 1)
        bottom = np.arange(w - 2, B_edge[0] - 1, -1)
    L3 = ((L2[0] + B_edge[0]) // 2, h - 1)
    side = np.column_stack([np.full(h, L1[0]), np.arange(h)])
    path = np.vstack([side, np.column_stack([bottom, np.full(len(bottom), h - 1)])]).astype(np.int64)

    xs, ys = line_pixels(A, L1, w - 1)
    top = np.column_stack([xs, ys])
    if tuple(top[0]) != A:
        top = top[::-1]

    vv, uu = np.mgrid[0:h, 0:w]
    du, dv = B[0] - A[0], B[1] - A[1]
    # (u_line(v) - u) * dv, exact in integers; positive means left of the A-B line
    left_of = (A[0] - uu) * dv + (vv - A[1]) * du
    beyond = sign * left_of > margin * dv
    if sign > 0:
        below_top = vv * A[0] >= A[1] * uu
    else:
        below_top = vv * (w - 1 - A[0]) >= A[1] * (w - 1 - uu)
    region = beyond & below_top
    return ScanRoi(turn, A, B, L1, L2, L3, path, top, region)


def roi_weights(mask: np.ndarray, roi: ScanRoi) -> np.ndarray:
    return np.where(roi.region, mask, 0).astype(np.int64)


def _scan(weights: np.ndarray, fixed, candidates: np.ndarray, axis2: int) -> tuple[int, int]:
    best, best_i = -1, -1
    for i, c in enumerate(candidates):
        s = line_sum(weights, fixed, c, axis2)
        if s > best:
            best, best_i = s, i
    if best <= 0:
        raise DetectionUnavailable("no skeleton pixels along any scan line")
    return best_i, best


def scan_pt(mask: np.ndarray, A, roi: ScanRoi) -> tuple[int, int]:
    """Point on the side/bottom path maximising the mask sum along A->P (first maximum wins)."""
    i, _ = _scan(roi_weights(mask, roi), A, roi.corner_path, roi.mirror_axis2)
    return tuple(int(c) for c in roi.corner_path[i])


def scan_at(mask: np.ndarray, P_t, roi: ScanRoi) -> tuple[int, int]:
    """Point on the top segment A->L1 maximising the mask sum along that point -> P_t."""
    i, _ = _scan(roi_weights(mask, roi), P_t, roi.top_segment, roi.mirror_axis2)
    return tuple(int(c) for c in roi.top_segment[i])


def joint_argmax(mask: np.ndarray, roi: ScanRoi) -> tuple[tuple[int, int], tuple[int, int], int]:
    """Exhaustive best (A_bar, P) pair; diagnostic for the two-stage scan."""
    weights = roi_weights(mask, roi)
    best = (-1, None, None)
    for a in roi.top_segment:
        for p in roi.corner_path:
            s = line_sum(weights, a, p, roi.mirror_axis2)
            if s > best[0]:
                best = (s, tuple(int(c) for c in a), tuple(int(c) for c in p))
    return best[1], best[2], best[0]


def intersect_eor(A_t, P_t, image_row: int) -> float:
    (u1, v1), (u2, v2) = A_t, P_t
    if v1 == v2:
        raise DetectionUnavailable("re-entry line is parallel to the EOR line")
    return u1 + (image_row - v1) * (u2 - u1) / (v2 - v1)


def locate_reentry(mask: np.ndarray, depth: np.ndarray, eor: EorDetection, cam: CameraModel, turn: str,
                   margin: int = 3) -> ReentryResult:
    """Full detection: ROI, both scans, intersection with the EOR row and back-projection.

    d_r is the lateral coordinate of R in the robot's ground frame, taken positive
    toward the turn side.
    """
    sign = _turn_sign(turn)
    if mask.shape != depth.shape:
        raise ValueError("mask and depth dimensions differ")
    if not eor.valid:
        return ReentryResult(False, reason="no EOR detection")
    roi = None
    try:
        roi = build_roi(mask, eor, turn, margin, apex_row=horizon_row(cam))
        P_t = scan_pt(mask, roi.A, roi)
        A_t = scan_at(mask, P_t, roi)
        u_r = intersect_eor(A_t, P_t, eor.image_row)
    except DetectionUnavailable as exc:
        return ReentryResult(False, reason=str(exc), roi=roi)
    h, w = mask.shape
    v_r = int(eor.image_row)
    if not -0.5 <= u_r <= w - 0.5:
        return ReentryResult(False, R_px=(u_r, v_r), P_t=P_t, A_t=A_t, reason="re-entry point outside image", roi=roi)
    ui = min(max(int(round(u_r)), 0), w - 1)
    z = float(depth[v_r, ui])
    if z <= 0:
        return ReentryResult(False, R_px=(u_r, v_r), P_t=P_t, A_t=A_t, reason="no depth at re-entry point", roi=roi)
    p_cam = cam.back_project(u_r, v_r, z)
    body = cam.cam_to_body(p_cam)[0]
    d_r = float(sign * (body[1] - cam.mount_y))
    if d_r <= 0:
        return ReentryResult(False, R_px=(u_r, v_r), R_3d=tuple(map(float, p_cam)), P_t=P_t, A_t=A_t,
                             reason="re-entry point on the wrong side", roi=roi)
    return ReentryResult(True, (float(u_r), v_r), tuple(map(float, p_cam)), d_r, P_t, A_t, roi=roi)
