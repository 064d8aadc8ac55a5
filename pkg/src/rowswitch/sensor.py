"""Front camera stand-in: skeleton mask + depth rendering, EOR detection and scene similarity.

Frames: robot body x forward, y left, z up, origin on the ground under the body
centre. Camera frame is OpenCV style (x right, y down, z along the optical axis).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from typing import Protocol

import numpy as np
from scipy.ndimage import binary_dilation
from shapely.geometry import Polygon

from .field import FieldSpec
from .geometry import Pose2D
from .raster import draw_line


class RenderError(RuntimeError):
    pass


class StateError(RuntimeError):
    pass


@dataclass(frozen=True)
class CameraModel:
    width: int = 640
    height: int = 480
    fx: float = 460.0
    fy: float = 460.0
    cx: float = 319.5
    cy: float = 239.5
    mount_x: float = 0.263
    mount_y: float = 0.0
    mount_height: float = 0.30
    pitch: float = math.radians(25.0)
    max_range: float = 4.0  # skeleton pixels are rendered up to this ground range
    depth_max: float = 10.0
    depth_model: str = "range"  # "range" (euclidean) or "z" (optical-axis depth)

    def __post_init__(self) -> None:
        if self.fx <= 0 or self.fy <= 0 or self.width <= 0 or self.height <= 0:
            raise ValueError("camera intrinsics must be positive")
        if self.depth_model not in ("range", "z"):
            raise ValueError("depth_model must be 'range' or 'z'")

    @property
    def rotation(self) -> np.ndarray:
        """Columns are the camera axes expressed in the body frame."""
        s, c = math.sin(self.pitch), math.cos(self.pitch)
        return np.array([[0.0, -s, c], [-1.0, 0.0, 0.0], [0.0, -c, -s]])

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.mount_x, self.mount_y, self.mount_height])

    def body_to_cam(self, pts: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(pts) - self.translation) @ self.rotation

    def cam_to_body(self, pts: np.ndarray) -> np.ndarray:
        return np.atleast_2d(pts) @ self.rotation.T + self.translation

    def project(self, pts_cam: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts_cam)
        return np.column_stack([self.cx + self.fx * pts[:, 0] / pts[:, 2], self.cy + self.fy * pts[:, 1] / pts[:, 2]])

    def ray(self, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return np.stack([(u - self.cx) / self.fx, (v - self.cy) / self.fy, np.ones_like(u)], axis=-1)

    def back_project(self, u: float, v: float, depth: float) -> np.ndarray:
        """Camera-frame 3D point of pixel (u, v) at the stored depth value."""
        r = self.ray(u, v)
        if self.depth_model == "range":
            return r * (depth / np.linalg.norm(r))
        return r * depth

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class GroundTable:
    """Per-pixel ground intersection for a camera on flat ground (pose independent)."""

    gx: np.ndarray
    gy: np.ndarray
    depth: np.ndarray
    valid: np.ndarray


@lru_cache(maxsize=16)
def ground_table(cam: CameraModel) -> GroundTable:
    vv, uu = np.mgrid[0 : cam.height, 0 : cam.width]
    rays = cam.ray(uu, vv)
    d = rays @ cam.rotation.T
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(d[..., 2] < -1e-9, -cam.mount_height / d[..., 2], np.inf)
    gx = cam.mount_x + s * d[..., 0]
    gy = cam.mount_y + s * d[..., 1]
    rng = s * np.linalg.norm(rays, axis=-1)
    depth_val = rng if cam.depth_model == "range" else s
    valid = np.isfinite(s) & (rng <= cam.depth_max)
    depth = np.where(valid, depth_val, 0.0).astype(np.float32)
    for a in (gx, gy, depth, valid):
        a.setflags(write=False)
    return GroundTable(gx, gy, depth, valid)


def _clip_interval(a: float, b: float, lo: float, hi: float) -> tuple[float, float]:
    return max(lo, a), min(hi, b)


def _clip_segment_3d(p0: np.ndarray, p1: np.ndarray, cam: CameraModel, z_near: float = 0.05):
    """Clip a ground segment (body frame) to the rendered volume; returns parameter interval or None."""
    t0, t1 = 0.0, 1.0
    c0 = cam.body_to_cam(p0)[0]
    c1 = cam.body_to_cam(p1)[0]
    z0, z1 = c0[2], c1[2]
    if z0 < z_near and z1 < z_near:
        return None
    if z0 < z_near or z1 < z_near:
        tz = (z_near - z0) / (z1 - z0)
        t0, t1 = (_clip_interval(t0, t1, tz, 1.0) if z0 < z_near else _clip_interval(t0, t1, 0.0, tz))
    # ground range from the camera's footprint point: |q0 + t*dq| <= max_range
    q0 = p0[:2] - cam.translation[:2]
    dq = (p1 - p0)[:2]
    a = float(dq @ dq)
    b = 2.0 * float(q0 @ dq)
    c = float(q0 @ q0) - cam.max_range**2
    if a < 1e-15:
        if c > 0:
            return None
    else:
        disc = b * b - 4 * a * c
        if disc <= 0:
            return None
        r = math.sqrt(disc)
        t0, t1 = _clip_interval(t0, t1, (-b - r) / (2 * a), (-b + r) / (2 * a))
    if t1 <= t0:
        return None
    return t0, t1


def _clip_to_rect(a: np.ndarray, b: np.ndarray, w: int, h: int):
    """Liang-Barsky clip of a 2D segment to the pixel-centre rectangle [-0.5, w-0.5] x [-0.5, h-0.5]."""
    x0, y0 = a
    dx, dy = b[0] - a[0], b[1] - a[1]
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x0 + 0.5), (dx, w - 0.5 - x0), (-dy, y0 + 0.5), (dy, h - 0.5 - y0)):
        if abs(p) < 1e-12:
            if q < 0:
                return None
            continue
        r = q / p
        if p < 0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
        if t0 > t1:
            return None
    return a + t0 * (b - a), a + t1 * (b - a)


def _segment_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Distance from the body origin to segment ab."""
    d = b - a
    dd = float(d @ d)
    t = 0.0 if dd == 0 else min(max(-float(a @ d) / dd, 0.0), 1.0)
    return float(np.hypot(*(a + t * d)))


def project_segment(p0_body: np.ndarray, p1_body: np.ndarray, cam: CameraModel):
    """Image-space endpoints (float) of the visible part of a ground segment, or None."""
    p0 = np.array([p0_body[0], p0_body[1], 0.0])
    p1 = np.array([p1_body[0], p1_body[1], 0.0])
    interval = _clip_segment_3d(p0, p1, cam)
    if interval is None:
        return None
    t0, t1 = interval
    ends = np.array([p0 + t0 * (p1 - p0), p0 + t1 * (p1 - p0)])
    uv = cam.project(cam.body_to_cam(ends))
    return _clip_to_rect(uv[0], uv[1], cam.width, cam.height)


def render(field: FieldSpec, robot: Pose2D, cam: CameraModel, *, dilate: int = 0, mask_noise: float = 0.0,
           rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Skeleton mask (uint8, 1 = row centreline) and depth image (float32 metres, 0 = invalid)."""
    table = ground_table(cam)
    if not table.valid.any():
        raise RenderError("camera does not see the ground plane")
    mask = np.zeros((cam.height, cam.width), dtype=np.uint8)
    reach = cam.max_range + float(np.hypot(cam.mount_x, cam.mount_y))
    for row in field.rows:
        for a, b in row.segments():
            body = robot.to_body(np.array([a, b]))
            if _segment_distance(body[0], body[1]) > reach:
                continue
            seg = project_segment(body[0], body[1], cam)
            if seg is None:
                continue
            ua, ub = np.rint(seg[0]).astype(int), np.rint(seg[1]).astype(int)
            draw_line(mask, ua, ub, 1)
    if dilate > 0:
        mask = binary_dilation(mask, iterations=dilate).astype(np.uint8)
    if mask_noise > 0:
        if rng is None:
            raise ValueError("mask noise needs an rng")
        flips = (rng.random(mask.shape) < mask_noise) & table.valid
        mask = np.where(flips, 1 - mask, mask).astype(np.uint8)
    mask &= table.valid.astype(np.uint8)
    return mask, table.depth.copy()


# -- end-of-row detection -------------------------------------------------

@dataclass(frozen=True)
class CentralTrace:
    """Image line u = a + b*v fitted to the current row's skeleton."""

    a: float
    b: float
    v_top: int
    v_bottom: int

    def u_at(self, v: float) -> float:
        return self.a + self.b * v

    @property
    def top(self) -> tuple[int, int]:
        return int(round(self.u_at(self.v_top))), self.v_top

    @property
    def bottom(self) -> tuple[int, int]:
        return int(round(self.u_at(self.v_bottom))), self.v_bottom


@dataclass(frozen=True)
class EorDetection:
    image_row: int = -1
    valid: bool = False
    trace: CentralTrace | None = dc_field(default=None, compare=False)


def trace_central_row(mask: np.ndarray, window: int = 5, min_support: int = 3, tol: float = 2.5,
                      slack: float = 0.1, short_seed: int = 20) -> CentralTrace | None:
    """Fit the skeleton of the row the camera is centred on.

    Seeds from the lowest skeleton pixels in the central third of the image
    (a seed shorter than `short_seed` rows gets its slope from a vote over
    lines through it), grows the fit upward, and takes as top the highest row whose `window`-row
    neighbourhood below has at least `min_support` rows with line pixels, which
    bridges gaps and ignores isolated noise above the row end.
    """
    h, w = mask.shape
    vs, us = np.nonzero(mask)
    central = (us >= w / 3) & (us < 2 * w / 3)
    if not central.any():
        return None
    cv, cu = vs[central], us[central]
    band = cv >= cv.max() - 30
    hist_u = cu[band]
    bins = np.bincount(hist_u // 4)
    seed_u = (int(np.argmax(bins)) * 4 + 1.5)
    sel = band & (np.abs(cu - seed_u) <= 6)
    if sel.sum() < 2:
        return None
    a, b = _fit_u_of_v(cv[sel], cu[sel])
    v_seed = int(cv[sel].max())
    if np.ptp(cv[sel]) < short_seed:
        # too short to trust its own slope: take the best-supported line through it
        v0 = float(cv[sel].mean())
        u0 = a + b * v0
        above = vs <= v_seed
        slopes = np.linspace(-2.0, 2.0, 401)
        hits = np.abs((us[above] - u0)[None, :] - slopes[:, None] * (vs[above] - v0)[None, :]) <= tol
        b = float(slopes[int(np.argmax(hits.sum(axis=1)))])
        a = u0 - b * v0
    span = 30
    v_fit = int(cv[sel].min())
    while True:
        # a slope fitted on a short stub (say, in front of a gap) extrapolates poorly, so the
        # acceptance band widens with the distance above the pixels fitted so far
        reach = np.maximum(v_fit - vs, 0)
        near = (vs <= v_seed) & (vs >= v_seed - span) & (np.abs(us - (a + b * vs)) <= tol + 1.0 + slack * reach)
        if near.sum() >= 2 and np.ptp(vs[near]) >= min(short_seed, np.ptp(cv[sel]) + 1):
            a, b = _fit_u_of_v(vs[near], us[near])
            v_fit = min(v_fit, int(vs[near].min()))
        if span >= h:
            break
        span *= 2
    on_line = (vs <= v_seed + 1) & (np.abs(us - (a + b * vs)) <= tol)
    rows_hit = np.zeros(h + window, dtype=np.int32)
    rows_hit[np.unique(vs[on_line])] = 1
    if rows_hit.sum() == 0:
        return None
    support = np.convolve(rows_hit, np.ones(window, dtype=np.int32), mode="full")[window - 1 : window - 1 + h]
    # support[v] = rows hit in v .. v+window-1
    good = np.nonzero((support >= min_support) & (rows_hit[:h] == 1))[0]
    if len(good) == 0:
        return None
    v_top = int(good.min())
    v_bottom = int(vs[on_line].max())
    return CentralTrace(a, b, v_top, v_bottom)


def _fit_u_of_v(v: np.ndarray, u: np.ndarray) -> tuple[float, float]:
    if np.ptp(v) == 0:
        return float(np.mean(u)), 0.0
    b, a = np.polyfit(v.astype(float), u.astype(float), 1)
    return float(a), float(b)


def detect_eor(mask: np.ndarray, window: int = 5) -> EorDetection:
    trace = trace_central_row(mask, window=window)
    if trace is None:
        return EorDetection()
    return EorDetection(trace.v_top, True, trace)


def pixel_to_ground(cam: CameraModel, u: float, v: float) -> np.ndarray | None:
    """Body-frame ground point seen at a (sub)pixel; None above the horizon."""
    d = cam.rotation @ cam.ray(u, v)
    if d[2] >= -1e-9:
        return None
    s = -cam.mount_height / d[2]
    return np.array([cam.mount_x + s * d[0], cam.mount_y + s * d[1]])


def eor_ground_point(cam: CameraModel, eor: EorDetection) -> np.ndarray | None:
    if not eor.valid or eor.trace is None:
        return None
    return pixel_to_ground(cam, eor.trace.u_at(eor.image_row), eor.image_row)


# -- scene similarity -----------------------------------------------------

@lru_cache(maxsize=16)
def footprint_body(cam: CameraModel) -> tuple[tuple[float, float], ...]:
    """Ground quadrilateral seen by the camera, cut at max_range along the optical centre column."""
    bottom = cam.height - 1
    top = None
    for v in range(bottom, -1, -1):
        g = pixel_to_ground(cam, cam.cx, v)
        if g is None or math.hypot(g[0] - cam.mount_x, g[1] - cam.mount_y) > cam.max_range:
            break
        top = v
    if top is None or top == bottom:
        raise RenderError("camera footprint is empty")
    corners = [(0, bottom), (cam.width - 1, bottom), (cam.width - 1, top), (0, top)]
    return tuple(tuple(map(float, pixel_to_ground(cam, u, v))) for u, v in corners)


def near_edge_distance(cam: CameraModel) -> float:
    """Forward body-frame distance of the closest visible ground on the optical centre column."""
    return float(pixel_to_ground(cam, cam.cx, cam.height - 1)[0])


@dataclass(frozen=True)
class SceneReference:
    """Ground region remembered at state A: a band of headland just beyond the detected EOR."""

    pose: Pose2D
    eor_forward: float  # body-frame forward distance of the EOR at capture
    depth: float
    half_width: float

    def polygon(self) -> Polygon:
        p = self.pose
        x0, x1 = self.eor_forward, self.eor_forward + self.depth
        hw = self.half_width
        return Polygon([tuple(p.to_world(x, y)) for x, y in ((x0, -hw), (x1, -hw), (x1, hw), (x0, hw))])


class SimilarityScorer(Protocol):
    threshold: float

    def capture(self, mask: np.ndarray, eor: EorDetection, pose: Pose2D, cam: CameraModel): ...

    def score(self, reference, pose: Pose2D, field: FieldSpec | None = None) -> float: ...


@dataclass
class FootprintScorer:
    """Fraction of the remembered headland band still inside the current camera footprint.

    The band depth is chosen from the camera geometry so the score crosses
    `threshold` when the robot's front edge reaches the EOR on a straight approach.
    """

    cam: CameraModel
    front_offset: float
    threshold: float = 0.3
    half_width: float = 0.15
    band_depth: float | None = None

    def __post_init__(self) -> None:
        if self.band_depth is None:
            self.band_depth = calibrated_band_depth(self.cam, self.front_offset, self.threshold)
        self._footprint = footprint_body(self.cam)

    def capture(self, mask, eor: EorDetection, pose: Pose2D, cam: CameraModel | None = None,
                eor_error: float = 0.0) -> SceneReference:
        g = eor_ground_point(cam or self.cam, eor)
        if g is None:
            raise StateError("cannot capture a reference without a valid EOR detection")
        return SceneReference(pose, float(g[0]) + eor_error, float(self.band_depth), self.half_width)

    def footprint(self, pose: Pose2D) -> Polygon:
        return Polygon([tuple(pose.to_world(x, y)) for x, y in self._footprint])

    def score(self, reference: SceneReference | None, pose: Pose2D, field: FieldSpec | None = None) -> float:
        if reference is None:
            raise StateError("no reference scene captured")
        ref = reference.polygon()
        return float(ref.intersection(self.footprint(pose)).area / ref.area)


def calibrated_band_depth(cam: CameraModel, front_offset: float, threshold: float) -> float:
    gap = near_edge_distance(cam) - front_offset
    if threshold >= 1.0:
        raise ValueError("threshold must be below 1")
    if gap <= 0:
        return 0.3
    return gap / (1.0 - max(threshold, 0.0))


def similarity_score(reference: SceneReference | None, current: Pose2D, field: FieldSpec | None,
                     scorer: SimilarityScorer) -> float:
    return scorer.score(reference, current, field)
