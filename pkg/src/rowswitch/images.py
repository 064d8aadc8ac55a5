"""Reading and writing detector inputs, and the annotated overlay.

Masks are 8-bit PNGs (any non-zero pixel is skeleton). Depth images are 16-bit
PNGs in millimetres, 0 = no depth. Intrinsics travel in a JSON sidecar holding
the CameraModel fields.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .reentry import ReentryResult
from .sensor import CameraModel, EorDetection


def save_mask(path, mask: np.ndarray) -> None:
    Image.fromarray(np.where(mask > 0, 255, 0).astype(np.uint8), mode="L").save(path)


def load_mask(path) -> np.ndarray:
    img = np.asarray(Image.open(path))
    if img.ndim == 3:
        img = img[..., :3].max(axis=2)
    return (img > 0).astype(np.uint8)


def save_depth(path, depth: np.ndarray) -> None:
    """Metres -> 16-bit millimetre PNG (clipped at 65.535 m)."""
    mm = np.clip(np.rint(np.asarray(depth, dtype=float) * 1000.0), 0, 65535).astype(np.uint16)
    Image.fromarray(mm).save(path)


def load_depth(path) -> np.ndarray:
    """16-bit millimetre PNG -> float32 metres."""
    img = np.asarray(Image.open(path))
    if img.ndim != 2:
        raise ValueError(f"{path}: depth image must be single-channel")
    return img.astype(np.float32) / 1000.0


def save_intrinsics(path, cam: CameraModel) -> None:
    Path(path).write_text(json.dumps(cam.to_dict(), indent=1) + "\n")


def load_intrinsics(path) -> CameraModel:
    data = json.loads(Path(path).read_text())
    known = CameraModel.__dataclass_fields__
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"{path}: unknown intrinsics keys {sorted(unknown)}")
    return CameraModel(**data)


def overlay(mask: np.ndarray, result: ReentryResult, eor: EorDetection | None = None) -> Image.Image:
    """RGB picture of the mask with the scan region, the A_t-P_t line and R drawn on top."""
    h, w = mask.shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[mask > 0] = (255, 255, 255)
    roi = result.roi
    if roi is not None:
        tint = roi.region & (mask == 0)
        rgb[tint] = (40, 40, 90)
    img = Image.fromarray(rgb, mode="RGB")
    d = ImageDraw.Draw(img)
    if eor is not None and eor.valid:
        d.line([(0, eor.image_row), (w - 1, eor.image_row)], fill=(255, 160, 0))
    if roi is not None:
        d.line([roi.A, roi.B], fill=(0, 200, 255))
    if result.A_t is not None and result.P_t is not None:
        d.line([tuple(result.A_t), tuple(result.P_t)], fill=(0, 255, 0), width=2)
    if result.R_px is not None:
        u, v = result.R_px
        d.ellipse([u - 5, v - 5, u + 5, v + 5], outline=(255, 0, 0), width=2)
    return img
