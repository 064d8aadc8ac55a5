"""Integer midpoint line rasterization.

Pixel sets are canonical: the same pixels come back whichever endpoint is given
first, so sums along A->P and P->A agree. Exact half-pixel ties on the minor axis
round up, except that a horizontal coordinate can be rounded away from a vertical
mirror axis so left/right mirrored images rasterize to mirrored pixel sets.
A tie exactly on the axis has no symmetric choice and rounds up.
"""

from __future__ import annotations

import numpy as np


def line_pixels(p0, p1, mirror_axis2: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Pixels (xs, ys) of the segment between integer points p0 and p1, endpoints included.

    mirror_axis2 is twice the column of the vertical mirror axis (image width - 1);
    when given, x ties are resolved away from that axis.
    """
    x0, y0 = int(p0[0]), int(p0[1])
    x1, y1 = int(p1[0]), int(p1[1])
    dx, dy = x1 - x0, y1 - y0
    if dx == 0 and dy == 0:
        return np.array([x0]), np.array([y0])
    if abs(dx) >= abs(dy):
        if dx < 0:
            x0, y0, x1, y1, dx, dy = x1, y1, x0, y0, -dx, -dy
        k = np.arange(dx + 1, dtype=np.int64)
        ys = _round_minor(y0, k * dy, dx, None)
        return x0 + k, ys
    if dy < 0:
        x0, y0, x1, y1, dx, dy = x1, y1, x0, y0, -dx, -dy
    k = np.arange(dy + 1, dtype=np.int64)
    xs = _round_minor(x0, k * dx, dy, mirror_axis2)
    return xs, y0 + k


def _round_minor(m0: int, num: np.ndarray, n: int, mirror_axis2: int | None) -> np.ndarray:
    # value = m0 + num / n; rounded half up via floor((2*num + n) / (2n))
    twice = 2 * num + n
    out = m0 + np.floor_divide(twice, 2 * n)
    if mirror_axis2 is not None:
        tie = np.mod(twice, 2 * n) == 0
        if np.any(tie):
            # a tie sits at out - 0.5; keep round-up only if that is right of the axis
            left_of_axis = (2 * out - 1) < mirror_axis2
            out = np.where(tie & left_of_axis, out - 1, out)
    return out


def line_sum(image: np.ndarray, p0, p1, mirror_axis2: int | None = None) -> int:
    xs, ys = line_pixels(p0, p1, mirror_axis2)
    return int(image[ys, xs].sum())


def draw_line(image: np.ndarray, p0, p1, value=1) -> None:
    """Rasterize a segment into image in place, clipping pixels outside the bounds."""
    xs, ys = line_pixels(p0, p1)
    h, w = image.shape[:2]
    keep = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    image[ys[keep], xs[keep]] = value
