"""Synthetic arable field: straight crop rows with gaps, a headland strip and its roughness map."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy.ndimage import gaussian_filter

from .geometry import line_intersection, point_line_distance, unit


class ConfigurationError(ValueError):
    pass


class DegenerateRowError(ValueError):
    pass


@dataclass(frozen=True)
class Line:
    point: tuple[float, float]
    direction: tuple[float, float]

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.point, dtype=float)

    @property
    def d(self) -> np.ndarray:
        return np.asarray(self.direction, dtype=float)


# Regression lines carry the same data as any other line.
RegressionLine = Line


@dataclass(frozen=True)
class CropRow:
    index: int
    start: tuple[float, float]
    end: tuple[float, float]
    gaps: tuple[tuple[float, float], ...] = ()

    @property
    def length(self) -> float:
        return float(math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1]))

    @property
    def direction(self) -> np.ndarray:
        return unit(np.subtract(self.end, self.start))

    def point_at(self, t: float) -> np.ndarray:
        return np.asarray(self.start) + t * (np.asarray(self.end) - np.asarray(self.start))

    def planted_intervals(self) -> list[tuple[float, float]]:
        """Complement of the gaps in [0, 1], in order."""
        out = []
        cursor = 0.0
        for a, b in sorted(self.gaps):
            if a > cursor:
                out.append((cursor, a))
            cursor = max(cursor, b)
        if cursor < 1.0:
            out.append((cursor, 1.0))
        return out

    def segments(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(self.point_at(a), self.point_at(b)) for a, b in self.planted_intervals()]


@dataclass(frozen=True, eq=False)
class RoughnessMap:
    origin: tuple[float, float]
    cell: float
    values: np.ndarray  # (ny, nx), dimensionless 0..1
    seed: int = 0

    def at(self, x: float, y: float) -> float:
        j = int(math.floor((x - self.origin[0]) / self.cell))
        i = int(math.floor((y - self.origin[1]) / self.cell))
        ny, nx = self.values.shape
        if 0 <= i < ny and 0 <= j < nx:
            return float(self.values[i, j])
        return 0.0


@dataclass(frozen=True)
class HeadlandBuffer:
    row_index: int
    polygon: tuple[tuple[float, float], ...]  # eor-lower, eor-upper, edge-upper, edge-lower


@dataclass
class FieldConfig:
    row_count: int = 10
    nominal_inter_row: float = 0.65
    row_length: float = 8.0
    spacing_jitter: float = 0.15
    angle_jitter_deg: float = 1.5
    gap_count: int = 2
    gap_width: float = 0.3
    gap_end_margin: float = 0.5  # gaps stay this far from both row ends, so a gap never fakes the EOR
    headland_depth: float = 2.0
    roughness_cell: float = 0.25
    roughness_smoothing: float = 1.5
    roughness_scale: float = 1.0
    roughness_exponent: float = 1.0
    roughness_margin: float = 1.5

    def validate(self) -> None:
        if self.row_count < 2:
            raise ConfigurationError("row_count must be >= 2")
        for name in ("nominal_inter_row", "row_length", "headland_depth", "roughness_cell"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if not 0 <= self.spacing_jitter < 1:
            raise ConfigurationError("spacing_jitter must be in [0, 1)")
        if self.angle_jitter_deg < 0 or self.gap_count < 0 or self.gap_width < 0:
            raise ConfigurationError("angle_jitter_deg, gap_count and gap_width must be non-negative")
        if self.gap_end_margin < 0:
            raise ConfigurationError("gap_end_margin must be non-negative")
        if self.gap_count and self.gap_count * self.gap_width >= self.row_length - 2 * self.gap_end_margin:
            raise ConfigurationError("gaps do not fit between the row-end margins")
        if not 0 <= self.roughness_scale <= 1:
            raise ConfigurationError("roughness_scale must be in [0, 1]")


@dataclass(frozen=True)
class FieldSpec:
    rows: tuple[CropRow, ...]
    nominal_inter_row: float
    eor_line: Line
    field_edge: Line
    roughness: RoughnessMap
    config: dict[str, Any] = dc_field(default_factory=dict, compare=False)

    def row(self, index: int) -> CropRow:
        if not 0 <= index < len(self.rows):
            raise IndexError(f"row index {index} outside 0..{len(self.rows) - 1}")
        return self.rows[index]

    @property
    def headland_depth(self) -> float:
        return abs(point_line_distance(self.field_edge.p, self.eor_line.p, self.eor_line.d))

    def roughness_at(self, x: float, y: float) -> float:
        return self.roughness.at(x, y)

    def row_offset(self, index: int, point) -> float:
        """Signed perpendicular offset of point from a row's line, positive toward higher indices."""
        row = self.row(index)
        return -point_line_distance(point, np.asarray(row.end), row.direction)

    def nearest_row(self, point) -> tuple[int, float]:
        offsets = [self.row_offset(r.index, point) for r in self.rows]
        i = int(np.argmin(np.abs(offsets)))
        return i, offsets[i]

    def depth_past_eor(self, point) -> float:
        """Distance of point beyond the EOR line into the headland (negative inside the field)."""
        side = 1.0 if point_line_distance(self.field_edge.p, self.eor_line.p, self.eor_line.d) > 0 else -1.0
        return side * point_line_distance(point, self.eor_line.p, self.eor_line.d)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        return {
            "rows": [
                {"index": r.index, "start": list(r.start), "end": list(r.end), "gaps": [list(g) for g in r.gaps]}
                for r in self.rows
            ],
            "nominal_inter_row": self.nominal_inter_row,
            "eor_line": {"point": list(self.eor_line.point), "direction": list(self.eor_line.direction)},
            "field_edge": {"point": list(self.field_edge.point), "direction": list(self.field_edge.direction)},
            "roughness": {
                "origin": list(self.roughness.origin),
                "cell": self.roughness.cell,
                "seed": self.roughness.seed,
                "values": self.roughness.values.tolist(),
            },
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FieldSpec":
        rows = tuple(
            CropRow(
                index=int(r["index"]),
                start=tuple(map(float, r["start"])),
                end=tuple(map(float, r["end"])),
                gaps=tuple(tuple(map(float, g)) for g in r.get("gaps", [])),
            )
            for r in data["rows"]
        )
        rough = data.get("roughness") or {}
        values = np.asarray(rough.get("values", [[0.0]]), dtype=float)
        values.setflags(write=False)
        spec = cls(
            rows=rows,
            nominal_inter_row=float(data["nominal_inter_row"]),
            eor_line=_line_from(data["eor_line"]),
            field_edge=_line_from(data["field_edge"]),
            roughness=RoughnessMap(
                origin=tuple(map(float, rough.get("origin", (0.0, 0.0)))),
                cell=float(rough.get("cell", 1.0)),
                values=values,
                seed=int(rough.get("seed", 0)),
            ),
            config=dict(data.get("config", {})),
        )
        validate_field(spec)
        return spec

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "FieldSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _line_from(d: dict[str, Any]) -> Line:
    return Line(tuple(map(float, d["point"])), tuple(map(float, unit(np.asarray(d["direction"], dtype=float)))))


def _sample_gaps(rng: np.random.Generator, count: int, width: float, margin: float = 0.0) -> tuple[tuple[float, float], ...]:
    """`count` disjoint gaps of fractional `width`, uniformly placed in [margin, 1 - margin]."""
    if count == 0 or width == 0:
        return ()
    for _ in range(1000):
        starts = np.sort(rng.uniform(margin, 1.0 - margin - width, size=count))
        if count == 1 or np.all(np.diff(starts) > width):
            return tuple((float(s), float(s + width)) for s in starts)
    raise ConfigurationError("could not place disjoint gaps; reduce gap_count or gap_width")


def generate_field(config: FieldConfig, seed: int) -> FieldSpec:
    """Parallel straight rows along +y, EOR at y = row_length, headland beyond it.

    Rows are indexed by increasing x. Spacing and planting angle are jittered
    uniformly; gaps are placed uniformly along each row, clear of its ends.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    n = config.row_count
    spacing = config.nominal_inter_row * rng.uniform(1 - config.spacing_jitter, 1 + config.spacing_jitter, size=n - 1)
    if config.spacing_jitter == 0:
        spacing = np.full(n - 1, config.nominal_inter_row)
    xs = np.concatenate([[0.0], np.cumsum(spacing)])
    half_jitter = math.radians(config.angle_jitter_deg) / 2
    angles = rng.uniform(-half_jitter, half_jitter, size=n) if half_jitter > 0 else np.zeros(n)
    gap_frac = config.gap_width / config.row_length

    L = config.row_length
    rows = []
    for i in range(n):
        end = (float(xs[i]), L)
        d = (-math.sin(angles[i]), math.cos(angles[i]))
        start = (float(xs[i] - L * d[0]), float(L - L * d[1]))
        rows.append(CropRow(i, start, end, _sample_gaps(rng, config.gap_count, gap_frac, config.gap_end_margin / L)))

    margin = config.roughness_margin
    x0, x1 = float(xs[0] - margin), float(xs[-1] + margin)
    nx = max(1, int(math.ceil((x1 - x0) / config.roughness_cell)))
    ny = max(1, int(math.ceil(config.headland_depth / config.roughness_cell)))
    rough_seed = int(rng.integers(0, 2**31 - 1))
    values = _smooth_noise(np.random.default_rng(rough_seed), (ny, nx), config.roughness_smoothing)
    values = config.roughness_scale * values**config.roughness_exponent
    values.setflags(write=False)

    spec = FieldSpec(
        rows=tuple(rows),
        nominal_inter_row=config.nominal_inter_row,
        eor_line=Line((0.0, L), (1.0, 0.0)),
        field_edge=Line((0.0, L + config.headland_depth), (1.0, 0.0)),
        roughness=RoughnessMap((x0, L), config.roughness_cell, values, rough_seed),
        config={**asdict(config), "seed": seed},
    )
    validate_field(spec, config)
    return spec


def _smooth_noise(rng: np.random.Generator, shape: tuple[int, int], sigma: float) -> np.ndarray:
    raw = gaussian_filter(rng.standard_normal(shape), sigma=sigma, mode="reflect") if sigma > 0 else rng.standard_normal(shape)
    lo, hi = float(raw.min()), float(raw.max())
    if hi - lo < 1e-12:
        return np.zeros(shape)
    return (raw - lo) / (hi - lo)


def validate_field(spec: FieldSpec, config: FieldConfig | None = None) -> None:
    if len(spec.rows) < 2:
        raise ConfigurationError("a field needs at least two rows")
    for r in spec.rows:
        if r.length <= 0:
            raise ConfigurationError(f"row {r.index} has zero length")
        cursor = -1.0
        for a, b in sorted(r.gaps):
            if not (0.0 <= a < b <= 1.0) or a < cursor:
                raise ConfigurationError(f"row {r.index} has invalid or overlapping gaps")
            cursor = b
    if spec.headland_depth <= 0:
        raise ConfigurationError("headland depth must be positive")
    if config is not None:
        lo = config.nominal_inter_row * (1 - config.spacing_jitter) - 1e-9
        hi = config.nominal_inter_row * (1 + config.spacing_jitter) + 1e-9
        for a, b in zip(spec.rows, spec.rows[1:]):
            # spacing is sampled at the EOR ends, along the EOR line
            gap = abs(float(np.dot(np.subtract(b.end, a.end), spec.eor_line.d)))
            if not lo <= gap <= hi:
                raise ConfigurationError(f"rows {a.index}/{b.index} spacing {gap:.3f} outside jitter band")


def fit_regression_line(points: np.ndarray) -> Line:
    """Orthogonal least-squares line through 2D points.

    The direction is oriented from the first point toward the last one.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise DegenerateRowError("need at least two points to fit a line")
    centroid = pts.mean(axis=0)
    _, s, vt = np.linalg.svd(pts - centroid, full_matrices=False)
    if s[0] < 1e-12:
        raise DegenerateRowError("points are coincident")
    d = vt[0]
    if np.dot(pts[-1] - pts[0], d) < 0:
        d = -d
    return Line(tuple(centroid), tuple(d / np.linalg.norm(d)))


def row_samples(row: CropRow, spacing: float = 0.05) -> np.ndarray:
    s = np.arange(0.0, row.length + 1e-9, spacing)
    t = s / row.length
    keep = np.ones_like(t, dtype=bool)
    for a, b in row.gaps:
        # a gap is open at its inner edges but swallows a row end it reaches
        keep &= ~(((t > a) | (a <= 0.0)) & ((t < b) | (b >= 1.0)) & (t >= a) & (t <= b))
    return np.array([row.point_at(x) for x in t[keep]])


def ground_truth_line(field: FieldSpec, row_index: int, spacing: float = 0.05) -> Line:
    row = field.row(row_index)
    pts = row_samples(row, spacing)
    if len(pts) < 2:
        raise DegenerateRowError(f"row {row_index} has no planted segments to regress")
    return fit_regression_line(pts)


def _mid_line(field: FieldSpec, row_index: int, side: int) -> tuple[np.ndarray, np.ndarray]:
    """Mid-line between a row and its neighbour on `side` (+1 higher index, -1 lower).

    Edge rows without that neighbour use a line at nominal_inter_row / 2.
    """
    row = field.row(row_index)
    other = row_index + side
    if 0 <= other < len(field.rows):
        nb = field.row(other)
        return (np.asarray(row.end) + np.asarray(nb.end)) / 2, unit(row.direction + nb.direction)
    d = row.direction
    normal = np.array([d[1], -d[0]])  # toward higher row indices
    return np.asarray(row.end) + side * field.nominal_inter_row / 2 * normal, d


def headland_buffer(field: FieldSpec, row_index: int) -> HeadlandBuffer:
    lo = _mid_line(field, row_index, -1)
    hi = _mid_line(field, row_index, +1)
    verts = []
    for (p, d), boundary in ((lo, field.eor_line), (hi, field.eor_line), (hi, field.field_edge), (lo, field.field_edge)):
        q = line_intersection(p, d, boundary.p, boundary.d)
        if q is None:
            raise ConfigurationError("mid-line parallel to headland boundary")
        verts.append((float(q[0]), float(q[1])))
    return HeadlandBuffer(row_index, tuple(verts))


def inter_row_distance(field: FieldSpec, row_a: int, row_b: int) -> float:
    """Perpendicular spacing of two adjacent rows' regression lines at their EOR-side ends.

    Each line's EOR end is the projection of the row's end point onto it; the result
    is the mean of the two point-to-other-line distances, so it is symmetric in its
    arguments and equals the spacing exactly for parallel rows.
    """
    if abs(row_a - row_b) != 1:
        raise ValueError("inter_row_distance is defined for adjacent rows only")
    la, lb = ground_truth_line(field, row_a), ground_truth_line(field, row_b)

    def eor_end(line: Line, row: CropRow) -> np.ndarray:
        return line.p + np.dot(np.asarray(row.end) - line.p, line.d) * line.d

    pa = eor_end(la, field.row(row_a))
    pb = eor_end(lb, field.row(row_b))
    return 0.5 * (abs(point_line_distance(pa, lb.p, lb.d)) + abs(point_line_distance(pb, la.p, la.d)))


def spacing_stats(field: FieldSpec) -> dict[str, float]:
    gaps = [inter_row_distance(field, i, i + 1) for i in range(len(field.rows) - 1)]
    return {"rows": len(field.rows), "mean": float(np.mean(gaps)), "min": float(np.min(gaps)), "max": float(np.max(gaps))}


def field_from_rows(rows: Sequence[CropRow], nominal_inter_row: float, eor_y: float, headland_depth: float) -> FieldSpec:
    """Hand-built field with a horizontal EOR at eor_y and no roughness (test fixtures)."""
    values = np.zeros((1, 1))
    values.setflags(write=False)
    spec = FieldSpec(
        rows=tuple(rows),
        nominal_inter_row=nominal_inter_row,
        eor_line=Line((0.0, eor_y), (1.0, 0.0)),
        field_edge=Line((0.0, eor_y + headland_depth), (1.0, 0.0)),
        roughness=RoughnessMap((0.0, eor_y), 1.0, values),
    )
    validate_field(spec)
    return spec
