import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import oracle_pixels
from rowswitch.raster import draw_line, line_pixels, line_sum

coord = st.integers(-40, 200)
pt = st.tuples(coord, coord)


def as_list(xs, ys):
    return list(zip(xs.tolist(), ys.tolist()))


@given(pt, pt)
def test_matches_exact_rational_rasteriser(p0, p1):
    assert sorted(as_list(*line_pixels(p0, p1))) == sorted(oracle_pixels(p0, p1))


@given(pt, pt, st.integers(0, 400))
def test_matches_oracle_with_mirror_axis(p0, p1, axis2):
    assert sorted(as_list(*line_pixels(p0, p1, axis2))) == sorted(oracle_pixels(p0, p1, axis2))


@given(pt, pt)
def test_direction_does_not_matter(p0, p1):
    assert sorted(as_list(*line_pixels(p0, p1))) == sorted(as_list(*line_pixels(p1, p0)))


@given(pt, pt)
def test_endpoints_and_connectivity(p0, p1):
    px = as_list(*line_pixels(p0, p1))
    assert tuple(p0) in px and tuple(p1) in px
    assert len(px) == max(abs(p1[0] - p0[0]), abs(p1[1] - p0[1])) + 1
    pts = np.array(sorted(px, key=lambda q: (q[0], q[1]) if abs(p1[0] - p0[0]) >= abs(p1[1] - p0[1]) else (q[1], q[0])))
    steps = np.abs(np.diff(pts, axis=0))
    assert (steps <= 1).all()


@settings(max_examples=50)
@given(st.integers(0, 79), st.integers(0, 59), st.integers(0, 79), st.integers(0, 59))
def test_mirrored_segment_gives_mirrored_pixels(x0, y0, x1, y1):
    w = 80
    a = sorted(as_list(*line_pixels((x0, y0), (x1, y1), w - 1)))
    b = sorted((w - 1 - x, y) for x, y in as_list(*line_pixels((w - 1 - x0, y0), (w - 1 - x1, y1), w - 1)))
    # a tie exactly on the axis (x = 39.5) has no mirror-symmetric choice; those pixels are excluded
    on_axis = {y for x, y in a if x in (39, 40)} | {y for x, y in b if x in (39, 40)}
    assert [p for p in a if p[1] not in on_axis] == [p for p in b if p[1] not in on_axis]


def test_tie_on_the_mirror_axis_rounds_up():
    # x runs 35 -> 40 over 10 rows, so row 9 lands on 39.5, the axis of an 80-wide image
    xs, ys = line_pixels((35, 0), (40, 10), 79)
    assert xs[ys == 9][0] == 40
    assert as_list(xs, ys) == oracle_pixels((35, 0), (40, 10), 79)


def test_sum_is_symmetric():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 2, size=(40, 50))
    for _ in range(100):
        p, q = rng.integers(0, 40, 2), rng.integers(0, 40, 2)
        assert line_sum(img, p, q) == line_sum(img, q, p)


def test_draw_line_clips_outside_pixels():
    img = np.zeros((10, 10), dtype=np.uint8)
    draw_line(img, (-5, 5), (20, 5))
    assert img[5].sum() == 10 and img.sum() == 10


def test_single_point():
    xs, ys = line_pixels((3, 4), (3, 4))
    assert as_list(xs, ys) == [(3, 4)]
