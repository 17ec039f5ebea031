import math

import numpy as np
import pytest
import shapely
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import Polygon, box

import oracles
from conftest import cached_region, random_polygon, stacked_rectangles
from vertcover.errors import DegenerateLine, OriginOutside, SelfIntersection
from vertcover.geometry import (Region, area, max_vertical_segment, monotone_reachable_grid,
                                region_from_polyline, steiner_symmetrize, vertical_cross_section)
from vertcover.maps import koebe, strip_map, trace_level_curve

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]


def square_with_hole():
    return Region([[(-1, -1), (1, -1), (1, 1), (-1, 1)]], [[(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]])


def disk(n=512, r=1.0):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return Region([np.column_stack([r * np.cos(t), r * np.sin(t)])])


# -- region_from_polyline / area ----------------------------------------------------


def test_region_from_square_polyline():
    R = region_from_polyline(np.array([0, 1, 1 + 1j, 1j]))
    assert area(R) == pytest.approx(1.0)
    # clockwise input is reoriented
    R2 = region_from_polyline(np.array([0, 1j, 1 + 1j, 1]))
    assert area(R2) == pytest.approx(1.0)


def test_region_from_bowtie_raises():
    with pytest.raises(SelfIntersection):
        region_from_polyline(np.array([0, 1 + 1j, 1, 1j]))


def test_strip_region_symmetric():
    R = cached_region("strip", 0.5)
    assert R.contains(0j)
    pts = R.shells[0][:, 0] + 1j * R.shells[0][:, 1]
    inner = 0.999 * pts
    assert R.contains(-inner).all() and R.contains(inner.conjugate()).all()


def test_koebe_region_leftmost():
    R = cached_region("koebe", 0.5)
    assert R.contains(0j)
    assert R.bounds[0] == pytest.approx(oracles.KOEBE_LEFT_HALF, abs=1e-6)


def test_area_examples():
    assert area(Region([SQUARE])) == pytest.approx(1.0)
    assert area(square_with_hole()) == pytest.approx(3.0)
    half = Region([[(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)]],
                  [[(-0.25, -0.25), (0.25, -0.25), (0.25, 0.25), (-0.25, 0.25)]])
    assert area(half) == pytest.approx(0.75)


@pytest.mark.parametrize("name", ["strip", "koebe", "half_plane", "two_slit", "poly_convex"])
def test_small_region_area(name):
    r = 1e-3
    assert area(cached_region(name, r, 1e-10)) == pytest.approx(math.pi * r * r, rel=5e-3)


# -- cross sections ------------------------------------------------------------------------


def test_cross_section_examples():
    cs = vertical_cross_section(Region([SQUARE]), 0.5)
    assert cs.intervals.tolist() == [[0.0, 1.0]] and cs.measure == 1.0
    cs = vertical_cross_section(square_with_hole(), 0.0)
    assert cs.intervals.tolist() == [[-1.0, -0.5], [0.5, 1.0]]
    R = cached_region("strip", 0.9)
    cs = vertical_cross_section(R, 0.0)
    assert len(cs.intervals) == 1
    lo, hi = cs.intervals[0]
    assert lo == pytest.approx(-hi, abs=1e-12)
    assert cs.measure < math.pi / 2
    assert cs.measure == pytest.approx(oracles.STRIP_SECTION[0.9], abs=1e-5)


def test_cross_section_one_sided_limits():
    # a step: left part taller than the right part
    R = Region([[(0, 0), (2, 0), (2, 1), (1, 1), (1, 3), (0, 3)]])
    assert R.section(1.0, "right").measure == pytest.approx(1.0)
    assert R.section(1.0, "left").measure == pytest.approx(3.0)


def test_cross_section_generic_mode():
    R = Region([SQUARE])
    cs = vertical_cross_section(R, 0.5, generic=True)
    assert cs.measure == 1.0
    # a vertex abscissa is nudged into the open slab
    cs = vertical_cross_section(R, 1.0, generic=True)
    assert cs.u != 1.0
    dense = Region([[(x, 0.0) for x in np.linspace(0, 1, 6)] + [(1, 1), (0, 1)]])
    tight = Region(dense.shells, snap_tol=0.1)
    with pytest.raises(DegenerateLine):
        vertical_cross_section(tight, 0.4, generic=True)


def test_cross_section_matches_shapely():
    rng = np.random.default_rng(1)
    for _ in range(20):
        R = random_polygon(rng)
        P = Polygon(R.shells[0])
        for u in rng.uniform(R.bounds[0], R.bounds[2], 5):
            ref = P.intersection(box(u - 1e-9, -10, u + 1e-9, 10)).area / 2e-9
            assert R.section(u).measure == pytest.approx(ref, abs=1e-6)


# -- symmetrization ------------------------------------------------------------------------


def test_symmetrize_examples(stacked):
    R = Region([[(0, -0.5), (1, -0.5), (1, 0.5), (0, 0.5)]])
    S = steiner_symmetrize(R)
    assert area(S) == pytest.approx(1.0)
    assert S.section(0.5).intervals.tolist() == [[-0.5, 0.5]]
    S = steiner_symmetrize(stacked)
    assert area(S) == pytest.approx(1.5, abs=1e-12)
    iv = S.section(0.5).intervals
    assert iv.tolist() == [[-0.75, 0.75]]


def test_symmetrize_koebe_area_monte_carlo():
    R = cached_region("koebe", 0.8)
    S = steiner_symmetrize(R)
    assert area(S) == pytest.approx(area(R), rel=1e-6)
    # independent area estimate: Monte Carlo in the bounding box
    rng = np.random.default_rng(7)
    x0, y0, x1, y1 = R.bounds
    n = 400_000
    inside = shapely.contains_xy(Polygon(R.shells[0]), rng.uniform(x0, x1, n), rng.uniform(y0, y1, n))
    mc = inside.mean() * (x1 - x0) * (y1 - y0)
    se = math.sqrt(0.25 / n) * (x1 - x0) * (y1 - y0)
    assert area(S) == pytest.approx(mc, abs=5 * se)


def test_symmetrize_disk_is_itself():
    D = disk()
    S = steiner_symmetrize(D)
    assert area(S) == pytest.approx(area(D), rel=1e-12)
    us = np.linspace(-0.99, 0.99, 41)
    assert np.allclose(S.sections(us).measures(), D.sections(us).measures(), atol=1e-12)


def _symmetrization_invariants(R):
    S = steiner_symmetrize(R)
    assert area(S) == pytest.approx(area(R), rel=1e-6)
    x0, _, x1, _ = R.bounds
    us = np.concatenate([np.linspace(x0, x1, 57)[1:-1], R.vertex_us()])
    for side in ("left", "right"):
        mb = R.sections(us, side).measures()
        ma = S.sections(us, side).measures()
        assert np.all(np.abs(mb - ma) <= 1e-9 * (1 + mb))
    # symmetric and single-interval
    mirror = Region([s * np.array([1.0, -1.0]) for s in S.shells])
    assert area(mirror) == pytest.approx(area(S))
    b = S.sections(us)
    assert np.all(b.counts() <= 2)
    for i in range(len(us)):
        iv = b.intervals(i)
        if len(iv):
            assert iv[0, 0] == pytest.approx(-iv[0, 1], abs=R.snap_tol * 10)
    xs = R.vertex_us()
    m = max(R.sections(xs, "left").measures().max(), R.sections(xs, "right").measures().max())
    assert max_vertical_segment(S).length == pytest.approx(m, abs=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_symmetrize_random_invariants(seed):
    _symmetrization_invariants(random_polygon(np.random.default_rng(seed)))


def test_symmetrize_holed_and_koebe():
    _symmetrization_invariants(square_with_hole())
    _symmetrization_invariants(cached_region("koebe", 0.8))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_symmetrize_property(seed):
    R = random_polygon(np.random.default_rng(seed))
    S = steiner_symmetrize(R)
    assert area(S) == pytest.approx(area(R), rel=1e-9)
    # longest segment of the symmetral = largest section measure of the input
    xs = R.vertex_us()
    m = max(max(R.sections(xs, "left").measures()), max(R.sections(xs, "right").measures()))
    assert max_vertical_segment(S).length == pytest.approx(m, abs=1e-6)


# -- max vertical segment ------------------------------------------------------------------------


def test_max_segment_rectangle():
    seg = max_vertical_segment(Region([[(0, -0.3), (1, -0.3), (1, 0.4), (0, 0.4)]]))
    assert seg.length == pytest.approx(0.7)
    assert 0 <= seg.u0 < 1e-6  # smallest attaining u


def test_max_segment_disk():
    seg = max_vertical_segment(disk(4096))
    assert seg.length == pytest.approx(2.0, abs=1e-5)
    assert seg.u0 == pytest.approx(0.0, abs=1e-3)


def test_max_segment_strip_sharpness():
    R = region_from_polyline(trace_level_curve(strip_map(), 0.999, 1e-6))
    seg = max_vertical_segment(R)
    assert math.pi / 2 - 0.01 <= seg.length <= math.pi / 2
    assert seg.length == pytest.approx(oracles.STRIP_SECTION[0.999], abs=1e-9)
    assert abs(seg.u0) < 1e-6


def test_max_segment_against_dense_scan():
    rng = np.random.default_rng(3)
    for _ in range(10):
        R = random_polygon(rng)
        seg = max_vertical_segment(R)
        us = np.linspace(R.bounds[0], R.bounds[2], 4001)[1:-1]
        assert seg.length >= R.sections(us).longest().max() - 1e-12
        # the reported line really carries it
        assert R.section(seg.u0).intervals.__len__() >= 1
        iv = R.section(seg.u0).intervals
        assert np.max(iv[:, 1] - iv[:, 0]) == pytest.approx(seg.length, abs=1e-6)


# -- monotone reachability ------------------------------------------------------------------------


def test_reach_convex_full_extent():
    D = disk(256)
    g = monotone_reachable_grid(D, 0.05)
    # the two extreme columns touch the disk only at a point
    assert g.reached[1:-1].all()
    assert g.intervals == [(pytest.approx(-0.95), pytest.approx(0.95))]


def test_reach_comb(comb):
    g = monotone_reachable_grid(comb, 0.02)
    assert not g.reachable(0.8)
    assert g.reachable(0.5) and g.reachable(-0.4)
    assert comb.bounds[0] < 0.8 < comb.bounds[2]


def test_reach_koebe_full():
    R = cached_region("koebe", 0.9)
    g = monotone_reachable_grid(R, 0.25)
    assert g.reached.all()


def test_reach_origin_outside():
    with pytest.raises(OriginOutside):
        monotone_reachable_grid(Region([[(1, 1), (2, 1), (2, 2), (1, 2)]]), 0.1)


def test_reach_monotone_in_step(comb):
    coarse = monotone_reachable_grid(comb, 0.04)
    fine = monotone_reachable_grid(comb, 0.02)
    for u, hit in zip(coarse.us, coarse.reached):
        if hit:
            assert fine.reachable(u) or fine.reachable(u - 0.02) or fine.reachable(u + 0.02)


def test_region_serialization_roundtrip():
    R = square_with_hole()
    R2 = Region.from_dict(R.to_dict())
    assert area(R2) == area(R)
    with pytest.raises(ValueError):
        Region.from_dict({"holes": []})


def test_stacked_fixture_area():
    assert area(stacked_rectangles()) == pytest.approx(1.5)
