from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sigcross.geometry import (
    GeometryError,
    IntersectionParams,
    InvalidManeuver,
    ManeuverKind,
    OutOfRange,
    build_path,
    classify_maneuver,
    crossing_indicator,
    maneuver_for,
    merge_indicator,
    position_on_path,
    wrap_angle,
)

ALL_MANEUVERS = [(i, o) for i in (1, 3, 5, 7) for o in (2, 4, 6, 8) if (o - i) % 8 in (1, 3, 5)]


# -- brute-force oracle: plain-python orientation tests over every segment pair

def _orient(p, q, r):
    v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (v > 0) - (v < 0)


def _on_seg(p, q, r):
    return min(p[0], r[0]) <= q[0] <= max(p[0], r[0]) and min(p[1], r[1]) <= q[1] <= max(p[1], r[1])


def _seg_hit(a, b, c, d):
    o1, o2, o3, o4 = _orient(a, b, c), _orient(a, b, d), _orient(c, d, a), _orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and _on_seg(a, c, b)) or (o2 == 0 and _on_seg(a, d, b))
            or (o3 == 0 and _on_seg(c, a, d)) or (o4 == 0 and _on_seg(c, b, d)))


def _clipped(path, radius):
    pts = [(float(x), float(y)) for x, y in zip(path.x, path.y)]
    keep = [math.hypot(*p) <= radius for p in pts]
    return [(pts[k], pts[k + 1]) for k in range(len(pts) - 1) if keep[k] and keep[k + 1]]


def oracle_crosses(p, q, radius):
    sa, sb = _clipped(p, radius), _clipped(q, radius)
    return int(any(_seg_hit(a, b, c, d) for (a, b), (c, d) in itertools.product(sa, sb)))


# -- maneuvers

@pytest.mark.parametrize("lanes,kind", [
    ((1, 2), ManeuverKind.RIGHT),
    ((1, 4), ManeuverKind.STRAIGHT),
    ((5, 2), ManeuverKind.LEFT),
])
def test_classify_maneuver(lanes, kind):
    assert classify_maneuver(*lanes).kind is kind


@pytest.mark.parametrize("lanes", [(1, 8), (2, 4), (1, 3), (9, 2)])
def test_classify_rejects_illegal(lanes):
    with pytest.raises(InvalidManeuver):
        classify_maneuver(*lanes)


@pytest.mark.parametrize("in_lane", [1, 3, 5, 7])
@pytest.mark.parametrize("kind", list(ManeuverKind))
def test_maneuver_for_inverts_classify(in_lane, kind):
    m = maneuver_for(in_lane, kind)
    assert classify_maneuver(m.in_lane, m.out_lane).kind is kind


def test_params_invariants():
    with pytest.raises(ValueError):
        IntersectionParams(evolution_radius=4.0)
    with pytest.raises(ValueError):
        IntersectionParams(vehicle_width=5.0)
    with pytest.raises(ValueError):
        IntersectionParams(lane_center_offset=6.0)


# -- paths

def test_straight_path_is_a_line(ip):
    p = build_path(classify_maneuver(1, 4), ip, 50.0)
    assert p.total_length >= 100.0
    assert np.allclose(p.heading, p.heading[0])
    assert np.allclose(p.y, p.y[0])


def test_turn_radii(path_of):
    right, left = path_of(1, 2), path_of(1, 6)
    assert right.turn_radius < left.turn_radius
    for p in (right, left):
        arc = (p.s > p.s_box_entry) & (p.s < p.s_merge)
        turn = np.diff(np.unwrap(p.heading[arc]))
        assert np.all(np.sign(turn) == np.sign(turn[0]))


def test_left_turn_starts_at_approach_distance(path_of):
    p = path_of(1, 6, 50.0)
    x, y, _ = position_on_path(p, 0.0)
    assert math.hypot(x, y) == pytest.approx(50.0, abs=p.step)


def test_path_too_short_is_rejected(ip):
    with pytest.raises(GeometryError):
        build_path(classify_maneuver(1, 4), ip, 10.0)


@pytest.mark.parametrize("lanes", ALL_MANEUVERS)
def test_path_sampling_invariants(path_of, lanes):
    p = path_of(*lanes)
    assert p.s[0] == 0.0 and p.s[-1] == pytest.approx(p.total_length)
    assert np.all(np.diff(p.s) > 0)
    assert p.step <= 0.25
    jumps = np.hypot(np.diff(p.x), np.diff(p.y))
    assert jumps.max() <= 2 * p.step
    tangent = np.arctan2(np.diff(p.y), np.diff(p.x))
    mid = wrap_angle(p.heading[:-1] + 0.5 * wrap_angle(p.heading[1:] - p.heading[:-1]))
    assert np.abs(wrap_angle(tangent - mid)).max() < 0.05


def test_path_construction_is_bitwise_deterministic(ip):
    a = build_path(classify_maneuver(3, 8), ip, 45.0)
    b = build_path(classify_maneuver(3, 8), ip, 45.0)
    for name in ("s", "x", "y", "heading"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()


def test_position_on_path(path_of):
    p = path_of(1, 4)
    x0, y0, h0 = position_on_path(p, 0.0)
    assert (x0, y0, h0) == (p.x[0], p.y[0], p.heading[0])
    x, y, h = position_on_path(p, p.total_length / 2)
    assert y == pytest.approx(p.y[0]) and h == pytest.approx(p.heading[0])
    with pytest.raises(OutOfRange):
        position_on_path(p, p.total_length + 1)
    with pytest.raises(OutOfRange):
        position_on_path(p, -0.1)


@given(st.sampled_from(ALL_MANEUVERS), st.floats(0, 1), st.floats(0.001, 0.5))
def test_position_is_lipschitz(lanes, frac, delta):
    p = build_path(classify_maneuver(*lanes), IntersectionParams(), 30.0)
    s = frac * (p.total_length - delta)
    x1, y1, _ = position_on_path(p, s)
    x2, y2, _ = position_on_path(p, s + delta)
    assert math.hypot(x2 - x1, y2 - y1) <= 1.01 * delta + 1e-9


def test_s_at_distance_round_trip(path_of):
    for lanes in ALL_MANEUVERS:
        p = path_of(*lanes)
        assert p.distance_to_center(p.s_at_distance(29.0)) == pytest.approx(29.0, abs=1e-6)


# -- conflict indicators

@pytest.mark.parametrize("a,b,expected", [
    ((1, 4), (7, 2), 1),
    ((1, 2), (5, 6), 0),
    ((1, 6), (3, 8), 1),
])
def test_crossing_examples(ip, path_of, a, b, expected):
    assert crossing_indicator(path_of(*a), path_of(*b), ip) == expected


def test_crossing_examples_match_oracle(ip, path_of):
    # the oracle values for the three examples were computed with the segment
    # test above and are frozen here
    radius = ip.decision_radius + ip.vehicle_length
    assert oracle_crosses(path_of(1, 4), path_of(7, 2), radius) == 1
    assert oracle_crosses(path_of(1, 2), path_of(5, 6), radius) == 0
    assert oracle_crosses(path_of(1, 6), path_of(3, 8), radius) == 1


def test_crossing_agrees_with_oracle_when_paths_intersect(ip, path_of):
    # the implementation may add near misses, never drop a true intersection
    radius = ip.decision_radius + ip.vehicle_length
    for a, b in itertools.combinations(ALL_MANEUVERS, 2):
        if a[0] == b[0] or a[1] == b[1]:
            continue
        if oracle_crosses(path_of(*a), path_of(*b), radius):
            assert crossing_indicator(path_of(*a), path_of(*b), ip) == 1, (a, b)


@pytest.mark.parametrize("a,b", [(a, b) for a, b in itertools.combinations(ALL_MANEUVERS, 2) if a[0] != b[0]])
def test_indicators_symmetric(ip, path_of, a, b):
    pa, pb = path_of(*a), path_of(*b)
    assert crossing_indicator(pa, pb, ip) == crossing_indicator(pb, pa, ip)
    assert merge_indicator(pa.maneuver, pb.maneuver) == merge_indicator(pb.maneuver, pa.maneuver)


def test_all_right_is_conflict_free(ip, path_of):
    rights = [path_of(i, i + 1) for i in (1, 3, 5, 7)]
    for pa, pb in itertools.combinations(rights, 2):
        assert crossing_indicator(pa, pb, ip) == 0
        assert merge_indicator(pa.maneuver, pb.maneuver) == 0


def test_all_left_fully_crossing(ip, path_of):
    lefts = [path_of(i, maneuver_for(i, ManeuverKind.LEFT).out_lane) for i in (1, 3, 5, 7)]
    for pa, pb in itertools.combinations(lefts, 2):
        assert crossing_indicator(pa, pb, ip) == 1


@pytest.mark.parametrize("a,b,expected", [((1, 6), (5, 6), 1), ((1, 6), (3, 4), 0), ((3, 4), (7, 4), 1)])
def test_merge_examples(a, b, expected):
    assert merge_indicator(classify_maneuver(*a), classify_maneuver(*b)) == expected
