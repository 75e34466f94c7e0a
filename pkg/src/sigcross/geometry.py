"""Four-way intersection layout, maneuver paths and pairwise conflict indicators.

Coordinates are metres with the intersection centre at the origin, x pointing
east and y pointing north.  Traffic keeps right.  In-lanes 1, 3, 5, 7 approach
from the West, South, East and North; out-lane ``2k`` is the lane a right turn
from in-lane ``2k - 1`` ends up on (2 = south, 4 = east, 6 = north, 8 = west).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    pass


class InvalidManeuver(ValueError):
    pass


class OutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class IntersectionParams:
    evolution_radius: float = 15.0
    decision_radius: float = 5.0
    lane_center_offset: float = 1.75
    vehicle_length: float = 4.5
    vehicle_width: float = 1.8

    def __post_init__(self) -> None:
        if not self.evolution_radius > self.decision_radius > 0:
            raise ValueError("require evolution_radius > decision_radius > 0")
        if not self.vehicle_length > self.vehicle_width > 0:
            raise ValueError("require vehicle_length > vehicle_width > 0")
        if not 0 < self.lane_center_offset < self.decision_radius:
            raise ValueError("require 0 < lane_center_offset < decision_radius")

    @property
    def box_half_width(self) -> float:
        """Half side of the square conflict box (two lanes per road)."""
        return 2.0 * self.lane_center_offset


class ManeuverKind(enum.Enum):
    RIGHT = "RIGHT"
    STRAIGHT = "STRAIGHT"
    LEFT = "LEFT"


_KIND_BY_OFFSET = {1: ManeuverKind.RIGHT, 3: ManeuverKind.STRAIGHT, 5: ManeuverKind.LEFT}
_OFFSET_BY_KIND = {k: off for off, k in _KIND_BY_OFFSET.items()}


@dataclass(frozen=True)
class Maneuver:
    kind: ManeuverKind
    in_lane: int
    out_lane: int

    def __str__(self) -> str:
        return f"{self.in_lane}->{self.out_lane}"


def classify_maneuver(in_lane: int, out_lane: int) -> Maneuver:
    if in_lane not in (1, 3, 5, 7):
        raise InvalidManeuver(f"in-lane must be one of 1, 3, 5, 7, got {in_lane}")
    if out_lane not in (2, 4, 6, 8):
        raise InvalidManeuver(f"out-lane must be one of 2, 4, 6, 8, got {out_lane}")
    offset = (out_lane - in_lane) % 8
    if offset not in _KIND_BY_OFFSET:
        raise InvalidManeuver(f"{in_lane}->{out_lane}: lane offset {offset} is not a legal turn")
    return Maneuver(_KIND_BY_OFFSET[offset], in_lane, out_lane)


def maneuver_for(in_lane: int, kind: ManeuverKind) -> Maneuver:
    out_lane = (in_lane + _OFFSET_BY_KIND[kind] - 1) % 8 + 1
    return classify_maneuver(in_lane, out_lane)


def in_heading(in_lane: int) -> float:
    return ((in_lane - 1) // 2) * (math.pi / 2)


def out_heading(out_lane: int) -> float:
    return (out_lane // 2 - 2) * (math.pi / 2)


def _unit(theta: float) -> np.ndarray:
    # snap to the exact lattice so symmetric paths stay bit-identical
    return np.array([round(math.cos(theta)), round(math.sin(theta))], dtype=float)


def _right(theta: float) -> np.ndarray:
    return np.array([round(math.sin(theta)), -round(math.cos(theta))], dtype=float)


def wrap_angle(a):
    return (np.asarray(a) + math.pi) % (2 * math.pi) - math.pi


@dataclass(frozen=True, eq=False)
class PathSpec:
    """Arc-length sampled path of one maneuver.

    ``s_center`` is the arc length of the point nearest the intersection
    centre; ``s_merge`` is where the path joins its out-lane centreline.
    """

    maneuver: Maneuver
    total_length: float
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    heading: np.ndarray
    s_center: float
    s_box_entry: float
    s_merge: float
    approach_length: float
    lateral_offset: float
    turn_radius: float | None = None

    @property
    def step(self) -> float:
        return float(self.s[1] - self.s[0])

    def s_at_distance(self, distance: float) -> float:
        """Arc length on the approach where the distance from the centre is ``distance``."""
        along = math.sqrt(max(distance**2 - self.lateral_offset**2, 0.0))
        if along > self.approach_length:
            raise OutOfRange(f"distance {distance} lies beyond the start of the path")
        return self.approach_length - along

    def distance_to_center(self, s: float) -> float:
        x, y, _ = position_on_path(self, s)
        return math.hypot(x, y)


SAMPLING_STEP = 0.125


def build_path(
    maneuver: Maneuver,
    params: IntersectionParams,
    approach_length: float,
    step: float = SAMPLING_STEP,
) -> PathSpec:
    if approach_length < params.evolution_radius:
        raise GeometryError("approach_length must be at least the evolution radius")
    off = params.lane_center_offset
    h = params.box_half_width
    th_in = in_heading(maneuver.in_lane)
    th_out = out_heading(maneuver.out_lane)
    e_in, r_in = _unit(th_in), _right(th_in)
    e_out, r_out = _unit(th_out), _right(th_out)

    if maneuver.kind is ManeuverKind.STRAIGHT:
        total = 2.0 * approach_length
        s_box = approach_length - h
        s_merge = approach_length + h
        radius = None
        turn_sign = 0.0
        arc_len = 2.0 * h
    else:
        if maneuver.kind is ManeuverKind.RIGHT:
            radius, turn_sign, center_dir = h - off, -1.0, r_in
        else:
            radius, turn_sign, center_dir = h + off, 1.0, -r_in
        if radius <= 0:
            raise GeometryError(f"no tangent arc for lane offset {off}")
        if math.hypot(h, h) + radius > approach_length:
            raise GeometryError("turn arc does not fit inside the approach length")
        arc_len = radius * math.pi / 2
        s_box = approach_length - h
        s_merge = s_box + arc_len
        total = s_merge + (approach_length - h)
        p_arc0 = -h * e_in + off * r_in
        arc_center = p_arc0 + radius * center_dir

    n = int(math.ceil(total / step - 1e-9))
    s = np.linspace(0.0, total, n + 1)
    xy = np.empty((n + 1, 2))
    hd = np.empty(n + 1)

    start = -approach_length * e_in + off * r_in
    if radius is None:
        xy[:] = start + s[:, None] * e_in
        hd[:] = th_in
    else:
        pre = s <= s_box
        arc = (s > s_box) & (s < s_merge)
        post = s >= s_merge
        xy[pre] = start + s[pre, None] * e_in
        hd[pre] = th_in
        # angle of the radius vector; rotates by turn_sign per unit arc / radius
        phi0 = math.atan2(*(p_arc0 - arc_center)[::-1])
        phi = phi0 + turn_sign * (s[arc] - s_box) / radius
        xy[arc] = arc_center + radius * np.stack([np.cos(phi), np.sin(phi)], axis=1)
        hd[arc] = th_in + turn_sign * (s[arc] - s_box) / radius
        p_out0 = h * e_out + off * r_out
        xy[post] = p_out0 + (s[post, None] - s_merge) * e_out
        hd[post] = th_out
    hd = wrap_angle(hd)

    dist = np.hypot(xy[:, 0], xy[:, 1])
    s_center = float(s[int(np.argmin(dist))])
    return PathSpec(
        maneuver=maneuver,
        total_length=float(total),
        s=s,
        x=xy[:, 0].copy(),
        y=xy[:, 1].copy(),
        heading=hd,
        s_center=s_center,
        s_box_entry=float(s_box),
        s_merge=float(s_merge),
        approach_length=float(approach_length),
        lateral_offset=float(off),
        turn_radius=radius,
    )


def position_on_path(path: PathSpec, s: float) -> tuple[float, float, float]:
    if not 0.0 <= s <= path.total_length:
        raise OutOfRange(f"s={s} outside [0, {path.total_length}]")
    step = path.step
    k = min(int(s / step), len(path.s) - 2)
    f = (s - path.s[k]) / step
    x = path.x[k] + f * (path.x[k + 1] - path.x[k])
    y = path.y[k] + f * (path.y[k + 1] - path.y[k])
    dh = float(wrap_angle(path.heading[k + 1] - path.heading[k]))
    heading = float(wrap_angle(path.heading[k] + f * dh))
    return float(x), float(y), heading


def _clip_mask(path: PathSpec, radius: float, s_max: float | None = None) -> np.ndarray:
    keep = np.hypot(path.x, path.y) <= radius
    if s_max is not None:
        keep &= path.s <= s_max
    return keep


def _segments(path: PathSpec, keep: np.ndarray) -> np.ndarray:
    """Polyline segments (m, 2, 2) whose both endpoints are kept."""
    pts = np.stack([path.x, path.y], axis=1)
    both = keep[:-1] & keep[1:]
    return np.stack([pts[:-1][both], pts[1:][both]], axis=1)


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _segments_intersect(sa: np.ndarray, sb: np.ndarray) -> bool:
    if len(sa) == 0 or len(sb) == 0:
        return False
    p, r = sa[:, None, 0], sa[:, None, 1] - sa[:, None, 0]
    q, w = sb[None, :, 0], sb[None, :, 1] - sb[None, :, 0]
    denom = _cross(r, w)
    qp = q - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross(qp, w) / denom
        u = _cross(qp, r) / denom
    hit = (denom != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    return bool(hit.any())


def _point_segment_distance(pts: np.ndarray, seg: np.ndarray) -> np.ndarray:
    """Distances (n, m) from points (n, 2) to segments (m, 2, 2)."""
    a, b = seg[None, :, 0], seg[None, :, 1]
    ab = b - a
    ap = pts[:, None, :] - a
    L2 = np.einsum("...i,...i", ab, ab)
    t = np.clip(np.einsum("...i,...i", ap, ab) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    closest = a + t[..., None] * ab
    return np.hypot(*(pts[:, None, :] - closest).transpose(2, 0, 1))


def polyline_min_distance(sa: np.ndarray, sb: np.ndarray) -> float:
    if len(sa) == 0 or len(sb) == 0:
        return math.inf
    if _segments_intersect(sa, sb):
        return 0.0
    pa = np.concatenate([sa[:, 0], sa[-1:, 1]])
    pb = np.concatenate([sb[:, 0], sb[-1:, 1]])
    return float(min(_point_segment_distance(pa, sb).min(), _point_segment_distance(pb, sa).min()))


def crossing_indicator(p_i: PathSpec, p_j: PathSpec, params: IntersectionParams) -> int:
    """1 when the two paths conflict geometrically near the intersection.

    Both polylines are clipped to ``decision_radius + vehicle_length`` around
    the centre.  When the paths share an out-lane, each is further cut one
    vehicle length before its merge point, so converging onto the common lane
    is left to the merge indicator.
    """
    radius = params.decision_radius + params.vehicle_length
    s_max_i = s_max_j = None
    if p_i.maneuver.out_lane == p_j.maneuver.out_lane:
        s_max_i = p_i.s_merge - params.vehicle_length
        s_max_j = p_j.s_merge - params.vehicle_length
    sa = _segments(p_i, _clip_mask(p_i, radius, s_max_i))
    sb = _segments(p_j, _clip_mask(p_j, radius, s_max_j))
    return int(polyline_min_distance(sa, sb) < params.vehicle_width)


def merge_indicator(m_i: Maneuver, m_j: Maneuver) -> int:
    return int(m_i.out_lane == m_j.out_lane)
