"""Oriented-rectangle clearance via the separating axis theorem."""
from __future__ import annotations

import itertools
import math

import numpy as np


def box_corners(x: float, y: float, heading: float, length: float, width: float) -> np.ndarray:
    c, s = math.cos(heading), math.sin(heading)
    fwd = np.array([c, s]) * (length / 2)
    side = np.array([-s, c]) * (width / 2)
    ctr = np.array([x, y])
    return np.array([ctr + fwd + side, ctr - fwd + side, ctr - fwd - side, ctr + fwd - side])


def obb_clearance(pa: np.ndarray, pb: np.ndarray) -> float:
    """Largest projection gap over the four box axes.

    Positive: the boxes are separated by at least that much along some axis.
    Negative: they overlap; the magnitude is the penetration depth.
    """
    best = -math.inf
    for poly in (pa, pb):
        for k in range(2):
            edge = poly[k + 1] - poly[k]
            axis = np.array([-edge[1], edge[0]]) / math.hypot(*edge)
            ra, rb = pa @ axis, pb @ axis
            gap = max(rb.min() - ra.max(), ra.min() - rb.max())
            best = max(best, gap)
    return float(best)


def collision_check(poses, length: float, width: float, pairs=None):
    """Minimum clearance over ``pairs`` of poses ``(x, y, heading)``.

    Returns ``(min_clearance, colliding_pairs)``; ``pairs`` defaults to all.
    """
    boxes = [box_corners(x, y, h, length, width) for x, y, h in poses]
    if pairs is None:
        pairs = itertools.combinations(range(len(boxes)), 2)
    min_clear = math.inf
    hits = []
    for i, j in pairs:
        c = obb_clearance(boxes[i], boxes[j])
        min_clear = min(min_clear, c)
        if c <= 0:
            hits.append((i, j))
    return min_clear, hits
