from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from sigcross.geometry import IntersectionParams, build_path, classify_maneuver

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def ip() -> IntersectionParams:
    return IntersectionParams()


@pytest.fixture(scope="session")
def path_of(ip):
    cache = {}

    def get(in_lane: int, out_lane: int, approach: float = 60.0):
        key = (in_lane, out_lane, approach)
        if key not in cache:
            cache[key] = build_path(classify_maneuver(in_lane, out_lane), ip, approach)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def vehicle(ip, path_of):
    """VehicleState on lanes ``(in, out)`` at centre distance ``d`` (approach side unless ``departing``)."""
    from sigcross.gate import classify_zone
    from sigcross.geometry import position_on_path
    from sigcross.optimizer import OptimizerParams
    from sigcross.states import CommitmentState, VehicleState

    def make(lanes, d, v=5.0, vid=0, commitment=None, departing=False, opinion=None):
        path = path_of(*lanes)
        if departing:
            # on the out-lane, beyond the box edge
            s = path.s_merge + (d ** 2 - path.lateral_offset ** 2) ** 0.5 - ip.box_half_width
        else:
            s = path.s_at_distance(d)
        x, y, h = position_on_path(path, s)
        dd = (x * x + y * y) ** 0.5
        kw = {}
        if opinion is not None:
            kw["opinion"] = opinion
        return VehicleState(
            id=vid, maneuver=path.maneuver, path=path,
            v_max=OptimizerParams().v_max(path.maneuver.kind), s=s, v=v, x=x, y=y, heading=h, d=dd,
            zone=classify_zone(dd, s, path, ip), commitment=commitment or CommitmentState(), **kw,
        )

    return make
