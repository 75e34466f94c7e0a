"""Zone classification and the predictive GO/YIELD commitment gate."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .geometry import IntersectionParams, PathSpec
from .networks import ConflictTopology
from .states import BroadcastFrame, OccupancyWindow, Sigma, VehicleState, Zone


class MissingTimestamp(RuntimeError):
    pass


class Decision(enum.Enum):
    COMMIT_GO = "COMMIT_GO"
    COMMIT_YIELD = "COMMIT_YIELD"
    HOLD = "HOLD"


@dataclass(frozen=True)
class GateParams:
    epsilon: float = 0.6
    t_margin: float = 1.5
    l_box: float = 14.5

    def __post_init__(self) -> None:
        if not (self.epsilon > 0 and self.t_margin > 0 and self.l_box > 0):
            raise ValueError("epsilon, t_margin and l_box must be positive")

    @classmethod
    def for_intersection(cls, ip: IntersectionParams, **kw) -> "GateParams":
        return cls(l_box=2 * ip.decision_radius + ip.vehicle_length, **kw)


@dataclass(frozen=True)
class GateResult:
    decision: Decision
    window: OccupancyWindow | None = None
    blockers: frozenset[int] = frozenset()


def classify_zone(d: float, s_progress: float, path: PathSpec, params: IntersectionParams) -> Zone:
    if d <= params.decision_radius:
        return Zone.DECISION
    if s_progress > path.s_center:
        return Zone.EXITED
    if d < params.evolution_radius:
        return Zone.EVOLUTION
    return Zone.APPROACH


def project_window(d: float, v_max: float, now: float, params: GateParams) -> OccupancyWindow:
    return OccupancyWindow(now + d / v_max, now + (d + params.l_box) / v_max)


def window_overlap(T_i: OccupancyWindow, T_j: OccupancyWindow) -> float:
    return min(T_i.t_end, T_j.t_end) - max(T_i.t_start, T_j.t_start)


def crossing_feasible(T_i: OccupancyWindow, T_j: OccupancyWindow, params: GateParams) -> bool:
    # overlap below epsilon is tolerated, exactly as the feasibility inequality reads
    return window_overlap(T_i, T_j) < params.epsilon


def merge_feasible(eta_i: float, eta_j: float, params: GateParams) -> bool:
    return abs(eta_i - eta_j) >= params.t_margin


def merge_eta(path: PathSpec, s: float, v_max: float, now: float) -> float:
    """Optimistic arrival time at the out-lane entry; negative lead means already past it."""
    return now + (path.s_merge - s) / v_max


def _earlier(fa: BroadcastFrame, fb: BroadcastFrame) -> bool:
    return (fa.t_dz, fa.id) < (fb.t_dz, fb.id)


def evaluate_gate(
    i: int,
    me: VehicleState,
    frames: Sequence[BroadcastFrame],
    topology: ConflictTopology,
    params: GateParams,
    paths: Sequence[PathSpec],
    v_max: Sequence[float],
    now: float,
) -> GateResult:
    """FCFS priority test followed by the closed-form feasibility check."""
    if me.commitment.t_dz is None:
        raise MissingTimestamp(f"vehicle {i} has no decision-zone timestamp")
    mine = frames[i]
    conflicts = topology.conflicting(i)

    for j in conflicts:
        f = frames[j]
        if f.sigma is Sigma.NEGOTIATE and f.zone is Zone.DECISION and f.t_dz is not None and _earlier(f, mine):
            return GateResult(Decision.HOLD)

    window = project_window(me.d, me.v_max, now, params)
    eta_me = merge_eta(me.path, me.s, me.v_max, now)
    blockers = set()
    for j in conflicts:
        f = frames[j]
        if f.sigma is not Sigma.GO:
            continue
        if topology.K[i, j] and not crossing_feasible(window, f.window, params):
            blockers.add(j)
        if topology.M[i, j] and not merge_feasible(eta_me, merge_eta(paths[j], f.s, v_max[j], now), params):
            blockers.add(j)
    if blockers:
        # wait for every conflicting GO vehicle, not only the infeasible ones
        waiting = frozenset(j for j in conflicts if frames[j].sigma is Sigma.GO)
        return GateResult(Decision.COMMIT_YIELD, blockers=waiting)
    return GateResult(Decision.COMMIT_GO, window=window)


def arrival_estimate(f: BroadcastFrame, ip: IntersectionParams, now: float) -> float:
    """Recorded t_dz, or a constant-speed guess at the decision-zone entry time."""
    if f.t_dz is not None:
        return f.t_dz
    return now + max(f.d - ip.decision_radius, 0.0) / max(f.v, 0.1)


def _preview_window(f: BroadcastFrame, v_max: float, now: float, params: GateParams) -> OccupancyWindow:
    # earliest entry at v_max, latest clearance at the current speed (floored at 1 m/s)
    slow = min(max(f.v, 1.0), v_max)
    return OccupancyWindow(now + f.d / v_max, now + (f.d + params.l_box) / slow)


def preview_yield(
    i: int,
    frames: Sequence[BroadcastFrame],
    topology: ConflictTopology,
    params: GateParams,
    paths: Sequence[PathSpec],
    v_max: Sequence[float],
    now: float,
    ip: IntersectionParams,
) -> bool:
    """Whether vehicle i, still negotiating, should expect the gate to stop it.

    Uses broadcast data only: GO windows it could not fit beside, and
    negotiating rivals due to reach the decision zone first whose projected
    windows it could not fit beside either.  A negotiating vehicle already in
    the decision zone is being held.
    """
    mine = frames[i]
    if mine.sigma is not Sigma.NEGOTIATE or mine.zone is Zone.APPROACH:
        return False
    if mine.zone is Zone.DECISION:
        return True
    window = _preview_window(mine, v_max[i], now, params)
    eta_me = merge_eta(paths[i], mine.s, v_max[i], now)
    mine_at = (arrival_estimate(mine, ip, now), i)
    for j in topology.conflicting(i):
        f = frames[j]
        if f.sigma is Sigma.GO:
            other = f.window
        elif f.sigma is Sigma.NEGOTIATE and f.zone in (Zone.EVOLUTION, Zone.DECISION) \
                and (arrival_estimate(f, ip, now), j) < mine_at:
            other = _preview_window(f, v_max[j], now, params)
        else:
            continue
        # stricter than the gate: any overlap at all counts
        if topology.K[i, j] and window_overlap(window, other) > 0:
            return True
        if topology.M[i, j] and not merge_feasible(eta_me, merge_eta(paths[j], f.s, v_max[j], now), params):
            return True
    return False


def check_resumption(i: int, blockers: frozenset[int], frames: Sequence[BroadcastFrame]) -> bool:
    return all(frames[j].sigma is Sigma.EXIT for j in blockers)


def check_exit(me: VehicleState, params: IntersectionParams) -> bool:
    if me.sigma is not Sigma.GO:
        return False
    return classify_zone(me.d, me.s, me.path, params) is Zone.EXITED
