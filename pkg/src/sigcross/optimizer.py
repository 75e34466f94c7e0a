"""Single-step, grid-search longitudinal acceleration selection."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import IntersectionParams, ManeuverKind, PathSpec
from .states import BroadcastFrame, Sigma, VehicleState


@dataclass(frozen=True)
class OptimizerParams:
    a_min: float = -5.0
    a_max: float = 2.5
    n_candidates: int = 15
    w_p: float = 1.0
    w_c: float = 0.5
    w_com: float = 1000.0
    w_dec: float = 10.0
    w_evo: float = 1.0
    d_safe: float = 3.0
    v_max_straight: float = 11.1
    v_max_left: float = 8.0
    v_max_right: float = 7.0
    yield_decay_length: float = 6.0
    yield_far_scale: float = 0.05
    # look-ahead of the own-motion prediction in the spatial term
    horizon: float = 2.0
    horizon_samples: int = 4
    # step used for v_pred; 0 means the engine step
    speed_horizon: float = 0.0
    # stop-line envelope for vehicles that yield or expect to
    stop_decel: float = 3.0
    stop_margin: float = 0.1

    def __post_init__(self) -> None:
        if not (self.a_min < 0 < self.a_max and self.n_candidates >= 2):
            raise ValueError("require a_min < 0 < a_max and n_candidates >= 2")
        if not self.w_com > self.w_dec > self.w_evo > 0:
            raise ValueError("require w_com > w_dec > w_evo > 0")
        if not self.v_max_straight > self.v_max_left > self.v_max_right > 0:
            raise ValueError("require v_max_straight > v_max_left > v_max_right > 0")
        if not self.horizon > 0 or self.horizon_samples < 1:
            raise ValueError("horizon must be positive with at least one sample")
        if self.speed_horizon < 0:
            raise ValueError("speed_horizon must be non-negative")
        if not (0 < self.stop_decel <= -self.a_min and self.stop_margin >= 0):
            raise ValueError("require 0 < stop_decel <= -a_min and stop_margin >= 0")

    def v_max(self, kind: ManeuverKind) -> float:
        return {
            ManeuverKind.STRAIGHT: self.v_max_straight,
            ManeuverKind.LEFT: self.v_max_left,
            ManeuverKind.RIGHT: self.v_max_right,
        }[kind]


@dataclass(frozen=True)
class CostBreakdown:
    j_prog: float
    j_comf: float
    j_spat: float
    j_yield: float

    @property
    def total(self) -> float:
        return self.j_prog + self.j_comf + self.j_spat + self.j_yield


class Neighbor(NamedTuple):
    frame: BroadcastFrame
    a: int  # signed-network entry
    k: int  # crossing conflict
    m: int  # merge conflict


def candidate_grid(params: OptimizerParams) -> np.ndarray:
    return np.linspace(params.a_min, params.a_max, params.n_candidates)


def predicted_speed(v: float, a: float, dt: float, v_max: float) -> float:
    return max(0.0, min(v + a * dt, v_max))


def progress_weight(sigma: Sigma, z: float, d: float, ip: IntersectionParams, params: OptimizerParams) -> float:
    if sigma is Sigma.GO and d <= ip.decision_radius:
        return 10.0 * params.w_p
    if sigma is Sigma.NEGOTIATE:
        return (0.5 + z) * params.w_p
    return params.w_p


def progress_cost(a: float, me: VehicleState, z: float, dt: float,
                  ip: IntersectionParams, params: OptimizerParams) -> float:
    v_pred = predicted_speed(me.v, a, dt, me.v_max)
    return progress_weight(me.sigma, z, me.d, ip, params) * me.d / max(v_pred, 0.1)


def comfort_cost(a: float, params: OptimizerParams) -> float:
    return params.w_c * a * a


def neighbor_weight(f: BroadcastFrame, ip: IntersectionParams, params: OptimizerParams) -> float:
    if f.sigma is Sigma.GO:
        return params.w_com
    if f.sigma is Sigma.NEGOTIATE and f.d < ip.evolution_radius:
        return params.w_dec * (0.5 + f.z)
    return params.w_evo


def spatial_terms(me: VehicleState, neighbors: Sequence[Neighbor], ip: IntersectionParams,
                  params: OptimizerParams) -> list[tuple[float, Neighbor]]:
    """(weight, neighbour) of every neighbour that repels ``me`` this tick."""
    go_inside = me.sigma is Sigma.GO and me.d <= ip.decision_radius
    terms = []
    for nb in neighbors:
        if nb.k:
            if go_inside:
                continue
        elif nb.m:
            if me.d >= ip.evolution_radius or nb.frame.d >= ip.evolution_radius:
                continue
        else:
            continue
        terms.append((neighbor_weight(nb.frame, ip, params), nb))
    return terms


def travel(v: float, a: float, t: float, v_max: float) -> float:
    """Distance covered in ``t`` at constant ``a`` with speed held inside [0, v_max]."""
    if a < 0 and v + a * t < 0:
        return v * v / (-2 * a)
    if a > 0 and v + a * t > v_max:
        t1 = max(v_max - v, 0.0) / a
        return v * t1 + 0.5 * a * t1 * t1 + v_max * (t - t1)
    return v * t + 0.5 * a * t * t


def path_xy(path: PathSpec, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.clip(s, 0.0, path.total_length)
    return np.interp(s, path.s, path.x), np.interp(s, path.s, path.y)


@functools.lru_cache(maxsize=32)
def _times(horizon: float, samples: int) -> np.ndarray:
    t = np.linspace(0.0, horizon, samples + 1)
    t.flags.writeable = False
    return t


def prediction_times(horizon: float, params: OptimizerParams) -> np.ndarray:
    return _times(float(horizon), params.horizon_samples)


def travel_grid(v: float, accs: np.ndarray, times: np.ndarray, v_max: float) -> np.ndarray:
    """``travel`` for every (candidate, time) pair; rows follow ``accs``."""
    A = np.asarray(accs, dtype=float)[:, None]
    T = times[None, :]
    out = v * T + 0.5 * A * T * T
    with np.errstate(divide="ignore", invalid="ignore"):
        stopped = (A < 0) & (v + A * T < 0)
        out = np.where(stopped, v * v / (-2 * A), out)
        t1 = np.maximum(v_max - v, 0.0) / A
        capped = (A > 0) & (v + A * T > v_max)
        out = np.where(capped, v * t1 + 0.5 * A * t1 * t1 + v_max * (T - t1), out)
    return out


def own_tracks(me: VehicleState, accs: np.ndarray, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return path_xy(me.path, me.s + travel_grid(me.v, accs, times, me.v_max))


def spatial_costs(me: VehicleState, neighbors: Sequence[Neighbor], ip: IntersectionParams,
                  params: OptimizerParams, accs: np.ndarray, horizon: float) -> np.ndarray:
    """J_spat for each candidate in ``accs``.

    d_ij is the closest approach of the own track under the candidate, over
    the next ``horizon`` seconds, to the neighbour's broadcast position.
    Neighbours are not extrapolated: that would reward racing past them.
    """
    terms = spatial_terms(me, neighbors, ip, params)
    if not terms:
        return np.zeros(len(accs))
    X, Y = own_tracks(me, accs, prediction_times(horizon, params))
    per_term = []
    for w, nb in terms:
        dx, dy = X - nb.frame.x, Y - nb.frame.y
        d_min = np.sqrt(dx * dx + dy * dy).min(axis=1)
        # math.exp keeps single- and multi-candidate evaluation bit-identical
        per_term.append([w * math.exp(-0.5 * (d - params.d_safe)) for d in d_min])
    # exact sums: independent of the order neighbours are listed in
    return np.array([math.fsum(col) for col in zip(*per_term)])


def spatial_cost(me: VehicleState, neighbors: Sequence[Neighbor], ip: IntersectionParams,
                 params: OptimizerParams, a: float | None = None, horizon: float = 0.0) -> float:
    """J_spat for one candidate, or at the current positions when ``a`` is None."""
    if a is not None:
        return float(spatial_costs(me, neighbors, ip, params, np.array([a]), horizon)[0])
    return math.fsum(
        w * math.exp(-0.5 * (math.hypot(me.x - nb.frame.x, me.y - nb.frame.y) - params.d_safe))
        for w, nb in spatial_terms(me, neighbors, ip, params)
    )


def stop_line(ip: IntersectionParams, params: OptimizerParams) -> float:
    """Centre distance at which a waiting vehicle keeps its nose out of the box."""
    return max(ip.box_half_width + 0.5 * ip.vehicle_length, ip.decision_radius - params.stop_margin)


def stop_envelope(d: float, ip: IntersectionParams, params: OptimizerParams) -> float:
    """Highest speed at distance ``d`` from which ``stop_decel`` still halts at the stop line."""
    gap = d - stop_line(ip, params)
    return math.sqrt(2.0 * params.stop_decel * gap) if gap > 0 else 0.0


def yield_cost(a: float, me: VehicleState, dt: float, ip: IntersectionParams,
               params: OptimizerParams) -> float:
    """Stop-line braking for a YIELD vehicle: linear inside, exponential onset outside."""
    if me.sigma is not Sigma.YIELD:
        return 0.0
    v_pred = predicted_speed(me.v, a, dt, me.v_max)
    if me.d <= ip.decision_radius:
        return params.w_com * v_pred
    onset = math.exp(-(me.d - ip.decision_radius) / params.yield_decay_length)
    return params.yield_far_scale * params.w_com * v_pred * onset


def stop_cost(a: float, me: VehicleState, dt: float, ip: IntersectionParams,
              params: OptimizerParams, expect_yield: bool = False) -> float:
    """w_com per m/s of predicted speed above the stopping envelope.

    Applies to YIELD vehicles and to negotiating ones that expect the gate to
    stop them, so either can always halt at the stop line.
    """
    if not (me.sigma is Sigma.YIELD or (expect_yield and me.sigma is Sigma.NEGOTIATE)):
        return 0.0
    v_pred = predicted_speed(me.v, a, dt, me.v_max)
    d_next = me.d - travel(me.v, a, dt, me.v_max)
    return params.w_com * max(0.0, v_pred - stop_envelope(d_next, ip, params))


def evaluate(a: float, me: VehicleState, neighbors: Sequence[Neighbor], z: float, dt: float,
             ip: IntersectionParams, params: OptimizerParams, expect_yield: bool = False,
             j_spat: float | None = None) -> CostBreakdown:
    if j_spat is None:
        j_spat = spatial_cost(me, neighbors, ip, params, a, params.horizon)
    return CostBreakdown(
        j_prog=progress_cost(a, me, z, dt, ip, params),
        j_comf=comfort_cost(a, params),
        j_spat=j_spat,
        j_yield=yield_cost(a, me, dt, ip, params) + stop_cost(a, me, dt, ip, params, expect_yield),
    )


def neighbors_of(i: int, frames: Sequence[BroadcastFrame], topology) -> list[Neighbor]:
    return [
        Neighbor(frames[j], int(topology.A[i, j]), int(topology.K[i, j]), int(topology.M[i, j]))
        for j in range(len(frames))
        if j != i and frames[j].sigma is not Sigma.EXIT
    ]


def select_acceleration(me: VehicleState, frames: Sequence[BroadcastFrame], topology, z_self: float,
                        dt: float, ip: IntersectionParams, params: OptimizerParams,
                        expect_yield: bool = False) -> tuple[float, CostBreakdown]:
    if me.sigma is Sigma.EXIT:
        raise ValueError("exited vehicles are not optimised")
    nbs = neighbors_of(me.id, frames, topology)
    grid = candidate_grid(params)
    spat = spatial_costs(me, nbs, ip, params, grid, params.horizon)
    best = None
    for a, js in zip(grid, spat):
        cost = evaluate(float(a), me, nbs, z_self, dt, ip, params, expect_yield, float(js))
        key = (cost.total, abs(a), a)
        if best is None or key < best[0]:
            best = (key, float(a), cost)
    return best[1], best[2]
