"""Discrete-time multi-vehicle simulation of the intersection."""
from __future__ import annotations

import csv
import enum
import io
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import opinion as op
from .collision import collision_check
from .gate import (
    Decision,
    GateParams,
    GateResult,
    arrival_estimate,
    check_exit,
    check_resumption,
    classify_zone,
    crossing_feasible,
    evaluate_gate,
    preview_yield,
    project_window,
)
from .geometry import IntersectionParams, build_path, classify_maneuver, position_on_path
from .networks import ConflictTopology, build_conflict_topology, channel_sets, update_beliefs
from .optimizer import OptimizerParams, select_acceleration
from .states import BroadcastFrame, CommitmentState, Sigma, VehicleState, Zone


class Policy(enum.Enum):
    PROPOSED = "proposed"
    FCFS_BASELINE = "fcfs"


@dataclass(frozen=True)
class VehicleSpec:
    in_lane: int
    out_lane: int
    initial_distance: float
    initial_speed: float


@dataclass(frozen=True)
class SimConfig:
    vehicles: tuple[VehicleSpec, ...] = ()
    dt: float = 0.05
    max_time: float = 60.0
    policy: Policy = Policy.PROPOSED
    intersection: IntersectionParams = field(default_factory=IntersectionParams)
    opinion: op.OpinionParams = field(default_factory=op.OpinionParams)
    gate: GateParams = field(default_factory=GateParams)
    optimizer: OptimizerParams = field(default_factory=OptimizerParams)
    name: str = "scenario"

    def __post_init__(self) -> None:
        object.__setattr__(self, "vehicles", tuple(self.vehicles))
        if not 0 < self.dt <= self.opinion.tau_z:
            raise ValueError(f"dt must lie in (0, tau_z={self.opinion.tau_z}]")
        if not self.max_time > 0:
            raise ValueError("max_time must be positive")
        for k, v in enumerate(self.vehicles):
            classify_maneuver(v.in_lane, v.out_lane)
            if not v.initial_distance > self.intersection.evolution_radius:
                raise ValueError(
                    f"vehicle {k + 1}: initial_distance {v.initial_distance} must exceed "
                    f"evolution_radius {self.intersection.evolution_radius}"
                )
            if v.initial_speed < 0:
                raise ValueError(f"vehicle {k + 1}: initial_speed must be non-negative")

    @property
    def approach_length(self) -> float:
        far = max((v.initial_distance for v in self.vehicles), default=0.0)
        return max(60.0, math.ceil(far) + 10.0)


@dataclass(frozen=True)
class CommitmentEvent:
    t: float
    id: int
    old: Sigma
    new: Sigma
    window_start: float | None = None
    window_end: float | None = None

    @property
    def transition(self) -> str:
        return f"{self.old.value}->{self.new.value}"


TRACE_COLUMNS = ("t", "id", "x", "y", "heading", "v", "a", "z", "sigma", "zone", "d")


@dataclass
class SimResult:
    policy: Policy
    trace: list[tuple] = field(default_factory=list)
    events: list[CommitmentEvent] = field(default_factory=list)
    exit_times: dict[int, float | None] = field(default_factory=dict)
    min_clearance: float = math.inf
    colliding_pairs: list[tuple[float, int, int]] = field(default_factory=list)
    timeout: bool = False
    end_time: float = 0.0

    @property
    def collision(self) -> bool:
        return self.min_clearance <= 0

    @property
    def last_exit_time(self) -> float | None:
        if not self.exit_times or any(t is None for t in self.exit_times.values()):
            return None
        return max(self.exit_times.values())

    def go_order(self) -> list[int]:
        """1-based vehicle numbers in the order they committed to GO."""
        return [e.id + 1 for e in self.events if e.new is Sigma.GO]

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in self.trace:
            w.writerow(_fmt(v) for v in row)
        return buf.getvalue()

    def events_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("t", "id", "transition", "window_start", "window_end"))
        for e in self.events:
            w.writerow((_fmt(e.t), e.id + 1, e.transition, _fmt(e.window_start), _fmt(e.window_end)))
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "policy": self.policy.value,
            "exit_times": {str(k + 1): v for k, v in self.exit_times.items()},
            "last_exit_time": self.last_exit_time,
            "min_clearance": self.min_clearance,
            "collision": self.collision,
            "timeout": self.timeout,
            "go_order": self.go_order(),
            "colliding_pairs": [list(p) for p in self.colliding_pairs],
        }


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


class World:
    """Mutable simulation state; ``tick`` advances it by one step."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.t = 0.0
        self.steps = 0
        ip = config.intersection
        maneuvers = [classify_maneuver(v.in_lane, v.out_lane) for v in config.vehicles]
        self.paths = [build_path(m, ip, config.approach_length) for m in maneuvers]
        self.topology: ConflictTopology = build_conflict_topology(maneuvers, self.paths, ip)
        self.v_max = [config.optimizer.v_max(m.kind) for m in maneuvers]
        self.vehicles: list[VehicleState] = []
        for k, (spec, m, path) in enumerate(zip(config.vehicles, maneuvers, self.paths)):
            s0 = path.s_at_distance(spec.initial_distance)
            veh = VehicleState(
                id=k, maneuver=m, path=path, v_max=self.v_max[k], s=s0,
                v=min(spec.initial_speed, self.v_max[k]),
                x=0.0, y=0.0, heading=0.0, d=0.0, zone=Zone.APPROACH,
            )
            self._place(veh)
            self.vehicles.append(veh)
        self.result = SimResult(policy=config.policy, exit_times={k: None for k in range(len(self.vehicles))})
        for veh in self.vehicles:
            self._classify(veh)
        self._record()

    # -- helpers ---------------------------------------------------------
    def _place(self, veh: VehicleState) -> None:
        veh.x, veh.y, veh.heading = position_on_path(veh.path, veh.s)
        veh.d = math.hypot(veh.x, veh.y)

    def _classify(self, veh: VehicleState) -> None:
        ip = self.config.intersection
        veh.zone = classify_zone(veh.d, veh.s, veh.path, ip)
        if veh.zone is Zone.DECISION and veh.commitment.t_dz is None:
            veh.commitment = replace(veh.commitment, t_dz=self.t)

    def _transition(self, veh: VehicleState, new: Sigma, **changes) -> None:
        old = veh.commitment.sigma
        veh.commitment = replace(veh.commitment, sigma=new, **changes)
        w = veh.commitment.window if new is Sigma.GO else None
        self.result.events.append(
            CommitmentEvent(self.t, veh.id, old, new,
                            w.t_start if w else None, w.t_end if w else None)
        )

    def _record(self) -> None:
        for veh in self.vehicles:
            self.result.trace.append((
                round(self.t, 9), veh.id + 1, veh.x, veh.y, veh.heading, veh.v, veh.a,
                veh.opinion.z, veh.sigma.value, veh.zone.value, veh.d,
            ))

    def done(self) -> bool:
        return all(v.sigma is Sigma.EXIT for v in self.vehicles)

    # -- stages ----------------------------------------------------------
    def _gate_stage(self, frames: list[BroadcastFrame]) -> None:
        cfg = self.config
        work = list(frames)
        queue = sorted(
            (v for v in self.vehicles
             if v.zone is Zone.DECISION and v.sigma in (Sigma.NEGOTIATE, Sigma.YIELD)),
            key=lambda v: (v.commitment.t_dz, v.id),
        )
        for veh in queue:
            if veh.sigma is Sigma.YIELD:
                if not check_resumption(veh.id, veh.commitment.blockers, work):
                    continue
                self._transition(veh, Sigma.NEGOTIATE, blockers=frozenset())
                veh.opinion = op.unfreeze(veh.opinion)
                work[veh.id] = BroadcastFrame.of(veh)
            if cfg.policy is Policy.PROPOSED:
                res = evaluate_gate(veh.id, veh, work, self.topology, cfg.gate,
                                    self.paths, self.v_max, self.t)
            else:
                res = fcfs_baseline_gate(veh.id, work, self.topology)
                if res.decision is Decision.COMMIT_GO:
                    res = replace(res, window=project_window(veh.d, veh.v_max, self.t, cfg.gate))
            if res.decision is Decision.COMMIT_GO:
                self._transition(veh, Sigma.GO, window=res.window)
                veh.opinion = op.freeze(veh.opinion, go=True)
            elif res.decision is Decision.COMMIT_YIELD:
                self._transition(veh, Sigma.YIELD, blockers=res.blockers)
                veh.opinion = op.freeze(veh.opinion, go=False)
            work[veh.id] = BroadcastFrame.of(veh)

    def _opinion_stage(self, frames: list[BroadcastFrame]) -> None:
        cfg = self.config
        beliefs = update_beliefs(frames)
        z = {f.id: f.z for f in frames}
        for veh in self.vehicles:
            if veh.sigma is not Sigma.NEGOTIATE or veh.opinion.frozen:
                continue
            ch = channel_sets(veh.id, self.topology, beliefs)
            S, P, C = op.channel_signals(z, ch)
            zi = frames[veh.id].z
            I = op.internal_state(zi, S, P, C, cfg.opinion)
            u = op.attention(veh.zone.value, zi, cfg.opinion)
            veh.opinion = op.step_opinion(veh.opinion, I, u, cfg.dt, cfg.opinion)

    def _accel_stage(self, frames: list[BroadcastFrame]) -> list[float]:
        cfg = self.config
        acc = []
        for veh in self.vehicles:
            if veh.sigma is Sigma.EXIT:
                acc.append(0.0)
                continue
            if cfg.policy is Policy.PROPOSED:
                expect = preview_yield(veh.id, frames, self.topology, cfg.gate, self.paths,
                                       self.v_max, self.t, cfg.intersection)
            else:
                expect = fcfs_preview_yield(veh.id, frames, self.topology, self.t, cfg.intersection)
            a, _ = select_acceleration(veh, frames, self.topology, veh.opinion.z,
                                       cfg.optimizer.speed_horizon or cfg.dt,
                                       cfg.intersection, cfg.optimizer, expect)
            acc.append(a)
        return acc

    def _integrate(self, acc: Sequence[float]) -> None:
        dt = self.config.dt
        for veh, a in zip(self.vehicles, acc):
            v_new = min(max(veh.v + a * dt, 0.0), veh.v_max)
            veh.s = min(veh.s + 0.5 * (veh.v + v_new) * dt, veh.path.total_length)
            if veh.s >= veh.path.total_length:
                v_new = 0.0
            veh.v = v_new
            veh.a = a
            self._place(veh)

    def _check_windows(self) -> None:
        go = [v for v in self.vehicles if v.sigma is Sigma.GO]
        for a, b in itertools.combinations(go, 2):
            if self.topology.K[a.id, b.id] and not crossing_feasible(
                    a.commitment.window, b.commitment.window, self.config.gate):
                raise AssertionError(f"GO windows of {a.id + 1} and {b.id + 1} overlap at t={self.t}")

    def _collisions(self) -> None:
        ip = self.config.intersection
        active = [v for v in self.vehicles
                  if not (v.sigma is Sigma.EXIT and v.d > ip.evolution_radius)]
        if len(active) < 2:
            return
        poses = [(v.x, v.y, v.heading) for v in active]
        clear, hits = collision_check(poses, ip.vehicle_length, ip.vehicle_width)
        self.result.min_clearance = min(self.result.min_clearance, clear)
        for i, j in hits:
            self.result.colliding_pairs.append((self.t, active[i].id + 1, active[j].id + 1))

    def tick(self) -> None:
        frames = [BroadcastFrame.of(v) for v in self.vehicles]
        self._gate_stage(frames)
        self._opinion_stage(frames)
        acc = self._accel_stage(frames)
        self._integrate(acc)
        self.steps += 1
        self.t = self.steps * self.config.dt
        for veh in self.vehicles:
            self._classify(veh)
            if check_exit(veh, self.config.intersection):
                self._transition(veh, Sigma.EXIT, exit_time=self.t)
                self.result.exit_times[veh.id] = self.t
        if self.config.policy is Policy.PROPOSED:
            self._check_windows()
        self._collisions()
        self._record()


def fcfs_baseline_gate(i: int, frames: Sequence[BroadcastFrame], topology: ConflictTopology) -> GateResult:
    """GO only once every earlier-arrived conflicting vehicle has exited."""
    me = frames[i]
    waiting = frozenset(
        j for j in topology.conflicting(i)
        if frames[j].t_dz is not None
        and (frames[j].t_dz, j) < (me.t_dz, i)
        and frames[j].sigma is not Sigma.EXIT
    )
    if waiting:
        return GateResult(Decision.COMMIT_YIELD, blockers=waiting)
    return GateResult(Decision.COMMIT_GO)


def fcfs_preview_yield(i: int, frames: Sequence[BroadcastFrame], topology: ConflictTopology,
                       now: float, ip: IntersectionParams) -> bool:
    """Baseline counterpart of the gate preview: any earlier conflicting arrival still inside."""
    me = frames[i]
    if me.sigma is not Sigma.NEGOTIATE or me.zone is Zone.APPROACH:
        return False
    mine = (arrival_estimate(me, ip, now), i)
    for j in topology.conflicting(i):
        f = frames[j]
        if f.sigma is Sigma.EXIT or f.zone is Zone.APPROACH:
            continue
        if f.sigma is Sigma.GO or (arrival_estimate(f, ip, now), j) < mine:
            return True
    return False


def run(config: SimConfig) -> SimResult:
    world = World(config)
    n_steps = int(round(config.max_time / config.dt))
    while not world.done() and world.steps < n_steps:
        world.tick()
    world.result.timeout = not world.done()
    world.result.end_time = world.t
    return world.result
