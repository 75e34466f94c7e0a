"""Per-vehicle state shared across the decision pipeline."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .geometry import Maneuver, PathSpec
from .opinion import OpinionState


class Sigma(enum.Enum):
    NEGOTIATE = "N"
    GO = "G"
    YIELD = "Y"
    EXIT = "E"


class Zone(enum.Enum):
    APPROACH = "APPROACH"  # beyond the evolution radius, still inbound
    EVOLUTION = "EVOLUTION"
    DECISION = "DECISION"
    EXITED = "EXITED"


@dataclass(frozen=True)
class OccupancyWindow:
    t_start: float
    t_end: float

    def __post_init__(self) -> None:
        if not self.t_end > self.t_start:
            raise ValueError("occupancy window must have t_end > t_start")


@dataclass(frozen=True)
class CommitmentState:
    sigma: Sigma = Sigma.NEGOTIATE
    t_dz: float | None = None
    window: OccupancyWindow | None = None
    # vehicles whose exit a YIELD is waiting on
    blockers: frozenset[int] = frozenset()
    exit_time: float | None = None


@dataclass
class VehicleState:
    id: int
    maneuver: Maneuver
    path: PathSpec
    v_max: float
    s: float
    v: float
    x: float
    y: float
    heading: float
    d: float
    zone: Zone
    commitment: CommitmentState = field(default_factory=CommitmentState)
    opinion: OpinionState = field(default_factory=OpinionState)
    a: float = 0.0

    @property
    def sigma(self) -> Sigma:
        return self.commitment.sigma

    @property
    def z(self) -> float:
        return self.opinion.z


@dataclass(frozen=True)
class BroadcastFrame:
    """Immutable V2V snapshot of one vehicle at the start of a tick."""

    id: int
    sigma: Sigma
    z: float
    x: float
    y: float
    heading: float
    v: float
    s: float
    d: float
    t_dz: float | None
    window: OccupancyWindow | None
    zone: Zone

    @classmethod
    def of(cls, veh: VehicleState) -> "BroadcastFrame":
        c = veh.commitment
        return cls(veh.id, c.sigma, veh.opinion.z, veh.x, veh.y, veh.heading, veh.v, veh.s, veh.d,
                   c.t_dz, c.window, veh.zone)
