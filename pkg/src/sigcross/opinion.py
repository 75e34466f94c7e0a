"""Scalar GO/YIELD opinion with zone-dependent attention and channel-driven input."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping


class AlreadyFrozen(RuntimeError):
    pass


class CannotUnfreezeGo(RuntimeError):
    pass


@dataclass(frozen=True)
class OpinionParams:
    tau_z: float = 0.1
    damping: float = 1.0
    u0_evolution: float = 0.5
    u0_decision: float = 0.8
    k_u: float = 2.0
    alpha_self: float = 2.0
    alpha_s: float = 4.0
    alpha_p: float = 2.5
    alpha_c: float = 1.0

    def __post_init__(self) -> None:
        if not self.alpha_s > self.alpha_p > self.alpha_c > 0:
            raise ValueError("require alpha_s > alpha_p > alpha_c > 0 (suppression dominates)")
        if not (self.tau_z > 0 and self.damping > 0 and self.k_u >= 0):
            raise ValueError("require tau_z > 0, damping > 0, k_u >= 0")


@dataclass(frozen=True)
class OpinionState:
    z: float = 0.5
    frozen: bool = False

    @property
    def frozen_value(self) -> float | None:
        return self.z if self.frozen else None


def attention(zone: str, z: float, params: OpinionParams) -> float:
    """Attention gain; ``zone`` is ``"DECISION"`` or anything inbound (evolution rate)."""
    u0 = params.u0_decision if zone == "DECISION" else params.u0_evolution
    return u0 + params.k_u * (z - 0.5) ** 2


def channel_signals(z: Mapping[int, float], channels) -> tuple[float, float, float]:
    """Suppression (max), permission (mean complement) and coordination (mean) signals.

    Sums are exact (fsum) so the result does not depend on neighbour order.
    """
    sup = max((z[j] for j in channels.suppression), default=0.0)
    per = [1.0 - z[j] for j in channels.permission]
    coo = [z[j] for j in channels.coordination]
    return (
        sup,
        math.fsum(per) / len(per) if per else 0.0,
        math.fsum(coo) / len(coo) if coo else 0.0,
    )


def internal_state(z: float, S: float, P: float, C: float, params: OpinionParams) -> float:
    return params.alpha_self * (z - 0.5) - params.alpha_s * S + params.alpha_p * P + params.alpha_c * C


def opinion_rate(z: float, I: float, u: float, params: OpinionParams) -> float:
    return (-params.damping * z + 0.5 * (1.0 + math.tanh(u * I))) / params.tau_z


def step_opinion(state: OpinionState, I: float, u: float, dt: float, params: OpinionParams) -> OpinionState:
    if state.frozen:
        return state
    if not 0 < dt <= params.tau_z:
        raise ValueError(f"dt={dt} must lie in (0, tau_z={params.tau_z}]")
    z = state.z + dt * opinion_rate(state.z, I, u, params)
    return replace(state, z=min(1.0, max(0.0, z)))


def freeze(state: OpinionState, go: bool) -> OpinionState:
    if state.frozen:
        raise AlreadyFrozen("opinion is already frozen")
    return OpinionState(z=1.0 if go else 0.0, frozen=True)


def unfreeze(state: OpinionState) -> OpinionState:
    if not state.frozen:
        raise ValueError("opinion is not frozen")
    if state.z == 1.0:
        raise CannotUnfreezeGo("a GO commitment stays frozen through exit")
    return OpinionState(z=0.5, frozen=False)
