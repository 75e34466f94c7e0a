"""Batch runs over every maneuver assignment of a base scenario."""
from __future__ import annotations

import dataclasses
import itertools
from concurrent.futures import ProcessPoolExecutor
from typing import Iterator, NamedTuple, Sequence

from .engine import Policy, SimConfig, SimResult, run
from .geometry import ManeuverKind, maneuver_for

KINDS = (ManeuverKind.RIGHT, ManeuverKind.STRAIGHT, ManeuverKind.LEFT)


class SweepRow(NamedTuple):
    kinds: tuple[ManeuverKind, ...]
    fcfs: SimResult | None
    proposed: SimResult | None

    @property
    def label(self) -> str:
        return "".join(k.value[0] for k in self.kinds)

    @property
    def failed(self) -> bool:
        return any(r is not None and (r.collision or r.timeout) for r in (self.fcfs, self.proposed))


def with_kinds(base: SimConfig, kinds: Sequence[ManeuverKind]) -> SimConfig:
    """``base`` with each vehicle's out-lane replaced to realise ``kinds``."""
    if len(kinds) != len(base.vehicles):
        raise ValueError(f"need {len(base.vehicles)} maneuvers, got {len(kinds)}")
    vehicles = tuple(
        dataclasses.replace(v, out_lane=maneuver_for(v.in_lane, k).out_lane)
        for v, k in zip(base.vehicles, kinds)
    )
    label = "".join(k.value[0] for k in kinds)
    return dataclasses.replace(base, vehicles=vehicles, name=f"{base.name}-{label}")


def combinations(base: SimConfig) -> Iterator[tuple[tuple[ManeuverKind, ...], SimConfig]]:
    for kinds in itertools.product(KINDS, repeat=len(base.vehicles)):
        yield kinds, with_kinds(base, kinds)


def _run_pair(args: tuple[SimConfig, tuple[Policy, ...]]) -> dict[Policy, SimResult]:
    config, policies = args
    return {p: run(dataclasses.replace(config, policy=p)) for p in policies}


def run_sweep(base: SimConfig, policies: Sequence[Policy] = (Policy.FCFS_BASELINE, Policy.PROPOSED),
              workers: int = 1) -> list[SweepRow]:
    combos = list(combinations(base))
    jobs = [(cfg, tuple(policies)) for _, cfg in combos]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_pair, jobs, chunksize=4))
    else:
        results = [_run_pair(j) for j in jobs]
    return [
        SweepRow(kinds, res.get(Policy.FCFS_BASELINE), res.get(Policy.PROPOSED))
        for (kinds, _), res in zip(combos, results)
    ]

