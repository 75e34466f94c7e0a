"""Static signed conflict network and the commitment-driven belief network."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import IntersectionParams, Maneuver, PathSpec, crossing_indicator, merge_indicator
from .states import BroadcastFrame, Sigma


@dataclass(frozen=True, eq=False)
class ConflictTopology:
    K: np.ndarray
    M: np.ndarray
    A: np.ndarray

    @property
    def n(self) -> int:
        return len(self.A)

    def conflicting(self, i: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.A[i] == -1)]


@dataclass(frozen=True, eq=False)
class BeliefState:
    B: np.ndarray


@dataclass(frozen=True)
class ChannelSets:
    suppression: frozenset[int]
    permission: frozenset[int]
    coordination: frozenset[int]


def build_conflict_topology(
    maneuvers: Sequence[Maneuver],
    paths: Sequence[PathSpec],
    params: IntersectionParams,
) -> ConflictTopology:
    n = len(maneuvers)
    if len(paths) != n:
        raise ValueError("maneuvers and paths must have the same length")
    K = np.zeros((n, n), dtype=int)
    M = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            K[i, j] = K[j, i] = crossing_indicator(paths[i], paths[j], params)
            M[i, j] = M[j, i] = merge_indicator(maneuvers[i], maneuvers[j])
    A = np.where((K == 1) | (M == 1), -1, 1)
    np.fill_diagonal(A, 0)
    return ConflictTopology(K=K, M=M, A=A)


_BELIEF = {Sigma.GO: 1, Sigma.YIELD: -1}


def update_beliefs(frames: Sequence[BroadcastFrame]) -> BeliefState:
    """Every observer row sees the same broadcast column (lossless V2V)."""
    n = len(frames)
    col = np.array([_BELIEF.get(f.sigma, 0) for f in frames], dtype=int)
    B = np.tile(col, (n, 1))
    np.fill_diagonal(B, 0)
    return BeliefState(B)


def channel_sets(i: int, topology: ConflictTopology, beliefs: BeliefState) -> ChannelSets:
    a, b = topology.A[i], beliefs.B[i]
    idx = range(topology.n)
    return ChannelSets(
        suppression=frozenset(j for j in idx if a[j] == -1 and b[j] == 1),
        permission=frozenset(j for j in idx if a[j] == -1 and b[j] == -1),
        coordination=frozenset(j for j in idx if a[j] == 1 and b[j] != 0),
    )
