"""Semantic metrics over command vectors.

A command message carries four components (ROLL, PITCH, THRUST, YAW) with
fixed physical ranges. The per-UAV temporal difference and the inter-UAV
similarity are normalized L1 distances over those components, the latter
weighted by per-command importance. Two messages are equivalent when their
similarity is at most a tolerance, which drives multicast group formation;
a message is worth transmitting when any component moved past its trigger
threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

COMMAND_NAMES = ("roll_deg", "pitch_deg", "thrust_mps", "yaw_dps")
# (min, max) per component; fixed message format, order ROLL, PITCH, THRUST, YAW
COMMAND_BOUNDS = ((-35.0, 35.0), (-35.0, 35.0), (-5.0, 5.0), (-150.0, 150.0))
COMMAND_SPANS = tuple(hi - lo for lo, hi in COMMAND_BOUNDS)


@dataclass(frozen=True)
class CommandVector:
    """One UAV's command message: roll/pitch attitude, thrust, yaw rate."""

    roll_deg: float
    pitch_deg: float
    thrust_mps: float
    yaw_dps: float

    def __post_init__(self):
        for name, value, (lo, hi) in zip(COMMAND_NAMES, self.as_tuple(), COMMAND_BOUNDS):
            if not (lo <= value <= hi):
                raise ValueError(f"{name}={value} outside [{lo}, {hi}]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.roll_deg, self.pitch_deg, self.thrust_mps, self.yaw_dps)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @classmethod
    def from_array(cls, values) -> "CommandVector":
        r, p, t, y = (float(v) for v in values)
        return cls(r, p, t, y)


@dataclass(frozen=True)
class SemanticConfig:
    """Normalizers, importance weights, equivalence tolerance and trigger thresholds.

    Weights must sum to one (attitude heaviest, then thrust, then yaw) and the
    normalizers must match the fixed command spans, so every metric below is
    bounded in [0, 1].
    """

    ranges: tuple = COMMAND_SPANS
    weights: tuple = (0.35, 0.35, 0.2, 0.1)
    equiv_tolerance: float = 0.05
    trigger_thresholds: tuple = (0.02, 0.02, 0.02, 0.02)

    def __post_init__(self):
        if len(self.ranges) != 4 or len(self.weights) != 4 or len(self.trigger_thresholds) != 4:
            raise ValueError("ranges, weights and thresholds must all have four entries")
        if tuple(float(r) for r in self.ranges) != COMMAND_SPANS:
            raise ValueError(f"normalizers must equal the command spans {COMMAND_SPANS}")
        if math.fsum(self.weights) != 1.0:
            raise ValueError(f"weights must sum to exactly 1, got {math.fsum(self.weights)}")
        w_roll, w_pitch, w_thrust, w_yaw = self.weights
        if not (w_roll == w_pitch > w_thrust > w_yaw > 0.0):
            raise ValueError("weights must satisfy roll = pitch > thrust > yaw > 0")
        if not (0.0 <= self.equiv_tolerance <= 1.0):
            raise ValueError(f"equivalence tolerance must lie in [0, 1], got {self.equiv_tolerance}")
        for tau in self.trigger_thresholds:
            if not (0.0 <= tau <= 1.0):
                raise ValueError(f"trigger thresholds must lie in [0, 1], got {tau}")

    def ranges_array(self) -> np.ndarray:
        return np.array(self.ranges, dtype=float)

    def weights_array(self) -> np.ndarray:
        return np.array(self.weights, dtype=float)

    def thresholds_array(self) -> np.ndarray:
        return np.array(self.trigger_thresholds, dtype=float)


@dataclass(frozen=True)
class SemanticState:
    """Per-TTI semantic summary: per-UAV temporal diffs and the pairwise similarity matrix."""

    temporal_diff: np.ndarray  # (K, 4), entries in [0, 1]
    pairwise_sim: np.ndarray   # (K, K) symmetric, zero diagonal

    def __post_init__(self):
        k = self.pairwise_sim.shape[0]
        if self.temporal_diff.shape != (k, 4) or self.pairwise_sim.shape != (k, k):
            raise ValueError("inconsistent semantic state shapes")


def semantic_diff(
    current: CommandVector, previous: CommandVector, cfg: SemanticConfig
) -> np.ndarray:
    """Per-component normalized absolute change between two consecutive messages."""
    return np.abs(current.as_array() - previous.as_array()) / cfg.ranges_array()


def pairwise_similarity(
    cmd_a: CommandVector, cmd_b: CommandVector, cfg: SemanticConfig
) -> float:
    """Importance-weighted normalized L1 distance between two UAVs' messages.

    Zero iff the messages are identical; symmetric; at most 1.
    """
    diff = np.abs(cmd_a.as_array() - cmd_b.as_array()) / cfg.ranges_array()
    return float(np.dot(cfg.weights_array(), diff))


def similarity_matrix(commands, cfg: SemanticConfig) -> np.ndarray:
    """Symmetric (K, K) matrix of pairwise similarities with a zero diagonal."""
    arr = np.stack([c.as_array() for c in commands])
    normed = arr / cfg.ranges_array()
    diffs = np.abs(normed[:, None, :] - normed[None, :, :])
    return diffs @ cfg.weights_array()


def trigger(diff, cfg: SemanticConfig) -> bool:
    """True iff any component's change strictly exceeds its threshold."""
    return bool(np.any(np.asarray(diff, dtype=float) > cfg.thresholds_array()))


def build_multicast_groups(
    commands: dict[int, CommandVector], cfg: SemanticConfig
) -> tuple[list[tuple[int, ...]], list[int]]:
    """Partition pending UAVs into multicast groups and unicast leftovers.

    Greedy leader-based complete-linkage clustering: scanning indices in
    ascending order, the first unassigned UAV leads a new cluster and absorbs
    every later unassigned UAV within tolerance of the leader AND of every
    member already absorbed, so the pairwise guarantee holds inside each
    group. Clusters of size one fall back to unicast candidates.

    Returns (groups, singletons); groups are index tuples ordered by leader,
    each of size >= 2, mutually disjoint.
    """
    indices = sorted(commands)
    assigned: set[int] = set()
    groups: list[tuple[int, ...]] = []
    singletons: list[int] = []
    for leader in indices:
        if leader in assigned:
            continue
        members = [leader]
        for other in indices:
            if other <= leader or other in assigned:
                continue
            if all(
                pairwise_similarity(commands[m], commands[other], cfg) <= cfg.equiv_tolerance
                for m in members
            ):
                members.append(other)
        if len(members) >= 2:
            groups.append(tuple(members))
            assigned.update(members)
        else:
            singletons.append(leader)
            assigned.add(leader)
    return groups, singletons
