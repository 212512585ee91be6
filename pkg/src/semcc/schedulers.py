"""Non-learning baseline schedulers and the trained-policy wrapper.

Every scheduler maps (entity set, observation) to one per-RB schedule. The
bit-oriented baseline ignores semantics entirely and unicasts to every UAV in
round-robin order; the greedy baseline packs the largest pending entities
first; the random baseline is a uniform exploration floor. None of them looks
at instantaneous channel state.
"""

from __future__ import annotations

import numpy as np

from .actions import IDLE_ACTION, EntitySet, ScheduleAction
from .errors import ConfigError
from . import ppo as ppo_mod

SCHEDULER_NAMES = ("bit", "random", "greedy", "ppo")


class Scheduler:
    """Scheduling strategy interface: one ScheduleAction per TTI."""

    name = "abstract"

    def schedule(self, entities: EntitySet, obs=None) -> ScheduleAction:
        raise NotImplementedError

    def reset(self):
        """Clear any per-episode state (cursor, nothing for stateless ones)."""


class BitOrientedScheduler(Scheduler):
    """Transmit every message individually, every TTI, no semantics.

    All K UAVs are treated as pending regardless of triggers; with fewer RBs
    than UAVs a round-robin cursor shares capacity fairly, advancing by N
    (mod K) each TTI. Attempts per TTI are min(N, K) always.
    """

    name = "bit"

    def __init__(self):
        self.cursor = 0

    def reset(self):
        self.cursor = 0

    def schedule(self, entities: EntitySet, obs=None) -> ScheduleAction:
        k, n = entities.n_uav, entities.capacity
        served = min(n, k)
        ids = [entities.unicast_id((self.cursor + i) % k) for i in range(served)]
        ids += [IDLE_ACTION] * (n - served)
        self.cursor = (self.cursor + n) % k
        return ScheduleAction(tuple(ids))


class GreedySemanticScheduler(Scheduler):
    """Largest pending entities first: groups by member count, then singletons.

    Ties break on the lowest leader index, so the schedule is deterministic.
    Never touches a non-pending UAV and never uses channel state.
    """

    name = "greedy"

    def schedule(self, entities: EntitySet, obs=None) -> ScheduleAction:
        ranked = [
            (-len(g), g[0], entities.multicast_id(i))
            for i, g in enumerate(entities.groups)
        ]
        ranked += [(-1, k, entities.unicast_id(k)) for k in entities.unicast_uavs]
        ranked.sort()
        n = entities.capacity
        ids = [eid for _, _, eid in ranked[:n]]
        ids += [IDLE_ACTION] * (n - len(ids))
        return ScheduleAction(tuple(ids))


class RandomScheduler(Scheduler):
    """Uniformly pick min(N, |entities|) distinct pending entities."""

    name = "random"

    def __init__(self, rng=None, seed: int = 0):
        self._rng = rng if rng is not None else np.random.default_rng(seed)

    def schedule(self, entities: EntitySet, obs=None) -> ScheduleAction:
        candidates = [eid for eid in entities.legal_ids() if eid != IDLE_ACTION]
        n = entities.capacity
        m = min(n, len(candidates))
        chosen = self._rng.choice(len(candidates), size=m, replace=False) if m else []
        ids = [candidates[i] for i in chosen]
        ids += [IDLE_ACTION] * (n - m)
        return ScheduleAction(tuple(ids))


class PolicyScheduler(Scheduler):
    """Schedules with a trained policy; argmax by default, sampling optionally."""

    name = "ppo"

    def __init__(self, params, deterministic: bool = True, rng=None):
        self.params = params
        self.deterministic = deterministic
        self._rng = rng if rng is not None else np.random.default_rng(0)

    def schedule(self, entities: EntitySet, obs=None) -> ScheduleAction:
        if obs is None:
            raise ConfigError("the policy scheduler needs the current observation")
        base = ppo_mod.action_mask(entities, self.params.g_max)
        if self.deterministic:
            ids = ppo_mod.greedy_actions(self.params, obs, base)
        else:
            ids = ppo_mod.sample_actions(
                self.params, obs[None, :], base[None, :], self._rng
            )[0][0]
        return ScheduleAction(tuple(int(i) for i in ids))


def make_scheduler(name: str, *, params=None, seed: int = 0) -> Scheduler:
    """Factory keyed by the config value ``scheduler``; ppo needs params."""
    if name == "bit":
        return BitOrientedScheduler()
    if name == "greedy":
        return GreedySemanticScheduler()
    if name == "random":
        return RandomScheduler(seed=seed)
    if name == "ppo":
        if params is None:
            raise ConfigError("scheduler 'ppo' requires trained policy parameters")
        return PolicyScheduler(params)
    raise ConfigError(f"unknown scheduler {name!r}; expected one of {SCHEDULER_NAMES}")
