"""Discrete-time downlink scheduling environment.

One base station serves K UAVs over N resource blocks, one schedule per TTI.
Commands refresh in windows of e TTIs; within a window each UAV's message is
constant and counts as one effective message. Delivery bookkeeping follows
the trigger rule: a message is pending while its refresh-time change exceeded
a trigger threshold and it has not yet been delivered, and a UAV earns one
QoS unit for the first in-window delivery of a triggered message. Rewards,
observations and counters are all derived from that state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .actions import EntitySet, ScheduleAction, validate_action
from .channel import (
    ChannelParams,
    UavGeometry,
    multicast_rate,
    realize_channel,
    transmission_latency,
    transmission_succeeds,
    unicast_rate,
)
from .errors import ConfigError
from .semantics import (
    COMMAND_BOUNDS,
    CommandVector,
    SemanticConfig,
    SemanticState,
    build_multicast_groups,
    similarity_matrix,
    trigger,
)

# observation slot for a failed attempt, vs latency/tti <= 1 on success
LATENCY_FAILURE_SENTINEL = 2.0


@dataclass(frozen=True)
class SimConfig:
    """Episode-level simulation parameters.

    n_rb defaults to floor(n_uav / 2) when left at 0. equiv_group_spec is
    (count, size): how many synthetically equivalent command groups are
    planted per window and how many UAVs each contains.
    """

    n_uav: int = 10
    n_rb: int = 0
    radius_m: float = 500.0
    max_alt_m: float = 100.0
    repeat_e: int = 5
    episode_ttis: int = 200
    equiv_group_spec: tuple[int, int] = (2, 3)
    sigma_step_m: float = 1.0
    freeze_positions: bool = False
    discount: float = 0.99
    seed: int = 0

    def __post_init__(self):
        if self.n_uav < 2:
            raise ConfigError(f"need at least 2 UAVs, got {self.n_uav}")
        if self.n_rb == 0:
            object.__setattr__(self, "n_rb", self.n_uav // 2)
        if self.n_rb < 1:
            raise ConfigError(f"need at least 1 RB, got {self.n_rb}")
        if self.repeat_e < 1:
            raise ConfigError(f"window length must be >= 1, got {self.repeat_e}")
        if self.episode_ttis < self.repeat_e:
            raise ConfigError(
                f"horizon {self.episode_ttis} shorter than one window {self.repeat_e}"
            )
        if self.radius_m <= 0 or self.max_alt_m <= 0:
            raise ConfigError("flight region must have positive radius and altitude")
        if self.sigma_step_m < 0:
            raise ConfigError(f"mobility step scale must be >= 0, got {self.sigma_step_m}")
        if not (0 < self.discount <= 1):
            raise ConfigError(f"discount must lie in (0, 1], got {self.discount}")
        count, size = self.equiv_group_spec
        if count < 0:
            raise ConfigError(f"group count must be >= 0, got {count}")
        if count > 0 and size < 2:
            raise ConfigError(f"every synthetic group needs >= 2 UAVs, got size {size}")
        if count * size > self.n_uav:
            raise ConfigError(
                f"group spec {count}x{size} exceeds {self.n_uav} UAVs"
            )

    @property
    def n_windows(self) -> int:
        return math.ceil(self.episode_ttis / self.repeat_e)


def observation_length(n_uav: int) -> int:
    """Flat state length: K*4 diffs + K(K-1)/2 similarities + K latencies + K flags."""
    return 4 * n_uav + n_uav * (n_uav - 1) // 2 + 2 * n_uav


@dataclass(frozen=True)
class StepOutcome:
    """Result of one TTI: next observation, reward, QoS bits, cumulative counters."""

    observation: np.ndarray
    reward: float
    qos: np.ndarray  # (K,) 0/1 per UAV this TTI
    done: bool
    attempts: int
    successes: int
    effective_total: int
    effective_delivered: int


class CncSchedulingEnv:
    """TTI loop over mobility, window refresh, delivery bookkeeping and reward.

    The environment owns its RNG and mutable state; one instance per rollout
    worker. Schedulers interact through ``entity_set()`` (what is schedulable
    now) and ``step()`` (apply one per-RB assignment).
    """

    def __init__(
        self,
        sim: SimConfig,
        semantics: SemanticConfig | None = None,
        chan: ChannelParams | None = None,
    ):
        self.sim = sim
        self.semantics = semantics if semantics is not None else SemanticConfig()
        if chan is None:
            chan = ChannelParams(n_rb=sim.n_rb)
        elif chan.n_rb != sim.n_rb:
            raise ConfigError(
                f"channel configured for {chan.n_rb} RBs but simulation uses {sim.n_rb}"
            )
        self.chan = chan
        self._rng = np.random.default_rng(sim.seed)
        self._bounds_lo = np.array([lo for lo, _ in COMMAND_BOUNDS])
        self._bounds_hi = np.array([hi for _, hi in COMMAND_BOUNDS])
        self.reset()

    # ------------------------------------------------------------------ setup

    @property
    def obs_dim(self) -> int:
        return observation_length(self.sim.n_uav)

    def reset(self, seed: int | None = None) -> np.ndarray:
        """Start a new episode; with an explicit seed the episode is reproducible."""
        if seed is not None:
            self._rng = np.random.default_rng(seed)
        k = self.sim.n_uav
        self._t = 0
        self._positions = self._sample_positions(k)
        self._current = self._draw_window_commands()
        # previous-delivered store starts equal to current, so nothing has
        # changed yet and the first window triggers no transmissions
        self._prev_delivered = self._current.copy()
        self._delivered = np.zeros(k, dtype=bool)
        self._trigger_refresh = self._evaluate_triggers()
        self._last_latency = np.zeros(k)
        self.attempts = 0
        self.successes = 0
        self.effective_total = k
        self.effective_delivered = 0
        return self.encode_observation()

    def _sample_positions(self, k: int) -> np.ndarray:
        # uniform over the admissible cylinder x^2+y^2 <= R^2, 0 < z <= H
        radius = self.sim.radius_m * np.sqrt(self._rng.random(k))
        angle = self._rng.random(k) * 2 * np.pi
        alt = self.sim.max_alt_m * (1.0 - self._rng.random(k))
        return np.column_stack([radius * np.cos(angle), radius * np.sin(angle), alt])

    def _geometries(self) -> list[UavGeometry]:
        return [UavGeometry(tuple(p)) for p in self._positions]

    # ----------------------------------------------------------------- window

    def _draw_window_commands(self) -> np.ndarray:
        """Fresh (K, 4) command matrix with planted equivalent groups.

        Every UAV first draws uniformly within range; then each synthetic
        group overwrites its members with the leader's command plus a
        perturbation of weighted normalized L1 size <= eps_L/4, so any two
        members are within eps_L/2 of each other (triangle inequality, and
        clipping back into range only shrinks componentwise distances).
        """
        k = self.sim.n_uav
        cmds = self._rng.uniform(self._bounds_lo, self._bounds_hi, size=(k, 4))
        count, size = self.sim.equiv_group_spec
        self._planted = []
        if count > 0:
            members = self._rng.permutation(k)[: count * size].reshape(count, size)
            self._planted = [tuple(int(x) for x in block) for block in members]
            weights = self.semantics.weights_array()
            ranges = self.semantics.ranges_array()
            max_sim = self.semantics.equiv_tolerance / 4.0
            for block in members:
                leader_cmd = cmds[block[0]]
                for uav in block[1:]:
                    direction = self._rng.uniform(-1.0, 1.0, size=4)
                    norm = float(np.dot(weights, np.abs(direction)))
                    target = self._rng.uniform(0.0, max_sim)
                    if norm > 1e-12:
                        offset = direction * (target / norm) * ranges
                    else:
                        offset = np.zeros(4)
                    cmds[uav] = np.clip(
                        leader_cmd + offset, self._bounds_lo, self._bounds_hi
                    )
        return cmds

    def _evaluate_triggers(self) -> np.ndarray:
        diffs = self._diff_matrix()
        return np.array([trigger(d, self.semantics) for d in diffs], dtype=bool)

    def _refresh_window(self):
        self._current = self._draw_window_commands()
        self._delivered = np.zeros(self.sim.n_uav, dtype=bool)
        self._trigger_refresh = self._evaluate_triggers()
        self.effective_total += self.sim.n_uav

    def _diff_matrix(self) -> np.ndarray:
        ranges = self.semantics.ranges_array()
        return np.abs(self._current - self._prev_delivered) / ranges

    # ---------------------------------------------------------------- queries

    @property
    def pending(self) -> np.ndarray:
        """Pending = triggered at refresh and not yet delivered this window."""
        return self._trigger_refresh & ~self._delivered

    def commands(self) -> list[CommandVector]:
        return [CommandVector.from_array(row) for row in self._current]

    def semantic_state(self) -> SemanticState:
        return SemanticState(
            temporal_diff=self._diff_matrix(),
            pairwise_sim=similarity_matrix(self.commands(), self.semantics),
        )

    def entity_set(self) -> EntitySet:
        """Schedulable entities this TTI: groups over pending UAVs plus leftovers."""
        pending = np.flatnonzero(self.pending)
        cmds = {int(k): CommandVector.from_array(self._current[k]) for k in pending}
        groups, singles = build_multicast_groups(cmds, self.semantics)
        return EntitySet(
            n_uav=self.sim.n_uav,
            unicast_uavs=tuple(singles),
            groups=tuple(groups),
            capacity=self.sim.n_rb,
        )

    def encode_observation(self) -> np.ndarray:
        """Deterministic flattening: diffs, upper-triangle sims, latencies, flags."""
        state = self.semantic_state()
        iu = np.triu_indices(self.sim.n_uav, k=1)
        return np.concatenate(
            [
                state.temporal_diff.ravel(),
                state.pairwise_sim[iu],
                self._last_latency,
                self.pending.astype(float),
            ]
        )

    # ------------------------------------------------------------------- step

    def step(
        self, action: ScheduleAction, snr_override: np.ndarray | None = None
    ) -> StepOutcome:
        """Apply one schedule, account deliveries and QoS, advance the clock.

        snr_override, when given, replaces the sampled (K, N) SNR matrix; it
        exists so exact rate/latency cases can be driven deterministically.
        """
        entities = self.entity_set()
        validate_action(action, entities, self.sim.n_rb)
        if snr_override is not None:
            snr = np.asarray(snr_override, dtype=float)
        else:
            snr = realize_channel(self._geometries(), self.chan, self._rng).snr
        qos = np.zeros(self.sim.n_uav, dtype=int)
        for rb, eid in enumerate(action.entity_ids):
            kind, targets = entities.describe(eid)
            if kind == "idle":
                continue
            self.attempts += 1
            if kind == "unicast":
                rate = unicast_rate(snr[targets[0], rb], self.chan)
            else:
                rate = multicast_rate([snr[m, rb] for m in targets], self.chan)
            latency = transmission_latency(rate, self.chan)
            ok = transmission_succeeds(latency, self.chan)
            norm = latency / self.chan.tti_s if ok else LATENCY_FAILURE_SENTINEL
            # multicast payload is the leader's command; a unicast carries
            # the target's own message
            payload = self._current[targets[0]].copy()
            for uav in targets:
                self._last_latency[uav] = norm
                if not ok:
                    continue
                if not self._delivered[uav]:
                    self._delivered[uav] = True
                    self.effective_delivered += 1
                    if self._trigger_refresh[uav]:
                        qos[uav] = 1
                self._prev_delivered[uav] = payload
            if ok:
                self.successes += 1
        self._t += 1
        done = self._t >= self.sim.episode_ttis
        if not done:
            if self._t % self.sim.repeat_e == 0:
                self._refresh_window()
            self._move_uavs()
        return StepOutcome(
            observation=self.encode_observation(),
            reward=float(np.sum(qos)),
            qos=qos,
            done=done,
            attempts=self.attempts,
            successes=self.successes,
            effective_total=self.effective_total,
            effective_delivered=self.effective_delivered,
        )

    def _move_uavs(self):
        """Gaussian random-walk step, rejection-resampled into the region."""
        if self.sim.freeze_positions or self.sim.sigma_step_m == 0:
            return
        r2 = self.sim.radius_m**2
        for k in range(self.sim.n_uav):
            for _ in range(16):
                cand = self._positions[k] + self._rng.normal(
                    0.0, self.sim.sigma_step_m, size=3
                )
                if cand[0] ** 2 + cand[1] ** 2 <= r2 and 0 < cand[2] <= self.sim.max_alt_m:
                    self._positions[k] = cand
                    break
