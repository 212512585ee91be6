"""Actor-critic PPO with exact hand-written backpropagation.

No autograd framework: the networks are small tanh MLPs over numpy arrays,
gradients are derived analytically, and the optimizer is implemented here.
The policy factorizes the joint schedule as one masked categorical per RB,
sampled sequentially so that an entity chosen on an earlier RB is excluded
from later ones; the exclusivity constraint therefore holds by construction.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass

import numpy as np

from .actions import EntitySet, ScheduleAction
from .errors import ConfigError, ContractError


# --------------------------------------------------------------------- config

@dataclass(frozen=True)
class PpoConfig:
    clip_eps: float = 0.2
    learn_rate: float = 3e-4
    discount: float = 0.99
    gae_lambda: float = 0.95
    epochs_per_batch: int = 4
    minibatch_size: int = 64
    rollout_len: int = 1024
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    total_steps: int = 100_000
    optimizer: str = "adam"  # "sgd" gives the plain gradient-ascent rule
    hidden_width: int = 128
    eval_interval: int = 20_000
    eval_episodes: int = 2
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.clip_eps < 1):
            raise ConfigError(f"clip range must lie in (0, 1), got {self.clip_eps}")
        if not (0 < self.discount <= 1):
            raise ConfigError(f"discount must lie in (0, 1], got {self.discount}")
        if not (0 <= self.gae_lambda <= 1):
            raise ConfigError(f"gae lambda must lie in [0, 1], got {self.gae_lambda}")
        if self.learn_rate <= 0:
            raise ConfigError("learning rate must be positive")
        if min(self.epochs_per_batch, self.minibatch_size, self.rollout_len,
               self.hidden_width) < 1:
            raise ConfigError("epochs, minibatch size, rollout length, width must be >= 1")
        if self.total_steps < 0:
            raise ConfigError("total steps must be >= 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")


# ------------------------------------------------------------ mlp and params

def orthogonal_init(rng, rows: int, cols: int, gain: float) -> np.ndarray:
    """Orthogonal weight matrix via QR of a Gaussian draw, scaled by gain."""
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    q = q * d
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


def init_mlp(rng, dims: list[int], out_gain: float) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tanh MLP layers [(W, b), ...]; hidden gain sqrt(2), final layer out_gain."""
    layers = []
    for i in range(len(dims) - 1):
        gain = out_gain if i == len(dims) - 2 else math.sqrt(2.0)
        w = orthogonal_init(rng, dims[i], dims[i + 1], gain)
        layers.append((w, np.zeros(dims[i + 1])))
    return layers


def mlp_forward(layers, x: np.ndarray):
    """Forward pass; returns (output, activations) with tanh on all but the last layer."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    acts = [x]
    for i, (w, b) in enumerate(layers):
        if x.shape[1] != w.shape[0]:
            raise ContractError(
                f"layer {i} expects input width {w.shape[0]}, got {x.shape[1]}"
            )
        x = x @ w + b
        if i < len(layers) - 1:
            x = np.tanh(x)
        acts.append(x)
    return x, acts


def mlp_backward(layers, acts, grad_out: np.ndarray):
    """Exact reverse-mode gradient of mlp_forward wrt every weight and bias."""
    g = np.asarray(grad_out, dtype=float)
    grads = [None] * len(layers)
    for i in reversed(range(len(layers))):
        w, _ = layers[i]
        grads[i] = (acts[i].T @ g, g.sum(axis=0))
        if i > 0:
            g = (g @ w.T) * (1.0 - acts[i] ** 2)  # acts[i] is the tanh output feeding layer i
    return grads


@dataclass
class PolicyParams:
    """Actor and critic weights plus the fixed problem shape they were built for."""

    actor: list
    critic: list
    obs_dim: int
    n_uav: int
    n_rb: int
    g_max: int

    @property
    def n_actions(self) -> int:
        return 1 + self.n_uav + self.g_max

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            actor=copy.deepcopy(self.actor),
            critic=copy.deepcopy(self.critic),
            obs_dim=self.obs_dim,
            n_uav=self.n_uav,
            n_rb=self.n_rb,
            g_max=self.g_max,
        )


def init_policy(rng, obs_dim: int, n_uav: int, n_rb: int, hidden: int = 128) -> PolicyParams:
    """Two-hidden-layer tanh trunks; policy head scaled 0.01 for a near-uniform start."""
    g_max = n_uav // 2
    n_actions = 1 + n_uav + g_max
    actor = init_mlp(rng, [obs_dim, hidden, hidden, n_rb * n_actions], out_gain=0.01)
    critic = init_mlp(rng, [obs_dim, hidden, hidden, 1], out_gain=1.0)
    return PolicyParams(actor, critic, obs_dim, n_uav, n_rb, g_max)


def _flat_arrays(params: PolicyParams) -> list[np.ndarray]:
    out = []
    for layers in (params.actor, params.critic):
        for w, b in layers:
            out.extend((w, b))
    return out


# ----------------------------------------------------------- masked sampling

def action_mask(entities: EntitySet, g_max: int) -> np.ndarray:
    """Base legality mask over flat entity ids: idle, K unicasts, g_max group slots.

    Idle is always legal; a unicast slot is legal only for a pending UAV
    (grouped or not); group slots are legal up to the number of groups built
    this TTI and padded slots stay masked.
    """
    n_uav = entities.n_uav
    if len(entities.groups) > g_max:
        raise ContractError(
            f"{len(entities.groups)} groups exceed the {g_max} policy group slots"
        )
    mask = np.zeros(1 + n_uav + g_max, dtype=bool)
    mask[0] = True
    for k in entities.pending_uavs:
        mask[1 + k] = True
    mask[1 + n_uav : 1 + n_uav + len(entities.groups)] = True
    return mask


def _masked_log_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Log-probabilities with masked entries at -inf; last axis is the entity axis."""
    if not mask.any(axis=-1).all():
        raise ContractError("an RB has every entity masked, idle included")
    z = np.where(mask, logits, -np.inf)
    zmax = np.max(z, axis=-1, keepdims=True)
    lse = zmax + np.log(np.sum(np.exp(z - zmax), axis=-1, keepdims=True))
    return z - lse


def policy_logits(params: PolicyParams, obs: np.ndarray) -> np.ndarray:
    out, _ = mlp_forward(params.actor, obs)
    return out.reshape(-1, params.n_rb, params.n_actions)


def state_values(params: PolicyParams, obs: np.ndarray) -> np.ndarray:
    out, _ = mlp_forward(params.critic, obs)
    return out[:, 0]


def action_distribution(
    params: PolicyParams, obs: np.ndarray, masks: np.ndarray
) -> np.ndarray:
    """Per-RB masked categorical probabilities, shape (N, n_actions).

    masks is the (N, n_actions) boolean legality matrix in effect per RB
    (already accounting for entities consumed by earlier RBs).
    """
    logits = policy_logits(params, np.atleast_2d(obs))[0]
    return np.exp(_masked_log_softmax(logits, masks))


def sample_actions(
    params: PolicyParams, obs: np.ndarray, base_masks: np.ndarray, rng
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample one schedule per row of obs under sequential per-RB masking.

    base_masks is (B, n_actions); the mask used on each RB drops entities the
    same sample already placed on an earlier RB (idle is never dropped).
    Returns (actions (B, N), joint log-probs (B,), masks used (B, N, n_actions)).
    Sampling is exact categorical via the Gumbel-argmax trick, so masked
    entries can never be drawn.
    """
    obs = np.atleast_2d(np.asarray(obs, dtype=float))
    b = obs.shape[0]
    logits = policy_logits(params, obs)
    mask = np.array(np.atleast_2d(base_masks), dtype=bool, copy=True)
    actions = np.zeros((b, params.n_rb), dtype=int)
    logp = np.zeros(b)
    masks_used = np.zeros((b, params.n_rb, params.n_actions), dtype=bool)
    rows = np.arange(b)
    for rb in range(params.n_rb):
        masks_used[:, rb, :] = mask
        logp_all = _masked_log_softmax(logits[:, rb, :], mask)
        gumbel = rng.gumbel(size=(b, params.n_actions))
        chosen = np.argmax(logp_all + gumbel, axis=1)
        actions[:, rb] = chosen
        logp += logp_all[rows, chosen]
        nonidle = chosen != 0
        mask[rows[nonidle], chosen[nonidle]] = False
    return actions, logp, masks_used


def greedy_actions(params: PolicyParams, obs: np.ndarray, base_mask: np.ndarray) -> np.ndarray:
    """Deterministic (argmax) schedule for one observation; same masking rule."""
    logits = policy_logits(params, np.atleast_2d(obs))[0]
    mask = np.array(base_mask, dtype=bool, copy=True)
    out = np.zeros(params.n_rb, dtype=int)
    for rb in range(params.n_rb):
        logp_all = _masked_log_softmax(logits[rb], mask)
        choice = int(np.argmax(logp_all))
        out[rb] = choice
        if choice != 0:
            mask[choice] = False
    return out


def evaluate_actions(
    params: PolicyParams, obs: np.ndarray, actions: np.ndarray, masks: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Joint log-probs, per-sample entropies and values for stored transitions."""
    obs = np.atleast_2d(obs)
    logits = policy_logits(params, obs)
    logp_all = _masked_log_softmax(logits, masks)
    p = np.exp(logp_all)
    chosen = np.take_along_axis(logp_all, actions[..., None], axis=2)[..., 0]
    # p is exactly 0 on masked entries; replace their -inf log first so the
    # 0 * log(0) terms contribute 0 instead of nan
    entropy = -(p * np.where(p > 0, logp_all, 0.0)).sum(axis=2).sum(axis=1)
    return chosen.sum(axis=1), entropy, state_values(params, obs)


# ------------------------------------------------------------------ advantage

def gae_advantages(rewards, values, next_values, dones, discount, gae_lambda):
    """Generalized advantage estimation with per-step bootstrap values.

    delta_t = r_t + g * V(s_{t+1}) - V(s_t); the recursion accumulates
    discounted deltas and cuts at episode boundaries (dones), while the
    bootstrap term always uses the stored next-state value, which handles
    horizon-truncated episodes correctly. Returns (advantages, returns).
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    next_values = np.asarray(next_values, dtype=float)
    dones = np.asarray(dones, dtype=float)
    n = len(rewards)
    adv = np.zeros(n)
    acc = 0.0
    for t in reversed(range(n)):
        delta = rewards[t] + discount * next_values[t] - values[t]
        acc = delta + discount * gae_lambda * (1.0 - dones[t]) * acc
        adv[t] = acc
    return adv, adv + values


def clipped_objective(ratios, advantages, clip_eps: float) -> float:
    """Mean of min(ratio * adv, clip(ratio, 1-eps, 1+eps) * adv)."""
    ratios = np.asarray(ratios, dtype=float)
    if np.any(ratios <= 0):
        raise ContractError("probability ratios must be positive")
    advantages = np.asarray(advantages, dtype=float)
    clipped = np.clip(ratios, 1.0 - clip_eps, 1.0 + clip_eps) * advantages
    return float(np.mean(np.minimum(ratios * advantages, clipped)))


# ------------------------------------------------------------------ rollouts

@dataclass
class RolloutBatch:
    """Fixed-length slice of experience under one policy snapshot."""

    obs: np.ndarray          # (T, obs_dim)
    actions: np.ndarray      # (T, N)
    logp_old: np.ndarray     # (T,) joint log-probs under the sampling policy
    rewards: np.ndarray      # (T,)
    values: np.ndarray       # (T,)
    next_values: np.ndarray  # (T,)
    dones: np.ndarray        # (T,)
    masks: np.ndarray        # (T, N, n_actions) masks active at sampling time

    def __len__(self) -> int:
        return len(self.rewards)


def collect_rollout(env, params: PolicyParams, rng, n_steps: int, obs: np.ndarray):
    """Roll the policy for n_steps, resetting the env at episode ends.

    Returns (batch, obs_after) so the caller can continue the stream.
    """
    obs_buf = np.zeros((n_steps, params.obs_dim))
    next_obs_buf = np.zeros((n_steps, params.obs_dim))
    act_buf = np.zeros((n_steps, params.n_rb), dtype=int)
    logp_buf = np.zeros(n_steps)
    rew_buf = np.zeros(n_steps)
    done_buf = np.zeros(n_steps)
    mask_buf = np.zeros((n_steps, params.n_rb, params.n_actions), dtype=bool)
    for t in range(n_steps):
        entities = env.entity_set()
        base = action_mask(entities, params.g_max)
        acts, logp, used = sample_actions(params, obs[None, :], base[None, :], rng)
        outcome = env.step(ScheduleAction(tuple(acts[0])))
        obs_buf[t] = obs
        next_obs_buf[t] = outcome.observation
        act_buf[t] = acts[0]
        logp_buf[t] = logp[0]
        rew_buf[t] = outcome.reward
        done_buf[t] = float(outcome.done)
        mask_buf[t] = used[0]
        obs = env.reset() if outcome.done else outcome.observation
    batch = RolloutBatch(
        obs=obs_buf,
        actions=act_buf,
        logp_old=logp_buf,
        rewards=rew_buf,
        values=state_values(params, obs_buf),
        next_values=state_values(params, next_obs_buf),
        dones=done_buf,
        masks=mask_buf,
    )
    return batch, obs


# ----------------------------------------------------------------- optimizer

@dataclass
class OptimizerState:
    """Adam first/second moments (unused in sgd mode) over the flat array list."""

    kind: str
    step: int
    m: list
    v: list


def init_optimizer(params: PolicyParams, cfg: PpoConfig) -> OptimizerState:
    flats = _flat_arrays(params)
    return OptimizerState(
        kind=cfg.optimizer,
        step=0,
        m=[np.zeros_like(a) for a in flats],
        v=[np.zeros_like(a) for a in flats],
    )


def apply_gradients(params: PolicyParams, opt: OptimizerState, grads: list, lr: float):
    """Gradient ascent step in place; grads align with _flat_arrays(params)."""
    arrays = _flat_arrays(params)
    if opt.kind == "sgd":
        for a, g in zip(arrays, grads):
            a += lr * g
        return
    b1, b2, eps = 0.9, 0.999, 1e-8
    opt.step += 1
    c1 = 1.0 - b1**opt.step
    c2 = 1.0 - b2**opt.step
    for a, g, m, v in zip(arrays, grads, opt.m, opt.v):
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * g * g
        a += lr * (m / c1) / (np.sqrt(v / c2) + eps)


# -------------------------------------------------------------------- update

@dataclass
class PpoDiagnostics:
    mean_ratio: float = 1.0
    clip_fraction: float = 0.0
    value_loss: float = 0.0
    entropy: float = 0.0
    objective: float = 0.0
    aborted: bool = False


def objective_and_gradients(params: PolicyParams, mb: dict, cfg: PpoConfig):
    """Total ascent objective and its exact gradient on one minibatch.

    J = mean_t min(rho_t A_t, clip(rho_t) A_t) - c_v mean_t (V - R)^2
        + c_e mean_t H_t.

    The policy term's gradient flows only through samples where the min
    selects the unclipped branch; elsewhere the derivative of the clipped
    ratio is zero, which is exactly the piecewise advantage-scaling rule.
    """
    obs, actions, masks = mb["obs"], mb["actions"], mb["masks"]
    adv, rets, logp_old = mb["advantages"], mb["returns"], mb["logp_old"]
    b = len(obs)

    actor_out, actor_acts = mlp_forward(params.actor, obs)
    logits = actor_out.reshape(b, params.n_rb, params.n_actions)
    logp_all = _masked_log_softmax(logits, masks)
    p = np.exp(logp_all)
    logp_new = np.take_along_axis(logp_all, actions[..., None], axis=2)[..., 0].sum(axis=1)
    ratio = np.exp(logp_new - logp_old)

    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * adv
    surrogate = np.minimum(unclipped, clipped)

    safe_logp = np.where(p > 0, logp_all, 0.0)  # masked entries have p = 0
    ent_rb = -(p * safe_logp).sum(axis=2)  # (B, N)
    entropy = ent_rb.sum(axis=1)

    critic_out, critic_acts = mlp_forward(params.critic, obs)
    v = critic_out[:, 0]
    verr = v - rets
    value_loss = float(np.mean(verr**2))
    objective = (
        float(np.mean(surrogate))
        - cfg.value_coef * value_loss
        + cfg.entropy_coef * float(np.mean(entropy))
    )

    # policy gradient coefficient per sample: rho * adv on the unclipped
    # branch, zero where the clipped branch is selected
    take_unclipped = unclipped <= clipped
    coef = np.where(take_unclipped, unclipped, 0.0) / b
    onehot = np.zeros_like(p)
    np.put_along_axis(onehot, actions[..., None], 1.0, axis=2)
    dz = coef[:, None, None] * (onehot - p)
    dent = -p * (safe_logp + ent_rb[..., None])
    dz += (cfg.entropy_coef / b) * dent
    actor_grads = mlp_backward(params.actor, actor_acts, dz.reshape(b, -1))

    dv = (-cfg.value_coef * 2.0 / b) * verr
    critic_grads = mlp_backward(params.critic, critic_acts, dv[:, None])

    flat = [arr for layer in actor_grads for arr in layer]
    flat += [arr for layer in critic_grads for arr in layer]
    stats = PpoDiagnostics(
        mean_ratio=float(np.mean(ratio)),
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > cfg.clip_eps)),
        value_loss=value_loss,
        entropy=float(np.mean(entropy)),
        objective=objective,
    )
    return objective, flat, stats


def ppo_update(
    params: PolicyParams, opt: OptimizerState, batch: RolloutBatch, cfg: PpoConfig, rng
) -> PpoDiagnostics:
    """Epochs of minibatch ascent on the clipped objective; NaN-safe.

    A non-finite gradient anywhere aborts the whole update and restores the
    parameter and optimizer snapshot taken before the first step.
    """
    adv, rets = gae_advantages(
        batch.rewards, batch.values, batch.next_values, batch.dones,
        cfg.discount, cfg.gae_lambda,
    )
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    snap_params = params.copy()
    snap_opt = copy.deepcopy(opt)
    n = len(batch)
    stats: list[PpoDiagnostics] = []
    for _ in range(cfg.epochs_per_batch):
        order = rng.permutation(n)
        for lo in range(0, n, cfg.minibatch_size):
            idx = order[lo : lo + cfg.minibatch_size]
            mb = {
                "obs": batch.obs[idx],
                "actions": batch.actions[idx],
                "masks": batch.masks[idx],
                "logp_old": batch.logp_old[idx],
                "advantages": adv[idx],
                "returns": rets[idx],
            }
            _, grads, st = objective_and_gradients(params, mb, cfg)
            if not all(np.isfinite(g).all() for g in grads):
                params.actor = snap_params.actor
                params.critic = snap_params.critic
                opt.kind, opt.step, opt.m, opt.v = (
                    snap_opt.kind, snap_opt.step, snap_opt.m, snap_opt.v,
                )
                st.aborted = True
                return st
            apply_gradients(params, opt, grads, cfg.learn_rate)
            stats.append(st)
    return PpoDiagnostics(
        mean_ratio=float(np.mean([s.mean_ratio for s in stats])),
        clip_fraction=float(np.mean([s.clip_fraction for s in stats])),
        value_loss=float(np.mean([s.value_loss for s in stats])),
        entropy=float(np.mean([s.entropy for s in stats])),
        objective=float(np.mean([s.objective for s in stats])),
    )


# ------------------------------------------------------------------ training

@dataclass
class TrainResult:
    params: PolicyParams
    curve: list  # (env steps, mean eval episode reward)
    diagnostics: list  # one PpoDiagnostics per update
    steps: int = 0


def evaluate_policy(env, params: PolicyParams, episodes: int, seed: int) -> float:
    """Mean episode reward under deterministic (argmax) action selection."""
    totals = []
    for ep in range(episodes):
        obs = env.reset(seed=seed + ep)
        total, done = 0.0, False
        while not done:
            base = action_mask(env.entity_set(), params.g_max)
            acts = greedy_actions(params, obs, base)
            outcome = env.step(ScheduleAction(tuple(acts)))
            total += outcome.reward
            obs = outcome.observation
            done = outcome.done
        totals.append(total)
    return float(np.mean(totals))


def train(
    env_factory,
    cfg: PpoConfig,
    checkpoint_path=None,
    config_hash: str = "",
    progress=None,
) -> TrainResult:
    """Alternate rollout collection and PPO updates for cfg.total_steps env steps.

    Evaluation episodes (argmax policy, fresh env) run every eval_interval
    steps and populate the learning curve. The final parameters are persisted
    to checkpoint_path when given; an aborted update keeps the snapshot, so
    the checkpoint is always finite.
    """
    env = env_factory()
    rng = np.random.default_rng(cfg.seed)
    params = init_policy(rng, env.obs_dim, env.sim.n_uav, env.sim.n_rb, cfg.hidden_width)
    opt = init_optimizer(params, cfg)
    curve: list = []
    diags: list = []
    obs = env.reset(seed=cfg.seed)
    steps = 0
    next_eval = cfg.eval_interval
    while steps < cfg.total_steps:
        n = min(cfg.rollout_len, cfg.total_steps - steps)
        batch, obs = collect_rollout(env, params, rng, n, obs)
        steps += n
        diags.append(ppo_update(params, opt, batch, cfg, rng))
        if cfg.eval_interval > 0 and steps >= next_eval:
            score = evaluate_policy(
                env_factory(), params, cfg.eval_episodes, seed=cfg.seed + 977
            )
            curve.append((steps, score))
            next_eval += cfg.eval_interval
            if progress is not None:
                progress(steps, score, diags[-1])
    if checkpoint_path is not None:
        save_checkpoint(
            checkpoint_path, params, opt,
            step=steps, config_hash=config_hash,
            rng_state=rng.bit_generator.state,
        )
    return TrainResult(params=params, curve=curve, diagnostics=diags, steps=steps)


# --------------------------------------------------------------- persistence

CHECKPOINT_VERSION = 1


def save_checkpoint(path, params: PolicyParams, opt: OptimizerState | None = None,
                    *, step: int = 0, config_hash: str = "", rng_state=None):
    """Persist weights, optimizer state and shape metadata to one npz file."""
    arrays: dict[str, np.ndarray] = {}
    for name, layers in (("actor", params.actor), ("critic", params.critic)):
        for i, (w, b) in enumerate(layers):
            arrays[f"{name}_w{i}"] = w
            arrays[f"{name}_b{i}"] = b
    meta = {
        "version": CHECKPOINT_VERSION,
        "obs_dim": params.obs_dim,
        "n_uav": params.n_uav,
        "n_rb": params.n_rb,
        "g_max": params.g_max,
        "n_actor_layers": len(params.actor),
        "n_critic_layers": len(params.critic),
        "step": step,
        "config_hash": config_hash,
        "rng_state": rng_state,
    }
    if opt is not None:
        meta["optimizer"] = opt.kind
        meta["opt_step"] = opt.step
        for j, (m, v) in enumerate(zip(opt.m, opt.v)):
            arrays[f"opt_m{j}"] = m
            arrays[f"opt_v{j}"] = v
    np.savez(path, meta=np.array(json.dumps(meta)), **arrays)


def load_checkpoint(path, expect_n_uav=None, expect_n_rb=None):
    """Load a checkpoint; rejects shape mismatches against the expected (K, N).

    Returns (params, opt_state_or_None, meta dict).
    """
    with np.load(path) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ContractError(f"unsupported checkpoint version {meta.get('version')}")
        if expect_n_uav is not None and meta["n_uav"] != expect_n_uav:
            raise ContractError(
                f"checkpoint trained for {meta['n_uav']} UAVs, expected {expect_n_uav}"
            )
        if expect_n_rb is not None and meta["n_rb"] != expect_n_rb:
            raise ContractError(
                f"checkpoint trained for {meta['n_rb']} RBs, expected {expect_n_rb}"
            )
        actor = [
            (data[f"actor_w{i}"], data[f"actor_b{i}"])
            for i in range(meta["n_actor_layers"])
        ]
        critic = [
            (data[f"critic_w{i}"], data[f"critic_b{i}"])
            for i in range(meta["n_critic_layers"])
        ]
        params = PolicyParams(
            actor=actor, critic=critic, obs_dim=meta["obs_dim"],
            n_uav=meta["n_uav"], n_rb=meta["n_rb"], g_max=meta["g_max"],
        )
        opt = None
        if "optimizer" in meta:
            n_flat = len(_flat_arrays(params))
            opt = OptimizerState(
                kind=meta["optimizer"],
                step=meta["opt_step"],
                m=[data[f"opt_m{j}"] for j in range(n_flat)],
                v=[data[f"opt_v{j}"] for j in range(n_flat)],
            )
    return params, opt, meta
