"""Desk-scale multi-agent actor-critic: population, assignment protocols,
and a synchronous trainer over the 13x13 observations.

Deliberately small and synchronous, with hand-written numpy gradients:
deterministic, laptop-sized, and directly checkable against finite
differences. Every agent owns its own network and is only ever updated
from episodes it participated in.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import (
    POLICY_STREAM_BASE,
    EnvParams,
    EpisodeLog,
    StepRecord,
    init_episode,
    is_terminal,
    make_log_header,
    observe,
    step,
    stream_rng,
)
from .layout import TileMap
from .metrics import SocialMetrics, aggregate
from .topology import Topology

N_ACTIONS = 5


class ShapeMismatch(ValueError):
    pass


class DivergedLoss(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    discount: float = 0.99
    unroll_length: int = 100
    entropy_weight: float = 0.003
    batch_size: int = 16
    learning_rate: float = 0.0004
    rmsprop_decay: float = 0.99
    rmsprop_eps: float = 1e-5
    rmsprop_momentum: float = 0.0
    value_coef: float = 0.5
    total_steps: int = 500_000
    parallel_envs: int = 16
    assignment_mode: str = "random"  # or "fixed"
    population_size: int = 8
    # Desk-scale stabilizers, off by default to keep the documented
    # hyperparameters untouched; the smoke training preset enables them
    # (few-thousand-update budgets need both). Clipping caps the early
    # RMSProp steps (zero-initialized accumulators amplify them ~10x),
    # which otherwise saturate the policy beyond entropy recovery.
    normalize_advantage: bool = False
    max_grad_norm: float | None = None
    # Network: flatten -> two rectified hidden layers -> policy/value heads.
    # conv_channels > 0 prepends a kernel-1 convolution over the RGB
    # channels; recurrent_size > 0 inserts a small tanh recurrent cell.
    hidden: tuple[int, int] = (64, 64)
    conv_channels: int = 0
    recurrent_size: int = 0

    def __post_init__(self):
        if not (0.0 < self.discount < 1.0):
            raise ValueError("discount must be in (0, 1)")
        for name in ("unroll_length", "batch_size", "total_steps", "parallel_envs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.learning_rate < 0 or self.entropy_weight < 0:
            raise ValueError("rates must be nonnegative")
        if self.assignment_mode not in ("random", "fixed"):
            raise ValueError("assignment_mode must be 'random' or 'fixed'")


def fidelity_config(**overrides) -> TrainConfig:
    """The larger named stack: kernel-1 conv encoder, 64/64 hidden,
    128-unit recurrent cell. Not the default (smoke tests must run in
    minutes)."""
    base = TrainConfig(conv_channels=6, recurrent_size=128)
    return replace(base, **overrides)


@dataclass
class EnvSpec:
    """Everything needed to instantiate episodes for training/evaluation."""

    topology: Topology
    tilemap: TileMap
    params: EnvParams

    @property
    def match_size(self) -> int:
        return self.topology.num_centers


# ---------------------------------------------------------------------------
# network


def init_params(cfg: TrainConfig, rng: np.random.Generator, obs_shape=(13, 13, 3)) -> dict:
    h1, h2 = cfg.hidden
    params: dict[str, np.ndarray] = {}
    in_ch = obs_shape[2]
    if cfg.conv_channels > 0:
        params["Wc"] = rng.normal(0, math.sqrt(2.0 / in_ch), (in_ch, cfg.conv_channels))
        params["bc"] = np.zeros(cfg.conv_channels)
        flat = obs_shape[0] * obs_shape[1] * cfg.conv_channels
    else:
        flat = obs_shape[0] * obs_shape[1] * in_ch
    params["W1"] = rng.normal(0, math.sqrt(2.0 / flat), (flat, h1))
    params["b1"] = np.zeros(h1)
    params["W2"] = rng.normal(0, math.sqrt(2.0 / h1), (h1, h2))
    params["b2"] = np.zeros(h2)
    top = h2
    if cfg.recurrent_size > 0:
        r = cfg.recurrent_size
        params["Wxh"] = rng.normal(0, math.sqrt(1.0 / h2), (h2, r))
        params["Whh"] = rng.normal(0, math.sqrt(1.0 / r), (r, r))
        params["bh"] = np.zeros(r)
        top = r
    params["Wp"] = rng.normal(0, 0.01, (top, N_ACTIONS))
    params["bp"] = np.zeros(N_ACTIONS)
    params["Wv"] = rng.normal(0, 0.01, (top, 1))
    params["bv"] = np.zeros(1)
    return params


def _encode(params: dict, cfg: TrainConfig, x: np.ndarray) -> tuple[np.ndarray, dict]:
    """x: (B, H, W, C) in [0, 1]. Returns pre-recurrent features (B, h2)."""
    cache: dict = {}
    if cfg.conv_channels > 0:
        z = x @ params["Wc"] + params["bc"]  # kernel/stride 1: per-pixel mix
        a = np.maximum(z, 0.0)
        cache["conv_in"], cache["conv_z"] = x, z
        flat = a.reshape(x.shape[0], -1)
    else:
        flat = x.reshape(x.shape[0], -1)
    cache["flat"] = flat
    z1 = flat @ params["W1"] + params["b1"]
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ params["W2"] + params["b2"]
    a2 = np.maximum(z2, 0.0)
    cache.update(z1=z1, a1=a1, z2=z2, a2=a2)
    return a2, cache


def _heads(params: dict, top: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    logits = top @ params["Wp"] + params["bp"]
    logits = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    probs = e / e.sum(axis=1, keepdims=True)
    values = (top @ params["Wv"] + params["bv"])[:, 0]
    return probs, values


def forward_batch(
    params: dict, cfg: TrainConfig, x: np.ndarray, h: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    a2, _ = _encode(params, cfg, x)
    if cfg.recurrent_size > 0:
        if h is None:
            h = np.zeros((x.shape[0], cfg.recurrent_size))
        h_next = np.tanh(a2 @ params["Wxh"] + h @ params["Whh"] + params["bh"])
        probs, values = _heads(params, h_next)
        return probs, values, h_next
    probs, values = _heads(params, a2)
    return probs, values, None


def policy_network_forward(
    params: dict,
    obs: np.ndarray,
    recurrent_state: np.ndarray | None = None,
    cfg: TrainConfig = TrainConfig(),
) -> tuple[np.ndarray, float, np.ndarray | None]:
    """Action distribution over the 5 actions, value estimate, next state."""
    obs = np.asarray(obs)
    if obs.shape != (13, 13, 3):
        raise ShapeMismatch(f"expected a 13x13x3 observation, got {obs.shape}")
    x = obs.astype(np.float64)[None] / 255.0
    h = None if recurrent_state is None else np.asarray(recurrent_state)[None]
    probs, values, h_next = forward_batch(params, cfg, x, h)
    return probs[0], float(values[0]), None if h_next is None else h_next[0]


def a2c_loss_and_grads(
    params: dict,
    cfg: TrainConfig,
    obs_seq: np.ndarray,  # (T, B, 13, 13, 3) scaled to [0, 1]
    act_seq: np.ndarray,  # (T, B) int
    ret_seq: np.ndarray,  # (T, B) bootstrapped returns
    h0: np.ndarray | None = None,
    adv_seq: np.ndarray | None = None,
) -> tuple[float, dict]:
    """Summed A2C loss over the unroll and its exact gradients.

    loss = sum_t,b [ -log pi(a) * adv + 0.5 c_v (v - G)^2 - beta * H(pi) ]

    The advantage is a constant of the loss (the usual detached baseline);
    when adv_seq is None it is taken as G - v at the current parameters.
    Callers divide by their total sample count for a mean update.
    """
    t_len, b = obs_seq.shape[:2]
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    beta = cfg.entropy_weight
    cv = cfg.value_coef
    recurrent = cfg.recurrent_size > 0

    caches: list[dict] = []
    tops: list[np.ndarray] = []
    hs: list[np.ndarray] = []
    h = (
        np.zeros((b, cfg.recurrent_size))
        if recurrent and h0 is None
        else (None if not recurrent else np.array(h0))
    )
    loss = 0.0
    dtops: list[np.ndarray] = []
    for t in range(t_len):
        a2, cache = _encode(params, cfg, obs_seq[t])
        if recurrent:
            hpre = a2 @ params["Wxh"] + h @ params["Whh"] + params["bh"]
            hnew = np.tanh(hpre)
            cache["h_prev"], cache["h_new"] = h, hnew
            top = hnew
            h = hnew
        else:
            top = a2
        probs, values = _heads(params, top)
        logp = np.log(np.clip(probs, 1e-12, None))
        ent = -(probs * logp).sum(axis=1)
        adv = ret_seq[t] - values if adv_seq is None else adv_seq[t]
        chosen = logp[np.arange(b), act_seq[t]]
        loss += float((-chosen * adv + 0.5 * cv * (values - ret_seq[t]) ** 2 - beta * ent).sum())

        onehot = np.zeros((b, N_ACTIONS))
        onehot[np.arange(b), act_seq[t]] = 1.0
        dlogits = adv[:, None] * (probs - onehot)  # policy term (adv detached)
        dlogits += beta * probs * (logp + ent[:, None])  # -beta*H term
        dvalues = cv * (values - ret_seq[t])
        grads["Wp"] += top.T @ dlogits
        grads["bp"] += dlogits.sum(axis=0)
        grads["Wv"] += top.T @ dvalues[:, None]
        grads["bv"] += np.array([dvalues.sum()])
        dtop = dlogits @ params["Wp"].T + dvalues[:, None] @ params["Wv"].T
        dtops.append(dtop)
        caches.append(cache)
        tops.append(top)

    if not np.isfinite(loss):
        raise DivergedLoss(f"non-finite loss {loss}")

    if recurrent:
        dh_carry = np.zeros_like(dtops[-1])
        for t in range(t_len - 1, -1, -1):
            cache = caches[t]
            dh = dtops[t] + dh_carry
            dpre = dh * (1.0 - cache["h_new"] ** 2)
            grads["Wxh"] += cache["a2"].T @ dpre
            grads["Whh"] += cache["h_prev"].T @ dpre
            grads["bh"] += dpre.sum(axis=0)
            dh_carry = dpre @ params["Whh"].T
            da2 = dpre @ params["Wxh"].T
            _backprop_encoder(params, cfg, cache, da2, grads)
    else:
        for t in range(t_len):
            _backprop_encoder(params, cfg, caches[t], dtops[t], grads)

    return loss, grads


def _backprop_encoder(params, cfg, cache, da2, grads) -> None:
    dz2 = da2 * (cache["z2"] > 0)
    grads["W2"] += cache["a1"].T @ dz2
    grads["b2"] += dz2.sum(axis=0)
    da1 = dz2 @ params["W2"].T
    dz1 = da1 * (cache["z1"] > 0)
    grads["W1"] += cache["flat"].T @ dz1
    grads["b1"] += dz1.sum(axis=0)
    if cfg.conv_channels > 0:
        dflat = dz1 @ params["W1"].T
        dconv = dflat.reshape(cache["conv_z"].shape) * (cache["conv_z"] > 0)
        x = cache["conv_in"]
        grads["Wc"] += np.einsum("bhwc,bhwk->ck", x, dconv)
        grads["bc"] += dconv.sum(axis=(0, 1, 2))


def rmsprop_update(params: dict, grads: dict, opt_state: dict, cfg: TrainConfig) -> None:
    if cfg.max_grad_norm is not None:
        total = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
        if total > cfg.max_grad_norm:
            scale = cfg.max_grad_norm / total
            grads = {k: g * scale for k, g in grads.items()}
    d = cfg.rmsprop_decay
    for k, g in grads.items():
        opt_state[k] = d * opt_state.get(k, np.zeros_like(g)) + (1.0 - d) * g * g
        params[k] -= cfg.learning_rate * g / (np.sqrt(opt_state[k]) + cfg.rmsprop_eps)


# ---------------------------------------------------------------------------
# population and assignment protocols


@dataclass
class Member:
    params: dict
    opt_state: dict = field(default_factory=dict)
    updates: int = 0


@dataclass
class Population:
    size: int
    match_size: int
    members: list[Member]
    cfg: TrainConfig

    @classmethod
    def new(cls, cfg: TrainConfig, master_seed: int, match_size: int) -> "Population":
        members = [
            Member(params=init_params(cfg, np.random.default_rng(
                np.random.SeedSequence([int(master_seed), 1000 + i]))))
            for i in range(cfg.population_size)
        ]
        return cls(size=cfg.population_size, match_size=match_size, members=members, cfg=cfg)


def sample_match(
    pop: Population, mode: str, rng: np.random.Generator
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Pick the episode's agents and their slot->center assignment.

    fixed: members 0..k-1 in identity assignment (specialists).
    random: uniform k-subset without replacement, uniform random bijection.
    """
    k = pop.match_size
    if mode == "fixed":
        return tuple(range(k)), tuple(range(1, k + 1))
    if mode != "random":
        raise ValueError(f"unknown assignment mode {mode!r}")
    chosen = tuple(int(i) for i in rng.choice(pop.size, size=k, replace=False))
    centers = tuple(int(c) for c in rng.permutation(k) + 1)
    return chosen, centers


# ---------------------------------------------------------------------------
# learned policy wrapper (engine-facing)


class LearnedPolicy:
    """Acts from 13x13 observations through a member network."""

    name = "learned"

    def __init__(self, params: dict, cfg: TrainConfig, greedy: bool = False):
        self.params = params
        self.cfg = cfg
        self.greedy = greedy

    def begin_episode(self, state, slot, rng):
        self.slot = slot
        self.rng = rng
        self.h = (
            np.zeros(self.cfg.recurrent_size) if self.cfg.recurrent_size > 0 else None
        )

    def act(self, state) -> int:
        obs = observe(state, self.slot)
        probs, _, self.h = policy_network_forward(self.params, obs, self.h, self.cfg)
        if self.greedy:
            return int(np.argmax(probs))
        return int(self.rng.choice(N_ACTIONS, p=probs / probs.sum()))

    def on_events(self, events, t):
        pass


# ---------------------------------------------------------------------------
# training


@dataclass
class _Lane:
    """One (env, slot) trajectory stream during collection."""

    obs: list = field(default_factory=list)
    acts: list = field(default_factory=list)
    rews: list = field(default_factory=list)
    dones: list = field(default_factory=list)
    members_at: list = field(default_factory=list)
    h_starts: dict = field(default_factory=dict)  # step index -> h at segment start


@dataclass
class _EnvSlot:
    state: object
    members: tuple[int, ...]
    ep_rewards: np.ndarray
    ep_care: np.ndarray
    hs: list  # live recurrent state per slot (None when feedforward)


def _scaled_obs(state, slot) -> np.ndarray:
    return observe(state, slot).astype(np.float64) / 255.0


def train(
    spec: EnvSpec, cfg: TrainConfig, master_seed: int
) -> tuple[Population, list[dict]]:
    """Synchronous A2C over parallel episodes; returns (population, curves).

    curves rows: {step, group_reward, total_care, S, D} computed from the
    episodes completed between consecutive rows.
    """
    from .metrics import care_direction, reciprocity

    n_envs = cfg.parallel_envs
    k = spec.match_size
    pop = Population.new(cfg, master_seed, k)
    match_rng = np.random.default_rng(np.random.SeedSequence([int(master_seed), 7]))
    act_rng = np.random.default_rng(np.random.SeedSequence([int(master_seed), 8]))

    episode_counter = 0

    def fresh_env() -> _EnvSlot:
        nonlocal episode_counter
        members, assignment = sample_match(pop, cfg.assignment_mode, match_rng)
        state = init_episode(
            spec.tilemap, spec.topology, assignment, spec.params,
            seed=master_seed, episode_index=episode_counter,
        )
        episode_counter += 1
        fresh_h = [
            np.zeros(cfg.recurrent_size) if cfg.recurrent_size else None for _ in range(k)
        ]
        return _EnvSlot(
            state=state,
            members=members,
            ep_rewards=np.zeros(k),
            ep_care=np.zeros((k, k)),
            hs=fresh_h,
        )

    envs = [fresh_env() for _ in range(n_envs)]
    total_steps = 0
    curves: list[dict] = []
    finished: list[tuple[float, float, float, float]] = []

    while total_steps < cfg.total_steps:
        lanes: dict[tuple[int, int], _Lane] = {}
        for e, env in enumerate(envs):
            for s in range(k):
                lanes[(e, s)] = _Lane()
                lanes[(e, s)].h_starts[0] = env.hs[s]

        for t in range(cfg.unroll_length):
            # Batched forward per member over its active lanes.
            per_member: dict[int, list[tuple[int, int]]] = {}
            obs_now: dict[tuple[int, int], np.ndarray] = {}
            for e, env in enumerate(envs):
                for s in range(k):
                    obs_now[(e, s)] = _scaled_obs(env.state, s)
                    per_member.setdefault(env.members[s], []).append((e, s))
            actions_for: dict[tuple[int, int], int] = {}
            for member in sorted(per_member):
                keys = per_member[member]
                x = np.stack([obs_now[key] for key in keys])
                if cfg.recurrent_size:
                    h = np.stack([envs[e].hs[s] for e, s in keys])
                else:
                    h = None
                probs, _, h_next = forward_batch(pop.members[member].params, cfg, x, h)
                cum = probs.cumsum(axis=1)
                u = act_rng.random(len(keys))
                acts = (u[:, None] > cum).sum(axis=1)
                for i, key in enumerate(keys):
                    actions_for[key] = int(min(acts[i], N_ACTIONS - 1))
                    if h_next is not None:
                        envs[key[0]].hs[key[1]] = h_next[i]

            for e, env in enumerate(envs):
                joint = [actions_for[(e, s)] for s in range(k)]
                events, rewards = step(env.state, joint)
                total_steps += 1
                env.ep_rewards += rewards
                for carer, owner in events.repaired:
                    env.ep_care[carer - 1, owner - 1] += 1
                done = is_terminal(env.state)
                for s in range(k):
                    lane = lanes[(e, s)]
                    lane.obs.append(obs_now[(e, s)])
                    lane.acts.append(actions_for[(e, s)])
                    lane.rews.append(rewards[s])
                    lane.dones.append(done)
                    lane.members_at.append(env.members[s])
                if done:
                    c = env.ep_care
                    finished.append(
                        (
                            float(env.ep_rewards.sum()),
                            float(c.sum()),
                            reciprocity(c),
                            care_direction(c, spec.topology),
                        )
                    )
                    envs[e] = fresh_env()
                    for s in range(k):
                        lanes[(e, s)].h_starts[t + 1] = envs[e].hs[s]

        _update_members(pop, cfg, envs, lanes, k)

        if finished:
            arr = np.array(finished)
            curves.append(
                {
                    "step": total_steps,
                    "group_reward": float(arr[:, 0].mean()),
                    "total_care": float(arr[:, 1].mean()),
                    "S": float(arr[:, 2].mean()),
                    "D": float(arr[:, 3].mean()),
                }
            )
            finished = []

    return pop, curves


def _update_members(pop: Population, cfg: TrainConfig, envs, lanes, k: int) -> None:
    """Split lanes into per-member segments, compute returns, apply one
    RMSProp step per member from its own experience only."""
    gamma = cfg.discount
    seg_by_member: dict[int, list[tuple]] = {}
    for (e, s), lane in lanes.items():
        t_len = len(lane.obs)
        start = 0
        while start < t_len:
            member = lane.members_at[start]
            end = start
            while (
                end + 1 < t_len
                and lane.members_at[end + 1] == member
                and not lane.dones[end]
            ):
                end += 1
            obs = np.stack(lane.obs[start : end + 1])
            acts = np.array(lane.acts[start : end + 1], dtype=int)
            rews = np.array(lane.rews[start : end + 1], dtype=float)
            if lane.dones[end]:
                bootstrap = 0.0
            else:
                # Bootstrap with the member's own value of the live state.
                cur = _scaled_obs(envs[e].state, s)[None]
                h = envs[e].hs[s][None] if cfg.recurrent_size else None
                _, v, _ = forward_batch(pop.members[member].params, cfg, cur, h)
                bootstrap = float(v[0])
            rets = np.empty_like(rews)
            acc = bootstrap
            for i in range(len(rews) - 1, -1, -1):
                acc = rews[i] + gamma * acc
                rets[i] = acc
            h0 = lane.h_starts.get(start)
            seg_by_member.setdefault(member, []).append((obs, acts, rets, h0))
            start = end + 1

    for member, segs in sorted(seg_by_member.items()):
        total = sum(len(seg[1]) for seg in segs)
        if total == 0:
            continue
        params = pop.members[member].params
        agg: dict[str, np.ndarray] | None = None
        loss_total = 0.0
        if cfg.recurrent_size == 0:
            # No temporal coupling: fold the whole batch into one step.
            obs = np.concatenate([seg[0] for seg in segs])[None]
            acts = np.concatenate([seg[1] for seg in segs])[None]
            rets = np.concatenate([seg[2] for seg in segs])[None]
            adv = None
            if cfg.normalize_advantage:
                _, values, _ = forward_batch(params, cfg, obs[0], None)
                adv = rets - values[None]
                adv = (adv - adv.mean()) / (adv.std() + 1e-8)
            loss_total, agg = a2c_loss_and_grads(params, cfg, obs, acts, rets, adv_seq=adv)
        else:
            advs = None
            if cfg.normalize_advantage:
                advs = []
                for obs, acts, rets, h0 in segs:
                    h = None if h0 is None else np.array(h0[None])
                    vals = np.empty(len(obs))
                    for i in range(len(obs)):
                        _, v, h = forward_batch(params, cfg, obs[i : i + 1], h)
                        vals[i] = v[0]
                    advs.append(rets - vals)
                flat = np.concatenate(advs)
                mu, sd = flat.mean(), flat.std() + 1e-8
                advs = [(a - mu) / sd for a in advs]
            for k_seg, (obs, acts, rets, h0) in enumerate(segs):
                loss, grads = a2c_loss_and_grads(
                    params,
                    cfg,
                    obs[:, None],
                    acts[:, None],
                    rets[:, None],
                    None if h0 is None else h0[None],
                    adv_seq=None if advs is None else advs[k_seg][:, None],
                )
                loss_total += loss
                if agg is None:
                    agg = grads
                else:
                    for key in agg:
                        agg[key] += grads[key]
        if not np.isfinite(loss_total):
            raise DivergedLoss(f"member {member}: non-finite loss {loss_total}")
        scaled = {key: g / total for key, g in agg.items()}
        rmsprop_update(params, scaled, pop.members[member].opt_state, cfg)
        pop.members[member].updates += 1


# ---------------------------------------------------------------------------
# evaluation


def evaluate(
    policies, spec: EnvSpec, episodes: int, master_seed: int,
    episode_index_base: int = 0,
) -> list[SocialMetrics]:
    """Frozen-policy evaluation; per-episode metrics in episode order.

    `policies` may mix scripted policies and LearnedPolicy wrappers; they
    are reused across episodes (begin_episode resets their state).
    """
    from .engine import run_episode

    out = []
    for ep in range(episodes):
        log = run_episode(
            spec.tilemap,
            spec.topology,
            tuple(range(1, spec.match_size + 1)),
            spec.params,
            policies,
            seed=master_seed,
            episode_index=episode_index_base + ep,
        )
        out.append(aggregate(log))
    return out


# ---------------------------------------------------------------------------
# checkpoints

CHECKPOINT_FORMAT = "supplysim-checkpoint"
CHECKPOINT_VERSION = 1


def save_checkpoint(pop: Population, path, config_hash: str | None = None) -> None:
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "size": pop.size,
        "match_size": pop.match_size,
        "config_hash": config_hash,
        "cfg": {
            "hidden": list(pop.cfg.hidden),
            "conv_channels": pop.cfg.conv_channels,
            "recurrent_size": pop.cfg.recurrent_size,
        },
    }
    arrays = {}
    for i, member in enumerate(pop.members):
        for key, arr in member.params.items():
            arrays[f"m{i}.{key}"] = arr
    np.savez(path, meta=json.dumps(meta, sort_keys=True), **arrays)


def load_checkpoint(path, cfg: TrainConfig | None = None) -> Population:
    data = np.load(path, allow_pickle=False)
    meta = json.loads(str(data["meta"]))
    if meta.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path} is not a {CHECKPOINT_FORMAT} file")
    net = meta["cfg"]
    base = cfg or TrainConfig()
    base = replace(
        base,
        hidden=tuple(net["hidden"]),
        conv_channels=int(net["conv_channels"]),
        recurrent_size=int(net["recurrent_size"]),
        population_size=int(meta["size"]),
    )
    members = []
    for i in range(meta["size"]):
        params = {
            key[len(f"m{i}.") :]: data[key]
            for key in data.files
            if key.startswith(f"m{i}.")
        }
        members.append(Member(params=params))
    return Population(size=meta["size"], match_size=meta["match_size"], members=members, cfg=base)
