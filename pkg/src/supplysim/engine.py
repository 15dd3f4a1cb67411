"""Simulation core: seeded episode state, the step function, and episode logs.

Within a step the phases run in a fixed, frozen order: agent movement,
two-agent repair, self-repair, processing, unit flow (downstream first),
spawning. A repair completed at step t therefore enables processing at the
same step, keeping the opportunity cost of helping at exactly the travel
time.

Randomness discipline: every stochastic event category draws from its own
named stream derived from (master_seed, episode_index), and the per-step
draws are pre-laid-out as (step, slot)-indexed tables at episode start.
This keeps event streams byte-identical whether or not agents move (the
gridless queue oracle in the test suite relies on it) and makes episodes
embarrassingly parallel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .layout import CENTER, FLOOR, PATH, PROCESSING, REPAIR, SINK, SOURCE, WALL, Cell, TileMap
from .topology import Topology

# Action encoding (also the wire encoding of the bindings layer).
UP, DOWN, LEFT, RIGHT, WAIT = range(5)
ACTIONS = (UP, DOWN, LEFT, RIGHT, WAIT)
ACTION_NAMES = ("up", "down", "left", "right", "wait")
ACTION_DELTAS = ((0, -1), (0, 1), (-1, 0), (1, 0), (0, 0))

OBS_SIZE = 13
OBS_HALF = OBS_SIZE // 2

# Exact RGB triples per rendered object; every type has a unique color.
COLOR_TABLE: dict[str, tuple[int, int, int]] = {
    "floor": (0, 0, 0),
    "wall": (96, 96, 96),
    "path": (60, 40, 20),
    "processing": (170, 120, 40),
    "processing_broken": (200, 30, 30),
    "center_tile": (90, 90, 140),
    "repair_tile": (70, 110, 70),
    "own_center_tile": (230, 220, 60),
    "own_repair_tile": (120, 220, 220),
    "source": (160, 60, 160),
    "sink": (40, 60, 200),
    "unit": (250, 200, 30),
    "agent_other": (30, 120, 250),
    "agent_self": (255, 255, 255),
}

# Named RNG stream ids; policy streams live at POLICY_STREAM_BASE + slot.
STREAM_SPAWN, STREAM_BREAK, STREAM_SELF_REPAIR, STREAM_BRANCH, STREAM_MERGE, STREAM_CONFLICT = range(6)
POLICY_STREAM_BASE = 16


class EngineError(Exception):
    pass


class BadAssignment(EngineError):
    pass


class MapTopologyMismatch(EngineError):
    pass


class EpisodeOver(EngineError):
    pass


class TruncatedLog(EngineError):
    pass


class LogMapMismatch(EngineError):
    pass


def stream_rng(master_seed: int, episode_index: int, stream: int) -> np.random.Generator:
    """Independent generator for one named stream of one episode."""
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed), int(episode_index), int(stream)])
    )


@dataclass(frozen=True)
class EnvParams:
    episode_length: int = 1000
    spawn_prob: float = 0.10
    break_prob: float = 0.25
    repair_time: float = math.inf
    two_agent_repair_enabled: bool = True
    obs_mode: str = "egocentric"  # "full" exists but is not calibrated

    def __post_init__(self):
        if self.episode_length < 1:
            raise ValueError("episode_length must be >= 1")
        if not (0.0 <= self.spawn_prob <= 1.0):
            raise ValueError("spawn_prob must be in [0, 1]")
        if not (0.0 <= self.break_prob <= 1.0):
            raise ValueError("break_prob must be in [0, 1]")
        if not (self.repair_time >= 1):
            raise ValueError("repair_time must be >= 1 (math.inf disables self-repair)")
        if self.obs_mode not in ("egocentric", "full"):
            raise ValueError("obs_mode must be 'egocentric' or 'full'")

    @property
    def self_repair_prob(self) -> float:
        return 0.0 if math.isinf(self.repair_time) else 1.0 / float(self.repair_time)


@dataclass(frozen=True, slots=True)
class StepEvents:
    processed: tuple[int, ...]
    broke: tuple[int, ...]
    repaired: tuple[tuple[int, int], ...]  # (carer center, owner center)
    self_repaired: tuple[int, ...]
    spawned: tuple[int, ...]  # per source cell, aligned with tilemap.source_cells
    discarded: int
    sank: int


@dataclass(slots=True)
class StepRecord:
    t: int
    actions: tuple[int, ...]
    rewards: tuple[int, ...]
    events: StepEvents


@dataclass
class WorldState:
    tilemap: TileMap
    topology: Topology
    params: EnvParams
    assignment: tuple[int, ...]  # center of each slot
    seed: int
    episode_index: int
    step_count: int = 0
    agent_pos: list[Cell] = field(default_factory=list)
    broken: list[bool] = field(default_factory=list)  # indexed by center id
    chain_occ: list[int] = field(default_factory=list)  # per chain topo index
    spawned_per_source: list[int] = field(default_factory=list)
    total_sank: int = 0
    total_discarded: int = 0
    total_rewards: list[int] = field(default_factory=list)
    # Pre-drawn uniform tables, one row per step.
    _u_spawn: list = field(default_factory=list, repr=False)
    _u_break: list = field(default_factory=list, repr=False)
    _u_self: list = field(default_factory=list, repr=False)
    _u_branch: list = field(default_factory=list, repr=False)
    _u_merge: list = field(default_factory=list, repr=False)
    _conflict_rng: np.random.Generator | None = field(default=None, repr=False)
    _slot_of_center: dict[int, int] = field(default_factory=dict, repr=False)
    _base_rgb: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def num_slots(self) -> int:
        return len(self.assignment)

    def units_in_flight(self) -> int:
        return sum(self.chain_occ)

    def total_spawned(self) -> int:
        return sum(self.spawned_per_source)

    def owner_slot(self, center: int) -> int:
        return self._slot_of_center[center]


def center_graph_of_map(m: TileMap) -> set[tuple[int, int]]:
    """Center-to-center edges induced by the map's chain flow."""
    ci = m.chain_index()
    edges: set[tuple[int, int]] = set()
    for cid, start in ci.proc_of_center.items():
        stack = list(ci.succ[start])
        seen = set(stack)
        while stack:
            i = stack.pop()
            if ci.proc_center[i]:
                edges.add((cid, ci.proc_center[i]))
                continue
            for j in ci.succ[i]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
    return edges


def spawn_cells_for(m: TileMap, assignment: tuple[int, ...]) -> list[Cell]:
    """Deterministic agent start cells: nearest free floor cell to each
    slot's center tile (breadth-first over walkable cells, ties by (y, x)),
    assigned in slot order."""
    taken: set[Cell] = set()
    cells: list[Cell] = []
    for slot, center in enumerate(assignment):
        start = m.center_anchor[center].center_tile
        frontier = [start]
        seen = {start}
        found = None
        while frontier and found is None:
            frontier.sort(key=lambda c: (c[1], c[0]))
            nxt: list[Cell] = []
            for cell in frontier:
                if m.kind_at(cell) == FLOOR and cell not in taken:
                    found = cell
                    break
                for dx, dy in ((0, -1), (0, 1), (-1, 0), (1, 0)):
                    nb = (cell[0] + dx, cell[1] + dy)
                    if nb not in seen and m.is_walkable(nb):
                        seen.add(nb)
                        nxt.append(nb)
            frontier = nxt
        if found is None:
            raise MapTopologyMismatch(f"no free floor spawn cell near center {center}")
        taken.add(found)
        cells.append(found)
    return cells


def init_episode(
    m: TileMap,
    t: Topology,
    assignment: tuple[int, ...] | list[int],
    params: EnvParams,
    seed: int,
    episode_index: int = 0,
) -> WorldState:
    """Fresh episode state: no units, nothing broken, agents on spawn cells."""
    assignment = tuple(int(c) for c in assignment)
    if sorted(assignment) != list(t.centers):
        raise BadAssignment(
            f"assignment {assignment} is not a bijection onto centers 1..{t.num_centers}"
        )
    if set(m.center_anchor) != set(t.centers):
        raise MapTopologyMismatch("map centers do not match topology centers")
    if center_graph_of_map(m) != set(t.edges):
        raise MapTopologyMismatch("map flow does not realize the topology's edges")

    ci = m.chain_index()
    steps = params.episode_length
    n = t.num_centers
    state = WorldState(
        tilemap=m,
        topology=t,
        params=params,
        assignment=assignment,
        seed=int(seed),
        episode_index=int(episode_index),
        agent_pos=spawn_cells_for(m, assignment),
        broken=[False] * (n + 1),
        chain_occ=[0] * len(ci.cells),
        spawned_per_source=[0] * len(m.source_cells),
        total_rewards=[0] * len(assignment),
    )
    state._slot_of_center = {c: s for s, c in enumerate(assignment)}
    rng = lambda stream: stream_rng(seed, episode_index, stream)  # noqa: E731
    state._u_spawn = rng(STREAM_SPAWN).random((steps, max(1, len(m.source_cells)))).tolist()
    state._u_break = rng(STREAM_BREAK).random((steps, n)).tolist()
    state._u_self = rng(STREAM_SELF_REPAIR).random((steps, n)).tolist()
    state._u_branch = (
        rng(STREAM_BRANCH).integers(0, 2, (steps, max(1, len(ci.branch_indices)))).tolist()
    )
    state._u_merge = (
        rng(STREAM_MERGE).integers(0, 2, (steps, max(1, len(ci.merge_indices)))).tolist()
    )
    state._conflict_rng = rng(STREAM_CONFLICT)
    return state


def is_terminal(state: WorldState) -> bool:
    return state.step_count >= state.params.episode_length


def step(
    state: WorldState,
    actions: list[int] | tuple[int, ...],
    forced_positions: list[Cell | None] | None = None,
) -> tuple[StepEvents, list[int]]:
    """Advance one step in place; returns (events, per-slot rewards).

    `forced_positions` is the travel-contracted test mode: agent movement is
    replaced by directly placing each slot at the given cell (None = absent
    this step); actions are ignored. Production callers never set it.
    """
    if is_terminal(state):
        raise EpisodeOver(f"episode already ran its {state.params.episode_length} steps")
    m = state.tilemap
    ci = m.chain_index()
    params = state.params
    t = state.step_count
    n = state.topology.num_centers
    rewards = [0] * state.num_slots

    # (1) agent movement with conflict resolution
    if forced_positions is None:
        _move_agents(state, actions)
        occ_agents: dict[Cell, int] = {p: s for s, p in enumerate(state.agent_pos)}
    else:
        occ_agents = {}
        for slot, pos in enumerate(forced_positions):
            if pos is not None:
                state.agent_pos[slot] = pos
                occ_agents[pos] = slot

    # (2) two-agent repair
    repaired: list[tuple[int, int]] = []
    if params.two_agent_repair_enabled:
        for center in range(1, n + 1):
            if not state.broken[center]:
                continue
            anchor = m.center_anchor[center]
            on_center = occ_agents.get(anchor.center_tile)
            on_repair = occ_agents.get(anchor.repair_tile)
            if on_center is None or on_repair is None:
                continue
            state.broken[center] = False
            for slot in (on_center, on_repair):
                carer = state.assignment[slot]
                if carer != center:
                    repaired.append((carer, center))

    # (3) self-repair
    self_repaired: list[int] = []
    p_self = params.self_repair_prob
    if p_self > 0.0:
        u_self = state._u_self[t]
        for center in range(1, n + 1):
            if state.broken[center] and u_self[center - 1] < p_self:
                state.broken[center] = False
                self_repaired.append(center)

    # (4) processing
    occ = state.chain_occ
    processed: list[int] = []
    broke: list[int] = []
    released: set[int] = set()
    u_break = state._u_break[t]
    for center in range(1, n + 1):
        pi = ci.proc_of_center[center]
        if not occ[pi] or state.broken[center]:
            continue
        anchor = m.center_anchor[center]
        owner = state._slot_of_center[center]
        if occ_agents.get(anchor.center_tile) != owner:
            continue
        released.add(pi)
        processed.append(center)
        rewards[owner] += 1
        state.total_rewards[owner] += 1
        if u_break[center - 1] < params.break_prob:
            state.broken[center] = True
            broke.append(center)

    # (5) unit flow, downstream first
    sank = 0
    discarded = 0
    succ = ci.succ
    sink_flags = ci.sink_flags
    proc_center = ci.proc_center
    branch_row = state._u_branch[t]
    branch_pos = {idx: k for k, idx in enumerate(ci.branch_indices)}

    deferred: set[int] = set()
    if ci.merge_indices:
        merge_row = state._u_merge[t]
        for k, mi in enumerate(ci.merge_indices):
            movers = [
                p
                for p in ci.pred[mi]
                if occ[p]
                and not (proc_center[p] and p not in released)
                and _chosen_succ(p, succ, branch_pos, branch_row) == mi
            ]
            if len(movers) == 2:
                loser = movers[1 - merge_row[k]]
                deferred.add(loser)

    for idx in range(len(occ) - 1, -1, -1):
        if not occ[idx]:
            continue
        if proc_center[idx] and idx not in released:
            continue  # held until its owner processes it
        if idx in deferred:
            continue
        nxt = _chosen_succ(idx, succ, branch_pos, branch_row)
        if nxt is None:
            continue
        occ[idx] = 0
        if sink_flags[nxt]:
            sank += 1
        elif occ[nxt]:
            discarded += 1  # blocked moves discard the moving unit
        else:
            occ[nxt] = 1
    state.total_sank += sank
    state.total_discarded += discarded

    # (6) spawning
    u_spawn = state._u_spawn[t]
    spawned: list[int] = []
    for k, si in enumerate(ci.source_indices):
        if u_spawn[k] < params.spawn_prob and not occ[si]:
            occ[si] = 1
            state.spawned_per_source[k] += 1
            spawned.append(1)
        else:
            spawned.append(0)

    # (7) advance the clock
    state.step_count = t + 1

    events = StepEvents(
        processed=tuple(processed),
        broke=tuple(broke),
        repaired=tuple(repaired),
        self_repaired=tuple(self_repaired),
        spawned=tuple(spawned),
        discarded=discarded,
        sank=sank,
    )
    return events, rewards


def _chosen_succ(idx, succ, branch_pos, branch_row):
    s = succ[idx]
    if not s:
        return None
    if len(s) == 1:
        return s[0]
    return s[branch_row[branch_pos[idx]]]


def _move_agents(state: WorldState, actions) -> None:
    m = state.tilemap
    cur = state.agent_pos
    desired: list[Cell] = []
    for slot, a in enumerate(actions):
        a = int(a)
        if not (0 <= a < len(ACTIONS)):
            raise ValueError(f"action {a} for slot {slot} not in [0, 5)")
        dx, dy = ACTION_DELTAS[a]
        target = (cur[slot][0] + dx, cur[slot][1] + dy)
        desired.append(target if m.is_walkable(target) else cur[slot])

    # Contested targets: uniformly random winner, losers stay.
    groups: dict[Cell, list[int]] = {}
    for slot, target in enumerate(desired):
        if target != cur[slot]:
            groups.setdefault(target, []).append(slot)
    rng = state._conflict_rng
    for target in sorted((c for c, g in groups.items() if len(g) > 1), key=lambda c: (c[1], c[0])):
        group = groups[target]
        winner = group[int(rng.integers(len(group)))]
        for slot in group:
            if slot != winner:
                desired[slot] = cur[slot]

    # Commit moves whose target frees up; swaps and rotations stay put.
    occ = {p: s for s, p in enumerate(cur)}
    pending = [s for s in range(len(cur)) if desired[s] != cur[s]]
    progress = True
    while pending and progress:
        progress = False
        for slot in list(pending):
            target = desired[slot]
            if target not in occ:
                del occ[cur[slot]]
                occ[target] = slot
                cur[slot] = target
                pending.remove(slot)
                progress = True


# ---------------------------------------------------------------------------
# observations


def _base_canvas(state: WorldState, slot: int) -> np.ndarray:
    cached = state._base_rgb.get(slot)
    if cached is not None:
        return cached
    m = state.tilemap
    kind_color = {
        FLOOR: COLOR_TABLE["floor"],
        WALL: COLOR_TABLE["wall"],
        PATH: COLOR_TABLE["path"],
        PROCESSING: COLOR_TABLE["processing"],
        CENTER: COLOR_TABLE["center_tile"],
        REPAIR: COLOR_TABLE["repair_tile"],
        SOURCE: COLOR_TABLE["source"],
        SINK: COLOR_TABLE["sink"],
    }
    palette = np.zeros((8, 3), dtype=np.uint8)
    for k, c in kind_color.items():
        palette[k] = c
    canvas = palette[state.tilemap.kinds]
    own = m.center_anchor[state.assignment[slot]]
    canvas[own.center_tile[1], own.center_tile[0]] = COLOR_TABLE["own_center_tile"]
    canvas[own.repair_tile[1], own.repair_tile[0]] = COLOR_TABLE["own_repair_tile"]
    state._base_rgb[slot] = canvas
    return canvas


def observe(state: WorldState, slot: int, mode: str | None = None) -> np.ndarray:
    """Egocentric 13x13x3 uint8 window centered on the agent.

    Cells beyond the map render as wall; the observing agent is always the
    center pixel in the self color. mode="full" returns the whole map
    instead (uncalibrated convenience view).
    """
    mode = mode or state.params.obs_mode
    m = state.tilemap
    ci = m.chain_index()
    canvas = _base_canvas(state, slot).copy()

    for center in range(1, state.topology.num_centers + 1):
        if state.broken[center]:
            x, y = m.center_anchor[center].processing
            canvas[y, x] = COLOR_TABLE["processing_broken"]
    unit_color = COLOR_TABLE["unit"]
    for idx, occupied in enumerate(state.chain_occ):
        if occupied:
            x, y = ci.cells[idx]
            canvas[y, x] = unit_color
    for s, (x, y) in enumerate(state.agent_pos):
        canvas[y, x] = COLOR_TABLE["agent_other" if s != slot else "agent_self"]

    if mode == "full":
        return canvas

    ax, ay = state.agent_pos[slot]
    obs = np.empty((OBS_SIZE, OBS_SIZE, 3), dtype=np.uint8)
    obs[:, :] = COLOR_TABLE["wall"]
    x0, y0 = ax - OBS_HALF, ay - OBS_HALF
    sx0, sy0 = max(0, x0), max(0, y0)
    sx1, sy1 = min(m.width, x0 + OBS_SIZE), min(m.height, y0 + OBS_SIZE)
    if sx0 < sx1 and sy0 < sy1:
        obs[sy0 - y0 : sy1 - y0, sx0 - x0 : sx1 - x0] = canvas[sy0:sy1, sx0:sx1]
    return obs


# ---------------------------------------------------------------------------
# episode logs


@dataclass
class EpisodeLog:
    header: dict
    steps: list[StepRecord]
    final_units: int = 0

    @property
    def episode_length(self) -> int:
        return int(self.header["params"]["episode_length"])

    def require_complete(self) -> None:
        if len(self.steps) != self.episode_length:
            raise TruncatedLog(
                f"log has {len(self.steps)} steps, expected {self.episode_length}"
            )

    def totals(self) -> dict[str, int]:
        spawned = sum(sum(r.events.spawned) for r in self.steps)
        sank = sum(r.events.sank for r in self.steps)
        discarded = sum(r.events.discarded for r in self.steps)
        return {"spawned": spawned, "sank": sank, "discarded": discarded}


def make_log_header(
    t: Topology,
    m: TileMap,
    assignment: tuple[int, ...],
    params: EnvParams,
    seed: int,
    episode_index: int,
    policies: list[str] | None = None,
    config_hash: str | None = None,
) -> dict:
    return {
        "format": "supplysim-episode",
        "version": 1,
        "seed": int(seed),
        "episode_index": int(episode_index),
        "num_centers": t.num_centers,
        "edges": [list(e) for e in t.edges],
        "layout_style": m.style,
        "layout_spacing": m.spacing,
        "params": {
            "episode_length": params.episode_length,
            "spawn_prob": params.spawn_prob,
            "break_prob": params.break_prob,
            "repair_time": "inf" if math.isinf(params.repair_time) else params.repair_time,
            "two_agent_repair_enabled": params.two_agent_repair_enabled,
        },
        "assignment": list(assignment),
        "policies": list(policies) if policies is not None else None,
        "config_hash": config_hash,
    }


def params_from_header(header: dict) -> EnvParams:
    p = header["params"]
    rt = p["repair_time"]
    return EnvParams(
        episode_length=int(p["episode_length"]),
        spawn_prob=float(p["spawn_prob"]),
        break_prob=float(p["break_prob"]),
        repair_time=math.inf if rt == "inf" else float(rt),
        two_agent_repair_enabled=bool(p["two_agent_repair_enabled"]),
    )


def log_to_jsonl(log: EpisodeLog) -> str:
    lines = [_dumps({"header": log.header})]
    for r in log.steps:
        lines.append(
            _dumps(
                {
                    "t": r.t,
                    "actions": list(r.actions),
                    "rewards": list(r.rewards),
                    "events": {
                        "processed": list(r.events.processed),
                        "broke": list(r.events.broke),
                        "repaired": [list(p) for p in r.events.repaired],
                        "self_repaired": list(r.events.self_repaired),
                        "spawned": list(r.events.spawned),
                        "discarded": r.events.discarded,
                        "sank": r.events.sank,
                    },
                }
            )
        )
    lines.append(_dumps({"final_units": log.final_units}))
    return "\n".join(lines) + "\n"


def log_from_jsonl(text: str) -> EpisodeLog:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise TruncatedLog("empty log")
    first = json.loads(lines[0])
    if "header" not in first:
        raise TruncatedLog("log is missing its header line")
    steps: list[StepRecord] = []
    final_units = None
    for ln in lines[1:]:
        rec = json.loads(ln)
        if "final_units" in rec:
            final_units = int(rec["final_units"])
            continue
        ev = rec["events"]
        steps.append(
            StepRecord(
                t=int(rec["t"]),
                actions=tuple(rec["actions"]),
                rewards=tuple(rec["rewards"]),
                events=StepEvents(
                    processed=tuple(ev["processed"]),
                    broke=tuple(ev["broke"]),
                    repaired=tuple(tuple(p) for p in ev["repaired"]),
                    self_repaired=tuple(ev["self_repaired"]),
                    spawned=tuple(ev["spawned"]),
                    discarded=int(ev["discarded"]),
                    sank=int(ev["sank"]),
                ),
            )
        )
    if final_units is None:
        raise TruncatedLog("log is missing its final-units line")
    return EpisodeLog(header=first["header"], steps=steps, final_units=final_units)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def run_episode(
    m: TileMap,
    t: Topology,
    assignment,
    params: EnvParams,
    policies,
    seed: int,
    episode_index: int = 0,
    config_hash: str | None = None,
) -> EpisodeLog:
    """Drive a full episode with per-slot policies and record everything.

    The log plus the header is sufficient to reconstruct the episode
    exactly (same seed, same actions replayed).
    """
    state = init_episode(m, t, assignment, params, seed, episode_index)
    for slot, policy in enumerate(policies):
        policy.begin_episode(state, slot, stream_rng(seed, episode_index, POLICY_STREAM_BASE + slot))
    header = make_log_header(
        t, m, state.assignment, params, seed, episode_index,
        policies=[getattr(p, "name", type(p).__name__) for p in policies],
        config_hash=config_hash,
    )
    steps: list[StepRecord] = []
    while not is_terminal(state):
        actions = tuple(int(p.act(state)) for p in policies)
        tnow = state.step_count
        events, rewards = step(state, actions)
        for policy in policies:
            policy.on_events(events, tnow)
        steps.append(StepRecord(t=tnow, actions=actions, rewards=tuple(rewards), events=events))
    return EpisodeLog(header=header, steps=steps, final_units=state.units_in_flight())


def run_scheduled_episode(
    m: TileMap,
    t: Topology,
    assignment,
    params: EnvParams,
    schedule,
    seed: int,
    episode_index: int = 0,
) -> EpisodeLog:
    """Travel-contracted test mode: agent presence comes from `schedule`.

    schedule(slot, t) returns the cell the slot occupies at step t, or None
    when absent. Used for the queue-oracle equivalence checks only.
    """
    state = init_episode(m, t, assignment, params, seed, episode_index)
    header = make_log_header(t, m, state.assignment, params, seed, episode_index, policies=["scheduled"])
    steps: list[StepRecord] = []
    wait_all = tuple([WAIT] * state.num_slots)
    while not is_terminal(state):
        tnow = state.step_count
        forced = [schedule(slot, tnow) for slot in range(state.num_slots)]
        events, rewards = step(state, wait_all, forced_positions=forced)
        steps.append(StepRecord(t=tnow, actions=wait_all, rewards=tuple(rewards), events=events))
    return EpisodeLog(header=header, steps=steps, final_units=state.units_in_flight())
