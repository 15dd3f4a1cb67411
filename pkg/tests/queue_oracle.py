"""Gridless discrete queue simulator: the independent oracle for the engine.

Centers are stations on an abstract chain of slots (the linearized chain
cells); agent presence is an input schedule rather than simulated travel.
The oracle re-implements the per-step dynamics (repair, self-repair,
processing, unit flow, spawning) from scratch on plain lists, consuming
the same named random streams as the engine so that event streams can be
compared exactly. It never imports the engine's step logic.
"""

from __future__ import annotations

from dataclasses import dataclass

from supplysim.engine import (
    STREAM_BRANCH,
    STREAM_MERGE,
    STREAM_SELF_REPAIR,
    STREAM_SPAWN,
    STREAM_BREAK,
    stream_rng,
)


@dataclass
class ChainSpec:
    """Abstract chain extracted from a TileMap's public chain index."""

    num_slots: int
    succ: list[tuple[int, ...]]
    pred: list[tuple[int, ...]]
    proc_center: list[int]  # 0 = plain slot
    sink_flags: list[bool]
    source_indices: list[int]
    branch_indices: list[int]
    merge_indices: list[int]
    num_centers: int

    @classmethod
    def from_tilemap(cls, m) -> "ChainSpec":
        ci = m.chain_index()
        return cls(
            num_slots=len(ci.cells),
            succ=list(ci.succ),
            pred=list(ci.pred),
            proc_center=list(ci.proc_center),
            sink_flags=list(ci.sink_flags),
            source_indices=list(ci.source_indices),
            branch_indices=list(ci.branch_indices),
            merge_indices=list(ci.merge_indices),
            num_centers=len(ci.proc_of_center),
        )


def make_schedules(m, topo, assignment, seed):
    """Mirrored presence schedules for the engine's travel-contracted mode
    and the oracle: each slot holds its own center tile most of a period,
    then staffs the next slot's repair tile, then is absent."""
    n = topo.num_centers
    anchors = m.center_anchor

    def symbolic(slot, t):
        c = assignment[slot]
        period = 10 + 3 * (slot + seed % 5)
        phase = t % period
        if phase < period - 4:
            return ("center", c)
        if slot + 1 < n and phase < period - 2:
            return ("repair", assignment[slot + 1])
        return None

    def engine_schedule(slot, t):
        sym = symbolic(slot, t)
        if sym is None:
            return None
        kind, c = sym
        return anchors[c].center_tile if kind == "center" else anchors[c].repair_tile

    def oracle_presence(t):
        on_center: dict[int, int] = {}
        on_repair: dict[int, int] = {}
        for slot in range(len(assignment)):
            sym = symbolic(slot, t)
            if sym is None:
                continue
            kind, c = sym
            if kind == "center":
                on_center[c] = assignment[slot]
            else:
                on_repair[c] = assignment[slot]
        owners = {c for c, who in on_center.items() if who == c}
        pairs = {c: (on_center[c], on_repair[c]) for c in on_repair if c in on_center}
        return owners, pairs

    return engine_schedule, oracle_presence


def events_of_record(rec) -> dict:
    """The engine StepRecord's events as a plain comparable dict."""
    return {
        "processed": rec.events.processed,
        "broke": rec.events.broke,
        "repaired": rec.events.repaired,
        "self_repaired": rec.events.self_repaired,
        "spawned": rec.events.spawned,
        "discarded": rec.events.discarded,
        "sank": rec.events.sank,
    }


def simulate_queue(
    chain: ChainSpec,
    episode_length: int,
    spawn_prob: float,
    break_prob: float,
    self_repair_prob: float,
    presence,  # presence(t) -> (set of centers with owner present, set of centers manually repaired-capable, carer map)
    seed: int,
    episode_index: int = 0,
):
    """Run the abstract station simulation; returns a list of event dicts.

    `presence(t)` must return (owners_present, repair_pairs) where
    owners_present is the set of centers whose owner stands on the center
    tile at step t and repair_pairs maps a broken-capable center to the
    (carer_center_on_center_tile, carer_center_on_repair_tile) pair
    standing at its two repair positions (absent key = no full pair).
    """
    t_steps = episode_length
    n = chain.num_centers
    u_spawn = stream_rng(seed, episode_index, STREAM_SPAWN).random(
        (t_steps, max(1, len(chain.source_indices)))
    )
    u_break = stream_rng(seed, episode_index, STREAM_BREAK).random((t_steps, n))
    u_self = stream_rng(seed, episode_index, STREAM_SELF_REPAIR).random((t_steps, n))
    u_branch = stream_rng(seed, episode_index, STREAM_BRANCH).integers(
        0, 2, (t_steps, max(1, len(chain.branch_indices)))
    )
    u_merge = stream_rng(seed, episode_index, STREAM_MERGE).integers(
        0, 2, (t_steps, max(1, len(chain.merge_indices)))
    )

    proc_of_center = {c: i for i, c in enumerate(chain.proc_center) if c}
    branch_pos = {idx: k for k, idx in enumerate(chain.branch_indices)}
    occ = [0] * chain.num_slots
    broken = [False] * (n + 1)
    events = []

    for t in range(t_steps):
        owners_present, repair_pairs = presence(t)

        repaired = []
        for center in range(1, n + 1):
            if broken[center] and center in repair_pairs:
                broken[center] = False
                for carer in repair_pairs[center]:
                    if carer != center:
                        repaired.append((carer, center))

        self_repaired = []
        if self_repair_prob > 0.0:
            for center in range(1, n + 1):
                if broken[center] and u_self[t, center - 1] < self_repair_prob:
                    broken[center] = False
                    self_repaired.append(center)

        processed = []
        broke = []
        released = set()
        for center in range(1, n + 1):
            pi = proc_of_center[center]
            if occ[pi] and not broken[center] and center in owners_present:
                released.add(pi)
                processed.append(center)
                if u_break[t, center - 1] < break_prob:
                    broken[center] = True
                    broke.append(center)

        def chosen(idx):
            s = chain.succ[idx]
            if not s:
                return None
            if len(s) == 1:
                return s[0]
            return s[u_branch[t, branch_pos[idx]]]

        deferred = set()
        for k, mi in enumerate(chain.merge_indices):
            movers = [
                p
                for p in chain.pred[mi]
                if occ[p]
                and not (chain.proc_center[p] and p not in released)
                and chosen(p) == mi
            ]
            if len(movers) == 2:
                deferred.add(movers[1 - int(u_merge[t, k])])

        sank = 0
        discarded = 0
        for idx in range(chain.num_slots - 1, -1, -1):
            if not occ[idx]:
                continue
            if chain.proc_center[idx] and idx not in released:
                continue
            if idx in deferred:
                continue
            nxt = chosen(idx)
            if nxt is None:
                continue
            occ[idx] = 0
            if chain.sink_flags[nxt]:
                sank += 1
            elif occ[nxt]:
                discarded += 1
            else:
                occ[nxt] = 1

        spawned = []
        for k, si in enumerate(chain.source_indices):
            if u_spawn[t, k] < spawn_prob and not occ[si]:
                occ[si] = 1
                spawned.append(1)
            else:
                spawned.append(0)

        events.append(
            {
                "processed": tuple(processed),
                "broke": tuple(broke),
                "repaired": tuple(repaired),
                "self_repaired": tuple(self_repaired),
                "spawned": tuple(spawned),
                "discarded": discarded,
                "sank": sank,
            }
        )
    return events
