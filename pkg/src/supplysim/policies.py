"""Scripted agent policies: baselines, oracles and evaluation partners.

Scripted policies are omniscient (they read the full world state, unlike
learned policies, which see 13x13 observations); they are surrogates for
the converged behaviors studied in the experiments, not models of them.
All of them are deterministic functions of (state, policy stream).
"""

from __future__ import annotations

import numpy as np

from .engine import ACTION_DELTAS, WAIT, WorldState
from .layout import Cell, TileMap

_OPPOSITE = (1, 0, 3, 2)  # up<->down, left<->right


class NoPath(Exception):
    """No walkable route to the requested tile (malformed map)."""


def walk_table(m: TileMap, target: Cell):
    """(action, distance) lookup tables toward `target` over walkable cells.

    Computed once per (map, target) and cached on the map. Ties are broken
    by scan order, so paths are deterministic.
    """
    cached = m._walk_cache.get(target)
    if cached is not None:
        return cached
    w = m.width
    dist: dict[Cell, int] = {target: 0}
    act: dict[Cell, int] = {target: WAIT}
    frontier = [target]
    while frontier:
        frontier.sort(key=lambda c: (c[1], c[0]))
        nxt: list[Cell] = []
        for cell in frontier:
            d = dist[cell]
            for a in range(4):
                dx, dy = ACTION_DELTAS[a]
                nb = (cell[0] + dx, cell[1] + dy)
                if nb not in dist and m.is_walkable(nb):
                    dist[nb] = d + 1
                    act[nb] = _OPPOSITE[a]
                    nxt.append(nb)
        frontier = nxt
    m._walk_cache[target] = (act, dist)
    return act, dist


class ScriptedPolicy:
    name = "scripted"

    def begin_episode(self, state: WorldState, slot: int, rng: np.random.Generator) -> None:
        self.slot = slot
        self.center = state.assignment[slot]
        self.rng = rng

    def act(self, state: WorldState) -> int:
        raise NotImplementedError

    def on_events(self, events, t: int) -> None:
        pass

    def _step_toward(self, state: WorldState, target: Cell) -> int:
        pos = state.agent_pos[self.slot]
        if pos == target:
            return WAIT
        act, dist = walk_table(state.tilemap, target)
        if pos not in dist:
            raise NoPath(f"no walkable path from {pos} to {target}")
        return act[pos]


class WaitPolicy(ScriptedPolicy):
    name = "wait"

    def act(self, state: WorldState) -> int:
        return WAIT


class RandomPolicy(ScriptedPolicy):
    name = "random"

    def act(self, state: WorldState) -> int:
        return int(self.rng.integers(5))


class SelfishPolicy(ScriptedPolicy):
    """Head for the own center tile and never leave it."""

    name = "selfish"

    def act(self, state: WorldState) -> int:
        return self._step_toward(state, state.tilemap.center_anchor[self.center].center_tile)


class CarerPolicy(ScriptedPolicy):
    """Help at the nearest broken center; otherwise behave selfishly.

    Target is the broken center's repair tile when free, else its center
    tile; ties between equidistant broken centers go to the lower index.
    """

    name = "carer"

    def act(self, state: WorldState) -> int:
        targets = self._broken_targets(state)
        if targets is None:
            return SelfishPolicy.act(self, state)
        if targets == WAIT:
            return WAIT
        return self._step_toward(state, targets)

    def _helpable(self, state: WorldState, center: int) -> bool:
        return True

    def _broken_targets(self, state: WorldState):
        """None = nothing to do; WAIT = already in position; else a Cell."""
        broken = [
            c
            for c in range(1, state.topology.num_centers + 1)
            if state.broken[c] and self._helpable(state, c)
        ]
        if not broken:
            return None
        m = state.tilemap
        pos = state.agent_pos[self.slot]
        for c in broken:
            a = m.center_anchor[c]
            if pos in (a.repair_tile, a.center_tile):
                return WAIT
        others = {p for s, p in enumerate(state.agent_pos) if s != self.slot}
        best = None
        for c in broken:
            a = m.center_anchor[c]
            if a.repair_tile not in others:
                tile = a.repair_tile
            elif a.center_tile not in others:
                tile = a.center_tile
            else:
                continue
            _, dist = walk_table(m, tile)
            if pos not in dist:
                raise NoPath(f"no walkable path from {pos} to {tile}")
            key = (dist[pos], c)
            if best is None or key < best[0]:
                best = (key, tile)
        if best is None:
            return None
        return best[1]


class ReciprocalPolicy(CarerPolicy):
    """Tit-for-tat carer: helps center j only while j's care is fresh.

    Optimistic start: before this agent's own center ever breaks, everyone
    is helpable. Afterwards a partner stays helpable for `window` steps
    after each repair it performed on this agent's center. The own center
    is always attended.
    """

    name = "reciprocal"

    def __init__(self, window: int = 200):
        self.window = int(window)

    def begin_episode(self, state, slot, rng):
        super().begin_episode(state, slot, rng)
        self.last_help: dict[int, int] = {}
        self.ever_broken = False
        self.now = 0

    def on_events(self, events, t: int) -> None:
        self.now = t + 1
        if self.center in events.broke:
            self.ever_broken = True
        for carer, owner in events.repaired:
            if owner == self.center and carer != self.center:
                self.last_help[carer] = t

    def _helpable(self, state: WorldState, center: int) -> bool:
        if center == self.center or not self.ever_broken:
            return True
        last = self.last_help.get(center)
        return last is not None and (self.now - last) <= self.window


POLICY_NAMES = ("selfish", "carer", "reciprocal", "random", "wait")


def make_policy(name: str, window: int = 200) -> ScriptedPolicy:
    if name == "selfish":
        return SelfishPolicy()
    if name == "carer":
        return CarerPolicy()
    if name == "reciprocal":
        return ReciprocalPolicy(window=window)
    if name == "random":
        return RandomPolicy()
    if name == "wait":
        return WaitPolicy()
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")


def make_policies(names, window: int = 200) -> list[ScriptedPolicy]:
    return [make_policy(n, window=window) for n in names]
