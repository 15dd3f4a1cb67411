"""Scenario configs: TOML scenarios, resolution, hashing and presets.

One file = one scenario. The grammar is plain TOML: a [topology] table
(num_centers, edges), a [layout] table (style, spacing), an [env] table
(episode_length, spawn_prob, break_prob, repair_time with "inf" allowed,
two_agent_repair), a [run] table (policies, episodes, seeds, optional
assignment and reciprocity_window), an optional [sweep] table of dotted
parameter paths to value lists, and an optional [train] table mirroring
TrainConfig fields plus eval_episodes.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .engine import EnvParams
from .layout import LAYOUT_STYLES, TileMap, generate_layout
from .policies import POLICY_NAMES
from .topology import Topology, build_topology

SEED_ENV_VAR = "SUPPLY_SEED"


class ConfigParse(ValueError):
    pass


class PresetUnknown(ValueError):
    pass


class UnknownParameter(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    topology: Topology
    layout_style: str
    spacing: int
    env: EnvParams
    policies: list[str]
    reciprocity_window: int
    episodes: int
    seeds: list[int]
    assignment: list[int]
    sweep: dict[str, list] = field(default_factory=dict)
    train: dict = field(default_factory=dict)

    def tilemap(self) -> TileMap:
        return generate_layout(self.topology, self.layout_style, self.spacing)

    def resolved(self) -> dict:
        """Canonical plain-data form (hashable, diffable, picklable)."""
        return {
            "name": self.name,
            "topology": {
                "num_centers": self.topology.num_centers,
                "edges": [list(e) for e in self.topology.edges],
            },
            "layout": {"style": self.layout_style, "spacing": self.spacing},
            "env": {
                "episode_length": self.env.episode_length,
                "spawn_prob": self.env.spawn_prob,
                "break_prob": self.env.break_prob,
                "repair_time": "inf" if math.isinf(self.env.repair_time) else self.env.repair_time,
                "two_agent_repair": self.env.two_agent_repair_enabled,
            },
            "run": {
                "policies": list(self.policies),
                "reciprocity_window": self.reciprocity_window,
                "episodes": self.episodes,
                "seeds": list(self.seeds),
                "assignment": list(self.assignment),
            },
            "sweep": {k: list(v) for k, v in sorted(self.sweep.items())},
            "train": dict(sorted(self.train.items())),
        }


def config_hash(scenario: Scenario) -> str:
    blob = json.dumps(scenario.resolved(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _get(table: dict, key: str, default=None, required=False):
    if key in table:
        return table[key]
    if required:
        raise ConfigParse(f"missing required key {key!r}")
    return default


def parse_scenario(text: str, name_hint: str = "scenario") -> Scenario:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigParse(f"TOML parse error: {e}") from e
    return scenario_from_dict(doc, name_hint)


def scenario_from_dict(doc: dict, name_hint: str = "scenario") -> Scenario:
    try:
        topo_t = _get(doc, "topology", required=True)
        topology = build_topology(
            int(_get(topo_t, "num_centers", required=True)),
            [tuple(e) for e in _get(topo_t, "edges", [])],
        )
        lay = _get(doc, "layout", {})
        style = _get(lay, "style", "circular")
        if style not in LAYOUT_STYLES:
            raise ConfigParse(f"layout.style must be one of {LAYOUT_STYLES}, got {style!r}")
        spacing = int(_get(lay, "spacing", 2))

        env_t = _get(doc, "env", {})
        rt = _get(env_t, "repair_time", "inf")
        env = EnvParams(
            episode_length=int(_get(env_t, "episode_length", 1000)),
            spawn_prob=float(_get(env_t, "spawn_prob", 0.10)),
            break_prob=float(_get(env_t, "break_prob", 0.25)),
            repair_time=math.inf if rt in ("inf", None) else float(rt),
            two_agent_repair_enabled=bool(_get(env_t, "two_agent_repair", True)),
        )

        run_t = _get(doc, "run", {})
        n = topology.num_centers
        policies = list(_get(run_t, "policies", ["selfish"] * n))
        for p in policies:
            if p not in POLICY_NAMES and p != "learned":
                raise ConfigParse(f"unknown policy {p!r} in run.policies")
        if len(policies) != n:
            raise ConfigParse(f"run.policies needs {n} entries, got {len(policies)}")
        seeds = [int(s) for s in _get(run_t, "seeds", [1])]
        if not seeds:
            raise ConfigParse("run.seeds must be nonempty")
        if os.environ.get(SEED_ENV_VAR):
            seeds = [int(os.environ[SEED_ENV_VAR])]
        assignment = [int(c) for c in _get(run_t, "assignment", list(range(1, n + 1)))]

        sweep = {str(k): list(v) for k, v in _get(doc, "sweep", {}).items()}
        train = dict(_get(doc, "train", {}))

        return Scenario(
            name=str(_get(doc, "name", name_hint)),
            topology=topology,
            layout_style=style,
            spacing=spacing,
            env=env,
            policies=policies,
            reciprocity_window=int(_get(run_t, "reciprocity_window", 200)),
            episodes=int(_get(run_t, "episodes", 1)),
            seeds=seeds,
            assignment=assignment,
            sweep=sweep,
            train=train,
        )
    except ConfigParse:
        raise
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigParse(f"invalid scenario: {e}") from e


def apply_override(doc: dict, path: str, value) -> None:
    """Set a dotted parameter path (e.g. env.repair_time) in a config dict."""
    parts = path.split(".")
    cur = doc
    for p in parts[:-1]:
        if not isinstance(cur, dict) or p not in cur:
            raise UnknownParameter(f"unknown parameter path {path!r}")
        cur = cur[p]
    last = parts[-1]
    if not isinstance(cur, dict) or last not in cur:
        raise UnknownParameter(f"unknown parameter path {path!r}")
    cur[last] = value
