"""Named scenario presets mirroring the mechanism-design experiments."""

from __future__ import annotations

PRESETS: dict[str, str] = {}


def _preset(name: str, text: str) -> None:
    PRESETS[name] = text


_preset(
    "baseline_circular",
    """\
name = "baseline_circular"

[topology]
num_centers = 4
edges = [[1, 2], [2, 3], [3, 4]]

[layout]
style = "circular"

[env]
episode_length = 1000
spawn_prob = 0.10
break_prob = 0.25
repair_time = "inf"

[run]
policies = ["reciprocal", "reciprocal", "reciprocal", "reciprocal"]
episodes = 1
seeds = [1, 2, 3, 4, 5, 6, 7, 8]
""",
)

_preset(
    "selfish_circular",
    """\
name = "selfish_circular"

[topology]
num_centers = 4
edges = [[1, 2], [2, 3], [3, 4]]

[layout]
style = "circular"

[env]
repair_time = "inf"

[run]
policies = ["selfish", "selfish", "selfish", "selfish"]
episodes = 1
seeds = [1, 2, 3, 4, 5, 6, 7, 8]
""",
)

_preset(
    "carer_circular",
    """\
name = "carer_circular"

[topology]
num_centers = 4
edges = [[1, 2], [2, 3], [3, 4]]

[layout]
style = "circular"

[env]
repair_time = "inf"

[run]
policies = ["carer", "carer", "carer", "carer"]
episodes = 1
seeds = [1, 2, 3, 4, 5, 6, 7, 8]
""",
)

# Self-repair speed sweep; 10 and inf are the documented endpoints, the
# intermediate values bracket them log-uniformly.
_preset(
    "repair_time_sweep",
    """\
name = "repair_time_sweep"

[topology]
num_centers = 4
edges = [[1, 2], [2, 3], [3, 4]]

[layout]
style = "circular"

[env]
repair_time = "inf"

[run]
policies = ["reciprocal", "reciprocal", "reciprocal", "reciprocal"]
episodes = 4
seeds = [1, 2, 3, 4, 5, 6, 7, 8]

[sweep]
"env.repair_time" = [10, 30, 100, 300, "inf"]
""",
)

_preset(
    "linear_distance_sweep",
    """\
name = "linear_distance_sweep"

[topology]
num_centers = 4
edges = [[1, 2], [2, 3], [3, 4]]

[layout]
style = "linear"
spacing = 2

[env]
repair_time = "inf"

[run]
policies = ["carer", "carer", "carer", "carer"]
episodes = 4
seeds = [1, 2, 3, 4, 5, 6, 7, 8]

[sweep]
"layout.spacing" = [2, 3, 4, 5, 6, 7]
""",
)

_preset(
    "env1",
    """\
name = "env1"

[topology]
num_centers = 4
edges = [[1, 2], [1, 3], [3, 4]]

[layout]
style = "branched"
spacing = 4

[env]
repair_time = "inf"

[run]
policies = ["carer", "carer", "carer", "carer"]
episodes = 4
seeds = [1, 2, 3, 4, 5, 6, 7, 8]
""",
)

_preset(
    "env2",
    """\
name = "env2"

[topology]
num_centers = 4
edges = [[1, 2], [2, 3], [2, 4]]

[layout]
style = "branched"
spacing = 4

[env]
repair_time = "inf"

[run]
policies = ["carer", "carer", "carer", "carer"]
episodes = 4
seeds = [1, 2, 3, 4, 5, 6, 7, 8]
""",
)

_preset(
    "env3",
    """\
name = "env3"

[topology]
num_centers = 4
edges = [[1, 2], [1, 3], [2, 4], [3, 4]]

[layout]
style = "branched"
spacing = 4

[env]
repair_time = "inf"

[run]
policies = ["carer", "carer", "carer", "carer"]
episodes = 4
seeds = [1, 2, 3, 4, 5, 6, 7, 8]
""",
)

# Desk-scale learning smoke: two learners on a two-center chain with fast
# self-repair for a dense reward signal.
_preset(
    "smoke_train",
    """\
name = "smoke_train"

[topology]
num_centers = 2
edges = [[1, 2]]

[layout]
style = "linear"
spacing = 2

[env]
episode_length = 250
spawn_prob = 0.25
break_prob = 0.25
repair_time = 5

[run]
policies = ["learned", "learned"]
episodes = 5
seeds = [1]

[train]
total_steps = 500000
parallel_envs = 8
unroll_length = 20
learning_rate = 0.0004
entropy_weight = 0.01
normalize_advantage = true
max_grad_norm = 0.5
assignment_mode = "fixed"
population_size = 2
eval_episodes = 20
""",
)

# Short deterministic episode used by the foreign-binding parity tests.
_preset(
    "binding_parity",
    """\
name = "binding_parity"

[topology]
num_centers = 4
edges = [[1, 2], [2, 3], [3, 4]]

[layout]
style = "circular"

[env]
episode_length = 40
spawn_prob = 0.25
break_prob = 0.25
repair_time = 20

[run]
policies = ["wait", "wait", "wait", "wait"]
episodes = 1
seeds = [1]
""",
)
