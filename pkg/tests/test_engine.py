import math

import numpy as np
import pytest

from supplysim.engine import (
    WAIT,
    BadAssignment,
    EnvParams,
    EpisodeOver,
    TruncatedLog,
    COLOR_TABLE,
    init_episode,
    is_terminal,
    log_from_jsonl,
    log_to_jsonl,
    observe,
    run_episode,
    run_scheduled_episode,
    step,
)
from supplysim.layout import generate_layout
from supplysim.policies import make_policies
from supplysim.topology import build_topology

from queue_oracle import ChainSpec, events_of_record, make_schedules, simulate_queue

CHAIN4 = build_topology(4, [(1, 2), (2, 3), (3, 4)])
CHAIN1 = build_topology(1, [])
ENV3 = build_topology(4, [(1, 2), (1, 3), (2, 4), (3, 4)])

IDENT4 = (1, 2, 3, 4)


def circular_map():
    return generate_layout(CHAIN4, "circular")


def params(**kw):
    return EnvParams(**kw)


def test_init_contract():
    m = circular_map()
    s = init_episode(m, CHAIN4, IDENT4, params(), seed=7)
    assert s.step_count == 0
    assert s.units_in_flight() == 0
    assert len(s.agent_pos) == 4
    assert len(set(s.agent_pos)) == 4
    assert not any(s.broken)
    for slot, cell in enumerate(s.agent_pos):
        assert m.kind_at(cell) == 0  # floor, not the center tile itself


def test_init_deterministic():
    m = circular_map()
    a = init_episode(m, CHAIN4, IDENT4, params(), seed=7)
    b = init_episode(m, CHAIN4, IDENT4, params(), seed=7)
    assert a.agent_pos == b.agent_pos
    assert a._u_spawn == b._u_spawn
    assert a._u_break == b._u_break


def test_bad_assignment():
    m = circular_map()
    with pytest.raises(BadAssignment):
        init_episode(m, CHAIN4, (1, 1, 2, 3), params(), seed=0)


def test_map_topology_mismatch():
    m = generate_layout(CHAIN4, "linear", 2)
    other = build_topology(4, [(1, 2), (1, 3), (3, 4)])
    from supplysim.engine import MapTopologyMismatch

    with pytest.raises(MapTopologyMismatch):
        init_episode(m, other, IDENT4, params(), seed=0)


def test_two_agent_repair_records_care():
    m = circular_map()
    s = init_episode(m, CHAIN4, IDENT4, params(), seed=3)
    s.broken[1] = True
    a = m.center_anchor[1]
    s.agent_pos[0] = a.center_tile  # owner of center 1
    s.agent_pos[1] = a.repair_tile  # agent assigned to center 2 helps
    events, _ = step(s, [WAIT] * 4)
    assert events.repaired == ((2, 1),)
    assert not s.broken[1]


def test_repair_needs_both_tiles():
    m = circular_map()
    s = init_episode(m, CHAIN4, IDENT4, params(), seed=3)
    s.broken[1] = True
    s.agent_pos[0] = m.center_anchor[1].center_tile
    events, _ = step(s, [WAIT] * 4)
    assert events.repaired == ()
    assert s.broken[1]


def test_two_agent_repair_disabled_flag():
    m = circular_map()
    s = init_episode(m, CHAIN4, IDENT4, params(two_agent_repair_enabled=False), seed=3)
    s.broken[1] = True
    a = m.center_anchor[1]
    s.agent_pos[0] = a.center_tile
    s.agent_pos[1] = a.repair_tile
    events, _ = step(s, [WAIT] * 4)
    assert events.repaired == ()
    assert s.broken[1]


def test_processing_rewards_owner_and_may_break():
    m = circular_map()
    ci = m.chain_index()
    s = init_episode(m, CHAIN4, IDENT4, params(break_prob=1.0, spawn_prob=0.0), seed=5)
    s.chain_occ[ci.proc_of_center[1]] = 1
    s.agent_pos[0] = m.center_anchor[1].center_tile
    events, rewards = step(s, [WAIT] * 4)
    assert events.processed == (1,)
    assert rewards[0] == 1
    assert events.broke == (1,)  # breakage rolls after the unit is released
    assert s.chain_occ[ci.proc_of_center[1]] == 0  # unit moved on


def test_processing_requires_owner_not_helper():
    m = circular_map()
    ci = m.chain_index()
    s = init_episode(m, CHAIN4, IDENT4, params(break_prob=0.0, spawn_prob=0.0), seed=5)
    s.chain_occ[ci.proc_of_center[1]] = 1
    s.agent_pos[1] = m.center_anchor[1].center_tile  # not the owner
    events, rewards = step(s, [WAIT] * 4)
    assert events.processed == ()
    assert rewards == [0, 0, 0, 0]
    assert s.chain_occ[ci.proc_of_center[1]] == 1  # unit held


def test_broken_center_never_releases():
    m = circular_map()
    ci = m.chain_index()
    s = init_episode(m, CHAIN4, IDENT4, params(spawn_prob=0.0), seed=5)
    s.broken[1] = True
    s.chain_occ[ci.proc_of_center[1]] = 1
    s.agent_pos[0] = m.center_anchor[1].center_tile
    events, _ = step(s, [WAIT] * 4)
    assert events.processed == ()
    assert s.chain_occ[ci.proc_of_center[1]] == 1


def test_rear_unit_discarded_behind_held_unit():
    # Hand trace of the unit-flow rule on a 3-cell chain fragment: the
    # front unit is held at the processing cell, the rear unit's move is
    # blocked into an occupied cell and the rear unit is discarded.
    m = generate_layout(CHAIN1, "linear", 2)
    ci = m.chain_index()
    s = init_episode(m, CHAIN1, (1,), params(spawn_prob=0.0), seed=1)
    pi = ci.proc_of_center[1]
    s.chain_occ[pi] = 1  # held: owner not on center tile
    s.chain_occ[pi - 1] = 1  # rear unit directly behind
    events, _ = step(s, [WAIT])
    assert events.discarded == 1
    assert s.chain_occ[pi] == 1
    assert s.chain_occ[pi - 1] == 0


def test_breakage_roll_at_default_probability_frozen_seeds():
    # Seeds found by inspecting the pre-drawn break stream: seed 4's first
    # roll for center 1 is 0.2345 (< 0.25, breaks), seed 0's is 0.4492.
    m = circular_map()
    ci = m.chain_index()
    for seed, expect_break in ((4, True), (0, False)):
        s = init_episode(m, CHAIN4, IDENT4, params(spawn_prob=0.0), seed=seed)
        s.chain_occ[ci.proc_of_center[1]] = 1
        s.agent_pos[0] = m.center_anchor[1].center_tile
        events, rewards = step(s, [WAIT] * 4)
        assert events.processed == (1,)
        assert rewards[0] == 1
        assert (events.broke == (1,)) == expect_break
        assert s.broken[1] == expect_break


def test_latency_probe_linear_in_spacing():
    # Fully manned, unbreakable chain: a unit's source-to-sink transit is
    # exactly the chain length (N-1)*d + 4; processing happens in stride.
    for d in (2, 5, 7):
        m = generate_layout(CHAIN4, "linear", d)
        s = init_episode(m, CHAIN4, IDENT4, params(spawn_prob=0.0, break_prob=0.0), seed=0)
        for slot in range(4):
            s.agent_pos[slot] = m.center_anchor[slot + 1].center_tile
        ci = m.chain_index()
        s.chain_occ[ci.source_indices[0]] = 1
        transit = 0
        while True:
            events, _ = step(s, [WAIT] * 4)
            transit += 1
            if events.sank:
                break
        assert transit == 3 * d + 4


def test_self_repair_probability_one():
    m = circular_map()
    s = init_episode(m, CHAIN4, IDENT4, params(repair_time=1), seed=2)
    s.broken[2] = True
    events, _ = step(s, [WAIT] * 4)
    assert events.self_repaired == (2,)
    assert not s.broken[2]


def test_self_repair_disabled_with_infinite_repair_time():
    m = circular_map()
    s = init_episode(m, CHAIN4, IDENT4, params(repair_time=math.inf), seed=2)
    s.broken[2] = True
    for _ in range(50):
        events, _ = step(s, [WAIT] * 4)
        assert events.self_repaired == ()
    assert s.broken[2]


def test_is_terminal_boundaries():
    m = circular_map()
    s = init_episode(m, CHAIN4, IDENT4, params(episode_length=1000), seed=0)
    assert not is_terminal(s)
    s.step_count = 999
    assert not is_terminal(s)
    s.step_count = 1000
    assert is_terminal(s)
    with pytest.raises(EpisodeOver):
        step(s, [WAIT] * 4)


def test_all_wait_episode_zero_reward_and_binomial_spawns():
    m = circular_map()
    log = run_episode(m, CHAIN4, IDENT4, params(), make_policies(["wait"] * 4), seed=11)
    assert all(r.rewards == (0, 0, 0, 0) for r in log.steps)
    tot = log.totals()
    # One source at p=0.1 over 1000 steps; no units are ever processed so the
    # source backs up: spawns happen only when the source cell is free, which
    # converges to the discard-limited stationary rate. Just check conservation
    # and a sane band via a wide 3-sigma binomial bound from above.
    assert tot["spawned"] <= 100 + 3 * math.sqrt(1000 * 0.1 * 0.9)
    assert tot["spawned"] == tot["sank"] + tot["discarded"] + log.final_units


def test_open_chain_all_wait_spawn_rate():
    # With the processing cells never blocking (no unit is ever held if the
    # chain keeps flowing), a 1-center chain with the owner absent still
    # backs up at the proc cell; use spawn-only dynamics instead: remove
    # breakage and let the owner process everything so the source is
    # always free.
    m = generate_layout(CHAIN1, "linear", 2)
    from supplysim.policies import make_policies as mp

    log = run_episode(
        m, CHAIN1, (1,), params(break_prob=0.0), mp(["selfish"]), seed=13
    )
    tot = log.totals()
    mean, sigma = 1000 * 0.1, math.sqrt(1000 * 0.1 * 0.9)
    assert abs(tot["spawned"] - mean) <= 3 * sigma


def test_unit_conservation_random_policies():
    m = generate_layout(ENV3, "branched", 4)
    for seed in range(5):
        log = run_episode(
            m,
            ENV3,
            IDENT4,
            params(episode_length=300),
            make_policies(["random"] * 4),
            seed=seed,
        )
        tot = log.totals()
        assert tot["spawned"] == tot["sank"] + tot["discarded"] + log.final_units


def test_fixed_seed_identical_log_bytes():
    m = circular_map()
    a = run_episode(m, CHAIN4, IDENT4, params(), make_policies(["reciprocal"] * 4), seed=42)
    b = run_episode(m, CHAIN4, IDENT4, params(), make_policies(["reciprocal"] * 4), seed=42)
    assert log_to_jsonl(a) == log_to_jsonl(b)


def test_log_jsonl_roundtrip():
    m = circular_map()
    log = run_episode(
        m, CHAIN4, IDENT4, params(episode_length=50), make_policies(["carer"] * 4), seed=9
    )
    text = log_to_jsonl(log)
    back = log_from_jsonl(text)
    assert back.header == log.header
    assert back.final_units == log.final_units
    assert back.steps == log.steps
    assert log_to_jsonl(back) == text


def test_truncated_log_detected():
    m = circular_map()
    log = run_episode(
        m, CHAIN4, IDENT4, params(episode_length=50), make_policies(["wait"] * 4), seed=9
    )
    log.steps = log.steps[:30]
    with pytest.raises(TruncatedLog):
        log.require_complete()


def test_reward_conservation_matches_processed_events():
    m = circular_map()
    log = run_episode(m, CHAIN4, IDENT4, params(), make_policies(["carer"] * 4), seed=21)
    total_rewards = sum(sum(r.rewards) for r in log.steps)
    total_processed = sum(len(r.events.processed) for r in log.steps)
    assert total_rewards == total_processed


def test_breakage_only_with_processing():
    m = circular_map()
    log = run_episode(m, CHAIN4, IDENT4, params(), make_policies(["reciprocal"] * 4), seed=3)
    for rec in log.steps:
        assert set(rec.events.broke) <= set(rec.events.processed)


# -- observations -----------------------------------------------------------


def test_observation_center_pixel_is_self():
    m = circular_map()
    s = init_episode(m, CHAIN4, IDENT4, params(), seed=1)
    for slot in range(4):
        obs = observe(s, slot)
        assert obs.shape == (13, 13, 3)
        assert tuple(obs[6, 6]) == COLOR_TABLE["agent_self"]


def test_observation_corner_padding_is_wall():
    m = generate_layout(CHAIN4, "linear", 2)
    s = init_episode(m, CHAIN4, IDENT4, params(), seed=1)
    s.agent_pos[0] = (1, 1)
    obs = observe(s, 0)
    assert tuple(obs[0, 0]) == COLOR_TABLE["wall"]
    assert tuple(obs[12, 0]) == COLOR_TABLE["wall"]


def test_observation_locality():
    m = generate_layout(CHAIN4, "linear", 7)
    ci = m.chain_index()
    s1 = init_episode(m, CHAIN4, IDENT4, params(), seed=1)
    s2 = init_episode(m, CHAIN4, IDENT4, params(), seed=1)
    s1.agent_pos = [(2, 1), (3, 1), (4, 1), (5, 1)]
    s2.agent_pos = [(2, 1), (3, 1), (4, 1), (5, 1)]
    far_idx = len(ci.cells) - 2  # near the sink, far from slot 0's window
    s2.chain_occ[far_idx] = 1
    assert np.array_equal(observe(s1, 0), observe(s2, 0))
    assert not np.array_equal(observe(s1, 0, mode="full"), observe(s2, 0, mode="full"))


def test_observation_own_tiles_highlighted():
    m = circular_map()
    s = init_episode(m, CHAIN4, IDENT4, params(), seed=1)
    s.agent_pos[0] = m.center_anchor[1].center_tile
    obs = observe(s, 0, mode="full")
    ct2 = m.center_anchor[2].center_tile
    rt1 = m.center_anchor[1].repair_tile
    assert tuple(obs[ct2[1], ct2[0]]) == COLOR_TABLE["center_tile"]
    assert tuple(obs[rt1[1], rt1[0]]) == COLOR_TABLE["own_repair_tile"]


# -- queue-oracle equivalence (small slice; the full sweep is acceptance) ----


@pytest.mark.parametrize("style,topo", [("circular", CHAIN4), ("branched", ENV3)])
def test_queue_oracle_equivalence_small(style, topo):
    m = generate_layout(topo, style, 4)
    p = params(episode_length=200, repair_time=25)
    for seed in range(10):
        eng_sched, orc = make_schedules(m, topo, IDENT4, seed)
        log = run_scheduled_episode(m, topo, IDENT4, p, eng_sched, seed=seed)
        oracle_events = simulate_queue(
            ChainSpec.from_tilemap(m),
            p.episode_length,
            p.spawn_prob,
            p.break_prob,
            p.self_repair_prob,
            orc,
            seed=seed,
        )
        for rec, oev in zip(log.steps, oracle_events):
            assert events_of_record(rec) == oev, f"seed {seed} step {rec.t}"
