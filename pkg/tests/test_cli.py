import json
import subprocess
import sys

import pytest

from supplysim.cli import load_scenario, main, replay_log, run_episodes, write_run_artifacts
from supplysim.config import (
    ConfigParse,
    PresetUnknown,
    UnknownParameter,
    config_hash,
    parse_scenario,
    scenario_from_dict,
)
from supplysim.engine import log_from_jsonl
from supplysim.presets import PRESETS

SMALL = """\
name = "small"

[topology]
num_centers = 4
edges = [[1, 2], [2, 3], [3, 4]]

[layout]
style = "circular"

[env]
episode_length = 120
repair_time = "inf"

[run]
policies = ["carer", "carer", "carer", "carer"]
episodes = 2
seeds = [3, 4]
"""


def test_parse_and_resolved_roundtrip():
    scn = parse_scenario(SMALL)
    assert scn.name == "small"
    assert scn.topology.num_centers == 4
    back = scenario_from_dict(scn.resolved())
    assert back.resolved() == scn.resolved()
    assert config_hash(back) == config_hash(scn)


def test_parse_errors():
    with pytest.raises(ConfigParse):
        parse_scenario("not == toml ==")
    with pytest.raises(ConfigParse):
        parse_scenario("[topology]\nedges=[[1,2]]\n")  # missing num_centers
    with pytest.raises(ConfigParse):
        parse_scenario(SMALL.replace('"carer", "carer", "carer", "carer"', '"carer"'))


def test_preset_unknown():
    with pytest.raises(PresetUnknown):
        load_scenario("no_such_preset")


def test_env_seed_override(monkeypatch):
    monkeypatch.setenv("SUPPLY_SEED", "99")
    scn = parse_scenario(SMALL)
    assert scn.seeds == [99]


def test_presets_parse_and_env_presets_realize_graphs():
    for name, text in PRESETS.items():
        scn = parse_scenario(text, name_hint=name)
        assert scn.name == name
    assert set(load_scenario("env1").topology.edges) == {(1, 2), (1, 3), (3, 4)}
    assert set(load_scenario("env2").topology.edges) == {(1, 2), (2, 3), (2, 4)}
    assert set(load_scenario("env3").topology.edges) == {(1, 2), (1, 3), (2, 4), (3, 4)}


def test_run_artifacts_and_determinism(tmp_path):
    scn = parse_scenario(SMALL)
    logs = run_episodes(scn)
    a, b = tmp_path / "a", tmp_path / "b"
    write_run_artifacts(scn, logs, a)
    write_run_artifacts(scn, run_episodes(scn), b)
    for rel in (
        "metrics.csv",
        "care_matrix_norm.csv",
        "care_matrix_raw.csv",
        "manifest.json",
        "logs/seed3_ep0.jsonl",
        "logs/seed4_ep1.jsonl",
    ):
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_worker_pool_matches_serial(tmp_path):
    scn = parse_scenario(SMALL)
    a, b = tmp_path / "serial", tmp_path / "pool"
    write_run_artifacts(scn, run_episodes(scn, workers=1), a)
    write_run_artifacts(scn, run_episodes(scn, workers=2), b)
    assert (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()
    assert (a / "logs/seed3_ep1.jsonl").read_bytes() == (b / "logs/seed3_ep1.jsonl").read_bytes()


def test_replay_roundtrip(tmp_path):
    scn = parse_scenario(SMALL)
    logs = run_episodes(scn)
    write_run_artifacts(scn, logs, tmp_path)
    text = (tmp_path / "logs/seed3_ep0.jsonl").read_text()
    log = log_from_jsonl(text)
    sm = replay_log(log)  # raises on any divergence
    from supplysim.metrics import aggregate

    direct = aggregate(logs[(3, 0)])
    assert sm.scalars() == direct.scalars()


def test_replay_detects_tampered_log(tmp_path):
    import dataclasses

    from supplysim.engine import LogMapMismatch

    scn = parse_scenario(SMALL)
    logs = run_episodes(scn)
    log = logs[(3, 0)]
    rec = log.steps[10]
    log.steps[10] = dataclasses.replace(rec, rewards=tuple(r + 1 for r in rec.rewards))
    with pytest.raises(LogMapMismatch):
        replay_log(log)


def test_metrics_subcommand_roundtrip(tmp_path):
    scn = parse_scenario(SMALL)
    write_run_artifacts(scn, run_episodes(scn), tmp_path)
    rc = main(["metrics", str(tmp_path / "logs")])
    assert rc == 0
    recomputed = (tmp_path / "logs" / "metrics_recomputed.csv").read_text()
    assert recomputed == (tmp_path / "metrics.csv").read_text()


def _write_config(tmp_path, text):
    p = tmp_path / "scn.toml"
    p.write_text(text)
    return p


def test_sweep_rows_and_unknown_parameter(tmp_path):
    cfg = _write_config(tmp_path, SMALL.replace("episodes = 2", "episodes = 1"))
    rc = main(
        ["sweep", str(cfg), "--grid", "env.repair_time=10,inf", "--out", str(tmp_path / "sw")]
    )
    assert rc == 0
    lines = (tmp_path / "sw" / "sweep.csv").read_text().splitlines()
    # comment + header + 2 settings x (2 seeds + mean + ci)
    assert len(lines) == 2 + 2 * 4
    assert lines[1].startswith("env.repair_time,seed,")

    assert main(["sweep", str(cfg), "--grid", "env.nope=1"]) == 2
    assert main(["sweep", str(cfg)]) == 2  # empty grid


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("this is not = [valid")
    assert main(["run", str(bad)]) == 2
    assert main(["run", "definitely_not_a_preset"]) == 2
    assert main(["replay", str(tmp_path / "missing.jsonl")]) == 3


def test_cli_entrypoint_subprocess(tmp_path):
    out = tmp_path / "art"
    proc = subprocess.run(
        [sys.executable, "-m", "supplysim.cli", "run", "binding_parity", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (out / "metrics.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_hash"]
    assert manifest["code_version"]


def test_serve_protocol():
    proc = subprocess.Popen(
        [sys.executable, "-m", "supplysim.cli", "serve"],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
    )

    def rpc(obj):
        proc.stdin.write(json.dumps(obj) + "\n")
        proc.stdin.flush()
        return json.loads(proc.stdout.readline())

    made = rpc({"op": "make", "preset": "binding_parity", "seed": 7})
    assert made["ok"] and made["slots"] == 4 and made["obs_shape"] == [13, 13, 3]
    bad = rpc({"op": "step", "actions": [7, 0, 0, 0]})
    assert not bad["ok"] and bad["error"] == "BadAction"
    stepped = rpc({"op": "step", "actions": [4, 4, 4, 4]})
    assert stepped["ok"] and len(stepped["obs"]) == 4 and len(stepped["rewards"]) == 4
    reset = rpc({"op": "reset", "seed": 7})
    assert reset["ok"] and reset["obs"] == made["obs"]
    closed = rpc({"op": "close"})
    assert closed["ok"]
    proc.wait(timeout=10)


def test_rollout_trajectory_matches_run(tmp_path):
    out = tmp_path / "roll.jsonl"
    rc = main(
        [
            "rollout",
            "binding_parity",
            "--seed",
            "1",
            "--policy",
            "wait",
            "--obs-mode",
            "none",
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    header, steps = lines[0], lines[1:]
    assert header["slots"] == 4
    scn = load_scenario("binding_parity")
    logs = run_episodes(scn)
    log = logs[(1, 0)]
    assert len(steps) == len(log.steps)
    for rec, native in zip(steps, log.steps):
        assert tuple(rec["actions"]) == native.actions
        assert tuple(rec["rewards"]) == native.rewards
        assert rec["events"]["sank"] == native.events.sank
        assert rec["events"]["spawned"] == list(native.events.spawned)
