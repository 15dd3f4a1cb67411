"""Experiment runner and command line interface.

Subcommands: run, sweep, train, eval, replay, metrics, rollout, serve.
Every randomized quantity derives from the seeds recorded in the manifest;
artifact directories are reproducible bit-for-bit from (config, seeds).
Exit codes: 0 success, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigParse,
    PresetUnknown,
    Scenario,
    SEED_ENV_VAR,
    UnknownParameter,
    apply_override,
    config_hash,
    parse_scenario,
    scenario_from_dict,
)
from .engine import (
    EpisodeLog,
    LogMapMismatch,
    TruncatedLog,
    init_episode,
    is_terminal,
    log_from_jsonl,
    log_to_jsonl,
    observe,
    params_from_header,
    run_episode,
    step,
)
from .layout import ASCII_OF_KIND, generate_layout
from .metrics import aggregate, care_matrix_csv, scalar_table_csv, curves_csv
from .policies import make_policies, make_policy
from .presets import PRESETS
from .topology import build_topology


def load_scenario(arg: str) -> Scenario:
    """A path to a TOML file, or the name of a built-in preset."""
    p = Path(arg)
    if p.exists():
        return parse_scenario(p.read_text(), name_hint=p.stem)
    if arg in PRESETS:
        return parse_scenario(PRESETS[arg], name_hint=arg)
    raise PresetUnknown(f"{arg!r} is neither a config file nor a preset; presets: {sorted(PRESETS)}")


def _episode_job(resolved: dict, seed: int, ep: int) -> str:
    scn = scenario_from_dict(resolved)
    m = scn.tilemap()
    policies = make_policies(scn.policies, window=scn.reciprocity_window)
    log = run_episode(
        m, scn.topology, scn.assignment, scn.env, policies,
        seed=seed, episode_index=ep, config_hash=config_hash(scn),
    )
    return log_to_jsonl(log)


def run_episodes(scn: Scenario, workers: int = 1) -> dict[tuple[int, int], EpisodeLog]:
    """All (seed, episode) logs of a scenario, in deterministic order."""
    if any(p == "learned" for p in scn.policies):
        raise ConfigParse("run requires scripted policies; use `train` / `eval` for learned agents")
    jobs = [(seed, ep) for seed in scn.seeds for ep in range(scn.episodes)]
    out: dict[tuple[int, int], EpisodeLog] = {}
    if workers > 1:
        resolved = scn.resolved()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            texts = pool.map(_episode_job, *zip(*[(resolved, s, e) for s, e in jobs]))
            for (seed, ep), text in zip(jobs, texts):
                out[(seed, ep)] = log_from_jsonl(text)
    else:
        resolved = scn.resolved()
        for seed, ep in jobs:
            out[(seed, ep)] = log_from_jsonl(_episode_job(resolved, seed, ep))
    return out


def _metric_rows(scn: Scenario, logs: dict[tuple[int, int], EpisodeLog]):
    """Per-seed scalar rows (means over that seed's episodes) plus the
    overall mean and 95% CI rows."""
    per_seed: list[dict] = []
    all_sm = {}
    for i, seed in enumerate(scn.seeds):
        sms = [aggregate(logs[(seed, ep)]) for ep in range(scn.episodes)]
        all_sm[seed] = sms
        scal = [sm.scalars() for sm in sms]
        row = {"run": i, "seed": seed}
        for key in ("group_reward", "S", "D", "efficiency", "total_care"):
            row[key] = float(np.mean([s[key] for s in scal]))
        per_seed.append(row)
    rows = list(per_seed)
    keys = ("group_reward", "S", "D", "efficiency", "total_care")
    mean_row = {"run": "mean", "seed": "-"}
    ci_row = {"run": "ci95", "seed": "-"}
    for key in keys:
        xs = np.array([r[key] for r in per_seed], dtype=float)
        mean_row[key] = float(xs.mean())
        if len(xs) > 1:
            ci_row[key] = float(1.959963984540054 * xs.std(ddof=1) / math.sqrt(len(xs)))
        else:
            ci_row[key] = 0.0
    rows.append(mean_row)
    rows.append(ci_row)
    return rows, all_sm


def write_run_artifacts(scn: Scenario, logs, out: Path, save_logs: bool = True) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if save_logs:
        logdir = out / "logs"
        logdir.mkdir(exist_ok=True)
        for (seed, ep), log in sorted(logs.items()):
            (logdir / f"seed{seed}_ep{ep}.jsonl").write_text(log_to_jsonl(log))
    rows, all_sm = _metric_rows(scn, logs)
    (out / "metrics.csv").write_text(scalar_table_csv(rows))
    sms = [sm for seed in scn.seeds for sm in all_sm[seed]]
    c_norm = np.mean([sm.C_norm for sm in sms], axis=0)
    c_raw = np.mean([sm.C_raw.astype(float) for sm in sms], axis=0)
    (out / "care_matrix_norm.csv").write_text(care_matrix_csv(c_norm, normalized=True))
    (out / "care_matrix_raw.csv").write_text(care_matrix_csv(c_raw, normalized=False))
    manifest = {
        "format": "supplysim-manifest",
        "version": 1,
        "code_version": __version__,
        "name": scn.name,
        "config_hash": config_hash(scn),
        "seeds": list(scn.seeds),
        "episodes_per_seed": scn.episodes,
        "scenario": scn.resolved(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def cmd_run(args) -> int:
    scn = load_scenario(args.config)
    if scn.sweep:
        return _sweep_impl(scn, scn.sweep, Path(args.out or f"out/{scn.name}"), args.workers)
    out = Path(args.out or f"out/{scn.name}")
    logs = run_episodes(scn, workers=args.workers)
    write_run_artifacts(scn, logs, out, save_logs=not args.no_logs)
    rows, _ = _metric_rows(scn, logs)
    mean = next(r for r in rows if r["run"] == "mean")
    print(f"{scn.name}: {len(scn.seeds)} seeds x {scn.episodes} episodes -> {out}")
    print(
        f"  group_reward={mean['group_reward']:.2f} S={mean['S']:.3f} "
        f"D={mean['D']:.3f} efficiency={mean['efficiency']:.3f}"
    )
    return 0


def _parse_grid_value(v: str):
    if v == "inf":
        return "inf"
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            continue
    if v in ("true", "false"):
        return v == "true"
    return v


def _sweep_impl(scn: Scenario, grid: dict, out: Path, workers: int) -> int:
    if not grid:
        raise UnknownParameter("sweep grid is empty; declare [sweep] or pass --grid")
    names = sorted(grid)
    combos = list(itertools.product(*(grid[n] for n in names)))
    out.mkdir(parents=True, exist_ok=True)
    lines = ["# supplysim-metrics v1 sweep"]
    lines.append(",".join(names + ["seed", "group_reward", "S", "D", "efficiency", "total_care"]))
    for idx, combo in enumerate(combos):
        resolved = scn.resolved()
        for name, value in zip(names, combo):
            apply_override(resolved, name, value)
        sub = scenario_from_dict(resolved)
        sub.name = f"{scn.name}_setting{idx:02d}"
        logs = run_episodes(sub, workers=workers)
        write_run_artifacts(sub, logs, out / f"setting{idx:02d}", save_logs=False)
        rows, _ = _metric_rows(sub, logs)
        prefix = [str(v) for v in combo]
        for r in rows:
            if r["run"] == "ci95":
                tag = ["ci95"]
            elif r["run"] == "mean":
                tag = ["mean"]
            else:
                tag = [str(r["seed"])]
            lines.append(
                ",".join(
                    prefix
                    + tag
                    + [repr(float(r[k])) for k in ("group_reward", "S", "D", "efficiency", "total_care")]
                )
            )
        print(f"setting {idx}: " + ", ".join(f"{n}={v}" for n, v in zip(names, combo)))
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    manifest = {
        "format": "supplysim-manifest",
        "version": 1,
        "code_version": __version__,
        "name": scn.name,
        "config_hash": config_hash(scn),
        "grid": {n: list(grid[n]) for n in names},
        "seeds": list(scn.seeds),
        "scenario": scn.resolved(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    print(f"sweep -> {out / 'sweep.csv'}")
    return 0


def cmd_sweep(args) -> int:
    scn = load_scenario(args.config)
    grid = dict(scn.sweep)
    for spec in args.grid or []:
        if "=" not in spec:
            raise UnknownParameter(f"--grid expects path=v1,v2,... got {spec!r}")
        path, vals = spec.split("=", 1)
        grid[path] = [_parse_grid_value(v) for v in vals.split(",")]
    return _sweep_impl(scn, grid, Path(args.out or f"out/{scn.name}_sweep"), args.workers)


def cmd_train(args) -> int:
    from .learner import EnvSpec, LearnedPolicy, TrainConfig, evaluate, save_checkpoint, train

    scn = load_scenario(args.config)
    if not scn.train:
        raise ConfigParse("scenario has no [train] table")
    t = dict(scn.train)
    eval_episodes = int(t.pop("eval_episodes", 0))
    if "hidden" in t:
        t["hidden"] = tuple(t["hidden"])
    try:
        cfg = TrainConfig(**t)
    except TypeError as e:
        raise ConfigParse(f"bad [train] table: {e}") from e
    spec = EnvSpec(topology=scn.topology, tilemap=scn.tilemap(), params=scn.env)
    out = Path(args.out or f"out/{scn.name}_train")
    out.mkdir(parents=True, exist_ok=True)
    master_seed = scn.seeds[0]
    t0 = time.time()
    pop, curves = train(spec, cfg, master_seed=master_seed)
    wall = time.time() - t0
    save_checkpoint(pop, out / "checkpoint.npz", config_hash=config_hash(scn))
    (out / "curves.csv").write_text(curves_csv(curves))
    manifest = {
        "format": "supplysim-manifest",
        "version": 1,
        "code_version": __version__,
        "name": scn.name,
        "config_hash": config_hash(scn),
        "master_seed": master_seed,
        "total_steps": cfg.total_steps,
        "scenario": scn.resolved(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    msg = f"trained {cfg.total_steps} steps in {wall:.0f}s -> {out}"
    if curves:
        msg += f"; final group_reward {curves[-1]['group_reward']:.2f}"
    print(msg)
    if eval_episodes:
        pols = [LearnedPolicy(pop.members[i].params, cfg) for i in range(spec.match_size)]
        runs = evaluate(pols, spec, eval_episodes, master_seed=master_seed + 1)
        rows = [dict(run=i, seed=master_seed + 1, **sm.scalars()) for i, sm in enumerate(runs)]
        (out / "eval_metrics.csv").write_text(scalar_table_csv(rows))
        print(f"eval mean group_reward: {np.mean([sm.group_reward for sm in runs]):.2f}")
    return 0


def cmd_eval(args) -> int:
    from .learner import LearnedPolicy, EnvSpec, load_checkpoint

    scn = load_scenario(args.config)
    pop = load_checkpoint(args.checkpoint)
    spec = EnvSpec(topology=scn.topology, tilemap=scn.tilemap(), params=scn.env)
    policies = []
    member = 0
    for slot, name in enumerate(scn.policies):
        if name == "learned":
            policies.append(LearnedPolicy(pop.members[member].params, pop.cfg, greedy=args.greedy))
            member += 1
        else:
            policies.append(make_policy(name, window=scn.reciprocity_window))
    out = Path(args.out or f"out/{scn.name}_eval")
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, seed in enumerate(scn.seeds):
        logs = {}
        for ep in range(scn.episodes):
            log = run_episode(
                scn.tilemap(), scn.topology, scn.assignment, scn.env, policies,
                seed=seed, episode_index=ep, config_hash=config_hash(scn),
            )
            logs[ep] = aggregate(log)
        row = {"run": i, "seed": seed}
        for key in ("group_reward", "S", "D", "efficiency", "total_care"):
            row[key] = float(np.mean([logs[ep].scalars()[key] for ep in logs]))
        rows.append(row)
    (out / "metrics.csv").write_text(scalar_table_csv(rows))
    print(f"eval -> {out}/metrics.csv")
    return 0


def _render_frame(state) -> str:
    m = state.tilemap
    ci = m.chain_index()
    grid = [[ASCII_OF_KIND[int(k)] for k in row] for row in m.kinds]
    for center in range(1, state.topology.num_centers + 1):
        if state.broken[center]:
            x, y = m.center_anchor[center].processing
            grid[y][x] = "!"
    for idx, occupied in enumerate(state.chain_occ):
        if occupied:
            x, y = ci.cells[idx]
            grid[y][x] = "o"
    for slot, (x, y) in enumerate(state.agent_pos):
        grid[y][x] = str(state.assignment[slot])
    return "\n".join("".join(row) for row in grid)


def replay_log(log: EpisodeLog, render=None) -> list:
    """Re-simulate a log from its header, verifying every step's events.

    Returns the recomputed per-episode metrics; raises LogMapMismatch on
    the first diverging step (proof the log is complete and faithful).
    """
    h = log.header
    topo = build_topology(int(h["num_centers"]), [tuple(e) for e in h["edges"]])
    m = generate_layout(topo, h["layout_style"], h["layout_spacing"] or 2)
    params = params_from_header(h)
    state = init_episode(
        m, topo, tuple(h["assignment"]), params, seed=h["seed"], episode_index=h["episode_index"]
    )
    if render:
        render(_render_frame(state), -1)
    for rec in log.steps:
        events, rewards = step(state, rec.actions)
        got = (
            events.processed, events.broke, events.repaired, events.self_repaired,
            events.spawned, events.discarded, events.sank, tuple(rewards),
        )
        want = (
            rec.events.processed, rec.events.broke, rec.events.repaired,
            rec.events.self_repaired, rec.events.spawned, rec.events.discarded,
            rec.events.sank, rec.rewards,
        )
        if got != want:
            raise LogMapMismatch(f"replay diverged at step {rec.t}: {got} != {want}")
        if render:
            render(_render_frame(state), rec.t)
    if state.units_in_flight() != log.final_units:
        raise LogMapMismatch("replay final unit count does not match the log")
    return aggregate(log)


def cmd_replay(args) -> int:
    text = Path(args.log).read_text()
    log = log_from_jsonl(text)
    log.require_complete()
    delay = 0.0 if args.no_delay else 1.0 / args.fps

    def render(frame: str, t: int) -> None:
        if args.quiet:
            return
        sys.stdout.write(f"\x1b[2J\x1b[H" if not args.no_clear else "")
        sys.stdout.write(f"step {t + 1}/{len(log.steps)}\n{frame}\n")
        sys.stdout.flush()
        if delay:
            time.sleep(delay)

    sm = replay_log(log, render=render)
    print(
        f"replay OK: {len(log.steps)} steps; group_reward={sm.group_reward:.0f} "
        f"S={sm.S:.3f} D={sm.D:.3f} efficiency={sm.efficiency:.3f}"
    )
    return 0


def cmd_metrics(args) -> int:
    logdir = Path(args.logdir)
    files = sorted(logdir.glob("*.jsonl"))
    if not files:
        raise ConfigParse(f"no .jsonl logs under {logdir}")
    logs: dict[tuple[int, int], EpisodeLog] = {}
    seeds: list[int] = []
    episodes = 0
    for f in files:
        log = log_from_jsonl(f.read_text())
        seed, ep = int(log.header["seed"]), int(log.header["episode_index"])
        logs[(seed, ep)] = log
        if seed not in seeds:
            seeds.append(seed)
        episodes = max(episodes, ep + 1)
    pseudo = argparse.Namespace(seeds=seeds, episodes=episodes)
    rows, _ = _metric_rows(pseudo, logs)
    out = logdir / "metrics_recomputed.csv"
    out.write_text(scalar_table_csv(rows))
    print(f"recomputed metrics for {len(files)} logs -> {out}")
    return 0


def _obs_payload(state, mode: str):
    """Observations for a rollout record: full arrays, or the SHA-256 of
    their canonical JSON (value-equality checks without the bulk)."""
    if mode == "none":
        return None
    obs = [observe(state, s).tolist() for s in range(state.num_slots)]
    if mode == "full":
        return {"obs": obs}
    import hashlib

    return {
        "obs_sha256": [
            hashlib.sha256(json.dumps(o, separators=(",", ":")).encode()).hexdigest()
            for o in obs
        ]
    }


def cmd_rollout(args) -> int:
    scn = load_scenario(args.config)
    m = scn.tilemap()
    policy_names = [args.policy] * scn.topology.num_centers if args.policy else scn.policies
    policies = make_policies(policy_names, window=scn.reciprocity_window)
    state = init_episode(m, scn.topology, scn.assignment, scn.env, args.seed, args.episode_index)
    from .engine import POLICY_STREAM_BASE, stream_rng

    for slot, pol in enumerate(policies):
        pol.begin_episode(state, slot, stream_rng(args.seed, args.episode_index, POLICY_STREAM_BASE + slot))
    sink = open(args.out, "w") if args.out else sys.stdout
    emit = lambda obj: sink.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")  # noqa: E731
    steps = args.steps or scn.env.episode_length
    emit(
        {
            "format": "supplysim-rollout",
            "version": 1,
            "slots": state.num_slots,
            "obs_shape": [13, 13, 3],
            "obs_mode": args.obs_mode,
            "native_version": __version__,
            "policies": policy_names,
            "seed": args.seed,
        }
    )
    for t in range(steps):
        if is_terminal(state):
            break
        pre_obs = _obs_payload(state, args.obs_mode)
        actions = [int(p.act(state)) for p in policies]
        events, rewards = step(state, actions)
        for p in policies:
            p.on_events(events, t)
        rec = {
            "t": t,
            "actions": actions,
            "rewards": rewards,
            "done": is_terminal(state),
            "events": {
                "processed": list(events.processed),
                "broke": list(events.broke),
                "repaired": [list(x) for x in events.repaired],
                "self_repaired": list(events.self_repaired),
                "spawned": list(events.spawned),
                "discarded": events.discarded,
                "sank": events.sank,
            },
        }
        if pre_obs is not None:
            rec.update(pre_obs)
        emit(rec)
    final = _obs_payload(state, args.obs_mode)
    if final is not None:
        emit({f"final_{k}": v for k, v in final.items()})
    if args.out:
        sink.close()
    return 0


def cmd_serve(args) -> int:
    """Line-delimited JSON environment server on stdio (binding endpoint).

    ops: {"op":"make","config":<text>|"preset":<name>,"seed":int}
         {"op":"reset","seed":int,"episode_index":int} -> {"obs":...}
         {"op":"step","actions":[int x slots]} -> obs/rewards/done/info
         {"op":"close"}
    """
    scn = None
    state = None

    def reply(obj) -> None:
        sys.stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
        sys.stdout.flush()

    def obs_list():
        return [observe(state, s).tolist() for s in range(state.num_slots)]

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            op = req.get("op")
            if op == "make":
                if "preset" in req:
                    scn = load_scenario(req["preset"])
                else:
                    scn = parse_scenario(req.get("config", ""))
                state = init_episode(
                    scn.tilemap(), scn.topology, scn.assignment, scn.env,
                    int(req.get("seed", 0)), int(req.get("episode_index", 0)),
                )
                reply(
                    {
                        "ok": True,
                        "slots": state.num_slots,
                        "obs_shape": [13, 13, 3],
                        "version": __version__,
                        "episode_length": scn.env.episode_length,
                        "obs": obs_list(),
                    }
                )
            elif op == "reset":
                if scn is None:
                    raise RuntimeError("no environment; send make first")
                state = init_episode(
                    scn.tilemap(), scn.topology, scn.assignment, scn.env,
                    int(req.get("seed", 0)), int(req.get("episode_index", 0)),
                )
                reply({"ok": True, "obs": obs_list()})
            elif op == "step":
                if state is None:
                    raise RuntimeError("no environment; send make first")
                acts = req.get("actions")
                if (
                    not isinstance(acts, list)
                    or len(acts) != state.num_slots
                    or not all(isinstance(a, int) and 0 <= a < 5 for a in acts)
                ):
                    reply({"ok": False, "error": "BadAction", "detail": f"actions must be {state.num_slots} ints in [0,5)"})
                    continue
                if is_terminal(state):
                    reply({"ok": False, "error": "EpisodeOver", "detail": "reset to start a new episode"})
                    continue
                events, rewards = step(state, acts)
                reply(
                    {
                        "ok": True,
                        "obs": obs_list(),
                        "rewards": rewards,
                        "done": is_terminal(state),
                        "info": {
                            "processed": list(events.processed),
                            "broke": list(events.broke),
                            "repaired": [list(x) for x in events.repaired],
                            "self_repaired": list(events.self_repaired),
                            "spawned": list(events.spawned),
                            "discarded": events.discarded,
                            "sank": events.sank,
                        },
                    }
                )
            elif op == "close":
                reply({"ok": True})
                return 0
            else:
                reply({"ok": False, "error": "UnknownOp", "detail": str(op)})
        except (ConfigParse, PresetUnknown) as e:
            reply({"ok": False, "error": "ConfigParse", "detail": str(e)})
        except Exception as e:  # keep serving; report the error
            reply({"ok": False, "error": type(e).__name__, "detail": str(e)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="supplysim", description=__doc__)
    ap.add_argument("--version", action="version", version=f"supplysim {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run a scenario (config path or preset name)")
    p.add_argument("config")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-logs", action="store_true")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("sweep", help="cross-product parameter sweep")
    p.add_argument("config")
    p.add_argument("--grid", action="append", help="path=v1,v2,... (repeatable)")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("train", help="desk-scale actor-critic training")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="evaluate checkpoint policies")
    p.add_argument("config")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("replay", help="re-simulate and render an episode log")
    p.add_argument("log")
    p.add_argument("--fps", type=float, default=10.0)
    p.add_argument("--no-delay", action="store_true")
    p.add_argument("--no-clear", action="store_true")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("metrics", help="recompute metrics from a log directory")
    p.add_argument("logdir")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("rollout", help="dump a scripted trajectory as JSONL (with observations)")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episode-index", type=int, default=0)
    p.add_argument("--policy", help="override all slots with one scripted policy")
    p.add_argument("--steps", type=int)
    p.add_argument("--obs-mode", choices=("full", "hash", "none"), default="full")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_rollout)

    p = sub.add_parser("serve", help="JSONL environment server on stdio (binding endpoint)")
    p.set_defaults(fn=cmd_serve)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigParse, PresetUnknown, UnknownParameter) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (TruncatedLog, LogMapMismatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except Exception as e:
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
