/**
 * Environment handle over the native stdio endpoint.
 *
 * Each handle owns one `supplysim serve` subprocess speaking line-delimited
 * JSON: one episode stream per handle, reset(seed, episodeIndex) to start a
 * new episode, step(actions) for exact native dynamics. The binding never
 * reimplements any environment logic.
 */

import { spawn, type ChildProcessByStdio } from "node:child_process";
import * as readline from "node:readline";
import type { Readable, Writable } from "node:stream";

type NativeProc = ChildProcessByStdio<Writable, Readable, null>;

export const EXPECTED_NATIVE_VERSION = "0.1.0";

export class ConfigParseError extends Error {}
export class BadActionError extends Error {}
export class EpisodeOverError extends Error {}
export class HandleClosedError extends Error {}
export class NativeVersionMismatchError extends Error {}
export class ProtocolError extends Error {}

/** One agent's 13x13x3 RGB observation as nested integer arrays. */
export type Observation = number[][][];

export interface EventCounts {
  processed: number[];
  broke: number[];
  repaired: number[][];
  self_repaired: number[];
  spawned: number[];
  discarded: number;
  sank: number;
}

export interface StepResult {
  obs: Observation[];
  rewards: number[];
  done: boolean;
  info: EventCounts;
}

export interface MakeEnvOptions {
  /** TOML scenario text; mutually exclusive with preset. */
  config?: string;
  /** Name of a built-in scenario preset. */
  preset?: string;
  seed?: number;
  /** Python interpreter launching the native package (default python3). */
  python?: string;
}

interface Pending {
  resolve: (line: string) => void;
  reject: (err: Error) => void;
}

function rawRpc(
  proc: NativeProc,
  pending: Pending[],
  req: Record<string, unknown>,
): Promise<any> {
  return new Promise<string>((resolve, reject) => {
    pending.push({ resolve, reject });
    proc.stdin.write(JSON.stringify(req) + "\n");
  }).then((line) => {
    let reply: any;
    try {
      reply = JSON.parse(line);
    } catch {
      throw new ProtocolError(`unparseable reply: ${line.slice(0, 120)}`);
    }
    if (!reply.ok) {
      const detail = `${reply.error}: ${reply.detail ?? ""}`;
      if (reply.error === "ConfigParse") throw new ConfigParseError(detail);
      if (reply.error === "BadAction") throw new BadActionError(detail);
      if (reply.error === "EpisodeOver") throw new EpisodeOverError(detail);
      throw new ProtocolError(detail);
    }
    return reply;
  });
}

export class EnvHandle {
  readonly slots: number;
  readonly obsShape: [number, number, number];
  readonly nativeVersion: string;
  readonly episodeLength: number;
  readonly configEcho: MakeEnvOptions;
  lastObs: Observation[];

  private proc: NativeProc;
  private rl: readline.Interface;
  private pending: Pending[];
  private closed = false;

  private constructor(
    proc: NativeProc,
    rl: readline.Interface,
    pending: Pending[],
    made: {
      slots: number;
      obs_shape: [number, number, number];
      version: string;
      episode_length: number;
      obs: Observation[];
    },
    echo: MakeEnvOptions,
  ) {
    this.proc = proc;
    this.rl = rl;
    this.pending = pending;
    this.slots = made.slots;
    this.obsShape = made.obs_shape;
    this.nativeVersion = made.version;
    this.episodeLength = made.episode_length;
    this.lastObs = made.obs;
    this.configEcho = echo;
  }

  static async create(opts: MakeEnvOptions): Promise<EnvHandle> {
    const python = opts.python ?? process.env.SUPPLYSIM_PYTHON ?? "python3";
    const proc = spawn(python, ["-m", "supplysim.cli", "serve"], {
      stdio: ["pipe", "pipe", "inherit"],
    });
    const rl = readline.createInterface({ input: proc.stdout });
    const pending: Pending[] = [];
    rl.on("line", (line) => {
      const p = pending.shift();
      if (p) p.resolve(line);
    });
    proc.on("exit", () => {
      for (const p of pending.splice(0)) p.reject(new HandleClosedError("native process exited"));
    });

    const req: Record<string, unknown> = { op: "make", seed: opts.seed ?? 0 };
    if (opts.preset !== undefined) req.preset = opts.preset;
    else req.config = opts.config ?? "";
    const made = await rawRpc(proc, pending, req);
    const handle = new EnvHandle(proc, rl, pending, made, { ...opts });
    if (made.version !== EXPECTED_NATIVE_VERSION) {
      await handle.close();
      throw new NativeVersionMismatchError(
        `native ${made.version} != binding ${EXPECTED_NATIVE_VERSION}`,
      );
    }
    return handle;
  }

  private rpc(req: Record<string, unknown>): Promise<any> {
    if (this.closed) return Promise.reject(new HandleClosedError("handle is closed"));
    return rawRpc(this.proc, this.pending, req);
  }

  /** Start a fresh episode; returns the initial per-slot observations. */
  async reset(seed: number, episodeIndex = 0): Promise<Observation[]> {
    const reply = await this.rpc({ op: "reset", seed, episode_index: episodeIndex });
    this.lastObs = reply.obs as Observation[];
    return this.lastObs;
  }

  /** Advance one step; actions are integers in [0, 5) per slot. */
  async step(actions: number[]): Promise<StepResult> {
    const reply = await this.rpc({ op: "step", actions });
    this.lastObs = reply.obs as Observation[];
    return {
      obs: reply.obs,
      rewards: reply.rewards,
      done: reply.done,
      info: reply.info,
    };
  }

  async close(): Promise<void> {
    if (this.closed) return;
    this.closed = true;
    try {
      this.proc.stdin.write(JSON.stringify({ op: "close" }) + "\n");
    } catch {
      // already gone
    }
    this.proc.stdin.end();
    await new Promise<void>((resolve) => {
      const t = setTimeout(() => {
        this.proc.kill();
        resolve();
      }, 2000);
      this.proc.on("exit", () => {
        clearTimeout(t);
        resolve();
      });
    });
    this.rl.close();
  }
}

/** Create an environment from TOML config text. */
export function makeEnv(configText: string, seed: number, python?: string): Promise<EnvHandle> {
  return EnvHandle.create({ config: configText, seed, python });
}

/** Create an environment from a named native preset. */
export function makeEnvFromPreset(preset: string, seed: number, python?: string): Promise<EnvHandle> {
  return EnvHandle.create({ preset, seed, python });
}

export function envReset(h: EnvHandle, seed: number, episodeIndex = 0): Promise<Observation[]> {
  return h.reset(seed, episodeIndex);
}

export function envStep(h: EnvHandle, actions: number[]): Promise<StepResult> {
  return h.step(actions);
}
