/**
 * Client for the `palb` least-absolute-deviations line-fitting CLI.
 *
 * Exposes exactly `fit` and `iterate` plus version metadata.  Both marshal
 * the data to a temporary CSV (one copy), spawn the CLI, and parse its JSON
 * output; no numerics are reimplemented on this side.  The executable is
 * resolved from the PALB_CLI environment variable (split on whitespace, so
 * values like "python3 -m palb" work) and defaults to `palb` on PATH.
 */

import { spawn } from "node:child_process";
import { randomBytes } from "node:crypto";
import { mkdtemp, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { createInterface } from "node:readline";

export const version = "0.1.0";

export interface FitOptions {
  /** Uncertainty factor attached to the initial slope guess (default 0.01). */
  mu?: number;
  /** Explicit initial slope in input coordinates; omitted means automatic. */
  m0?: number;
  /** Rescale into [-1,1]^2 before solving (default true). */
  normalize?: boolean;
}

export type FitStatusString = "converged" | "width_cutoff" | "iteration_cap";

export interface FitOutcome {
  m: number;
  t: number;
  objective: number;
  status: FitStatusString;
  expansionSteps: number;
  subdivisionSteps: number;
  /** Wall-clock of the solve as measured by the CLI, in seconds. */
  runtimeSeconds: number;
}

export type IterationPhase = "expansion" | "subdivision" | "terminated";

export interface IterationEvent {
  phase: IterationPhase;
  /** Left boundary of the slope interval at this step. */
  a: number;
  /** Right boundary of the slope interval at this step. */
  b: number;
  /** Step index. */
  k: number;
}

export class PalbCliError extends Error {
  constructor(message: string, readonly exitCode: number | null,
              readonly stderr: string) {
    super(message);
    this.name = "PalbCliError";
  }
}

function cliCommand(): string[] {
  const env = process.env.PALB_CLI;
  if (env && env.trim() !== "") {
    return env.trim().split(/\s+/);
  }
  return ["palb"];
}

function validateInput(x: readonly number[], y: readonly number[]): void {
  if (x.length !== y.length) {
    throw new RangeError(
      `length mismatch: ${x.length} x values vs ${y.length} y values`);
  }
  if (x.length === 0) {
    throw new RangeError("need at least one point");
  }
  for (let i = 0; i < x.length; i++) {
    const xi = x[i]!;
    const yi = y[i]!;
    if (typeof xi !== "number" || typeof yi !== "number" ||
        !Number.isFinite(xi) || !Number.isFinite(yi)) {
      throw new TypeError(`non-finite coordinate at index ${i}`);
    }
  }
}

/** Number.toString() is the shortest round-trip form; Python reads it back
 * to the identical double. */
function toCsv(x: readonly number[], y: readonly number[]): string {
  const lines = ["x,y"];
  for (let i = 0; i < x.length; i++) {
    lines.push(`${x[i]},${y[i]}`);
  }
  return lines.join("\n") + "\n";
}

async function withDatasetFile<T>(
  x: readonly number[], y: readonly number[],
  body: (path: string) => Promise<T>,
): Promise<T> {
  const dir = await mkdtemp(join(tmpdir(), "palb-"));
  const path = join(dir, `data-${randomBytes(4).toString("hex")}.csv`);
  try {
    await writeFile(path, toCsv(x, y), "utf8");
    return await body(path);
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}

function fitArguments(input: string, options: FitOptions,
                      events: boolean): string[] {
  const args = ["fit", "--input", input, "--format", "json"];
  if (options.mu !== undefined) {
    args.push("--mu", String(options.mu));
  }
  if (options.m0 !== undefined) {
    args.push("--m0", String(options.m0));
  }
  if (options.normalize === false) {
    args.push("--no-normalize");
  }
  if (events) {
    args.push("--events");
  }
  return args;
}

interface WireResult {
  m: number;
  t: number;
  objective: number;
  status: FitStatusString;
  expansion_steps: number;
  subdivision_steps: number;
  runtime_seconds: number;
}

function toOutcome(wire: WireResult): FitOutcome {
  return {
    m: wire.m,
    t: wire.t,
    objective: wire.objective,
    status: wire.status,
    expansionSteps: wire.expansion_steps,
    subdivisionSteps: wire.subdivision_steps,
    runtimeSeconds: wire.runtime_seconds,
  };
}

function runCli(args: string[]): Promise<{ stdout: string; code: number }> {
  const [command, ...prefix] = cliCommand();
  return new Promise((resolve, reject) => {
    const child = spawn(command!, [...prefix, ...args], {
      stdio: ["ignore", "pipe", "pipe"],
    });
    let stdout = "";
    let stderr = "";
    child.stdout.on("data", (chunk) => { stdout += chunk; });
    child.stderr.on("data", (chunk) => { stderr += chunk; });
    child.on("error", reject);
    child.on("close", (code) => {
      // exit code 2 still carries a valid result (no convergence certificate)
      if (code === 0 || code === 2) {
        resolve({ stdout, code });
      } else {
        reject(new PalbCliError(
          `palb exited with code ${code}: ${stderr.trim()}`, code, stderr));
      }
    });
  });
}

/**
 * Fit the least-absolute-deviations line to (x, y).
 *
 * Returns the same numbers the CLI reports for the same data.
 */
export async function fit(
  x: readonly number[], y: readonly number[],
  options: FitOptions = {},
): Promise<FitOutcome> {
  validateInput(x, y);
  return withDatasetFile(x, y, async (path) => {
    const { stdout } = await runCli(fitArguments(path, options, false));
    return toOutcome(JSON.parse(stdout) as WireResult);
  });
}

/**
 * Observable-iteration form of `fit`.
 *
 * Yields one event per solver step, ending with a `terminated` event; the
 * generator's return value is the final fit outcome.  Abandoning the
 * iterator early (break / `return()`) kills the CLI process and removes the
 * temporary file.
 */
export async function* iterate(
  x: readonly number[], y: readonly number[],
  options: FitOptions = {},
): AsyncGenerator<IterationEvent, FitOutcome> {
  validateInput(x, y);
  const dir = await mkdtemp(join(tmpdir(), "palb-"));
  const path = join(dir, "data.csv");
  const [command, ...prefix] = cliCommand();
  let child: ReturnType<typeof spawn> | undefined;
  try {
    await writeFile(path, toCsv(x, y), "utf8");
    child = spawn(command!, [...prefix, ...fitArguments(path, options, true)], {
      stdio: ["ignore", "pipe", "pipe"],
    });
    let stderr = "";
    child.stderr!.on("data", (chunk) => { stderr += chunk; });
    const exit = new Promise<number | null>((resolve) => {
      child!.on("close", (code) => resolve(code));
    });
    let outcome: FitOutcome | undefined;
    const lines = createInterface({ input: child.stdout! });
    for await (const line of lines) {
      if (line.trim() === "") {
        continue;
      }
      const parsed = JSON.parse(line);
      if (typeof parsed.phase === "string") {
        yield parsed as IterationEvent;
      } else {
        outcome = toOutcome(parsed as WireResult);
      }
    }
    const code = await exit;
    if (outcome === undefined || (code !== 0 && code !== 2)) {
      throw new PalbCliError(
        `palb exited with code ${code}: ${stderr.trim()}`, code, stderr);
    }
    return outcome;
  } finally {
    if (child !== undefined && child.exitCode === null &&
        child.signalCode === null) {
      child.kill("SIGKILL");
    }
    await rm(dir, { recursive: true, force: true });
  }
}
