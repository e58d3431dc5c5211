import type { ApiClient } from "../../src/api";
import type { RunRecord } from "../../src/types";

/** Deterministic 32-bit PRNG so every suite builds the same fixture system. */
export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const UNITS = 48;
const PACKAGES = 6;
const EXTRA_EDGES = 60;

/**
 * A small dependency graph with six origin packages: an intra-package chain,
 * a forward edge between consecutive packages, and uniformly random extra
 * edges. Deterministic, so the service's content-addressed run id is stable
 * across test files and the run executes only once.
 */
export function fixtureProblem(): Record<string, unknown> {
  const rng = mulberry32(0xa11ce);
  const packageOf = (unit: number) => Math.floor((unit * PACKAGES) / UNITS);
  const types = [];
  for (let i = 0; i < UNITS; i++) {
    types.push({
      id: i,
      name: `m${packageOf(i)}.T${String(i).padStart(2, "0")}`,
      package: `m${packageOf(i)}`,
      abstract: rng() < 0.25,
    });
  }
  const seen = new Set<string>();
  const dependencies: Array<{ from: number; to: number }> = [];
  const add = (from: number, to: number) => {
    const key = `${from}>${to}`;
    if (from === to || seen.has(key)) return;
    seen.add(key);
    dependencies.push({ from, to });
  };
  for (let i = 1; i < UNITS; i++) {
    if (packageOf(i) === packageOf(i - 1)) add(i, i - 1);
  }
  for (let p = 0; p + 1 < PACKAGES; p++) {
    const last = Math.ceil(((p + 1) * UNITS) / PACKAGES) - 1;
    const firstNext = Math.ceil(((p + 1) * UNITS) / PACKAGES);
    add(last, firstNext);
  }
  for (let k = 0; k < EXTRA_EDGES; k++) {
    add(Math.floor(rng() * UNITS), Math.floor(rng() * UNITS));
  }
  return {
    system: "explorer-fixture",
    graph: { types, dependencies },
    model: {
      style: "strict",
      layers: ["L0", "L1", "L2"],
      package_slots: PACKAGES,
    },
    init_policy: "random",
  };
}

export const FIXTURE_CONFIG = {
  algorithm: "nsga2",
  population: 20,
  max_evaluations: 3000,
  snapshot_interval: 500,
  seed: 5,
};

export async function waitForRun(
  api: ApiClient,
  runId: string,
  timeoutMs = 90_000,
): Promise<RunRecord> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    const record = await api.run(runId);
    if (record.status === "done") return record;
    if (record.status === "failed") {
      throw new Error(`run ${runId} failed`);
    }
    if (Date.now() > deadline) {
      throw new Error(`run ${runId} still ${record.status} after ${timeoutMs}ms`);
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
}

/** Create (or reuse) the fixture run and wait until its front exists. */
export async function ensureFixtureRun(api: ApiClient): Promise<string> {
  const record = await api.createRun(fixtureProblem(), FIXTURE_CONFIG);
  await waitForRun(api, record.id);
  return record.id;
}
