import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import type { TestProject } from "vitest/node";

// Boots one real archsearch service over a throwaway store for the whole
// suite. Tests create their fixture runs through the HTTP interface, so
// nothing here touches the Python package beyond its console script.

async function waitForHealth(base: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 30_000;
  let lastError = "";
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`service exited with code ${child.exitCode}`);
    }
    try {
      const response = await fetch(`${base}/health`);
      if (response.ok) return;
      lastError = `status ${response.status}`;
    } catch (err) {
      lastError = String(err);
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`service did not come up: ${lastError}`);
}

export default async function setup(project: TestProject): Promise<() => void> {
  const store = mkdtempSync(join(tmpdir(), "explorer-ui-store-"));
  const port = 21000 + Math.floor(Math.random() * 20000);
  const base = `http://127.0.0.1:${port}`;

  const child = spawn(
    "archsearch",
    ["serve", "--store", store, "--port", String(port)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let log = "";
  child.stdout?.on("data", (chunk) => (log += chunk));
  child.stderr?.on("data", (chunk) => (log += chunk));

  try {
    await waitForHealth(base, child);
  } catch (err) {
    child.kill();
    rmSync(store, { recursive: true, force: true });
    throw new Error(`${String(err)}\nservice log:\n${log}`);
  }

  project.provide("baseUrl", base);
  return () => {
    child.kill();
    rmSync(store, { recursive: true, force: true });
  };
}
