import { beforeAll, describe, expect, inject, it } from "vitest";
import { ApiClient, ServiceError } from "../src/api";
import { DetailPanel } from "../src/detail";
import { toDocuments, validateDrafts, type DraftPin } from "../src/pins";
import { RunProgress, type ProgressState } from "../src/progress";
import type { SolutionDetail } from "../src/types";
import { ensureFixtureRun, waitForRun } from "./helpers/fixture";

// Constrained-run round trip: pin a package through the detail panel's pin
// affordance, launch via POST /constrain, and check that every solution of
// the completed run honors the pin, exhaustively.

let api: ApiClient;
let runId: string;

beforeAll(async () => {
  api = new ApiClient(inject("baseUrl"));
  runId = await ensureFixtureRun(api);
});

function allUnitNames(detail: SolutionDetail): string[] {
  return detail.packages.flatMap((p) => p.units);
}

describe("constrained-run round trip", () => {
  it("pins a package via the detail panel and verifies the whole front", async () => {
    const baseDetail = await api.solution(`${runId}:0`);

    // Render the panel and click "pin" on the biggest package.
    const host = document.createElement("div");
    document.body.appendChild(host);
    let drafts: DraftPin[] = [];
    const panel = new DetailPanel(host, {
      onPin: (slot, layer, units) => {
        drafts = drafts.concat(
          units.map((name) => ({
            pattern: name,
            package: slot,
            layer,
            label: `package ${slot} → layer ${layer}`,
          })),
        );
      },
    });
    panel.render(baseDetail);

    const target = [...baseDetail.packages].sort((a, b) => b.size - a.size)[0];
    const button = host.querySelector<HTMLButtonElement>(
      `.package-box[data-package="${target.package}"] .pin-button`,
    );
    expect(button).not.toBeNull();
    button!.click();

    expect(drafts).toHaveLength(target.units.length);
    const conflict = validateDrafts(drafts, allUnitNames(baseDetail));
    expect(conflict).toBeNull();

    const record = await api.constrain(runId, toDocuments(drafts), {
      max_evaluations: 2000,
      seed: 9,
    });
    expect(record.id).not.toBe(runId);
    await waitForRun(api, record.id);

    // The new run is in the run list.
    const { runs } = await api.listRuns();
    expect(runs.map((r) => r.id)).toContain(record.id);

    // Exhaustive check over the constrained front: every pinned unit sits
    // in the target slot and the slot sits on the target layer.
    const front = await api.front(record.id);
    expect(front.refs.length).toBeGreaterThan(0);
    for (const ref of front.refs) {
      const detail = await api.solution(ref);
      expect(detail.package_to_layer[target.package]).toBe(target.layer);
      const pinned = detail.packages.find((p) => p.package === target.package);
      expect(pinned, ref).toBeDefined();
      for (const unit of target.units) {
        expect(pinned!.units, `${ref} ${unit}`).toContain(unit);
      }
    }
  });

  it("draws the hypervolume curve from the indicator endpoint when done", async () => {
    const host = document.createElement("div");
    document.body.appendChild(host);
    const progress = new RunProgress(api, host, 50);

    const finished = new Promise<ProgressState>((resolve) => {
      progress.subscribe((state) => {
        if (state.status === "done") resolve(state);
      });
    });
    progress.watch(runId);
    const state = await finished;

    expect(state.snapshots.length).toBeGreaterThan(0);
    expect(state.hvRows.length).toBe(state.snapshots.length);
    const points = host.querySelector("svg.hv-chart polyline")!;
    expect(points.getAttribute("points")!.split(" ")).toHaveLength(
      state.hvRows.length,
    );
    const label = host.querySelector("svg.hv-chart text")!;
    expect(label.textContent).toContain("hypervolume");
  });

  it("answers 409 with both pins on a contradictory draft", async () => {
    const detail = await api.solution(`${runId}:0`);
    const unit = detail.packages[0].units[0];
    const pins = [
      { pattern: unit, package: 0 },
      { pattern: unit, package: 1 },
    ];
    const err = await api.constrain(runId, pins).then(
      () => null,
      (e: unknown) => e,
    );
    expect(err).toBeInstanceOf(ServiceError);
    const service = err as ServiceError;
    expect(service.status).toBe(409);
    expect(service.payload.first).toMatchObject({ pattern: unit });
    expect(service.payload.second).toMatchObject({ pattern: unit });
  });

  it("rejects an empty constrain request", async () => {
    const err = await api.constrain(runId, [], {}).then(
      () => null,
      (e: unknown) => e,
    );
    expect(err).toBeInstanceOf(ServiceError);
    expect((err as ServiceError).status).toBe(400);
    expect((err as ServiceError).message).toContain("nothing to constrain");
  });
});
