import { ApiClient, ServiceError } from "./api";
import { DetailPanel } from "./detail";
import { ParallelCoordinates } from "./parcoords";
import type { DraftPin } from "./pins";
import { pinPackageDrafts, toDocuments, validateDrafts } from "./pins";
import { RunProgress } from "./progress";
import { Scatter } from "./scatter";
import { FrontView } from "./state";
import type { ObjectiveName } from "./types";

/**
 * Wires the page together. All data flows one way: service responses land
 * in FrontView / RunProgress state, and rendering is a pure function of
 * that state. The base URL can be overridden with ?service=http://...
 * during development.
 */
export function mountApp(root: HTMLElement, baseUrl: string): AppHandles {
  const api = new ApiClient(baseUrl);
  const view = new FrontView(api);

  root.innerHTML = `
    <header>
      <h1>archsearch explorer</h1>
      <div id="banner" class="banner" hidden></div>
    </header>
    <section id="runs-section">
      <h2>runs <button id="refresh-runs">refresh</button></h2>
      <ul id="run-list"></ul>
    </section>
    <section id="front-section">
      <h2>front <span id="front-count"></span>
        <button id="clear-brushes">clear brushes</button></h2>
      <div id="parcoords-host"></div>
      <div id="scatter-host"></div>
      <table id="solution-table">
        <thead></thead><tbody></tbody>
      </table>
    </section>
    <section id="inspect-section">
      <h2>solution</h2>
      <div id="detail-host"></div>
    </section>
    <section id="pins-section">
      <h2>pin drafts</h2>
      <ul id="draft-list"></ul>
      <p id="draft-conflict" class="conflict" hidden></p>
      <label>max evaluations <input id="override-evals" type="number"></label>
      <label>seed <input id="override-seed" type="number"></label>
      <button id="launch-constrained">launch constrained run</button>
      <div id="progress-host"></div>
    </section>
  `;

  const banner = root.querySelector<HTMLElement>("#banner")!;
  const runList = root.querySelector<HTMLUListElement>("#run-list")!;
  const frontCount = root.querySelector<HTMLElement>("#front-count")!;
  const tableHead = root.querySelector<HTMLTableSectionElement>("#solution-table thead")!;
  const tableBody = root.querySelector<HTMLTableSectionElement>("#solution-table tbody")!;
  const draftList = root.querySelector<HTMLUListElement>("#draft-list")!;
  const conflictBox = root.querySelector<HTMLElement>("#draft-conflict")!;

  const parcoords = new ParallelCoordinates(
    root.querySelector<HTMLElement>("#parcoords-host")!,
    {
      onBrush: (name, lower, upper) => void view.setBound(name, lower, upper),
      onSelect: (ref) => view.select(ref),
    },
  );
  const scatter = new Scatter(
    root.querySelector<HTMLElement>("#scatter-host")!,
    (ref) => view.select(ref),
  );
  const detail = new DetailPanel(
    root.querySelector<HTMLElement>("#detail-host")!,
    { onPin: addPackagePin },
  );
  detail.clear();
  const progress = new RunProgress(
    api,
    root.querySelector<HTMLElement>("#progress-host")!,
  );

  let drafts: DraftPin[] = [];
  let knownUnits: string[] = [];
  let lastSelected: string | null = null;

  function setBanner(message: string | null): void {
    banner.hidden = message === null;
    banner.textContent = message ?? "";
  }

  function renderDrafts(): void {
    draftList.replaceChildren();
    const labels = new Map<string, number>();
    for (const draft of drafts) {
      labels.set(draft.label, (labels.get(draft.label) ?? 0) + 1);
    }
    for (const [label, count] of labels) {
      const item = document.createElement("li");
      item.textContent = `${label} (${count} units) `;
      const remove = document.createElement("button");
      remove.textContent = "remove";
      remove.addEventListener("click", () => {
        drafts = drafts.filter((d) => d.label !== label);
        renderDrafts();
      });
      item.appendChild(remove);
      draftList.appendChild(item);
    }
    const conflict = validateDrafts(drafts, knownUnits);
    conflictBox.hidden = conflict === null;
    if (conflict) {
      conflictBox.textContent =
        `${conflict.message} (${conflict.first.label} vs ${conflict.second.label})`;
    }
  }

  function addPackagePin(slot: number, layer: number, unitNames: string[]): void {
    drafts = drafts.concat(pinPackageDrafts(slot, layer, unitNames));
    renderDrafts();
  }

  async function refreshRuns(): Promise<void> {
    try {
      const { runs } = await api.listRuns();
      runList.replaceChildren();
      for (const run of runs) {
        const item = document.createElement("li");
        item.setAttribute("data-run", run.id);
        const button = document.createElement("button");
        button.textContent = `${run.id.slice(0, 12)} [${run.status}] ${run.latest_evals} evals`;
        button.addEventListener("click", () => void view.loadRun(run.id));
        item.appendChild(button);
        runList.appendChild(item);
      }
      setBanner(null);
    } catch (err) {
      setBanner(describeError(err));
    }
  }

  view.subscribe((state) => {
    setBanner(state.error ? `${state.error}${state.stale ? " (stale data)" : ""}` : null);
    if (!state.front) return;
    const names = state.front.objective_names as ObjectiveName[];
    frontCount.textContent = `${state.visible.length} of ${state.total} solutions`;
    parcoords.render(names, state.front.objectives, state.visible, state.selectedRef, state.query);
    scatter.setObjectives(names);
    scatter.render(state.front.objectives, state.visible, state.selectedRef);

    tableHead.innerHTML =
      "<tr><th>ref</th>" + names.map((n) => `<th>${n}</th>`).join("") + "</tr>";
    tableBody.replaceChildren();
    for (const solution of state.visible) {
      const row = document.createElement("tr");
      row.setAttribute("data-ref", solution.ref);
      if (solution.ref === state.selectedRef) row.className = "selected";
      row.innerHTML =
        `<td>${solution.ref}</td>` +
        solution.objectives.map((v) => `<td>${v.toFixed(3)}</td>`).join("");
      row.addEventListener("click", () => view.select(solution.ref));
      tableBody.appendChild(row);
    }

    if (state.selectedRef && state.selectedRef !== lastSelected) {
      lastSelected = state.selectedRef;
      api
        .solution(state.selectedRef)
        .then((doc) => {
          knownUnits = doc.packages.flatMap((p) => p.units);
          detail.render(doc);
        })
        .catch((err) => detail.showError(describeError(err)));
    } else if (!state.selectedRef) {
      lastSelected = null;
      detail.clear();
    }
  });

  root.querySelector("#refresh-runs")!.addEventListener("click", () => void refreshRuns());
  root.querySelector("#clear-brushes")!.addEventListener("click", () => void view.clearAllBounds());
  root.querySelector("#launch-constrained")!.addEventListener("click", () => void launch());

  async function launch(): Promise<void> {
    const state = view.current;
    if (!state.runId) {
      setBanner("load a run before launching a constrained one");
      return;
    }
    const overrides: Record<string, unknown> = {};
    const evals = root.querySelector<HTMLInputElement>("#override-evals")!.value;
    const seed = root.querySelector<HTMLInputElement>("#override-seed")!.value;
    if (evals) overrides.max_evaluations = Number(evals);
    if (seed) overrides.seed = Number(seed);
    if (drafts.length === 0 && Object.keys(overrides).length === 0) {
      setBanner("nothing to constrain: add pins or overrides first");
      return;
    }
    const conflict = validateDrafts(drafts, knownUnits);
    if (conflict) {
      setBanner(`conflicting pins: ${conflict.message}`);
      return;
    }
    try {
      const record = await api.constrain(state.runId, toDocuments(drafts), overrides);
      progress.watch(record.id);
      await refreshRuns();
    } catch (err) {
      if (err instanceof ServiceError && err.status === 409) {
        const first = JSON.stringify(err.payload.first);
        const second = JSON.stringify(err.payload.second);
        setBanner(`pin conflict: ${err.message} first=${first} second=${second}`);
      } else {
        setBanner(describeError(err));
      }
    }
  }

  void refreshRuns();

  return { api, view, parcoords, scatter, detail, progress, refreshRuns };
}

export interface AppHandles {
  api: ApiClient;
  view: FrontView;
  parcoords: ParallelCoordinates;
  scatter: Scatter;
  detail: DetailPanel;
  progress: RunProgress;
  refreshRuns: () => Promise<void>;
}

function describeError(err: unknown): string {
  if (err instanceof ServiceError && err.unreachable) return "service unreachable";
  return err instanceof Error ? err.message : String(err);
}

if (typeof window !== "undefined" && document.getElementById("app")) {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("service") ?? "";
  mountApp(document.getElementById("app")!, base);
}
