import type { ApiClient } from "./api";
import { axisScale } from "./parcoords";
import type { IndicatorRow, RunStatus, Snapshot } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 420;
const HEIGHT = 180;
const PAD = 30;

export interface ProgressState {
  runId: string;
  status: RunStatus;
  snapshots: Snapshot[];
  hvRows: IndicatorRow[];
  error: string | null;
}

/**
 * Progress view for a run in flight. Snapshots are polled once a second
 * with an incremental `?from=` cursor so each poll only transfers what is
 * new; when the run completes, the hypervolume-over-evaluations curve is
 * fetched from the indicator endpoint (the client never computes
 * hypervolume itself) and drawn.
 */
export class RunProgress {
  private state: ProgressState | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private listeners: Array<(state: ProgressState) => void> = [];

  constructor(
    private readonly api: ApiClient,
    private readonly container: HTMLElement,
    private readonly pollMs = 1000,
  ) {}

  subscribe(listener: (state: ProgressState) => void): void {
    this.listeners.push(listener);
  }

  get current(): ProgressState | null {
    return this.state;
  }

  watch(runId: string): void {
    this.stop();
    this.state = {
      runId,
      status: "queued",
      snapshots: [],
      hvRows: [],
      error: null,
    };
    void this.poll();
  }

  stop(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
  }

  private async poll(): Promise<void> {
    const state = this.state;
    if (!state) return;
    const cursor =
      state.snapshots.length > 0
        ? state.snapshots[state.snapshots.length - 1].evals
        : 0;
    try {
      const response = await this.api.snapshots(state.runId, cursor);
      state.snapshots.push(...response.snapshots);
      state.status = response.status;
      state.error = null;
    } catch (err) {
      state.error = String(err);
    }
    if (state.status === "done") {
      try {
        const indicators = await this.api.indicators([state.runId], true);
        state.hvRows = indicators.rows.filter((r) => r.run === state.runId);
      } catch (err) {
        state.error = String(err);
      }
      this.render();
      this.emit();
      return;
    }
    this.render();
    this.emit();
    this.timer = setTimeout(() => void this.poll(), this.pollMs);
  }

  private emit(): void {
    if (!this.state) return;
    for (const listener of this.listeners) listener(this.state);
  }

  private render(): void {
    const state = this.state;
    if (!state) return;
    this.container.replaceChildren();

    const status = document.createElement("p");
    status.className = "progress-status";
    const evals =
      state.snapshots.length > 0
        ? state.snapshots[state.snapshots.length - 1].evals
        : 0;
    status.textContent = `run ${state.runId}: ${state.status}, ${evals} evaluations`;
    if (state.error) status.textContent += ` (${state.error})`;
    this.container.appendChild(status);

    if (state.hvRows.length > 0) this.container.appendChild(this.hvChart(state));
  }

  private hvChart(state: ProgressState): SVGSVGElement {
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "hv-chart");
    svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
    svg.setAttribute("width", String(WIDTH));
    svg.setAttribute("height", String(HEIGHT));

    const rows = state.hvRows;
    const maxEvals = rows[rows.length - 1].evals;
    let hvMax = 0;
    for (const row of rows) hvMax = Math.max(hvMax, row.hv);
    const sy = axisScale(0, hvMax || 1, PAD, HEIGHT - PAD);
    const sxInner = axisScale(0, maxEvals || 1, PAD, WIDTH - PAD);
    const sx = (v: number) => WIDTH - sxInner.toPixel(v);

    const path = document.createElementNS(SVG_NS, "polyline");
    path.setAttribute("class", "hv-line");
    path.setAttribute("fill", "none");
    path.setAttribute(
      "points",
      rows
        .map((row) => `${sx(row.evals).toFixed(1)},${sy.toPixel(row.hv).toFixed(1)}`)
        .join(" "),
    );
    svg.appendChild(path);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(PAD));
    label.setAttribute("y", "14");
    label.textContent = `hypervolume over evaluations (final ${rows[rows.length - 1].hv.toFixed(4)})`;
    svg.appendChild(label);
    return svg;
  }
}
