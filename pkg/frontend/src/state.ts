import type { ApiClient } from "./api";
import { ServiceError } from "./api";
import type {
  Bound,
  FilterQuery,
  FilterSolution,
  FrontResponse,
  ObjectiveName,
} from "./types";

export interface FrontViewState {
  runId: string | null;
  /** Unfiltered front, used for axis scales; display rows never come from it. */
  front: FrontResponse | null;
  query: FilterQuery;
  /** Exactly the service's filter answer for `query`, in service order. */
  visible: FilterSolution[];
  total: number;
  selectedRef: string | null;
  /** True when the last refresh failed and `visible` is out of date. */
  stale: boolean;
  error: string | null;
}

type Listener = (state: FrontViewState) => void;

/**
 * The front exploration state. Every change to the filter query round-trips
 * through POST /runs/{id}/filter; the rendered set is whatever the service
 * answered, never a client-side selection. Only the newest in-flight query
 * may publish its result (latest wins).
 */
export class FrontView {
  private state: FrontViewState = {
    runId: null,
    front: null,
    query: {},
    visible: [],
    total: 0,
    selectedRef: null,
    stale: false,
    error: null,
  };
  private listeners: Listener[] = [];
  private token = 0;

  constructor(private readonly api: ApiClient) {}

  get current(): FrontViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  async loadRun(runId: string): Promise<void> {
    this.token += 1;
    try {
      const front = await this.api.front(runId);
      this.state = {
        ...this.state,
        runId,
        front,
        query: {},
        selectedRef: null,
        error: null,
      };
    } catch (err) {
      this.state = {
        ...this.state,
        runId,
        front: null,
        visible: [],
        total: 0,
        stale: true,
        error: describe(err),
      };
      this.emit();
      return;
    }
    await this.refresh();
  }

  async setBound(
    name: ObjectiveName,
    lower: number | undefined,
    upper: number | undefined,
  ): Promise<void> {
    const bound: Bound = {};
    if (lower !== undefined) bound.lower = lower;
    if (upper !== undefined) bound.upper = upper;
    const query = { ...this.state.query };
    if (lower === undefined && upper === undefined) delete query[name];
    else query[name] = bound;
    this.state = { ...this.state, query };
    await this.refresh();
  }

  async setQuery(query: FilterQuery): Promise<void> {
    this.state = { ...this.state, query: { ...query } };
    await this.refresh();
  }

  async clearAllBounds(): Promise<void> {
    this.state = { ...this.state, query: {} };
    await this.refresh();
  }

  select(ref: string | null): void {
    this.state = { ...this.state, selectedRef: ref };
    this.emit();
  }

  private async refresh(): Promise<void> {
    const { runId, query } = this.state;
    if (runId === null) return;
    const ticket = ++this.token;
    try {
      const response = await this.api.filter(runId, query);
      if (ticket !== this.token) return; // superseded by a newer query
      this.state = {
        ...this.state,
        visible: response.solutions,
        total: response.total,
        stale: false,
        error: null,
      };
    } catch (err) {
      if (ticket !== this.token) return;
      this.state = { ...this.state, stale: true, error: describe(err) };
    }
    this.emit();
  }
}

function describe(err: unknown): string {
  if (err instanceof ServiceError) {
    return err.unreachable ? "service unreachable" : err.message;
  }
  return String(err);
}
