// Response shapes of the archsearch HTTP service. Everything the UI shows
// comes out of these documents; the client never derives objective values
// or indicators on its own.

export const OBJECTIVE_NAMES = [
  "neg_cohesion",
  "nccd_deviation",
  "efferent",
  "afferent",
  "distance",
  "violations",
  "cyclic_edges",
  "size_range",
] as const;

export type ObjectiveName = (typeof OBJECTIVE_NAMES)[number];

export type RunStatus = "queued" | "running" | "done" | "failed";

export interface RunRecord {
  id: string;
  status: RunStatus;
  config: Record<string, unknown>;
  path: string;
  latest_evals: number;
}

export interface RunList {
  runs: RunRecord[];
}

export interface FrontResponse {
  run: string;
  objective_names: string[];
  objectives: number[][];
  refs: string[];
}

export interface Bound {
  lower?: number;
  upper?: number;
}

/** Per-objective bounds; absent objective means unconstrained. */
export type FilterQuery = Partial<Record<ObjectiveName, Bound>>;

export interface FilterSolution {
  ref: string;
  objectives: number[];
}

export interface FilterResponse {
  run: string;
  total: number;
  solutions: FilterSolution[];
}

export interface PackageDetail {
  package: number;
  layer: number;
  size: number;
  cohesion: number;
  efferent: number;
  afferent: number;
  distance: number | null;
  units: string[];
}

export interface Violation {
  from: string;
  to: string;
  from_layer: number;
  to_layer: number;
}

export interface CyclicPackageEdge {
  from_package: number;
  to_package: number;
}

export interface SolutionDetail {
  ref: string;
  run: string;
  objective_names: string[];
  objectives: number[];
  packages: PackageDetail[];
  unit_to_package: number[];
  package_to_layer: number[];
  violations: Violation[];
  cyclic_package_edges: CyclicPackageEdge[];
}

export interface Snapshot {
  evals: number;
  archive: number[][];
}

export interface SnapshotsResponse {
  run: string;
  snapshots: Snapshot[];
  status: RunStatus;
}

/** Wire form of one pin, as accepted by POST /runs/{id}/constrain. */
export interface PinDocument {
  pattern: string;
  package?: number;
  layer?: number;
}

export interface IndicatorRow {
  run: string;
  evals: number;
  hv: number;
  gd: number;
  igd: number;
  eps: number;
  spacing: number;
  contribution: number;
}

export interface IndicatorsResponse {
  rows: IndicatorRow[];
}

export interface ReferenceFrontResponse {
  points: number[][];
  provenance: string[];
  input_labels: string[];
  objective_names: string[];
}

/** 409 payload: the two pins the service found to contradict each other. */
export interface ConflictPayload {
  detail: string;
  first?: PinDocument;
  second?: PinDocument;
}
