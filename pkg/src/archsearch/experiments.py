"""Reconstruction scenarios, synthetic systems, experiment matrices, statistics.

The matrix runner is the batch counterpart of the single-run API: it walks
algorithms x systems x scenarios x seeds, persists every run through a
RunStore, and skips whatever is already complete, so an interrupted matrix
resumes exactly where it stopped.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.stats import chi2, rankdata

from .errors import ConfigError, StoreError
from .model import (STRICT, TRANSIENT, ArchitectureSolution, ConceptualModel,
                    DependencyGraph, Pin, graph_document, model_document,
                    parse_graph, parse_model_for_graph, resolve_package_slots)
from .objectives import OBJECTIVE_NAMES
from .search import (ALGORITHMS, INIT_ORIGINAL_MAPPING, INIT_RANDOM,
                     FreezeMask, Problem, RunConfig)
from .store import DONE, RunStore

log = logging.getLogger(__name__)

# independent generator streams per seed, so base edges stay identical
# across noise levels and the mounting never depends on graph size
_BASE_STREAM = 0
_NOISE_STREAM = 1
_MOUNT_STREAM = 2
_DECAY_STREAM = 3

# fraction of units filed under the wrong declared package when the
# generator erodes the as-built mapping (slots > planted packages)
_ORIGIN_STRAY = 0.15


# -- problems as documents ---------------------------------------------------

def problem_document(graph: DependencyGraph, model: ConceptualModel,
                     pins: Sequence[Pin] = (), freeze: FreezeMask | None = None,
                     init_policy: str = INIT_RANDOM, system: str = "system",
                     scenario: str | None = None) -> dict:
    """Self-contained JSON form of a search problem.

    This document is what gets persisted next to each run and hashed into
    the run id, so everything that influences the search must be in here.
    """
    doc: dict = {
        "system": system,
        "graph": graph_document(graph),
        "model": model_document(model, pins),
        "init_policy": init_policy,
    }
    if freeze is not None and freeze.any:
        doc["freeze"] = [int(x) for x in freeze.package_layer]
    if scenario is not None:
        doc["scenario"] = scenario
    return doc


def problem_from_document(doc: dict) -> Problem:
    """Reconstruct the exact Problem a stored document describes."""
    if not isinstance(doc, dict) or "graph" not in doc or "model" not in doc:
        raise ConfigError("problem document needs 'graph' and 'model' sections")
    graph = parse_graph(json.dumps(doc["graph"]))
    model, pins = parse_model_for_graph(json.dumps(doc["model"]), graph)
    freeze = None
    if doc.get("freeze") is not None:
        freeze = FreezeMask(np.asarray(doc["freeze"], dtype=np.int64))
    return Problem.bind(graph, model, pins=pins, freeze=freeze,
                        init_policy=doc.get("init_policy", INIT_RANDOM))


# -- scenarios ---------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """A named reconstruction setting: style, layer count, mounting policy."""

    id: str
    style: str
    layer_count: int = 4
    mounted: bool = False

    def model_for(self, graph: DependencyGraph) -> ConceptualModel:
        model = ConceptualModel(
            style=self.style,
            layer_names=tuple(f"L{i}" for i in range(self.layer_count)),
            package_slots=0,
        )
        return resolve_package_slots(model, graph)

    def document(self, graph: DependencyGraph, seed: int,
                 pins: Sequence[Pin] = (), system: str = "system") -> dict:
        """Problem document for this scenario on the given graph and seed.

        Mounted scenarios freeze every package slot onto a seed-specific
        random layer and start the search from the origin-package mapping;
        the other scenarios leave everything free.
        """
        model = self.model_for(graph)
        freeze = None
        init_policy = INIT_RANDOM
        if self.mounted:
            rng = np.random.default_rng([seed, _MOUNT_STREAM])
            layers = rng.integers(0, model.layer_count, size=model.package_slots)
            freeze = FreezeMask(layers.astype(np.int64))
            init_policy = INIT_ORIGINAL_MAPPING
        return problem_document(graph, model, pins=pins, freeze=freeze,
                                init_policy=init_policy, system=system,
                                scenario=self.id)

    def bind(self, graph: DependencyGraph, seed: int,
             pins: Sequence[Pin] = ()) -> Problem:
        return problem_from_document(self.document(graph, seed, pins=pins))


SCENARIOS: dict[str, Scenario] = {
    "transient4": Scenario("transient4", style=TRANSIENT),
    "strict4": Scenario("strict4", style=STRICT),
    "strict4_mounted": Scenario("strict4_mounted", style=STRICT, mounted=True),
}


# -- synthetic evaluation systems ---------------------------------------------

def make_synthetic_system(units: int, packages: int, layers: int, noise: float,
                          seed: int, style: str = STRICT, *,
                          slots: int | None = None,
                          ) -> tuple[DependencyGraph, ConceptualModel, ArchitectureSolution]:
    """Generate a system with a planted layered decomposition.

    Units fill `packages` contiguous blocks, packages fill `layers`
    contiguous blocks.  Each package is a hub-and-spoke cluster: every
    member depends on the package hub (its first unit), and the last two
    members are ports that depend on the hub of one package on the next
    layer down.  Hubs have no outgoing base edges, so base dependency
    chains have length at most two and the base graph is acyclic.  On top
    of that, a fraction `noise` of uniformly random extra edges is added
    from an independent generator stream: regenerating with noise=0 and
    the same seed yields exactly the base graph, which is what lets tests
    recount the noise edges.

    With the default `slots=None` the declared (as-built) packages equal
    the planted ones.  Passing `slots` > `packages` instead declares an
    eroded mapping over that many package names: each planted cluster is
    fragmented into contiguous sub-packages and a few units are filed
    under the wrong package entirely, so the origin mapping is decent but
    nowhere near optimal, and models resolved against the graph get
    `slots` package slots to search over.

    Returns the graph, the conceptual model, and the planted ground-truth
    solution, which evaluates to zero violations and zero cyclic edges
    when noise is zero.
    """
    if not units >= packages >= layers >= 2:
        raise ConfigError(
            f"need units >= packages >= layers >= 2, got {units}/{packages}/{layers}")
    if not 0.0 <= noise <= 1.0:
        raise ConfigError(f"noise must lie in [0,1], got {noise!r}")
    if style not in (TRANSIENT, STRICT):
        raise ConfigError(f"unknown architecture style {style!r}")
    slot_count = packages if slots is None else int(slots)
    if not packages <= slot_count <= units:
        raise ConfigError(
            f"slots must lie in [packages, units], got {slots!r}")

    u2p = (np.arange(units) * packages) // units
    p2l = (np.arange(packages) * layers) // packages

    base_rng = np.random.default_rng([seed, _BASE_STREAM])
    noise_rng = np.random.default_rng([seed, _NOISE_STREAM])
    members = [np.flatnonzero(u2p == p) for p in range(packages)]
    edges: set[tuple[int, int]] = set()

    # intra-package: every member depends on the package hub
    for mem in members:
        hub = int(mem[0])
        for j in range(1, len(mem)):
            edges.add((int(mem[j]), hub))

    # cross-package: ports depend on a hub one layer down, a direction
    # both styles allow; package indices only grow, so no package cycles
    for p in range(packages):
        below = [q for q in range(packages) if p2l[q] == p2l[p] + 1]
        if not below:
            continue
        for u in members[p][-2:]:
            q = below[int(base_rng.integers(0, len(below)))]
            edges.add((int(u), int(members[q][0])))

    extra = int(round(noise * len(edges)))
    for _ in range(extra):
        a = int(noise_rng.integers(0, units))
        b = int(noise_rng.integers(0, units))
        while b == a:
            b = int(noise_rng.integers(0, units))
        edges.add((a, b))

    abstract = base_rng.random(units) < 0.25

    origin = u2p.copy()
    if slots is not None:
        # erode the as-built view: fragment each cluster into contiguous
        # sub-packages, then misfile a few units across the whole system
        decay_rng = np.random.default_rng([seed, _DECAY_STREAM])
        counts = [slot_count // packages + (1 if p < slot_count % packages else 0)
                  for p in range(packages)]
        offsets = np.concatenate([[0], np.cumsum(counts)])
        for p, mem in enumerate(members):
            sub = (np.arange(len(mem)) * counts[p]) // len(mem)
            origin[mem] = offsets[p] + sub
        stray = decay_rng.random(units) < _ORIGIN_STRAY
        origin[stray] = decay_rng.integers(0, slot_count, int(stray.sum()))

    pkg_names = [f"pkg{p:03d}" for p in range(slot_count)]
    document = {
        "types": [
            {"id": i, "name": f"{pkg_names[origin[i]]}.U{i:04d}",
             "package": pkg_names[origin[i]], "abstract": bool(abstract[i])}
            for i in range(units)
        ],
        "dependencies": [{"from": a, "to": b} for a, b in sorted(edges)],
    }
    graph = parse_graph(json.dumps(document))
    model = ConceptualModel(
        style=style,
        layer_names=tuple(f"L{i}" for i in range(layers)),
        package_slots=slot_count,
    )
    if slot_count > packages:
        p2l = np.concatenate([p2l, np.zeros(slot_count - packages, dtype=p2l.dtype)])
    planted = ArchitectureSolution.from_arrays(u2p, p2l)
    return graph, model, planted


# -- experiment matrix ---------------------------------------------------------

@dataclass(frozen=True)
class ExperimentMatrix:
    """A full-factorial experiment: algorithms x systems x scenarios x seeds."""

    algorithms: tuple[str, ...]
    systems: tuple[tuple[str, DependencyGraph], ...]
    scenarios: tuple[str, ...]
    seeds: tuple[int, ...]
    base: RunConfig

    def __post_init__(self):
        if not (self.algorithms and self.systems and self.scenarios and self.seeds):
            raise ConfigError("experiment matrix must not have empty axes")
        for algorithm in self.algorithms:
            if algorithm not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {algorithm!r}; "
                                  f"choose from {', '.join(ALGORITHMS)}")
        for scenario in self.scenarios:
            if scenario not in SCENARIOS:
                raise ConfigError(f"unknown scenario {scenario!r}; "
                                  f"choose from {', '.join(sorted(SCENARIOS))}")
        names = [name for name, _ in self.systems]
        if len(set(names)) != len(names):
            raise ConfigError("system names must be unique")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be unique")

    @property
    def total_runs(self) -> int:
        return (len(self.algorithms) * len(self.systems)
                * len(self.scenarios) * len(self.seeds))

    def cells(self):
        for system_name, graph in self.systems:
            for scenario in self.scenarios:
                for algorithm in self.algorithms:
                    for seed in self.seeds:
                        yield system_name, graph, scenario, algorithm, seed


@dataclass(frozen=True)
class MatrixRun:
    """One completed (or failed) cell-seed execution of a matrix."""

    algorithm: str
    system: str
    scenario: str
    seed: int
    run_id: str
    status: str
    executed: bool
    error: str | None = None


@dataclass(frozen=True)
class ResultSet:
    store: RunStore
    runs: tuple[MatrixRun, ...]

    @property
    def executed_count(self) -> int:
        return sum(1 for r in self.runs if r.executed)

    @property
    def failed(self) -> tuple[MatrixRun, ...]:
        return tuple(r for r in self.runs if r.error is not None)

    def completed(self) -> tuple[MatrixRun, ...]:
        return tuple(r for r in self.runs if r.status == DONE)


def _execute_cell(store: RunStore, system_name: str, graph: DependencyGraph,
                  scenario: str, algorithm: str, seed: int,
                  base: RunConfig) -> MatrixRun:
    doc = SCENARIOS[scenario].document(graph, seed, system=system_name)
    config = replace(base, algorithm=algorithm, seed=seed, scenario=scenario)
    problem = problem_from_document(doc)
    record = store.enqueue(doc, config)
    if record.status == DONE:
        return MatrixRun(algorithm, system_name, scenario, seed,
                         record.id, record.status, executed=False)
    try:
        record = store.execute(problem, doc, config)
    except StoreError:
        raise
    except Exception as exc:
        log.warning("run %s failed: %s", record.id, exc)
        return MatrixRun(algorithm, system_name, scenario, seed, record.id,
                         store.status(record.id), executed=True,
                         error=f"{type(exc).__name__}: {exc}")
    return MatrixRun(algorithm, system_name, scenario, seed,
                     record.id, record.status, executed=True)


def run_matrix(matrix: ExperimentMatrix, store: RunStore,
               worker_count: int = 1) -> ResultSet:
    """Execute every cell-seed combination, skipping completed runs.

    Individual run failures are recorded and the matrix continues; a
    corrupt store aborts the whole matrix.
    """
    if worker_count < 1:
        raise ConfigError("worker_count must be at least 1")
    cells = list(matrix.cells())
    if worker_count == 1:
        runs = [_execute_cell(store, *cell, matrix.base) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=worker_count) as pool:
            futures = [pool.submit(_execute_cell, store, *cell, matrix.base)
                       for cell in cells]
            runs = [f.result() for f in futures]
    return ResultSet(store=store, runs=tuple(runs))


# -- descriptive statistics -----------------------------------------------------

SLICE_FIELDS = ("algorithm", "system", "scenario")


@dataclass(frozen=True)
class StatReport:
    slice: str
    metric: str
    minimum: float
    maximum: float
    median: float
    n: int


def descriptive_stats(results: ResultSet, slice_by: str,
                      objective_index: int) -> list[StatReport]:
    """Min/Max/Median of one objective pooled over final-front solutions.

    Pools the chosen objective column across every completed run in each
    slice; slices with no solutions are omitted with a warning.
    """
    if slice_by not in SLICE_FIELDS:
        raise ConfigError(f"slice_by must be one of {', '.join(SLICE_FIELDS)}")
    if not 0 <= objective_index < len(OBJECTIVE_NAMES):
        raise ConfigError(f"objective_index must lie in [0, {len(OBJECTIVE_NAMES)})")
    metric = OBJECTIVE_NAMES[objective_index]
    groups: dict[str, list[float]] = {}
    for run in results.runs:
        if run.status != DONE:
            continue
        key = getattr(run, slice_by)
        values = groups.setdefault(key, [])
        front = results.store.load_front(run.run_id)
        values.extend(row[objective_index] for row in front["objectives"])
    reports = []
    for key in sorted(groups):
        pooled = np.asarray(groups[key], dtype=float)
        if len(pooled) == 0:
            log.warning("slice %r has no solutions; omitted", key)
            continue
        reports.append(StatReport(
            slice=key, metric=metric,
            minimum=float(pooled.min()), maximum=float(pooled.max()),
            median=float(np.median(pooled)), n=int(len(pooled)),
        ))
    return reports


def stats_to_csv(reports: Sequence[StatReport]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["slice", "metric", "min", "max", "median", "n"])
    for r in reports:
        writer.writerow([r.slice, r.metric,
                         repr(r.minimum), repr(r.maximum), repr(r.median), r.n])
    return out.getvalue()


# -- rank-based group comparison ------------------------------------------------

def kruskal_wallis(groups: Sequence[Sequence[float]]) -> tuple[float, float]:
    """H statistic with tie correction and its chi-square survival p-value.

    All observations identical is not an error: the statistic is 0 and the
    p-value 1 (the tie-corrected denominator would vanish otherwise).
    """
    if len(groups) < 2:
        raise ConfigError("kruskal_wallis needs at least two groups")
    arrays = [np.asarray(g, dtype=float) for g in groups]
    for a in arrays:
        if a.ndim != 1 or len(a) == 0:
            raise ConfigError("kruskal_wallis groups must be non-empty 1-d samples")
    pooled = np.concatenate(arrays)
    n = len(pooled)
    if np.all(pooled == pooled[0]):
        return 0.0, 1.0
    ranks = rankdata(pooled)
    h = 0.0
    start = 0
    for a in arrays:
        mean_rank = float(ranks[start:start + len(a)].mean())
        h += len(a) * (mean_rank - (n + 1) / 2.0) ** 2
        start += len(a)
    h *= 12.0 / (n * (n + 1))
    _, counts = np.unique(pooled, return_counts=True)
    correction = 1.0 - float(np.sum(counts ** 3 - counts)) / (n ** 3 - n)
    h /= correction
    p = float(chi2.sf(h, df=len(arrays) - 1))
    return float(h), p
