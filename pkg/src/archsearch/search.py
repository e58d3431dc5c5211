"""Random-key encoding, problem binding, and the multi-objective optimizers.

A genotype is a real vector in [0,1]^(U+P): the first U genes place units
into package slots, the last P genes place slots into layers, each decoded
by scale-and-floor.  Pins and scenario freezes override decoded positions,
so every genotype decodes to a valid, constraint-honoring solution and no
repair step is needed.

Every optimizer shares one global unbounded archive holding the exact
non-dominated set of all vectors evaluated so far; snapshots copy it at
fixed evaluation budgets so runs can be compared at equal cost.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, ContractViolation
from .indicators import Front
from .model import (
    EMPTY_PINS,
    ArchitectureSolution,
    ConceptualModel,
    DependencyGraph,
    Pin,
    PinTable,
    bind_pins,
    resolve_package_slots,
)
from .objectives import AGGREGATIONS, MEAN, BatchEvaluator, ObjectiveVector
from .operators import (
    crowded_tournament,
    crowding_distance,
    environmental_selection,
    nondominated_mask,
    polynomial_mutation_batch,
    rank_and_crowding,
    sbx_crossover_pairs,
    unique_rows_first_occurrence,
)

ALGORITHMS = ("nsga2", "gde3_style", "omopso_style", "random")

INIT_RANDOM = "random"
INIT_ORIGINAL_MAPPING = "original_mapping"

OMOPSO_LEADER_EPSILON = 0.0075  # per normalized axis
_DE_F = 0.5
_DE_CR = 0.5

Genotype = np.ndarray


@dataclass(frozen=True)
class FreezeMask:
    """Scenario-level hard assignments applied after gene decoding.

    package_layer[k] >= 0 forces slot k onto that layer for every decoded
    solution of the run (the mounted-scenario mechanism).
    """

    package_layer: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.package_layer, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "package_layer", arr)

    @classmethod
    def none(cls, package_slots: int) -> "FreezeMask":
        return cls(np.full(package_slots, -1, dtype=np.int64))

    @property
    def any(self) -> bool:
        return bool((self.package_layer >= 0).any())


@dataclass(frozen=True)
class Problem:
    """A dependency graph bound to a model, pins, and optional scenario freeze."""

    graph: DependencyGraph
    model: ConceptualModel
    pins: PinTable = EMPTY_PINS
    freeze: FreezeMask | None = None
    init_policy: str = INIT_RANDOM

    def __post_init__(self):
        if self.model.package_slots < 1:
            raise ContractViolation("problem needs a model with resolved package_slots")
        if self.init_policy not in (INIT_RANDOM, INIT_ORIGINAL_MAPPING):
            raise ContractViolation(f"unknown init policy {self.init_policy!r}")
        if self.freeze is not None and len(self.freeze.package_layer) != self.model.package_slots:
            raise ContractViolation("freeze mask does not match package_slots")
        if self.init_policy == INIT_ORIGINAL_MAPPING and \
                len(self.graph.origin_packages) > self.model.package_slots:
            raise ContractViolation("origin mapping needs a slot per origin package")

    @classmethod
    def bind(cls, graph: DependencyGraph, model: ConceptualModel,
             pins: Sequence[Pin] | PinTable = (), freeze: FreezeMask | None = None,
             init_policy: str = INIT_RANDOM) -> "Problem":
        model = resolve_package_slots(model, graph)
        if not isinstance(pins, PinTable):
            pins = bind_pins(list(pins), graph, model) if pins else EMPTY_PINS
        return cls(graph=graph, model=model, pins=pins, freeze=freeze,
                   init_policy=init_policy)

    @property
    def unit_count(self) -> int:
        return self.graph.unit_count

    @property
    def package_slots(self) -> int:
        return self.model.package_slots

    @property
    def layer_count(self) -> int:
        return self.model.layer_count

    @property
    def genotype_length(self) -> int:
        return self.unit_count + self.package_slots

    def decode_batch(self, genes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return decode_batch(genes, self.unit_count, self.package_slots,
                            self.layer_count, self.pins, self.freeze)

    def decode(self, genes: np.ndarray) -> ArchitectureSolution:
        u2p, p2l = self.decode_batch(np.asarray(genes, dtype=np.float64)[None, :])
        return ArchitectureSolution.from_arrays(u2p[0], p2l[0])

    def initial_population(self, rng: np.random.Generator, size: int,
                           mutation_rate: float, mutation_di: float) -> np.ndarray:
        if self.init_policy == INIT_RANDOM:
            return rng.random((size, self.genotype_length))
        origin = genotype_for_assignment(
            self.graph.origin_slot_of_unit,
            np.zeros(self.package_slots, dtype=np.int64),
            self.package_slots, self.layer_count)
        pop = np.tile(origin, (size, 1))
        if size > 1:
            pop[1:] = polynomial_mutation_batch(pop[1:], mutation_rate, mutation_di, rng)
        return pop


def decode_batch(genes: np.ndarray, unit_count: int, package_slots: int,
                 layer_count: int, pins: PinTable = EMPTY_PINS,
                 freeze: FreezeMask | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Decode a (B, U+P) gene matrix into (B, U) and (B, P) assignments."""
    genes = np.asarray(genes, dtype=np.float64)
    if genes.ndim != 2 or genes.shape[1] != unit_count + package_slots:
        raise ContractViolation(
            f"genotype length must be {unit_count + package_slots}, got {genes.shape}")
    u2p = np.minimum((genes[:, :unit_count] * package_slots).astype(np.int64),
                     package_slots - 1)
    p2l = np.minimum((genes[:, unit_count:] * layer_count).astype(np.int64),
                     layer_count - 1)

    pinned_pkg = pins.unit_package_array(unit_count)
    mask = pinned_pkg >= 0
    if mask.any():
        u2p[:, mask] = pinned_pkg[mask]

    if freeze is not None:
        fmask = freeze.package_layer >= 0
        if fmask.any():
            p2l[:, fmask] = freeze.package_layer[fmask]

    pinned_layer = pins.package_layer_array(package_slots)
    lmask = pinned_layer >= 0
    if lmask.any():
        p2l[:, lmask] = pinned_layer[lmask]

    for unit, layer in pins.unit_layer.items():
        p2l[np.arange(len(genes)), u2p[:, unit]] = layer

    return u2p, p2l


def decode(genes: np.ndarray, unit_count: int, package_slots: int, layer_count: int,
           pins: PinTable = EMPTY_PINS, freeze: FreezeMask | None = None) -> ArchitectureSolution:
    """Decode one genotype; pinned and frozen positions override the genes."""
    u2p, p2l = decode_batch(np.asarray(genes, dtype=np.float64)[None, :],
                            unit_count, package_slots, layer_count, pins, freeze)
    return ArchitectureSolution.from_arrays(u2p[0], p2l[0])


def genotype_for_assignment(u2p: np.ndarray, p2l: np.ndarray,
                            package_slots: int, layer_count: int) -> np.ndarray:
    """Genes at bin centers, so decoding reproduces the assignment exactly."""
    u = (np.asarray(u2p, dtype=np.float64) + 0.5) / package_slots
    p = (np.asarray(p2l, dtype=np.float64) + 0.5) / layer_count
    return np.concatenate([u, p])


@dataclass(frozen=True)
class RunConfig:
    algorithm: str
    population: int = 50
    max_evaluations: int = 50_000
    snapshot_interval: int = 50
    mutation_rate: float = 0.5
    mutation_di: float = 10.0
    crossover_rate: float = 1.0
    crossover_di: float = 10.0
    seed: int = 0
    scenario: str | None = None
    aggregation: str = MEAN

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; "
                              f"choose one of {', '.join(ALGORITHMS)}")
        for name in ("population", "max_evaluations", "snapshot_interval"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.max_evaluations % self.snapshot_interval != 0:
            raise ConfigError("snapshot_interval must divide max_evaluations")
        for name in ("mutation_rate", "crossover_rate"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0,1], got {value!r}")
        for name in ("mutation_di", "crossover_di"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.aggregation not in AGGREGATIONS:
            raise ConfigError(f"aggregation must be one of {AGGREGATIONS}")

    def to_document(self) -> dict:
        doc = {
            "algorithm": self.algorithm,
            "population": self.population,
            "max_evaluations": self.max_evaluations,
            "snapshot_interval": self.snapshot_interval,
            "mutation_rate": self.mutation_rate,
            "mutation_di": self.mutation_di,
            "crossover_rate": self.crossover_rate,
            "crossover_di": self.crossover_di,
            "seed": self.seed,
            "scenario": self.scenario,
            "aggregation": self.aggregation,
        }
        if self.algorithm == "omopso_style":
            doc["leader_epsilon"] = OMOPSO_LEADER_EPSILON
        return doc

    @classmethod
    def from_document(cls, doc: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        kwargs = {k: v for k, v in doc.items() if k in known}
        return cls(**kwargs)


@dataclass(frozen=True)
class Snapshot:
    """State of a run at an exact multiple of the snapshot interval."""

    eval_count: int
    population: np.ndarray
    archive: np.ndarray

    @property
    def population_objectives(self) -> list[ObjectiveVector]:
        return [ObjectiveVector(tuple(row)) for row in self.population]

    def archive_front(self) -> Front:
        return Front(self.archive)


@dataclass(frozen=True)
class RunResult:
    config: RunConfig
    snapshots: tuple[Snapshot, ...]
    final_objectives: np.ndarray
    final_unit_to_package: np.ndarray
    final_package_to_layer: np.ndarray
    wall_time: float
    trace: np.ndarray | None = None

    def final_front(self) -> Front:
        return Front(self.final_objectives)

    def __len__(self) -> int:
        return len(self.final_objectives)


class _RunState:
    """Evaluation budget, global archive, and snapshot bookkeeping."""

    def __init__(self, problem: Problem, config: RunConfig,
                 keep_trace: bool, on_snapshot: Callable | None):
        self.problem = problem
        self.config = config
        self.evaluator = BatchEvaluator(problem.graph, problem.model, config.aggregation)
        self.evals = 0
        self.next_snapshot = config.snapshot_interval
        self.snapshots: list[Snapshot] = []
        self.on_snapshot = on_snapshot
        n = problem.genotype_length
        self.archive_points = np.empty((0, 8))
        self.archive_genes = np.empty((0, n))
        self.obj_lo = np.full(8, np.inf)
        self.obj_hi = np.full(8, -np.inf)
        self.trace: list[np.ndarray] | None = [] if keep_trace else None

    @property
    def remaining(self) -> int:
        return self.config.max_evaluations - self.evals

    def evaluate(self, genes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate up to the remaining budget; returns (genes kept, objectives)."""
        genes = genes[:max(self.remaining, 0)]
        if len(genes) == 0:
            return genes, np.empty((0, 8))
        u2p, p2l = self.problem.decode_batch(genes)
        objs = self.evaluator.evaluate_batch(u2p, p2l)
        self.evals += len(genes)
        self.obj_lo = np.minimum(self.obj_lo, objs.min(axis=0))
        self.obj_hi = np.maximum(self.obj_hi, objs.max(axis=0))
        if self.trace is not None:
            self.trace.append(objs.copy())
        self._update_archive(genes, objs)
        return genes, objs

    def _update_archive(self, genes: np.ndarray, objs: np.ndarray):
        first = unique_rows_first_occurrence(objs)
        cand_p, cand_g = objs[first], genes[first]
        keep = nondominated_mask(cand_p)
        cand_p, cand_g = cand_p[keep], cand_g[keep]

        arch = self.archive_points
        if len(arch):
            # An archive point that is <= everywhere either dominates the
            # candidate or duplicates it; both cases drop the candidate.
            beaten = (arch[None, :, :] <= cand_p[:, None, :]).all(axis=2).any(axis=1)
            cand_p, cand_g = cand_p[~beaten], cand_g[~beaten]
            if len(cand_p):
                le_new = (cand_p[None, :, :] <= arch[:, None, :]).all(axis=2)
                lt_new = (cand_p[None, :, :] < arch[:, None, :]).any(axis=2)
                old_dead = (le_new & lt_new).any(axis=1)
                self.archive_points = np.vstack([arch[~old_dead], cand_p])
                self.archive_genes = np.vstack([self.archive_genes[~old_dead], cand_g])
        else:
            self.archive_points = cand_p
            self.archive_genes = cand_g

    def maybe_snapshot(self, population_objs: np.ndarray):
        while self.evals >= self.next_snapshot and \
                self.next_snapshot <= self.config.max_evaluations:
            snap = Snapshot(eval_count=self.next_snapshot,
                            population=population_objs.copy(),
                            archive=self.archive_points.copy())
            self.snapshots.append(snap)
            if self.on_snapshot is not None:
                self.on_snapshot(snap)
            self.next_snapshot += self.config.snapshot_interval


def _distinct_indices(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    """(count, n) matrix: per column, `count` distinct indices, none equal to it."""
    out = rng.integers(0, n, size=(count, n))
    while True:
        own = np.arange(n)[None, :]
        bad = out == own
        for a in range(count):
            for b in range(a + 1, count):
                bad[a] |= out[a] == out[b]
        flat = bad.any(axis=0)
        if not flat.any():
            return out
        redraw = bad
        out = np.where(redraw, rng.integers(0, n, size=(count, n)), out)


def _run_nsga2(problem: Problem, config: RunConfig, state: _RunState,
               rng: np.random.Generator):
    n_pop = config.population
    pop = problem.initial_population(rng, n_pop, config.mutation_rate, config.mutation_di)
    pop, objs = state.evaluate(pop)
    state.maybe_snapshot(objs)
    while state.remaining > 0:
        ranks, crowd = rank_and_crowding(objs)
        pairs = (n_pop + 1) // 2
        parents = crowded_tournament(ranks, crowd, 2 * pairs, rng)
        a, b = pop[parents[0::2]], pop[parents[1::2]]
        c1, c2 = sbx_crossover_pairs(a, b, config.crossover_rate, config.crossover_di, rng)
        children = np.empty((2 * pairs, pop.shape[1]))
        children[0::2], children[1::2] = c1, c2
        children = children[:n_pop]
        children = polynomial_mutation_batch(children, config.mutation_rate,
                                             config.mutation_di, rng)
        children, child_objs = state.evaluate(children)
        merged = np.vstack([pop, children])
        merged_objs = np.vstack([objs, child_objs])
        survivors = environmental_selection(merged_objs, n_pop)
        pop, objs = merged[survivors], merged_objs[survivors]
        state.maybe_snapshot(objs)


def _run_gde3(problem: Problem, config: RunConfig, state: _RunState,
              rng: np.random.Generator):
    n_pop = config.population
    pop = problem.initial_population(rng, n_pop, config.mutation_rate, config.mutation_di)
    pop, objs = state.evaluate(pop)
    state.maybe_snapshot(objs)
    n_genes = pop.shape[1]
    while state.remaining > 0:
        r = _distinct_indices(rng, n_pop, 3)
        donor = pop[r[0]] + _DE_F * (pop[r[1]] - pop[r[2]])
        cross = rng.random((n_pop, n_genes)) < _DE_CR
        jrand = rng.integers(0, n_genes, size=n_pop)
        cross[np.arange(n_pop), jrand] = True
        trial = np.clip(np.where(cross, donor, pop), 0.0, 1.0)
        trial, trial_objs = state.evaluate(trial)
        k = len(trial)
        if k == 0:
            break
        t_beats_p = ((trial_objs <= objs[:k]).all(axis=1) &
                     (trial_objs < objs[:k]).any(axis=1))
        p_beats_t = ((objs[:k] <= trial_objs).all(axis=1) &
                     (objs[:k] < trial_objs).any(axis=1))
        pool_genes = [pop]
        pool_objs = [objs.copy()]
        replaced = t_beats_p
        pool_genes[0] = pop.copy()
        pool_genes[0][:k][replaced] = trial[replaced]
        pool_objs[0][:k][replaced] = trial_objs[replaced]
        extra = ~t_beats_p & ~p_beats_t
        if extra.any():
            pool_genes.append(trial[extra])
            pool_objs.append(trial_objs[extra])
        merged = np.vstack(pool_genes)
        merged_objs = np.vstack(pool_objs)
        survivors = environmental_selection(merged_objs, n_pop)
        pop, objs = merged[survivors], merged_objs[survivors]
        state.maybe_snapshot(objs)


def _eps_box_filter(points: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                    eps: float) -> np.ndarray:
    """Indices surviving epsilon-box dominance; one point per surviving box."""
    span = np.where(hi > lo, hi - lo, 1.0)
    norm = (points - lo) / span
    boxes = np.floor(norm / eps)
    keep = nondominated_mask(boxes)
    idx = np.flatnonzero(keep)
    best: dict[tuple, int] = {}
    corner_dist = ((norm - boxes * eps) ** 2).sum(axis=1)
    for i in idx:
        key = tuple(boxes[i])
        if key not in best or corner_dist[i] < corner_dist[best[key]]:
            best[key] = int(i)
    return np.array(sorted(best.values()), dtype=np.int64)


def _run_omopso(problem: Problem, config: RunConfig, state: _RunState,
                rng: np.random.Generator):
    n_pop = config.population
    x = problem.initial_population(rng, n_pop, config.mutation_rate, config.mutation_di)
    x, objs = state.evaluate(x)
    state.maybe_snapshot(objs)
    n_genes = x.shape[1]
    vel = np.zeros_like(x)
    pbest_x, pbest_f = x.copy(), objs.copy()

    def rebuild_leaders(cand_x, cand_f):
        keep = nondominated_mask(cand_f)
        first = unique_rows_first_occurrence(cand_f[keep])
        lx, lf = cand_x[keep][first], cand_f[keep][first]
        eps_idx = _eps_box_filter(lf, state.obj_lo, state.obj_hi, OMOPSO_LEADER_EPSILON)
        lx, lf = lx[eps_idx], lf[eps_idx]
        if len(lf) > n_pop:
            crowd = crowding_distance(lf)
            top = np.argsort(-crowd, kind="stable")[:n_pop]
            lx, lf = lx[top], lf[top]
        return lx, lf

    leaders_x, leaders_f = rebuild_leaders(x, objs)

    turb_a = np.arange(n_pop) % 3 == 0
    turb_b = np.arange(n_pop) % 3 == 1

    while state.remaining > 0:
        crowd = crowding_distance(leaders_f)
        pick = rng.integers(0, len(leaders_f), size=(2, n_pop))
        better = crowd[pick[1]] > crowd[pick[0]]
        leader_idx = np.where(better, pick[1], pick[0])
        leaders = leaders_x[leader_idx]

        w = rng.uniform(0.1, 0.5, size=(n_pop, 1))
        c1 = rng.uniform(1.5, 2.0, size=(n_pop, 1))
        c2 = rng.uniform(1.5, 2.0, size=(n_pop, 1))
        r1 = rng.random((n_pop, n_genes))
        r2 = rng.random((n_pop, n_genes))
        vel = w * vel + c1 * r1 * (pbest_x - x) + c2 * r2 * (leaders - x)
        x = x + vel
        out = (x < 0.0) | (x > 1.0)
        x = np.clip(x, 0.0, 1.0)
        vel[out] *= -1.0

        x[turb_a] = polynomial_mutation_batch(x[turb_a], config.mutation_rate,
                                              config.mutation_di, rng)
        x[turb_b] = polynomial_mutation_batch(x[turb_b], config.mutation_rate,
                                              config.mutation_di, rng)

        x, objs = state.evaluate(x)
        k = len(x)
        if k == 0:
            break
        vel, pbest_x, pbest_f = vel[:k], pbest_x[:k], pbest_f[:k]

        new_beats = ((objs <= pbest_f).all(axis=1) & (objs < pbest_f).any(axis=1))
        old_beats = ((pbest_f <= objs).all(axis=1) & (pbest_f < objs).any(axis=1))
        coin = rng.random(k) < 0.5
        take = new_beats | (~old_beats & coin)
        pbest_x[take] = x[take]
        pbest_f[take] = objs[take]

        leaders_x, leaders_f = rebuild_leaders(
            np.vstack([leaders_x, x]), np.vstack([leaders_f, objs]))
        state.maybe_snapshot(objs)
        turb_a, turb_b = turb_a[:k], turb_b[:k]


def _run_random(problem: Problem, config: RunConfig, state: _RunState,
                rng: np.random.Generator):
    while state.remaining > 0:
        batch = rng.random((min(config.population, state.remaining),
                            problem.genotype_length))
        _, objs = state.evaluate(batch)
        state.maybe_snapshot(objs)


_OPTIMIZERS = {
    "nsga2": _run_nsga2,
    "gde3_style": _run_gde3,
    "omopso_style": _run_omopso,
    "random": _run_random,
}


def run(problem: Problem, config: RunConfig, keep_trace: bool = False,
        on_snapshot: Callable | None = None) -> RunResult:
    """Execute one seeded optimization run to its exact evaluation budget."""
    started = time.perf_counter()
    if config.algorithm == "gde3_style" and config.population < 4:
        raise ConfigError("gde3_style needs population >= 4 for distinct difference vectors")
    rng = np.random.Generator(np.random.PCG64(config.seed))
    state = _RunState(problem, config, keep_trace, on_snapshot)
    _OPTIMIZERS[config.algorithm](problem, config, state, rng)
    if state.evals != config.max_evaluations:
        raise ContractViolation(
            f"run consumed {state.evals} evaluations, budget is {config.max_evaluations}")
    u2p, p2l = problem.decode_batch(state.archive_genes)
    trace = np.vstack(state.trace) if state.trace is not None else None
    return RunResult(
        config=config,
        snapshots=tuple(state.snapshots),
        final_objectives=state.archive_points.copy(),
        final_unit_to_package=u2p,
        final_package_to_layer=p2l,
        wall_time=time.perf_counter() - started,
        trace=trace,
    )
