"""The eight architecture-design objectives, packed all-minimized.

Canonical order of the objective vector:

    0  neg_cohesion     -H, H = mean relational cohesion over non-empty packages
    1  nccd_deviation   |NCCD - 1| of the package graph
    2  efferent         mean outgoing package coupling Ce
    3  afferent         mean incoming package coupling Ca
    4  distance         mean |A + I - 1| over packages with Ce + Ca > 0
    5  violations       type edges crossing layers in a forbidden direction
    6  cyclic_edges     package edges inside strongly connected components
    7  size_range       max - min unit count over all package slots

Every entry is finite and lower is better.  The single-solution functions
below are the readable reference path; BatchEvaluator is the vectorized path
the optimizers use, and the test suite pins the two against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ContractViolation
from .model import (
    ArchitectureSolution,
    ConceptualModel,
    DependencyGraph,
    PackageGraph,
    package_graph,
)

OBJECTIVE_NAMES = (
    "neg_cohesion",
    "nccd_deviation",
    "efferent",
    "afferent",
    "distance",
    "violations",
    "cyclic_edges",
    "size_range",
)
OBJECTIVE_COUNT = len(OBJECTIVE_NAMES)

MEAN = "mean"
SUM = "sum"
AGGREGATIONS = (MEAN, SUM)


@dataclass(frozen=True)
class ObjectiveVector:
    """The 8 canonical-minimized objective values of a solution."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != OBJECTIVE_COUNT:
            raise ContractViolation(f"objective vector needs {OBJECTIVE_COUNT} entries")
        if not all(math.isfinite(v) for v in self.values):
            raise ContractViolation(f"objective vector has non-finite entries: {self.values}")

    def __getitem__(self, index: int) -> float:
        return self.values[index]

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(OBJECTIVE_NAMES, self.values))

    @property
    def violations(self) -> float:
        return self.values[5]

    @property
    def cyclic_edges(self) -> float:
        return self.values[6]


def _aggregate(values: Sequence[float], aggregation: str) -> float:
    if aggregation not in AGGREGATIONS:
        raise ContractViolation(f"unknown aggregation {aggregation!r}")
    if len(values) == 0:
        return 0.0
    total = float(sum(values))
    return total if aggregation == SUM else total / len(values)


def _package_members(graph: DependencyGraph, sol: ArchitectureSolution) -> dict[int, list[int]]:
    members: dict[int, list[int]] = {}
    for unit, pkg in enumerate(sol.unit_to_package):
        members.setdefault(pkg, []).append(unit)
    return members


def relational_cohesion(graph: DependencyGraph, sol: ArchitectureSolution,
                        aggregation: str = MEAN) -> float:
    """H aggregated over non-empty packages, H_p = (internal edges + 1) / units."""
    members = _package_members(graph, sol)
    internal: dict[int, int] = {pkg: 0 for pkg in members}
    for a, b in graph.edges:
        pa, pb = sol.unit_to_package[a], sol.unit_to_package[b]
        if pa == pb:
            internal[pa] += 1
    per_package = [(internal[pkg] + 1) / len(units) for pkg, units in members.items()]
    return _aggregate(per_package, aggregation)


def _reach_sizes(pg: PackageGraph) -> dict[int, int]:
    """|reach(node)| including the node itself, following edges (cycles fine)."""
    succ = pg.successors()
    sizes: dict[int, int] = {}
    for start in pg.nodes:
        seen = {start}
        frontier = [start]
        while frontier:
            node = frontier.pop()
            for nxt in succ[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        sizes[start] = len(seen)
    return sizes


def balanced_tree_ccd(n: int) -> float:
    """CCD of a balanced binary dependency tree over n components."""
    if n < 1:
        raise ContractViolation("CCD normalizer needs n >= 1")
    return (n + 1) * math.log2(n + 1) - n


def nccd(pg: PackageGraph) -> float:
    """Normalised cumulative component dependency of the package graph.

    CCD sums reachable-set sizes over all nodes; NCCD divides by the CCD of
    a balanced binary tree of the same size.  1.0 therefore marks a balanced
    tree-like structure.
    """
    if pg.node_count < 1:
        raise ContractViolation("nccd needs a non-empty package graph")
    ccd = sum(_reach_sizes(pg).values())
    return ccd / balanced_tree_ccd(pg.node_count)


def efferent_coupling(pg: PackageGraph, aggregation: str = MEAN) -> float:
    """Ce aggregated over packages: distinct packages each one depends on."""
    succ = pg.successors()
    return _aggregate([len(succ[n]) for n in pg.nodes], aggregation)


def afferent_coupling(pg: PackageGraph, aggregation: str = MEAN) -> float:
    """Ca aggregated over packages: distinct packages depending on each one."""
    pred = pg.predecessors()
    return _aggregate([len(pred[n]) for n in pg.nodes], aggregation)


def distance(graph: DependencyGraph, pg: PackageGraph, sol: ArchitectureSolution,
             aggregation: str = MEAN) -> float:
    """Mean distance from the main sequence, |A + I - 1|.

    Packages with Ce + Ca = 0 have undefined instability and are excluded;
    with no qualifying package the distance is 0.
    """
    members = _package_members(graph, sol)
    succ, pred = pg.successors(), pg.predecessors()
    per_package = []
    for pkg in pg.nodes:
        ce, ca = len(succ[pkg]), len(pred[pkg])
        if ce + ca == 0:
            continue
        units = members[pkg]
        abstract = sum(1 for u in units if graph.nodes[u].is_abstract)
        a = abstract / len(units)
        i = ce / (ce + ca)
        per_package.append(abs(a + i - 1.0))
    return _aggregate(per_package, aggregation)


def forbidden_dependencies(graph: DependencyGraph, sol: ArchitectureSolution,
                           model: ConceptualModel) -> int:
    """Count type edges whose layer crossing the model's style forbids."""
    count = 0
    for a, b in graph.edges:
        la = sol.package_to_layer[sol.unit_to_package[a]]
        lb = sol.package_to_layer[sol.unit_to_package[b]]
        if not model.allowed(la, lb):
            count += 1
    return count


def strongly_connected_components(pg: PackageGraph) -> list[set[int]]:
    """Iterative Tarjan SCC over the package graph."""
    succ = pg.successors()
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    sccs: list[set[int]] = []
    counter = 0

    for root in pg.nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(succ[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(sorted(succ[nxt]))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                scc = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    scc.add(member)
                    if member == node:
                        break
                sccs.append(scc)
    return sccs


def package_cycles(pg: PackageGraph) -> int:
    """Number of package edges inside strongly connected components of size >= 2.

    Zero exactly when the package graph is acyclic; grows with how entangled
    the cycles are.
    """
    sccs = strongly_connected_components(pg)
    component_of: dict[int, int] = {}
    for i, scc in enumerate(sccs):
        for node in scc:
            component_of[node] = i
    sizes = [len(s) for s in sccs]
    count = 0
    for a, b in pg.edges:
        if component_of[a] == component_of[b] and sizes[component_of[a]] >= 2:
            count += 1
    return count


def topological_order(pg: PackageGraph) -> list[int] | None:
    """Kahn topological sort; None when the graph has a cycle."""
    succ = pg.successors()
    indeg = {n: 0 for n in pg.nodes}
    for _, b in pg.edges:
        indeg[b] += 1
    ready = sorted(n for n in pg.nodes if indeg[n] == 0)
    order: list[int] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        for nxt in sorted(succ[node]):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
    return order if len(order) == pg.node_count else None


def size_range(sol: ArchitectureSolution, package_slots: int) -> int:
    """max - min of unit counts over ALL slots, empty slots included.

    Counting empty slots is deliberate: collapsing everything into one
    mega-package must score badly, not perfectly.
    """
    if package_slots < 1:
        raise ContractViolation("size_range needs at least one package slot")
    counts = np.bincount(np.asarray(sol.unit_to_package, dtype=np.int64),
                         minlength=package_slots)
    return int(counts.max() - counts.min())


def evaluate(graph: DependencyGraph, sol: ArchitectureSolution, model: ConceptualModel,
             aggregation: str = MEAN) -> ObjectiveVector:
    """Compose the eight objectives into the canonical all-minimized vector."""
    pg = package_graph(graph, sol)
    return ObjectiveVector(values=(
        -relational_cohesion(graph, sol, aggregation),
        abs(nccd(pg) - 1.0),
        efferent_coupling(pg, aggregation),
        afferent_coupling(pg, aggregation),
        distance(graph, pg, sol, aggregation),
        float(forbidden_dependencies(graph, sol, model)),
        float(package_cycles(pg)),
        float(size_range(sol, model.package_slots if model.package_slots else sol.package_slots)),
    ))


class BatchEvaluator:
    """Vectorized objective evaluation for whole populations.

    Precomputes edge arrays once; evaluate_batch then turns a (B, U) unit
    assignment matrix and a (B, P) layer assignment matrix into a (B, 8)
    objective matrix without Python-level loops over individuals or edges.
    """

    def __init__(self, graph: DependencyGraph, model: ConceptualModel,
                 aggregation: str = MEAN):
        if aggregation not in AGGREGATIONS:
            raise ContractViolation(f"unknown aggregation {aggregation!r}")
        if model.package_slots < 1:
            raise ContractViolation("model has unresolved package_slots")
        self.graph = graph
        self.model = model
        self.aggregation = aggregation
        self.unit_count = graph.unit_count
        self.package_slots = model.package_slots
        self.layer_count = model.layer_count
        self.edge_src, self.edge_dst = graph.edge_arrays
        self.abstract = graph.abstract_mask.astype(np.float64)

    def _agg(self, totals: np.ndarray, counts: np.ndarray) -> np.ndarray:
        if self.aggregation == SUM:
            return totals
        return np.where(counts > 0, totals / np.maximum(counts, 1), 0.0)

    def evaluate_batch(self, u2p: np.ndarray, p2l: np.ndarray) -> np.ndarray:
        B, U = u2p.shape
        P, L = self.package_slots, self.layer_count
        if U != self.unit_count or p2l.shape != (B, P):
            raise ContractViolation("assignment matrices do not match the bound problem")

        rows = np.arange(B)[:, None]
        flat_pkg = (rows * P + u2p).ravel()
        sizes = np.bincount(flat_pkg, minlength=B * P).reshape(B, P).astype(np.float64)
        nonempty = sizes > 0
        n_pkgs = nonempty.sum(axis=1)

        abstract_counts = np.bincount(flat_pkg, weights=np.broadcast_to(self.abstract, (B, U)).ravel(),
                                      minlength=B * P).reshape(B, P)

        E = len(self.edge_src)
        if E:
            ps = u2p[:, self.edge_src]
            pd = u2p[:, self.edge_dst]
            internal = ps == pd
            flat_int = (rows * P + ps).ravel()
            internal_counts = np.bincount(flat_int[internal.ravel()],
                                          minlength=B * P).reshape(B, P).astype(np.float64)
            cross = ~internal
            flat_adj = (rows * P * P + ps * P + pd).ravel()[cross.ravel()]
            adj = np.zeros((B, P, P), dtype=bool)
            adj.ravel()[flat_adj] = True

            lu = np.take_along_axis(p2l, ps, axis=1)
            lv = np.take_along_axis(p2l, pd, axis=1)
            if self.model.style == "transient":
                violating = lv < lu
            else:
                violating = (lv != lu) & (lv != lu + 1)
            violations = violating.sum(axis=1).astype(np.float64)
        else:
            internal_counts = np.zeros((B, P))
            adj = np.zeros((B, P, P), dtype=bool)
            violations = np.zeros(B)

        # Relational cohesion H_p = (R_p + 1) / N_p over non-empty packages.
        h = np.where(nonempty, (internal_counts + 1.0) / np.maximum(sizes, 1.0), 0.0)
        cohesion = self._agg(h.sum(axis=1), n_pkgs)

        ce = adj.sum(axis=2).astype(np.float64)
        ca = adj.sum(axis=1).astype(np.float64)
        efferent = self._agg(ce.sum(axis=1), n_pkgs)
        afferent = self._agg(ca.sum(axis=1), n_pkgs)

        coupled = (ce + ca) > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            instability = np.where(coupled, ce / np.maximum(ce + ca, 1.0), 0.0)
            abstractness = np.where(nonempty, abstract_counts / np.maximum(sizes, 1.0), 0.0)
        d = np.where(coupled, np.abs(abstractness + instability - 1.0), 0.0)
        dist = self._agg(d.sum(axis=1), coupled.sum(axis=1))

        # Reachability closure by repeated boolean squaring; P is small.
        reach = adj | np.eye(P, dtype=bool)
        while True:
            nxt = reach | np.matmul(reach, reach)
            if np.array_equal(nxt, reach):
                break
            reach = nxt
        # Empty packages only self-reach and are not package-graph nodes.
        ccd = reach.sum(axis=(1, 2)).astype(np.float64) - (P - n_pkgs)
        nb = n_pkgs.astype(np.float64)
        ccd_bal = (nb + 1.0) * np.log2(nb + 1.0) - nb
        nccd_dev = np.abs(ccd / ccd_bal - 1.0)

        cyclic = (adj & reach.transpose(0, 2, 1)).sum(axis=(1, 2)).astype(np.float64)

        size_rng = (sizes.max(axis=1) - sizes.min(axis=1))

        return np.column_stack([
            -cohesion, nccd_dev, efferent, afferent, dist,
            violations, cyclic, size_rng,
        ])
