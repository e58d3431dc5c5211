import numpy as np
import pytest

from archsearch.model import (
    ArchitectureSolution,
    ConceptualModel,
    DependencyGraph,
    TypeNode,
)


def make_graph(n, edges, packages=None, abstract=(), names=None):
    """Small literal graph builder for tests.

    packages: per-unit origin package name (default one shared package).
    abstract: iterable of unit ids flagged abstract.
    """
    packages = packages or ["app"] * n
    names = names or [f"app.T{i}" for i in range(n)]
    nodes = tuple(
        TypeNode(id=i, fq_name=names[i], origin_package=packages[i],
                 is_abstract=i in set(abstract))
        for i in range(n)
    )
    return DependencyGraph(nodes=nodes, edges=frozenset((a, b) for a, b in edges))


def make_model(style="transient", layers=3, slots=4):
    return ConceptualModel(style=style,
                           layer_names=tuple(f"L{i}" for i in range(layers)),
                           package_slots=slots)


def solution(u2p, p2l):
    return ArchitectureSolution.from_arrays(u2p, p2l)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
