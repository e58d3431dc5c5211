"""Dependency graph, conceptual layer model, pins, and solution representation.

The dependency graph is the immutable input of every search: type-level nodes
with abstractness flags and directed, deduplicated dependency edges.  The
conceptual model is the target blueprint: ordered layers with a transient or
strict access rule.  Pins fix parts of an assignment before the search runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fnmatch import fnmatchcase
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    GraphParseError,
    PinBindingError,
    PinConflictError,
    ReferentialError,
)

TRANSIENT = "transient"
STRICT = "strict"
STYLES = (TRANSIENT, STRICT)


@dataclass(frozen=True)
class TypeNode:
    """A compilation-unit-level artifact: the finest assignable element."""

    id: int
    fq_name: str
    origin_package: str
    is_abstract: bool = False


@dataclass(frozen=True)
class DependencyGraph:
    """Type-level nodes plus directed dependency edges.

    Invariants enforced at construction: node ids are dense over [0, U),
    every edge endpoint resolves, there are no self-edges, and each ordered
    pair appears at most once.
    """

    nodes: tuple[TypeNode, ...]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if not self.nodes:
            raise GraphParseError("graph must contain at least one type")
        ids = sorted(n.id for n in self.nodes)
        if ids != list(range(len(self.nodes))):
            raise GraphParseError("node ids must form the contiguous range [0, U)")
        for node in self.nodes:
            if not node.fq_name:
                raise GraphParseError(f"node {node.id} has an empty name")
            if not node.origin_package:
                raise GraphParseError(f"node {node.id} has an empty package")
        for a, b in self.edges:
            if a == b:
                raise GraphParseError(f"self-edge on id {a} survived ingestion")
            for end in (a, b):
                if not 0 <= end < len(self.nodes):
                    raise ReferentialError(f"edge endpoint references unknown id {end}")

    @property
    def unit_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints as parallel int arrays (cached, deterministic order)."""
        cached = self.__dict__.get("_edge_arrays")
        if cached is None:
            pairs = sorted(self.edges)
            src = np.fromiter((a for a, _ in pairs), dtype=np.int64, count=len(pairs))
            dst = np.fromiter((b for _, b in pairs), dtype=np.int64, count=len(pairs))
            cached = (src, dst)
            self.__dict__["_edge_arrays"] = cached
        return cached

    @property
    def abstract_mask(self) -> np.ndarray:
        cached = self.__dict__.get("_abstract_mask")
        if cached is None:
            cached = np.array([n.is_abstract for n in self.nodes], dtype=bool)
            self.__dict__["_abstract_mask"] = cached
        return cached

    @property
    def origin_packages(self) -> tuple[str, ...]:
        """Distinct origin package names, sorted; index = canonical slot."""
        cached = self.__dict__.get("_origin_packages")
        if cached is None:
            cached = tuple(sorted({n.origin_package for n in self.nodes}))
            self.__dict__["_origin_packages"] = cached
        return cached

    @property
    def origin_slot_of_unit(self) -> np.ndarray:
        """Slot index of each unit's origin package (the as-built mapping)."""
        cached = self.__dict__.get("_origin_slots")
        if cached is None:
            rank = {name: i for i, name in enumerate(self.origin_packages)}
            cached = np.array([rank[n.origin_package] for n in self.nodes], dtype=np.int64)
            self.__dict__["_origin_slots"] = cached
        return cached


@dataclass(frozen=True)
class ConceptualModel:
    """Ordered layers (index 0 on top, increasing downward) plus access style.

    allowed(i, j) is true iff i == j, or the style is transient and j > i,
    or the style is strict and j == i + 1.  Same-layer dependencies are
    always permitted; only cross-layer access is constrained.

    package_slots == 0 means "not resolved yet"; resolve_package_slots()
    defaults it to the number of distinct origin packages of a graph.
    """

    style: str
    layer_names: tuple[str, ...]
    package_slots: int = 0

    def __post_init__(self):
        if self.style not in STYLES:
            raise GraphParseError(f"unknown architecture style {self.style!r}")
        if len(self.layer_names) < 2:
            raise GraphParseError("a conceptual model needs at least two layers")
        if len(set(self.layer_names)) != len(self.layer_names):
            raise GraphParseError("layer names must be unique")
        if self.package_slots < 0:
            raise GraphParseError("package_slots must not be negative")

    @property
    def layer_count(self) -> int:
        return len(self.layer_names)

    def allowed(self, from_layer: int, to_layer: int) -> bool:
        if from_layer == to_layer:
            return True
        if self.style == TRANSIENT:
            return to_layer > from_layer
        return to_layer == from_layer + 1


@dataclass(frozen=True)
class Pin:
    """A predefined assignment: a glob pattern plus a package and/or layer target."""

    pattern: str
    target_package: int | None = None
    target_layer: int | None = None

    def __post_init__(self):
        if self.target_package is None and self.target_layer is None:
            raise GraphParseError(f"pin {self.pattern!r} has no target")


@dataclass(frozen=True)
class PinTable:
    """Pins resolved against a concrete graph and model.

    unit_package forces a unit into a package slot; package_layer forces a
    slot into a layer; unit_layer forces whatever package a unit decodes
    into onto a layer (consistency across these is checked at bind time, so
    decoding never has to fail).
    """

    unit_package: Mapping[int, int] = field(default_factory=dict)
    package_layer: Mapping[int, int] = field(default_factory=dict)
    unit_layer: Mapping[int, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.unit_package) + len(self.package_layer) + len(self.unit_layer)

    def unit_package_array(self, unit_count: int) -> np.ndarray:
        """Per-unit forced package, -1 where free."""
        arr = np.full(unit_count, -1, dtype=np.int64)
        for unit, pkg in self.unit_package.items():
            arr[unit] = pkg
        return arr

    def package_layer_array(self, package_slots: int) -> np.ndarray:
        """Per-slot forced layer, -1 where free."""
        arr = np.full(package_slots, -1, dtype=np.int64)
        for pkg, layer in self.package_layer.items():
            arr[pkg] = layer
        return arr


EMPTY_PINS = PinTable()


@dataclass(frozen=True)
class ArchitectureSolution:
    """A fully decoded assignment: every unit to a package, every slot to a layer."""

    unit_to_package: tuple[int, ...]
    package_to_layer: tuple[int, ...]

    @classmethod
    def from_arrays(cls, u2p: Sequence[int], p2l: Sequence[int]) -> "ArchitectureSolution":
        return cls(tuple(int(x) for x in u2p), tuple(int(x) for x in p2l))

    @property
    def package_slots(self) -> int:
        return len(self.package_to_layer)

    def layer_of_unit(self, unit: int) -> int:
        return self.package_to_layer[self.unit_to_package[unit]]


@dataclass(frozen=True)
class PackageGraph:
    """Directed graph over the non-empty packages of a solution."""

    nodes: tuple[int, ...]
    edges: frozenset[tuple[int, int]]

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def successors(self) -> dict[int, set[int]]:
        out: dict[int, set[int]] = {n: set() for n in self.nodes}
        for a, b in self.edges:
            out[a].add(b)
        return out

    def predecessors(self) -> dict[int, set[int]]:
        inc: dict[int, set[int]] = {n: set() for n in self.nodes}
        for a, b in self.edges:
            inc[b].add(a)
        return inc


def _require(condition: bool, message: str, location: str | None = None):
    if not condition:
        raise GraphParseError(message, location)


def parse_graph(document: str) -> DependencyGraph:
    """Parse and validate a graph file (JSON text).

    Self-edges are silently dropped and duplicate edges collapsed; a dangling
    edge endpoint is a referential error naming the offending id.
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from exc

    _require(isinstance(data, dict), "graph document must be a JSON object")
    raw_types = data.get("types")
    _require(isinstance(raw_types, list), "graph document needs a 'types' list")
    if not raw_types:
        raise GraphParseError("graph must contain at least one type")

    nodes = []
    seen_ids: set[int] = set()
    for i, entry in enumerate(raw_types):
        loc = f"types[{i}]"
        _require(isinstance(entry, dict), "type entry must be an object", loc)
        _require(isinstance(entry.get("id"), int) and not isinstance(entry.get("id"), bool),
                 "type id must be an integer", loc)
        node_id = entry["id"]
        _require(node_id >= 0, "type id must be non-negative", loc)
        _require(node_id not in seen_ids, f"duplicate type id {node_id}", loc)
        seen_ids.add(node_id)
        name = entry.get("name")
        _require(isinstance(name, str) and name != "", "type name must be a non-empty string", loc)
        package = entry.get("package")
        _require(isinstance(package, str) and package != "", "type package must be a non-empty string", loc)
        abstract = entry.get("abstract", False)
        _require(isinstance(abstract, bool), "type abstract flag must be a boolean", loc)
        nodes.append(TypeNode(id=node_id, fq_name=name, origin_package=package, is_abstract=abstract))

    if sorted(seen_ids) != list(range(len(nodes))):
        raise GraphParseError("type ids must form the contiguous range [0, U)")
    nodes.sort(key=lambda n: n.id)

    raw_edges = data.get("dependencies", [])
    _require(isinstance(raw_edges, list), "'dependencies' must be a list")
    edges: set[tuple[int, int]] = set()
    for i, entry in enumerate(raw_edges):
        loc = f"dependencies[{i}]"
        _require(isinstance(entry, dict), "dependency entry must be an object", loc)
        for key in ("from", "to"):
            _require(isinstance(entry.get(key), int) and not isinstance(entry.get(key), bool),
                     f"dependency '{key}' must be an integer", loc)
        a, b = entry["from"], entry["to"]
        for end in (a, b):
            if end not in seen_ids:
                raise ReferentialError(f"dependency references unknown id {end} (at {loc})")
        if a == b:
            continue
        edges.add((a, b))

    return DependencyGraph(nodes=tuple(nodes), edges=frozenset(edges))


def parse_model(document: str, default_package_slots: int | None = None) -> tuple[ConceptualModel, list[Pin]]:
    """Parse a model file (JSON text) into a conceptual model plus unbound pins.

    package_slots may be omitted in the file; the caller then has to supply
    the default (normally the number of distinct origin packages of the graph
    the model is applied to).
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise GraphParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from exc

    _require(isinstance(data, dict), "model document must be a JSON object")
    style = data.get("style")
    if style not in STYLES:
        raise GraphParseError(f"unknown architecture style {style!r}")
    layers = data.get("layers")
    _require(isinstance(layers, list) and all(isinstance(x, str) for x in (layers or [])),
             "model needs a 'layers' list of names")
    if len(layers) < 2:
        raise GraphParseError("a conceptual model needs at least two layers")

    slots = data.get("package_slots", default_package_slots)
    if slots is None:
        slots = 0  # deferred; resolve_package_slots() fills this in from a graph
    _require(isinstance(slots, int) and not isinstance(slots, bool) and slots >= 0,
             "package_slots must be a non-negative integer")

    pins: list[Pin] = []
    raw_pins = data.get("pins", [])
    _require(isinstance(raw_pins, list), "'pins' must be a list")
    for i, entry in enumerate(raw_pins):
        loc = f"pins[{i}]"
        pin = pin_from_document(entry, location=loc)
        if pin.target_layer is not None and not 0 <= pin.target_layer < len(layers):
            raise GraphParseError(f"pin layer {pin.target_layer} outside [0, {len(layers)})", loc)
        pins.append(pin)

    model = ConceptualModel(style=style, layer_names=tuple(layers), package_slots=int(slots))
    return model, pins


def pin_from_document(entry, location: str = "pin") -> Pin:
    """Parse one pin object: a pattern plus a package and/or layer target."""
    _require(isinstance(entry, dict), "pin entry must be an object", location)
    pattern = entry.get("pattern")
    _require(isinstance(pattern, str) and pattern != "",
             "pin pattern must be a non-empty string", location)
    package = entry.get("package")
    layer = entry.get("layer")
    if package is None and layer is None:
        raise GraphParseError(f"pin {pattern!r} has no target", location)
    for label, value in (("package", package), ("layer", layer)):
        if value is not None:
            _require(isinstance(value, int) and not isinstance(value, bool),
                     f"pin {label} must be an integer", location)
    return Pin(pattern=pattern, target_package=package, target_layer=layer)


def resolve_package_slots(model: ConceptualModel, graph: DependencyGraph) -> ConceptualModel:
    """Return the model with package_slots defaulted to the graph's distinct origins."""
    if model.package_slots > 0:
        return model
    return ConceptualModel(model.style, model.layer_names, len(graph.origin_packages))


def parse_model_for_graph(document: str, graph: DependencyGraph) -> tuple[ConceptualModel, list[Pin]]:
    """parse_model with package_slots defaulted from the graph."""
    return parse_model(document, default_package_slots=len(graph.origin_packages))


def _match_pin(pin: Pin, graph: DependencyGraph) -> tuple[list[int], list[int]]:
    """Unit ids whose fq_name matches, and slots whose origin package matches."""
    units = [n.id for n in graph.nodes if fnmatchcase(n.fq_name, pin.pattern)]
    slots = [i for i, name in enumerate(graph.origin_packages) if fnmatchcase(name, pin.pattern)]
    return units, slots


def bind_pins(pins: Sequence[Pin], graph: DependencyGraph, model: ConceptualModel) -> PinTable:
    """Resolve pin patterns to concrete unit ids and package slots.

    Conflicting pins (same unit or slot, different targets) are rejected; so
    are layer-only unit pins that could collide with a package layer pin at
    decode time, since decoding itself is not allowed to fail.
    """
    if model.package_slots < 1:
        raise PinBindingError("model has unresolved package_slots; call resolve_package_slots first")

    unit_package: dict[int, int] = {}
    package_layer: dict[int, int] = {}
    unit_layer: dict[int, int] = {}
    unit_src: dict[int, Pin] = {}
    pkg_src: dict[int, Pin] = {}
    unit_layer_src: dict[int, Pin] = {}

    def set_unit_package(unit: int, pkg: int, pin: Pin):
        if unit in unit_package and unit_package[unit] != pkg:
            raise PinConflictError(
                f"unit {unit} ({graph.nodes[unit].fq_name}) pinned to packages "
                f"{unit_package[unit]} and {pkg}",
                first=unit_src[unit], second=pin)
        unit_package[unit] = pkg
        unit_src[unit] = pin

    def set_package_layer(slot: int, layer: int, pin: Pin):
        if slot in package_layer and package_layer[slot] != layer:
            raise PinConflictError(
                f"package slot {slot} pinned to layers {package_layer[slot]} and {layer}",
                first=pkg_src[slot], second=pin)
        package_layer[slot] = layer
        pkg_src[slot] = pin

    for pin in pins:
        if pin.target_package is not None and not 0 <= pin.target_package < model.package_slots:
            raise PinBindingError(
                f"pin {pin.pattern!r} targets package {pin.target_package} outside "
                f"[0, {model.package_slots})")
        if pin.target_layer is not None and not 0 <= pin.target_layer < model.layer_count:
            raise PinBindingError(
                f"pin {pin.pattern!r} targets layer {pin.target_layer} outside "
                f"[0, {model.layer_count})")

        units, slots = _match_pin(pin, graph)
        if not units and not slots:
            raise PinBindingError(f"pin pattern {pin.pattern!r} matches nothing in the graph")

        if slots and any(s >= model.package_slots for s in slots):
            bad = [s for s in slots if s >= model.package_slots]
            raise PinBindingError(
                f"pin {pin.pattern!r} matches origin packages with slot indices {bad} "
                f"beyond the configured {model.package_slots} slots")

        # Package-pattern matches: layer targets pin the slot; package targets
        # relocate every unit of the matched origin package.
        if slots:
            if pin.target_layer is not None and pin.target_package is None:
                for slot in slots:
                    set_package_layer(slot, pin.target_layer, pin)
            if pin.target_package is not None:
                origin = graph.origin_slot_of_unit
                for slot in slots:
                    for unit in np.flatnonzero(origin == slot):
                        set_unit_package(int(unit), pin.target_package, pin)
                if pin.target_layer is not None:
                    set_package_layer(pin.target_package, pin.target_layer, pin)

        # Unit-pattern matches.
        if units:
            if pin.target_package is not None:
                for unit in units:
                    set_unit_package(unit, pin.target_package, pin)
                if pin.target_layer is not None:
                    set_package_layer(pin.target_package, pin.target_layer, pin)
            else:
                for unit in units:
                    if unit in unit_layer and unit_layer[unit] != pin.target_layer:
                        raise PinConflictError(
                            f"unit {unit} pinned to layers {unit_layer[unit]} and {pin.target_layer}",
                            first=unit_layer_src[unit], second=pin)
                    unit_layer[unit] = pin.target_layer
                    unit_layer_src[unit] = pin

    # Layer-only unit pins override the layer of whatever package the unit
    # decodes into; that is only safe when no contradictory demand can arise.
    distinct_layers = set(unit_layer.values())
    if len(distinct_layers) > 1:
        raise PinConflictError(
            "layer-only unit pins with different layers could collide in one package: "
            f"layers {sorted(distinct_layers)}")
    if distinct_layers:
        (the_layer,) = distinct_layers
        for slot, layer in package_layer.items():
            if layer != the_layer:
                raise PinConflictError(
                    f"layer-only unit pin to layer {the_layer} could land in package "
                    f"slot {slot} which is pinned to layer {layer}")

    # Units that are both package-pinned and layer-pinned collapse to a
    # static slot+layer pin.
    for unit, layer in list(unit_layer.items()):
        if unit in unit_package:
            set_package_layer(unit_package[unit], layer, unit_layer_src[unit])
            del unit_layer[unit]

    return PinTable(unit_package=unit_package, package_layer=package_layer, unit_layer=unit_layer)


def graph_document(graph: DependencyGraph) -> dict:
    """The JSON-ready document form of a graph (inverse of parse_graph)."""
    return {
        "types": [
            {"id": n.id, "name": n.fq_name, "package": n.origin_package,
             "abstract": n.is_abstract}
            for n in graph.nodes
        ],
        "dependencies": [{"from": a, "to": b} for a, b in sorted(graph.edges)],
    }


def pin_document(pin: Pin) -> dict:
    doc: dict = {"pattern": pin.pattern}
    if pin.target_package is not None:
        doc["package"] = pin.target_package
    if pin.target_layer is not None:
        doc["layer"] = pin.target_layer
    return doc


def model_document(model: ConceptualModel, pins: Sequence[Pin] = ()) -> dict:
    """The JSON-ready document form of a model (inverse of parse_model)."""
    doc: dict = {
        "style": model.style,
        "layers": list(model.layer_names),
    }
    if model.package_slots:
        doc["package_slots"] = model.package_slots
    if pins:
        doc["pins"] = [pin_document(p) for p in pins]
    return doc


def package_graph(graph: DependencyGraph, sol: ArchitectureSolution) -> PackageGraph:
    """Lift the type-level graph onto the non-empty packages of a solution.

    An edge p -> q exists iff some type edge crosses from a unit in p to a
    unit in q with p != q; parallel type edges collapse.
    """
    u2p = np.asarray(sol.unit_to_package, dtype=np.int64)
    if len(u2p) != graph.unit_count:
        raise ReferentialError(
            f"solution covers {len(u2p)} units, graph has {graph.unit_count}")
    occupied = tuple(int(p) for p in np.unique(u2p))
    src, dst = graph.edge_arrays
    if len(src):
        ps, pd = u2p[src], u2p[dst]
        cross = ps != pd
        edges = frozenset(zip(ps[cross].tolist(), pd[cross].tolist()))
    else:
        edges = frozenset()
    return PackageGraph(nodes=occupied, edges=edges)
