"""HTTP service for exploring stored runs: fronts, filters, details, pins.

All read endpoints are pure functions of the store contents.  Run execution
goes through a single-worker scheduler so at most one search occupies the
process at a time; run directories have exactly one writer.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from .errors import (
    ArchSearchError,
    ConfigError,
    ContractViolation,
    GraphParseError,
    NotFoundError,
    PinBindingError,
    PinConflictError,
    ReferentialError,
    StoreError,
)
from .experiments import problem_from_document
from .indicators import Front, Normalizer, build_reference_front, indicator_row
from .model import (
    ArchitectureSolution,
    ConceptualModel,
    DependencyGraph,
    package_graph,
    pin_document,
    pin_from_document,
)
from .objectives import OBJECTIVE_NAMES, strongly_connected_components
from .search import RunConfig
from .store import DONE, RunStore

PORT_ENV_VAR = "ARCHSEARCH_PORT"
DEFAULT_PORT = 8143

_BAD_REQUEST = (ConfigError, ContractViolation, GraphParseError,
                PinBindingError, ReferentialError)


def solution_ref(run_id: str, index: int) -> str:
    return f"{run_id}:{index}"


def _split_ref(ref: str) -> tuple[str, int]:
    run_id, sep, index = ref.partition(":")
    if not sep or not index.isdigit():
        raise NotFoundError(f"malformed solution ref {ref!r}; expected <run>:<index>")
    return run_id, int(index)


def solution_detail_document(graph: DependencyGraph, model: ConceptualModel,
                             u2p, p2l) -> dict:
    """Per-package breakdown plus explicit violation and cycle edge lists.

    The violation list is enumerated edge by edge, independently of the
    vectorized objective evaluation that produced the stored front, so the
    two can be cross-checked against each other.
    """
    u2p = np.asarray(u2p, dtype=np.int64)
    p2l = np.asarray(p2l, dtype=np.int64)
    sol = ArchitectureSolution.from_arrays(u2p, p2l)
    abstract = graph.abstract_mask

    packages = []
    pg = package_graph(graph, sol)
    succ, pred = pg.successors(), pg.predecessors()
    for slot in range(model.package_slots):
        members = np.flatnonzero(u2p == slot)
        if len(members) == 0:
            continue
        member_set = set(int(m) for m in members)
        internal = sum(1 for a, b in graph.edges
                       if a in member_set and b in member_set)
        ce = len(succ.get(slot, ()))
        ca = len(pred.get(slot, ()))
        if ce + ca:
            instability = ce / (ce + ca)
            abstractness = float(abstract[members].mean())
            dist = abs(abstractness + instability - 1.0)
        else:
            dist = None
        packages.append({
            "package": slot,
            "layer": int(p2l[slot]),
            "size": int(len(members)),
            "cohesion": (internal + 1) / len(members),
            "efferent": ce,
            "afferent": ca,
            "distance": dist,
            "units": [graph.nodes[int(m)].fq_name for m in members],
        })

    violations = []
    for a, b in sorted(graph.edges):
        la, lb = int(p2l[u2p[a]]), int(p2l[u2p[b]])
        if not model.allowed(la, lb):
            violations.append({
                "from": graph.nodes[a].fq_name,
                "to": graph.nodes[b].fq_name,
                "from_layer": la,
                "to_layer": lb,
            })

    cyclic = []
    for component in strongly_connected_components(pg):
        if len(component) < 2:
            continue
        for p in sorted(component):
            for q in sorted(succ.get(p, ())):
                if q in component:
                    cyclic.append({"from_package": int(p), "to_package": int(q)})

    return {
        "packages": packages,
        "unit_to_package": [int(x) for x in u2p],
        "package_to_layer": [int(x) for x in p2l],
        "violations": violations,
        "cyclic_package_edges": cyclic,
    }


def _parse_bounds(body: dict) -> list[tuple[int, float | None, float | None]]:
    bounds = body.get("bounds", {})
    if not isinstance(bounds, dict):
        raise ConfigError("'bounds' must map objective names to bound objects")
    parsed = []
    for name, entry in bounds.items():
        if name not in OBJECTIVE_NAMES:
            raise ConfigError(f"unknown objective {name!r}; "
                              f"choose from {', '.join(OBJECTIVE_NAMES)}")
        if not isinstance(entry, dict) or not set(entry) <= {"lower", "upper"}:
            raise ConfigError(f"bounds for {name!r} must be an object "
                              "with optional 'lower' and 'upper'")
        lower, upper = entry.get("lower"), entry.get("upper")
        for side, value in (("lower", lower), ("upper", upper)):
            if value is not None and not isinstance(value, (int, float)):
                raise ConfigError(f"{side} bound for {name!r} must be a number")
        if lower is not None and upper is not None and lower > upper:
            raise ConfigError(f"bounds for {name!r} have lower > upper")
        parsed.append((OBJECTIVE_NAMES.index(name), lower, upper))
    return parsed


def filter_front(objectives: np.ndarray,
                 bounds: list[tuple[int, float | None, float | None]]) -> np.ndarray:
    keep = np.ones(len(objectives), dtype=bool)
    for index, lower, upper in bounds:
        column = objectives[:, index]
        if lower is not None:
            keep &= column >= lower
        if upper is not None:
            keep &= column <= upper
    return np.flatnonzero(keep)


def create_app(store: RunStore) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        app.state.scheduler.shutdown(wait=True)

    app = FastAPI(title="archsearch", lifespan=lifespan)
    app.state.store = store
    app.state.scheduler = ThreadPoolExecutor(max_workers=1)

    def schedule(problem_doc: dict, config: RunConfig):
        problem = problem_from_document(problem_doc)
        record = store.enqueue(problem_doc, config)
        if record.status != DONE:
            app.state.scheduler.submit(_run_quietly, problem, problem_doc, config)
        return record

    def _run_quietly(problem, problem_doc, config):
        try:
            store.execute(problem, problem_doc, config)
        except Exception:
            pass  # the run directory carries error.txt; clients poll status

    @app.exception_handler(ArchSearchError)
    async def archsearch_errors(request: Request, exc: ArchSearchError):
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, PinConflictError):
            payload = {"detail": str(exc)}
            if exc.first is not None:
                payload["first"] = pin_document(exc.first)
            if exc.second is not None:
                payload["second"] = pin_document(exc.second)
            return JSONResponse(status_code=409, content=payload)
        elif isinstance(exc, _BAD_REQUEST):
            status = 400
        elif isinstance(exc, StoreError):
            status = 500
        else:
            status = 500
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "runs": len(store.list_runs())}

    @app.post("/runs", status_code=201)
    async def create_run(request: Request):
        body = await request.json()
        if not isinstance(body, dict) or "problem" not in body or "config" not in body:
            raise ConfigError("body must carry 'problem' and 'config' documents")
        config = RunConfig.from_document(body["config"])
        record = schedule(body["problem"], config)
        return record.to_document()

    @app.get("/runs")
    def list_runs():
        return {"runs": [r.to_document() for r in store.list_runs()]}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        return store.record(run_id).to_document()

    @app.get("/runs/{run_id}/snapshots")
    def get_snapshots(run_id: str,
                      from_evals: int = Query(0, alias="from")):
        snaps = list(store.load_snapshots(run_id, from_evals=from_evals))
        return {"run": run_id, "snapshots": snaps,
                "status": store.status(run_id)}

    @app.get("/runs/{run_id}/front")
    def get_front(run_id: str):
        front = store.load_front(run_id)
        refs = [solution_ref(run_id, i) for i in range(len(front["objectives"]))]
        return {"run": run_id, "objective_names": list(OBJECTIVE_NAMES),
                "objectives": front["objectives"], "refs": refs}

    @app.post("/runs/{run_id}/filter")
    async def filter_solutions(run_id: str, request: Request):
        body = await request.json()
        bounds = _parse_bounds(body if isinstance(body, dict) else {})
        front = store.load_front(run_id)
        objectives = np.asarray(front["objectives"], dtype=float)
        kept = filter_front(objectives, bounds) if len(objectives) else []
        return {
            "run": run_id,
            "total": int(len(objectives)),
            "solutions": [
                {"ref": solution_ref(run_id, int(i)),
                 "objectives": front["objectives"][int(i)]}
                for i in kept
            ],
        }

    @app.get("/solutions/{ref}")
    def get_solution(ref: str):
        run_id, index = _split_ref(ref)
        front = store.load_front(run_id)
        if not 0 <= index < len(front["objectives"]):
            raise NotFoundError(f"run {run_id} has no solution {index}")
        problem = problem_from_document(store.load_problem_document(run_id))
        detail = solution_detail_document(
            problem.graph, problem.model,
            front["unit_to_package"][index], front["package_to_layer"][index])
        detail["ref"] = ref
        detail["run"] = run_id
        detail["objective_names"] = list(OBJECTIVE_NAMES)
        detail["objectives"] = front["objectives"][index]
        return detail

    @app.post("/runs/{run_id}/constrain", status_code=201)
    async def constrain(run_id: str, request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            raise ConfigError("body must be an object")
        raw_pins = body.get("pins", [])
        overrides = body.get("overrides", {})
        if not isinstance(raw_pins, list) or not isinstance(overrides, dict):
            raise ConfigError("'pins' must be a list and 'overrides' an object")
        if not raw_pins and not overrides:
            raise ConfigError("nothing to constrain: no pins, no overrides")

        base_doc = store.load_problem_document(run_id)
        base_record = store.record(run_id)
        extra = [pin_from_document(p, location=f"pins[{i}]")
                 for i, p in enumerate(raw_pins)]

        problem_doc = dict(base_doc)
        model_doc = dict(problem_doc.get("model", {}))
        merged = list(model_doc.get("pins", [])) + [pin_document(p) for p in extra]
        if merged:
            model_doc["pins"] = merged
        problem_doc["model"] = model_doc
        problem_doc["constrained_from"] = run_id

        config_doc = dict(base_record.config)
        config_doc.update(overrides)
        config = RunConfig.from_document(config_doc)
        record = schedule(problem_doc, config)
        return record.to_document()

    @app.get("/reference-front")
    def reference_front(runs: str):
        run_ids = _parse_run_list(runs)
        fronts = [Front(np.asarray(store.load_front(r)["objectives"], dtype=float))
                  for r in run_ids]
        ref = build_reference_front(fronts, labels=run_ids)
        return {
            "points": np.asarray(ref.points).tolist(),
            "provenance": list(ref.provenance),
            "input_labels": list(ref.input_labels),
            "objective_names": list(OBJECTIVE_NAMES),
        }

    @app.get("/indicators")
    def indicators(runs: str, snapshots: bool = False):
        run_ids = _parse_run_list(runs)
        finals = {r: Front(np.asarray(store.load_front(r)["objectives"], dtype=float))
                  for r in run_ids}
        ref = build_reference_front(list(finals.values()), labels=run_ids)
        norm = Normalizer.from_front(ref.points)
        rows = []
        for run_id in run_ids:
            evals = store.record(run_id).latest_evals
            if snapshots:
                for snap in store.load_snapshots(run_id):
                    archive = Front(np.asarray(snap["archive"], dtype=float))
                    row = indicator_row(archive, ref, norm, run_id)
                    rows.append({"run": run_id, "evals": snap["evals"], **row})
            else:
                row = indicator_row(finals[run_id], ref, norm, run_id)
                rows.append({"run": run_id, "evals": evals, **row})
        return {"rows": rows}

    def _parse_run_list(runs: str) -> list[str]:
        run_ids = [r for r in (part.strip() for part in runs.split(",")) if r]
        if not run_ids:
            raise ConfigError("'runs' must name at least one run id")
        if len(set(run_ids)) != len(run_ids):
            raise ConfigError("'runs' contains duplicates")
        for run_id in run_ids:
            if store.status(run_id) != DONE:
                raise ConfigError(f"run {run_id} is not complete")
        return run_ids

    return app


def service_port(explicit: int | None = None) -> int:
    if explicit is not None:
        return explicit
    raw = os.environ.get(PORT_ENV_VAR)
    if raw is None:
        return DEFAULT_PORT
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{PORT_ENV_VAR} must be an integer, got {raw!r}") from exc
