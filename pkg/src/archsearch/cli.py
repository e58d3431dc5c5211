"""Command-line entry points: ingest, run, matrix, indicators, stats, export, serve."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import ArchSearchError, ConfigError
from .experiments import (
    SCENARIOS,
    ExperimentMatrix,
    MatrixRun,
    ResultSet,
    descriptive_stats,
    kruskal_wallis,
    problem_document,
    problem_from_document,
    run_matrix,
    stats_to_csv,
)
from .indicators import Front, Normalizer, build_reference_front, indicator_row
from .model import parse_graph, parse_model_for_graph
from .objectives import OBJECTIVE_NAMES
from .search import ALGORITHMS, RunConfig
from .service import PORT_ENV_VAR, service_port
from .store import DONE, RunStore

USAGE_ERROR = 1
DATA_ERROR = 2


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc


def _load_system(graph_path: str, model_path: str | None):
    graph = parse_graph(_read(graph_path))
    if model_path is None:
        return graph, None, []
    model, pins = parse_model_for_graph(_read(model_path), graph)
    return graph, model, pins


def _objective_index(raw: str) -> int:
    if raw.isdigit():
        index = int(raw)
        if not 0 <= index < len(OBJECTIVE_NAMES):
            raise ConfigError(f"objective index {index} outside [0, {len(OBJECTIVE_NAMES)})")
        return index
    if raw in OBJECTIVE_NAMES:
        return OBJECTIVE_NAMES.index(raw)
    raise ConfigError(f"unknown objective {raw!r}; choose from {', '.join(OBJECTIVE_NAMES)}")


# -- subcommands --------------------------------------------------------------

def cmd_ingest(args) -> int:
    graph, model, pins = _load_system(args.graph, args.model)
    print(f"graph: {graph.unit_count} types, {len(graph.edges)} dependencies, "
          f"{len(graph.origin_packages)} origin packages")
    if model is not None:
        print(f"model: style {model.style}, {model.layer_count} layers, "
              f"{model.package_slots} package slots, {len(pins)} pins")
    return 0


def cmd_run(args) -> int:
    spec = json.loads(_read(args.config))
    if not isinstance(spec, dict):
        raise ConfigError("run config must be a JSON object")
    config = RunConfig.from_document(spec.get("config", spec))

    if "problem" in spec:
        doc = spec["problem"]
    elif "graph" in spec:
        graph, model, pins = _load_system(spec["graph"], spec.get("model"))
        scenario_id = spec.get("scenario")
        system = spec.get("system", Path(spec["graph"]).stem)
        if scenario_id is not None:
            if scenario_id not in SCENARIOS:
                raise ConfigError(f"unknown scenario {scenario_id!r}")
            doc = SCENARIOS[scenario_id].document(graph, config.seed,
                                                  pins=pins, system=system)
            config = replace(config, scenario=scenario_id)
        else:
            if model is None:
                raise ConfigError("run config needs a 'model' file or a 'scenario'")
            doc = problem_document(graph, model, pins=pins, system=system)
    else:
        raise ConfigError("run config needs either a 'problem' document or a 'graph' path")

    store = RunStore(args.store)
    problem = problem_from_document(doc)
    before = store.enqueue(doc, config)
    if before.status == DONE:
        print(f"run {before.id} already complete")
        return 0
    record = store.execute(problem, doc, config)
    front = store.load_front(record.id)
    print(f"run {record.id} {record.status}: {len(front['objectives'])} "
          f"front solutions after {config.max_evaluations} evaluations")
    return 0


def cmd_matrix(args) -> int:
    spec = json.loads(_read(args.file))
    if not isinstance(spec, dict):
        raise ConfigError("matrix file must be a JSON object")
    for key in ("algorithms", "systems", "scenarios", "seeds"):
        if not isinstance(spec.get(key), list) or not spec[key]:
            raise ConfigError(f"matrix file needs a non-empty {key!r} list")
    systems = []
    for entry in spec["systems"]:
        if not isinstance(entry, dict) or "graph" not in entry:
            raise ConfigError("each system needs at least a 'graph' path")
        graph = parse_graph(_read(entry["graph"]))
        systems.append((entry.get("name", Path(entry["graph"]).stem), graph))
    base = RunConfig.from_document(dict(spec.get("config", {}),
                                        algorithm=spec["algorithms"][0]))
    matrix = ExperimentMatrix(
        algorithms=tuple(spec["algorithms"]),
        systems=tuple(systems),
        scenarios=tuple(spec["scenarios"]),
        seeds=tuple(spec["seeds"]),
        base=base,
    )
    store = RunStore(args.store)
    print(f"matrix: {matrix.total_runs} runs "
          f"({len(matrix.algorithms)} algorithms x {len(matrix.systems)} systems "
          f"x {len(matrix.scenarios)} scenarios x {len(matrix.seeds)} seeds)")
    results = run_matrix(matrix, store, worker_count=args.workers)
    executed = results.executed_count
    failed = results.failed
    print(f"executed {executed}, skipped {len(results.runs) - executed}, "
          f"failed {len(failed)}")
    for run in failed:
        print(f"  failed {run.run_id} ({run.algorithm}/{run.system}/"
              f"{run.scenario}/seed {run.seed}): {run.error}")
    return DATA_ERROR if failed else 0


def _result_set_from_store(store: RunStore) -> ResultSet:
    """Rebuild matrix slicing keys from the per-run documents."""
    runs = []
    for record in store.list_runs():
        doc = store.load_problem_document(record.id)
        runs.append(MatrixRun(
            algorithm=record.config.get("algorithm", "?"),
            system=doc.get("system", "?"),
            scenario=record.config.get("scenario") or doc.get("scenario", "?"),
            seed=record.config.get("seed", -1),
            run_id=record.id,
            status=record.status,
            executed=False,
        ))
    return ResultSet(store=store, runs=tuple(runs))


def cmd_stats(args) -> int:
    store = RunStore(args.store)
    results = _result_set_from_store(store)
    index = _objective_index(args.objective)
    reports = descriptive_stats(results, args.by, index)
    if not reports:
        raise ConfigError("no completed runs in the store")
    sys.stdout.write(stats_to_csv(reports))
    if args.kruskal:
        groups, labels = [], []
        for report in reports:
            values = []
            for run in results.runs:
                if run.status == DONE and getattr(run, args.by) == report.slice:
                    front = store.load_front(run.run_id)
                    values.extend(row[index] for row in front["objectives"])
            groups.append(values)
            labels.append(report.slice)
        if len(groups) >= 2:
            h, p = kruskal_wallis(groups)
            print(f"kruskal-wallis over {', '.join(labels)}: H={h:.6g} p={p:.6g}")
    return 0


def cmd_indicators(args) -> int:
    store = RunStore(args.store)
    if args.runs:
        run_ids = [r for r in args.runs.split(",") if r]
    else:
        run_ids = [r.id for r in store.list_runs() if r.status == DONE]
    if not run_ids:
        raise ConfigError("no completed runs to compare")
    for run_id in run_ids:
        if store.status(run_id) != DONE:
            raise ConfigError(f"run {run_id} is not complete")
    finals = {r: Front(np.asarray(store.load_front(r)["objectives"], dtype=float))
              for r in run_ids}
    ref = build_reference_front(list(finals.values()), labels=run_ids)
    norm = Normalizer.from_front(ref.points)
    for run_id in run_ids:
        if args.snapshots:
            for snap in store.load_snapshots(run_id):
                front = Front(np.asarray(snap["archive"], dtype=float))
                row = indicator_row(front, ref, norm, run_id)
                print(json.dumps({"run": run_id, "evals": snap["evals"], **row}))
        else:
            record = store.record(run_id)
            row = indicator_row(finals[run_id], ref, norm, run_id)
            print(json.dumps({"run": run_id, "evals": record.latest_evals, **row}))
    return 0


def cmd_export(args) -> int:
    store = RunStore(args.store)
    front = store.load_front(args.run)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        if args.format == "json":
            json.dump({"run": args.run,
                       "objective_names": list(OBJECTIVE_NAMES),
                       **front}, out, indent=1)
            out.write("\n")
        else:
            writer = csv.writer(out)
            writer.writerow(["solution", *OBJECTIVE_NAMES])
            for i, row in enumerate(front["objectives"]):
                writer.writerow([f"{args.run}:{i}", *map(repr, row)])
    finally:
        if args.out:
            out.close()
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(RunStore(args.store))
    uvicorn.run(app, host=args.host, port=service_port(args.port))
    return 0


# -- dispatch -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="archsearch",
        description="Search-based reconstruction of layered architectures.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("ingest", help="validate graph and model files")
    p.add_argument("--graph", required=True)
    p.add_argument("--model")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("run", help="execute a single run from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--store", default="results")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("matrix", help="execute an experiment matrix")
    p.add_argument("--file", required=True)
    p.add_argument("--store", default="results")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(handler=cmd_matrix)

    p = sub.add_parser("indicators", help="front-quality indicator report (JSON lines)")
    p.add_argument("--store", default="results")
    p.add_argument("--runs", help="comma-separated run ids (default: all complete)")
    p.add_argument("--snapshots", action="store_true",
                   help="one row per snapshot instead of per run")
    p.set_defaults(handler=cmd_indicators)

    p = sub.add_parser("stats", help="descriptive statistics as CSV")
    p.add_argument("--store", default="results")
    p.add_argument("--by", choices=("algorithm", "system", "scenario"),
                   default="algorithm")
    p.add_argument("--objective", default="violations",
                   help="objective name or index")
    p.add_argument("--kruskal", action="store_true",
                   help="append a Kruskal-Wallis test across slices")
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("export", help="write a final front as CSV or JSON")
    p.add_argument("--store", default="results")
    p.add_argument("--run", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_export)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--store", default="results")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None,
                   help=f"default: ${PORT_ENV_VAR} or {service_port()}")
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse reserves exit code 2 for usage errors; this tool uses 1
        return 0 if exc.code in (0, None) else USAGE_ERROR
    if getattr(args, "handler", None) is None:
        parser.print_usage(sys.stderr)
        return USAGE_ERROR
    try:
        return args.handler(args)
    except ArchSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
