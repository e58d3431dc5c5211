"""Run persistence: one content-addressed directory per run.

Layout under <root>/runs/<id>/:

    problem.json    graph + model + pins + scenario, self-contained
    config.json     run configuration echo (written at enqueue time)
    snapshots.jsonl one line per snapshot, streamed while running
    front.json      final front with decoded assignments; completion marker
    meta.json       wall time and evaluation count
    error.txt       failure record, mutually exclusive with front.json

The run id is a content hash over (problem, config), so re-executing an
already-complete run is a no-op and interrupted matrices resume exactly
where they stopped.  front.json is written last and atomically: its
presence means the run finished.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator

from .errors import NotFoundError, StoreError
from .search import Problem, RunConfig, RunResult, Snapshot, run

RUN_ID_LENGTH = 16

QUEUED = "queued"
RUNNING = "running"
DONE = "done"
FAILED = "failed"


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def run_id_for(problem_doc: dict, config: RunConfig) -> str:
    payload = canonical_json({"problem": problem_doc, "config": config.to_document()})
    return hashlib.sha256(payload.encode()).hexdigest()[:RUN_ID_LENGTH]


@dataclass(frozen=True)
class RunRecord:
    id: str
    status: str
    config: dict
    path: str
    latest_evals: int

    def to_document(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "config": self.config,
            "path": self.path,
            "latest_evals": self.latest_evals,
        }


def _atomic_write(path: Path, text: str):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def snapshot_line(snap: Snapshot) -> str:
    return json.dumps({
        "evals": snap.eval_count,
        "archive": snap.archive.tolist(),
        "pop": snap.population.tolist(),
    })


def front_document(result: RunResult) -> dict:
    return {
        "objectives": result.final_objectives.tolist(),
        "unit_to_package": result.final_unit_to_package.tolist(),
        "package_to_layer": result.final_package_to_layer.tolist(),
    }


class RunStore:
    """Filesystem-backed run registry with single-writer run directories."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.runs_dir = self.root / "runs"
        self.runs_dir.mkdir(parents=True, exist_ok=True)

    def run_dir(self, run_id: str) -> Path:
        return self.runs_dir / run_id

    # -- registration ------------------------------------------------------

    def enqueue(self, problem_doc: dict, config: RunConfig) -> RunRecord:
        """Register a run directory (idempotent) without executing it."""
        run_id = run_id_for(problem_doc, config)
        rdir = self.run_dir(run_id)
        rdir.mkdir(parents=True, exist_ok=True)
        problem_path = rdir / "problem.json"
        config_path = rdir / "config.json"
        if not problem_path.exists():
            _atomic_write(problem_path, canonical_json(problem_doc))
        if not config_path.exists():
            doc = config.to_document()
            doc["id"] = run_id
            doc["created_at"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
            _atomic_write(config_path, json.dumps(doc, indent=1))
        return self.record(run_id)

    # -- execution ---------------------------------------------------------

    def execute(self, problem: Problem, problem_doc: dict, config: RunConfig,
                force: bool = False) -> RunRecord:
        """Run to completion unless the run directory is already complete."""
        record = self.enqueue(problem_doc, config)
        rdir = self.run_dir(record.id)
        if record.status == DONE and not force:
            return record
        running_marker = rdir / "running.txt"
        error_path = rdir / "error.txt"
        snap_path = rdir / "snapshots.jsonl"
        _atomic_write(running_marker, f"pid={os.getpid()} started={time.time()}\n")
        if error_path.exists():
            error_path.unlink()
        try:
            with open(snap_path, "w") as handle:
                def stream(snap: Snapshot):
                    handle.write(snapshot_line(snap) + "\n")

                result = run(problem, config, on_snapshot=stream)
            _atomic_write(rdir / "meta.json", json.dumps({
                "wall_time": result.wall_time,
                "evals": config.max_evaluations,
                "front_size": len(result),
            }))
            _atomic_write(rdir / "front.json", canonical_json(front_document(result)))
        except Exception as exc:
            _atomic_write(error_path, f"{type(exc).__name__}: {exc}\n")
            raise
        finally:
            if running_marker.exists():
                running_marker.unlink()
        return self.record(record.id)

    # -- reads ---------------------------------------------------------------

    def exists(self, run_id: str) -> bool:
        return (self.run_dir(run_id) / "config.json").exists()

    def _require(self, run_id: str) -> Path:
        rdir = self.run_dir(run_id)
        if not (rdir / "config.json").exists():
            raise NotFoundError(f"unknown run id {run_id!r}")
        return rdir

    def status(self, run_id: str) -> str:
        rdir = self._require(run_id)
        if (rdir / "error.txt").exists():
            return FAILED
        if (rdir / "front.json").exists():
            return DONE
        if (rdir / "running.txt").exists():
            return RUNNING
        return QUEUED

    def record(self, run_id: str) -> RunRecord:
        rdir = self._require(run_id)
        try:
            config = json.loads((rdir / "config.json").read_text())
        except json.JSONDecodeError as exc:
            raise StoreError(f"corrupt config.json for run {run_id}: {exc}") from exc
        return RunRecord(
            id=run_id,
            status=self.status(run_id),
            config=config,
            path=str(rdir),
            latest_evals=self.latest_evals(run_id),
        )

    def list_runs(self) -> list[RunRecord]:
        records = []
        for entry in sorted(self.runs_dir.iterdir()) if self.runs_dir.exists() else []:
            if entry.is_dir() and (entry / "config.json").exists():
                records.append(self.record(entry.name))
        return records

    def latest_evals(self, run_id: str) -> int:
        path = self.run_dir(run_id) / "snapshots.jsonl"
        if not path.exists():
            return 0
        last = None
        with open(path) as handle:
            for line in handle:
                if line.strip():
                    last = line
        if last is None:
            return 0
        try:
            return int(json.loads(last)["evals"])
        except (json.JSONDecodeError, KeyError) as exc:
            raise StoreError(f"corrupt snapshots.jsonl for run {run_id}") from exc

    def load_problem_document(self, run_id: str) -> dict:
        rdir = self._require(run_id)
        try:
            return json.loads((rdir / "problem.json").read_text())
        except FileNotFoundError as exc:
            raise StoreError(f"run {run_id} has no problem.json") from exc
        except json.JSONDecodeError as exc:
            raise StoreError(f"corrupt problem.json for run {run_id}") from exc

    def load_front(self, run_id: str) -> dict:
        rdir = self._require(run_id)
        path = rdir / "front.json"
        if not path.exists():
            raise NotFoundError(f"run {run_id} has no final front (status: {self.status(run_id)})")
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise StoreError(f"corrupt front.json for run {run_id}") from exc

    def load_snapshots(self, run_id: str, from_evals: int = 0) -> Iterator[dict]:
        rdir = self._require(run_id)
        path = rdir / "snapshots.jsonl"
        if not path.exists():
            return
        with open(path) as handle:
            for line in handle:
                if not line.strip():
                    continue
                try:
                    doc = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise StoreError(f"corrupt snapshots.jsonl for run {run_id}") from exc
                if doc.get("evals", 0) > from_evals:
                    yield doc
