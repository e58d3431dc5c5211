"""Run store: content-addressed ids, resumability, and file schemas."""

import json

import pytest

import archsearch.store
from archsearch.errors import NotFoundError, StoreError
from archsearch.experiments import SCENARIOS, make_synthetic_system, problem_from_document
from archsearch.search import RunConfig
from archsearch.store import DONE, FAILED, QUEUED, RunStore, run_id_for


@pytest.fixture
def setup(tmp_path):
    graph, _, _ = make_synthetic_system(20, 4, 2, 0.1, seed=0)
    doc = SCENARIOS["transient4"].document(graph, 0, system="tiny")
    problem = problem_from_document(doc)
    config = RunConfig(algorithm="random", population=10,
                       max_evaluations=60, snapshot_interval=20, seed=0)
    return RunStore(tmp_path / "results"), problem, doc, config


class TestRunIds:
    def test_stable_under_reserialization(self, setup):
        _, _, doc, config = setup
        a = run_id_for(doc, config)
        b = run_id_for(json.loads(json.dumps(doc)), config)
        assert a == b
        assert len(a) == 16

    def test_seed_and_problem_change_the_id(self, setup):
        _, _, doc, config = setup
        from dataclasses import replace
        assert run_id_for(doc, config) != run_id_for(doc, replace(config, seed=1))
        other = dict(doc, system="renamed")
        assert run_id_for(doc, config) != run_id_for(other, config)


class TestExecute:
    def test_produces_complete_run_directory(self, setup):
        store, problem, doc, config = setup
        record = store.execute(problem, doc, config)
        assert record.status == DONE
        assert record.latest_evals == 60
        rdir = store.run_dir(record.id)
        assert (rdir / "config.json").exists()
        assert (rdir / "problem.json").exists()
        assert (rdir / "front.json").exists()
        assert (rdir / "meta.json").exists()
        assert not (rdir / "running.txt").exists()

    def test_front_schema_is_exactly_three_keys(self, setup):
        store, problem, doc, config = setup
        record = store.execute(problem, doc, config)
        front = store.load_front(record.id)
        assert sorted(front) == ["objectives", "package_to_layer", "unit_to_package"]
        n = len(front["objectives"])
        assert n == len(front["unit_to_package"]) == len(front["package_to_layer"])
        assert all(len(row) == 8 for row in front["objectives"])
        assert all(len(row) == problem.unit_count for row in front["unit_to_package"])

    def test_snapshot_lines_schema(self, setup):
        store, problem, doc, config = setup
        record = store.execute(problem, doc, config)
        snaps = list(store.load_snapshots(record.id))
        assert [s["evals"] for s in snaps] == [20, 40, 60]
        for s in snaps:
            assert sorted(s) == ["archive", "evals", "pop"]
            assert all(len(row) == 8 for row in s["archive"])
            assert all(len(row) == 8 for row in s["pop"])

    def test_incremental_snapshot_reads(self, setup):
        store, problem, doc, config = setup
        record = store.execute(problem, doc, config)
        assert [s["evals"] for s in store.load_snapshots(record.id, from_evals=20)] == [40, 60]
        assert list(store.load_snapshots(record.id, from_evals=60)) == []

    def test_second_execute_skips_the_run(self, setup, monkeypatch):
        store, problem, doc, config = setup
        store.execute(problem, doc, config)

        def boom(*a, **k):
            raise AssertionError("a complete run must not re-execute")

        monkeypatch.setattr(archsearch.store, "run", boom)
        record = store.execute(problem, doc, config)
        assert record.status == DONE

    def test_force_reruns_a_complete_run(self, setup):
        store, problem, doc, config = setup
        first = store.execute(problem, doc, config)
        second = store.execute(problem, doc, config, force=True)
        assert first.id == second.id
        assert second.status == DONE

    def test_interrupted_run_restarts_cleanly(self, setup):
        store, problem, doc, config = setup
        record = store.enqueue(doc, config)
        snap_path = store.run_dir(record.id) / "snapshots.jsonl"
        snap_path.write_text('{"evals": 20, "archive": [], "pop": []}\n')
        assert store.status(record.id) == QUEUED
        assert store.latest_evals(record.id) == 20
        done = store.execute(problem, doc, config)
        assert done.status == DONE
        assert [s["evals"] for s in store.load_snapshots(done.id)] == [20, 40, 60]

    def test_failure_leaves_error_marker_and_reraises(self, setup, monkeypatch):
        store, problem, doc, config = setup

        def boom(*a, **k):
            raise RuntimeError("disk on fire")

        monkeypatch.setattr(archsearch.store, "run", boom)
        with pytest.raises(RuntimeError):
            store.execute(problem, doc, config)
        run_id = run_id_for(doc, config)
        assert store.status(run_id) == FAILED
        assert "disk on fire" in (store.run_dir(run_id) / "error.txt").read_text()
        monkeypatch.undo()
        record = store.execute(problem, doc, config)
        assert record.status == DONE
        assert not (store.run_dir(run_id) / "error.txt").exists()


class TestReads:
    def test_unknown_run_rejected(self, setup):
        store, *_ = setup
        with pytest.raises(NotFoundError, match="nope"):
            store.load_front("nope")
        with pytest.raises(NotFoundError):
            store.record("nope")

    def test_front_of_incomplete_run_rejected(self, setup):
        store, _, doc, config = setup
        record = store.enqueue(doc, config)
        with pytest.raises(NotFoundError, match="queued"):
            store.load_front(record.id)

    def test_corrupt_front_raises_store_error(self, setup):
        store, problem, doc, config = setup
        record = store.execute(problem, doc, config)
        (store.run_dir(record.id) / "front.json").write_text("{broken")
        with pytest.raises(StoreError, match="corrupt"):
            store.load_front(record.id)

    def test_list_runs_orders_by_id(self, setup):
        from dataclasses import replace
        store, problem, doc, config = setup
        ids = {store.execute(problem, doc, replace(config, seed=s)).id
               for s in range(3)}
        records = store.list_runs()
        assert [r.id for r in records] == sorted(ids)
        assert all(r.status == DONE for r in records)

    def test_problem_document_round_trips(self, setup):
        store, problem, doc, config = setup
        record = store.execute(problem, doc, config)
        loaded = store.load_problem_document(record.id)
        assert loaded == doc
        rebuilt = problem_from_document(loaded)
        assert rebuilt.unit_count == problem.unit_count
        assert rebuilt.package_slots == problem.package_slots


class TestDeterministicPersistence:
    def test_snapshot_files_byte_identical_across_stores(self, tmp_path, setup):
        _, problem, doc, config = setup
        a = RunStore(tmp_path / "a")
        b = RunStore(tmp_path / "b")
        ra = a.execute(problem, doc, config)
        rb = b.execute(problem, doc, config)
        assert ra.id == rb.id
        bytes_a = (a.run_dir(ra.id) / "snapshots.jsonl").read_bytes()
        bytes_b = (b.run_dir(rb.id) / "snapshots.jsonl").read_bytes()
        assert bytes_a == bytes_b
        assert (a.run_dir(ra.id) / "front.json").read_bytes() == \
               (b.run_dir(rb.id) / "front.json").read_bytes()
