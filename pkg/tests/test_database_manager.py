import pytest

import database_manager as db
from config_manager import RunConfig
from solution_sample import OUTER, SolutionSample


@pytest.fixture
def db_path(tmp_path):
    path = str(tmp_path / "archive.db")
    db.init_db(path)
    return path


def _samples(n):
    return [SolutionSample(t=-3.0 + 0.1 * i, u=-0.6, regime=OUTER, residual=1e-12, source="outer")
            for i in range(n)]


def test_duplicate_samples_are_ignored(db_path):
    db.save_run("r1", "outer", 1e-3, RunConfig(eps=1e-3), db_path)
    assert db.save_samples("r1", _samples(4), db_path) == (4, 0)
    assert db.save_samples("r1", _samples(5), db_path) == (1, 4)


def test_recent_runs_with_counts(db_path):
    db.save_run("a", "outer", 1e-3, RunConfig(eps=1e-3), db_path)
    db.save_run("b", "kuzmak", 1e-2, None, db_path)
    db.save_samples("a", _samples(3), db_path)
    runs = {r['run_id']: r for r in db.get_recent_runs(db_path=db_path)}
    assert runs['a']['n_samples'] == 3
    assert runs['a']['config']['eps'] == 1e-3
    assert runs['b']['n_samples'] == 0
    assert runs['b']['config'] is None
    assert len(db.get_recent_runs(limit=1, db_path=db_path)) == 1


def test_init_is_idempotent(db_path):
    db.init_db(db_path)
    assert db.get_recent_runs(db_path=db_path) == []


def test_nothing_to_save(db_path):
    assert db.save_samples("r", [], db_path) == (0, 0)


def test_default_path_from_config(tmp_config):
    db.init_db()
    db.save_run("c", "outer", 1e-3)
    assert (tmp_config.parent / "results.db").exists()
    assert db.get_recent_runs()[0]['run_id'] == "c"
