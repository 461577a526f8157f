import json
import logging
import sqlite3

from config_manager import get_general_setting

log = logging.getLogger(__name__)


def _db_path(db_path=None):
    return db_path or get_general_setting('database_file', 'results.db')


def init_db(db_path=None):
    """Creates the runs and samples tables if they do not exist."""
    db_path = _db_path(db_path)
    log.info(f"Initializing database at: {db_path}")
    conn = None
    try:
        conn = sqlite3.connect(db_path, timeout=10.0)
        cursor = conn.cursor()
        cursor.execute("""
        CREATE TABLE IF NOT EXISTS runs (
            run_id TEXT PRIMARY KEY,
            command TEXT,
            eps REAL,
            config_json TEXT,
            created DATETIME DEFAULT CURRENT_TIMESTAMP
        );
        """)
        # (run_id, t, source) identifies a sample; re-exports are ignored
        cursor.execute("""
        CREATE TABLE IF NOT EXISTS samples (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            run_id TEXT NOT NULL REFERENCES runs(run_id),
            t REAL NOT NULL,
            u REAL,
            regime TEXT,
            residual REAL,
            source TEXT NOT NULL,
            UNIQUE (run_id, t, source)
        );
        """)
        cursor.execute("CREATE INDEX IF NOT EXISTS idx_samples_run ON samples (run_id);")
        cursor.execute("CREATE INDEX IF NOT EXISTS idx_samples_regime ON samples (regime);")
        conn.commit()
        log.info("Database initialized successfully.")
    except sqlite3.Error as e:
        log.critical(f"CRITICAL: Database initialization failed: {e}", exc_info=True)
        raise
    finally:
        if conn:
            conn.close()


def save_run(run_id, command, eps, run_config=None, db_path=None):
    conn = None
    try:
        conn = sqlite3.connect(_db_path(db_path), timeout=10.0)
        config_json = run_config.to_json() if run_config is not None else None
        conn.execute("INSERT OR IGNORE INTO runs (run_id, command, eps, config_json) VALUES (?, ?, ?, ?);",
                     (run_id, command, eps, config_json))
        conn.commit()
    except sqlite3.Error as e:
        log.error(f"Database error saving run '{run_id}': {e}", exc_info=True)
    finally:
        if conn:
            conn.close()


def save_samples(run_id, samples, db_path=None):
    """Archives samples under run_id; returns (inserted, ignored)."""
    if not samples:
        log.info("No samples to save to database.")
        return 0, 0
    conn = None
    inserted = ignored = 0
    insert_sql = """
    INSERT OR IGNORE INTO samples (run_id, t, u, regime, residual, source)
    VALUES (?, ?, ?, ?, ?, ?);
    """
    try:
        conn = sqlite3.connect(_db_path(db_path), timeout=10.0)
        cursor = conn.cursor()
        for s in samples:
            try:
                cursor.execute(insert_sql, (run_id, s.t, s.u, s.regime, s.residual, s.source))
                if cursor.rowcount > 0:
                    inserted += 1
                else:
                    ignored += 1
            except sqlite3.Error as e:
                log.warning(f"Failed to insert sample t={s.t} of run '{run_id}': {e}")
        conn.commit()
        log.info(f"Database save complete. Inserted: {inserted}, Ignored (duplicate): {ignored}")
    except sqlite3.Error as e:
        log.error(f"Database error during save: {e}", exc_info=True)
    finally:
        if conn:
            conn.close()
    return inserted, ignored


def get_recent_runs(limit=10, db_path=None):
    """Most recent runs with their sample counts."""
    conn = None
    try:
        conn = sqlite3.connect(_db_path(db_path))
        conn.row_factory = sqlite3.Row
        rows = conn.execute("""
            SELECT r.run_id, r.command, r.eps, r.config_json, r.created, COUNT(s.id) AS n_samples
            FROM runs r LEFT JOIN samples s ON s.run_id = r.run_id
            GROUP BY r.run_id ORDER BY r.created DESC, r.rowid DESC LIMIT ?;
        """, (limit,)).fetchall()
        out = []
        for row in rows:
            d = dict(row)
            d['config'] = json.loads(d.pop('config_json')) if d.get('config_json') else None
            out.append(d)
        return out
    except sqlite3.Error as e:
        log.error(f"Database error fetching recent runs: {e}", exc_info=True)
        return []
    finally:
        if conn:
            conn.close()
