"""Embedded transactional store backing the list service and profiles.

A thin wrapper over sqlite3. Transactions are re-entrant: nested
``with store.transaction():`` blocks join the outermost one, which is what
lets the HTTP gateway bundle an idempotency-key record with the operation
it guards into a single atomic commit.

Writes are serialized by a process-wide lock (sqlite is single-writer
anyway); that is a superset of the per-list mutual exclusion the list
service needs.
"""

from __future__ import annotations

import sqlite3
import threading
from contextlib import contextmanager
from pathlib import Path

_SCHEMA = """
CREATE TABLE IF NOT EXISTS lists (
    list_id    TEXT PRIMARY KEY,
    owner      TEXT NOT NULL,
    name       TEXT NOT NULL,
    created_at REAL NOT NULL,
    updated_at REAL NOT NULL,
    UNIQUE (owner, name)
);

CREATE TABLE IF NOT EXISTS items (
    item_id        TEXT PRIMARY KEY,
    list_id        TEXT NOT NULL REFERENCES lists(list_id),
    position       INTEGER NOT NULL,
    label          TEXT NOT NULL,
    linked_product TEXT,
    checked        INTEGER NOT NULL DEFAULT 0,
    manual_check   INTEGER NOT NULL DEFAULT 0,
    scan_code      TEXT,
    assessment     TEXT
);
CREATE INDEX IF NOT EXISTS items_by_list ON items(list_id, position);

CREATE TABLE IF NOT EXISTS history (
    seq        INTEGER PRIMARY KEY AUTOINCREMENT,
    user       TEXT NOT NULL,
    product_id TEXT NOT NULL,
    ts         REAL NOT NULL
);
CREATE INDEX IF NOT EXISTS history_by_user ON history(user, seq);

CREATE TABLE IF NOT EXISTS feed (
    seq        INTEGER PRIMARY KEY AUTOINCREMENT,
    author     TEXT NOT NULL,
    product_id TEXT NOT NULL,
    stars      REAL NOT NULL,
    note       TEXT,
    shared_at  REAL NOT NULL
);

CREATE TABLE IF NOT EXISTS profiles (
    user    TEXT PRIMARY KEY,
    payload TEXT NOT NULL
);

CREATE TABLE IF NOT EXISTS idempotency (
    user     TEXT NOT NULL,
    key      TEXT NOT NULL,
    response TEXT NOT NULL,
    PRIMARY KEY (user, key)
);
"""


class Store:
    """One sqlite database; ``:memory:`` by default for tests."""

    def __init__(self, path: str | Path = ":memory:"):
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA foreign_keys = ON")
        self._lock = threading.RLock()
        self._depth = threading.local()
        with self.transaction() as conn:
            conn.executescript(_SCHEMA)

    @property
    def conn(self) -> sqlite3.Connection:
        """Shared connection; use transaction() for writes, this for reads."""
        return self._conn

    @contextmanager
    def transaction(self):
        """Re-entrant transaction scope; commits (or rolls back) at depth 0."""
        with self._lock:
            depth = getattr(self._depth, "value", 0)
            self._depth.value = depth + 1
            try:
                yield self._conn
                if depth == 0:
                    self._conn.commit()
            except BaseException:
                if depth == 0:
                    self._conn.rollback()
                raise
            finally:
                self._depth.value = depth

    def close(self) -> None:
        self._conn.close()

    # -- idempotency records (used by the HTTP gateway) --

    def get_idempotent(self, user: str, key: str) -> str | None:
        row = self._conn.execute(
            "SELECT response FROM idempotency WHERE user = ? AND key = ?", (user, key)
        ).fetchone()
        return None if row is None else row["response"]

    def put_idempotent(self, user: str, key: str, response: str) -> None:
        with self.transaction() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO idempotency (user, key, response) VALUES (?, ?, ?)",
                (user, key, response),
            )
