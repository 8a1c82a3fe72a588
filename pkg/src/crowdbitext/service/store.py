"""Sqlite persistence for the crowdsourcing backend.

One connection guarded by one lock; every mutation runs inside a
transaction. The ledger is append-only: entries are never updated or
deleted, sequence numbers come from the autoincrement rowid, and a UNIQUE
constraint on report_id makes paying a report twice impossible at the
storage layer.
"""

from __future__ import annotations

import json
import sqlite3
import threading
import time
import uuid

_SCHEMA = """
CREATE TABLE IF NOT EXISTS workers (
    id TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    token TEXT NOT NULL UNIQUE,
    role TEXT NOT NULL CHECK (role IN ('worker', 'admin')),
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS campaigns (
    id TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    domain TEXT NOT NULL,
    src_lang TEXT NOT NULL,
    tgt_lang TEXT NOT NULL,
    config_json TEXT NOT NULL,
    created_at REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS reports (
    id TEXT PRIMARY KEY,
    campaign_id TEXT NOT NULL REFERENCES campaigns(id),
    worker_id TEXT NOT NULL REFERENCES workers(id),
    url_a TEXT NOT NULL,
    url_b TEXT NOT NULL,
    key_lo TEXT NOT NULL,
    key_hi TEXT NOT NULL,
    status TEXT NOT NULL CHECK (status IN ('pending', 'processing', 'done', 'failed')),
    failure_reason TEXT,
    pair_count INTEGER,
    reward_json TEXT,
    submitted_at REAL NOT NULL,
    completed_at REAL,
    UNIQUE (campaign_id, key_lo, key_hi)
);
CREATE TABLE IF NOT EXISTS pairs (
    report_id TEXT NOT NULL REFERENCES reports(id),
    campaign_id TEXT NOT NULL,
    position INTEGER NOT NULL,
    src TEXT NOT NULL,
    tgt TEXT NOT NULL,
    cost REAL NOT NULL,
    s_a REAL NOT NULL,
    s_d REAL NOT NULL,
    h_in REAL NOT NULL,
    h_gen REAL NOT NULL,
    PRIMARY KEY (report_id, position)
);
CREATE TABLE IF NOT EXISTS ledger (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    worker_id TEXT NOT NULL,
    report_id TEXT NOT NULL UNIQUE,
    campaign_id TEXT NOT NULL,
    amount INTEGER NOT NULL CHECK (amount >= 0),
    created_at REAL NOT NULL
);
"""


class DuplicateReport(Exception):
    def __init__(self, existing_id: str):
        super().__init__(f"url pair already reported as {existing_id}")
        self.existing_id = existing_id


def _new_id() -> str:
    return uuid.uuid4().hex[:16]


class Store:
    """All persistent state; safe to share across the API and pool threads."""

    def __init__(self, path: str = ":memory:"):
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # workers

    def add_worker(self, name: str, token: str, role: str = "worker") -> dict:
        if role not in ("worker", "admin"):
            raise ValueError(f"unknown role {role!r}")
        row = {
            "id": _new_id(),
            "name": name,
            "token": token,
            "role": role,
            "created_at": time.time(),
        }
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO workers (id, name, token, role, created_at)"
                " VALUES (:id, :name, :token, :role, :created_at)",
                row,
            )
        return row

    def first_admin(self) -> dict | None:
        with self._lock:
            got = self._conn.execute(
                "SELECT * FROM workers WHERE role = 'admin'"
                " ORDER BY created_at, id LIMIT 1"
            ).fetchone()
        return dict(got) if got else None

    def worker_by_token(self, token: str) -> dict | None:
        with self._lock:
            got = self._conn.execute(
                "SELECT * FROM workers WHERE token = ?", (token,)
            ).fetchone()
        return dict(got) if got else None

    def get_worker(self, worker_id: str) -> dict:
        with self._lock:
            got = self._conn.execute(
                "SELECT * FROM workers WHERE id = ?", (worker_id,)
            ).fetchone()
        if got is None:
            raise KeyError(worker_id)
        return dict(got)

    # campaigns

    def add_campaign(
        self, name: str, domain: str, src_lang: str, tgt_lang: str, config: dict
    ) -> dict:
        row = {
            "id": _new_id(),
            "name": name,
            "domain": domain,
            "src_lang": src_lang,
            "tgt_lang": tgt_lang,
            "config_json": json.dumps(config, ensure_ascii=False, sort_keys=True),
            "created_at": time.time(),
        }
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT INTO campaigns (id, name, domain, src_lang, tgt_lang,"
                " config_json, created_at) VALUES (:id, :name, :domain,"
                " :src_lang, :tgt_lang, :config_json, :created_at)",
                row,
            )
        return self.get_campaign(row["id"])

    def get_campaign(self, campaign_id: str) -> dict:
        with self._lock:
            got = self._conn.execute(
                "SELECT * FROM campaigns WHERE id = ?", (campaign_id,)
            ).fetchone()
        if got is None:
            raise KeyError(campaign_id)
        out = dict(got)
        out["config"] = json.loads(out.pop("config_json"))
        return out

    def list_campaigns(self) -> list[dict]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT id FROM campaigns ORDER BY created_at, id"
            ).fetchall()
        return [self.get_campaign(r["id"]) for r in rows]

    # reports

    def add_report(
        self,
        campaign_id: str,
        worker_id: str,
        url_a: str,
        url_b: str,
        now: float | None = None,
    ) -> dict:
        key_lo, key_hi = sorted((url_a, url_b))
        row = {
            "id": _new_id(),
            "campaign_id": campaign_id,
            "worker_id": worker_id,
            "url_a": url_a,
            "url_b": url_b,
            "key_lo": key_lo,
            "key_hi": key_hi,
            "status": "pending",
            "submitted_at": now if now is not None else time.time(),
        }
        try:
            with self._lock, self._conn:
                self._conn.execute(
                    "INSERT INTO reports (id, campaign_id, worker_id, url_a,"
                    " url_b, key_lo, key_hi, status, submitted_at)"
                    " VALUES (:id, :campaign_id, :worker_id, :url_a, :url_b,"
                    " :key_lo, :key_hi, :status, :submitted_at)",
                    row,
                )
        except sqlite3.IntegrityError:
            with self._lock:
                existing = self._conn.execute(
                    "SELECT id FROM reports WHERE campaign_id = ? AND"
                    " key_lo = ? AND key_hi = ?",
                    (campaign_id, key_lo, key_hi),
                ).fetchone()
            raise DuplicateReport(existing["id"]) from None
        return self.get_report(row["id"])

    def get_report(self, report_id: str) -> dict:
        with self._lock:
            got = self._conn.execute(
                "SELECT * FROM reports WHERE id = ?", (report_id,)
            ).fetchone()
        if got is None:
            raise KeyError(report_id)
        out = dict(got)
        raw = out.pop("reward_json")
        out["reward"] = json.loads(raw) if raw else None
        return out

    def claim_report(self, report_id: str) -> bool:
        """pending -> processing; False when someone else already claimed it."""
        with self._lock, self._conn:
            cur = self._conn.execute(
                "UPDATE reports SET status = 'processing'"
                " WHERE id = ? AND status = 'pending'",
                (report_id,),
            )
            return cur.rowcount == 1

    def complete_report(
        self,
        report_id: str,
        pairs: list[dict],
        reward: dict,
        now: float | None = None,
    ) -> dict:
        """processing -> done: store pairs, reward, and pay exactly once.

        Reprocessing an already-paid report replaces its pairs but skips the
        ledger append; the UNIQUE constraint backs that rule up.
        """
        stamp = now if now is not None else time.time()
        with self._lock, self._conn:
            report = self.get_report(report_id)
            cur = self._conn.execute(
                "UPDATE reports SET status = 'done', failure_reason = NULL,"
                " pair_count = ?, reward_json = ?, completed_at = ?"
                " WHERE id = ? AND status = 'processing'",
                (
                    len(pairs),
                    json.dumps(reward, ensure_ascii=False, sort_keys=True),
                    stamp,
                    report_id,
                ),
            )
            if cur.rowcount != 1:
                raise ValueError(f"report {report_id} is not processing")
            self._conn.execute("DELETE FROM pairs WHERE report_id = ?", (report_id,))
            for position, pair in enumerate(pairs):
                self._conn.execute(
                    "INSERT INTO pairs (report_id, campaign_id, position, src,"
                    " tgt, cost, s_a, s_d, h_in, h_gen) VALUES (?,?,?,?,?,?,?,?,?,?)",
                    (
                        report_id,
                        report["campaign_id"],
                        position,
                        pair["src"],
                        pair["tgt"],
                        pair["cost"],
                        pair["s_a"],
                        pair["s_d"],
                        pair["h_in"],
                        pair["h_gen"],
                    ),
                )
            paid = self._conn.execute(
                "SELECT 1 FROM ledger WHERE report_id = ?", (report_id,)
            ).fetchone()
            if paid is None:
                self._conn.execute(
                    "INSERT INTO ledger (worker_id, report_id, campaign_id,"
                    " amount, created_at) VALUES (?,?,?,?,?)",
                    (
                        report["worker_id"],
                        report_id,
                        report["campaign_id"],
                        int(reward["final"]),
                        stamp,
                    ),
                )
        return self.get_report(report_id)

    def fail_report(self, report_id: str, reason: str, now: float | None = None) -> dict:
        with self._lock, self._conn:
            cur = self._conn.execute(
                "UPDATE reports SET status = 'failed', failure_reason = ?,"
                " completed_at = ? WHERE id = ? AND status = 'processing'",
                (reason, now if now is not None else time.time(), report_id),
            )
            if cur.rowcount != 1:
                raise ValueError(f"report {report_id} is not processing")
        return self.get_report(report_id)

    def requeue_report(self, report_id: str) -> dict:
        """done/failed -> processing, for an admin-triggered reprocess."""
        with self._lock, self._conn:
            self.get_report(report_id)  # KeyError on unknown id
            cur = self._conn.execute(
                "UPDATE reports SET status = 'processing'"
                " WHERE id = ? AND status IN ('done', 'failed')",
                (report_id,),
            )
            if cur.rowcount != 1:
                raise ValueError(f"report {report_id} is not reprocessable")
        return self.get_report(report_id)

    def reports_for_worker(
        self, worker_id: str, campaign_id: str | None = None
    ) -> list[dict]:
        query = "SELECT id FROM reports WHERE worker_id = ?"
        args: list = [worker_id]
        if campaign_id is not None:
            query += " AND campaign_id = ?"
            args.append(campaign_id)
        query += " ORDER BY submitted_at, id"
        with self._lock:
            rows = self._conn.execute(query, args).fetchall()
        return [self.get_report(r["id"]) for r in rows]

    def pending_report_ids(self) -> list[str]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT id FROM reports WHERE status = 'pending'"
                " ORDER BY submitted_at, id"
            ).fetchall()
        return [r["id"] for r in rows]

    def open_report_count(self) -> int:
        with self._lock:
            got = self._conn.execute(
                "SELECT COUNT(*) FROM reports"
                " WHERE status IN ('pending', 'processing')"
            ).fetchone()
        return int(got[0])

    # pairs, stats, money

    def pairs_for_report(self, report_id: str) -> list[dict]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT * FROM pairs WHERE report_id = ? ORDER BY position",
                (report_id,),
            ).fetchall()
        return [dict(r) for r in rows]

    def export_rows(self, campaign_id: str, max_cost: float) -> list[dict]:
        """Deduplicated (src, tgt) rows at cost <= max_cost, cheapest first.

        A pair extracted by several reports exports once, at its lowest cost.
        """
        with self._lock:
            rows = self._conn.execute(
                "SELECT src, tgt, MIN(cost) AS cost FROM pairs"
                " WHERE campaign_id = ? GROUP BY src, tgt HAVING MIN(cost) <= ?"
                " ORDER BY cost, src, tgt",
                (campaign_id, max_cost),
            ).fetchall()
        return [dict(r) for r in rows]

    def stats_rows(self, campaign_id: str) -> list[dict]:
        """Per-day (reports, sentences, payout) over done reports, plus cumulatives."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT date(completed_at, 'unixepoch') AS day,"
                " COUNT(*) AS reports, SUM(pair_count) AS sentences"
                " FROM reports WHERE campaign_id = ? AND status = 'done'"
                " GROUP BY day ORDER BY day",
                (campaign_id,),
            ).fetchall()
            payouts = dict(
                self._conn.execute(
                    "SELECT date(created_at, 'unixepoch') AS day,"
                    " SUM(amount) AS payout FROM ledger WHERE campaign_id = ?"
                    " GROUP BY day",
                    (campaign_id,),
                ).fetchall()
            )
        out = []
        cumulative_sentences = 0
        cumulative_payout = 0
        for row in rows:
            sentences = row["sentences"] or 0
            payout = payouts.get(row["day"], 0) or 0
            cumulative_sentences += sentences
            cumulative_payout += payout
            out.append(
                {
                    "day": row["day"],
                    "reports": row["reports"],
                    "sentences": sentences,
                    "payout": payout,
                    "cumulative_sentences": cumulative_sentences,
                    "cumulative_payout": cumulative_payout,
                }
            )
        return out

    def ledger_for_worker(self, worker_id: str) -> list[dict]:
        with self._lock:
            rows = self._conn.execute(
                "SELECT seq, worker_id, report_id, campaign_id, amount,"
                " created_at FROM ledger WHERE worker_id = ? ORDER BY seq",
                (worker_id,),
            ).fetchall()
        return [dict(r) for r in rows]

    def ledger_total(self, campaign_id: str) -> int:
        with self._lock:
            got = self._conn.execute(
                "SELECT COALESCE(SUM(amount), 0) AS total FROM ledger"
                " WHERE campaign_id = ?",
                (campaign_id,),
            ).fetchone()
        return int(got["total"])
