"""Readers and writers for the on-disk formats, plus the API fetch planner.

users.csv    ``id,login,created_at,type,fake,deleted`` (type USR|ORG, flags 0|1)
follows.csv  ``follower_id,followee_id,created_at``
activity.json  array of objects with ``user_id, login, merged_pr_count,
               submitted_pr_count, issue_count, repo_count``

Timestamps are ISO-8601 and read as UTC; a missing offset means UTC. Malformed
rows never vanish: each one is reported with its line number.
"""
from __future__ import annotations

import csv
import json
import math
from array import array
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

import numpy as np

from ._io import atomic_open, sha256_file
from .activity import ActivityRecord
from .errors import ConfigError, DataError
from .graph import EdgeTable, TemporalGraph, UserTable, build_graph

USERS_HEADER = ["id", "login", "created_at", "type", "fake", "deleted"]
FOLLOWS_HEADER = ["follower_id", "followee_id", "created_at"]
ACTIVITY_FIELDS = ("user_id", "login", "merged_pr_count", "submitted_pr_count", "issue_count", "repo_count")


def parse_timestamp(text: str) -> int:
    s = text.strip()
    if not s:
        raise ValueError("empty timestamp")
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    ts = dt.timestamp()
    if ts != int(ts):
        raise ValueError("sub-second timestamps are not supported")
    return int(ts)


def format_timestamp(ts: int) -> str:
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class _TimestampCache(dict):
    def __missing__(self, key):
        value = self[key] = parse_timestamp(key)
        return value


@dataclass(frozen=True)
class RowError:
    line: int
    reason: str


@dataclass
class LoadReport:
    path: str
    rows_read: int = 0
    rows_loaded: int = 0
    errors: list[RowError] = field(default_factory=list)

    @property
    def rows_reported(self) -> int:
        return len(self.errors)

    def as_dict(self) -> dict:
        return {
            "path": self.path,
            "rows_read": self.rows_read,
            "rows_loaded": self.rows_loaded,
            "rows_reported": self.rows_reported,
            "errors": [{"line": e.line, "reason": e.reason} for e in self.errors],
        }


@dataclass
class Loaded:
    records: object  # UserTable | EdgeTable | list[ActivityRecord]
    report: LoadReport

    def __iter__(self):
        # allows ``records, report = load_...(path)``
        return iter((self.records, self.report))


def _open_csv(path, header):
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    reader = csv.reader(fh)
    got = next(reader, None)
    if got is None or [h.strip() for h in got] != header:
        fh.close()
        raise DataError(f"{path}: expected header {','.join(header)!r}, got {','.join(got or [])!r}")
    return fh, reader


def _nonneg_int(text: str, what: str) -> int:
    v = int(text)
    if v < 0:
        raise ValueError(f"{what} must be >= 0")
    return v


def _flag(text: str, what: str) -> bool:
    t = text.strip()
    if t not in ("0", "1"):
        raise ValueError(f"{what} must be 0 or 1")
    return t == "1"


def load_users_csv(path) -> Loaded:
    fh, reader = _open_csv(path, USERS_HEADER)
    report = LoadReport(str(path))
    ids, created = array("q"), array("q")
    is_org, fake, deleted = bytearray(), bytearray(), bytearray()
    logins = []
    seen = set()
    stamps = _TimestampCache()
    with fh:
        for row in reader:
            report.rows_read += 1
            line = reader.line_num
            try:
                if len(row) != 6:
                    raise ValueError(f"expected 6 fields, got {len(row)}")
                uid = _nonneg_int(row[0], "id")
                login = row[1].strip()
                if not login:
                    raise ValueError("empty login")
                ts = stamps[row[2]]
                kind = row[3].strip()
                if kind not in ("USR", "ORG"):
                    raise ValueError(f"type must be USR or ORG, got {kind!r}")
                fk, dl = _flag(row[4], "fake"), _flag(row[5], "deleted")
                if uid in seen:
                    raise ValueError(f"duplicate id {uid}")
            except ValueError as exc:
                report.errors.append(RowError(line, str(exc)))
                continue
            seen.add(uid)
            ids.append(uid)
            logins.append(login)
            created.append(ts)
            is_org.append(kind == "ORG")
            fake.append(fk)
            deleted.append(dl)
    report.rows_loaded = len(ids)
    table = UserTable(
        ids=np.frombuffer(ids, dtype=np.int64).copy(),
        logins=logins,
        created_at=np.frombuffer(created, dtype=np.int64).copy(),
        is_org=np.frombuffer(bytes(is_org), dtype=bool).copy(),
        fake=np.frombuffer(bytes(fake), dtype=bool).copy(),
        deleted=np.frombuffer(bytes(deleted), dtype=bool).copy(),
    )
    return Loaded(table, report)


def load_follows_csv(path) -> Loaded:
    fh, reader = _open_csv(path, FOLLOWS_HEADER)
    report = LoadReport(str(path))
    fol, fee, created = array("q"), array("q"), array("q")
    stamps = _TimestampCache()
    with fh:
        for row in reader:
            report.rows_read += 1
            try:
                if len(row) != 3:
                    raise ValueError(f"expected 3 fields, got {len(row)}")
                a = _nonneg_int(row[0], "follower_id")
                b = _nonneg_int(row[1], "followee_id")
                ts = stamps[row[2]]
            except ValueError as exc:
                report.errors.append(RowError(reader.line_num, str(exc)))
                continue
            fol.append(a)
            fee.append(b)
            created.append(ts)
    report.rows_loaded = len(fol)
    table = EdgeTable(
        follower=np.frombuffer(fol, dtype=np.int64).copy(),
        followee=np.frombuffer(fee, dtype=np.int64).copy(),
        created_at=np.frombuffer(created, dtype=np.int64).copy(),
    )
    return Loaded(table, report)


def _activity_record(obj) -> ActivityRecord:
    if not isinstance(obj, dict):
        raise ValueError("entry is not an object")
    missing = [k for k in ACTIVITY_FIELDS if k not in obj]
    if missing:
        raise ValueError(f"missing fields {missing}")
    counts = {}
    for k in ACTIVITY_FIELDS:
        if k == "login":
            continue
        v = obj[k]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ValueError(f"{k} must be an integer")
        counts[k] = v
    if not isinstance(obj["login"], str):
        raise ValueError("login must be a string")
    try:
        return ActivityRecord(
            user=counts["user_id"], merged_pr_count=counts["merged_pr_count"],
            submitted_pr_count=counts["submitted_pr_count"], issue_count=counts["issue_count"],
            repo_count=counts["repo_count"], login=obj["login"])
    except DataError as exc:
        raise ValueError(str(exc)) from exc


def load_activity_json(*paths) -> Loaded:
    """Load one or more activity files (e.g. API pages) and concatenate them.

    Line numbers in the report are 1-based entry positions across all pages.
    """
    if not paths:
        raise ConfigError("no activity files given")
    report = LoadReport(",".join(str(p) for p in paths))
    records, seen = [], set()
    pos = 0
    for path in paths:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise DataError(f"cannot open {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: malformed JSON: {exc}") from exc
        if not isinstance(data, list):
            raise DataError(f"{path}: expected a JSON array")
        for obj in data:
            pos += 1
            report.rows_read += 1
            try:
                rec = _activity_record(obj)
                if rec.user in seen:
                    raise ValueError(f"duplicate user_id {rec.user}")
            except ValueError as exc:
                report.errors.append(RowError(pos, str(exc)))
                continue
            seen.add(rec.user)
            records.append(rec)
    report.rows_loaded = len(records)
    return Loaded(records, report)


# --- writers -------------------------------------------------------------

def _user_table(users) -> UserTable:
    if isinstance(users, TemporalGraph):
        return users.user_table()
    return users if isinstance(users, UserTable) else UserTable.from_records(users)


def _edge_table(edges) -> EdgeTable:
    if isinstance(edges, TemporalGraph):
        return edges.edge_table()
    return edges if isinstance(edges, EdgeTable) else EdgeTable.from_records(edges)


class _FormatCache(dict):
    def __missing__(self, key):
        value = self[key] = format_timestamp(key)
        return value


def write_users_csv(path, users) -> None:
    t = _user_table(users)
    order = np.argsort(t.ids, kind="stable")
    fmt = _FormatCache()
    with atomic_open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(USERS_HEADER)
        ids, created = t.ids.tolist(), t.created_at.tolist()
        org, fake, dele = t.is_org.tolist(), t.fake.tolist(), t.deleted.tolist()
        w.writerows(
            (ids[i], t.logins[i], fmt[created[i]], "ORG" if org[i] else "USR", int(fake[i]), int(dele[i]))
            for i in order.tolist())


def write_follows_csv(path, edges) -> None:
    t = _edge_table(edges)
    order = np.lexsort((t.created_at, t.followee, t.follower))
    fmt = _FormatCache()
    with atomic_open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FOLLOWS_HEADER)
        a, b, c = t.follower[order].tolist(), t.followee[order].tolist(), t.created_at[order].tolist()
        w.writerows((x, y, fmt[z]) for x, y, z in zip(a, b, c))


def write_activity_json(path, records: Iterable[ActivityRecord]) -> None:
    rows = [
        {"user_id": r.user, "login": r.login, "merged_pr_count": r.merged_pr_count,
         "submitted_pr_count": r.submitted_pr_count, "issue_count": r.issue_count,
         "repo_count": r.repo_count}
        for r in sorted(records, key=lambda r: r.user)
    ]
    with atomic_open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(rows, fh, indent=1)
        fh.write("\n")


# --- manifest --------------------------------------------------------------

@dataclass
class DatasetManifest:
    users_path: str
    follows_path: str
    activity_path: str | None
    counts: dict
    checksums: dict
    time_range: tuple[int, int] | None
    load_reports: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "users_path": self.users_path,
            "follows_path": self.follows_path,
            "activity_path": self.activity_path,
            "counts": self.counts,
            "checksums": self.checksums,
            "time_range": list(self.time_range) if self.time_range else None,
            "load_reports": self.load_reports,
        }


def load_dataset(users_path, follows_path, activity_path=None):
    """Load and build a dataset; returns ``(graph, activity_records_or_None, manifest)``."""
    users, ur = load_users_csv(users_path)
    edges, er = load_follows_csv(follows_path)
    g = build_graph(users, edges)
    reports = {str(users_path): ur, str(follows_path): er}
    counts = {"users": ur.rows_loaded, "follows": er.rows_loaded, "graph_users": g.n_users,
              "graph_edges": g.n_edges}
    activity = None
    if activity_path is not None:
        activity, ar = load_activity_json(activity_path)
        reports[str(activity_path)] = ar
        counts["activity"] = ar.rows_loaded
    manifest = DatasetManifest(
        users_path=str(users_path), follows_path=str(follows_path),
        activity_path=str(activity_path) if activity_path is not None else None,
        counts=counts,
        checksums={p: sha256_file(p) for p in sorted(reports)},
        time_range=g.time_range,
        load_reports={p: r.as_dict() for p, r in sorted(reports.items())},
    )
    return g, activity, manifest


# --- fetch planning ----------------------------------------------------------

@dataclass(frozen=True)
class FetchPlan:
    total_requests: int
    limit_per_window: int
    window: int  # seconds
    schedule: tuple[tuple[int, int], ...]  # (window index, requests)

    @property
    def n_windows(self) -> int:
        return len(self.schedule)

    @property
    def duration(self) -> int:
        """Lower bound on wall-clock seconds: every window but the last must elapse."""
        return max(self.n_windows - 1, 0) * self.window


def plan_fetch(total_requests: int, limit_per_window: int = 5000, window: int = 3600) -> FetchPlan:
    """Pack requests greedily into rate-limit windows."""
    if total_requests < 0:
        raise ConfigError("total_requests must be >= 0")
    if limit_per_window < 1:
        raise ConfigError("limit_per_window must be >= 1")
    n = math.ceil(total_requests / limit_per_window)
    sched = tuple((i, min(limit_per_window, total_requests - i * limit_per_window)) for i in range(n))
    return FetchPlan(total_requests, limit_per_window, window, sched)
