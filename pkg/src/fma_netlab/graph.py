"""Temporal directed follower network.

Storage is columnar: users are kept sorted by id and addressed by a dense
index ``0..n-1``; edges are parallel ``src``/``dst``/``created_at`` arrays of
dense indices, sorted by ``(src, dst)``. A built graph is never mutated.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ConfigError


class UserKind(str, Enum):
    INDIVIDUAL = "individual"
    ORGANIZATION = "organization"


@dataclass(frozen=True)
class UserRecord:
    id: int
    login: str
    created_at: int
    kind: UserKind = UserKind.INDIVIDUAL
    fake: bool = False
    deleted: bool = False


@dataclass(frozen=True)
class FollowEdge:
    follower: int
    followee: int
    created_at: int


@dataclass
class UserTable:
    """Column-oriented list of users, the bulk form of ``list[UserRecord]``."""

    ids: np.ndarray
    logins: list
    created_at: np.ndarray
    is_org: np.ndarray
    fake: np.ndarray
    deleted: np.ndarray

    @classmethod
    def empty(cls) -> "UserTable":
        return cls.from_records([])

    @classmethod
    def from_records(cls, records: Iterable[UserRecord]) -> "UserTable":
        records = list(records)
        return cls(
            ids=np.fromiter((r.id for r in records), dtype=np.int64, count=len(records)),
            logins=[r.login for r in records],
            created_at=np.fromiter((r.created_at for r in records), dtype=np.int64, count=len(records)),
            is_org=np.fromiter((UserKind(r.kind) is UserKind.ORGANIZATION for r in records), dtype=bool, count=len(records)),
            fake=np.fromiter((bool(r.fake) for r in records), dtype=bool, count=len(records)),
            deleted=np.fromiter((bool(r.deleted) for r in records), dtype=bool, count=len(records)),
        )

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[UserRecord]:
        for i in range(len(self.ids)):
            yield UserRecord(
                id=int(self.ids[i]),
                login=self.logins[i],
                created_at=int(self.created_at[i]),
                kind=UserKind.ORGANIZATION if self.is_org[i] else UserKind.INDIVIDUAL,
                fake=bool(self.fake[i]),
                deleted=bool(self.deleted[i]),
            )

    def take(self, idx: np.ndarray) -> "UserTable":
        return UserTable(
            ids=self.ids[idx],
            logins=[self.logins[i] for i in np.asarray(idx).tolist()],
            created_at=self.created_at[idx],
            is_org=self.is_org[idx],
            fake=self.fake[idx],
            deleted=self.deleted[idx],
        )


@dataclass
class EdgeTable:
    """Column-oriented list of follow edges keyed by user id (not dense index)."""

    follower: np.ndarray
    followee: np.ndarray
    created_at: np.ndarray

    @classmethod
    def from_records(cls, records: Iterable[FollowEdge]) -> "EdgeTable":
        records = list(records)
        n = len(records)
        return cls(
            follower=np.fromiter((e.follower for e in records), dtype=np.int64, count=n),
            followee=np.fromiter((e.followee for e in records), dtype=np.int64, count=n),
            created_at=np.fromiter((e.created_at for e in records), dtype=np.int64, count=n),
        )

    def __len__(self) -> int:
        return len(self.follower)

    def __iter__(self) -> Iterator[FollowEdge]:
        for a, b, t in zip(self.follower.tolist(), self.followee.tolist(), self.created_at.tolist()):
            yield FollowEdge(a, b, t)


@dataclass
class BuildReport:
    users_in: int = 0
    duplicate_users: int = 0
    edges_in: int = 0
    self_follows: int = 0
    unknown_endpoint: int = 0
    duplicate_edges: int = 0
    # kept, only counted
    edge_before_endpoint: int = 0

    @property
    def dropped_edges(self) -> int:
        return self.self_follows + self.unknown_endpoint + self.duplicate_edges

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["dropped_edges"] = self.dropped_edges
        return d


@dataclass(frozen=True, eq=False)
class TemporalGraph:
    user_ids: np.ndarray
    logins: Sequence[str]
    created_at: np.ndarray
    is_org: np.ndarray
    fake: np.ndarray
    deleted: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    edge_created: np.ndarray
    report: BuildReport | None = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("user_ids", "created_at", "is_org", "fake", "deleted", "src", "dst", "edge_created"):
            getattr(self, name).setflags(write=False)

    def __repr__(self):
        return f"TemporalGraph(n_users={self.n_users}, n_edges={self.n_edges})"

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_edges(self) -> int:
        return len(self.src)

    @cached_property
    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n_users)

    @cached_property
    def out_degree(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n_users)

    @cached_property
    def out_adj(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR ``(indptr, followees)``; edges are already sorted by source."""
        indptr = np.zeros(self.n_users + 1, dtype=np.int64)
        np.cumsum(self.out_degree, out=indptr[1:])
        return indptr, self.dst

    @cached_property
    def in_adj(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR ``(indptr, followers)``."""
        order = np.lexsort((self.src, self.dst))
        indptr = np.zeros(self.n_users + 1, dtype=np.int64)
        np.cumsum(self.in_degree, out=indptr[1:])
        return indptr, self.src[order]

    def followers_of(self, i: int) -> np.ndarray:
        indptr, idx = self.in_adj
        return idx[indptr[i]:indptr[i + 1]]

    def followees_of(self, i: int) -> np.ndarray:
        indptr, idx = self.out_adj
        return idx[indptr[i]:indptr[i + 1]]

    def index_of(self, user_id) -> np.ndarray | int:
        ids = np.asarray(user_id, dtype=np.int64)
        pos = np.searchsorted(self.user_ids, ids)
        pos_c = np.minimum(pos, max(self.n_users - 1, 0))
        if self.n_users == 0 or np.any(self.user_ids[pos_c] != ids):
            raise KeyError(user_id)
        return int(pos) if pos.ndim == 0 else pos

    def user_table(self) -> UserTable:
        return UserTable(self.user_ids, list(self.logins), self.created_at, self.is_org, self.fake, self.deleted)

    def edge_table(self) -> EdgeTable:
        return EdgeTable(self.user_ids[self.src], self.user_ids[self.dst], self.edge_created)

    def users(self) -> list[UserRecord]:
        return list(self.user_table())

    def edges(self) -> list[FollowEdge]:
        return list(self.edge_table())

    @property
    def time_range(self) -> tuple[int, int] | None:
        if self.n_users == 0:
            return None
        hi = self.created_at.max()
        if self.n_edges:
            hi = max(hi, self.edge_created.max())
        return int(self.created_at.min()), int(hi)

    def same_as(self, other: "TemporalGraph") -> bool:
        """Structural equality: identical users, attributes, edges and timestamps."""
        arrays = ("user_ids", "created_at", "is_org", "fake", "deleted", "src", "dst", "edge_created")
        return all(np.array_equal(getattr(self, a), getattr(other, a)) for a in arrays) and list(
            self.logins
        ) == list(other.logins)


@dataclass(frozen=True)
class Snapshot:
    as_of: int
    graph: TemporalGraph


def _as_user_table(users) -> UserTable:
    return users if isinstance(users, UserTable) else UserTable.from_records(users)


def _as_edge_table(edges) -> EdgeTable:
    return edges if isinstance(edges, EdgeTable) else EdgeTable.from_records(edges)


def _dedupe_users(users: UserTable, report: BuildReport) -> UserTable:
    order = np.lexsort((users.created_at, users.ids))
    ids = users.ids[order]
    first = np.ones(len(ids), dtype=bool)
    first[1:] = ids[1:] != ids[:-1]
    if first.all():
        return users.take(order)
    # duplicate ids: keep the earliest record; remaining ties resolved on the full record
    keep = []
    order_l = order.tolist()
    starts = np.flatnonzero(first).tolist() + [len(ids)]
    for a, b in zip(starts[:-1], starts[1:]):
        group = order_l[a:b]
        if len(group) > 1:
            group = sorted(group, key=lambda i: (
                int(users.created_at[i]), users.logins[i], bool(users.is_org[i]),
                bool(users.fake[i]), bool(users.deleted[i])))
        keep.append(group[0])
    report.duplicate_users = len(ids) - len(keep)
    return users.take(np.asarray(keep, dtype=np.int64))


def build_graph(users, edges) -> TemporalGraph:
    """Build an immutable graph from user and edge records (lists or tables).

    Self-follows, edges with an unknown endpoint and repeated follower/followee
    pairs are dropped (the earliest timestamp of a repeated pair survives).
    Edges that predate one of their endpoints are kept and counted.
    """
    users = _as_user_table(users)
    edges = _as_edge_table(edges)
    report = BuildReport(users_in=len(users), edges_in=len(edges))
    users = _dedupe_users(users, report)
    n = len(users)

    fol, fee, t = edges.follower, edges.followee, edges.created_at
    selfish = fol == fee
    report.self_follows = int(selfish.sum())

    if n:
        s = np.searchsorted(users.ids, fol)
        d = np.searchsorted(users.ids, fee)
        known = (s < n) & (d < n)
        known[known] &= (users.ids[s[known]] == fol[known]) & (users.ids[d[known]] == fee[known])
    else:
        s = d = np.zeros(len(fol), dtype=np.int64)
        known = np.zeros(len(fol), dtype=bool)
    report.unknown_endpoint = int((~known & ~selfish).sum())

    ok = known & ~selfish
    s, d, t = s[ok], d[ok], t[ok]
    order = np.lexsort((t, d, s))
    s, d, t = s[order], d[order], t[order]
    first = np.ones(len(s), dtype=bool)
    first[1:] = (s[1:] != s[:-1]) | (d[1:] != d[:-1])
    report.duplicate_edges = int(len(s) - first.sum())
    s, d, t = s[first], d[first], t[first]
    report.edge_before_endpoint = int(np.count_nonzero((t < users.created_at[s]) | (t < users.created_at[d])))

    return TemporalGraph(
        user_ids=users.ids,
        logins=tuple(users.logins),
        created_at=users.created_at,
        is_org=users.is_org,
        fake=users.fake,
        deleted=users.deleted,
        src=s.astype(np.int64, copy=False),
        dst=d.astype(np.int64, copy=False),
        edge_created=t.astype(np.int64, copy=False),
        report=report,
    )


def subgraph(g: TemporalGraph, keep: np.ndarray, edge_mask: np.ndarray | None = None) -> TemporalGraph:
    """Induced subgraph on the users where ``keep`` is true.

    ``edge_mask`` optionally removes further edges. Relative order is preserved,
    so the result is still canonically sorted.
    """
    keep = np.asarray(keep, dtype=bool)
    new_index = np.cumsum(keep) - 1
    emask = keep[g.src] & keep[g.dst]
    if edge_mask is not None:
        emask &= edge_mask
    idx = np.flatnonzero(keep)
    return TemporalGraph(
        user_ids=g.user_ids[idx],
        logins=tuple(g.logins[i] for i in idx.tolist()),
        created_at=g.created_at[idx],
        is_org=g.is_org[idx],
        fake=g.fake[idx],
        deleted=g.deleted[idx],
        src=new_index[g.src[emask]],
        dst=new_index[g.dst[emask]],
        edge_created=g.edge_created[emask],
    )


@dataclass(frozen=True)
class FilterStage:
    name: str
    users: int
    links: int


def filter_stages(g: TemporalGraph, min_followers: int = 5, drop_orgs: bool = True,
                  drop_fake: bool = True) -> tuple[TemporalGraph, list[FilterStage]]:
    """Run the two-stage filter and return the result with per-stage counts."""
    if min_followers < 0:
        raise ConfigError("min_followers must be >= 0")
    stages = [FilterStage("original", g.n_users, g.n_edges)]

    flagged = np.zeros(g.n_users, dtype=bool)
    if drop_orgs:
        flagged |= g.is_org
    if drop_fake:
        flagged |= g.fake | g.deleted
    g = subgraph(g, ~flagged)
    stages.append(FilterStage("after_flag_filter", g.n_users, g.n_edges))

    # single pass: degrees measured once on the flag-filtered graph
    g = subgraph(g, g.in_degree > min_followers)
    stages.append(FilterStage("after_degree_filter", g.n_users, g.n_edges))
    return g, stages


def filter_graph(g: TemporalGraph, min_followers: int = 5, drop_orgs: bool = True,
                 drop_fake: bool = True) -> TemporalGraph:
    """Drop flagged users (orgs, fake/deleted), then users with at most ``min_followers`` followers."""
    return filter_stages(g, min_followers, drop_orgs, drop_fake)[0]


def snapshot_at(g: TemporalGraph, t: int) -> Snapshot:
    """Users and edges created at or before ``t``.

    An edge whose timestamp precedes one of its endpoints' creation stays out
    of the snapshot until both endpoints exist.
    """
    return Snapshot(int(t), subgraph(g, g.created_at <= t, g.edge_created <= t))
