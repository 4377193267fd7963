"""Influence rankings over the follow graph: follower count, PageRank, HITS."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Mapping

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DataError, NumericError
from .graph import TemporalGraph

Metric = Literal["in_degree", "pagerank", "hits_authority", "hits_hub"]


@dataclass(frozen=True, eq=False)
class CentralityScores:
    """Per-user scores for one metric, aligned with ``user_ids``."""

    metric: Metric
    user_ids: np.ndarray
    values: np.ndarray
    iterations: int = 0
    converged: bool = True

    def __len__(self):
        return len(self.user_ids)

    def __getitem__(self, user_id):
        i = np.searchsorted(self.user_ids, user_id)
        if i >= len(self.user_ids) or self.user_ids[i] != user_id:
            raise KeyError(user_id)
        return self.values[i].item()

    def as_dict(self) -> dict:
        return dict(zip(self.user_ids.tolist(), self.values.tolist()))

    @classmethod
    def from_mapping(cls, metric: Metric, scores: Mapping) -> "CentralityScores":
        ids = np.array(sorted(scores), dtype=np.int64)
        vals = np.array([scores[i] for i in ids.tolist()], dtype=float)
        return cls(metric, ids, vals)


@dataclass(frozen=True)
class PageRankConfig:
    damping: float = 0.85
    tolerance: float = 1e-9
    max_iterations: int = 200
    dangling_policy: Literal["uniform_redistribution"] = "uniform_redistribution"

    def __post_init__(self):
        if not 0 < self.damping < 1:
            raise ConfigError("damping must lie in (0, 1)")
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise ConfigError("tolerance must be > 0 and max_iterations >= 1")
        if self.dangling_policy != "uniform_redistribution":
            raise ConfigError(f"unsupported dangling policy {self.dangling_policy!r}")


@dataclass(frozen=True)
class HitsConfig:
    tolerance: float = 1e-12
    max_iterations: int = 200
    normalization: Literal["l1", "l2"] = "l1"

    def __post_init__(self):
        if self.normalization not in ("l1", "l2"):
            raise ConfigError(f"unknown normalization {self.normalization!r}")
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise ConfigError("tolerance must be > 0 and max_iterations >= 1")


def in_degree_centrality(g: TemporalGraph) -> CentralityScores:
    return CentralityScores("in_degree", g.user_ids, g.in_degree.astype(np.int64))


def _adjacency(g: TemporalGraph) -> sp.csr_matrix:
    """``A[u, v] = 1`` iff u follows v."""
    n = g.n_users
    data = np.ones(g.n_edges, dtype=float)
    return sp.csr_matrix((data, (g.src, g.dst)), shape=(n, n))


def pagerank(g: TemporalGraph, cfg: PageRankConfig = PageRankConfig()) -> CentralityScores:
    """Power-iteration PageRank; rank flows from follower to followee.

    Mass held by users who follow nobody is spread uniformly over all users.
    """
    n = g.n_users
    if n == 0:
        raise DataError("pagerank of an empty graph")
    outdeg = g.out_degree.astype(float)
    dangling = outdeg == 0
    inv_out = np.divide(1.0, outdeg, out=np.zeros(n), where=~dangling)
    # transition^T: column u spreads 1/outdeg(u) over u's followees
    pt = sp.csr_matrix((inv_out[g.src], (g.dst, g.src)), shape=(n, n))

    d = cfg.damping
    x = np.full(n, 1.0 / n)
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        new = d * (pt @ x)
        new += (d * x[dangling].sum() + (1.0 - d)) / n
        if not np.all(np.isfinite(new)):
            raise NumericError(f"non-finite PageRank value at iteration {it}")
        new /= new.sum()
        delta = np.abs(new - x).sum()
        x = new
        if delta < cfg.tolerance:
            converged = True
            break
    return CentralityScores("pagerank", g.user_ids, x, iterations=it, converged=converged)


def _normalize(v: np.ndarray, norm: str) -> np.ndarray:
    s = np.abs(v).sum() if norm == "l1" else np.sqrt(v @ v)
    if not np.isfinite(s):
        raise NumericError("non-finite HITS value")
    return v / s if s > 0 else v


def hits(g: TemporalGraph, cfg: HitsConfig = HitsConfig()) -> tuple[CentralityScores, CentralityScores]:
    """Hub/authority scores by alternating updates, normalized after each half-step."""
    if g.n_edges == 0:
        raise DataError("HITS is undefined on a graph without edges")
    a_mat = _adjacency(g)
    at_mat = a_mat.T.tocsr()
    n = g.n_users
    hub = np.full(n, 1.0 / n)
    auth = np.zeros(n)
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        new_auth = _normalize(at_mat @ hub, cfg.normalization)
        new_hub = _normalize(a_mat @ new_auth, cfg.normalization)
        change = max(np.abs(new_auth - auth).max(), np.abs(new_hub - hub).max())
        auth, hub = new_auth, new_hub
        if change < cfg.tolerance:
            converged = True
            break
    return (
        CentralityScores("hits_authority", g.user_ids, auth, iterations=it, converged=converged),
        CentralityScores("hits_hub", g.user_ids, hub, iterations=it, converged=converged),
    )


def rank_order(ids: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Indices sorting by value descending, then id ascending."""
    return np.lexsort((ids, -np.asarray(values, dtype=float)))


def top_k(scores: CentralityScores, k: int) -> list[tuple[int, float]]:
    if k < 1:
        raise ConfigError("k must be >= 1")
    order = rank_order(scores.user_ids, scores.values)[:k]
    return [(int(scores.user_ids[i]), scores.values[i].item()) for i in order]
