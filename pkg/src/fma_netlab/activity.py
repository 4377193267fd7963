"""Contribution-based influence: merged pull requests, issues, and metric correlations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError, DegenerateMetricError, UndefinedRatioError

ACTIVITY_METRICS = ("merged_pr_count", "submitted_pr_count", "issue_count", "repo_count")


@dataclass(frozen=True)
class ActivityRecord:
    user: int
    merged_pr_count: int = 0
    submitted_pr_count: int = 0
    issue_count: int = 0
    repo_count: int = 0
    login: str = ""

    def __post_init__(self):
        counts = (self.merged_pr_count, self.submitted_pr_count, self.issue_count, self.repo_count)
        if min(counts) < 0:
            raise DataError(f"negative activity count for user {self.user}")
        if self.merged_pr_count > self.submitted_pr_count:
            raise DataError(
                f"user {self.user}: merged_pr_count {self.merged_pr_count} exceeds "
                f"submitted_pr_count {self.submitted_pr_count}")


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    rho: np.ndarray

    def __getitem__(self, pair: tuple[str, str]) -> float:
        a, b = pair
        return float(self.rho[self.labels.index(a), self.labels.index(b)])


def _ranking(records: Sequence[ActivityRecord], key: str, k: int | None) -> list[ActivityRecord]:
    ranked = sorted(records, key=lambda r: (-getattr(r, key), r.user))
    return ranked if k is None else ranked[:k]


def merged_pr_ranking(records: Sequence[ActivityRecord], k: int | None = None) -> list[ActivityRecord]:
    return _ranking(records, "merged_pr_count", k)


def issue_ranking(records: Sequence[ActivityRecord], k: int | None = None) -> list[ActivityRecord]:
    return _ranking(records, "issue_count", k)


def merge_ratio(r: ActivityRecord) -> float:
    """Merged over submitted pull requests.

    Not used in any ranking: a user with few, mostly accepted, requests scores
    higher than a heavy contributor with some rejections.
    """
    if r.submitted_pr_count == 0:
        raise UndefinedRatioError(f"user {r.user} submitted no pull requests")
    return r.merged_pr_count / r.submitted_pr_count


def pearson_matrix(records: Sequence[ActivityRecord], metrics: Sequence[str] = ACTIVITY_METRICS,
                   extra: Mapping[str, Mapping[int, float]] | None = None) -> CorrelationMatrix:
    """Sample Pearson correlation between metrics.

    ``metrics`` may name record fields or keys of ``extra``, which maps a metric
    name to per-user values (e.g. follower counts); every record's user must be
    present in each extra metric used.
    """
    if len(records) < 2:
        raise DataError("pearson_matrix needs at least two records")
    extra = extra or {}
    cols = []
    for name in metrics:
        if name in extra:
            vals = [extra[name][r.user] for r in records]
        elif name in ACTIVITY_METRICS:
            vals = [getattr(r, name) for r in records]
        else:
            raise DataError(f"unknown metric {name!r}")
        x = np.asarray(vals, dtype=float)
        x = x - x.mean()
        norm = np.sqrt(x @ x)
        if norm == 0 or not np.isfinite(norm):
            raise DegenerateMetricError(name)
        cols.append(x / norm)
    z = np.vstack(cols)
    rho = np.clip(z @ z.T, -1.0, 1.0)
    rho = (rho + rho.T) / 2
    np.fill_diagonal(rho, 1.0)
    return CorrelationMatrix(tuple(metrics), rho)


def join_top_users(ranking: Sequence[tuple[int, float]], records: Sequence[ActivityRecord]) -> list[ActivityRecord]:
    """Records of ranked users that also have activity data, in ranking order."""
    by_user = {r.user: r for r in records}
    return [by_user[u] for u, _ in ranking if u in by_user]
