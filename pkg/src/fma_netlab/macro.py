"""Network-level diagnostics: degree distribution, cohort growth, population growth,
and the first-mover-advantage verdict that combines them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy import optimize, special, stats

from .errors import ConfigError, DataError, InsufficientDataError
from .graph import TemporalGraph

DAY = 86_400
YEAR = 365 * DAY


# --- degree distribution -----------------------------------------------------

@dataclass(frozen=True)
class DegreeHistogram:
    bins: list[tuple[int, int, int]]  # (lower, upper inclusive, users)
    binning: Literal["exact", "logarithmic"]
    total_users: int

    def counts(self) -> dict[int, int]:
        return {lo: c for lo, _, c in self.bins}


def degree_histogram(g: TemporalGraph, binning: Literal["exact", "logarithmic"] = "exact") -> DegreeHistogram:
    """Users per in-degree. Logarithmic bins are ``{0}, {1}, [2,3], [4,7], ...``."""
    deg = g.in_degree
    if binning == "exact":
        counts = np.bincount(deg) if len(deg) else np.zeros(0, dtype=np.int64)
        nz = np.flatnonzero(counts)
        bins = [(int(d), int(d), int(counts[d])) for d in nz]
    elif binning == "logarithmic":
        # bin 0 holds degree 0; bin b >= 1 holds [2**(b-1), 2**b - 1]
        b = np.zeros(len(deg), dtype=np.int64)
        pos = deg > 0
        b[pos] = np.floor(np.log2(deg[pos])).astype(np.int64) + 1
        counts = np.bincount(b) if len(b) else np.zeros(0, dtype=np.int64)
        bins = []
        for k in np.flatnonzero(counts).tolist():
            lo, hi = (0, 0) if k == 0 else (2 ** (k - 1), 2 ** k - 1)
            bins.append((lo, hi, int(counts[k])))
    else:
        raise ConfigError(f"unknown binning {binning!r}")
    return DegreeHistogram(bins, binning, g.n_users)


@dataclass(frozen=True)
class PowerLawFit:
    gamma: float
    xmin: int
    ks_distance: float
    n_tail: int
    n_samples: int


def _as_degrees(data) -> tuple[np.ndarray, np.ndarray]:
    """Unique positive values and their multiplicities."""
    if isinstance(data, DegreeHistogram):
        if data.binning != "exact":
            raise DataError("power-law fitting needs an exact-binned histogram or raw degrees")
        vals = np.array([lo for lo, _, _ in data.bins], dtype=np.int64)
        cnts = np.array([c for _, _, c in data.bins], dtype=np.int64)
    else:
        x = np.asarray(data)
        if x.size and (np.any(x != np.round(x))):
            raise DataError("degrees must be integers")
        vals, cnts = np.unique(x.astype(np.int64), return_counts=True)
    keep = vals > 0
    return vals[keep], cnts[keep]


def _fit_tail(vals, cnts, xmin, bounds):
    n = cnts.sum()
    slog = (cnts * np.log(vals)).sum()

    def nll(gamma):
        return n * np.log(special.zeta(gamma, xmin)) + gamma * slog

    res = optimize.minimize_scalar(nll, bounds=bounds, method="bounded", options={"xatol": 1e-10})
    gamma = float(res.x)
    emp = np.cumsum(cnts) / n
    model = 1.0 - special.zeta(gamma, vals + 1.0) / special.zeta(gamma, xmin)
    # the empirical CDF jumps at each observed value: compare both sides of the jump
    emp_before = np.concatenate(([0.0], emp[:-1]))
    model_before = np.concatenate(([0.0], model[:-1]))
    ks = max(np.abs(emp - model).max(), np.abs(emp_before - model_before).max())
    return gamma, float(ks), int(n)


def fit_power_law(data, min_tail: int = 50, xmin: int | None = None,
                  gamma_bounds: tuple[float, float] = (1.0001, 10.0)) -> PowerLawFit:
    """Discrete maximum-likelihood power-law fit of positive degrees.

    Unless ``xmin`` is fixed, every observed value with at least ``min_tail``
    samples at or above it is tried and the one minimizing the
    Kolmogorov-Smirnov distance between empirical and fitted tail wins.
    Zero degrees are ignored.
    """
    vals, cnts = _as_degrees(data)
    total = int(cnts.sum())
    if total < min_tail:
        raise InsufficientDataError(f"{total} nonzero samples; at least {min_tail} required")
    if len(vals) < 2:
        raise DataError("all degrees are equal; exponent is undefined")

    tail_counts = np.cumsum(cnts[::-1])[::-1]
    if xmin is not None:
        candidates = [int(np.searchsorted(vals, xmin))]
        if candidates[0] >= len(vals) or tail_counts[candidates[0]] < min_tail:
            raise InsufficientDataError(f"fewer than {min_tail} samples at or above xmin={xmin}")
    else:
        # a tail holding a single distinct value carries no slope information
        candidates = [i for i in range(len(vals) - 1) if tail_counts[i] >= min_tail]

    best = None
    for i in candidates:
        lo = int(vals[i]) if xmin is None else int(xmin)
        gamma, ks, n_tail = _fit_tail(vals[i:], cnts[i:], lo, gamma_bounds)
        if best is None or ks < best.ks_distance:
            best = PowerLawFit(gamma, lo, ks, n_tail, total)
    if best is None or not np.isfinite(best.gamma):
        raise DataError("power-law fit failed")
    return best


# --- cohort growth curves ----------------------------------------------------

@dataclass(frozen=True)
class Cohort:
    label: int | str
    start: int  # inclusive join-time bound
    end: int  # exclusive


@dataclass(frozen=True, eq=False)
class CohortCurve:
    cohort: Cohort
    lifetimes: np.ndarray
    mean_in_degree: np.ndarray
    n_users: np.ndarray  # users averaged at each lifetime


@dataclass(frozen=True, eq=False)
class CohortCurveSet:
    cohorts: dict  # label -> CohortCurve, ordered by join time
    min_cohort_size: int
    lifetime_step: int
    zero_policy: str = "lifetime"

    def ordered(self) -> list[CohortCurve]:
        return sorted(self.cohorts.values(), key=lambda c: (c.cohort.start, c.cohort.end))


def _utc_year(ts: np.ndarray) -> np.ndarray:
    return ts.astype("datetime64[s]").astype("datetime64[Y]").astype(np.int64) + 1970


def _year_start(year: int) -> int:
    return int(np.datetime64(f"{year:04d}-01-01T00:00:00", "s").astype(np.int64))


def year_cohorts(g: TemporalGraph) -> list[Cohort]:
    if g.n_users == 0:
        return []
    years = np.unique(_utc_year(g.created_at))
    return [Cohort(int(y), _year_start(int(y)), _year_start(int(y) + 1)) for y in years]


def period_cohorts(g: TemporalGraph, n_periods: int) -> list[Cohort]:
    """Split the observed time span into ``n_periods`` equal join-time windows."""
    if n_periods < 1:
        raise ConfigError("n_periods must be >= 1")
    t0, t1 = g.time_range
    span = t1 - t0 + 1
    bounds = [t0 + (span * i) // n_periods for i in range(n_periods + 1)]
    return [Cohort(i, bounds[i], bounds[i + 1]) for i in range(n_periods)]


def quantile_cohorts(g: TemporalGraph, n_groups: int) -> list[Cohort]:
    """Split users into ``n_groups`` cohorts of (nearly) equal size by join order.

    Boundaries fall on join timestamps, so users who joined at the same instant
    always share a cohort and groups may come out uneven when ties straddle a
    boundary.
    """
    if n_groups < 1:
        raise ConfigError("n_groups must be >= 1")
    if g.n_users == 0:
        return []
    t = np.sort(g.created_at)
    cut = [int(t[(len(t) * i) // n_groups]) for i in range(n_groups)] + [int(t[-1]) + 1]
    cut = sorted(set(cut))
    return [Cohort(i, cut[i], cut[i + 1]) for i in range(len(cut) - 1)]


def cohort_curves(g: TemporalGraph, cohorts: Sequence[Cohort] | str = "year", lifetime_step: int = 30 * DAY,
                  min_cohort_size: int = 10, min_lifetime: int = 0, join_cutoff: int | None = None,
                  zero_policy: Literal["lifetime", "final", "keep"] = "lifetime") -> CohortCurveSet:
    """Mean in-degree against time since joining, per join cohort.

    The in-degree of a user at lifetime ``L`` counts follows received up to
    ``join + L``. A user enters the average at ``L`` only while ``join + L`` lies
    inside the observed period. Users without followers are left out: with
    ``zero_policy="lifetime"`` a user is counted from the first lifetime at
    which they have a follower, with ``"final"`` users with no followers by the
    end of the data are dropped entirely, ``"keep"`` counts everyone. Points
    averaging fewer than ``min_cohort_size`` users are dropped, and cohorts
    left without points disappear.
    """
    if lifetime_step < 1:
        raise ConfigError("lifetime_step must be >= 1")
    if zero_policy not in ("lifetime", "final", "keep"):
        raise ConfigError(f"unknown zero_policy {zero_policy!r}")
    if g.n_users == 0:
        raise InsufficientDataError("no users")
    if isinstance(cohorts, str):
        if cohorts != "year":
            raise ConfigError(f"unknown cohort granularity {cohorts!r}")
        cohorts = year_cohorts(g)
    cohorts = sorted(cohorts, key=lambda c: (c.start, c.end))

    t_end = g.time_range[1]
    join = g.created_at
    member = np.full(g.n_users, -1, dtype=np.int64)
    for ci, c in enumerate(cohorts):
        member[(join >= c.start) & (join < c.end)] = ci
    if join_cutoff is not None:
        member[join > join_cutoff] = -1

    n_points = int((t_end - join.min()) // lifetime_step) + 1
    last = (t_end - join) // lifetime_step  # last observable grid index per user

    # grid index at which each edge starts to count for its followee
    age = np.maximum(g.edge_created - join[g.dst], 0)
    first_pt = -(-age // lifetime_step)
    emember = member[g.dst]
    ok = (emember >= 0) & (first_pt <= last[g.dst])
    width = n_points + 1
    n_c = len(cohorts)

    diff = np.bincount(emember[ok] * width + first_pt[ok], minlength=n_c * width).astype(np.int64)
    diff -= np.bincount(emember[ok] * width + last[g.dst[ok]] + 1, minlength=n_c * width)
    sums = np.cumsum(diff.reshape(n_c, width), axis=1)[:, :n_points]

    users = member >= 0
    if zero_policy == "lifetime":
        start = np.full(g.n_users, np.iinfo(np.int64).max)
        np.minimum.at(start, g.dst[ok], first_pt[ok])
        users &= start <= last
    else:
        start = np.zeros(g.n_users, dtype=np.int64)
        if zero_policy == "final":
            users &= g.in_degree > 0
    udiff = np.bincount(member[users] * width + start[users], minlength=n_c * width).astype(np.int64)
    udiff -= np.bincount(member[users] * width + last[users] + 1, minlength=n_c * width)
    counts = np.cumsum(udiff.reshape(n_c, width), axis=1)[:, :n_points]

    lifetimes = np.arange(n_points, dtype=np.int64) * lifetime_step
    out = {}
    for ci, c in enumerate(cohorts):
        keep = (counts[ci] >= max(min_cohort_size, 1)) & (lifetimes >= min_lifetime)
        if not keep.any():
            continue
        out[c.label] = CohortCurve(c, lifetimes[keep], sums[ci, keep] / counts[ci, keep], counts[ci, keep])
    if not out:
        raise InsufficientDataError(f"no cohort reaches min_cohort_size={min_cohort_size}")
    return CohortCurveSet(out, min_cohort_size, lifetime_step, zero_policy)


# --- population growth -------------------------------------------------------

def growth_curve(g: TemporalGraph, granularity: str | int = "year") -> list[tuple[int, int]]:
    """Cumulative user count at the end of each period.

    ``"year"`` labels points by calendar year; an integer period length (in
    seconds) labels them by the last timestamp of the period, with periods
    starting at the earliest join.
    """
    if g.n_users == 0:
        return []
    created = np.sort(g.created_at)
    if granularity == "year":
        years = _utc_year(created)
        ends = [_year_start(y + 1) for y in range(int(years[0]), int(years[-1]) + 1)]
        labels = list(range(int(years[0]), int(years[-1]) + 1))
    else:
        period = int(granularity)
        if period < 1:
            raise ConfigError("growth period must be >= 1")
        t0 = int(created[0])
        n = (int(created[-1]) - t0) // period + 1
        ends = [t0 + (i + 1) * period for i in range(n)]
        labels = [e - 1 for e in ends]
    counts = np.searchsorted(created, np.array(ends, dtype=np.int64), side="left")
    return [(lab, int(c)) for lab, c in zip(labels, counts.tolist())]


@dataclass(frozen=True)
class GrowthRegime:
    classification: Literal["exponential", "sub_exponential", "super_exponential"]
    log_fit_r2: float
    concavity_stat: float
    threshold: float = 0.01


def classify_growth(curve: Sequence[tuple[float, float]], threshold: float = 0.01) -> GrowthRegime:
    """Exponential, sub- or super-exponential growth from the curvature of log(count).

    ``concavity_stat`` is the mean second difference of ``log(count)``; points are
    assumed equally spaced in time.
    """
    if len(curve) < 5:
        raise InsufficientDataError("classify_growth needs at least 5 points")
    t = np.array([p[0] for p in curve], dtype=float)
    n = np.array([p[1] for p in curve], dtype=float)
    if np.any(n <= 0) or np.any(np.diff(n) <= 0):
        raise DataError("counts must be positive and strictly increasing")
    logn = np.log(n)
    # log ratios keep an exact geometric series exactly flat
    step = np.log(n[1:] / n[:-1])
    concavity = float(np.mean(np.diff(step)))
    r2 = float(stats.linregress(t, logn).rvalue ** 2)
    if concavity < -threshold:
        cls = "sub_exponential"
    elif concavity > threshold:
        cls = "super_exponential"
    else:
        cls = "exponential"
    return GrowthRegime(cls, r2, concavity, threshold)


# --- first-mover-advantage verdict -------------------------------------------

@dataclass(frozen=True)
class FmaThresholds:
    present_min: float = 0.8
    absent_band: tuple[float, float] = (0.35, 0.65)


@dataclass(frozen=True)
class FmaVerdict:
    verdict: Literal["present", "absent", "inconclusive"]
    dominance_score: float
    regime: GrowthRegime
    min_lifetime_used: int
    comparisons: int
    thresholds: FmaThresholds = field(default_factory=FmaThresholds)


def dominance(curves: CohortCurveSet, min_lifetime: int) -> tuple[float, int]:
    """Share of (earlier cohort, later cohort, shared lifetime) triples where the
    earlier cohort's mean is higher; ties count one half."""
    ordered = curves.ordered()
    wins = 0.0
    total = 0
    for i, early in enumerate(ordered):
        for late in ordered[i + 1:]:
            shared, ie, il = np.intersect1d(early.lifetimes, late.lifetimes, assume_unique=True,
                                            return_indices=True)
            sel = shared >= min_lifetime
            a = early.mean_in_degree[ie[sel]]
            b = late.mean_in_degree[il[sel]]
            wins += np.count_nonzero(a > b) + 0.5 * np.count_nonzero(a == b)
            total += int(sel.sum())
    if total == 0:
        raise InsufficientDataError(f"no two cohorts share a lifetime >= {min_lifetime}")
    return wins / total, total


def fma_diagnose(curves: CohortCurveSet, regime: GrowthRegime, min_lifetime: int = YEAR,
                 thresholds: FmaThresholds = FmaThresholds()) -> FmaVerdict:
    """Combine cohort ordering with the growth regime.

    ``present`` when earlier cohorts beat later ones at equal lifetime in at
    least ``present_min`` of the comparisons. ``absent`` when the ordering is
    balanced (score inside ``absent_band``) and the population grows
    exponentially, the regime under which degree growth can be time invariant.
    Anything else is ``inconclusive``.
    """
    score, total = dominance(curves, min_lifetime)
    lo, hi = thresholds.absent_band
    if score >= thresholds.present_min:
        verdict = "present"
    elif lo <= score <= hi and regime.classification == "exponential":
        verdict = "absent"
    else:
        verdict = "inconclusive"
    return FmaVerdict(verdict, float(score), regime, int(min_lifetime), total, thresholds)
