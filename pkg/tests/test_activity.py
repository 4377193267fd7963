import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fma_netlab.activity import (ActivityRecord, issue_ranking, join_top_users, merge_ratio, merged_pr_ranking,
                                 pearson_matrix)
from fma_netlab.errors import DataError, DegenerateMetricError, UndefinedRatioError

from oracles import hand_pearson


def _recs(rows):
    return [ActivityRecord(u, m, s, i, r) for u, (m, s, i, r) in enumerate(rows)]


def test_merged_ranking_top3():
    recs = [ActivityRecord(2, 1661, 1700), ActivityRecord(0, 3175, 4000), ActivityRecord(1, 2016, 2100)]
    assert [r.user for r in merged_pr_ranking(recs, 3)] == [0, 1, 2]
    assert [r.merged_pr_count for r in merged_pr_ranking(recs, 3)] == [3175, 2016, 1661]


def test_ranking_ties_fall_back_to_user_id():
    recs = [ActivityRecord(u) for u in (5, 3, 9, 1)]
    assert [r.user for r in merged_pr_ranking(recs)] == [1, 3, 5, 9]
    assert [r.user for r in issue_ranking(recs, 2)] == [1, 3]


def test_issue_ranking_single_record():
    r = ActivityRecord(4, issue_count=3887)
    assert issue_ranking([r], 10) == [r]


@pytest.mark.parametrize("key,fn", [("merged_pr_count", merged_pr_ranking), ("issue_count", issue_ranking)])
def test_rankings_match_sort_oracle(key, fn):
    rng = np.random.default_rng(30)
    recs = []
    for u in rng.permutation(500)[:30].tolist():
        s = int(rng.integers(0, 20))
        recs.append(ActivityRecord(u, int(rng.integers(0, s + 1)), s, int(rng.integers(0, 20)), 1))
    expected = sorted(recs, key=lambda r: (-getattr(r, key), r.user))[:10]
    assert fn(recs, 10) == expected


def test_merge_ratio():
    assert merge_ratio(ActivityRecord(0, 3, 4)) == 0.75
    assert merge_ratio(ActivityRecord(0, 0, 7)) == 0.0
    with pytest.raises(UndefinedRatioError):
        merge_ratio(ActivityRecord(0, 0, 0))


def test_record_invariants():
    with pytest.raises(DataError):
        ActivityRecord(0, 5, 3)
    with pytest.raises(DataError):
        ActivityRecord(0, 0, 0, -1)


def test_pearson_hand_value():
    x, y = (1, 2, 3, 4), (2, 1, 4, 3)
    assert hand_pearson(x, y) == pytest.approx(0.6, abs=1e-15)
    recs = [ActivityRecord(i, issue_count=a, repo_count=b) for i, (a, b) in enumerate(zip(x, y))]
    c = pearson_matrix(recs, ["issue_count", "repo_count"])
    assert abs(c["issue_count", "repo_count"] - 0.6) <= 1e-12


def test_pearson_perfect_linear():
    xs = [1, 4, 2, 8, 5]
    pos = pearson_matrix([ActivityRecord(i, issue_count=x, repo_count=2 * x + 1) for i, x in enumerate(xs)],
                         ["issue_count", "repo_count"])
    assert abs(pos["issue_count", "repo_count"] - 1.0) <= 1e-12
    neg = pearson_matrix([ActivityRecord(i, issue_count=x) for i, x in enumerate(xs)], ["issue_count", "neg"],
                         extra={"neg": {i: -x for i, x in enumerate(xs)}})
    assert abs(neg["issue_count", "neg"] + 1.0) <= 1e-12


def test_pearson_matrix_shape_and_diagonal():
    rng = np.random.default_rng(1)
    rows = []
    for _ in range(40):
        s = int(rng.integers(1, 50))
        rows.append((int(rng.integers(0, s + 1)), s, int(rng.integers(0, 30)), int(rng.integers(0, 90))))
    c = pearson_matrix(_recs(rows))
    assert c.rho.shape == (4, 4)
    assert np.array_equal(np.diag(c.rho), np.ones(4))
    assert np.array_equal(c.rho, c.rho.T)
    assert np.all(np.abs(c.rho) <= 1)
    ref = np.corrcoef(np.array(rows, dtype=float).T)
    assert np.allclose(c.rho, ref, atol=1e-12)


def test_pearson_errors():
    with pytest.raises(DataError):
        pearson_matrix(_recs([(1, 1, 1, 1)]))
    with pytest.raises(DegenerateMetricError) as exc:
        pearson_matrix(_recs([(1, 2, 3, 4), (1, 2, 5, 6), (1, 3, 2, 1)]))
    assert exc.value.metric == "merged_pr_count"


def test_join_top_users_keeps_ranking_order():
    recs = [ActivityRecord(u) for u in (1, 2, 3)]
    assert [r.user for r in join_top_users([(3, 0.9), (7, 0.5), (1, 0.1)], recs)] == [3, 1]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1000), st.integers(0, 1000)), min_size=3, max_size=40),
       st.floats(0.01, 100), st.floats(-1000, 1000), st.floats(0.01, 100), st.floats(-1000, 1000))
def test_pearson_affine_invariance(pairs, a, b, c, d):
    x = [p[0] for p in pairs]
    y = [p[1] for p in pairs]
    assume(len(set(x)) > 1 and len(set(y)) > 1)
    recs = [ActivityRecord(i) for i in range(len(pairs))]
    base = pearson_matrix(recs, ["x", "y"], extra={"x": dict(enumerate(x)), "y": dict(enumerate(y))})
    moved = pearson_matrix(recs, ["x", "y"], extra={"x": {i: a * v + b for i, v in enumerate(x)},
                                                    "y": {i: c * v + d for i, v in enumerate(y)}})
    assert abs(base["x", "y"] - moved["x", "y"]) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=1, max_size=30))
def test_merge_ratio_in_unit_interval(pairs):
    for i, (a, b) in enumerate(pairs):
        merged, submitted = min(a, b), max(a, b)
        r = ActivityRecord(i, merged, submitted)
        if submitted:
            assert 0.0 <= merge_ratio(r) <= 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=30, unique_by=None), st.integers(1, 40))
def test_ranking_is_permutation_prefix(counts, k):
    recs = [ActivityRecord(i, c, c) for i, c in enumerate(counts)]
    out = merged_pr_ranking(recs, k)
    assert len(out) == min(k, len(recs))
    assert len({r.user for r in out}) == len(out)
    assert out == merged_pr_ranking(list(reversed(recs)), k)
