import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fma_netlab.errors import ConfigError
from fma_netlab.simulate import (ArrivalProcess, SimConfig, _rng_stream, arrival_steps, attachment_probabilities,
                                 simulate, simulate_reference)


def _edges(g):
    return list(zip(g.src.tolist(), g.dst.tolist(), g.edge_created.tolist()))


def test_small_ba_is_reproducible():
    cfg = SimConfig("barabasi_albert", n_final=4, m=1, seed=3)
    a, b = simulate(cfg), simulate(cfg)
    assert _edges(a) == _edges(b)
    assert a.n_edges == 2 + 2  # 2-node seed clique plus one follow per arrival


def test_seed_changes_output():
    a = simulate(SimConfig(n_final=300, m=2, seed=1))
    b = simulate(SimConfig(n_final=300, m=2, seed=2))
    assert _edges(a) != _edges(b)


@pytest.mark.parametrize("n,m", [(50, 1), (500, 1), (200, 3)])
def test_edge_count_arithmetic(n, m):
    g = simulate(SimConfig(n_final=n, m=m, seed=0))
    n0 = m + 1
    seed_edges = n0 * (n0 - 1)
    assert g.n_edges == seed_edges + m * (n - n0)
    if m == 1:
        non_seed = g.n_edges - seed_edges
        assert non_seed == n - n0
        # each arrival has exactly one followee, earlier than itself: a forest over the seed
        late = g.src >= n0
        assert np.array_equal(np.bincount(g.src[late], minlength=n)[n0:], np.ones(n - n0))
        assert np.all(g.dst[late] < g.src[late])


CONFIGS = [
    SimConfig("barabasi_albert", 300, 2),
    SimConfig("barabasi_albert", 300, 3, ArrivalProcess("exponential", 40)),
    SimConfig("barabasi_albert", 300, 1, ArrivalProcess("polynomial", 30, exponent=2.0), offset=1.0),
    SimConfig("fitness", 300, 2, fitness_distribution="uniform"),
    SimConfig("fitness", 300, 2, fitness_distribution="exponential", fitness_mean=2.0),
    SimConfig("aging", 300, 2, ArrivalProcess("constant_rate", 60), aging_param=1.5),
    SimConfig("aging", 300, 2, ArrivalProcess("constant_rate", 60), aging_decay="exponential", aging_param=0.1),
]


@pytest.mark.parametrize("cfg", CONFIGS)
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fast_kernel_matches_linear_scan(cfg, seed):
    cfg = SimConfig.from_dict({**cfg.as_dict(), "seed": seed})
    assert simulate(cfg).same_as(simulate_reference(cfg))


def test_attachment_probability_examples():
    assert np.allclose(attachment_probabilities([0, 3]), [0.2, 0.8], atol=1e-15)
    assert np.allclose(attachment_probabilities([4, 4, 4, 4]), [0.25] * 4)
    p = attachment_probabilities([1, 1], "fitness", fitness=[0.1, 0.3])
    assert np.allclose(p, [0.25, 0.75], atol=1e-15)
    p = attachment_probabilities([0, 0], "aging", age=[0, 1], decay_kind="power", decay_param=1.0)
    assert np.allclose(p, [2 / 3, 1 / 3])


@pytest.mark.parametrize("cfg", [CONFIGS[0], CONFIGS[4], CONFIGS[5], CONFIGS[6]])
def test_attachment_probabilities_match_brute_force_every_draw(cfg):
    cfg = SimConfig.from_dict({**cfg.as_dict(), "n_final": 100})
    step_of = arrival_steps(cfg)
    fitness, _ = _rng_stream(cfg)
    off = cfg.effective_offset
    seen = []

    def check(v, indeg, p, target):
        w = []
        for j in range(v):
            base = indeg[j] + off
            if cfg.model == "fitness":
                base *= fitness[j]
            elif cfg.model == "aging":
                age = step_of[v] - step_of[j]
                base *= (age + 1.0) ** -cfg.aging_param if cfg.aging_decay == "power" else np.exp(
                    -cfg.aging_param * age)
            w.append(base)
        w = np.array(w) / sum(w)
        assert abs(p.sum() - 1) <= 1e-12
        assert np.allclose(p, w, rtol=1e-12, atol=1e-15)
        seen.append(v)

    simulate_reference(cfg, on_draw=check)
    assert len(seen) == cfg.m * (cfg.n_final - cfg.n_seed)


def test_rich_get_richer_signature():
    for seed in range(10):
        cfg = SimConfig("barabasi_albert", 400, 2, seed=seed)
        target_deg, pop_deg = [], []

        def record(v, indeg, p, t):
            target_deg.append(indeg[t])
            pop_deg.append(indeg.mean())

        simulate_reference(cfg, on_draw=record)
        assert np.mean(target_deg) > np.mean(pop_deg)


def _late_share_in_top(g, n, k=100):
    order = np.lexsort((g.user_ids, -g.in_degree))[:k]
    return np.mean(g.user_ids[order] >= 0.75 * n)


def test_strong_aging_favours_newcomers():
    n = 5000
    for seed in range(10):
        ba = simulate(SimConfig("barabasi_albert", n, 2, seed=seed))
        aging = simulate(SimConfig("aging", n, 2, aging_param=2.0, seed=seed))
        assert _late_share_in_top(aging, n) > _late_share_in_top(ba, n)


@pytest.mark.parametrize("cfg", CONFIGS)
def test_output_satisfies_graph_invariants(cfg):
    g = simulate(cfg)
    assert g.n_users == cfg.n_final
    assert g.in_degree.sum() == g.out_degree.sum() == g.n_edges
    assert np.all(g.src != g.dst)
    assert len(set(zip(g.src.tolist(), g.dst.tolist()))) == g.n_edges
    assert g.report.edge_before_endpoint == 0 and g.report.dropped_edges == 0
    # timestamps are arrival steps; the first n0 nodes form the seed at step 0
    assert np.all(g.created_at[: cfg.n_seed] == 0)
    assert np.all(np.diff(g.created_at) >= 0)
    assert np.array_equal(g.edge_created, g.created_at[g.src])


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(n_final=2, m=2)
    with pytest.raises(ConfigError):
        SimConfig(model="copying")
    with pytest.raises(ConfigError):
        SimConfig(m=0)
    with pytest.raises(ConfigError):
        simulate(SimConfig(arrival=ArrivalProcess("polynomial", exponent=0.0)))
    with pytest.raises(ConfigError):
        attachment_probabilities([])


def test_config_dict_round_trip():
    for cfg in CONFIGS:
        assert SimConfig.from_dict(cfg.as_dict()) == cfg


def test_exponential_arrival_grows_from_seed():
    cfg = SimConfig("barabasi_albert", 50_000, 2, ArrivalProcess("exponential", 100))
    cum = cfg.arrival.cumulative(cfg.n_final, cfg.n_seed)
    assert cum[0] == cfg.n_seed and cum[-1] == cfg.n_final
    r = cfg.arrival.effective_rate(cfg.n_final, cfg.n_seed)
    target = cfg.n_final * np.exp(r * (np.arange(100) - 99))
    assert target[0] == pytest.approx(cfg.n_seed)
    assert np.all(np.abs(cum - target) <= 0.5 + 1e-9)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["constant_rate", "exponential", "polynomial"]), st.integers(2, 200),
       st.integers(5, 20_000), st.integers(1, 4), st.floats(0.0, 0.3), st.floats(0.2, 4.0))
def test_arrival_schedule_invariants(kind, steps, n, m, rate, exponent):
    if n <= m + 1:
        return
    proc = ArrivalProcess(kind, steps, rate, exponent)
    sched = proc.schedule(n, m + 1)
    assert sched.sum() == n
    assert np.all(sched >= 0)
    assert sched[0] >= m + 1
    assert len(sched) == steps
