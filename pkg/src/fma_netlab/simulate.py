"""Growing-network generators with known ground truth.

Each arriving node follows ``m`` distinct existing nodes, picked one at a time
without replacement with weight

* ``barabasi_albert``: ``in_degree + offset``
* ``fitness``:         ``fitness * (in_degree + offset)``
* ``aging``:           ``decay(age) * (in_degree + offset)``

``offset`` defaults to ``m``. Every node has out-degree ``m`` (the seed is a
complete directed graph on ``m + 1`` nodes), so the default weight equals the
node's total degree, which is the classical BA rule.

Timestamps are integer arrival steps. The run is fully determined by the seed:
fitness values and one uniform variate per draw come from a single PCG64
stream, consumed in a fixed order.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal

import numba
import numpy as np

from .errors import ConfigError
from .graph import EdgeTable, TemporalGraph, UserTable, build_graph

Model = Literal["barabasi_albert", "fitness", "aging"]
_MODEL_CODE = {"barabasi_albert": 0, "fitness": 1, "aging": 2}
_DECAY_CODE = {"power": 0, "exponential": 1}


@dataclass(frozen=True)
class ArrivalProcess:
    """How many nodes arrive at each integer step ``0..steps-1``.

    The cumulative population targets are ``n * (s+1)/steps`` (constant rate),
    ``n * exp(rate * (s - steps + 1))`` (exponential, see ``effective_rate``) and
    ``n * ((s+1)/steps) ** exponent`` (polynomial), rounded to integers.
    """

    kind: Literal["constant_rate", "exponential", "polynomial"] = "constant_rate"
    steps: int = 100
    rate: float = 0.0
    exponent: float = 1.0

    def cumulative(self, n_final: int, n_seed: int) -> np.ndarray:
        if self.steps < 1:
            raise ConfigError("arrival steps must be >= 1")
        s = np.arange(self.steps, dtype=float)
        if self.kind == "constant_rate":
            target = n_final * (s + 1) / self.steps
        elif self.kind == "exponential":
            target = n_final * np.exp(self.effective_rate(n_final, n_seed) * (s - (self.steps - 1)))
        elif self.kind == "polynomial":
            if self.exponent <= 0:
                raise ConfigError("polynomial arrival needs exponent > 0")
            target = n_final * ((s + 1) / self.steps) ** self.exponent
        else:
            raise ConfigError(f"unknown arrival kind {self.kind!r}")
        cum = np.rint(target).astype(np.int64)
        cum[-1] = n_final
        cum = np.maximum.accumulate(np.maximum(cum, n_seed))
        return cum

    def effective_rate(self, n_final: int, n_seed: int) -> float:
        """Exponential growth rate per step.

        ``rate == 0`` means "grow from the seed alone": the rate that takes the
        population from ``n_seed`` at step 0 to ``n_final`` at the last step.
        A larger explicit rate puts a batch of arrivals at step 0.
        """
        if self.rate < 0:
            raise ConfigError("exponential arrival rate must be >= 0")
        if self.rate > 0:
            return float(self.rate)
        if self.steps < 2:
            raise ConfigError("exponential arrival from the seed needs steps >= 2")
        return math.log(n_final / n_seed) / (self.steps - 1)

    def schedule(self, n_final: int, n_seed: int) -> np.ndarray:
        """Arrivals per step; sums to ``n_final`` and step 0 holds the seed."""
        return np.diff(self.cumulative(n_final, n_seed), prepend=0)


@dataclass(frozen=True)
class SimConfig:
    model: Model = "barabasi_albert"
    n_final: int = 1000
    m: int = 2
    arrival: ArrivalProcess = field(default_factory=ArrivalProcess)
    fitness_distribution: Literal["uniform", "exponential"] = "uniform"
    fitness_mean: float = 1.0
    aging_decay: Literal["power", "exponential"] = "power"
    aging_param: float = 1.0
    offset: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.model not in _MODEL_CODE:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.m < 1:
            raise ConfigError("m must be >= 1")
        if self.n_final <= self.m:
            raise ConfigError(f"n_final ({self.n_final}) must exceed m ({self.m})")
        if self.aging_decay not in _DECAY_CODE:
            raise ConfigError(f"unknown aging decay {self.aging_decay!r}")
        if self.fitness_distribution not in ("uniform", "exponential"):
            raise ConfigError(f"unknown fitness distribution {self.fitness_distribution!r}")
        if self.offset is not None and self.offset <= 0:
            raise ConfigError("offset must be > 0")
        if self.fitness_mean <= 0 or self.aging_param < 0:
            raise ConfigError("fitness_mean must be > 0 and aging_param >= 0")

    @property
    def n_seed(self) -> int:
        return self.m + 1

    @property
    def effective_offset(self) -> float:
        return float(self.m if self.offset is None else self.offset)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        if isinstance(d.get("arrival"), dict):
            d["arrival"] = ArrivalProcess(**d["arrival"])
        return cls(**d)


def decay(age, kind: str = "power", param: float = 1.0):
    age = np.asarray(age, dtype=float)
    if kind == "power":
        return (age + 1.0) ** (-param)
    if kind == "exponential":
        return np.exp(-param * age)
    raise ConfigError(f"unknown decay {kind!r}")


def attachment_probabilities(in_degree, model: Model = "barabasi_albert", offset: float = 1.0,
                             fitness=None, age=None, decay_kind: str = "power",
                             decay_param: float = 1.0) -> np.ndarray:
    """Probability that the next follow goes to each existing node."""
    w = attachment_weights(in_degree, model, offset, fitness, age, decay_kind, decay_param)
    return w / w.sum()


def attachment_weights(in_degree, model: Model = "barabasi_albert", offset: float = 1.0,
                       fitness=None, age=None, decay_kind: str = "power",
                       decay_param: float = 1.0) -> np.ndarray:
    k = np.asarray(in_degree, dtype=float)
    if k.size == 0:
        raise ConfigError("no existing nodes")
    w = k + offset
    if model == "fitness":
        w = np.asarray(fitness, dtype=float) * w
    elif model == "aging":
        w = decay(age, decay_kind, decay_param) * w
    elif model != "barabasi_albert":
        raise ConfigError(f"unknown model {model!r}")
    return w


def arrival_steps(cfg: SimConfig) -> np.ndarray:
    counts = cfg.arrival.schedule(cfg.n_final, cfg.n_seed)
    return np.repeat(np.arange(len(counts), dtype=np.int64), counts)


def _draw_fitness(cfg: SimConfig, rng: np.random.Generator) -> np.ndarray:
    if cfg.model != "fitness":
        return np.ones(cfg.n_final)
    if cfg.fitness_distribution == "uniform":
        return rng.random(cfg.n_final)
    return rng.exponential(cfg.fitness_mean, cfg.n_final)


# --- Fenwick tree over float weights (1-based internal layout) ---------------

@numba.njit(cache=True)
def _fw_add(tree, i, delta):
    n = tree.shape[0] - 1
    i += 1
    while i <= n:
        tree[i] += delta
        i += i & (-i)


@numba.njit(cache=True)
def _fw_build(tree, weights):
    n = tree.shape[0] - 1
    tree[0] = 0.0
    for i in range(1, n + 1):
        tree[i] = weights[i - 1]
    for i in range(1, n + 1):
        j = i + (i & (-i))
        if j <= n:
            tree[j] += tree[i]


@numba.njit(cache=True)
def _fw_find(tree, target, limit):
    """Smallest index whose inclusive prefix sum exceeds ``target``, clamped below ``limit``."""
    n = tree.shape[0] - 1
    step = 1
    while step * 2 <= n:
        step *= 2
    pos = 0
    rem = target
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= rem:
            pos = nxt
            rem -= tree[nxt]
        step //= 2
    if pos >= limit:
        pos = limit - 1
    return pos


@numba.njit(cache=True)
def _grow(step_of, n_seed, m, offset, model, fitness, decay_kind, decay_param, uniforms):
    n = step_of.shape[0]
    n_edges = n_seed * (n_seed - 1) + m * (n - n_seed)
    src = np.empty(n_edges, dtype=np.int64)
    dst = np.empty(n_edges, dtype=np.int64)
    ts = np.empty(n_edges, dtype=np.int64)
    indeg = np.zeros(n, dtype=np.int64)
    base = np.ones(n)
    tree = np.zeros(n + 1)
    weights = np.zeros(n)

    e = 0
    for i in range(n_seed):
        for j in range(n_seed):
            if i != j:
                src[e] = i
                dst[e] = j
                ts[e] = 0
                e += 1
                indeg[j] += 1

    for i in range(n_seed):
        if model == 1:
            base[i] = fitness[i]
        weights[i] = base[i] * (indeg[i] + offset)
    _fw_build(tree, weights)

    chosen = np.empty(m, dtype=np.int64)
    held = np.empty(m)
    u = 0
    current_step = 0
    for v in range(n_seed, n):
        s = step_of[v]
        if model == 2 and s != current_step:
            current_step = s
            for i in range(v):
                age = s - step_of[i]
                if decay_kind == 0:
                    base[i] = (age + 1.0) ** (-decay_param)
                else:
                    base[i] = math.exp(-decay_param * age)
                weights[i] = base[i] * (indeg[i] + offset)
            _fw_build(tree, weights)
        for c in range(m):
            total = _fw_total(tree, v)
            t = _fw_find(tree, uniforms[u] * total, v)
            u += 1
            chosen[c] = t
            held[c] = weights[t]
            _fw_add(tree, t, -weights[t])
            weights[t] = 0.0
        for c in range(m):
            t = chosen[c]
            src[e] = v
            dst[e] = t
            ts[e] = s
            e += 1
            indeg[t] += 1
            weights[t] = base[t] * (indeg[t] + offset)
            _fw_add(tree, t, weights[t])
        if model == 2:
            base[v] = 1.0
        elif model == 1:
            base[v] = fitness[v]
        weights[v] = base[v] * offset
        _fw_add(tree, v, weights[v])
    return src, dst, ts


@numba.njit(cache=True)
def _fw_total(tree, limit):
    # prefix sum of the first ``limit`` entries
    total = 0.0
    i = limit
    while i > 0:
        total += tree[i]
        i -= i & (-i)
    return total


def _rng_stream(cfg: SimConfig):
    rng = np.random.default_rng(cfg.seed)
    fitness = _draw_fitness(cfg, rng)
    uniforms = rng.random(cfg.m * (cfg.n_final - cfg.n_seed))
    return fitness, uniforms


def _to_graph(cfg: SimConfig, step_of, src, dst, ts) -> TemporalGraph:
    n = cfg.n_final
    users = UserTable(
        ids=np.arange(n, dtype=np.int64),
        logins=[f"u{i}" for i in range(n)],
        created_at=np.asarray(step_of, dtype=np.int64),
        is_org=np.zeros(n, dtype=bool),
        fake=np.zeros(n, dtype=bool),
        deleted=np.zeros(n, dtype=bool),
    )
    return build_graph(users, EdgeTable(np.asarray(src), np.asarray(dst), np.asarray(ts)))


def simulate(cfg: SimConfig) -> TemporalGraph:
    """Grow a network according to ``cfg``; user ids are arrival order."""
    step_of = arrival_steps(cfg)
    fitness, uniforms = _rng_stream(cfg)
    src, dst, ts = _grow(step_of, cfg.n_seed, cfg.m, cfg.effective_offset, _MODEL_CODE[cfg.model],
                         fitness, _DECAY_CODE[cfg.aging_decay], float(cfg.aging_param), uniforms)
    return _to_graph(cfg, step_of, src, dst, ts)


def simulate_reference(cfg: SimConfig, on_draw=None) -> TemporalGraph:
    """Slow linear-scan twin of :func:`simulate` for small ``n``.

    Recomputes the full probability vector with :func:`attachment_probabilities`
    at every draw. ``on_draw(v, in_degree, probs, target)`` is called for each
    draw when given.
    """
    step_of = arrival_steps(cfg)
    fitness, uniforms = _rng_stream(cfg)
    n0, m, off = cfg.n_seed, cfg.m, cfg.effective_offset
    src, dst, ts = [], [], []
    indeg = np.zeros(cfg.n_final, dtype=np.int64)
    for i in range(n0):
        for j in range(n0):
            if i != j:
                src.append(i)
                dst.append(j)
                ts.append(0)
                indeg[j] += 1
    u = 0
    for v in range(n0, cfg.n_final):
        s = int(step_of[v])
        excluded = []
        for _ in range(m):
            w = attachment_weights(indeg[:v], cfg.model, off, fitness[:v], s - step_of[:v],
                                   cfg.aging_decay, cfg.aging_param)
            if on_draw is not None:
                p = w / w.sum()
            w[excluded] = 0.0
            cum = np.cumsum(w)
            t = int(np.searchsorted(cum, uniforms[u] * cum[-1], side="right"))
            t = min(t, v - 1)
            u += 1
            if on_draw is not None:
                on_draw(v, indeg[:v].copy(), p, t)
            excluded.append(t)
        for t in excluded:
            src.append(v)
            dst.append(t)
            ts.append(s)
            indeg[t] += 1
    return _to_graph(cfg, step_of, np.array(src), np.array(dst), np.array(ts))
