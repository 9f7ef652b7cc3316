"""Arm-selection policies for extreme bandits.

All policies share a two-call protocol driven by the harness::

    arm = policy.select(t)      # t = 0, 1, ..., n-1
    policy.update(arm, reward)

Ties are always broken towards the lowest arm index.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .distributions import RngStream
from .tail_estimation import (
    TailEstimate,
    WidthParams,
    c_from_sorted,
    hill_from_sorted,
    width_b1,
    width_b2,
)


def _argmax(values) -> int:
    # max() keeps the first maximal element, i.e. the lowest index
    return max(range(len(values)), key=values.__getitem__)


class Policy:
    name = "policy"

    def __init__(self, n_arms: int, horizon: int):
        if n_arms < 1:
            raise ValueError("need at least one arm")
        self.n_arms = n_arms
        self.horizon = horizon
        self.counts = [0] * n_arms

    def select(self, t: int) -> int:
        raise NotImplementedError

    def update(self, arm: int, reward: float) -> None:
        self.counts[arm] += 1


# ---------------------------------------------------------------------------
# ExtremeHunter
# ---------------------------------------------------------------------------


def gamma_bar(x: float, y: float) -> float:
    """Gamma(1 - x - y) when the argument is positive, +inf otherwise."""
    z = 1.0 - x - y
    if z <= 0:
        return math.inf
    try:
        return math.gamma(z)
    except OverflowError:
        return math.inf


def default_min_pulls(n: int, n_arms: int, b: float) -> int:
    """min(ceil(log(n)^((2b+1)/b)), floor(n / 2K)), and at least 1."""
    polylog = math.ceil(math.log(n) ** ((2.0 * b + 1.0) / b)) if n > 1 else 1
    return max(1, min(polylog, n // (2 * n_arms)))


@dataclass(frozen=True)
class ExtremeHunterConfig:
    """Inputs of ExtremeHunter: horizon n, K arms, rate bound b, minimum pulls N.

    delta = exp(-log^2 n) / (2nK) is carried as log(1/delta).
    """

    n: int
    K: int
    b: float = 1.0
    N: int | None = None
    D: float = 1.0
    E: float = 1.0

    def __post_init__(self):
        if self.n < 1 or self.K < 1:
            raise ValueError("ExtremeHunter needs n >= 1 and K >= 1")
        if not self.b > 0:
            raise ValueError("b must be > 0")
        if self.N is None:
            object.__setattr__(self, "N", default_min_pulls(self.n, self.K, self.b))
        if self.N < 1:
            raise ValueError("N must be >= 1")
        # arms are forced while T_k <= N, i.e. N + 1 pulls each
        if self.K * (self.N + 1) > self.n:
            raise ValueError(
                f"initialisation needs K*(N+1) = {self.K * (self.N + 1)} rounds but the horizon is n = {self.n}")

    @property
    def log_inv_delta(self) -> float:
        return math.log(self.n) ** 2 + math.log(2.0 * self.n * self.K)

    @property
    def delta(self) -> float:
        return math.exp(-self.log_inv_delta)

    @property
    def widths(self) -> WidthParams:
        return WidthParams(self.D, self.E, self.log_inv_delta)


def optimistic_index(h_hat: float, c_hat: float, B1: float, B2: float, n: int) -> float:
    """((c_hat + B2) n)^(h_hat + B1) * gamma_bar(h_hat, B1).

    0^0 is taken as 1; a zero base with a positive exponent gives 0.
    """
    g = gamma_bar(h_hat, B1)
    base = (c_hat + B2) * n
    expo = h_hat + B1
    if base == 0.0:
        return 0.0 if expo > 0 else g
    if math.isinf(g):
        return math.inf
    try:
        return math.exp(expo * math.log(base)) * g
    except OverflowError:
        return math.inf


def extreme_hunter_index(est: TailEstimate | None, T: int, cfg: ExtremeHunterConfig) -> float:
    """Upper confidence bound on an arm's expected maximum over the horizon."""
    if T <= cfg.N or est is None:
        return math.inf
    w = cfg.widths
    return optimistic_index(est.h_hat, est.c_hat, width_b1(T, w, cfg.b), width_b2(T, w, cfg.b), cfg.n)


def index_priority(est: TailEstimate | None, T: int, cfg: ExtremeHunterConfig) -> tuple:
    """Sort key whose maximum is an argmax of :func:`extreme_hunter_index`.

    Several arms can share an infinite index. Arms still in their forced
    phase (T <= N) come first, least-pulled first, which gives round-robin
    initialisation. Among arms whose index is infinite because the Gamma
    argument is nonpositive, the larger finite factor
    ((c_hat + B2) n)^(h_hat + B1) wins. Finite indices are compared in log
    space.
    """
    if T <= cfg.N or est is None:
        return (2, -T)
    w = cfg.widths
    B1 = width_b1(T, w, cfg.b)
    B2 = width_b2(T, w, cfg.b)
    base = (est.c_hat + B2) * cfg.n
    expo = est.h_hat + B1
    log_factor = expo * math.log(base) if base > 0 else (-math.inf if expo > 0 else 0.0)
    z = 1.0 - expo
    if z <= 0:
        return (1, log_factor)
    return (0, log_factor + math.lgamma(z))


class ExtremeHunter(Policy):
    """Optimistic policy on estimated expected maxima.

    Each arm keeps its rewards in sorted order; after a pull only that arm's
    tail estimate and index are recomputed, since the other arms' samples
    have not changed.
    """

    name = "extreme_hunter"

    def __init__(self, cfg: ExtremeHunterConfig,
                 h_estimator: Callable[[Any, int, float], float] = hill_from_sorted):
        super().__init__(cfg.K, cfg.n)
        self.cfg = cfg
        self._h_estimator = h_estimator
        self.samples: list[list[float]] = [[] for _ in range(cfg.K)]
        self._sorted: list[list[float]] = [[] for _ in range(cfg.K)]
        self._positive: list[list[float]] = [[] for _ in range(cfg.K)]
        self.estimates: list[TailEstimate | None] = [None] * cfg.K
        self.priorities: list[tuple] = [(2, 0)] * cfg.K
        self.indices: list[float] = [math.inf] * cfg.K

    def select(self, t: int) -> int:
        return _argmax(self.priorities)

    def update(self, arm: int, reward: float) -> None:
        super().update(arm, reward)
        self.samples[arm].append(reward)
        bisect.insort(self._sorted[arm], reward)
        if reward > 0:
            bisect.insort(self._positive[arm], reward)
        self._refresh(arm)

    def _refresh(self, arm: int) -> None:
        cfg = self.cfg
        T = self.counts[arm]
        if T <= cfg.N:
            self.estimates[arm] = None
        else:
            h = self._h_estimator(self._positive[arm], T, cfg.b)
            c = c_from_sorted(self._sorted[arm], h, cfg.b)
            self.estimates[arm] = TailEstimate(h, c, T, cfg.b)
        self.priorities[arm] = index_priority(self.estimates[arm], T, cfg)
        self.indices[arm] = extreme_hunter_index(self.estimates[arm], T, cfg)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


class UCB1(Policy):
    """mean_k + sqrt(2 log t / T_k), with t the number of pulls so far."""

    name = "ucb1"

    def __init__(self, n_arms: int, horizon: int):
        super().__init__(n_arms, horizon)
        self.sums = [0.0] * n_arms

    def index(self, arm: int, t: int) -> float:
        T = self.counts[arm]
        if T == 0:
            return math.inf
        return self.sums[arm] / T + math.sqrt(2.0 * math.log(max(t, 1)) / T)

    def select(self, t: int) -> int:
        pulls = sum(self.counts)
        return _argmax([self.index(k, pulls) for k in range(self.n_arms)])

    def update(self, arm: int, reward: float) -> None:
        super().update(arm, reward)
        self.sums[arm] += reward


def threshold_ascent_bound(mu: float, T: int, a: float) -> float:
    """mu + (a + sqrt(2 T mu a + a^2)) / T."""
    return mu + (a + math.sqrt(2.0 * T * mu * a + a * a)) / T


class ThresholdAscent(Policy):
    """Exceedance-counting baseline for the max-k-armed bandit.

    A global threshold tau tracks the observed rewards: whenever at least
    ``s`` rewards exceed it, tau moves up to the next distinct observed
    value. Arms are ranked by an upper bound on their exceedance rate.
    """

    name = "threshold_ascent"

    def __init__(self, n_arms: int, horizon: int, s: int = 100, delta: float = 0.01):
        super().__init__(n_arms, horizon)
        if s < 1 or not 0 < delta < 1:
            raise ValueError("ThresholdAscent needs s >= 1 and 0 < delta < 1")
        self.s = s
        self.delta = delta
        self.a = math.log(2.0 * horizon * n_arms / delta)
        self.tau = 0.0
        self.exceed = [0] * n_arms
        self._rewards: list[list[float]] = [[] for _ in range(n_arms)]
        self._all: list[float] = []

    def index(self, arm: int) -> float:
        T = self.counts[arm]
        if T == 0:
            return math.inf
        return threshold_ascent_bound(self.exceed[arm] / T, T, self.a)

    def select(self, t: int) -> int:
        return _argmax([self.index(k) for k in range(self.n_arms)])

    def update(self, arm: int, reward: float) -> None:
        super().update(arm, reward)
        bisect.insort(self._rewards[arm], reward)
        bisect.insort(self._all, reward)
        if reward > self.tau:
            self.exceed[arm] += 1
        while sum(self.exceed) >= self.s:
            i = bisect.bisect_right(self._all, self.tau)
            if i == len(self._all):
                break
            self.tau = self._all[i]
            self.exceed = [len(r) - bisect.bisect_right(r, self.tau) for r in self._rewards]


class RandomPolicy(Policy):
    name = "random"

    def __init__(self, n_arms: int, horizon: int, rng: RngStream | np.random.Generator):
        super().__init__(n_arms, horizon)
        self._gen = rng.generator() if isinstance(rng, RngStream) else rng

    def select(self, t: int) -> int:
        return int(self._gen.integers(self.n_arms))


class FixedArm(Policy):
    """Always plays one arm; with the best arm this is the oracle policy."""

    name = "fixed"

    def __init__(self, n_arms: int, horizon: int, arm: int):
        super().__init__(n_arms, horizon)
        if not 0 <= arm < n_arms:
            raise ValueError(f"arm {arm} out of range for {n_arms} arms")
        self.arm = arm

    def select(self, t: int) -> int:
        return self.arm


# ---------------------------------------------------------------------------
# Policy specifications (serialisable)
# ---------------------------------------------------------------------------

POLICY_PARAMS = {
    "extreme_hunter": {"b", "N", "D", "E"},
    "ucb1": set(),
    "threshold_ascent": {"s", "delta"},
    "random": set(),
    "oracle": {"arm"},
}


@dataclass(frozen=True)
class PolicySpec:
    """A policy kind plus its parameters; ``oracle`` without ``arm`` means the best arm."""

    kind: str
    params: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if self.kind not in POLICY_PARAMS:
            raise ValueError(f"unknown policy kind {self.kind!r}; expected one of {sorted(POLICY_PARAMS)}")
        unknown = set(self.params) - POLICY_PARAMS[self.kind]
        if unknown:
            raise ValueError(f"unknown parameter(s) for {self.kind}: {sorted(unknown)}")
        if not self.label:
            object.__setattr__(self, "label", self.kind)

    def build(self, n_arms: int, horizon: int, rng: RngStream, best_arm: int | None = None) -> Policy:
        p = self.params
        if self.kind == "extreme_hunter":
            return ExtremeHunter(ExtremeHunterConfig(n=horizon, K=n_arms, **p))
        if self.kind == "ucb1":
            return UCB1(n_arms, horizon)
        if self.kind == "threshold_ascent":
            return ThresholdAscent(n_arms, horizon, **p)
        if self.kind == "random":
            return RandomPolicy(n_arms, horizon, rng)
        arm = p.get("arm", best_arm)
        if arm is None:
            raise ValueError("oracle policy needs an arm or a known best arm")
        return FixedArm(n_arms, horizon, int(arm))
