"""Seeded bandit episodes, the oracle benchmark and extreme-regret curves.

Randomness layout (all streams derived from ``base_seed``):

* arm k in replication r reads stream ``(ARM, r, k)``; its i-th pull uses the
  i-th value. Every policy in replication r therefore faces the same reward
  sequences (common random numbers), and no policy can shift another arm's
  future draws.
* policy p in replication r owns stream ``(POLICY, p, r)`` (only the random
  baseline consumes it).
* the oracle Monte Carlo uses stream ``(ORACLE, k)`` for arm k.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    ArmDistribution,
    DiracMixture,
    ExactPareto,
    RngStream,
    sample_from_uniform,
)
from .evt_analysis import frechet_main_term
from .policies import PolicySpec

ARM_STREAM, POLICY_STREAM, ORACLE_STREAM = 1, 2, 3


def default_checkpoints(n: int, count: int = 50) -> list[int]:
    """``count`` distinct, roughly log-spaced rounds in [1, n], ending at n."""
    if n < 1:
        raise ValueError("horizon must be >= 1")
    if n <= count:
        return list(range(1, n + 1))
    grid = np.geomspace(1, n, count)
    out: list[int] = []
    for i, g in enumerate(grid):
        remaining = count - 1 - i
        v = max(int(round(g)), out[-1] + 1 if out else 1)
        out.append(min(v, n - remaining))
    out[-1] = n
    return out


@dataclass
class ExperimentConfig:
    arms: list
    policies: list[PolicySpec]
    n: int
    replications: int = 1000
    base_seed: int = 0
    checkpoints: list[int] | None = None
    oracle_replications: int = 100_000
    name: str = "experiment"

    def __post_init__(self):
        if not self.arms:
            raise ValueError("at least one arm is required")
        if not self.policies:
            raise ValueError("at least one policy is required")
        if self.n < 1:
            raise ValueError("horizon n must be >= 1")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.oracle_replications < 1:
            raise ValueError("oracle_replications must be >= 1")
        if self.checkpoints is None:
            self.checkpoints = default_checkpoints(self.n)
        cps = [int(c) for c in self.checkpoints]
        if not cps or cps != sorted(set(cps)) or cps[0] < 1 or cps[-1] != self.n:
            raise ValueError("checkpoints must be strictly increasing in [1, n] and end at n")
        self.checkpoints = cps
        labels = [p.label for p in self.policies]
        if len(set(labels)) != len(labels):
            raise ValueError(f"policy labels must be unique, got {labels}")

    @property
    def n_arms(self) -> int:
        return len(self.arms)


# ---------------------------------------------------------------------------
# Episodes
# ---------------------------------------------------------------------------


class RewardStream:
    """Rewards of one arm, materialised in blocks from its uniform stream."""

    BLOCK = 2048

    def __init__(self, dist: ArmDistribution, stream: RngStream):
        self.dist = dist
        self._gen = stream.generator()
        self._pos = self.BLOCK
        self._buf: list[float] = []
        self.drawn = 0

    def next(self) -> float:
        if self._pos == self.BLOCK:
            self._buf = np.asarray(sample_from_uniform(self.dist, self._gen.random(self.BLOCK)), dtype=float).tolist()
            self._pos = 0
        v = self._buf[self._pos]
        self._pos += 1
        self.drawn += 1
        return v


@dataclass
class EpisodeResult:
    checkpoints: list[int]
    running_max: np.ndarray      # G_t at each checkpoint
    pulls: np.ndarray            # pull counts per arm at each checkpoint, shape (C, K)
    samples_drawn: int

    @property
    def final_counts(self) -> np.ndarray:
        return self.pulls[-1]


def run_episode(spec: PolicySpec, arms, n: int, base_seed: int, replication: int = 0,
                policy_index: int = 0, checkpoints=None, best_arm: int | None = None) -> EpisodeResult:
    """Play one episode of ``n`` rounds under bandit feedback.

    Only the chosen arm is sampled each round.
    """
    K = len(arms)
    checkpoints = default_checkpoints(n) if checkpoints is None else list(checkpoints)
    root = RngStream(base_seed)
    streams = [RewardStream(d, root.child(ARM_STREAM, replication, k)) for k, d in enumerate(arms)]
    policy = spec.build(K, n, root.child(POLICY_STREAM, policy_index, replication), best_arm=best_arm)

    running_max = np.empty(len(checkpoints))
    pulls = np.empty((len(checkpoints), K), dtype=np.int64)
    g = -math.inf
    c = 0
    next_cp = checkpoints[0]
    for t in range(n):
        arm = policy.select(t)
        x = streams[arm].next()
        policy.update(arm, x)
        if x > g:
            g = x
        if t + 1 == next_cp:
            running_max[c] = g
            pulls[c] = policy.counts
            c += 1
            next_cp = checkpoints[c] if c < len(checkpoints) else -1
    return EpisodeResult(checkpoints, running_max, pulls, sum(s.drawn for s in streams))


# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------


@dataclass
class OracleCurve:
    checkpoints: list[int]
    mean: np.ndarray          # max over arms of E[max of t draws]
    sem: np.ndarray
    best_arm: np.ndarray
    arm_mean: np.ndarray      # shape (K, C)
    arm_sem: np.ndarray


ORACLE_MIX, ORACLE_POWER = 0.5, 0.95


def _oracle_tail_draws(gen: np.random.Generator, replications: int):
    """Tail gaps w = 1 - v from a defensive mixture and their importance weights.

    With probability ORACLE_MIX w is uniform; otherwise w has density
    (1 - g) w^-g with g = ORACLE_POWER, which crowds draws near v = 1 where
    the maximum of heavy-tailed draws lives. Weighting by 1 / q(w) keeps
    the estimator unbiased and its variance finite for tail index alpha
    above 2 / (1 + g), about 1.03, where plain sampling has infinite
    variance once alpha < 2.
    """
    u = gen.random((2, replications))
    w = np.where(u[0] < ORACLE_MIX, u[1], u[1] ** (1.0 / (1.0 - ORACLE_POWER)))
    with np.errstate(divide="ignore"):
        density = ORACLE_MIX + (1.0 - ORACLE_MIX) * (1.0 - ORACLE_POWER) * w ** (-ORACLE_POWER)
    return w, 1.0 / density


def max_sample_from_tail_gap(dist: ArmDistribution, t: int, w) -> np.ndarray:
    """Maximum of t draws at CDF level 1 - w, i.e. F^-t evaluated at 1 - w."""
    q = -np.expm1(np.log1p(-np.asarray(w, dtype=float)) / t)
    q = np.clip(np.where(w >= 1, 1.0, q), np.finfo(float).tiny, 1.0)
    with np.errstate(divide="ignore"):
        return np.asarray(dist.isf(q), dtype=float)


def _weighted_mean_sem(x: np.ndarray, wt: np.ndarray) -> tuple[float, float]:
    # self-normalised; centring on the minimum makes constant arms exact
    total = wt.sum()
    x0 = x.min()
    d = x - x0
    m = float(np.dot(wt, d) / total)
    sem = math.sqrt(float(np.dot(wt ** 2, (d - m) ** 2))) / total
    return x0 + m, sem


def oracle_curve(arms, checkpoints, replications: int = 100_000, seed: int = 0) -> OracleCurve:
    """Monte Carlo estimate of max_k E[max of t i.i.d. draws of arm k] per checkpoint.

    Each replication maps one tail gap w per arm to the maximum of t draws
    through the inverse CDF of F^t (an importance-sampled draw, see
    :func:`_oracle_tail_draws`). All checkpoints share the same draws, so
    the estimated curve is nondecreasing in t.
    """
    root = RngStream(seed)
    cps = list(checkpoints)
    K = len(arms)
    arm_mean = np.empty((K, len(cps)))
    arm_sem = np.empty((K, len(cps)))
    for k, dist in enumerate(arms):
        w, wt = _oracle_tail_draws(root.child(ORACLE_STREAM, k).generator(), replications)
        for j, t in enumerate(cps):
            arm_mean[k, j], arm_sem[k, j] = _weighted_mean_sem(max_sample_from_tail_gap(dist, t, w), wt)
    best = np.argmax(arm_mean, axis=0)  # first maximum, i.e. lowest index on ties
    cols = np.arange(len(cps))
    return OracleCurve(cps, arm_mean[best, cols], arm_sem[best, cols], best, arm_mean, arm_sem)


def analytic_oracle(arms, t: int) -> float | None:
    """Fréchet main term of the best analytic arm, for cross-checks; None if unavailable."""
    terms = []
    for d in arms:
        if isinstance(d, ExactPareto) and d.alpha > 1:
            terms.append(frechet_main_term(t, d.C, d.alpha))
        elif isinstance(d, DiracMixture) and d.pareto.alpha > 1 and d.weight_pareto > 0:
            terms.append(frechet_main_term(t, d.weight_pareto * d.pareto.C, d.pareto.alpha))
        else:
            return None
    return max(terms)


# ---------------------------------------------------------------------------
# Regret curves
# ---------------------------------------------------------------------------


@dataclass
class RegretCurve:
    label: str
    checkpoints: list[int]
    regret_mean: np.ndarray
    regret_sem: np.ndarray
    gain_mean: np.ndarray
    gain_sem: np.ndarray
    pull_fraction: np.ndarray     # shape (C, K)
    final_gains: np.ndarray       # G_n per replication


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    oracle: OracleCurve
    curves: list[RegretCurve] = field(default_factory=list)

    def curve(self, label: str) -> RegretCurve:
        for c in self.curves:
            if c.label == label:
                return c
        raise KeyError(label)

    def to_csv(self) -> str:
        return regret_csv(self)


def _episode_task(args):
    spec, arms, n, seed, rep, p_idx, cps, best = args
    return run_episode(spec, arms, n, seed, rep, p_idx, cps, best)


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("EXTREME_BANDITS_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def run_episodes(tasks, threads: int = 1) -> list[EpisodeResult]:
    """Run episode tasks, preserving task order regardless of the worker count."""
    if threads <= 1 or len(tasks) <= 1:
        return [_episode_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_episode_task, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


def regret_curves(config: ExperimentConfig, threads: int | None = None) -> ExperimentResult:
    """Extreme regret E[G*_t] - E[G_t] per policy and checkpoint.

    The regret standard error combines the oracle's Monte Carlo error and the
    episode-to-episode error in quadrature.
    """
    threads = resolve_threads(threads)
    cps = config.checkpoints
    oracle = oracle_curve(config.arms, cps, config.oracle_replications, config.base_seed)
    best = int(oracle.best_arm[-1])
    R = config.replications
    tasks = [(spec, config.arms, config.n, config.base_seed, r, p, cps, best)
             for p, spec in enumerate(config.policies) for r in range(R)]
    episodes = run_episodes(tasks, threads)

    result = ExperimentResult(config, oracle)
    for p, spec in enumerate(config.policies):
        eps = episodes[p * R:(p + 1) * R]
        gains = np.stack([e.running_max for e in eps])                 # (R, C)
        pulls = np.stack([e.pulls for e in eps]).astype(float)         # (R, C, K)
        gain_mean = gains.mean(axis=0)
        gain_sem = gains.std(axis=0, ddof=1) / math.sqrt(R) if R > 1 else np.zeros(len(cps))
        frac = pulls.mean(axis=0) / np.asarray(cps, dtype=float)[:, None]
        result.curves.append(RegretCurve(
            label=spec.label,
            checkpoints=cps,
            regret_mean=oracle.mean - gain_mean,
            regret_sem=np.sqrt(oracle.sem ** 2 + gain_sem ** 2),
            gain_mean=gain_mean,
            gain_sem=gain_sem,
            pull_fraction=frac,
            final_gains=gains[:, -1].copy(),
        ))
    return result


def _fmt(v: float) -> str:
    return format(float(v), ".9g")


def regret_csv(result: ExperimentResult) -> str:
    K = result.config.n_arms
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["policy", "checkpoint", "regret_mean", "regret_sem", "oracle_mean"]
               + [f"pull_frac_{k}" for k in range(K)])
    for c in result.curves:
        for j, t in enumerate(c.checkpoints):
            w.writerow([c.label, t, _fmt(c.regret_mean[j]), _fmt(c.regret_sem[j]), _fmt(result.oracle.mean[j])]
                       + [_fmt(f) for f in c.pull_fraction[j]])
    return buf.getvalue()


def read_regret_csv(path) -> dict[str, dict[str, np.ndarray]]:
    """Parse a regret CSV back into ``{policy: {column: array}}``."""
    out: dict[str, dict[str, list]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            cols = out.setdefault(row.pop("policy"), {})
            for key, val in row.items():
                cols.setdefault(key, []).append(float(val))
    return {p: {k: np.asarray(v) for k, v in cols.items()} for p, cols in out.items()}


def combined_sem(a: RegretCurve, b: RegretCurve, j: int = -1) -> float:
    """Standard error of the regret difference a - b at checkpoint j.

    The oracle term is shared by both curves and cancels in the difference,
    so only the two episode errors are combined.
    """
    return math.hypot(a.gain_sem[j], b.gain_sem[j])


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def default_policies() -> list[PolicySpec]:
    return [
        PolicySpec("extreme_hunter", {"b": 1.0}),
        PolicySpec("ucb1"),
        PolicySpec("threshold_ascent", {"s": 100, "delta": 0.01}),
    ]


PRESETS = {
    "pareto3": "three exact Pareto arms, alpha = [5, 1.1, 2], n = 10^4",
    "mixture3": "Pareto(1.5), 0.2 Pareto(1.1) + 0.8 Dirac(0), Pareto(3), n = 10^4",
    "trace": "five empirical-replay arms from a network trace, n = 10^4",
}


def preset(name: str, trace=None, **overrides) -> ExperimentConfig:
    """Build one of the named experiment configurations.

    ``trace`` (a :class:`~extreme_bandits.traces.TraceDataset` or a path) is
    required for ``"trace"``. Keyword overrides replace config fields.
    """
    if name == "pareto3":
        arms = [ExactPareto(5.0), ExactPareto(1.1), ExactPareto(2.0)]
    elif name == "mixture3":
        arms = [ExactPareto(1.5), DiracMixture(0.2, ExactPareto(1.1), 0.0), ExactPareto(3.0)]
    elif name == "trace":
        from .traces import TraceDataset, ingest_trace

        if trace is None:
            raise ValueError("the trace preset needs a trace dataset or path")
        data = trace if isinstance(trace, TraceDataset) else ingest_trace(trace)
        arms = data.arms()
    else:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    fields = dict(arms=arms, policies=default_policies(), n=10_000, replications=1000,
                  base_seed=0, checkpoints=None, oracle_replications=100_000, name=name)
    unknown = set(overrides) - set(fields)
    if unknown:
        raise TypeError(f"unknown preset override(s): {sorted(unknown)}")
    fields.update(overrides)
    if "n" in overrides and "checkpoints" not in overrides:
        fields["checkpoints"] = None
    return ExperimentConfig(**fields)
