"""Heavy-tailed reward sources used as bandit arms.

Every distribution is sampled by inverse transform of a single uniform, so a
stream of uniforms fully determines a stream of rewards. All emitted values
are nonnegative.

>>> arm = ExactPareto(alpha=2.0, C=1.0)
>>> arm.quantile(0.75)
2.0
>>> float(arm.survival(100.0)) == 1e-4
True
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np


@dataclass(frozen=True)
class SecondOrderParetoParams:
    """Parameters of the bound |1 - P(x) - C x^-alpha| <= C' x^-alpha(1+beta)."""

    alpha: float
    C: float
    C_prime: float = 0.0
    beta: float = math.inf

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.C > 0:
            raise ValueError(f"C must be > 0, got {self.C}")
        if not self.C_prime >= 0:
            raise ValueError(f"C_prime must be >= 0, got {self.C_prime}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")

    @property
    def is_exact(self) -> bool:
        return self.C_prime == 0.0


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


def derive_stream_id(*parts: int) -> int:
    """Fold a tuple of nonnegative integers into one 64-bit stream id."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(int(p).to_bytes(8, "little", signed=False))
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, self.stream_id])))

    def child(self, *parts: int) -> "RngStream":
        return RngStream(self.seed, derive_stream_id(self.stream_id, *parts))


class UniformStream:
    """Sequential uniforms on [0, 1) drawn from an :class:`RngStream` in fixed blocks.

    The i-th call to :meth:`next` always returns the i-th uniform of the
    stream regardless of how many values were requested before.
    """

    BLOCK = 2048

    def __init__(self, stream: RngStream):
        self._gen = stream.generator()
        self._buf = self._gen.random(self.BLOCK)
        self._pos = 0
        self.drawn = 0

    def next(self) -> float:
        if self._pos == self.BLOCK:
            self._buf = self._gen.random(self.BLOCK)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        self.drawn += 1
        return float(u)


# ---------------------------------------------------------------------------
# Distribution kinds
# ---------------------------------------------------------------------------


def _as_float_array(x):
    return np.asarray(x, dtype=float)


def _check_nonnegative(x):
    if np.any(np.asarray(x) < 0):
        raise ValueError("survival is only defined for x >= 0")


def _check_prob(p):
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr >= 0) & (arr < 1))):
        raise ValueError(f"probability must lie in [0, 1), got {p}")


def _scalar_or_array(result, like):
    if np.ndim(like) == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class ExactPareto:
    """P(x) = 1 - C x^-alpha on x >= C^(1/alpha)."""

    alpha: float
    C: float = 1.0

    def __post_init__(self):
        SecondOrderParetoParams(self.alpha, self.C)  # validates

    @property
    def params(self) -> SecondOrderParetoParams:
        return SecondOrderParetoParams(self.alpha, self.C, 0.0, math.inf)

    @property
    def lower_edge(self) -> float:
        return self.C ** (1.0 / self.alpha)

    def survival(self, x):
        _check_nonnegative(x)
        xa = _as_float_array(x)
        with np.errstate(divide="ignore"):
            s = np.where(xa <= self.lower_edge, 1.0, self.C * xa ** (-self.alpha))
        return _scalar_or_array(s, x)

    def isf(self, q):
        """Smallest x with survival(x) <= q, for q in (0, 1]."""
        qa = _as_float_array(q)
        return _scalar_or_array((self.C / qa) ** (1.0 / self.alpha), q)

    def quantile(self, p):
        _check_prob(p)
        return self.isf(1.0 - _as_float_array(p))

    def mean(self) -> float:
        if self.alpha <= 1:
            return math.inf
        return self.alpha / (self.alpha - 1.0) * self.lower_edge


@dataclass(frozen=True)
class Frechet:
    """P(x) = exp(-((x - m)/s)^-alpha) on x >= m."""

    alpha: float
    s: float = 1.0
    m: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0 or not self.s > 0:
            raise ValueError("Frechet needs alpha > 0 and s > 0")
        if self.m < 0:
            raise ValueError("Frechet location m must be >= 0 so samples stay nonnegative")

    def survival(self, x):
        _check_nonnegative(x)
        xa = _as_float_array(x)
        z = (xa - self.m) / self.s
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(z <= 0, 1.0, -np.expm1(-np.power(np.where(z > 0, z, 1.0), -self.alpha)))
        return _scalar_or_array(s, x)

    def isf(self, q):
        qa = _as_float_array(q)
        with np.errstate(divide="ignore"):
            x = self.m + self.s * (-np.log1p(-qa)) ** (-1.0 / self.alpha)
        return _scalar_or_array(x, q)

    def quantile(self, p):
        _check_prob(p)
        pa = _as_float_array(p)
        with np.errstate(divide="ignore"):
            x = np.where(pa == 0, self.m, self.m + self.s * (-np.log(np.where(pa > 0, pa, 1.0))) ** (-1.0 / self.alpha))
        return _scalar_or_array(x, p)


@dataclass(frozen=True)
class DiracMixture:
    """With probability ``weight_pareto`` an exact Pareto draw, else the atom.

    Survival counts the atom as reached at x == atom, so with the default atom
    at 0 we get survival(0) == 1 and survival(x) == w * S_pareto(x) for x > 0.
    """

    weight_pareto: float
    pareto: ExactPareto
    atom: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.weight_pareto <= 1.0:
            raise ValueError(f"weight_pareto must be in [0, 1], got {self.weight_pareto}")
        if self.atom < 0:
            raise ValueError("atom must be >= 0")

    def survival(self, x):
        _check_nonnegative(x)
        xa = _as_float_array(x)
        w = self.weight_pareto
        s = w * _as_float_array(self.pareto.survival(xa)) + (1.0 - w) * (xa <= self.atom)
        return _scalar_or_array(s, x)

    def _cdf_below_atom(self) -> float:
        # Pareto mass strictly below the atom
        return self.weight_pareto * (1.0 - float(self.pareto.survival(self.atom)))

    def isf(self, q):
        """Value whose upper-tail probability P(X > x) is q (right-continuous CDF)."""
        qa = _as_float_array(q)
        w = self.weight_pareto
        below = self._cdf_below_atom()
        p = 1.0 - qa
        with np.errstate(divide="ignore", invalid="ignore"):
            lower = self.pareto.isf(np.clip(1.0 - p / w, 1e-300, 1.0)) if w > 0 else np.zeros_like(qa)
            upper = self.pareto.isf(np.clip(qa / w, 1e-300, 1.0)) if w > 0 else np.zeros_like(qa)
        x = np.where(p <= below, lower, np.where(p <= below + (1.0 - w), self.atom, upper))
        return _scalar_or_array(x, q)

    def quantile(self, p):
        _check_prob(p)
        pa = _as_float_array(p)
        x = _as_float_array(self.isf(1.0 - pa))
        if self.weight_pareto < 1.0:
            x = np.where(pa == 0, min(self.atom, self.pareto.lower_edge), x)
        return _scalar_or_array(x, p)

    def mean(self) -> float:
        return self.weight_pareto * self.pareto.mean() + (1.0 - self.weight_pareto) * self.atom


@dataclass(frozen=True)
class EmpiricalReplay:
    """Bootstrap replay of recorded values (uniform draws with replacement)."""

    samples: tuple = field()
    label: str = ""

    def __post_init__(self):
        if len(self.samples) == 0:
            raise ValueError("EmpiricalReplay needs at least one sample")
        arr = np.asarray(self.samples, dtype=float)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("EmpiricalReplay samples must be finite and >= 0")
        object.__setattr__(self, "samples", tuple(float(v) for v in arr))
        object.__setattr__(self, "_values", arr)
        object.__setattr__(self, "_sorted", np.sort(arr))

    def survival(self, x):
        _check_nonnegative(x)
        xa = _as_float_array(x)
        n = len(self._sorted)
        # fraction of samples >= x, matching the mixture's atom convention
        s = (n - np.searchsorted(self._sorted, xa, side="left")) / n
        return _scalar_or_array(s, x)

    def isf(self, q):
        qa = _as_float_array(q)
        n = len(self._sorted)
        idx = np.clip(np.ceil((1.0 - qa) * n).astype(np.int64) - 1, 0, n - 1)
        return _scalar_or_array(self._sorted[idx], q)

    def quantile(self, p):
        _check_prob(p)
        return self.isf(1.0 - _as_float_array(p))

    def sample_from_uniform(self, u):
        ua = _as_float_array(u)
        n = len(self._values)
        idx = np.minimum((ua * n).astype(np.int64), n - 1)
        return _scalar_or_array(self._values[idx], u)

    def mean(self) -> float:
        return float(np.mean(self._values))


ArmDistribution = Union[ExactPareto, Frechet, DiracMixture, EmpiricalReplay]


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------


def sample_from_uniform(dist: ArmDistribution, u):
    """Map uniform(s) in [0, 1) to draws of ``dist`` by inverse transform."""
    if isinstance(dist, EmpiricalReplay):
        return dist.sample_from_uniform(u)
    return dist.quantile(u)


def sample(dist: ArmDistribution, rng: RngStream | np.random.Generator, size=None):
    """Draw from ``dist``.

    For the mixture a single uniform both selects the component and places
    the Pareto draw; this is the inverse-CDF form of the Bernoulli-then-draw
    construction.
    """
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return sample_from_uniform(dist, gen.random(size))


def survival(dist: ArmDistribution, x):
    return dist.survival(x)


def quantile(dist: ArmDistribution, p):
    if isinstance(dist, EmpiricalReplay):
        raise TypeError("quantile is only defined for analytic distributions")
    return dist.quantile(p)


def max_sample_from_uniform(dist: ArmDistribution, t: int, v):
    """Draw of max(X_1..X_t) from uniform(s) ``v``: the inverse CDF of F^t at v.

    The tail probability 1 - v^(1/t) is formed with expm1 so large t keeps
    full precision.
    """
    va = _as_float_array(v)
    with np.errstate(divide="ignore"):
        q = -np.expm1(np.log(va) / t)
    q = np.where(va == 0, 1.0, q)
    q = np.clip(q, np.finfo(float).tiny, 1.0)
    with np.errstate(divide="ignore"):
        return _as_float_array(dist.isf(q))


@dataclass
class SecondOrderReport:
    max_violation: float
    worst_x: float
    violations: np.ndarray
    slack: np.ndarray | None = None     # floating-point rounding allowance per point

    @property
    def conformant(self) -> bool:
        if self.slack is None:
            return self.max_violation <= 0.0
        return bool(np.all(self.violations <= self.slack))


def check_second_order_pareto(dist, params: SecondOrderParetoParams, grid: Sequence[float]) -> SecondOrderReport:
    """Largest value of |S(x) - C x^-a| - C' x^-a(1+b) over ``grid``.

    ``dist`` may be an arm distribution or any callable returning the
    survival function. A nonpositive maximum means the distribution satisfies
    the second-order bound on the grid.
    """
    xs = _as_float_array(grid)
    _check_nonnegative(xs)
    surv = dist.survival if hasattr(dist, "survival") else dist
    s = _as_float_array(surv(xs))
    with np.errstate(divide="ignore", over="ignore"):
        first = params.C * xs ** (-params.alpha)
        if params.C_prime == 0.0:
            second = np.zeros_like(xs)
        elif math.isinf(params.beta):
            second = np.where(xs > 1, 0.0, np.where(xs == 1, params.C_prime, math.inf))
        else:
            second = params.C_prime * xs ** (-params.alpha * (1.0 + params.beta))
    viol = np.abs(s - first) - second
    # exact matches (e.g. degenerate infinities at x -> 0) count as conformant
    viol = np.where(np.isnan(viol), 0.0, viol)
    with np.errstate(invalid="ignore"):
        slack = 8 * np.finfo(float).eps * np.nan_to_num(np.abs(s) + first + second, posinf=0.0)
    i = int(np.argmax(viol))
    return SecondOrderReport(float(viol[i]), float(xs[i]), viol, slack)


def second_order_survival(params: SecondOrderParetoParams):
    """Survival 1 - P with P(x) = 1 - C x^-a - C' x^-a(1+b), clamped to [0, 1]."""

    def surv(x):
        xa = _as_float_array(x)
        with np.errstate(divide="ignore", over="ignore"):
            s = params.C * xa ** (-params.alpha)
            if params.C_prime:
                s = s + params.C_prime * xa ** (-params.alpha * (1.0 + params.beta))
        return np.clip(s, 0.0, 1.0)

    return surv
