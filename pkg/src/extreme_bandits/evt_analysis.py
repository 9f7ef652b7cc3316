"""Closed-form extreme-value quantities for second-order Pareto samples.

Used as numerical oracles: the Fréchet main term of the expected maximum,
the pointwise deviation bound between the CDF of the maximum and its Fréchet
limit, the constant past which that bound holds, and the relative gap
between arms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import SecondOrderParetoParams


def _require_alpha_above_one(alpha: float) -> None:
    if not alpha > 1:
        raise ValueError(f"alpha must be > 1 for the expected maximum to be finite (got alpha = {alpha})")


def frechet_main_term(n: float, C: float, alpha: float) -> float:
    """(nC)^(1/alpha) * Gamma(1 - 1/alpha).

    >>> round(frechet_main_term(100, 1.0, 2.0), 5)
    17.72454
    """
    _require_alpha_above_one(alpha)
    if not C > 0 or not n >= 1:
        raise ValueError("need C > 0 and n >= 1")
    return (n * C) ** (1.0 / alpha) * math.gamma(1.0 - 1.0 / alpha)


def exact_pareto_expected_max(n: int, C: float, alpha: float) -> float:
    """E[max of n draws] for P(x) = 1 - C x^-alpha, exactly: C^(1/a) n B(n, 1 - 1/a)."""
    _require_alpha_above_one(alpha)
    a = 1.0 / alpha
    log_beta = math.lgamma(n) + math.lgamma(1.0 - a) - math.lgamma(n + 1.0 - a)
    return C ** a * n * math.exp(log_beta)


def d_constant(p: float, alpha: float) -> float:
    """Gamma(p - 1/alpha) / alpha, the integral of exp(-y) y^p against dx with y = TCx^-alpha."""
    if not p > 1.0 / alpha:
        raise ValueError("D_p needs p > 1/alpha")
    return math.gamma(p - 1.0 / alpha) / alpha


def b_constant(params: SecondOrderParetoParams, T: float) -> float:
    """max((2C'/C)^(1/(alpha beta)), (8C)^(1/alpha), (2TC')^(1/(alpha(1+beta))))."""
    a, C, Cp, beta = params.alpha, params.C, params.C_prime, params.beta
    terms = [(8.0 * C) ** (1.0 / a)]
    if Cp > 0:
        terms.append((2.0 * Cp / C) ** (1.0 / (a * beta)))
        terms.append((2.0 * T * Cp) ** (1.0 / (a * (1.0 + beta))))
    return max(terms)


@dataclass(frozen=True)
class MaxDeviationBound:
    M: float
    B_const: float
    x: float
    T: float

    @property
    def valid(self) -> bool:
        return self.x >= self.B_const


def deviation_m(params: SecondOrderParetoParams, T: float, x):
    """(4/T)(TCx^-a)^2 + (2C'/(C^(b+1) T^b)) (TCx^-a)^(b+1), vectorised over x."""
    a, C, Cp, beta = params.alpha, params.C, params.C_prime, params.beta
    xa = np.asarray(x, dtype=float)
    y = T * C * xa ** (-a)
    m = 4.0 / T * y ** 2
    if Cp > 0 and math.isfinite(beta):
        m = m + 2.0 * Cp / (C ** (beta + 1.0) * T ** beta) * y ** (beta + 1.0)
    return float(m) if np.ndim(x) == 0 else m


def lemma3_bound(params: SecondOrderParetoParams, T: float, x: float) -> MaxDeviationBound:
    if not T >= 1 or not x > 0:
        raise ValueError("need T >= 1 and x > 0")
    return MaxDeviationBound(deviation_m(params, T, x), b_constant(params, T), float(x), float(T))


def expected_max_error_bound(params: SecondOrderParetoParams, T: float) -> float:
    """Bound on |E max - (TC)^(1/a) Gamma(1 - 1/a)| for T second-order Pareto draws."""
    a, C, Cp, beta = params.alpha, params.C, params.C_prime, params.beta
    _require_alpha_above_one(a)
    scale = (T * C) ** (1.0 / a)
    bound = 4.0 * d_constant(2.0, a) / T * scale + b_constant(params, T)
    if Cp > 0 and math.isfinite(beta):
        bound += 2.0 * Cp * d_constant(beta + 1.0, a) / (C ** (beta + 1.0) * T ** beta) * scale
    return bound


def max_cdf_exact_pareto(params: SecondOrderParetoParams, T: float, x):
    """P(max of T draws <= x) = (1 - Cx^-alpha)^T, evaluated as exp(T log1p(-y))."""
    xa = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        y = params.C * xa ** (-params.alpha)
    safe = np.where(y < 1, y, 0.0)
    out = np.where(y >= 1, 0.0, np.exp(T * np.log1p(-safe)))
    return float(out) if np.ndim(x) == 0 else out


def _log1p_neg_plus(y):
    # log(1 - y) + y without cancellation for small y
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1e-3
    ys = np.where(small, y, 0.0)
    series = -(ys ** 2) * (0.5 + ys * (1.0 / 3.0 + ys * (0.25 + ys * (0.2 + ys / 6.0))))
    yl = np.where(small, 0.0, np.minimum(y, 1.0 - 1e-300))
    direct = np.log1p(-yl) + yl
    return np.where(small, series, direct)


def max_cdf_relative_deviation(params: SecondOrderParetoParams, T: float, x, excess=None):
    """(P(max <= x) - exp(-TCx^-a)) / exp(-TCx^-a), accurate even when tiny.

    The arm survival is taken to be Cx^-a + excess(x); ``excess`` defaults to
    zero (exact Pareto). Passing the correction separately keeps full
    relative precision far in the tail. The arm CDF must be positive on x.
    """
    xa = np.asarray(x, dtype=float)
    y = params.C * xa ** (-params.alpha)
    z = np.zeros_like(y) if excess is None else np.asarray(excess(xa), dtype=float)
    s = y + z
    if np.any(s >= 1):
        raise ValueError("relative deviation needs P(x) > 0")
    # T log(1 - s) + T y = T (log(1 - s) + s) - T z
    out = np.expm1(T * _log1p_neg_plus(s) - T * z)
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class GapReport:
    gaps: tuple
    best_arm: int
    main_terms: tuple


def gap(arms, n: float) -> GapReport:
    """Relative shortfall of each arm's expected-maximum proxy against the best arm.

    ``arms`` is a sequence of ``(alpha, C)`` pairs.
    """
    terms = []
    for alpha, C in arms:
        _require_alpha_above_one(alpha)
        terms.append(frechet_main_term(n, C, alpha))
    best = max(range(len(terms)), key=terms.__getitem__)
    gaps = tuple(terms[best] / t - 1.0 for t in terms)
    return GapReport(gaps, best, tuple(terms))


@dataclass(frozen=True)
class DeviationCheck:
    points: int
    violations: int
    worst_ratio: float      # largest |relative deviation| / M over the grid


def deviation_configurations(alphas=(1.5, 2.0, 3.0), c_primes=(0.0, 0.5), beta: float = 1.0,
                          Ts=(1e2, 1e3, 1e4), C: float = 1.0) -> list[tuple[SecondOrderParetoParams, float]]:
    """Default (params, T) pairs for verifying the max-CDF deviation bound."""
    return [(SecondOrderParetoParams(a, C, cp, beta if cp > 0 else math.inf), T)
            for a in alphas for cp in c_primes for T in Ts]


def deviation_grid(params: SecondOrderParetoParams, T: float, points: int = 200, decades: float = 3.0) -> np.ndarray:
    """Log-spaced x from B_const up to ``decades`` past the scale (TC)^(1/alpha)."""
    B = b_constant(params, T)
    hi = max(B, (T * params.C) ** (1.0 / params.alpha)) * 10.0 ** decades
    return np.geomspace(B, hi, points)


def verify_deviation_bound(configurations=None, points: int = 200) -> DeviationCheck:
    """Check |P(max <= x) - exp(-TCx^-a)| <= M exp(-TCx^-a) on every grid point.

    The arm CDF is 1 - Cx^-a - C'x^-a(1+beta); with C' = 0 it is the exact
    Pareto CDF. Both sides are divided by exp(-TCx^-a), which keeps the
    check meaningful where that factor underflows.
    """
    configurations = deviation_configurations() if configurations is None else configurations
    total = bad = 0
    worst = 0.0
    for params, T in configurations:
        xs = deviation_grid(params, T, points)
        a, Cp, beta = params.alpha, params.C_prime, params.beta
        excess = None
        if Cp > 0:
            def excess(x, a=a, Cp=Cp, beta=beta):
                return Cp * x ** (-a * (1.0 + beta))
        rel = np.abs(max_cdf_relative_deviation(params, T, xs, excess))
        M = deviation_m(params, T, xs)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(M > 0, rel / M, np.where(rel > 0, math.inf, 0.0))
        total += xs.size
        bad += int(np.sum(rel > M))
        worst = max(worst, float(np.max(ratio)))
    return DeviationCheck(total, bad, worst)
