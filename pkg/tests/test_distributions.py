import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extreme_bandits.distributions import (
    DiracMixture,
    EmpiricalReplay,
    ExactPareto,
    Frechet,
    RngStream,
    SecondOrderParetoParams,
    UniformStream,
    check_second_order_pareto,
    max_sample_from_uniform,
    quantile,
    sample,
    sample_from_uniform,
    second_order_survival,
    survival,
)

ANALYTIC = [
    ExactPareto(2.0, 1.0),
    ExactPareto(1.1, 3.0),
    Frechet(2.0, 1.0, 0.0),
    Frechet(1.5, 2.0, 1.0),
    DiracMixture(0.2, ExactPareto(1.1, 1.0), 0.0),
]


# --- sample -----------------------------------------------------------------


def test_pareto_quantile_at_three_quarters():
    assert quantile(ExactPareto(2.0, 1.0), 0.75) == pytest.approx(2.0, abs=1e-15)
    assert sample_from_uniform(ExactPareto(2.0, 1.0), 0.75) == pytest.approx(2.0, abs=1e-15)


def test_degenerate_mixture_emits_atom():
    draws = sample(DiracMixture(0.0, ExactPareto(2.0), 0.0), RngStream(3), size=1000)
    assert np.all(draws == 0.0)


def test_single_value_replay():
    draws = sample(EmpiricalReplay((5,)), RngStream(11), size=100)
    assert np.all(draws == 5.0)


def test_replay_bootstraps_uniformly():
    arm = EmpiricalReplay((1, 2, 3, 4))
    draws = sample(arm, RngStream(0), size=40_000)
    freq = np.array([(draws == v).mean() for v in (1, 2, 3, 4)])
    assert np.all(np.abs(freq - 0.25) < 3 * math.sqrt(0.25 * 0.75 / 40_000) + 1e-12)


def test_mixture_draw_frequencies():
    arm = DiracMixture(0.2, ExactPareto(1.1), 0.0)
    draws = sample(arm, RngStream(5), size=100_000)
    frac = (draws > 0).mean()
    assert abs(frac - 0.2) < 3 * math.sqrt(0.2 * 0.8 / 100_000)
    assert np.all(draws[draws > 0] >= 1.0)


# --- survival ---------------------------------------------------------------


def test_survival_examples():
    assert survival(ExactPareto(1.0, 1.0), 100.0) == pytest.approx(0.01, rel=1e-12)
    assert survival(Frechet(2.0, 1.0, 0.0), 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-12)
    assert survival(DiracMixture(0.2, ExactPareto(1.1), 0.0), 2.0) == pytest.approx(0.2 * 2 ** -1.1, rel=1e-12)
    assert survival(DiracMixture(0.2, ExactPareto(1.1), 0.0), 2.0) == pytest.approx(0.09330, abs=1e-5)


def test_mixture_atom_convention():
    arm = DiracMixture(0.2, ExactPareto(1.1), 0.0)
    assert survival(arm, 0.0) == 1.0
    assert survival(arm, 0.5) == pytest.approx(0.2)


def test_survival_rejects_negative_x():
    for arm in ANALYTIC + [EmpiricalReplay((1, 2))]:
        with pytest.raises(ValueError):
            survival(arm, -1.0)


def test_replay_survival_is_empirical_fraction():
    arm = EmpiricalReplay((0, 1, 1, 3))
    assert survival(arm, 1.0) == 0.75
    assert survival(arm, 2.0) == 0.25
    assert survival(arm, 4.0) == 0.0


# --- quantile ---------------------------------------------------------------


def test_quantile_examples():
    assert quantile(ExactPareto(1.0, 1.0), 0.99) == pytest.approx(100.0, rel=1e-12)
    assert quantile(ExactPareto(2.0, 1.0), 0.0) == 1.0
    assert quantile(Frechet(1.0, 1.0, 0.0), math.exp(-1)) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("p", [-0.1, 1.0, 1.5])
def test_quantile_rejects_bad_probability(p):
    with pytest.raises(ValueError):
        quantile(ExactPareto(2.0), p)


def test_quantile_rejects_replay():
    with pytest.raises(TypeError):
        quantile(EmpiricalReplay((1.0,)), 0.5)


@pytest.mark.parametrize("arm", ANALYTIC, ids=repr)
def test_round_trip_on_decile_grid(arm):
    for p in np.arange(1, 10) / 10:
        x = quantile(arm, p)
        if isinstance(arm, DiracMixture) and x <= arm.atom:
            continue  # the atom absorbs a whole interval of p
        assert survival(arm, x) == pytest.approx(1 - p, abs=1e-12)


@given(p=st.floats(0.0, 0.999999), alpha=st.floats(0.2, 8.0), C=st.floats(0.1, 10.0))
def test_pareto_round_trip_property(p, alpha, C):
    arm = ExactPareto(alpha, C)
    x = quantile(arm, p)
    assert survival(arm, x) == pytest.approx(1 - p, rel=1e-9, abs=1e-12)


@given(p=st.floats(0.001, 0.999), alpha=st.floats(0.5, 6.0), s=st.floats(0.1, 5.0), m=st.floats(0.0, 5.0))
def test_frechet_round_trip_property(p, alpha, s, m):
    arm = Frechet(alpha, s, m)
    assert survival(arm, quantile(arm, p)) == pytest.approx(1 - p, rel=1e-9, abs=1e-12)


def test_mixture_quantile_at_zero_is_lower_edge():
    assert quantile(DiracMixture(0.2, ExactPareto(1.1), 0.0), 0.0) == 0.0


# --- sample properties ------------------------------------------------------


@pytest.mark.parametrize("arm", ANALYTIC + [EmpiricalReplay((0, 2, 7))], ids=repr)
def test_samples_nonnegative(arm):
    draws = sample(arm, RngStream(1), size=1_000_000)
    assert np.all(draws >= 0)


@pytest.mark.parametrize("alpha,C", [(2.0, 1.0), (1.1, 1.0), (3.0, 2.0)])
def test_empirical_survival_matches_pareto(alpha, C):
    n = 1_000_000
    draws = sample(ExactPareto(alpha, C), RngStream(2024), size=n)
    for x in (2.0, 5.0, 10.0):
        p = min(1.0, C * x ** -alpha)
        se = math.sqrt(p * (1 - p) / n)
        assert abs((draws >= x).mean() - p) <= 3 * se + 1e-15


def test_stream_determinism():
    a = sample(ExactPareto(1.5), RngStream(9, 4), size=1000)
    b = sample(ExactPareto(1.5), RngStream(9, 4), size=1000)
    c = sample(ExactPareto(1.5), RngStream(9, 5), size=1000)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_child_streams_are_distinct_and_stable():
    root = RngStream(7)
    assert root.child(1, 2) == root.child(1, 2)
    assert root.child(1, 2) != root.child(2, 1)


def test_uniform_stream_position_is_independent_of_block():
    s = UniformStream(RngStream(1, 2))
    values = [s.next() for _ in range(5000)]
    direct = RngStream(1, 2).generator().random(UniformStream.BLOCK * 3)[:5000]
    assert np.array_equal(values, direct)


# --- validation -------------------------------------------------------------


@pytest.mark.parametrize("kwargs", [dict(alpha=0, C=1), dict(alpha=1, C=0), dict(alpha=1, C=1, C_prime=-1),
                                    dict(alpha=1, C=1, beta=0)])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        SecondOrderParetoParams(**kwargs)


def test_distribution_validation():
    with pytest.raises(ValueError):
        DiracMixture(1.5, ExactPareto(2.0))
    with pytest.raises(ValueError):
        EmpiricalReplay(())
    with pytest.raises(ValueError):
        EmpiricalReplay((-1.0,))
    with pytest.raises(ValueError):
        Frechet(0.0)


def test_exact_pareto_params_use_infinite_beta():
    p = ExactPareto(2.0, 3.0).params
    assert p.C_prime == 0 and math.isinf(p.beta)


# --- second-order conformance -----------------------------------------------


def test_exact_pareto_conforms_to_itself():
    arm = ExactPareto(2.0, 1.0)
    report = check_second_order_pareto(arm, arm.params, np.geomspace(1, 1e6, 500))
    assert report.max_violation == 0.0 and report.conformant


def test_mixture_conforms_with_scaled_params():
    arm = DiracMixture(0.2, ExactPareto(1.1, 1.0), 0.0)
    params = SecondOrderParetoParams(1.1, 0.2, 0.8, 50.0)
    assert check_second_order_pareto(arm, params, np.geomspace(1, 1e6, 500)).max_violation <= 0


def test_frechet_conforms_on_grid():
    report = check_second_order_pareto(Frechet(2.0, 1.0, 0.0), SecondOrderParetoParams(2.0, 1.0, 1.0, 1.0),
                                       np.geomspace(2, 100, 500))
    assert report.max_violation <= 0


def test_checker_detects_wrong_index():
    report = check_second_order_pareto(ExactPareto(2.0), SecondOrderParetoParams(1.5, 1.0, 0.1, 1.0),
                                       np.geomspace(1, 1e3, 100))
    assert not report.conformant and report.max_violation > 0


def test_constructed_second_order_cdf_conforms():
    params = SecondOrderParetoParams(2.0, 1.0, 0.5, 1.0)
    surv = second_order_survival(params)
    assert check_second_order_pareto(surv, params, np.geomspace(2, 1e5, 400)).conformant


# --- maximum of t draws --------------------------------------------------------


def test_max_sample_matches_direct_maximum_in_distribution():
    arm = ExactPareto(2.0)
    gen = np.random.default_rng(0)
    direct = np.max(sample(arm, gen, size=(20_000, 50)), axis=1)
    via_inverse = max_sample_from_uniform(arm, 50, np.random.default_rng(1).random(20_000))
    for x in (5.0, 10.0, 20.0):
        p1, p2 = (direct > x).mean(), (via_inverse > x).mean()
        se = math.sqrt(p1 * (1 - p1) / 20_000 * 2)
        assert abs(p1 - p2) < 4 * se


@settings(max_examples=50)
@given(t=st.integers(1, 10_000), v=st.floats(0.0, 0.999999))
def test_max_sample_nondecreasing_in_t(t, v):
    arm = Frechet(1.5)
    assert max_sample_from_uniform(arm, t + 1, v) >= max_sample_from_uniform(arm, t, v)
