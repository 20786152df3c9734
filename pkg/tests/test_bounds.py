import math

import numpy as np
import pytest

from psgdlab.bounds import (
    covering_constants,
    covering_log_map,
    covering_number_bound,
    dudley_discrete_bound,
    dudley_gradient_concentration,
    dudley_integral_bound,
    inexact_bound,
    largest_dyadic_index,
    log_covering_number_bound,
    main_theorem_bound,
    opt_error_bound,
    stability_bound,
    strongly_convex_bound,
)
from psgdlab.optimizer import StepSchedule


def test_opt_bound_plug_in():
    # 2^2 / (2 * 100 * 0.1) = 0.2
    rep = opt_error_bound(100, StepSchedule.constant(0.1), 2.0, 0.0)
    assert np.isclose(rep.value, 0.2)


def test_opt_bound_zero_at_optimum():
    assert opt_error_bound(100, StepSchedule.constant(0.1), 0.0, 0.0).value == 0.0


def test_opt_bound_vanishes_inverse_sqrt():
    s = StepSchedule.inverse_sqrt(1.0, cap=1.0)
    v3 = opt_error_bound(10**3, s, 2.0, 0.5).value
    v6 = opt_error_bound(10**6, s, 2.0, 0.5).value
    assert v6 < v3


def test_stability_plug_in():
    rep = stability_bound(100, StepSchedule.constant(0.1), 50, 1.0)
    assert np.isclose(rep.value, 0.1)
    assert rep.divergent


def test_stability_one_over_n():
    s = StepSchedule.constant(0.1)
    assert stability_bound(1000, s, 50, 1.0).value == pytest.approx(
        stability_bound(100, s, 50, 1.0).value / 10)


def test_stability_sqrt_growth():
    s = StepSchedule.inverse_sqrt(1.0, cap=1.0)
    ratio = (stability_bound(100, s, 10**5, 1.0).value
             / stability_bound(100, s, 10**3, 1.0).value)
    assert 9.0 <= ratio <= 10.5


def test_strongly_convex_plug_in():
    assert np.isclose(strongly_convex_bound(100, 1.0, 1.0).value, 0.02)
    assert strongly_convex_bound(200, 1.0, 1.0).value == pytest.approx(0.01)


def test_strongly_convex_mu_zero_divergent():
    rep = strongly_convex_bound(100, 1.0, 0.0)
    assert math.isinf(rep.value)
    assert rep.divergent


def test_main_bound_plateau_plug_in():
    rep = main_theorem_bound(100, StepSchedule.constant(0.1), 0.0, 0.0,
                             sigma_star=0.0, L=1.0, R=1.0, d=4, n=100, C=1.0)
    assert np.isclose(rep.inputs["plateau"], 0.2)
    assert np.isclose(rep.value, 0.2)


def test_main_bound_sqrt_d_plateau():
    kwargs = dict(T=100, schedule=StepSchedule.constant(0.1), w0_dist=0.0,
                  sigma=0.0, sigma_star=0.0, L=1.0, R=1.0, n=100, C=1.0)
    p4 = main_theorem_bound(d=4, **kwargs).inputs["plateau"]
    p16 = main_theorem_bound(d=16, **kwargs).inputs["plateau"]
    assert np.isclose(p16, 2 * p4)


def test_main_bound_vanishes_with_n_and_T():
    s = StepSchedule.inverse_sqrt(1.0, cap=1.0)
    small = main_theorem_bound(10**6, s, 2.0, 0.5, 0.1, 1.0, 1.0, 10, 10**8).value
    big = main_theorem_bound(10**2, s, 2.0, 0.5, 0.1, 1.0, 1.0, 10, 10**2).value
    assert small < 0.05 * big


def test_inexact_reduces_to_opt():
    s = StepSchedule.inverse_sqrt(1.0, cap=1.0)
    T = 100
    assert inexact_bound(T, s, 2.0, 0.5, 1.0, np.zeros(T)).value == \
        pytest.approx(opt_error_bound(T, s, 2.0, 0.5).value)


def test_inexact_constant_adds_2R_delta():
    s = StepSchedule.inverse_sqrt(1.0, cap=1.0)
    T, delta, R = 100, 0.05, 1.5
    base = opt_error_bound(T, s, 2.0, 0.5).value
    full = inexact_bound(T, s, 2.0, 0.5, R, np.full(T, delta)).value
    assert np.isclose(full - base, 2 * R * delta)


def test_inexact_plug_in():
    s = StepSchedule.constant(0.1)
    assert np.isclose(
        inexact_bound(100, s, 0.0, 0.0, 1.0, np.full(100, 0.03)).value, 0.06)


def test_inexact_rejects_wrong_length():
    with pytest.raises(ValueError):
        inexact_bound(100, StepSchedule.constant(0.1), 0.0, 0.0, 1.0, np.zeros(50))


# -- covering numbers ---------------------------------------------------------


def test_covering_at_eps0():
    eps0, _ = covering_constants(1.0, 1.0, 100, 1.0)
    assert covering_number_bound(eps0, 1.0, 1.0, 100, 7) == 2.0**7


def test_covering_one_ball_at_large_eps():
    assert covering_number_bound(1e12, 1.0, 1.0, 100, 5) == pytest.approx(1.0)


def test_covering_plug_in():
    # d=1, c=1, L=R=1, n=4: eps0 = 2/2 = 1; at eps=1 the bound is 2
    assert covering_number_bound(1.0, 1.0, 1.0, 4, 1) == pytest.approx(2.0)


def test_covering_log_consistent():
    val = covering_number_bound(0.05, 1.0, 1.0, 100, 8)
    assert np.isclose(math.log(val),
                      log_covering_number_bound(0.05, 1.0, 1.0, 100, 8))


def test_covering_overflow_to_inf():
    assert math.isinf(covering_number_bound(1e-9, 1.0, 1.0, 4, 10**6))


def test_largest_dyadic_index():
    assert largest_dyadic_index(1.0) == 0
    assert largest_dyadic_index(0.5) == 1
    assert largest_dyadic_index(0.3) == 1
    assert largest_dyadic_index(0.25) == 2


# -- Dudley sums --------------------------------------------------------------


def test_dudley_trivial_covering():
    value, _ = dudley_discrete_bound(1.0, 1.0, lambda eps: 1.0)
    assert value == 0.0


def test_dudley_geometric_series():
    # N = e at every scale below R_hat=1, K=1: sum of 2^-j, j >= 1 -> 1
    value, scales = dudley_discrete_bound(1.0, 1.0, lambda eps: math.e)
    assert abs(value - 1.0) < 1e-9
    assert scales.i == 0


def test_dudley_rejects_small_K():
    with pytest.raises(ValueError):
        dudley_discrete_bound(1.0, 0.5, lambda eps: 1.0)


def test_integral_dominates_discrete_up_to_dyadic_factor():
    # comparing the dyadic sum against the entropy integral of the same
    # nonincreasing covering map: each term 2^-j f(2^-j) is at most twice
    # the integral of f over (2^-(j+1), 2^-j], so sum <= 2 * integral
    for n in (25, 100, 400):
        _, r_hat = covering_constants(1.0, 1.0, n, 1.0)
        log_map = covering_log_map(1.0, 1.0, n, 12, 1.0)
        disc, _ = dudley_discrete_bound(r_hat, 12.0, log_map, log_form=True)
        integ = dudley_integral_bound(r_hat, 12.0, log_map, log_form=True)
        assert disc <= 2.0 * integ


def test_dudley_scale_records():
    _, r_hat = covering_constants(1.0, 1.0, 100, 1.0)
    log_map = covering_log_map(1.0, 1.0, 100, 6, 1.0)
    _, scales = dudley_discrete_bound(r_hat, 6.0, log_map, log_form=True)
    for prev, cur in zip(scales.scales, scales.scales[1:]):
        assert cur.log_N >= prev.log_N - 1e-12  # N_j nondecreasing in j
        assert cur.a_j >= 0.0


def test_dudley_one_over_sqrt_n_scaling():
    # the entropy bound tracks 1/sqrt(n).  The integral form scales
    # smoothly (doubling n -> factor ~0.71); the discrete sum moves in
    # dyadic jumps, so the clean factor (~0.5) appears per quadrupling.
    for d in (5, 20, 80):
        for n in (100, 200, 400):
            disc_prev = dudley_gradient_concentration(1.0, 1.0, n, d).value
            disc_cur = dudley_gradient_concentration(1.0, 1.0, 4 * n, d).value
            assert 0.4 <= disc_cur / disc_prev <= 0.6
            _, rh1 = covering_constants(1.0, 1.0, n, 1.0)
            _, rh2 = covering_constants(1.0, 1.0, 2 * n, 1.0)
            i1 = dudley_integral_bound(rh1, float(d),
                                       covering_log_map(1.0, 1.0, n, d),
                                       log_form=True)
            i2 = dudley_integral_bound(rh2, float(d),
                                       covering_log_map(1.0, 1.0, 2 * n, d),
                                       log_form=True)
            assert 0.6 <= i2 / i1 <= 0.8


def test_dudley_large_d_finite():
    rep = dudley_gradient_concentration(1.0, 1.0, 100, 10**6)
    assert math.isfinite(rep.value) and rep.value > 0


# -- monotonicity grid --------------------------------------------------------


def test_bounds_monotone_in_parameters():
    s = StepSchedule.inverse_sqrt(1.0, cap=1.0)
    # nondecreasing in sigma, w0_dist
    assert (opt_error_bound(100, s, 2.0, 0.5).value
            >= opt_error_bound(100, s, 2.0, 0.1).value)
    assert (opt_error_bound(100, s, 2.0, 0.1).value
            >= opt_error_bound(100, s, 1.0, 0.1).value)
    # stability: nondecreasing in B, nonincreasing in n
    assert (stability_bound(100, s, 100, 2.0).value
            >= stability_bound(100, s, 100, 1.0).value)
    assert (stability_bound(400, s, 100, 1.0).value
            <= stability_bound(100, s, 100, 1.0).value)
    # strongly convex: nonincreasing in mu
    assert (strongly_convex_bound(100, 1.0, 0.5).value
            >= strongly_convex_bound(100, 1.0, 1.0).value)
    # main bound: nondecreasing in sigma*, L, R, d, C; nonincreasing in n
    base = dict(T=100, schedule=s, w0_dist=2.0, sigma=0.0)
    lo = main_theorem_bound(sigma_star=0.1, L=1.0, R=1.0, d=4, n=400, C=1.0,
                            **base).value
    for bump in ({"sigma_star": 0.5}, {"L": 2.0}, {"R": 2.0}, {"d": 16},
                 {"C": 3.0}, {"n": 100}):
        params = dict(sigma_star=0.1, L=1.0, R=1.0, d=4, n=400, C=1.0)
        params.update(bump)
        assert main_theorem_bound(**base, **params).value >= lo
