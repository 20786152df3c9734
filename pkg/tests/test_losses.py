import numpy as np
import pytest

from psgdlab.losses import (
    CounterexampleLoss,
    Dataset,
    LossDataMismatchError,
    OneSidedQuadraticLoss,
    PerturbedCounterexampleLoss,
    QuadraticLoss,
    counterexample_minimizer,
    counterexample_population_risk,
    detect_event_I,
    estimate_sigma_star,
    sample_labeled_dataset,
    sample_rademacher_dataset,
)
from psgdlab.numerics import RngStream

INV_SQRT2 = 1.0 / np.sqrt(2.0)


# -- point-level values ------------------------------------------------------


def test_counterexample_all_inactive():
    value, grad = CounterexampleLoss().point_loss_and_grad(
        [-0.5, 0.5], [1.0, -1.0])
    assert value == 0.0
    assert np.array_equal(grad, [0.0, 0.0])


def test_counterexample_hand_value():
    value, grad = CounterexampleLoss().point_loss_and_grad(
        [INV_SQRT2, -INV_SQRT2], [1.0, -1.0])
    assert np.isclose(value, 0.5)
    assert np.allclose(grad, [INV_SQRT2, -INV_SQRT2])


def test_one_sided_flat_branch():
    value, grad = OneSidedQuadraticLoss().point_loss_and_grad(
        [2.0, 0.0], [1.0, 0.0], label=1.0)
    assert value == 0.0
    assert np.array_equal(grad, [0.0, 0.0])


def test_one_sided_active_branch():
    # w.x = 0.5 < 1, residual -0.5 -> value 0.125, grad -0.5 x
    value, grad = OneSidedQuadraticLoss().point_loss_and_grad(
        [0.5, 0.0], [1.0, 0.0], label=1.0)
    assert np.isclose(value, 0.125)
    assert np.allclose(grad, [-0.5, 0.0])


def test_perturbed_adds_linear_term():
    eps = 1e-2
    base_v, base_g = CounterexampleLoss().point_loss_and_grad(
        [0.3, -0.2], [1.0, 1.0])
    v, g = PerturbedCounterexampleLoss(eps).point_loss_and_grad(
        [0.3, -0.2], [1.0, 1.0])
    assert np.isclose(v, base_v + eps * 0.1)
    assert np.allclose(g, base_g + eps * np.ones(2))


# -- empirical averages ------------------------------------------------------


def test_singleton_average():
    model = CounterexampleLoss()
    S = Dataset(np.array([[1.0, -1.0]]))
    w = np.array([0.4, 0.3])
    value, grad = model.point_loss_and_grad(w, S.points[0])
    assert model.empirical_loss(w, S) == value
    assert np.array_equal(model.empirical_grad(w, S), grad)


def test_duplicated_point_average():
    model = CounterexampleLoss()
    one = Dataset(np.array([[1.0, 1.0]]))
    two = Dataset(np.array([[1.0, 1.0], [1.0, 1.0]]))
    w = np.array([0.2, -0.7])
    assert model.empirical_loss(w, one) == model.empirical_loss(w, two)


def test_counterexample_grad_at_zero():
    model = CounterexampleLoss()
    S = sample_rademacher_dataset(10, 4, RngStream(0))
    assert np.array_equal(model.empirical_grad(np.zeros(4), S), np.zeros(4))


def _instances():
    gen = RngStream(42).generator()
    return [
        (CounterexampleLoss(), sample_rademacher_dataset(20, 6, gen)),
        (PerturbedCounterexampleLoss(1e-3), sample_rademacher_dataset(20, 6, gen)),
        (OneSidedQuadraticLoss(), sample_labeled_dataset(20, 6, gen)),
        (QuadraticLoss(mu=0.8), sample_rademacher_dataset(20, 6, gen)),
    ]


def test_grad_matches_finite_differences():
    gen = RngStream(9).generator()
    h = 1e-6
    for model, S in _instances():
        for _ in range(20):
            # keep points away from the kink sets
            w = 0.5 * gen.standard_normal(S.d) + 0.25 * np.sign(gen.standard_normal(S.d))
            g = model.empirical_grad(w, S)
            fd = np.empty(S.d)
            for k in range(S.d):
                e = np.zeros(S.d)
                e[k] = h
                fd[k] = (model.empirical_loss(w + e, S)
                         - model.empirical_loss(w - e, S)) / (2 * h)
            assert np.linalg.norm(fd - g) <= 1e-6 * max(np.linalg.norm(g), 1.0)


def test_batched_grads_match_per_point_average():
    # the closed-form batched gradients must agree with plain averaging
    gen = RngStream(13).generator()
    for model, S in _instances():
        W = 0.8 * gen.standard_normal((40, S.d))
        batch = model.empirical_grad_batch(W, S)
        for k in range(40):
            direct = model.per_point_grads(W[k], S).mean(axis=0)
            assert np.allclose(batch[k], direct, atol=1e-12)


def test_empirical_loss_matches_per_point_values():
    for model, S in _instances():
        w = 0.3 * np.ones(S.d)
        assert np.isclose(model.empirical_loss(w, S),
                          model.per_point_values(w, S).mean())


def test_kind_mismatch_raises():
    S = sample_rademacher_dataset(5, 3, RngStream(0))
    with pytest.raises(LossDataMismatchError):
        OneSidedQuadraticLoss().empirical_loss(np.zeros(3), S)


# -- samplers ----------------------------------------------------------------


def test_rademacher_reproducible():
    a = sample_rademacher_dataset(8, 4, RngStream(5))
    b = sample_rademacher_dataset(8, 4, RngStream(5))
    assert np.array_equal(a.points, b.points)


def test_rademacher_entry_mean():
    S = sample_rademacher_dataset(1000, 100, RngStream(6))
    assert abs(S.points.mean()) < 0.02


def test_event_I_frequency_large_d():
    hits = 0
    master = RngStream(7)
    for i in range(1000):
        S = sample_rademacher_dataset(5, 2000, master.child(i))
        hits += detect_event_I(S).holds
    assert hits / 1000 >= 0.999


def test_labeled_sampler_unit_features():
    S = sample_labeled_dataset(50, 6, RngStream(8))
    assert np.allclose(np.linalg.norm(S.points, axis=1), 1.0)
    assert np.all(np.abs(S.labels) == 1.0)


# -- event I and counterexample closed forms ---------------------------------


def test_event_I_single_row():
    rep = detect_event_I(Dataset(np.array([[1.0, -1.0]])))
    assert rep.holds
    assert list(rep.plus_cols) == [0]
    assert list(rep.minus_cols) == [1]


def test_event_I_missing_minus_column():
    rep = detect_event_I(Dataset(np.array([[1.0, 1.0], [-1.0, 1.0]])))
    assert not rep.holds
    assert list(rep.plus_cols) == [1]
    assert rep.minus_cols.size == 0


def test_event_I_monotone_in_plus_row():
    S = sample_rademacher_dataset(6, 10, RngStream(9))
    before = set(detect_event_I(S).plus_cols)
    grown = Dataset(np.vstack([S.points, np.ones(10)]))
    after = set(detect_event_I(grown).plus_cols)
    assert before <= after


def test_minimizer_hand_value():
    S = Dataset(np.array([[1.0, -1.0, 1.0], [1.0, -1.0, -1.0]]))
    w = counterexample_minimizer(S)
    assert np.allclose(w, [-INV_SQRT2, INV_SQRT2, 0.0])


def test_minimizer_zero_loss_unit_norm():
    master = RngStream(10)
    for i in range(20):
        S = sample_rademacher_dataset(4, 100, master.child(i))
        if not detect_event_I(S).holds:
            continue
        w = counterexample_minimizer(S)
        assert CounterexampleLoss().empirical_loss(w, S) == 0.0
        assert np.isclose(np.linalg.norm(w), 1.0)


def test_minimizer_requires_event():
    with pytest.raises(ValueError):
        counterexample_minimizer(Dataset(np.array([[1.0, 1.0], [-1.0, 1.0]])))


def test_population_risk_zero():
    assert counterexample_population_risk(np.zeros(5)) == 0.0


def test_population_risk_quarter_at_unit_norm():
    S = Dataset(np.array([[1.0, -1.0, 1.0], [1.0, -1.0, -1.0]]))
    risk = counterexample_population_risk(counterexample_minimizer(S))
    assert risk == pytest.approx(0.25, abs=1e-15)


def test_population_risk_matches_monte_carlo():
    w = np.array([0.6, -0.3, 0.2, 0.0, 0.5])
    model = CounterexampleLoss()
    Z = sample_rademacher_dataset(100_000, 5, RngStream(11))
    vals = model.per_point_values(w, Z)
    stderr = vals.std(ddof=1) / np.sqrt(vals.size)
    assert abs(vals.mean() - counterexample_population_risk(w)) <= 3 * stderr


# -- sigma* ------------------------------------------------------------------


def _rademacher_sampler(count, rng):
    return sample_rademacher_dataset(count, 5, rng)


def test_sigma_star_zero_at_origin():
    rep = estimate_sigma_star(CounterexampleLoss(), np.zeros(5),
                              _rademacher_sampler, 1000, RngStream(12))
    assert rep.sigma_star == 0.0


def test_sigma_star_two_point_distribution():
    # at w = e_1 the gradient norm is 0 or 1 with probability 1/2 each
    w = np.zeros(5)
    w[0] = 1.0
    rep = estimate_sigma_star(CounterexampleLoss(), w, _rademacher_sampler,
                              100_000, RngStream(13))
    assert abs(rep.variance - 0.25) <= 0.005


# -- dataset validation and round trips --------------------------------------


def test_dataset_rejects_nonsign_entries():
    with pytest.raises(ValueError):
        Dataset(np.array([[0.5, 1.0]]))


def test_dataset_rejects_bad_labels():
    with pytest.raises(ValueError):
        Dataset(np.array([[0.5, 1.0]]), np.array([2.0]))


def test_dataset_rejects_nan():
    with pytest.raises(ValueError):
        Dataset(np.array([[np.nan, 1.0]]), np.array([1.0]))


def test_csv_round_trip_sign(tmp_path):
    S = sample_rademacher_dataset(7, 3, RngStream(14))
    path = tmp_path / "signs.csv"
    S.to_csv(path)
    back = Dataset.from_csv(path)
    assert np.array_equal(S.points, back.points)
    assert back.labels is None


def test_csv_round_trip_labeled(tmp_path):
    S = sample_labeled_dataset(7, 3, RngStream(15))
    path = tmp_path / "labeled.csv"
    S.to_csv(path)
    back = Dataset.from_csv(path, labeled=True)
    assert np.array_equal(S.points, back.points)
    assert np.array_equal(S.labels, back.labels)


def test_csv_string_round_trip_exact():
    S = sample_labeled_dataset(5, 4, RngStream(16))
    back = Dataset.from_csv_string(S.to_csv_string(), labeled=True)
    # repr round-trips doubles exactly
    assert np.array_equal(S.points, back.points)
