"""Monte Carlo estimators for the quantities the bounds are compared to:
generalization error, gradient-difference suprema, increment tails, and
the counterexample's closed-form checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .geometry import Ball, ConvexSet
from .losses import (
    CounterexampleLoss,
    Dataset,
    LossModel,
    PerturbedCounterexampleLoss,
    counterexample_minimizer,
    counterexample_population_risk,
    detect_event_I,
    sample_rademacher_dataset,
)
from .numerics import RngStream
from .optimizer import NoNoise, NoiseModel, StepSchedule, Trajectory, run_psgd


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo mean with its standard error and provenance."""

    mean: float
    stderr: float
    trials: int
    seed: tuple = (0, 0)

    @classmethod
    def from_samples(cls, samples, seed=(0, 0)) -> "Estimate":
        samples = np.asarray(samples, dtype=float)
        t = samples.size
        if t < 2:
            raise ValueError("need at least 2 trials for a standard error")
        return cls(float(samples.mean()),
                   float(samples.std(ddof=1) / math.sqrt(t)), t, seed)


@dataclass(frozen=True)
class SupSearchConfig:
    """Multi-start projected-ascent search for sup_w g(w).

    The output is always a lower bound to the true supremum.
    """

    random_starts: int = 256
    refine_top: int = 8
    refine_steps: int = 200
    refine_rate_factor: float = 0.05  # step = factor * enclosing radius

    def __post_init__(self):
        if self.random_starts < 1:
            raise ValueError("need at least one random start")


def _seed_of(rng) -> tuple:
    if isinstance(rng, RngStream):
        return (rng.seed, rng.stream_id)
    return (-1, -1)


def _require_stream(rng) -> RngStream:
    if not isinstance(rng, RngStream):
        raise TypeError("trial-parallel estimators need an RngStream master seed")
    return rng


# ---------------------------------------------------------------------------
# generalization error
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenErrorExperiment:
    gen_error: Estimate
    train_loss: Estimate


def gen_error_experiment(model: LossModel, feasible_set: ConvexSet, sampler,
                         n: int, T: int, schedule: StepSchedule,
                         noise: NoiseModel, trials: int, rng,
                         w0=None) -> GenErrorExperiment:
    """Per trial: draw S_n, run PSGD, draw a fresh same-size S'_n and
    record ``l(w_hat; S') - l(w_hat; S)`` (the resampled form of the
    generalization error) together with the training loss.

    Trial ``i`` draws from ``rng.child(i)``, so results at different T
    share datasets, and are independent of execution order.
    """
    master = _require_stream(rng)
    if trials < 2:
        raise ValueError("need at least 2 trials")
    gaps = np.empty(trials)
    train = np.empty(trials)
    w0 = (np.zeros(feasible_set.dim) if w0 is None
          else np.asarray(w0, dtype=float))
    for i in range(trials):
        gen = master.child(i).generator()
        S = sampler(n, gen)
        traj = run_psgd(model, S, feasible_set, w0, schedule, noise, T, gen)
        S_fresh = sampler(n, gen)
        in_sample = model.empirical_loss(traj.average, S)
        gaps[i] = model.empirical_loss(traj.average, S_fresh) - in_sample
        train[i] = in_sample
    seed = _seed_of(master)
    return GenErrorExperiment(Estimate.from_samples(gaps, seed),
                              Estimate.from_samples(train, seed))


def estimate_gen_error(model, feasible_set, sampler, n, T, schedule, noise,
                       trials, rng, w0=None) -> Estimate:
    return gen_error_experiment(model, feasible_set, sampler, n, T, schedule,
                                noise, trials, rng, w0=w0).gen_error


@dataclass(frozen=True)
class GenAtMinimizerReport:
    estimate: Estimate
    fallback_trials: int


def gen_error_at_minimizer(model: CounterexampleLoss, sampler, n: int, d: int,
                           trials: int, rng,
                           fallback_steps: int = 100_000) -> GenAtMinimizerReport:
    """Generalization error of the empirical minimizer of the
    counterexample loss over the unit ball.

    Under event I the minimizer is available in closed form with zero
    empirical loss and unit norm, so the per-trial value is exactly the
    population risk 1/4.  Trials where event I fails (only likely at
    small d) fall back to a long noiseless PSGD solve and are counted.
    """
    if not isinstance(model, CounterexampleLoss):
        raise TypeError("the exact-minimizer path needs the counterexample loss")
    master = _require_stream(rng)
    ball = Ball.unit(d)
    values = np.empty(trials)
    fallbacks = 0
    for i in range(trials):
        gen = master.child(i).generator()
        S = sampler(n, gen)
        if detect_event_I(S).holds:
            w_star = counterexample_minimizer(S)
            emp = model.empirical_loss(w_star, S)
            # unit norm by construction: population risk is exactly 1/4
            values[i] = 0.25 - emp
        else:
            fallbacks += 1
            schedule = StepSchedule.inverse_sqrt(1.0, cap=1.0 / model.smoothness_L)
            traj = run_psgd(model, S, ball, np.zeros(d), schedule, NoNoise(),
                            fallback_steps, gen)
            values[i] = (counterexample_population_risk(traj.average)
                         - model.empirical_loss(traj.average, S))
    return GenAtMinimizerReport(Estimate.from_samples(values, _seed_of(master)),
                                fallbacks)


# ---------------------------------------------------------------------------
# gradient-difference supremum Delta(S, S')
# ---------------------------------------------------------------------------


def _delta_values(model: LossModel, S: Dataset, S_prime: Dataset,
                  W: np.ndarray) -> np.ndarray:
    diff = model.empirical_grad_batch(W, S) - model.empirical_grad_batch(W, S_prime)
    return np.linalg.norm(diff, axis=1)


def estimate_delta(model: LossModel, S: Dataset, S_prime: Dataset,
                   feasible_set: ConvexSet, search: SupSearchConfig, rng,
                   fd_step: float = 1e-6) -> float:
    """Lower-bound estimate of ``sup_w ||grad l(S,w) - grad l(S',w)||``.

    Random starts, then projected ascent along a central finite-difference
    direction from the best few.  Doubling the starts with the same seed
    extends the start pool, so more effort never loses earlier starts.
    """
    if S.d != S_prime.d:
        raise ValueError("datasets must share a dimension")
    master = _require_stream(rng)
    gen = master.generator()
    d = feasible_set.dim
    starts = np.stack([feasible_set.sample_point(gen)
                       for _ in range(search.random_starts)])
    values = _delta_values(model, S, S_prime, starts)
    best = float(values.max())
    top = np.argsort(values)[::-1][: search.refine_top]
    current = starts[top].copy()
    k = current.shape[0]
    step = search.refine_rate_factor * feasible_set.enclosing_radius_R
    h = fd_step * max(feasible_set.enclosing_radius_R, 1.0)
    eye = np.eye(d)
    for _ in range(search.refine_steps):
        # batched central differences for all candidates at once
        probe = np.concatenate([
            current[:, None, :] + h * eye[None, :, :],
            current[:, None, :] - h * eye[None, :, :],
        ], axis=1).reshape(k * 2 * d, d)
        g = _delta_values(model, S, S_prime, probe).reshape(k, 2 * d)
        fd = (g[:, :d] - g[:, d:]) / (2.0 * h)
        norms = np.linalg.norm(fd, axis=1, keepdims=True)
        direction = np.where(norms > 0, fd / np.maximum(norms, 1e-300), 0.0)
        current = feasible_set.project_batch(current + step * direction)
        vals = _delta_values(model, S, S_prime, current)
        best = max(best, float(vals.max()))
    return best


def estimate_delta_mean(model: LossModel, sampler, n: int,
                        feasible_set: ConvexSet, search: SupSearchConfig,
                        trials: int, rng) -> Estimate:
    """Mean of ``Delta(S, S')`` over independently drawn dataset pairs."""
    master = _require_stream(rng)
    out = np.empty(trials)
    for i in range(trials):
        child = master.child(i)
        gen = child.generator()
        S = sampler(n, gen)
        S_prime = sampler(n, gen)
        out[i] = estimate_delta(model, S, S_prime, feasible_set, search, child.child(0))
    return Estimate.from_samples(out, _seed_of(master))


@dataclass(frozen=True)
class DeltaAtWReport:
    estimate: Estimate
    bound: float
    passed: bool


def check_delta_at_w(model: LossModel, sampler, n: int, w, trials: int, rng,
                     sigma_star: float, L: float, R: float) -> DeltaAtWReport:
    """Check ``E ||grad l(S,w) - grad l(S',w)|| <= 5 (sigma* + L R) / sqrt(n)``
    at a fixed parameter ``w``."""
    master = _require_stream(rng)
    w = np.asarray(w, dtype=float)
    out = np.empty(trials)
    for i in range(trials):
        gen = master.child(i).generator()
        S = sampler(n, gen)
        S_prime = sampler(n, gen)
        out[i] = float(np.linalg.norm(model.empirical_grad(w, S)
                                      - model.empirical_grad(w, S_prime)))
    est = Estimate.from_samples(out, _seed_of(master))
    bound = 5.0 * (sigma_star + L * R) / math.sqrt(n)
    return DeltaAtWReport(est, bound, est.mean <= bound + 3.0 * est.stderr)


# ---------------------------------------------------------------------------
# increment tails (sub-Gaussian concentration calibration)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IncrementTailReport:
    u_grid: np.ndarray
    tail: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    calibrated_c: float
    bound_at_calibrated_c: np.ndarray
    trials: int
    seed: tuple = (0, 0)


def _clopper_pearson(successes: np.ndarray, trials: int, conf: float = 0.95):
    lo = np.where(successes == 0, 0.0,
                  stats.beta.ppf((1 - conf) / 2, successes, trials - successes + 1))
    hi = np.where(successes == trials, 1.0,
                  stats.beta.ppf(1 - (1 - conf) / 2, successes + 1,
                                 trials - successes))
    return lo, hi


def check_increment_tail(model: LossModel, sampler, n: int, w1, w2, u_grid,
                         trials: int, rng,
                         c_grid=None) -> IncrementTailReport:
    """Empirical tail of ``|Z_{w1} - Z_{w2}|`` with
    ``Z_w = ||grad l(S,w) - grad l(S',w)||``, against the almost
    sub-Gaussian bound ``2 d exp(-u^2 / (c L ||w1-w2|| / sqrt(n))^2)``.

    The smallest ``c`` on the grid for which the bound dominates the
    exact-binomial upper confidence limit at every u is reported; it is a
    calibration output, not an assertion against a paper constant.
    """
    if trials < 1000:
        raise ValueError("tail calibration needs at least 1e3 trials")
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    sep = float(np.linalg.norm(w1 - w2))
    if sep == 0.0:
        raise ValueError("w1 and w2 must differ")
    master = _require_stream(rng)
    u_grid = np.asarray(u_grid, dtype=float)
    diffs = np.empty(trials)
    W = np.stack([w1, w2])
    for i in range(trials):
        gen = master.child(i).generator()
        S = sampler(n, gen)
        S_prime = sampler(n, gen)
        z = _delta_values(model, S, S_prime, W)
        diffs[i] = abs(z[0] - z[1])
    counts = (diffs[None, :] >= u_grid[:, None]).sum(axis=1)
    tail = counts / trials
    lo, hi = _clopper_pearson(counts, trials)
    d = w1.shape[0]
    if c_grid is None:
        c_grid = np.logspace(-2, 2, 401)
    calibrated = math.inf
    for c in c_grid:
        metric = c * model.smoothness_L * sep / math.sqrt(n)
        bound = np.minimum(1.0, 2.0 * d * np.exp(-(u_grid / metric) ** 2))
        if np.all(hi <= bound + 1e-15):
            calibrated = float(c)
            break
    metric = (calibrated if math.isfinite(calibrated) else c_grid[-1])
    metric = metric * model.smoothness_L * sep / math.sqrt(n)
    bound = np.minimum(1.0, 2.0 * d * np.exp(-(u_grid / metric) ** 2))
    return IncrementTailReport(u_grid, tail, lo, hi, calibrated, bound,
                               trials, _seed_of(master))


# ---------------------------------------------------------------------------
# event I and the perturbed minimizer limit
# ---------------------------------------------------------------------------


def event_I_probability(n: int, d: int) -> float:
    """Exact probability that an n x d Rademacher dataset has both an
    all-+1 column and an all--1 column (inclusion-exclusion over columns).
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    q = 2.0 ** (-n)
    return 1.0 - 2.0 * (1.0 - q) ** d + (1.0 - 2.0 * q) ** d


@dataclass(frozen=True)
class PerturbedLimitReport:
    eps_grid: np.ndarray
    distances: np.ndarray
    population_risks: np.ndarray
    solution_norms: np.ndarray
    solutions: np.ndarray
    limit_point: np.ndarray


def perturbed_minimizer_limit_check(S: Dataset, eps_grid,
                                    solver_steps: int = 200_000,
                                    rng: RngStream | None = None) -> PerturbedLimitReport:
    """Solve the tie-broken counterexample problem for each eps and track
    convergence of the minimizer to the closed-form unperturbed one.

    Each solve is a long noiseless PSGD run over the unit ball, warm
    started at the known limit point.
    """
    ev = detect_event_I(S)
    if not ev.holds:
        raise ValueError("need a dataset satisfying event I")
    eps_grid = np.asarray(eps_grid, dtype=float)
    if np.any(eps_grid <= 0):
        raise ValueError("eps values must be positive")
    rng = rng if rng is not None else RngStream(0)
    limit = counterexample_minimizer(S)
    ball = Ball.unit(S.d)
    dists = np.empty(eps_grid.size)
    risks = np.empty(eps_grid.size)
    norms = np.empty(eps_grid.size)
    sols = np.empty((eps_grid.size, S.d))
    for k, eps in enumerate(eps_grid):
        model = PerturbedCounterexampleLoss(eps=float(eps))
        schedule = StepSchedule.inverse_sqrt(1.0, cap=1.0 / model.smoothness_L)
        traj = run_psgd(model, S, ball, limit, schedule, NoNoise(),
                        solver_steps, rng.child(k))
        w = traj.final
        sols[k] = w
        dists[k] = float(np.linalg.norm(w - limit))
        risks[k] = counterexample_population_risk(w)
        norms[k] = float(np.linalg.norm(w))
    return PerturbedLimitReport(eps_grid, dists, risks, norms, sols, limit)


# ---------------------------------------------------------------------------
# scaling-law fitting
# ---------------------------------------------------------------------------


def fit_loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 3:
        raise ValueError("need at least 3 grid points for a slope fit")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs positive values")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
