"""Projected stochastic gradient descent and its perturbed variant.

The update is ``w_{t+1} = P(w_t - alpha_t [grad l(w_t, S) + eps_t])`` with
``t`` zero-based, plus the step-size-weighted running average
``w_hat_T = sum_k alpha_k w_{k+1} / sum_k alpha_k`` maintained
incrementally.  A thin scikit-learn estimator wrapper (``PSGD``) exposes
the run through ``fit`` / ``get_params`` so it composes with pipelines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .geometry import Ball, ConvexSet
from .losses import Dataset, LossModel, OneSidedQuadraticLoss
from .numerics import RngStream, as_vector


class PerturbationBoundError(RuntimeError):
    """An emitted perturbation exceeded its declared bound."""


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes ``alpha_t`` for zero-based ``t``, capped at ``cap``.

    Kinds: ``constant`` (c), ``inverse_sqrt`` (c / sqrt(t+1)) and
    ``inverse_t`` (c / (t+1)).  The cap is the place to enforce the
    ``alpha_t <= 1/L`` requirement of the main bound.
    """

    kind: str
    c: float
    cap: float

    _KINDS = ("constant", "inverse_sqrt", "inverse_t")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.c <= 0 or self.cap <= 0:
            raise ValueError("schedule constant and cap must be positive")

    @classmethod
    def constant(cls, c: float, cap: float | None = None) -> "StepSchedule":
        return cls("constant", c, c if cap is None else cap)

    @classmethod
    def inverse_sqrt(cls, c: float, cap: float) -> "StepSchedule":
        return cls("inverse_sqrt", c, cap)

    @classmethod
    def inverse_t(cls, c: float, cap: float) -> "StepSchedule":
        return cls("inverse_t", c, cap)

    def alpha(self, t: int) -> float:
        if t < 0:
            raise ValueError("t is zero-based")
        if self.kind == "constant":
            base = self.c
        elif self.kind == "inverse_sqrt":
            base = self.c / np.sqrt(t + 1.0)
        else:
            base = self.c / (t + 1.0)
        return float(min(base, self.cap))

    def alphas(self, T: int) -> np.ndarray:
        """All of ``alpha_0 .. alpha_{T-1}``."""
        if T < 1:
            raise ValueError("T must be >= 1")
        k = np.arange(T, dtype=float)
        if self.kind == "constant":
            base = np.full(T, self.c)
        elif self.kind == "inverse_sqrt":
            base = self.c / np.sqrt(k + 1.0)
        else:
            base = self.c / (k + 1.0)
        return np.minimum(base, self.cap)

    def sum_alpha(self, T: int) -> float:
        return float(self.alphas(T).sum())

    def sum_alpha_sq(self, T: int) -> float:
        a = self.alphas(T)
        return float((a * a).sum())


def check_schedule_cap(schedule: StepSchedule, model: LossModel) -> None:
    """The main bound requires ``alpha_t <= 1/L``; fail loudly otherwise."""
    if schedule.cap > 1.0 / model.smoothness_L + 1e-12:
        raise ValueError(
            f"schedule cap {schedule.cap} exceeds 1/L = {1.0 / model.smoothness_L}"
        )


# ---------------------------------------------------------------------------
# noise models
# ---------------------------------------------------------------------------


class NoiseModel:
    """Additive gradient noise ``eps_t``, zero-mean conditional on ``w_t``."""

    sigma_sq: float | None = None  # bound on E||eps_t||^2 when known

    def sample(self, gen: np.random.Generator, w: np.ndarray,
               full_grad: np.ndarray, model: LossModel, S: Dataset):
        raise NotImplementedError


class NoNoise(NoiseModel):
    sigma_sq = 0.0

    def sample(self, gen, w, full_grad, model, S):
        return None


class GaussianNoise(NoiseModel):
    """Isotropic Gaussian with E||eps_t||^2 = sigma^2 exactly
    (per-coordinate standard deviation sigma / sqrt(d))."""

    def __init__(self, sigma: float):
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        self.sigma = float(sigma)
        self.sigma_sq = float(sigma) ** 2

    def sample(self, gen, w, full_grad, model, S):
        d = w.shape[0]
        return gen.standard_normal(d) * (self.sigma / np.sqrt(d))


class MinibatchNoise(NoiseModel):
    """eps_t = (batch average gradient) - (full empirical gradient).

    Batches are drawn uniformly from S with replacement, which makes the
    noise conditionally unbiased by construction.
    """

    sigma_sq = None

    def __init__(self, batch_size: int):
        if batch_size < 1:
            raise ValueError("batch size must be >= 1")
        self.batch_size = int(batch_size)

    def sample(self, gen, w, full_grad, model, S):
        idx = gen.integers(0, S.n, size=self.batch_size)
        return model.empirical_grad(w, S.take(idx)) - full_grad


# ---------------------------------------------------------------------------
# perturbations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PerturbationSpec:
    """Arbitrary (deterministic-given-state) perturbations ``p_t``.

    ``generator(t, w) -> vector`` emits the perturbation and
    ``bound_sequence(t) -> float`` its declared norm bound, which is
    checked at runtime.
    """

    generator: Callable[[int, np.ndarray], np.ndarray]
    bound_sequence: Callable[[int], float]

    @classmethod
    def constant(cls, p: np.ndarray) -> "PerturbationSpec":
        p = np.asarray(p, dtype=float)
        bound = float(np.linalg.norm(p))
        return cls(lambda t, w: p, lambda t: bound)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Record of one PSGD run."""

    final: np.ndarray
    average: np.ndarray
    sum_alpha: float
    sum_alpha_sq: float
    steps: int
    seed: tuple
    history: list | None = None
    max_perturbation: float = 0.0

    def to_json(self) -> str:
        return json.dumps({
            "final": list(self.final),
            "average": list(self.average),
            "sum_alpha": self.sum_alpha,
            "sum_alpha_sq": self.sum_alpha_sq,
            "T": self.steps,
            "seed": list(self.seed),
        })

    @classmethod
    def from_json(cls, text: str) -> "Trajectory":
        obj = json.loads(text)
        return cls(np.asarray(obj["final"]), np.asarray(obj["average"]),
                   obj["sum_alpha"], obj["sum_alpha_sq"], obj["T"],
                   tuple(obj["seed"]))


def _rng_pair(rng) -> tuple:
    if isinstance(rng, RngStream):
        return (rng.seed, rng.stream_id)
    return (-1, -1)


def psgd_step(model: LossModel, S: Dataset, feasible_set: ConvexSet,
              w_t: np.ndarray, alpha_t: float, noise: NoiseModel, rng) -> np.ndarray:
    """One projected step; the result always lies in the feasible set."""
    if alpha_t <= 0:
        raise ValueError("alpha_t must be positive")
    w_t = as_vector(w_t, dim=feasible_set.dim)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    g = model.empirical_grad(w_t, S)
    eps = noise.sample(gen, w_t, g, model, S)
    if eps is not None:
        g = g + eps
    return feasible_set.project(w_t - alpha_t * g)


def run_psgd(model: LossModel, S: Dataset, feasible_set: ConvexSet, w0,
             schedule: StepSchedule, noise: NoiseModel, T: int, rng,
             keep_history: bool = False) -> Trajectory:
    """Run ``T`` PSGD steps from ``w0`` and track the running average."""
    return run_perturbed_psgd(model, S, feasible_set, w0, schedule, noise, T,
                              rng, drive_with=None, perturbation=None,
                              keep_history=keep_history)


def run_perturbed_psgd(model: LossModel, S_eval: Dataset, feasible_set: ConvexSet,
                       w0, schedule: StepSchedule, noise: NoiseModel, T: int, rng,
                       drive_with: Dataset | None = None,
                       perturbation: PerturbationSpec | None = None,
                       keep_history: bool = False) -> Trajectory:
    """Inexact PSGD ``w_{t+1} = P(w_t - alpha_t [grad l(w_t, S_eval) + p_t + eps_t])``.

    Two perturbation modes:

    * ``drive_with=S``: the dataset-difference perturbation
      ``p_t = grad l(w_t, S) - grad l(w_t, S_eval)``, in which case the run is
      bitwise identical to plain PSGD on ``S`` (the update uses the driving
      gradient directly) and the observed ``max ||p_t||`` is recorded;
    * an explicit ``PerturbationSpec``, whose runtime bound is enforced.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if drive_with is not None and perturbation is not None:
        raise ValueError("give either drive_with or perturbation, not both")
    check_schedule_cap(schedule, model)
    w = as_vector(w0, dim=feasible_set.dim)
    if not feasible_set.contains(w, tol=1e-9):
        raise ValueError("w0 must lie in the feasible set")
    w = feasible_set.project(w)  # snap boundary round-off
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    alphas = schedule.alphas(T)
    avg = np.zeros_like(w)
    sum_alpha = 0.0
    max_p = 0.0
    history = [] if keep_history else None
    for t in range(T):
        if drive_with is not None:
            g = model.empirical_grad(w, drive_with)
            p = g - model.empirical_grad(w, S_eval)
            max_p = max(max_p, float(np.linalg.norm(p)))
        else:
            g = model.empirical_grad(w, S_eval)
            if perturbation is not None:
                p = np.asarray(perturbation.generator(t, w), dtype=float)
                pnorm = float(np.linalg.norm(p))
                pbar = float(perturbation.bound_sequence(t))
                if pnorm > pbar * (1 + 1e-12):
                    raise PerturbationBoundError(
                        f"||p_{t}|| = {pnorm} exceeds declared bound {pbar}"
                    )
                max_p = max(max_p, pnorm)
                g = g + p
        eps = noise.sample(gen, w, g, model, S_eval if drive_with is None else drive_with)
        if eps is not None:
            g = g + eps
        a = alphas[t]
        w = feasible_set.project(w - a * g)
        sum_alpha += a
        avg += (a / sum_alpha) * (w - avg)
        if keep_history:
            history.append(w.copy())
    return Trajectory(final=w, average=avg, sum_alpha=sum_alpha,
                      sum_alpha_sq=float((alphas * alphas).sum()), steps=T,
                      seed=_rng_pair(rng), history=history,
                      max_perturbation=max_p)


# ---------------------------------------------------------------------------
# scikit-learn wrapper
# ---------------------------------------------------------------------------


class PSGD(BaseEstimator):
    """Projected SGD as a scikit-learn style estimator.

    After ``fit``, ``coef_`` holds the running-average iterate (the point
    the generalization bounds apply to) and ``trajectory_`` the full run
    record.  ``predict`` gives sign decisions for labeled losses.
    """

    def __init__(self, loss: LossModel | None = None,
                 feasible_set: ConvexSet | None = None,
                 schedule: StepSchedule | None = None,
                 noise: NoiseModel | None = None,
                 n_steps: int = 1000, seed: int = 0, w0=None):
        self.loss = loss
        self.feasible_set = feasible_set
        self.schedule = schedule
        self.noise = noise
        self.n_steps = n_steps
        self.seed = seed
        self.w0 = w0

    def _dataset(self, X, y) -> Dataset:
        if isinstance(X, Dataset):
            return X
        X = np.asarray(X, dtype=float)
        return Dataset(X, None if y is None else np.asarray(y, dtype=float))

    def fit(self, X, y=None):
        S = self._dataset(X, y)
        loss = self.loss if self.loss is not None else OneSidedQuadraticLoss()
        feasible = (self.feasible_set if self.feasible_set is not None
                    else Ball.unit(S.d))
        schedule = (self.schedule if self.schedule is not None
                    else StepSchedule.inverse_sqrt(1.0, cap=1.0 / loss.smoothness_L))
        noise = self.noise if self.noise is not None else NoNoise()
        w0 = np.zeros(S.d) if self.w0 is None else np.asarray(self.w0, dtype=float)
        traj = run_psgd(loss, S, feasible, w0, schedule, noise,
                        self.n_steps, RngStream(self.seed))
        self.trajectory_ = traj
        self.coef_ = traj.average
        self.final_iterate_ = traj.final
        self.n_features_in_ = S.d
        return self

    def decision_function(self, X):
        X = np.asarray(X, dtype=float)
        return X @ self.coef_

    def predict(self, X):
        return np.where(self.decision_function(X) >= 0, 1.0, -1.0)
