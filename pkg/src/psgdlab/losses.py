"""Loss families, datasets, and their closed-form quantities.

Four smooth convex families are implemented:

* ``CounterexampleLoss`` -- the dimension-dependence lower-bound loss
  ``f(w;z) = sum_k (1/2)(z^k w^k)_+^2`` on Rademacher sign vectors,
* ``PerturbedCounterexampleLoss`` -- the same with a tie-breaking linear
  term ``eps * z^T w``,
* ``OneSidedQuadraticLoss`` -- hinge-like quadratic classification loss,
  flat once the margin is satisfied,
* ``QuadraticLoss`` -- ``(mu/2)||w - z||^2``, the strongly convex baseline.

All gradients are exposed per point, averaged over a dataset, and in a
batched form used by the supremum search.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .numerics import as_vector, _as_generator

LABELED = "labeled"
SIGN_VECTOR = "sign_vector"


class LossDataMismatchError(TypeError):
    """Dataset kind does not match what the loss family consumes."""


@dataclass(frozen=True)
class Dataset:
    """An immutable homogeneous sample of ``n`` points in dimension ``d``.

    ``labels is None`` means sign-vector data (every entry must be +-1);
    otherwise the points are feature vectors with +-1 labels.
    """

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"points must be a nonempty (n, d) array, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("dataset contains NaN or Inf")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=float)
            if lab.shape != (pts.shape[0],):
                raise ValueError("labels must be a length-n vector")
            if not np.all(np.abs(lab) == 1.0):
                raise ValueError("labels must be +-1")
            object.__setattr__(self, "labels", lab)
        else:
            if not np.all(np.abs(pts) == 1.0):
                raise ValueError("sign-vector datasets must have +-1 entries")

    @property
    def kind(self) -> str:
        return SIGN_VECTOR if self.labels is None else LABELED

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def take(self, idx) -> "Dataset":
        """Sub-dataset at (possibly repeated) row indices."""
        lab = None if self.labels is None else self.labels[idx]
        return Dataset(self.points[idx], lab)

    def to_csv(self, path) -> None:
        """One row per point; label column first for labeled data."""
        with open(path, "w", newline="") as fh:
            self._write_csv(fh)

    def _write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        for i in range(self.n):
            row = [] if self.labels is None else [repr(float(self.labels[i]))]
            row += [repr(float(x)) for x in self.points[i]]
            writer.writerow(row)

    @classmethod
    def from_csv(cls, path, labeled: bool = False) -> "Dataset":
        with open(path, newline="") as fh:
            return cls._read_csv(fh, labeled)

    @classmethod
    def _read_csv(cls, fh, labeled: bool) -> "Dataset":
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
        arr = np.asarray(rows, dtype=float)
        if labeled:
            return cls(arr[:, 1:], arr[:, 0])
        return cls(arr)

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self._write_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_csv_string(cls, text: str, labeled: bool = False) -> "Dataset":
        return cls._read_csv(io.StringIO(text), labeled)


# ---------------------------------------------------------------------------
# loss families
# ---------------------------------------------------------------------------


class LossModel:
    """Base loss family: value/gradient plus the analytic constants.

    ``smoothness_L`` is the family's gradient Lipschitz constant,
    ``gradient_bound_B`` (optional) dominates ``||grad f||`` on the
    working set, and ``sigma_star`` (optional) is a closed-form bound on
    the gradient-norm standard deviation at a population minimizer.
    """

    family: str = "abstract"
    data_kind: str = SIGN_VECTOR
    smoothness_L: float = 1.0
    gradient_bound_B: float | None = None
    sigma_star: float | None = None

    # -- single point ------------------------------------------------------
    def point_loss_and_grad(self, w, z, label=None):
        raise NotImplementedError

    # -- dataset averaged --------------------------------------------------
    def per_point_values(self, w, S: Dataset) -> np.ndarray:
        raise NotImplementedError

    def per_point_grads(self, w, S: Dataset) -> np.ndarray:
        raise NotImplementedError

    def empirical_loss(self, w, S: Dataset) -> float:
        self._check(w, S)
        return float(self.per_point_values(np.asarray(w, dtype=float), S).mean())

    def empirical_grad(self, w, S: Dataset) -> np.ndarray:
        self._check(w, S)
        return self.per_point_grads(np.asarray(w, dtype=float), S).mean(axis=0)

    def empirical_grad_batch(self, W: np.ndarray, S: Dataset) -> np.ndarray:
        """Empirical gradients at each row of ``W``; default is a loop."""
        W = np.atleast_2d(np.asarray(W, dtype=float))
        return np.stack([self.empirical_grad(w, S) for w in W])

    def _check(self, w, S: Dataset) -> None:
        if S.kind != self.data_kind:
            raise LossDataMismatchError(
                f"{self.family} expects {self.data_kind} data, got {S.kind}"
            )
        if np.asarray(w).shape[-1] != S.d:
            raise ValueError("parameter / data dimension mismatch")


class CounterexampleLoss(LossModel):
    """``f(w;z) = sum_k (1/2)(z^k w^k)_+^2`` with ``(x)_+^2 = x max(x, 0)``.

    1-smooth; on the unit ball the gradient norm never exceeds 1.  The
    gradient's k-th entry is ``w^k`` when ``z^k w^k > 0`` and zero
    otherwise (ties take the flat branch).
    """

    family = "counterexample"
    data_kind = SIGN_VECTOR
    smoothness_L = 1.0
    gradient_bound_B = 1.0  # valid over the unit ball

    def point_loss_and_grad(self, w, z, label=None):
        w = as_vector(w)
        z = as_vector(z, dim=w.shape[0])
        active = (z * w) > 0
        value = 0.5 * float(np.sum(np.where(active, z * w, 0.0) ** 2))
        return value, np.where(active, w, 0.0)

    def per_point_values(self, w, S):
        a = np.maximum(S.points * w, 0.0)
        return 0.5 * (a * a).sum(axis=1)

    def per_point_grads(self, w, S):
        return np.where(S.points * w > 0, w, 0.0)

    def empirical_grad(self, w, S):
        self._check(w, S)
        w = np.asarray(w, dtype=float)
        # entry k is w^k times the fraction of points with z^k w^k > 0
        return w * ((S.points * w) > 0).mean(axis=0)

    def empirical_grad_batch(self, W, S):
        W = np.atleast_2d(np.asarray(W, dtype=float))
        self._check(W, S)
        # sign vectors: the active fraction only depends on sign(w^k)
        plus = (S.points > 0).mean(axis=0)
        return W * np.where(W > 0, plus, np.where(W < 0, 1.0 - plus, 0.0))


class PerturbedCounterexampleLoss(CounterexampleLoss):
    """Counterexample loss plus ``eps * z^T w``, making the minimizer unique."""

    family = "counterexample_perturbed"

    def __init__(self, eps: float = 1e-3):
        if eps <= 0:
            raise ValueError("eps must be positive")
        self.eps = eps
        self.gradient_bound_B = None  # depends on dimension; see gradient_bound

    def gradient_bound(self, d: int) -> float:
        return 1.0 + self.eps * np.sqrt(d)

    def point_loss_and_grad(self, w, z, label=None):
        value, grad = super().point_loss_and_grad(w, z)
        z = np.asarray(z, dtype=float)
        return value + self.eps * float(np.dot(z, w)), grad + self.eps * z

    def per_point_values(self, w, S):
        return super().per_point_values(w, S) + self.eps * (S.points @ w)

    def per_point_grads(self, w, S):
        return super().per_point_grads(w, S) + self.eps * S.points

    def empirical_grad(self, w, S):
        return super().empirical_grad(w, S) + self.eps * S.points.mean(axis=0)

    def empirical_grad_batch(self, W, S):
        return super().empirical_grad_batch(W, S) + self.eps * S.points.mean(axis=0)


class OneSidedQuadraticLoss(LossModel):
    """One-sided quadratic classification loss.

    For label +1: zero when ``w.x >= margin``, else ``(1/2)(w.x - margin)^2``
    (mirrored for label -1).  Smooth with constant ``max_i ||x_i||^2``;
    the declared ``smoothness_L`` must dominate that over the data in use.
    At the breakpoint the flat branch wins, so the gradient is zero there.
    """

    family = "one_sided_quadratic"
    data_kind = LABELED

    def __init__(self, margin: float = 1.0, smoothness_L: float = 1.0,
                 gradient_bound_B: float | None = None):
        if margin < 0:
            raise ValueError("margin must be nonnegative")
        self.margin = margin
        self.smoothness_L = float(smoothness_L)
        self.gradient_bound_B = gradient_bound_B

    def _residuals(self, u: np.ndarray, labels: np.ndarray) -> np.ndarray:
        # residual is nonzero only on the strictly violating side
        active = labels * u < self.margin
        return np.where(active, u - self.margin * labels, 0.0)

    def point_loss_and_grad(self, w, x, label=None):
        if label is None:
            raise LossDataMismatchError("one_sided_quadratic needs a +-1 label")
        w = as_vector(w)
        x = as_vector(x, dim=w.shape[0])
        r = self._residuals(np.array([float(np.dot(w, x))]), np.array([float(label)]))[0]
        return 0.5 * r * r, r * x

    def per_point_values(self, w, S):
        r = self._residuals(S.points @ w, S.labels)
        return 0.5 * r * r

    def per_point_grads(self, w, S):
        r = self._residuals(S.points @ w, S.labels)
        return r[:, None] * S.points

    def empirical_grad(self, w, S):
        self._check(w, S)
        r = self._residuals(S.points @ np.asarray(w, dtype=float), S.labels)
        return (S.points.T @ r) / S.n

    def empirical_grad_batch(self, W, S):
        W = np.atleast_2d(np.asarray(W, dtype=float))
        self._check(W, S)
        r = self._residuals(W @ S.points.T, S.labels)
        return (r @ S.points) / S.n


class QuadraticLoss(LossModel):
    """``f(w;z) = (mu/2)||w - z||^2``: mu-strongly convex, mu-smooth."""

    family = "quadratic_strongly_convex"
    data_kind = SIGN_VECTOR

    def __init__(self, mu: float = 1.0):
        if mu <= 0:
            raise ValueError("mu must be positive")
        self.mu = float(mu)
        self.smoothness_L = float(mu)

    def point_loss_and_grad(self, w, z, label=None):
        w = as_vector(w)
        z = as_vector(z, dim=w.shape[0])
        diff = w - z
        return 0.5 * self.mu * float(np.dot(diff, diff)), self.mu * diff

    def per_point_values(self, w, S):
        diff = w - S.points
        return 0.5 * self.mu * (diff * diff).sum(axis=1)

    def per_point_grads(self, w, S):
        return self.mu * (w - S.points)

    def empirical_grad(self, w, S):
        self._check(w, S)
        return self.mu * (np.asarray(w, dtype=float) - S.points.mean(axis=0))

    def empirical_grad_batch(self, W, S):
        W = np.atleast_2d(np.asarray(W, dtype=float))
        self._check(W, S)
        return self.mu * (W - S.points.mean(axis=0))


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------


def sample_rademacher_dataset(n: int, d: int, rng) -> Dataset:
    """``n`` sign vectors with i.i.d. uniform +-1 entries."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    gen = _as_generator(rng)
    return Dataset(2.0 * gen.integers(0, 2, size=(n, d)) - 1.0)


def sample_labeled_dataset(n: int, d: int, rng, flip_prob: float = 0.2,
                           w_true: np.ndarray | None = None) -> Dataset:
    """Noisy linearly separable data: unit-sphere features, flipped labels.

    Features are uniform on the unit sphere (so the one-sided quadratic
    loss is exactly 1-smooth on this data); the clean label is
    ``sign(w_true . x)`` and each label is flipped with ``flip_prob``.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    gen = _as_generator(rng)
    x = gen.standard_normal((n, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    if w_true is None:
        w_true = np.zeros(d)
        w_true[0] = 1.0
    clean = np.where(x @ w_true >= 0, 1.0, -1.0)
    flips = gen.random(n) < flip_prob
    return Dataset(x, np.where(flips, -clean, clean))


# ---------------------------------------------------------------------------
# counterexample closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EventIReport:
    holds: bool
    plus_cols: np.ndarray
    minus_cols: np.ndarray


def detect_event_I(S: Dataset) -> EventIReport:
    """Columns that are all +1 / all -1; the event needs one of each."""
    if S.kind != SIGN_VECTOR:
        raise LossDataMismatchError("event I is defined for sign-vector datasets")
    plus = np.flatnonzero(np.all(S.points > 0, axis=0))
    minus = np.flatnonzero(np.all(S.points < 0, axis=0))
    return EventIReport(plus.size > 0 and minus.size > 0, plus, minus)


def counterexample_minimizer(S: Dataset) -> np.ndarray:
    """The unit-norm zero-loss minimizer available under event I.

    Entry ``-1/sqrt(m)`` on all-+1 columns, ``+1/sqrt(m)`` on all--1
    columns, zero elsewhere, with ``m`` the number of constant columns.
    """
    ev = detect_event_I(S)
    if not ev.holds:
        raise ValueError("event I does not hold for this dataset")
    m = ev.plus_cols.size + ev.minus_cols.size
    w = np.zeros(S.d)
    w[ev.plus_cols] = -1.0 / np.sqrt(m)
    w[ev.minus_cols] = 1.0 / np.sqrt(m)
    return w


def counterexample_population_risk(w) -> float:
    """Expected counterexample loss under the +-1 product distribution.

    Each coordinate is active with probability 1/2, so the risk is
    exactly ``||w||^2 / 4``.
    """
    w = np.asarray(w, dtype=float)
    return float(np.dot(w, w)) / 4.0


# ---------------------------------------------------------------------------
# sigma* estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaStarReport:
    """Sample variance of ||grad f(w*, z)|| and its square root."""

    variance: float
    variance_stderr: float
    sigma_star: float
    trials: int
    seed: tuple = field(default=(0, 0))


def estimate_sigma_star(model: LossModel, population_minimizer, sampler,
                        trials: int, rng) -> SigmaStarReport:
    """Monte Carlo variance of the gradient norm at ``population_minimizer``.

    ``sampler(count, rng) -> Dataset`` supplies i.i.d. points.
    """
    if trials < 2:
        raise ValueError("need at least 2 trials for a variance")
    if isinstance(rng, np.random.Generator):
        seed = (-1, -1)
        gen = rng
    else:
        seed = (rng.seed, rng.stream_id)
        gen = rng.generator()
    w = np.asarray(population_minimizer, dtype=float)
    S = sampler(trials, gen)
    norms = np.linalg.norm(model.per_point_grads(w, S), axis=1)
    var = float(norms.var(ddof=1))
    dev = (norms - norms.mean()) ** 2
    stderr = float(dev.std(ddof=1) / np.sqrt(trials))
    return SigmaStarReport(var, stderr, float(np.sqrt(var)), trials, seed)
