"""Compact convex feasible sets, Euclidean projection, and the projection
inequality check ``|E[N^T P(v - a N)]| <= a E||N||^2`` for zero-mean N."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import as_vector, _as_generator


class ConvexSet:
    """A compact convex subset of R^d contained in B[0, enclosing_radius_R]."""

    dim: int
    enclosing_radius_R: float

    def project(self, w) -> np.ndarray:
        raise NotImplementedError

    def project_batch(self, W: np.ndarray) -> np.ndarray:
        W = np.atleast_2d(np.asarray(W, dtype=float))
        return np.stack([self.project(w) for w in W])

    def contains(self, w, tol: float = 1e-9) -> bool:
        w = as_vector(w, dim=self.dim)
        return bool(np.linalg.norm(self.project(w) - w) <= tol)

    def sample_point(self, rng) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(ConvexSet):
    """Euclidean ball of radius ``radius`` around ``center``."""

    center: np.ndarray
    radius: float
    enclosing_radius_R: float = None  # type: ignore[assignment]

    def __post_init__(self):
        c = as_vector(self.center)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", c)
        if self.enclosing_radius_R is None:
            object.__setattr__(
                self, "enclosing_radius_R", float(np.linalg.norm(c)) + self.radius
            )

    @classmethod
    def unit(cls, d: int) -> "Ball":
        return cls(np.zeros(d), 1.0)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def project(self, w) -> np.ndarray:
        w = as_vector(w, dim=self.dim)
        diff = w - self.center
        nrm = np.linalg.norm(diff)
        if nrm <= self.radius:
            return w
        return self.center + diff * (self.radius / nrm)

    def project_batch(self, W) -> np.ndarray:
        W = np.atleast_2d(np.asarray(W, dtype=float))
        diff = W - self.center
        nrm = np.linalg.norm(diff, axis=1, keepdims=True)
        scale = np.minimum(1.0, self.radius / np.maximum(nrm, 1e-300))
        return self.center + diff * scale

    def sample_point(self, rng) -> np.ndarray:
        gen = _as_generator(rng)
        x = gen.standard_normal(self.dim)
        x /= np.linalg.norm(x)
        r = self.radius * gen.random() ** (1.0 / self.dim)
        return self.center + r * x


@dataclass(frozen=True)
class Box(ConvexSet):
    """Axis-aligned box ``[lower, upper]`` (coordinatewise)."""

    lower: np.ndarray
    upper: np.ndarray
    enclosing_radius_R: float = None  # type: ignore[assignment]

    def __post_init__(self):
        lo = as_vector(self.lower)
        hi = as_vector(self.upper, dim=lo.shape[0])
        if np.any(lo > hi):
            raise ValueError("box needs lower <= upper coordinatewise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if self.enclosing_radius_R is None:
            corner = np.maximum(np.abs(lo), np.abs(hi))
            object.__setattr__(self, "enclosing_radius_R", float(np.linalg.norm(corner)))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def project(self, w) -> np.ndarray:
        w = as_vector(w, dim=self.dim)
        return np.clip(w, self.lower, self.upper)

    def project_batch(self, W) -> np.ndarray:
        W = np.atleast_2d(np.asarray(W, dtype=float))
        return np.clip(W, self.lower, self.upper)

    def sample_point(self, rng) -> np.ndarray:
        gen = _as_generator(rng)
        return self.lower + (self.upper - self.lower) * gen.random(self.dim)


def project(convex_set: ConvexSet, w) -> np.ndarray:
    """Euclidean projection of ``w`` onto ``convex_set``."""
    return convex_set.project(w)


@dataclass(frozen=True)
class ProjectionLemmaReport:
    lhs_mean: float
    lhs_stderr: float
    rhs: float
    rhs_stderr: float
    alpha: float
    trials: int
    passed: bool


def gaussian_noise_sampler(count: int, d: int, gen: np.random.Generator) -> np.ndarray:
    return gen.standard_normal((count, d))


def check_projection_lemma(convex_set: ConvexSet, v, noise_sampler, alpha: float,
                           trials: int, rng) -> ProjectionLemmaReport:
    """Monte Carlo check of ``|E[N^T P(v - a N)]| <= a E||N||^2``.

    ``noise_sampler(count, d, gen)`` must return zero-mean draws (by
    construction).  Both sides are estimated from the same draws; the
    check passes when lhs <= rhs + 3 * (combined stderr).
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    v = as_vector(v, dim=convex_set.dim)
    if not convex_set.contains(v, tol=1e-9):
        raise ValueError("v must lie in the set")
    gen = _as_generator(rng)
    N = noise_sampler(trials, convex_set.dim, gen)
    proj = convex_set.project_batch(v - alpha * N)
    inner = (N * proj).sum(axis=1)
    sq = (N * N).sum(axis=1)
    lhs_mean = abs(float(inner.mean()))
    lhs_stderr = float(inner.std(ddof=1) / np.sqrt(trials))
    rhs = alpha * float(sq.mean())
    rhs_stderr = alpha * float(sq.std(ddof=1) / np.sqrt(trials))
    passed = lhs_mean <= rhs + 3.0 * (lhs_stderr + rhs_stderr)
    return ProjectionLemmaReport(lhs_mean, lhs_stderr, rhs, rhs_stderr,
                                 alpha, trials, passed)
