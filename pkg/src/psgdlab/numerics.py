"""Dense vector helpers and reproducible counter-based random streams.

Vectors are plain 1-D float64 numpy arrays.  The helpers here add the
validation the rest of the package relies on (finite entries, matching
dimensions) and a thin, explicitly seeded RNG abstraction on top of
numpy's Philox counter-based generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
# odd multiplier from splitmix64; keeps child stream ids well separated
_SPLIT_MULT = 0x9E3779B97F4A7C15


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Validate and return ``x`` as a 1-D float64 array.

    Raises ``ValueError`` on non-finite entries or a dimension mismatch.
    """
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size == 0:
        raise ValueError("vectors must have dimension >= 1")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains NaN or Inf")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.shape[0]}")
    return v


def dot(a, b) -> float:
    a = as_vector(a)
    b = as_vector(b, dim=a.shape[0])
    return float(np.dot(a, b))


def euclidean_norm(a) -> float:
    return float(np.linalg.norm(as_vector(a)))


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by (seed, stream_id).

    The same pair always yields the same draws, across runs and platforms
    (numpy's Philox bit stream is stable).  Distinct stream ids give
    statistically independent streams, which is how trial-level
    parallelism stays reproducible: trial ``i`` uses ``master.child(i)``.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        key = [self.seed & _MASK64, self.stream_id & _MASK64]
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, index: int) -> "RngStream":
        """Derive an independent substream for e.g. a trial index."""
        if index < 0:
            raise ValueError("substream index must be nonnegative")
        new_id = (self.stream_id * _SPLIT_MULT + index + 1) & _MASK64
        return RngStream(self.seed, new_id)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng)!r}")


def gaussian_vector(d: int, rng) -> np.ndarray:
    """``d`` independent standard normal draws."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return _as_generator(rng).standard_normal(d)
