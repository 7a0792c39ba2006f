"""Random number streams and exact increment samplers.

All Monte Carlo work is split into a fixed number of batches.  Batch ``j``
draws from its own generator spawned from ``(seed, purpose)``, so results
depend on the seed and the batch count but not on how many workers run the
batches.
"""
from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from math import atan, pi, tan
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from .processes import BROWNIAN, STABLE, ProcessSpec

DEFAULT_SEED = 20240607
SEED_ENV = "LEVYSUP_SEED"

T = TypeVar("T")


def resolve_seed(seed: Optional[int] = None) -> int:
    """Explicit seed, else ``$LEVYSUP_SEED``, else the documented default."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV, "").strip()
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ValueError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return DEFAULT_SEED


def batch_generators(seed: int, purpose: str, n_batches: int) -> List[np.random.Generator]:
    """Independent generators for ``n_batches`` batches of one computation."""
    tag = zlib.crc32(purpose.encode("utf-8"))
    ss = np.random.SeedSequence([int(seed) & (2 ** 64 - 1), tag])
    return [np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(n_batches)]


def map_batches(fn: Callable[[int], T], n_batches: int, workers: int = 1) -> List[T]:
    """Evaluate ``fn(j)`` for every batch; output order is always by batch index."""
    if workers <= 1 or n_batches <= 1:
        return [fn(j) for j in range(n_batches)]
    with ThreadPoolExecutor(max_workers=int(workers)) as pool:
        return list(pool.map(fn, range(n_batches)))


def split_counts(total: int, n_batches: int) -> List[int]:
    """Split ``total`` items as evenly as possible over batches."""
    base, extra = divmod(int(total), int(n_batches))
    return [base + (1 if j < extra else 0) for j in range(n_batches)]


# ----------------------------------------------------------------------
def standard_stable(rng: np.random.Generator, alpha: float, beta: float, size) -> np.ndarray:
    """Chambers-Mallows-Stuck draw with ``Psi(xi) = |xi|^a (1 - i beta sgn tan(pi a/2))``.

    For ``alpha = 1`` only the symmetric case is supported (standard Cauchy).
    """
    if alpha == 2.0:
        return np.sqrt(2.0) * rng.standard_normal(size)
    u = rng.random(size)
    if alpha == 1.0:
        if beta != 0.0:
            raise ValueError("asymmetric alpha = 1 is not sampled")
        return np.tan(pi * (u - 0.5))
    v = pi * (u - 0.5)
    w = rng.standard_exponential(size)
    t = beta * tan(pi * alpha / 2)
    b = atan(t) / alpha
    s = (1.0 + t * t) ** (1.0 / (2 * alpha))
    av = alpha * (v + b)
    return s * np.sin(av) / np.cos(v) ** (1.0 / alpha) \
        * (np.cos(v - av) / w) ** ((1.0 - alpha) / alpha)


def increments(spec: ProcessSpec, dt, rng: np.random.Generator, size=None) -> np.ndarray:
    """Exact increments of ``spec`` over time steps ``dt`` (scalar or array)."""
    dt = np.asarray(dt, dtype=float)
    shape = dt.shape if size is None else size
    if spec.kind == BROWNIAN:
        return spec.mu * dt + spec.sigma * np.sqrt(dt) * rng.standard_normal(shape)
    if spec.kind == STABLE:
        z = standard_stable(rng, spec.alpha, spec.beta, shape)
        return spec.scale * dt ** (1.0 / spec.alpha) * z
    z = standard_stable(rng, spec.alpha, 1.0, shape)
    x = spec.scale * dt ** (1.0 / spec.alpha) * z - spec.drift_b * dt
    return -x if spec.negated else x


def subordinator_increments(spec: ProcessSpec, dt, rng: np.random.Generator,
                            size=None) -> np.ndarray:
    """Increments of the positive stable part ``S`` of the subordinator family."""
    dt = np.asarray(dt, dtype=float)
    shape = dt.shape if size is None else size
    z = standard_stable(rng, spec.alpha, 1.0, shape)
    return np.maximum(spec.scale * dt ** (1.0 / spec.alpha) * z, 0.0)


def batch_mean_stderr(values: Sequence[np.ndarray]):
    """Mean and standard error across batch replicates (axis 0)."""
    arr = np.asarray(values, dtype=float)
    b = arr.shape[0]
    mean = arr.mean(axis=0)
    if b < 2:
        return mean, np.full_like(mean, np.nan)
    return mean, arr.std(axis=0, ddof=1) / np.sqrt(b)
