"""Reproducible, parallel Monte-Carlo substrate.

Random numbers come from numpy's PCG64 generator (period 2^128) behind
``np.random.Generator``; Gaussians use numpy's ziggurat ``standard_normal``.
Worker substreams are derived from the master seed via
``SeedSequence(seed, spawn_key=(worker_index,))``, so a fixed
``(seed, workers)`` pair is bit-reproducible regardless of scheduling:
chunks are merged in worker-index order, never in completion order.

Estimates with different worker counts partition the stream differently and
therefore differ (within Monte-Carlo noise); this is documented behaviour,
not hidden.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

WORKERS_ENV_VAR = "HEAVYTAIL_WORKERS"

# A task maps (substream, n_draws) -> array of n_draws values (1-D) or
# n_draws rows (2-D). It must be a pure function of its substream.
McTask = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class McEstimate:
    """Monte-Carlo mean with provenance.

    ``n + skipped`` equals the requested draw count; skipped draws carry
    reason tags. ``stderr`` is the sample standard deviation over sqrt(n)
    (0 for exact, zero-variance or single-draw estimates).
    """

    mean: float
    stderr: float
    n: int
    skipped: int = 0
    seed: int | None = None
    workers: int = 1
    skip_reasons: tuple[tuple[str, int], ...] = ()

    def combined_stderr(self, other: "McEstimate") -> float:
        return float(np.hypot(self.stderr, other.stderr))


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else HEAVYTAIL_WORKERS, else 1."""
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV_VAR, "1"))
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return workers


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Deterministic substream ``index`` of master ``seed``."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,)))
    )


def as_generator(seed_or_rng: int | np.random.Generator, index: int = 0) -> np.random.Generator:
    """Accept either a master seed (preferred, enables provenance) or a Generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return substream(int(seed_or_rng), index)


def _chunk_sizes(draws: int, workers: int) -> list[int]:
    base, extra = divmod(draws, workers)
    return [base + (1 if i < extra else 0) for i in range(workers)]


def parallel_map(
    task: McTask,
    draws: int,
    seed: int,
    workers: int | None = None,
) -> np.ndarray:
    """Evaluate ``task`` over ``draws`` substream draws, concatenated in worker order.

    Each worker i runs ``task(substream(seed, i), chunk_i)``; results are
    concatenated in worker-index order so the output is independent of
    thread scheduling.
    """
    workers = resolve_workers(workers)
    if draws < 0:
        raise ValueError("draws must be >= 0")
    sizes = _chunk_sizes(draws, workers)

    def run(i: int) -> np.ndarray:
        if sizes[i] == 0:
            return np.empty(0)
        return np.asarray(task(substream(seed, i), sizes[i]))

    if workers == 1:
        parts = [run(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(workers)))
    parts = [p for p in parts if p.size]
    if not parts:
        return np.empty(0)
    return np.concatenate(parts, axis=0)


def estimate_from_values(
    values: np.ndarray,
    seed: int | None = None,
    workers: int = 1,
    skip_tag: str = "non-finite",
) -> McEstimate:
    """Mean/stderr of a value array; non-finite entries counted as skipped."""
    values = np.asarray(values, dtype=float).ravel()
    finite = np.isfinite(values)
    skipped = int(values.size - finite.sum())
    kept = values[finite]
    n = int(kept.size)
    if n == 0:
        return McEstimate(np.nan, np.nan, 0, skipped, seed, workers,
                          ((skip_tag, skipped),) if skipped else ())
    mean = float(kept.mean())
    stderr = float(kept.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    reasons = ((skip_tag, skipped),) if skipped else ()
    return McEstimate(mean, stderr, n, skipped, seed, workers, reasons)


def parallel_mean(
    task: McTask,
    draws: int,
    seed: int,
    workers: int | None = None,
) -> McEstimate:
    """Deterministic parallel Monte-Carlo mean of a per-draw evaluator.

    NaN/inf evaluations are excluded from the mean and reported as skipped.
    """
    workers = resolve_workers(workers)
    values = parallel_map(task, draws, seed, workers)
    return estimate_from_values(values, seed=seed, workers=workers)


def parallel_tasks(fn, count: int, workers: int | None = None) -> list:
    """Run ``fn(i)`` for i in range(count), results in index order.

    For independent tasks that already own their substreams; this module
    owns the thread pool so results never depend on scheduling.
    """
    workers = resolve_workers(workers)
    if workers == 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))
