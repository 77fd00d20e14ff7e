"""Moment-generating spectral radius k(s), h(xi, s), and the Lyapunov exponent.

Three routes are provided and cross-checked elsewhere:

* closed form: under a rotation-invariant H law, k(s) equals
  h(xi, s) = E|(I - xi*H) e_1|^s, and gamma = k'(0) = E log|(I - xi*H) e_1|.
* product limit: (E||A_n ... A_1||^s)^(1/n) evaluated at finite n. By the
  bound E||Pi_m||^s <= C_s k(s)^m the finite-n value overestimates k(s)
  (by at most C_s^(1/n)), and it is decreasing in n up to noise, so the
  n-sequence should be reported rather than one extrapolated number.
* quadrature: deterministic oracles for the d=1, b=1 Gaussian reduction.

Curve evaluations over an s-grid reuse one frozen draw of H (common random
numbers) so that convexity checks and root finding see a smooth function of
s; finite-support H laws are enumerated exactly (stderr 0) instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import quad

from . import mc
from .linalg import batch_operator_norms
from .models import (ModelSpec, h_sum_support, iter_h_blocks, pair_a,
                     sample_h_columns, sample_pairs)

S_MAX_DEFAULT = 30.0
GAUSS_TAIL_CUT = 40.0  # N(0,1) mass beyond |a|=40 is < 1e-300
QUAD_ABS_TOL = 1e-10


class CurveMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    PRODUCT_LIMIT = "product_limit"
    QUADRATURE = "quadrature"


class LyapunovMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    SUBADDITIVE_MC = "subadditive_mc"


@dataclass(frozen=True)
class SpectralCurve:
    """Sampled s -> k(s) (or h(xi, s)) with domain bookkeeping."""

    s_grid: tuple[float, ...]
    values: tuple[mc.McEstimate, ...]
    method: CurveMethod
    s0_hint: float = np.inf  # supremum of the finite-moment domain, if known


@dataclass(frozen=True)
class LyapunovEstimate:
    gamma: float
    stderr: float
    method: LyapunovMethod
    n: int = 0
    skipped: int = 0


def _warn_if_not_rotation_invariant(spec: ModelSpec, what: str) -> None:
    if not spec.rotation_invariant:
        warnings.warn(
            f"{what} assumes a rotation-invariant H law; for this model the "
            "result is an upper-bound heuristic only", RuntimeWarning, stacklevel=3)


class FirstColumnSample:
    """Frozen draw of the first columns H e_1, the common-random-numbers core.

    For finite-support laws the 'draws' are the exact b-fold sum support with
    its probabilities, making every downstream value deterministic (stderr 0).
    ``v(xi) = |(I - xi*H) e_1|`` is recomputable for any xi from the frozen
    columns, so one sample powers whole s- and xi-grids.
    """

    def __init__(self, spec: ModelSpec, samples: int, seed: int,
                 workers: int | None = None, direction: np.ndarray | None = None):
        self.spec = spec
        self.seed = seed
        self.workers = mc.resolve_workers(workers)
        self.direction = None
        if direction is not None:
            u = np.asarray(direction, dtype=float)
            self.direction = u / np.linalg.norm(u)
        support = h_sum_support(spec) if direction is None else None
        if support is not None:
            self.exact = True
            self.cols = np.stack([h[:, 0] for h, _ in support])
            self.weights = np.array([p for _, p in support])
            self.n = len(support)
        else:
            self.exact = False
            if direction is None:
                def task(rng, m):
                    return sample_h_columns(spec, m, rng)
            else:
                u = self.direction

                def task(rng, m):
                    h = np.empty((m, spec.d))
                    done = 0
                    for block in iter_h_blocks(spec, m, rng):
                        h[done:done + block.shape[0]] = block @ u
                        done += block.shape[0]
                    return h
            self.cols = mc.parallel_map(task, samples, seed, self.workers)
            self.weights = None
            self.n = samples

    def v(self, xi: float) -> np.ndarray:
        """|(I - xi*H) u| per frozen draw (u = e_1 unless a direction was given)."""
        w = -xi * self.cols
        if self.direction is None:
            w[:, 0] += 1.0
        else:
            w += self.direction
        return np.sqrt((w * w).sum(axis=1))

    def _moment(self, values: np.ndarray) -> mc.McEstimate:
        if self.exact:
            mean = float(values @ self.weights)
            return mc.McEstimate(mean, 0.0, self.n, 0, self.seed, self.workers)
        return mc.estimate_from_values(values, seed=self.seed, workers=self.workers)

    def h(self, s: float, xi: float | None = None) -> mc.McEstimate:
        if s < 0:
            raise ValueError(f"s must be >= 0, got {s}")
        xi = self.spec.xi if xi is None else xi
        if s == 0:
            return mc.McEstimate(1.0, 0.0, self.n, 0, self.seed, self.workers)
        return self._moment(self.v(xi) ** s)

    def dh_ds(self, s: float, xi: float | None = None) -> mc.McEstimate:
        """E |(I-xi H)e_1|^s log|(I-xi H)e_1| on the frozen draw.

        Zero norms (a probability-zero event under density assumptions) are
        excluded and counted as skipped.
        """
        if s < 0:
            raise ValueError(f"s must be >= 0, got {s}")
        xi = self.spec.xi if xi is None else xi
        v = self.v(xi)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = np.where(v > 0, v ** s * np.log(np.where(v > 0, v, 1.0)), np.nan)
        return self._moment_with_skips(vals, "zero-norm")

    def gamma(self, xi: float | None = None) -> mc.McEstimate:
        xi = self.spec.xi if xi is None else xi
        v = self.v(xi)
        with np.errstate(divide="ignore"):
            vals = np.where(v > 0, np.log(np.where(v > 0, v, 1.0)), np.nan)
        return self._moment_with_skips(vals, "zero-norm")

    def _moment_with_skips(self, values: np.ndarray, tag: str) -> mc.McEstimate:
        bad = ~np.isfinite(values)
        if bad.any():
            warnings.warn(f"{int(bad.sum())} draws excluded ({tag})",
                          RuntimeWarning, stacklevel=3)
        if self.exact:
            if bad.any():
                keep = ~bad
                wsum = self.weights[keep].sum()
                mean = float(values[keep] @ self.weights[keep] / wsum) \
                    if wsum > 0 else np.nan
                return mc.McEstimate(mean, 0.0, int(keep.sum()), int(bad.sum()),
                                     self.seed, self.workers, ((tag, int(bad.sum())),))
            return mc.McEstimate(float(values @ self.weights), 0.0, self.n, 0,
                                 self.seed, self.workers)
        return mc.estimate_from_values(values, seed=self.seed, workers=self.workers,
                                       skip_tag=tag)

    def mean_h11(self) -> mc.McEstimate:
        """E <H e_1, e_1> on the frozen draw (positivity precondition checks)."""
        return self._moment(self.cols[:, 0])


def h_closed_form(spec: ModelSpec, s: float, samples: int, seed: int,
                  workers: int | None = None,
                  direction: np.ndarray | None = None) -> mc.McEstimate:
    """E|(I - xi*H) e_1|^s; equals k(s) for rotation-invariant H laws."""
    _warn_if_not_rotation_invariant(spec, "h_closed_form")
    cols = FirstColumnSample(spec, samples, seed, workers, direction=direction)
    return cols.h(s)


def dh_ds(spec: ModelSpec, s: float, samples: int, seed: int,
          workers: int | None = None) -> mc.McEstimate:
    """s-derivative of the closed form; at s=0 this is the Lyapunov exponent."""
    _warn_if_not_rotation_invariant(spec, "dh_ds")
    cols = FirstColumnSample(spec, samples, seed, workers)
    return cols.dh_ds(s)


def spectral_curve(spec: ModelSpec, s_grid, samples: int, seed: int,
                   method: CurveMethod = CurveMethod.CLOSED_FORM,
                   n: int = 40, workers: int | None = None,
                   s_max: float = S_MAX_DEFAULT) -> SpectralCurve:
    """k(s) over an s-grid; closed-form grids share one frozen draw (CRN)."""
    s_grid = tuple(float(s) for s in s_grid)
    flagged = [s for s in s_grid if s > s_max]
    if flagged:
        warnings.warn(f"s values {flagged} exceed s_max={s_max} and are not "
                      "evaluated (Monte-Carlo variance is uncontrolled there)",
                      RuntimeWarning, stacklevel=2)
    capped = set(flagged)
    nan_est = mc.McEstimate(np.nan, np.nan, 0, 0, seed, mc.resolve_workers(workers))
    if method is CurveMethod.CLOSED_FORM:
        _warn_if_not_rotation_invariant(spec, "closed-form curve")
        cols = FirstColumnSample(spec, samples, seed, workers)
        values = tuple(nan_est if s in capped else cols.h(s) for s in s_grid)
    elif method is CurveMethod.PRODUCT_LIMIT:
        values = tuple(nan_est if s in capped else
                       k_product_limit(spec, s, n, samples, seed, workers)
                       for s in s_grid)
    else:
        raise ValueError("quadrature curves are produced by quadrature_oracle_d1")
    # every built-in law has light-tailed ||A||, so the moment domain is [0, inf)
    return SpectralCurve(s_grid=s_grid, values=values, method=method, s0_hint=np.inf)


def product_log_norms(spec: ModelSpec, n: int, draws: int,
                      rng: np.random.Generator) -> np.ndarray:
    """log ||A_1 ... A_n|| per draw, exact in log domain (stepwise renorm)."""
    d = spec.d
    p = np.broadcast_to(np.eye(d), (draws, d, d)).copy()
    log_norm = np.zeros(draws)
    for _ in range(n):
        h, _b = sample_pairs(spec, draws, rng)
        a = pair_a(spec, h)
        p = np.einsum("mij,mjk->mik", p, a)
        nm = np.maximum(batch_operator_norms(p), 1e-300)
        log_norm += np.log(nm)
        p /= nm[:, None, None]
    return log_norm


def k_product_limit(spec: ModelSpec, s: float, n: int, samples: int, seed: int,
                    workers: int | None = None) -> mc.McEstimate:
    """(E ||Pi_n||^s)^(1/n), accumulated in the log domain to avoid overflow.

    Finite n biases the value upward (submultiplicativity); the sequence in
    n decreases toward k(s) up to Monte-Carlo noise.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    workers_used = mc.resolve_workers(workers)

    def task(rng, m):
        return product_log_norms(spec, n, m, rng)

    log_norms = mc.parallel_map(task, samples, seed, workers_used)
    if s == 0:
        return mc.McEstimate(1.0, 0.0, len(log_norms), 0, seed, workers_used)
    sl = s * log_norms
    shift = sl.max()
    x = np.exp(sl - shift)           # E||Pi||^s = e^shift * mean(x)
    mean_x = x.mean()
    k_hat = float(np.exp((shift + np.log(mean_x)) / n))
    # delta method: k = (E X)^(1/n) with relative error of the mean / n
    rel_se = x.std(ddof=1) / np.sqrt(len(x)) / mean_x if len(x) > 1 else 0.0
    return mc.McEstimate(k_hat, float(k_hat * rel_se / n), len(x), 0, seed, workers_used)


def lyapunov(spec: ModelSpec, method: LyapunovMethod = LyapunovMethod.CLOSED_FORM,
             n: int = 200, samples: int = 100_000, seed: int = 0,
             workers: int | None = None) -> LyapunovEstimate:
    """Top Lyapunov exponent via the closed form or the subadditive limit.

    closed_form: E log|(I - xi*H) e_1| (rotation-invariant laws).
    subadditive_mc: mean over draws of (1/n) log ||Pi_n||.
    """
    method = LyapunovMethod(method)
    if method is LyapunovMethod.CLOSED_FORM:
        _warn_if_not_rotation_invariant(spec, "closed-form Lyapunov exponent")
        est = FirstColumnSample(spec, samples, seed, workers).gamma()
        return LyapunovEstimate(est.mean, est.stderr, method, est.n, est.skipped)

    def task(rng, m):
        return product_log_norms(spec, n, m, rng) / n

    est = mc.parallel_mean(task, samples, seed, workers)
    return LyapunovEstimate(est.mean, est.stderr, method, est.n, est.skipped)


# ---------------------------------------------------------------------------
# Deterministic quadrature oracles for the d=1, b=1 Gaussian reduction


def quadrature_oracle_d1(eta: float, kind: str, s: float = 1.0) -> float:
    """E|1 - eta*a^2|^s or E log|1 - eta*a^2| for a ~ N(0,1), by quadrature.

    The integrand is singular at a = eta^(-1/2); the integral is split there
    and the Gaussian tail truncated at |a| = 40 (mass < 1e-300). Absolute
    error <= 1e-8. For the power case s must exceed -1 (integrability at the
    singularity).
    """
    if eta <= 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    if kind not in ("s", "log"):
        raise ValueError(f"kind must be 's' or 'log', got {kind!r}")
    if kind == "s":
        if s <= -1:
            raise ValueError(f"E|1-eta*a^2|^s is non-integrable for s <= -1 (got s={s})")
        if s == 0:
            return 1.0

    sq2pi = np.sqrt(2 * np.pi)

    if kind == "s":
        def f(a):
            return abs(1.0 - eta * a * a) ** s * np.exp(-a * a / 2) / sq2pi
    else:
        def f(a):
            u = abs(1.0 - eta * a * a)
            if u == 0.0:
                return 0.0
            return np.log(u) * np.exp(-a * a / 2) / sq2pi

    sing = 1.0 / np.sqrt(eta)
    points = [sing] if sing < GAUSS_TAIL_CUT else None
    total, _err = quad(f, 0.0, GAUSS_TAIL_CUT, points=points,
                       limit=500, epsabs=QUAD_ABS_TOL, epsrel=1e-12)
    return 2.0 * total
