"""Matrix products Pi_n = A_1...A_n, partial sums R_n, and trajectories.

Products are accumulated left-to-right (Pi_n = Pi_{n-1} A_n) so that the k-th
additive increment of R is Pi_{k-1} B_k. Heavy-tail regimes can overflow
doubles, so every product is stored as exp(log_scale) * mat with the matrix
renormalized (by operator norm) whenever its entries leave a safe range;
log ||Pi_n|| is then exact up to float rounding regardless of magnitude.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import mc
from .linalg import batch_operator_norms, operator_norm
from .models import CoefficientPair, ModelSpec, pair_a, sample_pairs

_RENORM_HI = 1e150
_RENORM_LO = 1e-150


class StopStatus(str, Enum):
    TOL_PROD = "tol_prod"          # product norm fell below tolerance
    N_MAX = "n_max"                # iteration cap hit, product had contracted below 1
    NON_CONTRACTION = "non_contraction"  # iteration cap hit without contraction
    DIVERGED = "diverged"          # non-finite entries encountered


@dataclass(frozen=True)
class StopRule:
    """Stop when ||Pi_n|| <= tol_prod, else at n_max."""

    tol_prod: float = 1e-12
    n_max: int = 100_000


@dataclass
class Trajectory:
    """State of one recursion path.

    Pi is represented as exp(log_scale) * pi_mat. ``log_norms[k]`` records
    log ||Pi_{t}|| for the retained steps t (every ``thin``-th step, always
    including the current one). ``x`` is the forward iterate when a start
    value was given.
    """

    d: int
    pi_mat: np.ndarray = None
    log_scale: float = 0.0
    r: np.ndarray = None
    n: int = 0
    log_norms: list = field(default_factory=list)
    x: np.ndarray | None = None
    diverged: bool = False
    thin: int = 1

    def __post_init__(self):
        if self.pi_mat is None:
            self.pi_mat = np.eye(self.d)
        if self.r is None:
            self.r = np.zeros(self.d)
        if self.x is not None:
            self.x = np.asarray(self.x, dtype=float)

    @property
    def log_pi_norm(self) -> float:
        return self.log_scale + np.log(operator_norm(self.pi_mat))

    @property
    def pi(self) -> np.ndarray:
        """The raw product matrix (may over/underflow for extreme scales)."""
        return np.exp(self.log_scale) * self.pi_mat


def advance(traj: Trajectory, pair: CoefficientPair) -> Trajectory:
    """One recursion step; the trajectory is frozen once divergence is flagged."""
    if traj.diverged:
        return traj
    with np.errstate(over="ignore", invalid="ignore"):
        increment = np.exp(traj.log_scale) * (traj.pi_mat @ pair.B)
        r_new = traj.r + increment
        pi_new = traj.pi_mat @ pair.A
        x_new = pair.A @ traj.x + pair.B if traj.x is not None else None
    if not (np.isfinite(r_new).all() and np.isfinite(pi_new).all()
            and (x_new is None or np.isfinite(x_new).all())):
        traj.diverged = True
        return traj
    traj.r = r_new
    traj.pi_mat = pi_new
    traj.x = x_new
    traj.n += 1
    peak = np.abs(traj.pi_mat).max()
    if peak > _RENORM_HI or (0.0 < peak < _RENORM_LO):
        nm = operator_norm(traj.pi_mat)
        traj.log_scale += np.log(nm)
        traj.pi_mat = traj.pi_mat / nm
    if traj.n % traj.thin == 0:
        traj.log_norms.append(traj.log_pi_norm)
    return traj


def run_trajectory(spec: ModelSpec, n: int, rng: np.random.Generator,
                   x0: np.ndarray | None = None, thin: int = 1) -> Trajectory:
    """Advance a fresh trajectory n steps, drawing pairs one at a time."""
    traj = Trajectory(d=spec.d, x=x0, thin=thin)
    for _ in range(n):
        h, b = sample_pairs(spec, 1, rng)
        advance(traj, CoefficientPair(A=pair_a(spec, h[0]), B=b[0], H=h[0]))
        if traj.diverged:
            break
    return traj


# ---------------------------------------------------------------------------
# Vectorized batch simulation (the workhorse behind sample_R and the CLI)


@dataclass
class StationaryBatch:
    """Truncated stationary draws for a batch of independent trajectories."""

    r: np.ndarray              # (n, d) truncated series values
    n_steps: np.ndarray        # (n,) stop step per trajectory
    log_pi_final: np.ndarray   # (n,) log ||Pi|| at the stop step
    status: np.ndarray         # (n,) StopStatus values (object array of str)

    @property
    def abs_r(self) -> np.ndarray:
        return np.sqrt((self.r * self.r).sum(axis=1))

    def truncation_bound_factor(self) -> np.ndarray:
        """||Pi_n|| at stop; the omitted tail is bounded by this factor times
        the (model-dependent) stationary sum of future ||A-products|| |B|."""
        return np.exp(self.log_pi_final)


def sample_r_batch(spec: ModelSpec, draws: int, rng: np.random.Generator,
                   stop: StopRule = StopRule()) -> StationaryBatch:
    """Draw ``draws`` independent truncated stationary-series values R.

    Each trajectory runs until ||Pi_n|| <= tol_prod or n_max. Trajectories
    whose product never contracted below 1 by n_max are flagged
    NON_CONTRACTION (suggesting a nonnegative Lyapunov exponent or too small
    an n_max). Per-step arrays are compacted to the active set, so cost is
    proportional to the realized total number of steps.
    """
    d = spec.d
    r = np.zeros((draws, d))
    pi = np.broadcast_to(np.eye(d), (draws, d, d)).copy()
    log_scale = np.zeros(draws)
    n_steps = np.zeros(draws, dtype=int)
    log_final = np.zeros(draws)
    status = np.full(draws, StopStatus.N_MAX.value, dtype=object)
    active = np.arange(draws)
    log_tol = np.log(stop.tol_prod) if stop.tol_prod > 0 else -np.inf

    n = 0
    while active.size and n < stop.n_max:
        n += 1
        m = active.size
        h, b = sample_pairs(spec, m, rng)
        a = pair_a(spec, h)
        with np.errstate(over="ignore", invalid="ignore"):
            r_new = r[active] + (np.exp(log_scale[active])[:, None]
                                 * np.einsum("mij,mj->mi", pi[active], b))
            pi_new = np.einsum("mij,mjk->mik", pi[active], a)
        norms = batch_operator_norms(pi_new)
        bad = (~np.isfinite(norms) | ~np.isfinite(pi_new).all(axis=(1, 2))
               | ~np.isfinite(r_new).all(axis=1))
        r[active[~bad]] = r_new[~bad]
        if bad.any():
            idx_bad = active[bad]
            status[idx_bad] = StopStatus.DIVERGED.value
            n_steps[idx_bad] = n
            log_final[idx_bad] = np.inf
        # renormalize so entries stay in float range
        safe = ~bad
        nm_safe = np.maximum(norms[safe], 1e-300)
        rescale = (nm_safe > _RENORM_HI) | (nm_safe < _RENORM_LO)
        scale = np.where(rescale, nm_safe, 1.0)
        pi[active[safe]] = pi_new[safe] / scale[:, None, None]
        log_scale[active[safe]] += np.log(scale)
        log_norm = log_scale[active[safe]] + np.log(nm_safe)

        done = log_norm <= log_tol
        idx_done = active[safe][done]
        status[idx_done] = StopStatus.TOL_PROD.value
        n_steps[idx_done] = n
        log_final[idx_done] = log_norm[done]
        active = active[safe][~done]
        if n == stop.n_max and active.size:
            log_norm_alive = log_scale[active] + np.log(
                np.maximum(batch_operator_norms(pi[active]), 1e-300))
            nc = log_norm_alive >= 0  # never decayed below 1
            status[active[nc]] = StopStatus.NON_CONTRACTION.value
            n_steps[active] = n
            log_final[active] = log_norm_alive
    return StationaryBatch(r=r, n_steps=n_steps, log_pi_final=log_final, status=status)


def sample_r(spec: ModelSpec, rng: np.random.Generator,
             stop: StopRule = StopRule()) -> tuple[np.ndarray, str, int]:
    """One truncated stationary draw: (R, status, stop step).

    Warns when the product has not contracted below 1 by n_max.
    """
    batch = sample_r_batch(spec, 1, rng, stop)
    st = batch.status[0]
    if st == StopStatus.NON_CONTRACTION.value:
        warnings.warn("product norm did not contract below 1 by n_max; "
                      "the Lyapunov exponent may be nonnegative or n_max too small",
                      RuntimeWarning, stacklevel=2)
    return batch.r[0], st, int(batch.n_steps[0])


def partial_sum_norms(spec: ModelSpec, n_grid: list[int], draws: int,
                      rng: np.random.Generator) -> np.ndarray:
    """|R_n| for each n in n_grid, nested over the same trajectories.

    Returns shape (draws, len(n_grid)). All grid points reuse one set of
    trajectories (nested partial sums), which is what makes consecutive
    moment estimates comparable.
    """
    n_grid = sorted(int(n) for n in n_grid)
    d = spec.d
    r = np.zeros((draws, d))
    pi = np.broadcast_to(np.eye(d), (draws, d, d)).copy()
    log_scale = np.zeros(draws)
    out = np.empty((draws, len(n_grid)))
    pos = 0
    for n in range(1, n_grid[-1] + 1):
        h, b = sample_pairs(spec, draws, rng)
        a = pair_a(spec, h)
        r += np.exp(log_scale)[:, None] * np.einsum("mij,mj->mi", pi, b)
        pi = np.einsum("mij,mjk->mik", pi, a)
        peak = np.abs(pi).max(axis=(1, 2))
        rescale = (peak > _RENORM_HI) | ((peak > 0) & (peak < _RENORM_LO))
        if rescale.any():
            nm = batch_operator_norms(pi[rescale])
            pi[rescale] /= nm[:, None, None]
            log_scale[rescale] += np.log(nm)
        if n == n_grid[pos]:
            out[:, pos] = np.sqrt((r * r).sum(axis=1))
            pos += 1
    return out


def moment_growth_curve(spec: ModelSpec, alpha: float, n_grid: list[int],
                        samples: int, seed: int,
                        workers: int | None = None) -> list[tuple[int, mc.McEstimate]]:
    """Monte-Carlo E|R_n|^alpha for each n in n_grid (shared trajectories)."""
    n_grid = sorted(int(n) for n in n_grid)

    def task(rng, m):
        return partial_sum_norms(spec, n_grid, m, rng) ** alpha

    values = mc.parallel_map(task, samples, seed, workers)
    workers_used = mc.resolve_workers(workers)
    return [(n, mc.estimate_from_values(values[:, j], seed=seed, workers=workers_used))
            for j, n in enumerate(n_grid)]


@dataclass(frozen=True)
class TailBoundReport:
    """Empirical exceedance curve of |R_n| with a top-decade power fit."""

    n: int
    alpha: float
    epsilon: float
    t_grid: np.ndarray
    exceedance: np.ndarray       # P(|R_n| > t) per t
    counts: np.ndarray           # exceedance counts per t
    slope: float                 # log-log fit over the top decade of t
    top_decade_mask: np.ndarray
    widened_uncertainty: bool    # < 50 exceedances in the top decade

    def bound_satisfied(self, slack: float = 0.2) -> bool:
        return self.slope <= -(self.alpha + self.epsilon) + slack


def finite_iteration_tail(spec: ModelSpec, alpha: float, epsilon: float, n: int,
                          t_grid, samples: int, seed: int,
                          workers: int | None = None) -> TailBoundReport:
    """Exceedance curve of |R_n| plus its fitted log-log slope.

    The slope is fitted over the largest decade of t (t >= max(t)/10) using
    grid points with at least one exceedance; fewer than 50 exceedances at
    the top of that decade flags widened uncertainty.
    """
    def task(rng, m):
        return partial_sum_norms(spec, [n], m, rng)[:, 0]

    abs_r = mc.parallel_map(task, samples, seed, workers)
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    counts = np.array([(abs_r > t).sum() for t in t_grid])
    exceed = counts / len(abs_r)
    top = t_grid >= t_grid[-1] / 10.0
    usable = top & (counts > 0)
    if usable.sum() >= 2:
        slope = float(np.polyfit(np.log(t_grid[usable]), np.log(exceed[usable]), 1)[0])
    else:
        slope = np.nan
    widened = bool(counts[top].min() < 50) if top.any() else True
    return TailBoundReport(n=n, alpha=alpha, epsilon=epsilon, t_grid=t_grid,
                           exceedance=exceed, counts=counts, slope=slope,
                           top_decade_mask=top, widened_uncertainty=widened)
