"""Tail-index solver: roots of h(xi, s) = 1 in s and in xi.

The root in s of h(xi, .) - 1 is the tail index alpha(xi); the root in xi of
h(., 1) - 1 is the critical step ratio xi_1 beyond which the stationary law
loses its mean. Both solves run on a common-random-numbers frozen draw of H
(exact enumeration for finite-support laws), so the function being bisected
is deterministic and strictly convex up to float rounding; bisection is
followed by an optional Newton polish using the s-derivative.

Uniqueness of the s-root on (0, s_max] follows from strict convexity of
s -> h(xi, s) together with h(xi, 0) = 1.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .models import ModelSpec
from .spectral import S_MAX_DEFAULT, FirstColumnSample

XI1_REFINE_WINDOW = 0.05   # within 5% of xi_1 the root is shallow; refine
XI1_REFINE_SAMPLES = 4     # sample multiplier inside the window
XI1_REFINE_TOL = 0.2       # tolerance multiplier inside the window


class SolveStatus(str, Enum):
    CONVERGED = "converged"
    NO_ROOT_BELOW_S_MAX = "no_root_below_s_max"
    GAMMA_NON_NEGATIVE = "gamma_non_negative"


class RangeError(RuntimeError):
    """Root scan found no sign change; carries the scan for diagnosis."""

    def __init__(self, message: str, scan=None):
        super().__init__(message)
        self.scan = scan


@dataclass(frozen=True)
class AlphaSolve:
    """Result of solving h(xi, alpha) = 1 for one xi."""

    xi: float
    alpha: float
    residual: float
    bracket: tuple[float, float]
    stderr_alpha: float
    status: SolveStatus
    gamma: float = np.nan
    gamma_stderr: float = np.nan
    h_stderr: float = np.nan


@dataclass(frozen=True)
class AlphaCurve:
    xi_grid: tuple[float, ...]
    solves: tuple[AlphaSolve, ...]
    xi1: float
    monotonicity_report: tuple[tuple[float, float, bool], ...]
    # (xi_left, xi_right, decreasing-beyond-combined-uncertainty) per adjacent pair


def _bisect_on(fn, lo: float, hi: float, f_lo: float, f_hi: float,
               tol_resid: float, max_iter: int = 200):
    """Bisect a deterministic scalar function until |f| <= tol_resid.

    Returns (root, f(root), lo, hi, f(lo), f(hi)) with the narrowed bracket.
    """
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if abs(f_mid) <= tol_resid or (hi - lo) < 1e-15 * max(1.0, abs(mid)):
            return mid, f_mid, lo, hi, f_lo, f_hi
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return mid, f_mid, lo, hi, f_lo, f_hi


def solve_alpha(spec: ModelSpec, tol_root: float = 1e-3, samples: int = 200_000,
                seed: int = 0, s_max: float = S_MAX_DEFAULT,
                workers: int | None = None, newton_polish: bool = True,
                cols: FirstColumnSample | None = None,
                xi: float | None = None) -> AlphaSolve:
    """Root of s -> h(xi, s) - 1 on (0, s_max], frozen-draw deterministic.

    tol_root is in h-units. Status is gamma_non_negative when the Lyapunov
    estimate at xi is nonnegative beyond noise (no positive root exists, by
    convexity), and no_root_below_s_max when h stays below 1 on the scan.
    stderr_alpha propagates the Monte-Carlo uncertainty of h through the
    local slope: stderr(h at root) / |dh/ds at root|.
    """
    if cols is None:
        cols = FirstColumnSample(spec, samples, seed, workers)
    xi = spec.xi if xi is None else xi
    gam = cols.gamma(xi)
    if gam.mean >= 3.0 * gam.stderr:
        return AlphaSolve(xi=xi, alpha=np.nan, residual=np.nan,
                          bracket=(np.nan, np.nan), stderr_alpha=np.nan,
                          status=SolveStatus.GAMMA_NON_NEGATIVE,
                          gamma=gam.mean, gamma_stderr=gam.stderr)

    def f(s: float) -> float:
        return cols.h(s, xi).mean - 1.0

    # scan upward for the sign change; h dips below 1 near 0 (gamma < 0)
    # and crosses back once, by strict convexity. The leading point sits
    # just above 0 so roots below the first regular grid step are bracketed.
    grid = np.concatenate(([min(1e-4, s_max / 2)], np.linspace(0.0, s_max, 121)[1:]))
    f_prev, s_prev = None, 0.0
    bracket = None
    scan = []
    for s in grid:
        val = f(s)
        scan.append((s, val + 1.0))
        if f_prev is not None and f_prev < 0 <= val:
            bracket = (s_prev, s, f_prev, val)
            break
        f_prev, s_prev = val, s
    if bracket is None:
        return AlphaSolve(xi=xi, alpha=np.nan, residual=np.nan,
                          bracket=(np.nan, np.nan), stderr_alpha=np.nan,
                          status=SolveStatus.NO_ROOT_BELOW_S_MAX,
                          gamma=gam.mean, gamma_stderr=gam.stderr)
    lo, hi, f_lo, f_hi = bracket
    root, resid, lo, hi, f_lo, f_hi = _bisect_on(f, lo, hi, f_lo, f_hi, tol_root)
    if newton_polish:
        for _ in range(4):
            slope = cols.dh_ds(root, xi).mean
            if not np.isfinite(slope) or slope <= 0:
                break
            cand = min(max(root - resid / slope, lo), hi)
            if cand == root:
                break
            root = cand
            resid = f(root)
            if abs(resid) <= tol_root * 1e-6:
                break
    h_at = cols.h(root, xi)
    slope = cols.dh_ds(root, xi).mean
    stderr_alpha = h_at.stderr / abs(slope) if slope else np.inf
    return AlphaSolve(xi=xi, alpha=float(root), residual=float(h_at.mean - 1.0),
                      bracket=(float(lo), float(hi)), stderr_alpha=float(stderr_alpha),
                      status=SolveStatus.CONVERGED, gamma=gam.mean,
                      gamma_stderr=gam.stderr, h_stderr=h_at.stderr)


def solve_xi1(spec: ModelSpec, tol_root: float = 1e-3, samples: int = 200_000,
              seed: int = 0, xi_max: float | None = None,
              workers: int | None = None,
              cols: FirstColumnSample | None = None) -> float:
    """Unique xi_1 > 0 with h(xi_1, 1) = 1, by bracketed bisection in xi.

    Precondition E<H e_1, e_1> > 0 is estimated on the frozen draw and must
    hold beyond 3 standard errors. The same frozen columns evaluate h(xi, 1)
    for every xi (the columns do not depend on xi), so the scan is smooth.
    """
    if cols is None:
        cols = FirstColumnSample(spec, samples, seed, workers)
    h11 = cols.mean_h11()
    if not (h11.mean > 3.0 * h11.stderr):
        raise RangeError(
            f"E<H e_1,e_1> = {h11.mean:.4g} +- {h11.stderr:.2g} is not positive "
            "beyond 3 standard errors; no critical xi is guaranteed")

    def g(xi: float) -> float:
        return cols.h(1.0, xi).mean - 1.0

    # h(., 1) is strictly convex with g(0) = 0 and negative slope at 0;
    # scan geometrically for the sign change back to positive
    hi_limit = xi_max if xi_max is not None else 16.0 / max(h11.mean, 1e-12)
    scan = []
    xi_lo, g_lo = None, None
    xi = hi_limit / 1024.0
    found = None
    while xi <= hi_limit * (1 + 1e-12):
        val = g(xi)
        scan.append((xi, val + 1.0))
        if val < 0:
            xi_lo, g_lo = xi, val
        elif xi_lo is not None and val >= 0:
            found = (xi_lo, xi, g_lo, val)
            break
        xi *= 1.5
    if found is None:
        raise RangeError("no sign change of h(., 1) - 1 on the scanned xi range",
                         scan=scan)
    lo, hi, f_lo, f_hi = found
    root, resid, lo, hi, f_lo, f_hi = _bisect_on(g, lo, hi, f_lo, f_hi, tol_root)
    # secant polish inside the bracket (the bisection tolerance is in h-units;
    # the root itself should be located to the slope-adjusted accuracy)
    for _ in range(12):
        denom = f_hi - f_lo
        if denom == 0:
            break
        cand = min(max(hi - f_hi * (hi - lo) / denom, lo), hi)
        f_cand = g(cand)
        if abs(f_cand) < abs(resid):
            root, resid = cand, f_cand
        if (f_cand < 0) == (f_lo < 0):
            lo, f_lo = cand, f_cand
        else:
            hi, f_hi = cand, f_cand
        if abs(resid) <= tol_root * 1e-6:
            break
    return float(root)


def alpha_curve(spec: ModelSpec, xi_grid, tol_root: float = 1e-3,
                samples: int = 200_000, seed: int = 0,
                workers: int | None = None) -> AlphaCurve:
    """alpha(xi) over a xi-grid, with xi_1 and a strict-decrease report.

    Each xi owns a derived substream (index = position in the grid). Within
    5% of xi_1 the implicit function is badly conditioned (the slope of h at
    s=1 vanishes), so tolerance is tightened and the sample count raised.
    """
    xi_grid = tuple(float(x) for x in xi_grid)
    xi1 = solve_xi1(spec, tol_root=tol_root, samples=samples, seed=seed,
                    workers=workers)
    solves = []
    for i, xi in enumerate(xi_grid):
        near_critical = abs(xi - xi1) <= XI1_REFINE_WINDOW * xi1
        n_draws = samples * XI1_REFINE_SAMPLES if near_critical else samples
        tol = tol_root * XI1_REFINE_TOL if near_critical else tol_root
        cols = FirstColumnSample(spec, n_draws, seed, workers=workers) \
            if spec.has_finite_h_support else \
            FirstColumnSample(spec, n_draws, _spawned(seed, i), workers=workers)
        try:
            solves.append(solve_alpha(spec, tol_root=tol, samples=n_draws,
                                      seed=seed, workers=workers, cols=cols, xi=xi))
        except Exception as exc:  # per-point failures recorded, curve continues
            warnings.warn(f"alpha solve failed at xi={xi}: {exc}", RuntimeWarning)
            solves.append(AlphaSolve(xi=xi, alpha=np.nan, residual=np.nan,
                                     bracket=(np.nan, np.nan), stderr_alpha=np.nan,
                                     status=SolveStatus.NO_ROOT_BELOW_S_MAX))
    report = []
    for left, right in zip(solves, solves[1:]):
        # a no-root point means the root lies beyond s_max: order it as +inf
        def effective(s: AlphaSolve) -> float:
            if s.status is SolveStatus.CONVERGED:
                return s.alpha
            if s.status is SolveStatus.NO_ROOT_BELOW_S_MAX:
                return np.inf
            return np.nan
        a_l, a_r = effective(left), effective(right)
        if np.isnan(a_l) or np.isnan(a_r):
            decreasing = False
        elif np.isinf(a_l) or np.isinf(a_r):
            decreasing = a_l > a_r or (np.isinf(a_l) and np.isinf(a_r))
        else:
            unc = float(np.hypot(left.stderr_alpha, right.stderr_alpha))
            decreasing = bool(a_l - a_r > unc)
        report.append((left.xi, right.xi, decreasing))
    return AlphaCurve(xi_grid=xi_grid, solves=tuple(solves), xi1=xi1,
                      monotonicity_report=tuple(report))


def _spawned(seed: int, index: int) -> int:
    # distinct master seeds per grid point, deterministic in (seed, index)
    return (seed * 0x9E3779B9 + index + 1) % (1 << 63)


# ---------------------------------------------------------------------------
# Contour grids (h over (parameter, s) with the h = 1 isoline)


@dataclass(frozen=True)
class ContourGrid:
    param_name: str              # "b" or "eta"
    param_grid: tuple[float, ...]
    s_grid: tuple[float, ...]
    h: np.ndarray                # raw values, shape (len(param_grid), len(s_grid))
    h_clipped: np.ndarray        # clipped at the display ceiling (2.0)
    isoline: tuple[np.ndarray, ...]  # polylines in (param, s) coordinates
    clip_level: float = 2.0


def contour_grid(spec: ModelSpec, param: str, param_grid, s_grid,
                 samples: int = 100_000, seed: int = 0,
                 workers: int | None = None, clip_level: float = 2.0) -> ContourGrid:
    """h over a (b, s) or (eta, s) grid plus the h = 1 isoline.

    eta-grids freeze one draw of H columns and reuse it across the whole
    grid (xi only rescales the columns); b-grids redraw per column since b
    changes the law. Values are clipped at ``clip_level`` for display; raw
    values are kept alongside. Failed cells are recorded as NaN.
    """
    if param not in ("b", "eta"):
        raise ValueError("param must be 'b' or 'eta'")
    param_grid = tuple(float(p) for p in param_grid)
    s_grid = tuple(float(s) for s in s_grid)
    h = np.full((len(param_grid), len(s_grid)), np.nan)
    if param == "eta":
        cols = FirstColumnSample(spec, samples, seed, workers)
        for i, eta in enumerate(param_grid):
            xi = eta / spec.b
            v = cols.v(xi)
            for j, s in enumerate(s_grid):
                h[i, j] = 1.0 if s == 0 else float(np.average(
                    v ** s, weights=cols.weights))
    else:
        for i, b in enumerate(param_grid):
            bi = int(round(b))
            if bi != b or bi < 1:
                warnings.warn(f"skipping non-integer batch size {b}", RuntimeWarning)
                continue
            spec_b = replace(spec, b=bi)
            cols = FirstColumnSample(spec_b, samples, _spawned(seed, i), workers)
            v = cols.v(spec_b.xi)
            for j, s in enumerate(s_grid):
                h[i, j] = 1.0 if s == 0 else float(np.average(
                    v ** s, weights=cols.weights))
    isoline = marching_squares(np.asarray(param_grid), np.asarray(s_grid), h, 1.0)
    return ContourGrid(param_name=param, param_grid=param_grid, s_grid=s_grid,
                       h=h, h_clipped=np.minimum(h, clip_level), isoline=isoline,
                       clip_level=clip_level)


# ---------------------------------------------------------------------------
# Marching squares (level-set polylines on a rectilinear grid)


def _interp(p1, p2, v1, v2, level):
    t = 0.5 if v2 == v1 else (level - v1) / (v2 - v1)
    return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))


def marching_squares(x: np.ndarray, y: np.ndarray, z: np.ndarray,
                     level: float) -> tuple[np.ndarray, ...]:
    """Isoline segments of z(x, y) at ``level``, chained into polylines.

    z is indexed [i, j] = (x[i], y[j]). Cells containing NaNs are skipped.
    Saddle cells are disambiguated by the cell-center average. Returns
    polylines as (k, 2) arrays of (x, y) points.
    """
    segments = []
    for i in range(len(x) - 1):
        for j in range(len(y) - 1):
            corners = [z[i, j], z[i + 1, j], z[i + 1, j + 1], z[i, j + 1]]
            if any(not np.isfinite(c) for c in corners):
                continue
            pts = [(x[i], y[j]), (x[i + 1], y[j]), (x[i + 1], y[j + 1]), (x[i], y[j + 1])]
            idx = 0
            for k, c in enumerate(corners):
                if c > level:
                    idx |= 1 << k
            if idx in (0, 15):
                continue

            def cross(e1, e2):
                a = _interp(pts[e1[0]], pts[e1[1]], corners[e1[0]], corners[e1[1]], level)
                b = _interp(pts[e2[0]], pts[e2[1]], corners[e2[0]], corners[e2[1]], level)
                segments.append((a, b))

            if idx in (5, 10):  # saddle: split by center value
                center = sum(corners) / 4.0
                cut_around_c1_c3 = (center > level) == (idx == 5)
                if cut_around_c1_c3:
                    cross((0, 1), (1, 2))
                    cross((2, 3), (0, 3))
                else:
                    cross((0, 1), (0, 3))
                    cross((1, 2), (2, 3))
                continue
            # complement cases cross the same edge pair
            table = {1: ((0, 1), (0, 3)), 2: ((0, 1), (1, 2)), 3: ((1, 2), (0, 3)),
                     4: ((1, 2), (2, 3)), 6: ((0, 1), (2, 3)), 7: ((2, 3), (0, 3))}
            cross(*table[min(idx, 15 - idx)])
    return _chain_segments(segments)


def _chain_segments(segments) -> tuple[np.ndarray, ...]:
    def key(p):
        return (round(p[0], 9), round(p[1], 9))

    # zero-length segments arise when the level passes exactly through a
    # grid node; they carry no geometry and break endpoint chaining
    segments = [(a, b) for a, b in segments if key(a) != key(b)]
    unused = list(range(len(segments)))
    by_end: dict = {}
    for si in unused:
        a, b = segments[si]
        by_end.setdefault(key(a), []).append(si)
        by_end.setdefault(key(b), []).append(si)
    seen = set()
    polylines = []
    for si in unused:
        if si in seen:
            continue
        seen.add(si)
        a, b = segments[si]
        chain = [a, b]
        for grow_head in (False, True):
            while True:
                tip = chain[0] if grow_head else chain[-1]
                cands = [c for c in by_end.get(key(tip), []) if c not in seen]
                if not cands:
                    break
                ci = cands[0]
                seen.add(ci)
                ca, cb = segments[ci]
                nxt = cb if key(ca) == key(tip) else ca
                if grow_head:
                    chain.insert(0, nxt)
                else:
                    chain.append(nxt)
        polylines.append(np.asarray(chain))
    return tuple(polylines)
