import numpy as np
import pytest

from heavytail.models import (DeterministicLaw, MatrixMixtureLaw, rank1_gauss,
                              symm)
from heavytail.spectral import FirstColumnSample, quadrature_oracle_d1
from heavytail.tailsolver import (RangeError, SolveStatus, alpha_curve,
                                  contour_grid, marching_squares, solve_alpha,
                                  solve_xi1)


def mixture_spec(eta=1.0, b=1):
    law = MatrixMixtureLaw((0.5 * np.eye(1), 2.5 * np.eye(1)), (0.5, 0.5))
    return symm(d=1, b=b, eta=eta, h_law=law)


def test_mixture_alpha_exact():
    # h(s) = (0.5^s + 1.5^s)/2 crosses 1 at s = 1 since 0.5 + 1.5 = 2
    solve = solve_alpha(mixture_spec(), samples=100, seed=0)
    assert solve.status is SolveStatus.CONVERGED
    assert solve.alpha == pytest.approx(1.0, abs=1e-3)
    assert abs(solve.residual) <= 1e-3
    assert solve.bracket[0] <= solve.alpha <= solve.bracket[1]


def test_deterministic_contraction_has_no_root():
    # H = I, xi = 0.5: h(s) = 0.5^s < 1 for all s > 0
    spec = symm(d=1, b=1, eta=0.5, h_law=DeterministicLaw(np.eye(1)))
    solve = solve_alpha(spec, samples=100, seed=1)
    assert solve.status is SolveStatus.NO_ROOT_BELOW_S_MAX


def test_gamma_non_negative_status():
    # H = -I (expanding): gamma = log|1 + xi| > 0
    spec = symm(d=1, b=1, eta=0.5, h_law=DeterministicLaw(-np.eye(1)))
    solve = solve_alpha(spec, samples=100, seed=2)
    assert solve.status is SolveStatus.GAMMA_NON_NEGATIVE
    assert solve.gamma >= 0


def test_rank1gauss_alpha_against_quadrature_root():
    # eta = 2/3 makes E(1 - eta a^2)^2 = 1 - 2 eta + 3 eta^2 = 1: root is 2.0
    from scipy.optimize import brentq
    oracle_root = brentq(lambda s: quadrature_oracle_d1(2 / 3, "s", s) - 1.0,
                         1.0, 4.0, xtol=1e-10)
    assert oracle_root == pytest.approx(2.0, abs=1e-8)
    solve = solve_alpha(rank1_gauss(1, 1, 2 / 3), samples=400_000, seed=3)
    assert solve.status is SolveStatus.CONVERGED
    assert solve.alpha == pytest.approx(2.0, abs=0.05)


def test_convexity_uniqueness_audit():
    # on the solving stream: h < 1 at alpha/2 and > 1 at 1.5*alpha
    spec = rank1_gauss(1, 1, 2 / 3)
    cols = FirstColumnSample(spec, 200_000, seed=4)
    solve = solve_alpha(spec, samples=200_000, seed=4, cols=cols)
    assert cols.h(solve.alpha / 2).mean < 1.0
    assert cols.h(min(solve.alpha * 1.5, 30.0)).mean > 1.0


def test_xi1_mixture_exact():
    assert solve_xi1(mixture_spec(), samples=100, seed=5) == pytest.approx(1.0, abs=1e-3)


def test_xi1_deterministic_scalar():
    # H = c: h(xi, 1) = |1 - xi c|, so xi_1 = 2/c
    for c in (0.5, 2.0):
        spec = symm(d=1, b=1, eta=1.0, h_law=DeterministicLaw(c * np.eye(1)))
        assert solve_xi1(spec, samples=10, seed=6) == pytest.approx(2 / c, abs=1e-3)


def test_xi1_requires_positive_mean_h11():
    spec = symm(d=1, b=1, eta=1.0, h_law=DeterministicLaw(-np.eye(1)))
    with pytest.raises(RangeError):
        solve_xi1(spec, samples=10, seed=7)


def test_alpha_curve_mixture_decreasing():
    # bounded H support: below xi = 0.8 both |A| values are < 1, so the root
    # exceeds s_max (reported as such, standing in for alpha -> infinity);
    # past that the exact roots decrease toward 1 at xi_1 = 1
    spec = mixture_spec()
    curve = alpha_curve(spec, [0.5, 0.85, 0.9, 0.999], samples=100, seed=8)
    assert curve.solves[0].status is SolveStatus.NO_ROOT_BELOW_S_MAX
    alphas = [s.alpha for s in curve.solves[1:]]
    assert alphas[0] > alphas[1] > alphas[2]
    assert alphas[2] == pytest.approx(1.0, abs=5e-2)
    assert curve.xi1 == pytest.approx(1.0, abs=1e-3)
    assert all(ok for _, _, ok in curve.monotonicity_report)


def test_alpha_curve_at_xi1_returns_one():
    curve = alpha_curve(mixture_spec(), [1.0], samples=100, seed=9)
    assert curve.solves[0].alpha == pytest.approx(1.0, abs=1e-3)


def test_alpha_below_one_past_xi1():
    # mixture: gamma(xi) stays negative a bit beyond xi_1 = 1, with alpha < 1
    spec = mixture_spec()
    cols = FirstColumnSample(spec, 100, seed=10)
    xi_past = 1.1
    assert cols.gamma(xi_past).mean < 0
    solve = solve_alpha(spec, samples=100, seed=10, xi=xi_past)
    assert solve.status is SolveStatus.CONVERGED
    assert solve.alpha < 1.0
    # direct scan confirms the crossing is below 1
    assert cols.h(0.99, xi_past).mean > 1.0


def test_small_xi_exceeds_s_max():
    # xi -> 0+: the root runs off past s_max (alpha -> infinity)
    solve = solve_alpha(mixture_spec(), samples=100, seed=11, xi=0.01)
    assert solve.status is SolveStatus.NO_ROOT_BELOW_S_MAX


# --- contours ----------------------------------------------------------------

def test_contour_xi_zero_column_is_one():
    grid = contour_grid(rank1_gauss(2, 5, 0.75), "eta", [1e-12, 0.5],
                        [0.0, 1.0, 2.0], samples=20_000, seed=12)
    assert np.allclose(grid.h[0], 1.0, atol=1e-10)
    assert grid.h_clipped.max() <= 2.0


def test_contour_b_grid_monotone_crossings():
    # larger batch permits larger s at the h = 1 crossing (d=2, eta=0.75)
    grid = contour_grid(rank1_gauss(2, 1, 0.75), "b", [2, 4, 8],
                        np.arange(0.25, 8.01, 0.25), samples=60_000, seed=13)
    crossings = []
    for i in range(3):
        row = grid.h[i]
        above = np.where(row > 1.0)[0]
        crossings.append(grid.s_grid[above[0]] if len(above) else np.inf)
    assert crossings[0] < crossings[1] < crossings[2]
    assert len(grid.isoline) >= 1


def test_contour_eta_grid_crossing_decreases():
    grid = contour_grid(rank1_gauss(2, 5, 0.75), "eta", [0.5, 1.0, 1.4],
                        np.arange(0.25, 10.01, 0.25), samples=60_000, seed=14)
    crossings = []
    for i in range(3):
        above = np.where(grid.h[i] > 1.0)[0]
        crossings.append(grid.s_grid[above[0]] if len(above) else np.inf)
    assert crossings[0] > crossings[1] > crossings[2]


# --- marching squares --------------------------------------------------------

def test_marching_squares_circle():
    x = np.linspace(-2, 2, 81)
    y = np.linspace(-2, 2, 81)
    z = x[:, None] ** 2 + y[None, :] ** 2
    lines = marching_squares(x, y, z, 1.0)
    pts = np.vstack(lines)
    radii = np.sqrt((pts ** 2).sum(axis=1))
    assert abs(radii - 1.0).max() < 0.01
    # a closed curve chains into one polyline
    assert len(lines) == 1
    assert len(pts) > 50


def test_marching_squares_linear_exact():
    x = np.array([0.0, 1.0])
    y = np.array([0.0, 1.0])
    z = np.array([[0.0, 0.0], [1.0, 1.0]])  # z = x
    lines = marching_squares(x, y, z, 0.25)
    pts = np.vstack(lines)
    assert np.allclose(pts[:, 0], 0.25)


def test_marching_squares_skips_nan_cells():
    z = np.array([[0.0, np.nan], [2.0, 2.0]])
    lines = marching_squares(np.array([0.0, 1.0]), np.array([0.0, 1.0]), z, 1.0)
    assert lines == ()


def test_alpha_monotone_in_eta_and_batch():
    # with alpha > 1, the tail index falls as the step grows and rises as
    # the batch grows (Gaussian rank-one model)
    lo_eta = solve_alpha(rank1_gauss(2, 8, 1.0), samples=200_000, seed=15)
    hi_eta = solve_alpha(rank1_gauss(2, 8, 1.5), samples=200_000, seed=16)
    assert lo_eta.status is SolveStatus.CONVERGED and lo_eta.alpha > 1
    assert hi_eta.status is SolveStatus.CONVERGED and hi_eta.alpha > 1
    unc = np.hypot(lo_eta.stderr_alpha, hi_eta.stderr_alpha)
    assert lo_eta.alpha - hi_eta.alpha > unc

    small_b = solve_alpha(rank1_gauss(2, 4, 0.75), samples=200_000, seed=17)
    large_b = solve_alpha(rank1_gauss(2, 8, 0.75), samples=200_000, seed=18)
    assert small_b.status is SolveStatus.CONVERGED and small_b.alpha > 1
    assert large_b.status is SolveStatus.CONVERGED and large_b.alpha > 1
    unc = np.hypot(small_b.stderr_alpha, large_b.stderr_alpha)
    assert large_b.alpha - small_b.alpha > unc


def test_small_root_bracketed_below_first_grid_step():
    # rare huge expansion atom pushes the root well below the coarse scan
    law = MatrixMixtureLaw((1.5 * np.eye(1), 1e8 * np.eye(1)), (0.995, 0.005))
    spec = symm(d=1, b=1, eta=1.0, h_law=law)
    solve = solve_alpha(spec, samples=10, seed=20)
    assert solve.status is SolveStatus.CONVERGED
    assert 0 < solve.alpha < 0.25
    h = lambda s: 0.995 * 0.5 ** s + 0.005 * (1e8 - 1) ** s
    assert abs(h(solve.alpha) - 1.0) <= 1e-3
