"""Command-line interface: one executable, one subcommand per operation.

Outputs are CSV (comma separator, '.' decimal, LF line endings, header row)
written to --out or stdout; the contour commands additionally emit a native
SVG. Every run with a fixed (seed, workers) pair produces byte-identical
output files. Exit codes: 0 success, 2 configuration/usage error,
3 numerical-status failure (e.g. a demanded root does not exist).
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import empirics, mc, recursion, spectral, svgfig, tailsolver, transferop
from .config import RunConfig
from .models import (ConfigurationError, DeterministicLaw, GoeLaw, ModelSpec,
                     UnsupportedOperationError, Variant, load_law_file)
from .recursion import StopRule
from .tailsolver import SolveStatus

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

INLINE_MODELS = ("rank1gauss", "rank1", "symm-goe", "symm-det-identity")


def _fmt(x) -> str:
    """Shortest round-trip decimal form; deterministic across runs."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: str | None, header: list[str], rows) -> None:
    def dump(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])

    if path is None:
        dump(sys.stdout)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            dump(fh)


def _parse_grid(text: str) -> list[float]:
    """'start:step:stop' (inclusive stop) or a comma list of values."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"grid {text!r} is not start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigurationError(f"bad grid bounds in {text!r}")
        count = int(round((stop - start) / step))
        return [start + k * step for k in range(count + 1)]
    return [float(p) for p in text.replace(",", " ").split()]


def _build_spec(args) -> ModelSpec:
    overrides = {"d": args.d, "b": args.b, "eta": args.eta}
    if getattr(args, "law_file", None):
        return load_law_file(args.law_file, overrides)
    model = args.model
    if model is None:
        raise ConfigurationError("need --model or --law-file")
    d = args.d if args.d is not None else 1
    b = args.b if args.b is not None else 1
    if args.eta is None:
        raise ConfigurationError("--eta is required")
    eta = args.eta
    if model == "rank1gauss":
        return ModelSpec(Variant.RANK1_GAUSS, d=d, b=b, eta=eta)
    if model == "rank1":
        return ModelSpec(Variant.RANK1, d=d, b=b, eta=eta)
    if model == "symm-goe":
        return ModelSpec(Variant.SYMM, d=d, b=b, eta=eta, h_law=GoeLaw(d))
    if model == "symm-det-identity":
        return ModelSpec(Variant.SYMM, d=d, b=b, eta=eta,
                         h_law=DeterministicLaw(np.eye(d)))
    raise ConfigurationError(f"unknown model {model!r}")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=INLINE_MODELS, help="built-in model family")
    p.add_argument("--law-file", help="law file defining the model (overrides --model)")
    p.add_argument("--d", type=int, help="dimension (default 1)")
    p.add_argument("--b", type=int, help="batch size (default 1)")
    p.add_argument("--eta", type=float, help="step size")


def _add_common(p: argparse.ArgumentParser, samples_default: int = 100_000) -> None:
    p.add_argument("--samples", type=int, default=samples_default)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker count (default ${mc.WORKERS_ENV_VAR} or 1)")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--dump-config", metavar="PATH",
                   help="write the effective flags as a run-config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heavytail",
        description="Simulation and heavy-tail diagnostics for affine stochastic "
                    "recursions of SGD type (A = I - xi*H).")
    parser.add_argument("--config", help="run-config file providing flag defaults")
    sub = parser.add_subparsers(dest="subcommand", required=False)

    p = sub.add_parser("simulate", help="draw truncated stationary samples R")
    _add_model_args(p)
    _add_common(p, samples_default=1000)
    p.add_argument("--n", type=int, help="run exactly n steps instead of the stop rule")
    p.add_argument("--tol-prod", type=float, default=1e-12)
    p.add_argument("--n-max", type=int, default=100_000)

    p = sub.add_parser("kcurve", help="k(s) over an s-grid")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--s-grid", default="0:0.25:10")
    p.add_argument("--method", choices=["closed", "product"], default="closed")
    p.add_argument("--n", type=int, default=40, help="product length (product method)")

    p = sub.add_parser("lyapunov", help="top Lyapunov exponent")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--method", choices=["closed", "subadditive"], default="closed")
    p.add_argument("--n", type=int, default=200)

    p = sub.add_parser("alpha", help="tail index: root of h(xi, s) = 1 in s")
    _add_model_args(p)
    _add_common(p, samples_default=200_000)
    p.add_argument("--tol-root", type=float, default=1e-3)
    p.add_argument("--s-max", type=float, default=spectral.S_MAX_DEFAULT)

    p = sub.add_parser("alphacurve", help="alpha(xi) over a xi-grid, with xi_1")
    _add_model_args(p)
    _add_common(p, samples_default=200_000)
    p.add_argument("--xi-grid", required=False)
    p.add_argument("--tol-root", type=float, default=1e-3)

    p = sub.add_parser("contour", help="h over a (param, s) grid + h=1 isoline")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--param", choices=["b", "eta"], required=False, default="b")
    p.add_argument("--param-grid", required=False)
    p.add_argument("--s-grid", default="0.25:0.25:10")
    p.add_argument("--clip", type=float, default=2.0)
    p.add_argument("--svg", help="also write the heat-grid + isoline as SVG")

    p = sub.add_parser("operator", help="discretized transfer operator (d=2)")
    _add_model_args(p)
    _add_common(p, samples_default=10_000)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--bins", type=int, default=256)

    p = sub.add_parser("tailfit", help="Hill tail-index fit on simulated |R|")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--k-fracs", default="0.005,0.01,0.02",
                   help="stability-scan fractions of the sample used as tail")

    p = sub.add_parser("angular", help="uniformity tests on exceedance angles (d=2)")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--threshold-quantile", type=float, default=0.99)
    p.add_argument("--level", type=float, default=0.01)

    p = sub.add_parser("integrability", help="negative-moment truncated-mean ladder")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--target", choices=[t.value for t in empirics.IntegrabilityTarget],
                   default="det_a")
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--caps", default="10,100,1000,10000")

    p = sub.add_parser("gausscheck", help="Gaussian-model density diagnostics")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--check", choices=["chi2", "stam", "both"], default="both")

    p = sub.add_parser("moments", help="E|R_n|^alpha over an n-grid (shared paths)")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--alpha", type=float, required=False)
    p.add_argument("--n-grid", default="50,100,200,400,800")

    p = sub.add_parser("tailbound", help="finite-iteration exceedance curve + slope")
    _add_model_args(p)
    _add_common(p)
    p.add_argument("--alpha", type=float, required=False)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--t-grid", help="explicit t values (default: data quantiles)")

    p = sub.add_parser("reproduce-fig1",
                       help="h(b, s) contour grid, d=2, eta=0.75, b=1..12")
    _add_common(p)
    p.add_argument("--svg", default="fig1.svg")

    p = sub.add_parser("reproduce-fig2",
                       help="h(eta, s) contour grid, d=2, b=5")
    _add_common(p)
    p.add_argument("--svg", default="fig2.svg")

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Inject run-config values as subparser defaults; flags still override."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    run_cfg = RunConfig.load(known.config)
    argv = [a for a in argv if a != "--config" and a != known.config]
    if not argv or argv[0].startswith("-"):
        argv = [run_cfg.subcommand] + argv
    sub_actions = [a for a in parser._actions
                   if isinstance(a, argparse._SubParsersAction)]
    subparser = sub_actions[0].choices.get(argv[0])
    if subparser is None:
        raise ConfigurationError(f"unknown subcommand {argv[0]!r} in config")
    converted = {}
    by_dest = {a.dest: a for a in subparser._actions}
    for key, raw in run_cfg.args.items():
        action = by_dest.get(key)
        if action is None:
            raise ConfigurationError(f"config key {key!r} is not a flag of {argv[0]!r}")
        converted[key] = action.type(raw) if action.type else raw
    subparser.set_defaults(**converted)
    return argv


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    skip = {"subcommand", "config", "dump_config"}
    payload = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    return RunConfig(subcommand=args.subcommand,
                     args={k: str(v) for k, v in payload.items()})


# ---------------------------------------------------------------------------
# Subcommand implementations


def _cmd_simulate(args) -> int:
    spec = _build_spec(args)
    rng = mc.substream(args.seed, 0)
    if args.n is not None:
        stop = StopRule(tol_prod=0.0, n_max=args.n)
    else:
        stop = StopRule(tol_prod=args.tol_prod, n_max=args.n_max)
    batch = recursion.sample_r_batch(spec, args.samples, rng, stop)
    header = (["sample_id", "n"] + [f"r_{i+1}" for i in range(spec.d)]
              + ["abs_r", "log_norm_pi"])
    abs_r = batch.abs_r
    rows = ([i, int(batch.n_steps[i])] + [batch.r[i, j] for j in range(spec.d)]
            + [abs_r[i], batch.log_pi_final[i]]
            for i in range(args.samples))
    _write_csv(args.out, header, rows)
    n_nc = int((batch.status == recursion.StopStatus.NON_CONTRACTION.value).sum())
    if n_nc:
        print(f"warning: {n_nc}/{args.samples} trajectories did not contract "
              "below 1 (Lyapunov exponent may be nonnegative)", file=sys.stderr)
    return EXIT_OK


def _cmd_kcurve(args) -> int:
    spec = _build_spec(args)
    s_grid = _parse_grid(args.s_grid)
    method = (spectral.CurveMethod.CLOSED_FORM if args.method == "closed"
              else spectral.CurveMethod.PRODUCT_LIMIT)
    curve = spectral.spectral_curve(spec, s_grid, args.samples, args.seed,
                                    method=method, n=args.n, workers=args.workers)
    rows = [[s, est.mean, est.stderr, curve.method.value, est.n]
            for s, est in zip(curve.s_grid, curve.values)]
    _write_csv(args.out, ["s", "estimate", "stderr", "method", "n_used"], rows)
    return EXIT_OK


def _cmd_lyapunov(args) -> int:
    spec = _build_spec(args)
    method = (spectral.LyapunovMethod.CLOSED_FORM if args.method == "closed"
              else spectral.LyapunovMethod.SUBADDITIVE_MC)
    est = spectral.lyapunov(spec, method=method, n=args.n, samples=args.samples,
                            seed=args.seed, workers=args.workers)
    print(f"gamma = {est.gamma:.6g} +- {est.stderr:.2g} ({est.method.value})")
    _write_csv(args.out, ["gamma", "stderr", "method", "n_used", "skipped"],
               [[est.gamma, est.stderr, est.method.value, est.n, est.skipped]])
    return EXIT_OK


def _cmd_alpha(args) -> int:
    spec = _build_spec(args)
    solve = tailsolver.solve_alpha(spec, tol_root=args.tol_root,
                                   samples=args.samples, seed=args.seed,
                                   s_max=args.s_max, workers=args.workers)
    print(f"alpha = {solve.alpha:.6g} +- {solve.stderr_alpha:.2g} "
          f"(xi = {solve.xi:.6g}, status = {solve.status.value})")
    _write_csv(args.out,
               ["xi", "alpha", "residual", "bracket_lo", "bracket_hi",
                "stderr_alpha", "status", "gamma", "gamma_stderr"],
               [[solve.xi, solve.alpha, solve.residual, solve.bracket[0],
                 solve.bracket[1], solve.stderr_alpha, solve.status.value,
                 solve.gamma, solve.gamma_stderr]])
    return EXIT_OK if solve.status is SolveStatus.CONVERGED else EXIT_NUMERICAL


def _cmd_alphacurve(args) -> int:
    spec = _build_spec(args)
    if not args.xi_grid:
        raise ConfigurationError("--xi-grid is required")
    xi_grid = _parse_grid(args.xi_grid)
    try:
        curve = tailsolver.alpha_curve(spec, xi_grid, tol_root=args.tol_root,
                                       samples=args.samples, seed=args.seed,
                                       workers=args.workers)
    except tailsolver.RangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    rows = [[s.xi, s.alpha, s.stderr_alpha, s.residual, s.status.value]
            for s in curve.solves]
    _write_csv(args.out, ["xi", "alpha", "stderr_alpha", "residual", "status"], rows)
    decreasing = all(ok for _, _, ok in curve.monotonicity_report) \
        if curve.monotonicity_report else True
    print(f"xi1 = {curve.xi1:.6g}; strictly decreasing beyond uncertainty: "
          f"{decreasing}")
    return EXIT_OK


def _cmd_contour(args, param=None, param_grid=None, spec=None, svg_path=None) -> int:
    spec = spec if spec is not None else _build_spec(args)
    param = param or args.param
    if param_grid is None:
        if not args.param_grid:
            raise ConfigurationError("--param-grid is required")
        param_grid = _parse_grid(args.param_grid)
    s_grid = _parse_grid(args.s_grid) if hasattr(args, "s_grid") else \
        _parse_grid("0.25:0.25:10")
    clip = getattr(args, "clip", 2.0)
    grid = tailsolver.contour_grid(spec, param, param_grid, s_grid,
                                   samples=args.samples, seed=args.seed,
                                   workers=args.workers, clip_level=clip)
    rows = []
    for i, p in enumerate(grid.param_grid):
        for j, s in enumerate(grid.s_grid):
            rows.append([p, s, grid.h[i, j], grid.h_clipped[i, j]])
    _write_csv(args.out, [param, "s", "h", "h_clipped"], rows)
    svg_path = svg_path or getattr(args, "svg", None)
    if svg_path:
        svg = svgfig.render_heatmap_svg(
            grid.param_grid, grid.s_grid, grid.h_clipped, grid.isoline,
            param_label=param, s_label="s",
            title=f"h({param}, s), clipped at {clip:g}; black: h = 1")
        with open(svg_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(svg)
    return EXIT_OK


def _cmd_operator(args) -> int:
    spec = _build_spec(args)
    built = transferop.build_operator(spec, args.s, args.bins, args.samples,
                                      seed=args.seed, workers=args.workers)
    spectrum = transferop.power_iterate(built)
    print(f"leading eigenvalue = {spectrum.leading_eigenvalue:.6g} "
          f"(s = {args.s:g}, bins = {args.bins})")
    centers = built.bin_centers
    rows = [[centers[i], spectrum.eigenfunction[i], spectrum.eigenmeasure[i]]
            for i in range(args.bins)]
    _write_csv(args.out, ["bin_angle", "eigenfunction", "eigenmeasure"], rows)
    return EXIT_OK


def _cmd_tailfit(args) -> int:
    spec = _build_spec(args)
    rng = mc.substream(args.seed, 0)
    batch = recursion.sample_r_batch(spec, args.samples, rng)
    abs_r = batch.abs_r
    fracs = [float(f) for f in args.k_fracs.replace(",", " ").split()]
    rows = []
    mid = None
    for f in fracs:
        fit = empirics.hill_estimate(abs_r, max(int(len(abs_r) * f), 2))
        rows.append([f, fit.k_order, fit.alpha_hat, fit.ci[0], fit.ci[1],
                     fit.amplitude])
        if mid is None or abs(f - 0.01) < abs(mid[0] - 0.01):
            mid = (f, fit)
    _write_csv(args.out,
               ["k_frac", "k_order", "alpha_hat", "ci_lo", "ci_hi", "amplitude"],
               rows)
    print(f"alpha_hat = {mid[1].alpha_hat:.4g} "
          f"(k = {mid[1].k_order}, 95% CI [{mid[1].ci[0]:.4g}, {mid[1].ci[1]:.4g}])")
    return EXIT_OK


def _cmd_angular(args) -> int:
    spec = _build_spec(args)
    if spec.d != 2:
        raise ConfigurationError("the angular test is specialized to d = 2")
    rng = mc.substream(args.seed, 0)
    batch = recursion.sample_r_batch(spec, args.samples, rng)
    rep = empirics.angular_exceedance_test(batch.r, args.threshold_quantile,
                                           level=args.level)
    _write_csv(args.out,
               ["n_exceedances", "threshold", "ks_statistic", "ks_pvalue",
                "resultant_statistic", "resultant_pvalue", "level", "inconclusive"],
               [[rep.n_exceedances, rep.threshold, rep.ks_statistic, rep.ks_pvalue,
                 rep.resultant_statistic, rep.resultant_pvalue, rep.level,
                 rep.inconclusive]])
    verdict = ("INCONCLUSIVE" if rep.inconclusive
               else "PASS" if rep.passed else "FAIL")
    print(f"angular uniformity: {verdict} (KS p = {rep.ks_pvalue:.3g}, "
          f"resultant p = {rep.resultant_pvalue:.3g}, "
          f"{rep.n_exceedances} exceedances)")
    return EXIT_OK


def _cmd_integrability(args) -> int:
    spec = _build_spec(args)
    caps = [float(c) for c in args.caps.replace(",", " ").split()]
    rep = empirics.integrability_probe(spec, args.target, args.delta,
                                       args.samples, cap_grid=caps,
                                       seed=args.seed, workers=args.workers)
    rows = [[cap, mean] for cap, mean in zip(rep.cap_grid, rep.truncated_means)]
    _write_csv(args.out, ["cap", "truncated_mean"], rows)
    print(f"{rep.target.value} ladder (delta = {rep.delta:g}): "
          f"stabilized = {rep.stabilized}, final = {rep.final_value:.6g} "
          f"+- {rep.stderr_at_max_cap:.2g}")
    return EXIT_OK


def _cmd_gausscheck(args) -> int:
    spec = _build_spec(args)
    rows = []
    summary = []
    if args.check in ("chi2", "both"):
        rep = empirics.chi2_diagonal_check(spec, args.samples, seed=args.seed,
                                           workers=args.workers)
        for ell in range(spec.d):
            rows.append(["chi2_diagonal", f"H_{ell+1}{ell+1}", rep.ks_pvalues[ell],
                         rep.means[ell], rep.variances[ell]])
        summary.append(f"chi2 diagonals: min KS p = {min(rep.ks_pvalues):.3g}")
    if args.check in ("stam", "both"):
        rep = empirics.stam_p2_check(spec.b, args.samples, seed=args.seed + 1,
                                     workers=args.workers)
        rows.append(["inner_product_gof", f"b={spec.b}", rep.chi2_pvalue,
                     rep.mean, rep.variance])
        summary.append(f"inner-product GOF p = {rep.chi2_pvalue:.3g} "
                       f"(var {rep.variance:.4g} vs {rep.expected_variance:.4g})")
    _write_csv(args.out, ["check", "component", "pvalue", "mean", "variance"], rows)
    print("; ".join(summary))
    return EXIT_OK


def _cmd_moments(args) -> int:
    spec = _build_spec(args)
    if args.alpha is None:
        raise ConfigurationError("--alpha is required (typically from the alpha solver)")
    n_grid = [int(n) for n in args.n_grid.replace(",", " ").split()]
    curve = recursion.moment_growth_curve(spec, args.alpha, n_grid,
                                          args.samples, args.seed, args.workers)
    rows = [[n, est.mean, est.stderr, est.n] for n, est in curve]
    _write_csv(args.out, ["n", "estimate", "stderr", "samples_used"], rows)
    return EXIT_OK


def _cmd_tailbound(args) -> int:
    spec = _build_spec(args)
    if args.alpha is None:
        raise ConfigurationError("--alpha is required")
    if args.t_grid:
        t_grid = _parse_grid(args.t_grid)
    else:
        # pilot pass to place the grid over the largest usable decade
        pilot = mc.parallel_map(
            lambda rng, m: recursion.partial_sum_norms(spec, [args.n], m, rng)[:, 0],
            min(args.samples, 100_000), args.seed + 1, args.workers)
        t_hi = float(np.quantile(pilot, 1 - 50 / len(pilot)))
        t_grid = list(np.geomspace(t_hi / 10, t_hi, 12))
    rep = recursion.finite_iteration_tail(spec, args.alpha, args.epsilon, args.n,
                                          t_grid, args.samples, args.seed,
                                          args.workers)
    rows = [[t, p, c] for t, p, c in zip(rep.t_grid, rep.exceedance, rep.counts)]
    _write_csv(args.out, ["t", "exceedance", "count"], rows)
    print(f"top-decade log-log slope = {rep.slope:.4g} "
          f"(bound exponent {-(args.alpha + args.epsilon):g}; "
          f"widened_uncertainty = {rep.widened_uncertainty})")
    return EXIT_OK


def _cmd_fig(args, param: str, param_grid, spec: ModelSpec) -> int:
    if args.out is None:
        args.out = f"fig{'1' if param == 'b' else '2'}.csv"
    ns = argparse.Namespace(**vars(args))
    ns.s_grid = "0.25:0.25:10"
    ns.clip = 2.0
    return _cmd_contour(ns, param=param, param_grid=param_grid, spec=spec,
                        svg_path=args.svg)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    args = parser.parse_args(argv)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    if getattr(args, "dump_config", None):
        with open(args.dump_config, "w", encoding="utf-8") as fh:
            fh.write(run_config_from_args(args).to_text())
    handlers = {
        "simulate": _cmd_simulate,
        "kcurve": _cmd_kcurve,
        "lyapunov": _cmd_lyapunov,
        "alpha": _cmd_alpha,
        "alphacurve": _cmd_alphacurve,
        "contour": _cmd_contour,
        "operator": _cmd_operator,
        "tailfit": _cmd_tailfit,
        "angular": _cmd_angular,
        "integrability": _cmd_integrability,
        "gausscheck": _cmd_gausscheck,
        "moments": _cmd_moments,
        "tailbound": _cmd_tailbound,
    }
    try:
        if args.subcommand == "reproduce-fig1":
            spec = ModelSpec(Variant.RANK1_GAUSS, d=2, b=1, eta=0.75)
            return _cmd_fig(args, "b", list(range(1, 13)), spec)
        if args.subcommand == "reproduce-fig2":
            spec = ModelSpec(Variant.RANK1_GAUSS, d=2, b=5, eta=0.75)
            return _cmd_fig(args, "eta", _parse_grid("0.05:0.05:1.5"), spec)
        return handlers[args.subcommand](args)
    except empirics.EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigurationError, UnsupportedOperationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
