"""``wishart-rates`` command-line interface.

Exit codes: 0 success, 2 invalid input or config, 3 numerical failure,
4 I/O failure.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import pricing, riccati, shapes, sim
from .config import (
    GridSpec,
    RunConfig,
    load_config,
    write_curve_csv,
    write_path_csv,
    write_summary_csv,
    write_thresholds_csv,
)
from .errors import (
    ConfigParseError,
    HypothesisViolation,
    InvalidInput,
    NumericalFailure,
    OutputError,
    StabilityViolation,
    ValidationError,
    WishartRatesError,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

DEFAULT_ETAS = tuple(round(0.01 * k, 2) for k in range(1, 11))

logger = logging.getLogger("wishart_rates")


def _exit_code(exc):
    if isinstance(exc, OutputError):
        return EXIT_IO
    if isinstance(exc, (NumericalFailure, StabilityViolation)):
        return EXIT_NUMERICAL
    if isinstance(exc, (InvalidInput, ValidationError, ConfigParseError, HypothesisViolation)):
        return EXIT_VALIDATION
    return EXIT_NUMERICAL


def _fmt_matrix(A):
    return np.array2string(np.asarray(A), precision=6, separator=", ")


def _sim_config(args, horizon):
    return sim.SimConfig(
        n_paths=args.paths,
        n_steps_per_year=args.steps_per_year,
        horizon=horizon,
        seed=args.seed,
        scheme=args.scheme,
    )


def cmd_price(cfg, args, out):
    p = cfg.model
    price = pricing.bond_price(p, args.tau)
    print(f"tau: {args.tau:.12g}", file=out)
    print(f"bond_price: {price:.12g}", file=out)
    if args.tau > 0:
        print(f"yield: {pricing.zero_yield(p, args.tau):.12g}", file=out)
    if args.mc:
        est = sim.mc_bond_price(p, args.tau, _sim_config(args, args.tau))
        print(f"mc_price: {est.mean:.12g}", file=out)
        print(f"mc_std_error: {est.std_error:.6g}", file=out)
        print(f"mc_paths: {est.n_paths}", file=out)
    return EXIT_OK


def cmd_curve(cfg, args, out):
    curve = pricing.yield_curve(cfg.model, cfg.grid.taus())
    path = write_curve_csv(curve, cfg.output_dir / "curve.csv")
    print(f"short_end: {curve.short_end:.12g}", file=out)
    print(f"long_end: {curve.long_end:.12g}", file=out)
    print(f"wrote {path}", file=out)
    return EXIT_OK


def cmd_classify(cfg, args, out):
    p = cfg.model
    result = shapes.classify(p)
    th = result.thresholds
    empirical = shapes.classify_empirical(pricing.yield_curve(p, cfg.grid.taus()))
    print(f"shape: {result.shape}", file=out)
    print(f"empirical_shape: {empirical.shape}", file=out)
    print(f"X vs b_norm: {result.vs_b_norm}", file=out)
    print(f"X vs b_inv: {result.vs_b_inv}", file=out)
    for name in ("b_norm", "b_inv"):
        mat = getattr(th, name)
        print(f"{name}: {_fmt_matrix(mat)}", file=out)
        print(f"eig({name}): {_fmt_matrix(np.linalg.eigvalsh(mat))}", file=out)
        print(f"eig({name} - X): {_fmt_matrix(np.linalg.eigvalsh(mat - p.X))}", file=out)
    path = write_thresholds_csv(th, cfg.output_dir / "thresholds.csv")
    print(f"wrote {path}", file=out)
    return EXIT_OK


def cmd_taustar(cfg, args, out):
    sol = riccati.integrate_riccati(cfg.model, cfg.grid.tau_max, args.step)
    tau_star = shapes.find_tau_star(cfg.model, sol)
    print("tau_star: none" if tau_star is None else f"tau_star: {tau_star:.12g}", file=out)
    return EXIT_OK


def perturb_family(p, target, entry, etas, taus):
    """Curves for single-entry perturbations ``target[i, j] += eta``.

    Returns ``(base_curve, records)``; parameter sets that fail validation
    are reported with status ``skipped: ...`` instead of a curve.
    """
    i, j = entry
    base_mat = getattr(p, target)
    if not (0 <= i < p.d and 0 <= j < p.d):
        raise InvalidInput(f"entry ({i}, {j}) outside a {p.d}x{p.d} matrix")
    base = pricing.yield_curve(p, taus)
    records = []
    prev = base
    for eta in etas:
        mat = np.array(base_mat)
        mat[i, j] += eta
        rec = {"eta": float(eta)}
        try:
            curve = pricing.yield_curve(p.replace(**{target: mat}), taus)
        except ValidationError as exc:
            rec["status"] = f"skipped: {exc.assumption}"
            logger.warning("eta=%g skipped: %s", eta, exc)
            records.append(rec)
            continue
        rec.update(
            status="ok",
            curve=curve,
            empirical_class=str(shapes.classify_empirical(curve)),
            short_end=curve.short_end,
            long_end=curve.long_end,
            min_shift_vs_base=float(np.min(curve.yields - base.yields)),
            min_shift_vs_prev=float(np.min(curve.yields - prev.yields)),
        )
        prev = curve
        records.append(rec)
    return base, records


def cmd_perturb(cfg, args, out):
    target = args.target
    i, j = args.entry
    _, records = perturb_family(cfg.model, target, (i, j), args.etas, cfg.grid.taus())
    for rec in records:
        if rec["status"] == "ok":
            name = f"perturb_{target}{i}{j}_eta{rec['eta']:.4g}.csv"
            write_curve_csv(rec["curve"], cfg.output_dir / name)
        print(
            f"eta={rec['eta']:.4g} {rec['status']} {rec.get('empirical_class', '')}".rstrip(),
            file=out,
        )
    path = write_summary_csv(records, cfg.output_dir / "summary.csv")
    print(f"wrote {path}", file=out)
    return EXIT_OK


def cmd_simulate(cfg, args, out):
    p = cfg.model
    sim_cfg = _sim_config(args, args.horizon)
    result = sim.simulate_paths(p, sim_cfg, n_pairs=1, seed_offset=args.path_index)
    states = result.paths[:, 0]
    rates = p.a + np.einsum("ij,tji->t", p.B, states)
    path = write_path_csv(result.times, states, rates, cfg.output_dir / "path.csv")
    print(f"steps: {len(result.times) - 1}", file=out)
    print(f"projection_fraction: {result.projection_fraction:.6g}", file=out)
    print(f"wrote {path}", file=out)
    return EXIT_OK


COMMANDS = {
    "price": cmd_price,
    "curve": cmd_curve,
    "classify": cmd_classify,
    "taustar": cmd_taustar,
    "perturb": cmd_perturb,
    "simulate": cmd_simulate,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="model JSON file")
    common.add_argument("--relaxed-gindikin", action="store_true", help="accept alpha > d-1")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--grid-min", type=float, default=pricing.DEFAULT_GRID_MIN)
    common.add_argument("--grid-max", type=float, default=pricing.DEFAULT_GRID_MAX)
    common.add_argument("--grid-points", type=int, default=pricing.DEFAULT_GRID_POINTS)
    common.add_argument("--paths", type=int, default=100_000)
    common.add_argument("--steps-per-year", type=int, default=500)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--scheme", choices=[s.value for s in sim.Scheme], default=sim.Scheme.EULER_PROJECTED.value)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="wishart-rates", description="Wishart short-rate model toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("price", parents=[common], help="zero-coupon bond price")
    sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--mc", action="store_true", help="add a Monte Carlo estimate")

    sub.add_parser("curve", parents=[common], help="write curve.csv")
    sub.add_parser("classify", parents=[common], help="threshold-based shape classification")

    sp = sub.add_parser("taustar", parents=[common], help="inflection maturity of tau * Y(tau)")
    sp.add_argument("--step", type=float, default=riccati.DEFAULT_STEP, help="RK4 step in years")

    sp = sub.add_parser("perturb", parents=[common], help="single-entry perturbation study")
    sp.add_argument("--target", choices=["M", "Q"], required=True)
    sp.add_argument("--entry", type=int, nargs=2, required=True, metavar=("I", "J"))
    sp.add_argument("--etas", type=float, nargs="+", default=list(DEFAULT_ETAS))

    sp = sub.add_parser("simulate", parents=[common], help="write one simulated state path")
    sp.add_argument("--horizon", type=float, default=1.0)
    sp.add_argument("--path-index", type=int, default=0)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, relaxed_gindikin=args.relaxed_gindikin)
        cfg = RunConfig(
            model=cfg.model,
            grid=GridSpec(args.grid_min, args.grid_max, args.grid_points),
            output_dir=args.out,
        )
        return COMMANDS[args.command](cfg, args, out)
    except WishartRatesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
