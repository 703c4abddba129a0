"""Command-line interface: glue and validation only, no numerics of its own.

Subcommands: train, transcode, diagnose-range, coverage, fit-ols, simulate,
surfaces, compare-coeffs.  Exit codes: 0 success, 2 validation error,
1 runtime failure.  Dataset CSVs carry a header row; every column but the
last is a feature, the last is the response.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import activations, nn, simlab, transcode
from .nn import TrainConfig
from .poly import coefficient_distance, load_polynomial, ols_fit, save_polynomial


def read_dataset(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a header CSV into features (all but last column) and response."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if len(header) < 2:
        raise ValueError(f"{path}: need at least one feature column plus a response column")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ValueError(f"{path}: line {i}: expected {len(header)} fields, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError:
            raise ValueError(f"{path}: line {i}: non-numeric value") from None
    arr = np.array(rows)
    return arr[:, :-1], arr[:, -1]


def _cmd_train(args) -> int:
    X, y = read_dataset(args.data)
    if args.scaling != "none":
        spec = simlab.fit_scaling(X, y, args.scaling)
        X, y = spec.apply_x(X), spec.apply_y(y)
        if args.scaling_out:
            simlab.save_scaling(spec, args.scaling_out)
    elif args.scaling_out:
        raise ValueError("--scaling-out requires a scaling mode other than 'none'")
    cfg = TrainConfig(max_epochs=args.max_epochs, grad_tol=args.grad_tol, seed=args.seed)
    wts, trace = nn.train_rprop(X, y, args.hidden, args.activation, cfg)
    nn.save_weights(wts, args.out)
    print(
        f"trained {args.activation} network (h1={args.hidden}) in {trace.epochs} epochs, "
        f"final loss {trace.losses[-1]:.6g}, converged={trace.converged}"
    )
    return 0


def _cmd_transcode(args) -> int:
    wts = nn.load_weights(args.weights)
    result = transcode.nn_to_poly(wts, args.order)
    poly = result.poly
    if args.scaling:
        poly = transcode.rescale_to_original(result, simlab.load_scaling(args.scaling))
    save_polynomial(poly, args.out)
    print(f"wrote {args.out} ({len(poly.canonical())} nonzero terms, degree {poly.degree})")
    return 0


def _cmd_diagnose_range(args) -> int:
    r = activations.valid_range(args.activation, args.order, args.epsilon)
    lo_note = " (saturated)" if r.saturated_lo else ""
    hi_note = " (saturated)" if r.saturated_hi else ""
    print(f"lo = {r.lo:.9g}{lo_note}")
    print(f"hi = {r.hi:.9g}{hi_note}")
    return 0


def _cmd_coverage(args) -> int:
    wts = nn.load_weights(args.weights)
    X, _ = read_dataset(args.data)
    report = transcode.coverage(wts, X, args.order, args.epsilon)
    if args.json:
        print(
            json.dumps(
                {
                    "per_unit": list(report.per_unit),
                    "overall": report.overall,
                    "order": report.order,
                    "epsilon": report.epsilon,
                    "range": [report.valid_range.lo, report.valid_range.hi],
                }
            )
        )
    else:
        for j, frac in enumerate(report.per_unit, start=1):
            print(f"unit {j}: {frac:.4f}")
        print(f"overall: {report.overall:.4f}")
    return 0


def _cmd_fit_ols(args) -> int:
    X, y = read_dataset(args.data)
    poly, report = ols_fit(X, y, args.degree)
    save_polynomial(poly, args.out)
    print(f"wrote {args.out} (rss={report.rss:.6g}, condition={report.condition:.6g})")
    return 0


def _cmd_compare_coeffs(args) -> int:
    a = load_polynomial(args.first)
    b = load_polynomial(args.second)
    dist = coefficient_distance(a, b)
    if args.json:
        print(
            json.dumps(
                {
                    "per_term": {" ".join(map(str, m)): d for m, d in dist.per_term.items()},
                    "max_abs": dist.max_abs,
                    "l2": dist.l2,
                }
            )
        )
    else:
        for m, d in dist.per_term.items():
            print(f"{m}: {d:.6g}")
        print(f"max |diff| = {dist.max_abs:.6g}")
        print(f"l2 = {dist.l2:.6g}")
    return 0


def _cmd_simulate(args) -> int:
    cfg = simlab.load_simulate_config(args.config)
    result = simlab.run_batch(
        cfg.data,
        cfg.grid,
        reps=args.reps,
        base_seed=args.seed,
        train=cfg.train,
        train_fraction=cfg.train_fraction,
        coverage_epsilon=cfg.coverage_epsilon,
        fixed_data=args.fixed_data,
    )
    os.makedirs(args.out, exist_ok=True)
    records_path = os.path.join(args.out, "records.csv")
    summary_path = os.path.join(args.out, "summary.csv")
    with open(records_path, "w") as fh:
        fh.write(simlab.records_to_csv(result.records))
    with open(summary_path, "w") as fh:
        fh.write(simlab.summary_to_csv(result.records))
    for f in result.failures:
        print(
            f"warning: run failed ({f.activation}, {f.scaling}, h1={f.h1}, rep={f.rep}): {f.message}",
            file=sys.stderr,
        )
    print(f"wrote {records_path} ({len(result.records)} records) and {summary_path}")
    return 0


def _cmd_surfaces(args) -> int:
    cfg = simlab.load_surface_config(args.config)
    study = simlab.surface_study(cfg)
    os.makedirs(args.out, exist_ok=True)
    for name, grid in study.grids.items():
        with open(os.path.join(args.out, f"surface_{name}.csv"), "w") as fh:
            fh.write(simlab.grid_to_csv(grid))
    first = study.runs[0]
    X = np.vstack([first.X_train, first.X_test])
    y = np.concatenate([first.y_train, first.y_test])
    with open(os.path.join(args.out, "points.csv"), "w") as fh:
        fh.write("x1,x2,y\n")
        for row, yy in zip(X, y):
            fh.write(
                f"{format(float(row[0]), '.17g')},{format(float(row[1]), '.17g')},"
                f"{format(float(yy), '.17g')}\n"
            )
    save_polynomial(study.generating_poly, os.path.join(args.out, "poly_generating.json"))
    save_polynomial(study.ols_poly, os.path.join(args.out, "poly_ols.json"))
    for s, pl in study.nn_polys.items():
        save_polynomial(pl, os.path.join(args.out, f"poly_nn_seed{s}.json"))
    print(f"wrote {len(study.grids)} surface grids and {2 + len(study.nn_polys)} polynomials to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nnpoly",
        description="Convert single-hidden-layer network weights into explicit polynomials "
        "and reproduce the accompanying simulation pipeline.",
    )
    parser.add_argument(
        "--json-errors", action="store_true", help="report errors as JSON on stderr"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a network on a dataset CSV")
    p.add_argument("--data", required=True, help="dataset CSV (features..., response)")
    p.add_argument("--hidden", type=int, required=True, help="hidden units")
    p.add_argument("--activation", choices=activations.ACTIVATIONS, default="softplus")
    p.add_argument("--scaling", choices=simlab.SCALING_MODES, default="none")
    p.add_argument("--scaling-out", help="write the fitted scaling spec to this JSON file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-epochs", type=int, default=10000)
    p.add_argument("--grad-tol", type=float, default=1e-5)
    p.add_argument("--out", required=True, help="output weights JSON")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("transcode", help="convert network weights into a polynomial")
    p.add_argument("--weights", required=True)
    p.add_argument("--order", type=int, required=True, help="series truncation order")
    p.add_argument("--scaling", help="scaling spec JSON; output in original units")
    p.add_argument("--out", required=True, help="output polynomial JSON")
    p.set_defaults(func=_cmd_transcode)

    p = sub.add_parser("diagnose-range", help="acceptable approximation range of a truncation")
    p.add_argument("--activation", choices=activations.ACTIVATIONS, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.set_defaults(func=_cmd_diagnose_range)

    p = sub.add_parser("coverage", help="share of synaptic potentials inside the valid range")
    p.add_argument("--weights", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("fit-ols", help="least-squares polynomial baseline fit")
    p.add_argument("--data", required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit_ols)

    p = sub.add_parser("compare-coeffs", help="per-term distance between two polynomials")
    p.add_argument("--first", required=True)
    p.add_argument("--second", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_compare_coeffs)

    p = sub.add_parser("simulate", help="run a batch sweep from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--reps", type=int, default=50, help="repetitions per grid cell")
    p.add_argument("--seed", type=int, default=0, help="base seed for the batch")
    p.add_argument(
        "--fixed-data", action="store_true", help="share one dataset across repetitions"
    )
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("surfaces", help="surface grids for fixed-data comparison studies")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_surfaces)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        _emit_error(args, str(e), 2)
        return 2
    except RuntimeError as e:
        _emit_error(args, str(e), 1)
        return 1


def _emit_error(args, message: str, code: int) -> None:
    if getattr(args, "json_errors", False):
        print(json.dumps({"error": message, "exit_code": code}), file=sys.stderr)
    else:
        print(f"error: {message}", file=sys.stderr)


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
