"""Command-line interface: ``mhhelix <subcommand> ...``.

Exit status is 0 on success, 1 on input errors and 2 on numerical or
convergence failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .axisfit import estimate_axis_mh, optls_fit
from .errors import (BenchmarkError, ConvergenceError, DomainError, InitializationError,
                     InputError, ParseError)
from .fileio import (FitReport, atomic_write, parse_pdb_ca, parse_points_csv,
                     write_points_csv, write_report)
from .geometry import HelixParams, simulate_helix
from .mh2d import MHCircleParams, fit_circle, fit_ellipse
from .mvmh import mvmh_fit
from .simlab import ALPHA_TURN, load_configs, rows_to_csv, rows_to_json, run_benchmark

log = logging.getLogger("mhhelix")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class _InputProblem(Exception):
    pass


def _vector(text, size=3):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected {size} comma-separated numbers, got {text!r}")
    if len(vals) != size:
        raise argparse.ArgumentTypeError(f"expected {size} comma-separated numbers, got {text!r}")
    return np.array(vals)


def _direction(text):
    v = _vector(text)
    norm = float(np.linalg.norm(v))
    if not norm > 0:
        raise argparse.ArgumentTypeError(f"direction {text!r} has zero length")
    return v / norm


def _residues(text):
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected FIRST:LAST, got {text!r}")


def _report_format(path, explicit):
    if explicit:
        return explicit
    return "csv" if str(path).lower().endswith(".csv") else "json"


def cmd_simulate(args):
    params = HelixParams.with_axis(args.r, args.c, args.beta, axis=args.axis, shift=args.shift)
    cloud = simulate_helix(params, args.n, args.sigma2, args.seed)
    write_points_csv(args.out, cloud)
    return EXIT_OK


def cmd_fit_circle(args):
    y = parse_points_csv(args.input, dim=2)
    t = time.perf_counter()
    fit = fit_ellipse(y) if args.ellipse else fit_circle(y)
    elapsed = time.perf_counter() - t
    p = fit.params
    if isinstance(p, MHCircleParams):
        inner = {"a": list(p.a), "rho": p.rho, "kappa": p.kappa}
    else:
        inner = {"a": list(p.a), "Sigma": p.Sigma.tolist(), "kappa": p.kappa}
    report = FitReport(
        input={"path": str(args.input), "n": int(y.shape[0]), "source": "csv2d"},
        estimator="mh-ellipse" if args.ellipse else "mh-circle",
        axis=[0.0, 0.0, 1.0], mll=fit.mll, inner=inner, timing=elapsed, version=__version__,
        config={"ellipse": bool(args.ellipse)}, converged=bool(fit.converged))
    write_report(report, args.report, _report_format(args.report, args.format))
    return EXIT_OK if fit.converged else EXIT_NUMERIC


def _load_cloud(args):
    if args.pdb:
        cloud = parse_pdb_ca(args.input, chain=args.chain, residue_range=args.residues)
        return cloud, "pdb"
    return parse_points_csv(args.input), "csv"


def fit_axis(cloud, estimator="mh", init=None, beta=ALPHA_TURN):
    """Run one axis fit and return ``(FitReport fields, converged)`` pieces."""
    if estimator == "mh":
        fit = estimate_axis_mh(cloud, w_init=init, beta=beta)
        p = fit.inner_fit.params
        fields = dict(axis=fit.w.tolist(), p=fit.p.tolist(), mll=fit.mll,
                      inner={"a": list(p.a), "rho": p.rho, "kappa": p.kappa,
                             "w_init": fit.w_init.tolist()})
        return fields, bool(fit.converged)
    if estimator == "optls":
        fit = optls_fit(cloud, beta, w_init=None if init is None else init)
        hp = fit.params
        fields = dict(axis=hp.w.tolist(), rss=fit.rss,
                      inner={"r": hp.r, "c": hp.c, "pitch": hp.pitch, "t0": hp.t0,
                             "b": hp.b.tolist()})
        return fields, bool(fit.converged)
    raise InputError(f"unknown estimator {estimator!r}")


def cmd_fit_axis(args):
    cloud, source = _load_cloud(args)
    init = args.init
    if init is not None and init not in ("pca", "optls"):
        try:
            init = _direction(init)
        except argparse.ArgumentTypeError as exc:
            raise InputError(f"--init: {exc}") from None
    t = time.perf_counter()
    fields, converged = fit_axis(cloud, args.estimator, init, args.beta)
    elapsed = time.perf_counter() - t
    report = FitReport(
        input={"path": str(args.input), "n": len(cloud), "source": source},
        estimator=args.estimator, timing=elapsed, version=__version__,
        config={"init": args.init, "beta": args.beta, "chain": args.chain,
                "residues": list(args.residues) if args.residues else None},
        converged=converged, **fields)
    write_report(report, args.report, _report_format(args.report, args.format))
    return EXIT_OK if converged else EXIT_NUMERIC


def cmd_fit_ellipsoid(args):
    cloud = parse_points_csv(args.input)
    t = time.perf_counter()
    fit = mvmh_fit(cloud.points, tie_smallest_two=args.tie_smallest_two)
    elapsed = time.perf_counter() - t
    p = fit.params
    evals, evecs = np.linalg.eigh(p.Sigma)
    report = FitReport(
        input={"path": str(args.input), "n": len(cloud), "source": "csv"},
        estimator="mvmh", axis=evecs[:, -1].tolist(), mll=fit.mll,
        inner={"mu": p.mu.tolist(), "Sigma": p.Sigma.tolist(), "kappa": p.kappa,
               "eigenvalues": evals.tolist()},
        timing=elapsed, version=__version__,
        config={"tie_smallest_two": bool(args.tie_smallest_two)}, converged=bool(fit.converged))
    write_report(report, args.report, _report_format(args.report, args.format))
    return EXIT_OK if fit.converged else EXIT_NUMERIC


def cmd_bench(args):
    try:
        cfg = json.loads(Path(args.config).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.config}: invalid JSON ({exc})") from None
    configs = load_configs(cfg)
    rows = []
    for config in configs:
        t = time.perf_counter()
        row = run_benchmark(config, workers=args.workers)
        log.info("%s: %s (%.1fs)", config.label or "config",
                 ", ".join(f"{k}={v:.3g}" for k, v in row.mse_per_estimator.items()),
                 time.perf_counter() - t)
        rows.append(row)
    atomic_write(args.out, rows_to_csv(rows))
    if args.detail:
        atomic_write(args.detail, rows_to_json(rows) + "\n")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="mhhelix", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a noisy helix to CSV")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--c", type=float, required=True)
    s.add_argument("--beta", type=float, default=ALPHA_TURN)
    s.add_argument("--sigma2", type=float, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--axis", type=_direction, default=np.array([0.0, 0.0, 1.0]))
    s.add_argument("--shift", type=_vector, default=np.zeros(3))
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fit-circle", help="fit the planar model to x,y data")
    s.add_argument("--input", required=True)
    s.add_argument("--ellipse", action="store_true")
    s.add_argument("--report", required=True)
    s.add_argument("--format", choices=["json", "csv"])
    s.set_defaults(func=cmd_fit_circle)

    s = sub.add_parser("fit-axis", help="estimate a helix axis")
    s.add_argument("--input", required=True)
    s.add_argument("--pdb", action="store_true", help="input is a PDB file (C-alpha atoms)")
    s.add_argument("--chain")
    s.add_argument("--residues", type=_residues)
    s.add_argument("--init", help="pca, optls or x,y,z (default: best of the principal axes)")
    s.add_argument("--estimator", choices=["mh", "optls"], default="mh")
    s.add_argument("--beta", type=float, default=ALPHA_TURN,
                   help="turn angle per point (needed by optls)")
    s.add_argument("--report", required=True)
    s.add_argument("--format", choices=["json", "csv"])
    s.set_defaults(func=cmd_fit_axis)

    s = sub.add_parser("fit-ellipsoid", help="fit the d-dimensional model to x,y,z data")
    s.add_argument("--input", required=True)
    s.add_argument("--tie-smallest-two", action="store_true")
    s.add_argument("--report", required=True)
    s.add_argument("--format", choices=["json", "csv"])
    s.set_defaults(func=cmd_fit_ellipsoid)

    s = sub.add_parser("bench", help="run a simulation benchmark")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--detail")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConvergenceError, InitializationError, BenchmarkError, FloatingPointError) as exc:
        print(f"mhhelix: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ParseError, DomainError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"mhhelix: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
