"""Command-line entry point: ``eiscale <subcommand> ...``.

Exit status is 0 on success, 1 for configuration/usage errors and 2 for
failures while running.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, io, plotting, theory
from .experiment import ConfigError, ExperimentConfig, robustness_sweep, run_curve, sweep_configs

log = logging.getLogger("eiscale")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _with_seed(config: ExperimentConfig, seed) -> ExperimentConfig:
    return config if seed is None else replace(config, master_seed=seed)


def cmd_simulate(args) -> int:
    data = io.load_json(args.config)
    data.setdefault("system", args.system)
    if data["system"] != args.system:
        raise ConfigError(f"config is for system {data['system']!r}, not {args.system!r}")
    config = _with_seed(ExperimentConfig.from_dict(data), args.seed)
    out = Path(args.out_dir)
    t0 = time.perf_counter()
    curve = run_curve(config, workers=args.workers)
    wall = time.perf_counter() - t0
    io.emit_csv(curve, out / "curve.csv")
    report = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analysis.BoundaryPeak)
        try:
            report = analysis.select_model(curve, args.bootstrap, seed=config.master_seed)
        except (ValueError, analysis.InsufficientScales) as exc:
            log.warning("model selection skipped: %s", exc)
    if not args.no_plot:
        plotting.emit_svg(curve, report, out / "curve.svg")
    io.write_manifest(out / "manifest.json", [config], [curve], wall,
                      command="simulate", analysis=report.to_dict() if report else None)
    sys.stdout.write(io.curve_to_csv(curve))
    return EXIT_OK


def cmd_sweep(args) -> int:
    plan = io.load_json(args.config)
    if args.seed is not None:
        plan["master_seed"] = args.seed
    configs = sweep_configs(plan)
    out = Path(args.out_dir)
    t0 = time.perf_counter()
    curves = robustness_sweep(configs, workers=args.workers)
    wall = time.perf_counter() - t0
    labels = []
    for i, (config, curve) in enumerate(zip(configs, curves)):
        variant = plan["variants"][i]
        label = ", ".join(f"{k}={v}" for k, v in variant.items() if k != "master_seed") or f"#{i}"
        labels.append(label)
        if curve.error:
            print(f"# variant {i} ({label}) failed: {curve.error}", file=sys.stderr)
            continue
        path = io.emit_csv(curve, out / f"curve_{i:02d}.csv")
        print(f"# variant {i} ({label}) -> {path}")
        sys.stdout.write(io.curve_to_csv(curve))
    if not args.no_plot and any(c.records for c in curves):
        plotting.emit_sweep_svg(curves, labels, out / "sweep.svg")
    io.write_manifest(out / "manifest.json", configs, curves, wall, command="sweep",
                      labels=labels)
    return EXIT_RUNTIME if any(c.error for c in curves) else EXIT_OK


def cmd_analyze(args) -> int:
    curve = io.read_csv(args.curve)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", analysis.BoundaryPeak)
        peak = analysis.detect_peak(curve)
    result = {"argmax_scale": peak,
              "boundary_peak": any(issubclass(w.category, analysis.BoundaryPeak) for w in caught)}
    if len(curve.records) >= 4:
        result.update(analysis.select_model(curve, args.bootstrap, seed=args.seed).to_dict())
    print(json.dumps(result, indent=2))
    return EXIT_OK


def cmd_plot(args) -> int:
    if Path(args.output).suffix.lower() != ".svg":
        raise ConfigError("plot output must be an .svg file")
    curve = io.read_csv(args.curve)
    report = None
    if len(curve.records) >= 4:
        report = analysis.select_model(curve, args.bootstrap, seed=args.seed)
    path = plotting.emit_svg(curve, report, args.output)
    print(path)
    return EXIT_OK


def _response_model(args) -> theory.ResponseModel:
    param = {"exp": args.lam, "power": args.alpha, "diffusive": args.c}[args.model]
    if param is None:
        flag = {"exp": "--lambda", "power": "--alpha", "diffusive": "--c"}[args.model]
        raise ConfigError(f"model {args.model!r} needs {flag}")
    try:
        return theory.ResponseModel(args.model, param)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_theory(args) -> int:
    model = _response_model(args)
    if not args.grid_max > args.grid_min > 0 or args.grid_step <= 0:
        raise ConfigError("need 0 < grid-min < grid-max and grid-step > 0")
    grid = np.arange(args.grid_min, args.grid_max + args.grid_step / 2, args.grid_step)
    params = theory.BoundParams.from_C(args.d, args.C)
    result = {"model": model.kind, "param": model.param, "d": args.d, "C": args.C,
              "grid": [float(grid[0]), float(grid[-1]), args.grid_step]}
    try:
        rep = theory.verify_peak(model, args.d, grid)
        result.update(ell_star=rep.ell_star, is_unimodal=rep.is_unimodal,
                      derivative_sign_changes=rep.derivative_sign_changes,
                      ei_bound_at_peak_bits=theory.ei_lower_bound(model, params, rep.ell_star))
        if model.kind == "exp":
            result["closed_form_ell_star"] = args.d * model.param / 2
    except theory.NoInteriorPeak as exc:
        result.update(ell_star=None, is_unimodal=False, no_interior_peak=str(exc))
    if args.output:
        plotting.emit_theory_svg(model, params, grid, args.output,
                                 ell_star=result.get("ell_star"))
    print(json.dumps(result, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eiscale", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def run_opts(sp):
        sp.add_argument("--config", required=True, help="JSON experiment config")
        sp.add_argument("--seed", type=int, help="override the config's master seed")
        sp.add_argument("--out-dir", default=".", help="directory for CSV, SVG and manifest")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--no-plot", action="store_true")

    sim = sub.add_parser("simulate", help="run one EI-vs-scale curve")
    sim.add_argument("system", choices=("ising", "abm"))
    run_opts(sim)
    sim.add_argument("--bootstrap", type=int, default=500)
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", help="run a list of config variants")
    run_opts(sw)
    sw.set_defaults(func=cmd_sweep)

    an = sub.add_parser("analyze", help="peak detection and model selection on a curve CSV")
    an.add_argument("curve")
    an.add_argument("--bootstrap", type=int, default=1000)
    an.add_argument("--seed", type=int, default=0)
    an.set_defaults(func=cmd_analyze)

    th = sub.add_parser("theory", help="Gaussian-channel bound and peak check for a response model")
    th.add_argument("--model", choices=("exp", "power", "diffusive"), required=True)
    th.add_argument("--lambda", dest="lam", type=float)
    th.add_argument("--alpha", type=float)
    th.add_argument("--c", type=float)
    th.add_argument("--d", type=int, default=2)
    th.add_argument("--C", type=float, default=1.0, help="signal-to-noise constant V0/sigma^2")
    th.add_argument("--grid-min", type=float, default=1.0)
    th.add_argument("--grid-max", type=float, default=64.0)
    th.add_argument("--grid-step", type=float, default=0.25)
    th.add_argument("-o", "--output", help="optional SVG of f(l) and the EI bound")
    th.add_argument("--seed", type=int, help="accepted for interface uniformity; unused")
    th.set_defaults(func=cmd_theory)

    pl = sub.add_parser("plot", help="render a curve CSV as SVG")
    pl.add_argument("curve")
    pl.add_argument("-o", "--output", required=True)
    pl.add_argument("--bootstrap", type=int, default=500)
    pl.add_argument("--seed", type=int, default=0)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        if args.verbose:
            log.exception("run failed")
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
