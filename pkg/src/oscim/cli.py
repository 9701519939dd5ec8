"""Command-line entry point: ``oscim {solve,bench,convert,sweep,perturb,oracle}``.

Exit codes: 0 success, 2 parse or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import harness
from .circuit import default_params
from .dynamics import ImplicitSolveError
from .integrate import IntegrationConfig, IntegrationError
from .io import (
    SCHEMA_VERSION,
    ParseError,
    _jsonable,
    instance_to_dict,
    load_instance,
    result_to_dict,
    write_result,
)
from .problems import MAX_BRUTE_FORCE_SPINS, brute_force_optimum

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


def _positive(name):
    def conv(s):
        try:
            v = float(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {s!r}") from None
        if not v > 0 or math.isnan(v):
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {s!r}")
        return v
    return conv


def _nonneg(name):
    def conv(s):
        try:
            v = float(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {s!r}") from None
        if not v >= 0 or math.isinf(v):
            raise argparse.ArgumentTypeError(f"{name} must be a finite non-negative number, got {s!r}")
        return v
    return conv


def _count(name):
    def conv(s):
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {s!r}") from None
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1, got {s!r}")
        return v
    return conv


def _fraction(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"threshold must be a number, got {s!r}") from None
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"threshold must be in (0, 1], got {s!r}")
    return v


def _add_input(p):
    p.add_argument("--input", required=True, type=Path, help="problem file (gset, biqmac or Ising JSON)")
    p.add_argument("--format", choices=("gset", "biqmac", "ising-json"), help="override format detection")


def _add_circuit(p):
    p.add_argument("--method", default="augmented", choices=("plain", "augmented", "reference_mm"))
    p.add_argument("--mode", default="ode", choices=("ode", "sde"))
    p.add_argument("--t-end", type=_positive("--t-end"), default=50e-6, help="simulated time in seconds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--qp", type=_positive("--qp"), default=math.inf, help="pump quality factor (default: lossless)")
    p.add_argument("--temperature", type=_nonneg("--temperature"), default=300.0, help="kelvin, used by --mode sde")
    p.add_argument("--rel-tol", type=_positive("--rel-tol"), default=1e-6)
    p.add_argument("--abs-tol", type=_positive("--abs-tol"), default=1e-12)
    p.add_argument("--dt-sde", type=_positive("--dt-sde"), default=1e-9, help="Euler-Maruyama step in seconds")
    p.add_argument("--sample-interval", type=_positive("--sample-interval"), default=5e-8)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oscim", description="Coupled parametric-oscillator Ising solver.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one problem; write a run result and its objective trace")
    _add_input(p)
    _add_circuit(p)
    p.add_argument("--runs", type=_count("--runs"), default=1, help="keep the best of this many runs")
    p.add_argument("--best-known", type=_positive("--best-known"))
    p.add_argument("--threshold", type=_fraction, default=0.97, help="fraction of --best-known counted as solved")
    p.add_argument("--output", type=Path, help="result JSON (default: stdout)")
    p.add_argument("--trace", type=Path, help="objective trace CSV")

    p = sub.add_parser("bench", help="repeated runs with statistics and optional time-to-solution")
    _add_input(p)
    _add_circuit(p)
    p.add_argument("--runs", type=_count("--runs"), default=10)
    p.add_argument("--best-known", type=_positive("--best-known"))
    p.add_argument("--threshold", type=_fraction, default=0.97)
    p.add_argument("--jobs", type=_count("--jobs"), default=1)
    p.add_argument("--output", type=Path)

    p = sub.add_parser("convert", help="convert gset/biqmac to canonical Ising JSON")
    _add_input(p)
    p.add_argument("--output", type=Path)

    p = sub.add_parser("sweep", help="multi-run statistics across values of one parameter")
    _add_input(p)
    _add_circuit(p)
    p.add_argument("--param", required=True, choices=harness.SWEEP_PARAMETERS)
    p.add_argument("--values", required=True, help="comma-separated values (SI units)")
    p.add_argument("--runs", type=_count("--runs"), default=10)
    p.add_argument("--jobs", type=_count("--jobs"), default=1)
    p.add_argument("--output", type=Path, help="CSV if the suffix is .csv, JSON otherwise")

    p = sub.add_parser("perturb", help="solution quality under random conductance errors")
    _add_input(p)
    _add_circuit(p)
    p.add_argument("--sigma-pct", type=_nonneg("--sigma-pct"), default=10.0)
    p.add_argument("--samples", type=_count("--samples"), default=10)
    p.add_argument("--jobs", type=_count("--jobs"), default=1)
    p.add_argument("--emit-instance", type=Path, help="also write one perturbed instance as Ising JSON")
    p.add_argument("--output", type=Path)

    p = sub.add_parser("oracle", help=f"exact optimum by enumeration (n <= {MAX_BRUTE_FORCE_SPINS})")
    _add_input(p)
    p.add_argument("--output", type=Path)
    return parser


def _params_and_config(args, inst):
    flow = "reference_mm" if args.method == "reference_mm" else "circuit"
    if flow == "reference_mm":
        if args.mode == "sde":
            raise ConfigError("--method reference_mm has no stochastic mode; use --mode ode")
        if math.isfinite(args.qp):
            warnings.warn("--qp only affects the circuit flow; ignored for --method reference_mm", stacklevel=2)
    if args.mode == "sde" and args.temperature == 0:
        raise ConfigError("--mode sde needs a positive --temperature")
    if args.sample_interval < args.dt_sde:
        raise ConfigError("--sample-interval must be >= --dt-sde")
    method = "augmented" if flow == "reference_mm" else args.method
    params = default_params(inst, method, T=args.temperature, Q_p=args.qp)
    config = IntegrationConfig(t_end=args.t_end, rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                               dt_sde=args.dt_sde, sample_interval=args.sample_interval, seed=args.seed)
    return params, config, flow


def _emit(obj, path):
    text = json.dumps(_jsonable(obj), indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _stats_dict(st: harness.MultiRunStats) -> dict:
    return {"best": st.best, "median": st.median, "p25": st.p25, "p75": st.p75,
            "values": st.values.tolist()}


def _tts_dict(rep: harness.TtsReport) -> dict:
    return {"threshold_fraction": rep.threshold_fraction, "successes": rep.successes,
            "total_runs": rep.total_runs, "tts": rep.tts, "solved": rep.successes > 0,
            "per_run": rep.per_run}


def cmd_solve(args):
    inst = load_instance(args.input, args.format)
    params, config, flow = _params_and_config(args, inst)
    threshold = None if args.best_known is None else args.threshold * args.best_known
    best = None
    for i in range(args.runs):
        r = harness.solve(inst, params, config, args.mode, flow=flow, run_index=i, threshold=threshold)
        if best is None or r.best_objective > best.best_objective:
            best = r
    if args.trace is not None:
        write_result(best, args.trace, "csv")
    _emit(result_to_dict(best), args.output)


def cmd_bench(args):
    inst = load_instance(args.input, args.format)
    params, config, flow = _params_and_config(args, inst)
    st = harness.multi_run(inst, params, config, args.runs, args.mode, jobs=args.jobs, flow=flow)
    out = {"schema_version": SCHEMA_VERSION, "kind": "bench", "input": str(args.input), "n": inst.n,
           "runs": args.runs, "seed": args.seed, "mode": args.mode, "method": args.method,
           "t_end": args.t_end, "stats": _stats_dict(st)}
    if args.best_known is not None:
        rep = harness.time_to_solution(st.results, args.best_known, args.threshold)
        out["best_known"] = args.best_known
        out["tts"] = _tts_dict(rep)
    _emit(out, args.output)


def cmd_convert(args):
    _emit(instance_to_dict(load_instance(args.input, args.format)), args.output)


def _parse_values(text):
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {text!r}") from None
    if not vals or any(math.isnan(v) or v <= 0 for v in vals):
        raise ConfigError("--values must be positive numbers")
    return vals


def cmd_sweep(args):
    values = _parse_values(args.values)
    inst = load_instance(args.input, args.format)
    params, config, flow = _params_and_config(args, inst)
    if flow != "circuit":
        raise ConfigError("sweep runs the circuit flow; use --method plain or augmented")
    rows = harness.sweep(inst, params, args.param, values, args.runs, config, args.mode, args.jobs)
    if args.output is not None and args.output.suffix.lower() == ".csv":
        lines = ["value,best,median,p25,p75"]
        lines += [f"{r.value!r},{r.best!r},{r.median!r},{r.p25!r},{r.p75!r}" for r in rows]
        args.output.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return
    _emit({"schema_version": SCHEMA_VERSION, "kind": "sweep", "param": args.param,
           "rows": [vars(r) for r in rows]}, args.output)


def cmd_perturb(args):
    inst = load_instance(args.input, args.format)
    params, config, flow = _params_and_config(args, inst)
    if flow != "circuit" or args.mode != "ode":
        raise ConfigError("perturb runs the noiseless circuit flow; use --mode ode with plain or augmented")
    if args.emit_instance is not None:
        one = harness.perturb_conductances(inst, args.sigma_pct, np.random.default_rng(args.seed))
        _emit(instance_to_dict(one), args.emit_instance)
    rep = harness.conductance_study(inst, params, config, args.sigma_pct, args.samples, args.seed, args.jobs)
    _emit({"schema_version": SCHEMA_VERSION, "kind": "perturb", "sigma_pct": args.sigma_pct,
           "samples": args.samples, "nominal": _stats_dict(rep.nominal),
           "perturbed_values": rep.perturbed_values.tolist(), "perturbed_median": rep.perturbed_median,
           "relative_quality": rep.relative_quality}, args.output)


def cmd_oracle(args):
    inst = load_instance(args.input, args.format)
    if inst.n > MAX_BRUTE_FORCE_SPINS:
        raise ConfigError(f"oracle enumerates 2^n configurations; n={inst.n} exceeds {MAX_BRUTE_FORCE_SPINS}")
    cfg, value = brute_force_optimum(inst)
    print(f"optimum {value:g}")
    if args.output is not None:
        _emit({"schema_version": SCHEMA_VERSION, "kind": "oracle", "n": inst.n, "optimum": value,
               "config": [int(v) for v in cfg]}, args.output)


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "convert": cmd_convert,
            "sweep": cmd_sweep, "perturb": cmd_perturb, "oracle": cmd_oracle}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: print(f"oscim: warning: {msg}", file=sys.stderr)
            COMMANDS[args.command](args)
    except (IntegrationError, ImplicitSolveError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"oscim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParseError, ConfigError, ValueError, OSError) as exc:
        print(f"oscim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
