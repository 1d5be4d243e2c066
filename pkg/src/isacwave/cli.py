"""Command-line interface: run, sweep-snr, sweep-rho, beampattern, trace."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .admm import DivergenceError
from .driver import (METHODS, SweepSpec, emit_beampattern, emit_results,
                     run_method, run_sweep)
from .model import ConfigError, generate_channel, generate_symbols, load_scenario

DEFAULT_SNR_VALUES = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
DEFAULT_RHO_VALUES = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def _parse_methods(text: str) -> tuple[str, ...]:
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ConfigError(f"unknown methods: {sorted(unknown)}")
    return methods


def _parse_values(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --values list: {text!r}") from exc


def _add_common(sub):
    sub.add_argument("--config", required=True, help="scenario YAML/JSON file")
    sub.add_argument("--out", default="results", help="output directory")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed")
    sub.add_argument("--methods", default=",".join(METHODS),
                     help="comma-separated subset of "
                          f"{{{','.join(METHODS)}}}")
    sub.add_argument("--paper-stopping", action="store_true",
                     help="use the verbatim disjunctive ADMM stopping rule")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isacwave",
        description="ISAC waveform design: consensus-ADMM solver, baselines, "
                    "and experiment sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single-scenario run of each method")
    _add_common(p_run)

    for name, help_text in (("sweep-snr", "sweep transmit SNR in dB"),
                            ("sweep-rho", "sweep the trade-off factor rho")):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.add_argument("--seeds", type=int, default=50,
                       help="number of seeds per sweep point")
        p.add_argument("--values", default=None,
                       help="comma-separated axis values")

    p_bp = sub.add_parser("beampattern",
                          help="emit beampattern.csv for each method")
    _add_common(p_bp)

    p_tr = sub.add_parser("trace",
                          help="emit per-iteration solver traces")
    _add_common(p_tr)
    return parser


def _single_run(scenario, methods, paper_stopping, out, *, collect_trace,
                with_beampattern):
    H = generate_channel(scenario)
    S = generate_symbols(scenario)
    results = [run_method(m, scenario, H, S, paper_stopping=paper_stopping,
                          collect_trace=collect_trace)
               for m in methods]
    results.sort(key=lambda r: (r.method, r.axis_value, r.scenario.seed))
    paths = emit_results(results, out)
    if with_beampattern:
        paths["beampattern"] = emit_beampattern(
            results, Path(out) / "beampattern.csv")
    return paths


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        scenario = load_scenario(args.config)
        if args.seed is not None:
            scenario = scenario.with_(seed=args.seed)
        methods = _parse_methods(args.methods)

        if args.command == "run":
            _single_run(scenario, methods, args.paper_stopping, args.out,
                        collect_trace=True, with_beampattern=True)
        elif args.command == "trace":
            _single_run(scenario, methods, args.paper_stopping, args.out,
                        collect_trace=True, with_beampattern=False)
        elif args.command == "beampattern":
            H = generate_channel(scenario)
            S = generate_symbols(scenario)
            results = [run_method(m, scenario, H, S,
                                  paper_stopping=args.paper_stopping)
                       for m in methods]
            results.sort(key=lambda r: (r.method, r.axis_value,
                                        r.scenario.seed))
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            emit_beampattern(results, out / "beampattern.csv")
            emit_results(results, out, traces=False)
        elif args.command in ("sweep-snr", "sweep-rho"):
            axis = "snr_db" if args.command == "sweep-snr" else "rho"
            defaults = (DEFAULT_SNR_VALUES if axis == "snr_db"
                        else DEFAULT_RHO_VALUES)
            values = (_parse_values(args.values)
                      if args.values is not None else defaults)
            seeds = tuple(scenario.seed + i for i in range(args.seeds))
            spec = SweepSpec(axis=axis, values=values, seeds=seeds,
                             methods=methods)
            results = run_sweep(spec, scenario,
                                paper_stopping=args.paper_stopping)
            emit_results(results, args.out, traces=False)
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"solver divergence: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
