"""Outer alternating loop, baseline methods, experiment sweeps, and metric
persistence.

The alternating optimizer nests the consensus-ADMM inner solver (waveform at
fixed filter) with the closed-form MVDR filter refresh. Baselines: the
orthogonal-chirp radar reference, the Zero-MUI right-inverse precoder, and a
projected-gradient stand-in that minimizes the same trade-off cost.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .admm import (AdmmTrace, DivergenceError, cm_project,
                   composite_objective, solve_waveform)
from .comm import CommMetrics, comm_metrics, zero_mui_precoder
from .model import (Scenario, Waveform, asvec, generate_channel,
                    generate_symbols, scenario_to_dict, vec)
from .radar import (composite_beampattern, default_beampattern_grid,
                    mvdr_filter, sensing_sinr)

METHODS = ("proposed", "lfm", "zero_mui", "pg_baseline")

# Human-facing labels; keeps the stand-in from being misread as the original
# projected-gradient method it replaces.
METHOD_LABELS = {
    "proposed": "proposed",
    "lfm": "LFM reference",
    "zero_mui": "Zero MUI",
    "pg_baseline": "pg_baseline (stand-in)",
}

_INIT_STREAM = 2

OUTER_TOL = 1e-4


@dataclass
class RunResult:
    """One optimized waveform with its metrics and traces."""

    scenario: Scenario
    waveform: Waveform
    filter: np.ndarray
    metrics: CommMetrics
    sinr_db: float
    objective_trace: tuple[float, ...]
    sinr_trace_db: tuple[float, ...]
    inner_trace: AdmmTrace | None
    wall_ms: float
    method: str
    axis: str = "rho"
    axis_value: float = math.nan


@dataclass(frozen=True)
class SweepSpec:
    """Axis, grid values, seeds, and methods of one experiment sweep."""

    axis: str
    values: tuple[float, ...]
    seeds: tuple[int, ...]
    methods: tuple[str, ...]

    def __post_init__(self):
        if self.axis not in ("snr_db", "rho"):
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        if len(self.values) == 0 or any(
                b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if len(self.seeds) == 0:
            raise ValueError("at least one seed is required")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")


def lfm_reference(scenario: Scenario) -> Waveform:
    """Orthogonal linear-FM chirp reference, constant-modulus by construction."""
    amp = scenario.cm_amplitude
    t = np.arange(scenario.tx_antennas)[:, None]
    n = np.arange(scenario.symbols)[None, :]
    X0 = amp * np.exp(2j * np.pi * t * n / scenario.symbols) \
        * np.exp(1j * np.pi * n ** 2 / scenario.symbols)
    return Waveform(x=vec(X0), tx_antennas=scenario.tx_antennas,
                    symbols=scenario.symbols, cm_compliant=True)


def steered_reference(scenario: Scenario) -> Waveform:
    """Similarity anchor: chirp phased to steer the array at the target.

    Spatially rank-1 (unlike the isotropic orthogonal chirp), so pulling the
    waveform toward it preserves a mainlobe at the target angle; that is what
    lets the trade-off weight actually exchange sensing gain for sum rate.
    """
    amp = scenario.cm_amplitude
    t = np.arange(scenario.tx_antennas)[:, None]
    n = np.arange(scenario.symbols)[None, :]
    X0 = amp * np.exp(1j * np.pi * t * np.sin(scenario.target_angle)) \
        * np.exp(1j * np.pi * n ** 2 / scenario.symbols)
    return Waveform(x=vec(X0), tx_antennas=scenario.tx_antennas,
                    symbols=scenario.symbols, cm_compliant=True)


def initial_waveform(scenario: Scenario, H, S, policy: str = "auto") -> np.ndarray:
    """Warm start aligned with the dominant objective.

    "auto" projects the Zero-MUI precoder when rho >= 0.5 and the steered
    radar reference otherwise; "random" draws seed-deterministic phases.
    """
    if policy == "auto":
        policy = "zero_mui" if scenario.rho >= 0.5 else "reference"
    amp = scenario.cm_amplitude
    if policy == "zero_mui":
        return cm_project(zero_mui_precoder(H, S, scenario.total_power).x, amp)
    if policy == "reference":
        return cm_project(steered_reference(scenario).x, amp)
    if policy == "lfm":
        return cm_project(lfm_reference(scenario).x, amp)
    if policy == "random":
        rng = np.random.default_rng([_INIT_STREAM, scenario.seed])
        phases = rng.uniform(0.0, 2.0 * np.pi,
                             scenario.tx_antennas * scenario.symbols)
        return amp * np.exp(1j * phases)
    raise ValueError(f"unknown init policy {policy!r}")


def _extend_trace(total: AdmmTrace, piece: AdmmTrace):
    total.iterations.extend(piece.iterations)
    total.r_primal.extend(piece.r_primal)
    total.s_dual.extend(piece.s_dual)
    total.objective.extend(piece.objective)
    total.mui.extend(piece.mui)
    total.sinr_db.extend(piece.sinr_db)


def alternating_optimize(scenario: Scenario, H, S, *,
                         paper_stopping: bool = False, init: str = "auto",
                         collect_trace: bool = True) -> RunResult:
    """Alternate the ADMM waveform solve with the MVDR filter refresh."""
    start = time.perf_counter()
    x0 = steered_reference(scenario).x
    x = initial_waveform(scenario, H, S, init)
    w = mvdr_filter(x, scenario)

    objective_trace: list[float] = []
    sinr_trace_db: list[float] = []
    inner = AdmmTrace() if collect_trace else None
    prev_objective = None
    waveform = None
    for _ in range(scenario.max_outer):
        waveform, piece = solve_waveform(
            x, w, scenario, H, S, x0, paper_stopping=paper_stopping,
            collect_trace=collect_trace,
            iteration_offset=len(inner) if inner is not None else 0)
        x = waveform.x
        w = mvdr_filter(x, scenario)
        if inner is not None:
            _extend_trace(inner, piece)
        objective = composite_objective(x, w, scenario, H, S, x0)
        objective_trace.append(objective)
        sinr_trace_db.append(
            10.0 * math.log10(max(sensing_sinr(x, w, scenario), 1e-300)))
        if prev_objective is not None and abs(objective - prev_objective) \
                < OUTER_TOL * max(abs(prev_objective), 1e-12):
            break
        prev_objective = objective

    wall_ms = 1e3 * (time.perf_counter() - start)
    return RunResult(
        scenario=scenario, waveform=waveform, filter=w,
        metrics=comm_metrics(waveform.matrix, H, S, scenario.comm_noise),
        sinr_db=sinr_trace_db[-1], objective_trace=tuple(objective_trace),
        sinr_trace_db=tuple(sinr_trace_db), inner_trace=inner,
        wall_ms=wall_ms, method="proposed", axis="rho",
        axis_value=scenario.rho)


def _fraction_terms(x, sensing, rho):
    """Value and Wirtinger gradient of (1-rho) * (x^H R_i x + c0) / (x^H R_t x)."""
    rix = sensing.R_i @ x
    rtx = sensing.R_t @ x
    num = float(np.real(x.conj() @ rix)) + sensing.noise_floor
    den = float(np.real(x.conj() @ rtx))
    if den <= 0:
        return math.inf, np.zeros_like(x)
    value = (1.0 - rho) * num / den
    grad = (1.0 - rho) * (rix * den - num * rtx) / den ** 2
    return value, grad


def pg_objective_and_grad(x, w, scenario: Scenario, H, S, x0,
                          sensing=None):
    """Trade-off cost at fixed filter and its Wirtinger gradient d/d conj(x)."""
    from .radar import build_sensing_matrices

    x = asvec(x)
    H = np.asarray(H, dtype=complex)
    S = np.asarray(S, dtype=complex)
    x0 = asvec(x0)
    rho = scenario.rho
    X = x.reshape((scenario.tx_antennas, scenario.symbols), order="F")
    residual = H @ X - S
    value = rho * float(np.linalg.norm(residual) ** 2)
    grad = rho * vec(H.conj().T @ residual)
    if rho < 1.0:
        if sensing is None:
            sensing = build_sensing_matrices(w, scenario)
        frac_value, frac_grad = _fraction_terms(x, sensing, rho)
        value += frac_value
        grad = grad + frac_grad
        diff = x - x0
        value += (1.0 - rho) * scenario.similarity_weight \
            * float(np.linalg.norm(diff) ** 2)
        grad = grad + (1.0 - rho) * scenario.similarity_weight * diff
    return value, grad


def _pg_descend(x, w, scenario, H, S, x0, max_steps=200, rel_tol=1e-6):
    """CM-projected gradient descent with backtracking on the trade-off cost."""
    from .radar import build_sensing_matrices

    amp = scenario.cm_amplitude
    sensing = build_sensing_matrices(w, scenario) if scenario.rho < 1.0 else None
    eta = 1.0
    value, grad = pg_objective_and_grad(x, w, scenario, H, S, x0,
                                        sensing=sensing)
    for _ in range(max_steps):
        accepted = False
        for _ in range(40):
            candidate = cm_project(x - eta * grad, amp)
            cand_value, cand_grad = pg_objective_and_grad(
                candidate, w, scenario, H, S, x0, sensing=sensing)
            if cand_value <= value:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break
        improvement = value - cand_value
        x, value, grad = candidate, cand_value, cand_grad
        eta *= 1.5
        if not math.isfinite(value):
            raise DivergenceError("projected-gradient objective diverged")
        if improvement <= rel_tol * max(1.0, abs(value)):
            break
    return x, value


def pg_baseline(scenario: Scenario, H, S, *, init: str = "auto",
                max_steps: int = 200) -> RunResult:
    """Projected-gradient stand-in baseline on the same trade-off cost."""
    start = time.perf_counter()
    x0 = steered_reference(scenario).x
    x = initial_waveform(scenario, H, S, init)
    w = mvdr_filter(x, scenario)
    objective_trace: list[float] = []
    sinr_trace_db: list[float] = []
    prev_objective = None
    for _ in range(scenario.max_outer):
        x, _ = _pg_descend(x, w, scenario, H, S, x0, max_steps=max_steps)
        w = mvdr_filter(x, scenario)
        objective = composite_objective(x, w, scenario, H, S, x0)
        objective_trace.append(objective)
        sinr_trace_db.append(
            10.0 * math.log10(max(sensing_sinr(x, w, scenario), 1e-300)))
        if prev_objective is not None and abs(objective - prev_objective) \
                < OUTER_TOL * max(abs(prev_objective), 1e-12):
            break
        prev_objective = objective
    waveform = Waveform(x=x, tx_antennas=scenario.tx_antennas,
                        symbols=scenario.symbols, cm_compliant=True)
    wall_ms = 1e3 * (time.perf_counter() - start)
    return RunResult(
        scenario=scenario, waveform=waveform, filter=w,
        metrics=comm_metrics(waveform.matrix, H, S, scenario.comm_noise),
        sinr_db=sinr_trace_db[-1], objective_trace=tuple(objective_trace),
        sinr_trace_db=tuple(sinr_trace_db), inner_trace=None,
        wall_ms=wall_ms, method="pg_baseline", axis="rho",
        axis_value=scenario.rho)


def _static_result(scenario, waveform, H, S, method) -> RunResult:
    start = time.perf_counter()
    x0 = steered_reference(scenario).x
    w = mvdr_filter(waveform.x, scenario)
    objective = composite_objective(waveform.x, w, scenario, H, S, x0)
    sinr_db = 10.0 * math.log10(
        max(sensing_sinr(waveform.x, w, scenario), 1e-300))
    wall_ms = 1e3 * (time.perf_counter() - start)
    return RunResult(
        scenario=scenario, waveform=waveform, filter=w,
        metrics=comm_metrics(waveform.matrix, H, S, scenario.comm_noise),
        sinr_db=sinr_db, objective_trace=(objective,),
        sinr_trace_db=(sinr_db,), inner_trace=None, wall_ms=wall_ms,
        method=method, axis="rho", axis_value=scenario.rho)


def run_method(method: str, scenario: Scenario, H, S, *,
               paper_stopping: bool = False, collect_trace: bool = False,
               init: str = "auto") -> RunResult:
    """Run one design method on a fixed problem instance."""
    if method == "proposed":
        return alternating_optimize(scenario, H, S,
                                    paper_stopping=paper_stopping,
                                    init=init, collect_trace=collect_trace)
    if method == "pg_baseline":
        return pg_baseline(scenario, H, S, init=init)
    if method == "lfm":
        return _static_result(scenario, lfm_reference(scenario), H, S, "lfm")
    if method == "zero_mui":
        waveform = zero_mui_precoder(H, S, scenario.total_power)
        return _static_result(scenario, waveform, H, S, "zero_mui")
    raise ValueError(f"unknown method {method!r}")


def apply_axis(scenario: Scenario, axis: str, value: float) -> Scenario:
    """Instantiate one sweep point; snr_db sets the downlink noise power."""
    if axis == "snr_db":
        noise = scenario.total_power / 10.0 ** (value / 10.0)
        return scenario.with_(comm_noise=noise)
    if axis == "rho":
        return scenario.with_(rho=value)
    raise ValueError(f"unknown sweep axis {axis!r}")


def run_sweep(spec: SweepSpec, scenario: Scenario, *,
              paper_stopping: bool = False,
              collect_trace: bool = False) -> list[RunResult]:
    """Run every (value, seed, method) cell with fresh per-seed instances."""
    results = []
    for value in spec.values:
        for seed in spec.seeds:
            cell = apply_axis(scenario, spec.axis, value).with_(seed=seed)
            H = generate_channel(cell)
            S = generate_symbols(cell)
            for method in spec.methods:
                result = run_method(method, cell, H, S,
                                    paper_stopping=paper_stopping,
                                    collect_trace=collect_trace)
                result.axis = spec.axis
                result.axis_value = float(value)
                results.append(result)
    results.sort(key=lambda r: (r.method, r.axis_value, r.scenario.seed))
    return results


def _fmt(value: float) -> str:
    return repr(float(value))


def version_string() -> str:
    """Package version, extended with the git revision when available."""
    base = f"isacwave {__version__}"
    try:
        rev = subprocess.run(
            ["git", "-C", str(Path(__file__).resolve().parents[2]),
             "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5)
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{base} ({rev.stdout.strip()})"
    except (OSError, subprocess.SubprocessError):
        pass
    return base


def run_id(result: RunResult) -> str:
    return (f"{result.method}_{result.axis}{result.axis_value:g}"
            f"_seed{result.scenario.seed}")


def emit_results(results: list[RunResult], out_dir, *,
                 traces: bool = True) -> dict[str, object]:
    """Write runs.csv, per-run traces, timings, and the run manifest.

    runs.csv carries only seed-deterministic values; wall-clock timings go to
    timings.csv so repeated invocations are byte-identical. Sweeps pass
    ``traces=False`` to skip the per-run trace files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, object] = {}

    runs_path = out / "runs.csv"
    with runs_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "axis_value", "seed", "sum_rate",
                         "sinr_db", "mui"])
        for r in results:
            writer.writerow([r.method, _fmt(r.axis_value), r.scenario.seed,
                             _fmt(r.metrics.sum_rate), _fmt(r.sinr_db),
                             _fmt(r.metrics.mui_energy)])
    paths["runs"] = runs_path

    timings_path = out / "timings.csv"
    with timings_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "axis_value", "seed", "runtime_ms"])
        for r in results:
            writer.writerow([r.method, _fmt(r.axis_value), r.scenario.seed,
                             _fmt(r.wall_ms)])
    paths["timings"] = timings_path

    trace_paths = []
    for r in results if traces else []:
        rid = run_id(r)
        if r.inner_trace is not None and len(r.inner_trace) > 0:
            tr_path = out / f"trace_{rid}.csv"
            with tr_path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["iter", "r_primal", "s_dual", "objective",
                                 "mui", "sinr_sensing_db"])
                t = r.inner_trace
                for row in zip(t.iterations, t.r_primal, t.s_dual,
                               t.objective, t.mui, t.sinr_db):
                    writer.writerow([row[0]] + [_fmt(v) for v in row[1:]])
            trace_paths.append(tr_path)
        if len(r.sinr_trace_db) > 0:
            ot_path = out / f"outer_trace_{rid}.csv"
            with ot_path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["iter", "objective", "sinr_sensing_db"])
                for i, (obj, sinr) in enumerate(
                        zip(r.objective_trace, r.sinr_trace_db)):
                    writer.writerow([i, _fmt(obj), _fmt(sinr)])
            trace_paths.append(ot_path)
    paths["traces"] = trace_paths

    manifest = {
        "version": version_string(),
        "scenario": scenario_to_dict(results[0].scenario) if results else None,
        "methods": sorted({r.method for r in results}),
        "method_labels": METHOD_LABELS,
        "axis": results[0].axis if results else None,
        "values": sorted({r.axis_value for r in results}),
        "seeds": sorted({r.scenario.seed for r in results}),
        "files": sorted(p.name for p in [runs_path, timings_path] + trace_paths),
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    paths["manifest"] = manifest_path
    return paths


def emit_beampattern(results: list[RunResult], path, grid=None):
    """Write (theta_deg, gain_db, method) rows of the composite beampattern.

    Uses the receive-filtered composite |w^H A(theta) x|^2 of each result,
    which carries the mainlobe/null structure the joint design shapes.
    """
    if grid is None:
        grid = default_beampattern_grid()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta_deg", "gain_db", "method"])
        for r in results:
            thetas, gains = composite_beampattern(
                r.waveform.x, r.filter, grid, scenario=r.scenario)
            for theta, gain in zip(np.rad2deg(thetas), gains):
                writer.writerow([_fmt(theta), _fmt(gain), r.method])
    return path
