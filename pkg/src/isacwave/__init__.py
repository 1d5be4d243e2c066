"""Joint transmit-waveform / receive-filter design for multi-user ISAC
downlinks: a consensus-ADMM inner solver nested in an alternating outer loop,
with baselines and an experiment harness."""

__version__ = "0.1.0"

from .model import (ConfigError, Scenario, Waveform, generate_channel,
                    generate_symbols, is_cm_compliant, load_scenario,
                    scenario_from_dict, scenario_to_dict, stacked_channel,
                    unvec, vec)
from .radar import (DegenerateTargetError, SensingMatrices, StackedResponse,
                    beampattern, build_sensing_matrices, composite_beampattern,
                    mvdr_filter, rx_steering, sensing_sinr, tx_steering)
from .comm import CommMetrics, comm_metrics, mui_energy, sum_rate, zero_mui_precoder
from .admm import (AdmmState, AdmmTrace, DivergenceError, QcqpDual,
                   composite_objective, project_cm, solve_waveform)
from .driver import (METHODS, RunResult, SweepSpec, alternating_optimize,
                     emit_beampattern, emit_results, lfm_reference,
                     pg_baseline, run_method, run_sweep, steered_reference)

__all__ = [
    "AdmmState", "AdmmTrace", "CommMetrics", "ConfigError",
    "DegenerateTargetError", "DivergenceError", "METHODS", "QcqpDual",
    "RunResult", "Scenario", "SensingMatrices", "StackedResponse",
    "SweepSpec", "Waveform", "alternating_optimize", "beampattern",
    "build_sensing_matrices", "comm_metrics", "composite_beampattern",
    "composite_objective",
    "emit_beampattern", "emit_results", "generate_channel",
    "generate_symbols", "is_cm_compliant", "lfm_reference", "load_scenario",
    "mui_energy", "mvdr_filter", "pg_baseline", "project_cm", "run_method",
    "run_sweep", "rx_steering", "scenario_from_dict", "scenario_to_dict",
    "sensing_sinr", "solve_waveform", "stacked_channel",
    "steered_reference", "sum_rate",
    "tx_steering", "unvec", "vec", "zero_mui_precoder",
]
