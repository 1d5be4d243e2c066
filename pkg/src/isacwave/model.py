"""Scenario definition, random instance generation, and stacking conventions.

Everything downstream relies on the conventions fixed here: column-major
vectorization (``vec``/``unvec``) and the block channel operator
``I_N (x) H`` that makes ``H_tilde @ vec(X) == vec(H @ X)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

# Unit-average-power QPSK constellation.
QPSK_POINTS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / math.sqrt(2.0)

# Sub-streams so channel and symbol draws from one scenario seed are independent.
_CHANNEL_STREAM = 0
_SYMBOL_STREAM = 1


class ConfigError(ValueError):
    """Raised for malformed or inconsistent scenario configuration."""


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class Scenario:
    """Immutable bundle of all physical and algorithmic parameters.

    Angles are radians, powers are linear (watts); use :func:`load_scenario`
    to read the degree/dB config-file representation.
    """

    tx_antennas: int = 16
    rx_antennas: int = 16
    symbols: int = 20
    users: int = 4
    target_angle: float = math.radians(15.0)
    interferers: tuple[tuple[float, float], ...] = (
        (math.radians(-50.0), 1000.0),
        (math.radians(40.0), 1000.0),
    )
    target_power: float = 10.0
    radar_noise: float = 1.0
    comm_noise: float = 0.1
    total_power: float = 1.0
    rho: float = 0.2
    similarity_weight: float = 1.0
    penalty: float = 1.0
    eps_primal: float = 1e-4
    eps_dual: float = 1e-4
    max_inner: int = 300
    max_outer: int = 30
    seed: int = 0

    def __post_init__(self):
        for name in ("tx_antennas", "rx_antennas", "symbols", "users"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError("rho must lie in [0, 1]")
        if self.similarity_weight <= 0 or self.penalty <= 0:
            raise ConfigError("similarity_weight and penalty must be > 0")
        for name in ("target_power", "radar_noise", "comm_noise", "total_power"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.eps_primal <= 0 or self.eps_dual <= 0:
            raise ConfigError("stopping tolerances must be > 0")
        if self.max_inner < 1 or self.max_outer < 1:
            raise ConfigError("iteration limits must be >= 1")
        half_pi = math.pi / 2
        angles = [self.target_angle] + [a for a, _ in self.interferers]
        if any(not -half_pi < a < half_pi for a in angles):
            raise ConfigError("all angles must lie in (-pi/2, pi/2)")
        if any(p <= 0 for _, p in self.interferers):
            raise ConfigError("interferer powers must be > 0")

    @property
    def num_interferers(self) -> int:
        return len(self.interferers)

    @property
    def cm_amplitude(self) -> float:
        """Per-entry modulus sqrt(P_max / (T*N)); derived, never stored."""
        return math.sqrt(self.total_power / (self.tx_antennas * self.symbols))

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


_CONFIG_KEYS = {
    "tx_antennas", "rx_antennas", "symbols", "users",
    "target_angle_deg", "interferers", "target_power_db", "radar_noise_db",
    "comm_noise_db", "total_power_w", "rho", "lambda", "gamma",
    "eps_primal", "eps_dual", "max_inner", "max_outer", "seed",
}


def scenario_from_dict(raw: dict) -> Scenario:
    """Build a Scenario from the file representation (degrees / dB)."""
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kw = {}
    for name in ("tx_antennas", "rx_antennas", "symbols", "users",
                 "max_inner", "max_outer", "seed"):
        if name in raw:
            kw[name] = int(raw[name])
    for src, dst in (("rho", "rho"), ("lambda", "similarity_weight"),
                     ("gamma", "penalty"), ("eps_primal", "eps_primal"),
                     ("eps_dual", "eps_dual"), ("total_power_w", "total_power")):
        if src in raw:
            kw[dst] = float(raw[src])
    if "target_angle_deg" in raw:
        kw["target_angle"] = math.radians(float(raw["target_angle_deg"]))
    for src, dst in (("target_power_db", "target_power"),
                     ("radar_noise_db", "radar_noise"),
                     ("comm_noise_db", "comm_noise")):
        if src in raw:
            kw[dst] = db_to_linear(float(raw[src]))
    if "interferers" in raw:
        entries = []
        for item in raw["interferers"]:
            try:
                angle = math.radians(float(item["angle_deg"]))
                power = db_to_linear(float(item["power_db"]))
            except (KeyError, TypeError) as exc:
                raise ConfigError(
                    "each interferer needs angle_deg and power_db") from exc
            entries.append((angle, power))
        kw["interferers"] = tuple(entries)
    return Scenario(**kw)


def scenario_to_dict(scenario: Scenario) -> dict:
    """File representation of a scenario (degrees / dB), for manifests."""
    return {
        "tx_antennas": scenario.tx_antennas,
        "rx_antennas": scenario.rx_antennas,
        "symbols": scenario.symbols,
        "users": scenario.users,
        "target_angle_deg": math.degrees(scenario.target_angle),
        "interferers": [
            {"angle_deg": math.degrees(a), "power_db": linear_to_db(p)}
            for a, p in scenario.interferers
        ],
        "target_power_db": linear_to_db(scenario.target_power),
        "radar_noise_db": linear_to_db(scenario.radar_noise),
        "comm_noise_db": linear_to_db(scenario.comm_noise),
        "total_power_w": scenario.total_power,
        "rho": scenario.rho,
        "lambda": scenario.similarity_weight,
        "gamma": scenario.penalty,
        "eps_primal": scenario.eps_primal,
        "eps_dual": scenario.eps_dual,
        "max_inner": scenario.max_inner,
        "max_outer": scenario.max_outer,
        "seed": scenario.seed,
    }


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario from a YAML (or JSON) config file."""
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return scenario_from_dict(raw)


@dataclass(frozen=True, eq=False)
class Waveform:
    """Stacked transmit vector x of length T*N with its T-by-N matrix view."""

    x: np.ndarray
    tx_antennas: int
    symbols: int
    cm_compliant: bool = False

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=complex))
        if self.x.ndim != 1 or self.x.size != self.tx_antennas * self.symbols:
            raise ValueError(
                f"waveform length {self.x.size} does not match "
                f"T*N = {self.tx_antennas * self.symbols}")

    @property
    def matrix(self) -> np.ndarray:
        return unvec(self.x, self.tx_antennas, self.symbols)


def asvec(x) -> np.ndarray:
    """Coerce a Waveform or array-like to a 1-D complex vector."""
    if isinstance(x, Waveform):
        return x.x
    return np.asarray(x, dtype=complex).reshape(-1)


def vec(X: np.ndarray) -> np.ndarray:
    """Column-major stacking x = vec(X)."""
    return np.asarray(X).reshape(-1, order="F")


def unvec(x: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`; raises on length mismatch."""
    x = np.asarray(x)
    if x.size != rows * cols:
        raise ValueError(f"cannot reshape length {x.size} into {rows}x{cols}")
    return x.reshape((rows, cols), order="F")


def stacked_channel(H: np.ndarray, symbols: int) -> np.ndarray:
    """Block-diagonal operator I_N (x) H, so that it maps vec(X) to vec(HX)."""
    H = np.asarray(H)
    return np.kron(np.eye(symbols), H)


def generate_channel(scenario: Scenario) -> np.ndarray:
    """i.i.d. CN(0, 1) flat-fading user channels, M x T, seed-deterministic."""
    rng = np.random.default_rng([_CHANNEL_STREAM, scenario.seed])
    shape = (scenario.users, scenario.tx_antennas)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / math.sqrt(2.0)


def generate_symbols(scenario: Scenario) -> np.ndarray:
    """Unit-power QPSK symbol matrix, M x N, seed-deterministic."""
    rng = np.random.default_rng([_SYMBOL_STREAM, scenario.seed])
    idx = rng.integers(0, 4, size=(scenario.users, scenario.symbols))
    return QPSK_POINTS[idx]


def is_cm_compliant(x, amplitude: float, rtol: float = 1e-12) -> bool:
    """Check |x_n| == amplitude for all n, within rtol relative."""
    mods = np.abs(asvec(x))
    return bool(np.max(np.abs(mods - amplitude)) <= rtol * amplitude)
