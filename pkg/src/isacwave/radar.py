"""Radar-side math: steering vectors, stacked responses, the MVDR receive
filter, sensing SINR, and transmit beampattern evaluation.

The stacked response A(theta) = I_N (x) a_r(theta) a_t(theta)^T is kept in
operator form; dense materialization is refused beyond a size budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .model import Scenario, asvec, unvec, vec

# Max complex entries for a dense A(theta); beyond this, operator form only.
DENSE_BUDGET = 10_000_000


class DegenerateTargetError(RuntimeError):
    """Target response A(theta0) x vanished; the MVDR filter is undefined."""


def tx_steering(theta: float, n_elements: int) -> np.ndarray:
    """Half-wavelength ULA transmit steering vector, unit 2-norm."""
    t = np.arange(n_elements)
    return np.exp(-1j * np.pi * t * np.sin(theta)) / np.sqrt(n_elements)


def rx_steering(theta: float, n_elements: int) -> np.ndarray:
    """Receive steering vector; same construction as :func:`tx_steering`."""
    return tx_steering(theta, n_elements)


class StackedResponse:
    """Block-diagonal response with N identical rank-1 blocks a_r a_t^T.

    Applied as an operator on stacked waveforms (length N*T -> N*R).
    """

    def __init__(self, theta: float, tx_antennas: int, rx_antennas: int,
                 symbols: int):
        self.theta = float(theta)
        self.tx_antennas = tx_antennas
        self.rx_antennas = rx_antennas
        self.symbols = symbols
        self.a_t = tx_steering(theta, tx_antennas)
        self.a_r = rx_steering(theta, rx_antennas)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.symbols * self.rx_antennas,
                self.symbols * self.tx_antennas)

    def apply(self, x) -> np.ndarray:
        """A(theta) @ x without forming A densely."""
        X = unvec(asvec(x), self.tx_antennas, self.symbols)
        return vec(np.outer(self.a_r, self.a_t @ X))

    def apply_adjoint(self, y) -> np.ndarray:
        """A(theta)^H @ y; the adjoint block is conj(a_t) a_r^H."""
        Y = unvec(asvec(y), self.rx_antennas, self.symbols)
        return vec(np.outer(self.a_t.conj(), self.a_r.conj() @ Y))

    def dense(self, budget: int = DENSE_BUDGET) -> np.ndarray:
        rows, cols = self.shape
        if rows * cols > budget:
            raise ValueError(
                f"dense A(theta) would hold {rows * cols} entries, "
                f"budget is {budget}; use the operator form")
        return np.kron(np.eye(self.symbols), np.outer(self.a_r, self.a_t))


def target_response(scenario: Scenario) -> StackedResponse:
    return StackedResponse(scenario.target_angle, scenario.tx_antennas,
                           scenario.rx_antennas, scenario.symbols)


def interferer_responses(scenario: Scenario) -> list[StackedResponse]:
    return [StackedResponse(angle, scenario.tx_antennas, scenario.rx_antennas,
                            scenario.symbols)
            for angle, _ in scenario.interferers]


def mvdr_filter(x, scenario: Scenario) -> np.ndarray:
    """Closed-form minimum-variance distortionless-response receive filter.

    w = B^-1 a / (a^H B^-1 a) with B the interference-plus-noise covariance
    of the filtered snapshot and a = A(theta0) x, so that w^H a = 1.
    """
    xv = asvec(x)
    a = target_response(scenario).apply(xv)
    norm_a = np.linalg.norm(a)
    if norm_a == 0.0:
        raise DegenerateTargetError(
            "waveform is annihilated by the target response")
    dim = a.size
    B = scenario.radar_noise * np.eye(dim, dtype=complex)
    for resp, (_, power) in zip(interferer_responses(scenario),
                                scenario.interferers):
        v = resp.apply(xv)
        B += power * np.outer(v, v.conj())
    cho = sla.cho_factor(B, lower=True)
    b_inv_a = sla.cho_solve(cho, a)
    denom = np.real(a.conj() @ b_inv_a)
    return b_inv_a / denom


def sensing_sinr(x, w, scenario: Scenario) -> float:
    """Filtered target power over filtered interference-plus-noise power."""
    xv = asvec(x)
    wv = asvec(w)
    signal = scenario.target_power * \
        np.abs(wv.conj() @ target_response(scenario).apply(xv)) ** 2
    noise = scenario.radar_noise * np.real(wv.conj() @ wv)
    for resp, (_, power) in zip(interferer_responses(scenario),
                                scenario.interferers):
        noise += power * np.abs(wv.conj() @ resp.apply(xv)) ** 2
    return float(signal / noise)


@dataclass(frozen=True, eq=False)
class SensingMatrices:
    """Quadratic forms of the sensing SINR at a fixed receive filter.

    x^H R_t x / (x^H R_i x + noise_floor) == sensing_sinr(x, w) for all x.
    """

    R_t: np.ndarray
    R_i: np.ndarray
    noise_floor: float


def build_sensing_matrices(w, scenario: Scenario) -> SensingMatrices:
    """R_t = sigma0^2 (A0^H w)(A0^H w)^H and the interference analogue."""
    wv = asvec(w)
    g0 = target_response(scenario).apply_adjoint(wv)
    R_t = scenario.target_power * np.outer(g0, g0.conj())
    dim = g0.size
    R_i = np.zeros((dim, dim), dtype=complex)
    for resp, (_, power) in zip(interferer_responses(scenario),
                                scenario.interferers):
        g = resp.apply_adjoint(wv)
        R_i += power * np.outer(g, g.conj())
    R_t = 0.5 * (R_t + R_t.conj().T)
    R_i = 0.5 * (R_i + R_i.conj().T)
    noise_floor = scenario.radar_noise * float(np.real(wv.conj() @ wv))
    return SensingMatrices(R_t=R_t, R_i=R_i, noise_floor=noise_floor)


def default_beampattern_grid() -> np.ndarray:
    """721 angles, -90 to +90 degrees in 0.25-degree steps, in radians."""
    return np.deg2rad(np.arange(-360, 361) * 0.25)


def beampattern(X, grid=None, scenario: Scenario | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Transmit beampattern a_t^T (X X^H / N) conj(a_t) in dB relative to peak.

    Returns (theta_grid, gain_db); the peak of gain_db is 0 dB.
    """
    if hasattr(X, "matrix"):
        X = X.matrix
    X = np.asarray(X, dtype=complex)
    if grid is None:
        grid = default_beampattern_grid()
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("beampattern grid must be nonempty")
    tx = X.shape[0]
    n = X.shape[1]
    steer = np.stack([tx_steering(theta, tx) for theta in grid])
    proj = steer @ X
    gain = np.sum(np.abs(proj) ** 2, axis=1) / n
    gain_db = 10.0 * np.log10(np.maximum(gain, 1e-300))
    return grid, gain_db - gain_db.max()


def composite_beampattern(x, w, grid=None,
                          scenario: Scenario | None = None,
                          tx_antennas: int | None = None,
                          rx_antennas: int | None = None,
                          symbols: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Receive-filtered composite pattern |w^H A(theta) x|^2, dB relative to peak.

    This is the beampattern the joint design actually shapes: the filter
    places the interference nulls while the waveform holds the target
    response, so the composite shows the mainlobe/null structure that a
    transmit-only pattern of a near-isotropic waveform cannot.
    """
    if scenario is not None:
        tx_antennas = scenario.tx_antennas
        rx_antennas = scenario.rx_antennas
        symbols = scenario.symbols
    if None in (tx_antennas, rx_antennas, symbols):
        raise ValueError("need scenario or explicit array dimensions")
    xv = asvec(x)
    wv = asvec(w)
    X = unvec(xv, tx_antennas, symbols)
    W = unvec(wv, rx_antennas, symbols)
    if grid is None:
        grid = default_beampattern_grid()
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("beampattern grid must be nonempty")
    steer_t = np.stack([tx_steering(theta, tx_antennas) for theta in grid])
    steer_r = np.stack([rx_steering(theta, rx_antennas) for theta in grid])
    rows_t = steer_t @ X
    rows_r = steer_r.conj() @ W
    response = np.sum(rows_r.conj() * rows_t, axis=1)
    gain_db = 10.0 * np.log10(np.maximum(np.abs(response) ** 2, 1e-300))
    return grid, gain_db - gain_db.max()
