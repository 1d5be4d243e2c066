"""Consensus-ADMM inner solver for the waveform given a fixed receive filter.

Three local copies (communication, sensing, similarity) are tied to one
global waveform through scaled duals; the global iterate is projected onto
the constant-modulus set after every consensus step. The sensing block is a
QCQP solved through its KKT system, with the multiplier found by bisection
on the monotone constraint curve q(tau).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from . import comm, radar
from .model import Scenario, Waveform, asvec, unvec, vec


class DivergenceError(RuntimeError):
    """Non-finite values appeared in the ADMM iteration."""


@dataclass
class AdmmState:
    """Mutable solver state: consensus variable, local copies, scaled duals."""

    x: np.ndarray
    x_c: np.ndarray
    x_s: np.ndarray
    x_b: np.ndarray
    u_c: np.ndarray
    u_s: np.ndarray
    u_b: np.ndarray
    iteration: int = 0
    r_primal: float = math.inf
    s_dual: float = math.inf


@dataclass(frozen=True)
class QcqpDual:
    """Accepted multiplier of the sensing QCQP and its constraint value."""

    tau: float
    q_value: float


@dataclass
class AdmmTrace:
    """Per-iteration measurements of one inner solve."""

    iterations: list[int] = field(default_factory=list)
    r_primal: list[float] = field(default_factory=list)
    s_dual: list[float] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    mui: list[float] = field(default_factory=list)
    sinr_db: list[float] = field(default_factory=list)

    def append(self, iteration, r, s, objective, mui, sinr_db):
        self.iterations.append(int(iteration))
        self.r_primal.append(float(r))
        self.s_dual.append(float(s))
        self.objective.append(float(objective))
        self.mui.append(float(mui))
        self.sinr_db.append(float(sinr_db))

    def __len__(self):
        return len(self.iterations)


def _check_hermitian(matrix: np.ndarray, name: str):
    scale = max(1.0, float(np.abs(matrix).max(initial=0.0)))
    if np.abs(matrix - matrix.conj().T).max(initial=0.0) > 1e-12 * scale:
        raise ValueError(f"{name} must be Hermitian")


class CommBlockCache:
    """Factorization of (rho H^H H + gamma/2 I) reused across inner iterations.

    The stacked operator I_N (x) H makes the normal equations block-diagonal
    with N identical T-by-T blocks, so one small factorization serves all
    symbol slots.
    """

    def __init__(self, H: np.ndarray, S: np.ndarray, rho: float, gamma: float):
        H = np.asarray(H, dtype=complex)
        S = np.asarray(S, dtype=complex)
        self.tx_antennas = H.shape[1]
        self.symbols = S.shape[1]
        self.gamma = float(gamma)
        gram = rho * (H.conj().T @ H) + (gamma / 2.0) * np.eye(self.tx_antennas)
        self._cho = sla.cho_factor(gram, lower=True)
        self._rhs_base = rho * (H.conj().T @ S)

    def solve(self, v: np.ndarray) -> np.ndarray:
        V = unvec(v, self.tx_antennas, self.symbols)
        rhs = self._rhs_base + (self.gamma / 2.0) * V
        return vec(sla.cho_solve(self._cho, rhs))


def update_xc(x: np.ndarray, u_c: np.ndarray, cache: CommBlockCache) -> np.ndarray:
    """Communication-block proximal step, Tikhonov-regularized least squares."""
    return cache.solve(x - u_c)


class SensingBlockCache:
    """Whitened eigenbasis of the sensing QCQP, fixed while the filter is.

    With M0 = (1-rho) R_i + gamma/2 I = L L^H and C = L^-1 R_t L^-H = Q D Q^H,
    the KKT system (M0 + tau R_t) x = (gamma/2) v has the solution
    x(tau) = L^-H Q (I + tau D)^-1 z with z = Q^H L^-1 (gamma/2) v, and the
    constraint curve q(tau) = sum_i d_i |z_i|^2 / (1 + tau d_i)^2 costs O(n)
    per evaluation.
    """

    def __init__(self, R_i: np.ndarray, R_t: np.ndarray, rho: float,
                 gamma: float):
        R_i = np.asarray(R_i, dtype=complex)
        R_t = np.asarray(R_t, dtype=complex)
        _check_hermitian(R_i, "R_i")
        _check_hermitian(R_t, "R_t")
        n = R_i.shape[0]
        self.gamma = float(gamma)
        m0 = (1.0 - rho) * R_i + (gamma / 2.0) * np.eye(n)
        try:
            self._chol = sla.cholesky(m0, lower=True)
        except sla.LinAlgError as exc:
            raise ValueError("R_i violates the PSD contract") from exc
        z = sla.solve_triangular(self._chol, R_t, lower=True)
        c = sla.solve_triangular(self._chol, z.conj().T, lower=True).conj().T
        c = 0.5 * (c + c.conj().T)
        eigvals, eigvecs = np.linalg.eigh(c)
        if eigvals.min(initial=0.0) < -1e-8 * max(1.0, eigvals.max(initial=0.0)):
            raise ValueError("R_t violates the PSD contract")
        self._eigvals = np.clip(eigvals, 0.0, None)
        self._eigvecs = eigvecs

    def coords(self, v: np.ndarray) -> np.ndarray:
        """z = Q^H L^-1 (gamma/2) v."""
        y = sla.solve_triangular(self._chol, (self.gamma / 2.0) * v, lower=True)
        return self._eigvecs.conj().T @ y

    def q_at(self, z: np.ndarray, tau: float) -> float:
        damp = 1.0 + tau * self._eigvals
        return float(np.sum(self._eigvals * np.abs(z) ** 2 / damp ** 2))

    def solve_at(self, z: np.ndarray, tau: float) -> np.ndarray:
        y = self._eigvecs @ (z / (1.0 + tau * self._eigvals))
        return sla.solve_triangular(self._chol, y, lower=True, trans="C")

    def constraint_curve(self, v: np.ndarray, taus) -> np.ndarray:
        """q(tau) sampled at the given multipliers, for a fixed prox center."""
        z = self.coords(v)
        return np.array([self.q_at(z, t) for t in np.atleast_1d(taus)])


def update_xs(x: np.ndarray, u_s: np.ndarray, cache: SensingBlockCache,
              sigma0_sq: float, tol_bisect: float = 1e-8,
              max_bisect: int = 200) -> tuple[np.ndarray, QcqpDual]:
    """Sensing-block QCQP step: try tau = 0, else bisect q(tau) = sigma0^2."""
    if sigma0_sq <= 0:
        raise ValueError("sigma0_sq must be > 0")
    z = cache.coords(x - u_s)
    q0 = cache.q_at(z, 0.0)
    if q0 <= sigma0_sq:
        return cache.solve_at(z, 0.0), QcqpDual(tau=0.0, q_value=q0)
    tau_hi = 1.0
    for _ in range(400):
        if cache.q_at(z, tau_hi) < sigma0_sq:
            break
        tau_hi *= 2.0
    else:  # q(tau) -> 0, so the bracket always closes; guard anyway
        raise DivergenceError("failed to bracket the QCQP multiplier")
    tau_lo = 0.0
    tau = tau_hi
    q = cache.q_at(z, tau)
    for _ in range(max_bisect):
        tau = 0.5 * (tau_lo + tau_hi)
        q = cache.q_at(z, tau)
        if abs(q - sigma0_sq) <= tol_bisect * sigma0_sq:
            break
        if q > sigma0_sq:
            tau_lo = tau
        else:
            tau_hi = tau
    return cache.solve_at(z, tau), QcqpDual(tau=tau, q_value=q)


def update_xb(x: np.ndarray, u_b: np.ndarray, x0: np.ndarray, rho: float,
              similarity_weight: float, gamma: float) -> np.ndarray:
    """Similarity-block step: convex combination of x0 and the prox center."""
    w_sim = (1.0 - rho) * similarity_weight
    return (w_sim * x0 + (gamma / 2.0) * (x - u_b)) / (w_sim + gamma / 2.0)


def consensus_update(x_c, x_s, x_b, u_c, u_s, u_b) -> np.ndarray:
    """Least-squares average of the dual-shifted local copies."""
    return (x_c + u_c + x_s + u_s + x_b + u_b) / 3.0


def cm_project(x: np.ndarray, amplitude: float) -> np.ndarray:
    """Entrywise snap to modulus `amplitude`; zero entries map to +amplitude."""
    mag = np.abs(x)
    safe = np.where(mag == 0.0, 1.0, mag)
    with np.errstate(invalid="ignore"):  # non-finite inputs surface later
        return np.where(mag == 0.0, amplitude + 0.0j, amplitude * (x / safe))


def project_cm(x, total_power: float, tx_antennas: int, symbols: int) -> Waveform:
    """Project a stacked waveform onto the constant-modulus set."""
    amplitude = math.sqrt(total_power / (tx_antennas * symbols))
    return Waveform(x=cm_project(asvec(x), amplitude), tx_antennas=tx_antennas,
                    symbols=symbols, cm_compliant=True)


def dual_update(u_c, u_s, u_b, x_c, x_s, x_b, x):
    """Scaled dual ascent u_i <- u_i + (x_i - x)."""
    return u_c + (x_c - x), u_s + (x_s - x), u_b + (x_b - x)


def residuals(x_c, x_s, x_b, x, x_prev, gamma: float) -> tuple[float, float]:
    """Sum-of-norms primal residual and the scaled dual residual."""
    r = (np.linalg.norm(x_c - x) + np.linalg.norm(x_s - x)
         + np.linalg.norm(x_b - x))
    s = gamma * np.linalg.norm(x - x_prev)
    return float(r), float(s)


def _objective_terms(xv, w, scenario, H, S, x0):
    """(mui, sinr, objective) of the unified trade-off cost at fixed filter."""
    X = unvec(xv, scenario.tx_antennas, scenario.symbols)
    mui = comm.mui_energy(X, H, S)
    sinr = radar.sensing_sinr(xv, w, scenario)
    rho = scenario.rho
    value = rho * mui
    if rho < 1.0:
        inv_sinr = 1.0 / sinr if sinr > 0 else math.inf
        value += (1.0 - rho) * inv_sinr
        value += (1.0 - rho) * scenario.similarity_weight \
            * float(np.linalg.norm(xv - x0) ** 2)
    return mui, sinr, float(value)


def composite_objective(x, w, scenario: Scenario, H, S, x0) -> float:
    """Unified cost: rho * MUI + (1-rho)/SINR + (1-rho)*lambda*||x - x0||^2."""
    return _objective_terms(asvec(x), asvec(w), scenario, H, S, asvec(x0))[2]


def solve_waveform(x_init, w, scenario: Scenario, H, S, x0, *,
                   paper_stopping: bool = False, project: bool = True,
                   collect_trace: bool = True, iteration_offset: int = 0,
                   callback=None) -> tuple[Waveform, AdmmTrace]:
    """Run the consensus-ADMM inner loop for the waveform at fixed filter.

    Each iteration performs the three local proximal updates, the consensus
    average, the constant-modulus projection (skippable for convex-mode
    diagnostics via ``project=False``), the scaled dual update, and the
    stopping check. Stops on the residual criterion (conjunction by default,
    the verbatim disjunction with ``paper_stopping=True``) or at
    ``scenario.max_inner`` iterations.
    """
    xv = asvec(x_init).copy()
    wv = asvec(w)
    x0v = asvec(x0)
    n = xv.size
    amplitude = scenario.cm_amplitude

    comm_cache = CommBlockCache(H, S, scenario.rho, scenario.penalty)
    matrices = radar.build_sensing_matrices(wv, scenario)
    sensing_cache = SensingBlockCache(matrices.R_i, matrices.R_t,
                                      scenario.rho, scenario.penalty)

    state = AdmmState(
        x=xv,
        x_c=xv.copy(), x_s=xv.copy(), x_b=xv.copy(),
        u_c=np.zeros(n, dtype=complex),
        u_s=np.zeros(n, dtype=complex),
        u_b=np.zeros(n, dtype=complex),
    )
    trace = AdmmTrace()

    for t in range(scenario.max_inner):
        state.x_c = update_xc(state.x, state.u_c, comm_cache)
        state.x_s, _ = update_xs(state.x, state.u_s, sensing_cache,
                                 scenario.target_power)
        state.x_b = update_xb(state.x, state.u_b, x0v, scenario.rho,
                              scenario.similarity_weight, scenario.penalty)
        x_prev = state.x
        state.x = consensus_update(state.x_c, state.x_s, state.x_b,
                                   state.u_c, state.u_s, state.u_b)
        if project:
            state.x = cm_project(state.x, amplitude)
        state.u_c, state.u_s, state.u_b = dual_update(
            state.u_c, state.u_s, state.u_b,
            state.x_c, state.x_s, state.x_b, state.x)
        state.r_primal, state.s_dual = residuals(
            state.x_c, state.x_s, state.x_b, state.x, x_prev,
            scenario.penalty)
        state.iteration = t + 1

        if not np.all(np.isfinite(state.x)):
            raise DivergenceError(f"non-finite waveform at inner iteration {t}")

        if collect_trace:
            mui, sinr, objective = _objective_terms(
                state.x, wv, scenario, H, S, x0v)
            sinr_db = 10.0 * math.log10(max(sinr, 1e-300))
            trace.append(iteration_offset + t, state.r_primal, state.s_dual,
                         objective, mui, sinr_db)
        if callback is not None:
            callback(t, state)

        if paper_stopping:
            stop = (state.r_primal <= scenario.eps_primal
                    or state.s_dual <= scenario.eps_dual)
        else:
            stop = (state.r_primal <= scenario.eps_primal
                    and state.s_dual <= scenario.eps_dual)
        if stop:
            break

    waveform = Waveform(x=state.x, tx_antennas=scenario.tx_antennas,
                        symbols=scenario.symbols, cm_compliant=project)
    return waveform, trace
