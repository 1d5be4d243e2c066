"""Communication-side metrics and the Zero-MUI baseline precoder."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import Waveform, asvec, unvec


@dataclass(frozen=True)
class CommMetrics:
    mui_energy: float
    per_user_sinr: tuple[float, ...]
    sum_rate: float


def mui_energy(X, H: np.ndarray, S: np.ndarray) -> float:
    """Total multi-user interference energy ||HX - S||_F^2."""
    if hasattr(X, "matrix"):
        X = X.matrix
    X = np.asarray(X)
    H = np.asarray(H)
    S = np.asarray(S)
    if H.shape[1] != X.shape[0] or (H.shape[0], X.shape[1]) != S.shape:
        raise ValueError(
            f"dimension mismatch: H {H.shape}, X {X.shape}, S {S.shape}")
    return float(np.linalg.norm(H @ X - S) ** 2)


def per_user_sinr(X, H: np.ndarray, S: np.ndarray, noise_power: float) -> np.ndarray:
    """Symbol-level SINR per user: constellation power over residual-plus-noise.

    SINR_m = mean_n |s_mn|^2 / (mean_n |(HX - S)_mn|^2 + sigma_z^2).
    """
    if hasattr(X, "matrix"):
        X = X.matrix
    residual = np.asarray(H) @ np.asarray(X) - np.asarray(S)
    signal = np.mean(np.abs(S) ** 2, axis=1)
    distortion = np.mean(np.abs(residual) ** 2, axis=1)
    return signal / (distortion + noise_power)


def sum_rate(X, H: np.ndarray, S: np.ndarray, noise_power: float) -> float:
    """Achievable sum rate sum_m log2(1 + SINR_m) in bits/s/Hz."""
    return float(np.sum(np.log2(1.0 + per_user_sinr(X, H, S, noise_power))))


def comm_metrics(X, H: np.ndarray, S: np.ndarray, noise_power: float) -> CommMetrics:
    sinrs = per_user_sinr(X, H, S, noise_power)
    return CommMetrics(
        mui_energy=mui_energy(X, H, S),
        per_user_sinr=tuple(float(v) for v in sinrs),
        sum_rate=float(np.sum(np.log2(1.0 + sinrs))),
    )


def zero_mui_precoder(H: np.ndarray, S: np.ndarray, total_power: float) -> Waveform:
    """Right-inverse precoder X = H^H (H H^H)^-1 S, Frobenius-rescaled to P_max.

    The unscaled solution has zero MUI; the returned waveform is generally not
    constant-modulus and is flagged as such.
    """
    H = np.asarray(H, dtype=complex)
    S = np.asarray(S, dtype=complex)
    gram = H @ H.conj().T
    try:
        X = H.conj().T @ np.linalg.solve(gram, S)
    except np.linalg.LinAlgError:
        warnings.warn("rank-deficient channel; falling back to pseudo-inverse",
                      RuntimeWarning)
        X = np.linalg.pinv(H) @ S
    norm = np.linalg.norm(X)
    if norm == 0.0:
        raise ValueError("zero-MUI precoder produced an all-zero waveform")
    X = X * np.sqrt(total_power) / norm
    tx, n = X.shape
    return Waveform(x=X.reshape(-1, order="F"), tx_antennas=tx, symbols=n,
                    cm_compliant=False)
