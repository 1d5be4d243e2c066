import numpy as np
import pytest

from isacwave import (Scenario, generate_channel, generate_symbols,
                      mui_energy, sum_rate, zero_mui_precoder)
from isacwave.comm import comm_metrics, per_user_sinr


class TestMuiEnergy:
    def test_exact_inversion(self, rng):
        S = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        assert mui_energy(S, np.eye(3), S) == 0.0

    def test_zero_symbols(self, rng):
        H = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        X = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        assert mui_energy(X, H, np.zeros((2, 4))) == pytest.approx(
            np.linalg.norm(H @ X) ** 2)

    def test_against_entrywise_oracle(self, rng):
        H = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        X = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        S = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        residual = H @ X - S
        oracle = 0.0
        for m in range(2):
            for n in range(2):
                oracle += abs(residual[m, n]) ** 2
        assert mui_energy(X, H, S) == pytest.approx(oracle, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mui_energy(np.zeros((3, 4)), np.zeros((2, 2)), np.zeros((2, 4)))


class TestSumRate:
    def test_perfect_symbols_unit_noise(self):
        sc = Scenario(users=3, symbols=6, seed=2)
        S = generate_symbols(sc)
        assert sum_rate(S, np.eye(3), S, 1.0) == pytest.approx(3.0)

    def test_vanishes_at_high_noise(self, rng):
        H = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        X = rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5))
        S = rng.standard_normal((2, 5)) + 1j * rng.standard_normal((2, 5))
        assert sum_rate(X, H, S, 1e12) < 1e-10

    def test_scalar_oracle(self, rng):
        h = rng.standard_normal((1, 1)) + 1j * rng.standard_normal((1, 1))
        x = rng.standard_normal((1, 1)) + 1j * rng.standard_normal((1, 1))
        s = rng.standard_normal((1, 1)) + 1j * rng.standard_normal((1, 1))
        noise = 0.37
        sinr = abs(s[0, 0]) ** 2 / (abs(h[0, 0] * x[0, 0] - s[0, 0]) ** 2 + noise)
        assert sum_rate(x, h, s, noise) == pytest.approx(np.log2(1 + sinr))

    def test_monotone_in_noise(self, rng):
        H = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        X = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
        S = rng.standard_normal((2, 6)) + 1j * rng.standard_normal((2, 6))
        rates = [sum_rate(X, H, S, n) for n in np.logspace(-3, 3, 13)]
        assert all(a >= b for a, b in zip(rates, rates[1:]))

    def test_consistency_with_mui(self, rng):
        sc = Scenario(users=3, tx_antennas=6, symbols=5, seed=8)
        H = generate_channel(sc)
        S = generate_symbols(sc)
        X = rng.standard_normal((6, 5)) + 1j * rng.standard_normal((6, 5))
        noise = 0.2
        sinrs = per_user_sinr(X, H, S, noise)
        signal = np.mean(np.abs(S) ** 2, axis=1)
        distortion = signal / sinrs - noise
        assert np.sum(sc.symbols * distortion) == pytest.approx(
            mui_energy(X, H, S), rel=1e-10)

    def test_metrics_bundle(self, rng):
        sc = Scenario(users=2, tx_antennas=4, symbols=3, seed=1)
        H = generate_channel(sc)
        S = generate_symbols(sc)
        X = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        m = comm_metrics(X, H, S, 0.5)
        assert m.sum_rate == pytest.approx(
            np.sum(np.log2(1 + np.asarray(m.per_user_sinr))))
        assert m.mui_energy >= 0


class TestZeroMui:
    def test_identity_channel(self, rng):
        S = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        wf = zero_mui_precoder(np.eye(3), S, total_power=2.0)
        X = wf.matrix
        # proportional to S, Frobenius power P_max
        scale = np.vdot(S, X) / np.vdot(S, S)
        assert np.linalg.norm(X - scale * S) < 1e-12 * np.linalg.norm(S)
        assert np.linalg.norm(X) ** 2 == pytest.approx(2.0, rel=1e-12)
        assert not wf.cm_compliant

    def test_right_inverse_nulls_interference(self):
        sc = Scenario(users=4, tx_antennas=16, seed=6)
        H = generate_channel(sc)
        S = generate_symbols(sc)
        unscaled = H.conj().T @ np.linalg.solve(H @ H.conj().T, S)
        assert mui_energy(unscaled, H, S) < 1e-18 * np.linalg.norm(S) ** 2
        wf = zero_mui_precoder(H, S, sc.total_power)
        beta = np.vdot(S, H @ wf.matrix) / np.vdot(S, S)
        assert np.linalg.norm(H @ wf.matrix - beta * S) < 1e-10

    def test_power_normalization(self):
        sc = Scenario(seed=3)
        H = generate_channel(sc)
        S = generate_symbols(sc)
        wf = zero_mui_precoder(H, S, sc.total_power)
        assert np.linalg.norm(wf.x) ** 2 == pytest.approx(
            sc.total_power, rel=1e-12)

    def test_rank_deficient_fallback(self):
        H = np.array([[1.0, 0.0], [1.0, 0.0]], dtype=complex)
        S = np.ones((2, 3), dtype=complex)
        with pytest.warns(RuntimeWarning, match="rank-deficient"):
            wf = zero_mui_precoder(H, S, 1.0)
        assert np.isfinite(wf.x).all()

    def test_unscaled_residual_well_conditioned(self, rng):
        for seed in range(5):
            sc = Scenario(users=3, tx_antennas=12, seed=seed)
            H = generate_channel(sc)
            S = generate_symbols(sc)
            gram = H @ H.conj().T
            if np.linalg.cond(gram) >= 1e6:
                continue
            unscaled = H.conj().T @ np.linalg.solve(gram, S)
            assert mui_energy(unscaled, H, S) <= 1e-15 * np.linalg.norm(S) ** 2
