import csv
import json
import math

import numpy as np
import pytest

from isacwave import (Scenario, SweepSpec, alternating_optimize,
                      emit_beampattern, emit_results, generate_channel,
                      generate_symbols, is_cm_compliant, lfm_reference,
                      mvdr_filter, pg_baseline, run_method, run_sweep,
                      sensing_sinr, solve_waveform, steered_reference,
                      sum_rate)
from isacwave.driver import (METHODS, apply_axis, initial_waveform,
                             pg_objective_and_grad, run_id)


class TestReferences:
    def test_lfm_constant_modulus(self, paper_scenario):
        wf = lfm_reference(paper_scenario)
        assert is_cm_compliant(wf.x, paper_scenario.cm_amplitude)

    def test_lfm_near_orthogonal_rows(self, paper_scenario):
        X0 = lfm_reference(paper_scenario).matrix
        gram = X0 @ X0.conj().T
        target = (paper_scenario.total_power / paper_scenario.tx_antennas) \
            * np.eye(paper_scenario.tx_antennas)
        rel = np.linalg.norm(gram - target) / np.linalg.norm(target)
        assert rel < 0.1

    def test_lfm_first_column_constant(self, paper_scenario):
        X0 = lfm_reference(paper_scenario).matrix
        col = X0[:, 0]
        assert np.allclose(col, paper_scenario.cm_amplitude * np.ones_like(col))

    def test_steered_reference_points_at_target(self, paper_scenario):
        from isacwave import beampattern
        wf = steered_reference(paper_scenario)
        assert is_cm_compliant(wf.x, paper_scenario.cm_amplitude)
        thetas, gains = beampattern(wf)
        peak = thetas[np.argmax(gains)]
        assert peak == pytest.approx(paper_scenario.target_angle,
                                     abs=np.deg2rad(0.3))


class TestInit:
    def test_policies_are_cm(self, desk_scenario):
        H = generate_channel(desk_scenario)
        S = generate_symbols(desk_scenario)
        for policy in ("auto", "zero_mui", "reference", "lfm", "random"):
            x = initial_waveform(desk_scenario, H, S, policy)
            assert is_cm_compliant(x, desk_scenario.cm_amplitude)

    def test_auto_follows_rho(self, desk_scenario):
        H = generate_channel(desk_scenario)
        S = generate_symbols(desk_scenario)
        low = initial_waveform(desk_scenario.with_(rho=0.2), H, S)
        ref = initial_waveform(desk_scenario, H, S, "reference")
        assert np.array_equal(low, ref)
        high = initial_waveform(desk_scenario.with_(rho=0.8), H, S)
        zm = initial_waveform(desk_scenario, H, S, "zero_mui")
        assert np.array_equal(high, zm)

    def test_random_policy_deterministic(self, desk_scenario):
        H = generate_channel(desk_scenario)
        S = generate_symbols(desk_scenario)
        a = initial_waveform(desk_scenario, H, S, "random")
        b = initial_waveform(desk_scenario, H, S, "random")
        assert np.array_equal(a, b)

    def test_unknown_policy(self, desk_scenario):
        H = generate_channel(desk_scenario)
        S = generate_symbols(desk_scenario)
        with pytest.raises(ValueError):
            initial_waveform(desk_scenario, H, S, "bogus")


class TestAlternating:
    def test_filter_step_never_decreases_sinr(self, desk_scenario):
        sc = desk_scenario.with_(max_inner=60)
        H = generate_channel(sc)
        S = generate_symbols(sc)
        x0 = steered_reference(sc).x
        x = initial_waveform(sc, H, S)
        w = mvdr_filter(x, sc)
        for _ in range(3):
            wave, _ = solve_waveform(x, w, sc, H, S, x0, collect_trace=False)
            x = wave.x
            before = sensing_sinr(x, w, sc)
            w = mvdr_filter(x, sc)
            after = sensing_sinr(x, w, sc)
            assert after >= before - 1e-9

    def test_single_outer_iteration(self, desk_scenario):
        sc = desk_scenario.with_(max_outer=1)
        H = generate_channel(sc)
        S = generate_symbols(sc)
        res = alternating_optimize(sc, H, S, collect_trace=False)
        assert len(res.objective_trace) == 1
        assert len(res.sinr_trace_db) == 1

    def test_result_metrics_finite(self, desk_scenario):
        H = generate_channel(desk_scenario)
        S = generate_symbols(desk_scenario)
        res = alternating_optimize(desk_scenario, H, S)
        assert res.method == "proposed"
        assert res.waveform.cm_compliant
        assert np.isfinite(res.metrics.sum_rate)
        assert np.isfinite(res.sinr_db)
        assert len(res.inner_trace) > 0
        assert all(np.isfinite(res.objective_trace))


class TestPgBaseline:
    def test_gradient_matches_finite_differences(self, desk_scenario, rng):
        sc = desk_scenario
        H = generate_channel(sc)
        S = generate_symbols(sc)
        x0 = steered_reference(sc).x
        x_init = initial_waveform(sc, H, S)
        w = mvdr_filter(x_init, sc)
        n = x_init.size
        h = 1e-6
        for _ in range(5):
            x = sc.cm_amplitude * np.exp(
                1j * rng.uniform(0, 2 * np.pi, n))
            value, grad = pg_objective_and_grad(x, w, sc, H, S, x0)
            idx = rng.integers(0, n, size=4)
            for i in idx:
                for direction in (1.0, 1.0j):
                    e = np.zeros(n, complex)
                    e[i] = direction * h
                    fp, _ = pg_objective_and_grad(x + e, w, sc, H, S, x0)
                    fm, _ = pg_objective_and_grad(x - e, w, sc, H, S, x0)
                    numeric = (fp - fm) / (2 * h)
                    analytic = 2 * (grad[i].real if direction == 1.0
                                    else grad[i].imag)
                    assert abs(numeric - analytic) <= 1e-5 * max(
                        1.0, abs(numeric))

    def test_objective_non_increasing(self, desk_scenario):
        sc = desk_scenario
        H = generate_channel(sc)
        S = generate_symbols(sc)
        res = pg_baseline(sc, H, S)
        assert res.method == "pg_baseline"
        assert np.isfinite(res.objective_trace).all()

    def test_rho_one_matches_proposed_rate(self):
        rates_pg, rates_admm = [], []
        for seed in range(10):
            sc = Scenario(tx_antennas=6, rx_antennas=6, symbols=6, users=2,
                          rho=1.0, max_inner=150, max_outer=8, seed=seed)
            H = generate_channel(sc)
            S = generate_symbols(sc)
            rates_pg.append(pg_baseline(sc, H, S).metrics.sum_rate)
            rates_admm.append(
                alternating_optimize(sc, H, S,
                                     collect_trace=False).metrics.sum_rate)
        mean_pg = np.mean(rates_pg)
        mean_admm = np.mean(rates_admm)
        assert abs(mean_pg - mean_admm) <= 0.1 * mean_admm


class TestSweep:
    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SweepSpec(axis="bogus", values=(1.0,), seeds=(0,), methods=("lfm",))
        with pytest.raises(ValueError):
            SweepSpec(axis="rho", values=(0.5, 0.2), seeds=(0,), methods=("lfm",))
        with pytest.raises(ValueError):
            SweepSpec(axis="rho", values=(0.2,), seeds=(), methods=("lfm",))
        with pytest.raises(ValueError):
            SweepSpec(axis="rho", values=(0.2,), seeds=(0,), methods=("nope",))

    def test_single_cell(self, desk_scenario):
        spec = SweepSpec(axis="rho", values=(0.3,), seeds=(5,),
                         methods=("lfm",))
        results = run_sweep(spec, desk_scenario)
        assert len(results) == 1
        assert results[0].method == "lfm"
        assert results[0].axis_value == 0.3
        assert results[0].scenario.seed == 5

    def test_snr_axis_sets_noise(self, desk_scenario):
        for snr in (0.0, 5.0, 10.0):
            sc = apply_axis(desk_scenario, "snr_db", snr)
            assert sc.comm_noise == pytest.approx(
                desk_scenario.total_power / 10 ** (snr / 10))

    def test_sweep_deterministic_bytes(self, desk_scenario, tmp_path):
        sc = desk_scenario.with_(max_inner=40, max_outer=4)
        spec = SweepSpec(axis="rho", values=(0.2, 0.8), seeds=(0, 1),
                         methods=("lfm", "zero_mui"))
        for name in ("a", "b"):
            emit_results(run_sweep(spec, sc), tmp_path / name)
        assert (tmp_path / "a" / "runs.csv").read_bytes() == \
            (tmp_path / "b" / "runs.csv").read_bytes()


class TestEmit:
    def test_empty_results_header_only(self, tmp_path):
        paths = emit_results([], tmp_path)
        lines = paths["runs"].read_text().splitlines()
        assert lines == ["method,axis_value,seed,sum_rate,sinr_db,mui"]

    def test_round_trip(self, desk_scenario, tmp_path):
        H = generate_channel(desk_scenario)
        S = generate_symbols(desk_scenario)
        results = [run_method(m, desk_scenario, H, S)
                   for m in ("lfm", "zero_mui")]
        paths = emit_results(results, tmp_path)
        with paths["runs"].open() as fh:
            rows = list(csv.DictReader(fh))
        by_method = {r.method: r for r in results}
        assert len(rows) == 2
        for row in rows:
            res = by_method[row["method"]]
            assert float(row["sum_rate"]) == pytest.approx(
                res.metrics.sum_rate, abs=1e-9)
            assert float(row["sinr_db"]) == pytest.approx(res.sinr_db, abs=1e-9)
            assert float(row["mui"]) == pytest.approx(
                res.metrics.mui_energy, abs=1e-9)

    def test_manifest_contains_scenario_keys(self, desk_scenario, tmp_path):
        H = generate_channel(desk_scenario)
        S = generate_symbols(desk_scenario)
        results = [run_method("lfm", desk_scenario, H, S)]
        paths = emit_results(results, tmp_path)
        manifest = json.loads(paths["manifest"].read_text())
        from isacwave import scenario_to_dict
        assert set(scenario_to_dict(desk_scenario)) <= set(manifest["scenario"])
        assert manifest["method_labels"]["pg_baseline"] == "pg_baseline (stand-in)"

    def test_trace_files(self, desk_scenario, tmp_path):
        sc = desk_scenario.with_(max_inner=20, max_outer=3)
        H = generate_channel(sc)
        S = generate_symbols(sc)
        res = run_method("proposed", sc, H, S, collect_trace=True)
        paths = emit_results([res], tmp_path)
        trace_path = tmp_path / f"trace_{run_id(res)}.csv"
        assert trace_path.exists()
        with trace_path.open() as fh:
            header = fh.readline().strip().split(",")
        assert header == ["iter", "r_primal", "s_dual", "objective", "mui",
                          "sinr_sensing_db"]
        outer_path = tmp_path / f"outer_trace_{run_id(res)}.csv"
        assert outer_path.exists()

    def test_beampattern_csv(self, desk_scenario, tmp_path):
        H = generate_channel(desk_scenario)
        S = generate_symbols(desk_scenario)
        results = [run_method("lfm", desk_scenario, H, S)]
        path = emit_beampattern(results, tmp_path / "beampattern.csv")
        with path.open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 721
        gains = np.array([float(r["gain_db"]) for r in rows])
        assert gains.max() == pytest.approx(0.0, abs=1e-9)
        assert {r["method"] for r in rows} == {"lfm"}


class TestMethods:
    def test_all_methods_run(self, desk_scenario):
        H = generate_channel(desk_scenario)
        S = generate_symbols(desk_scenario)
        for method in METHODS:
            res = run_method(method, desk_scenario, H, S)
            assert res.method == method
            assert len(res.objective_trace) >= 1
            assert np.isfinite(res.metrics.sum_rate)

    def test_unknown_method(self, desk_scenario):
        H = generate_channel(desk_scenario)
        S = generate_symbols(desk_scenario)
        with pytest.raises(ValueError):
            run_method("nope", desk_scenario, H, S)

    def test_lfm_flattest_across_snr(self, desk_scenario):
        sc = desk_scenario.with_(max_inner=60, max_outer=6)
        spec = SweepSpec(axis="snr_db", values=(0.0, 15.0, 30.0),
                         seeds=(0, 1), methods=METHODS)
        results = run_sweep(spec, sc)
        ranges = {}
        for method in METHODS:
            means = []
            for value in spec.values:
                rates = [r.metrics.sum_rate for r in results
                         if r.method == method and r.axis_value == value]
                means.append(np.mean(rates))
            ranges[method] = max(means) - min(means)
        assert ranges["lfm"] == min(ranges.values())
