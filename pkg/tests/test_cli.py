"""Command line and benchmark harness tests."""

import hashlib
import json
import os

import numpy as np
import pytest

from tailamp import cli, riskmodel, stochfem
from tailamp.cli import (
    AGG_COLUMNS,
    RAW_COLUMNS,
    BenchConfig,
    estimate_once,
    format_row,
    main,
    run_bench,
    run_seed,
    truth_sidecar,
)

TINY = dict(
    benchmark="bar1d",
    qoi="compliance",
    budgets=(300, 600),
    repetitions=3,
    seed=1,
    n_scenarios=64,
)


@pytest.fixture(scope="module")
def small_ensemble():
    return stochfem.build_scenario_ensemble("bar1d", 64, seed=1)


class TestRunSeed:
    def test_matches_hash_contract(self):
        digest = hashlib.sha256(b"1:mc:2000:0").digest()
        want = int.from_bytes(digest[:8], "big") >> 1
        assert run_seed(1, "mc", 2000, 0) == want

    def test_cells_get_distinct_seeds(self):
        seeds = {
            run_seed(1, method, budget, rep)
            for method in ("mc", "mliqae")
            for budget in (2000, 4000)
            for rep in range(50)
        }
        assert len(seeds) == 200

    def test_fits_in_signed_64_bits(self):
        for rep in range(100):
            s = run_seed(7, "mliqae", 128000, rep)
            assert 0 <= s < 2**63


class TestEstimateOnce:
    def test_single_sample_monte_carlo(self, small_ensemble):
        row = estimate_once(small_ensemble, "compliance", "mc", 1, seed=5)
        assert row.oracle_calls == 1
        assert not row.failed
        assert np.isfinite(row.cvar_est)

    def test_same_seed_is_identical(self, small_ensemble):
        for method in ("mc", "mliqae"):
            a = estimate_once(small_ensemble, "compliance", method, 2000, seed=9)
            b = estimate_once(small_ensemble, "compliance", method, 2000, seed=9)
            assert a == b

    def test_row_is_internally_consistent(self, small_ensemble):
        row = estimate_once(small_ensemble, "compliance", "mliqae", 4000, seed=2)
        s = riskmodel.ScenarioSet(
            small_ensemble.probs,
            small_ensemble.responses["compliance"],
            small_ensemble.alpha_level,
        )
        assert row.cvar_true == pytest.approx(riskmodel.discrete_cvar(s), rel=1e-15)
        assert row.abs_err == pytest.approx(abs(row.cvar_est - row.cvar_true), rel=1e-15)
        assert row.oracle_calls <= 4000
        assert row.rounds >= 1

    def test_unknown_method_raises(self, small_ensemble):
        with pytest.raises(ValueError):
            estimate_once(small_ensemble, "compliance", "quantum", 100, seed=0)


class TestBenchConfig:
    def test_defaults_are_valid(self):
        cfg = BenchConfig()
        assert cfg.budgets == cli.DEFAULT_BUDGETS

    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            BenchConfig(benchmark="torus")
        with pytest.raises(ValueError):
            BenchConfig(qoi="mass")
        with pytest.raises(ValueError):
            BenchConfig(budgets=(4000, 2000))
        with pytest.raises(ValueError):
            BenchConfig(budgets=())
        with pytest.raises(ValueError):
            BenchConfig(methods=("mc", "abacus"))
        with pytest.raises(ValueError):
            BenchConfig(repetitions=0)


class TestRunBench:
    def test_row_count_and_sort_order(self, small_ensemble):
        cfg = BenchConfig(**TINY)
        rows, agg = run_bench(cfg, ens=small_ensemble)
        assert len(rows) == 2 * 2 * 3
        keys = [(r.method, r.budget) for r in rows]
        assert keys == sorted(keys)
        assert len(agg) == 4

    def test_aggregates_recompute_from_raw(self, small_ensemble):
        cfg = BenchConfig(**TINY)
        rows, agg = run_bench(cfg, ens=small_ensemble)
        for method, budget, mean_err, med_err, std_err, fail_rate in agg:
            errs = np.array(
                [r.abs_err for r in rows if r.method == method and r.budget == budget]
            )
            fails = np.array(
                [r.failed for r in rows if r.method == method and r.budget == budget]
            )
            assert mean_err == pytest.approx(float(np.mean(errs)), rel=1e-12)
            assert med_err == pytest.approx(float(np.median(errs)), rel=1e-12)
            assert std_err == pytest.approx(float(np.std(errs, ddof=1)), rel=1e-12)
            assert fail_rate == pytest.approx(float(np.mean(fails)), abs=1e-15)

    def test_monte_carlo_error_shrinks_with_budget(self, small_ensemble):
        cfg = BenchConfig(
            benchmark="bar1d",
            budgets=(500, 2000, 8000, 32000),
            repetitions=12,
            methods=("mc",),
            seed=1,
            n_scenarios=64,
        )
        rows, agg = run_bench(cfg, ens=small_ensemble)
        medians = [rec[3] for rec in agg]
        inversions = sum(b > a for a, b in zip(medians, medians[1:]))
        assert inversions <= 1
        assert medians[-1] < medians[0]

    def test_parallel_run_is_byte_identical(self, small_ensemble, monkeypatch):
        cfg = BenchConfig(**TINY)
        serial_rows, serial_agg = run_bench(cfg, ens=small_ensemble)
        monkeypatch.setenv(cli.WORKERS_ENV, "2")
        par_rows, par_agg = run_bench(cfg, ens=small_ensemble)
        assert [format_row(r) for r in par_rows] == [format_row(r) for r in serial_rows]
        assert par_agg == serial_agg

    def test_rerun_is_deterministic(self, small_ensemble):
        cfg = BenchConfig(**TINY)
        a = run_bench(cfg, ens=small_ensemble)
        b = run_bench(cfg, ens=small_ensemble)
        assert [format_row(r) for r in a[0]] == [format_row(r) for r in b[0]]


class TestTruthSidecar:
    def test_matches_direct_recomputation(self, small_ensemble):
        side = truth_sidecar(small_ensemble)
        assert set(side["qois"]) == set(stochfem.QOI_NAMES)
        for name in stochfem.QOI_NAMES:
            s = riskmodel.ScenarioSet(
                small_ensemble.probs,
                small_ensemble.responses[name],
                small_ensemble.alpha_level,
            )
            eta = riskmodel.var_threshold(s)
            tn = riskmodel.normalize_hinge(s, eta)
            rec = side["qois"][name]
            assert rec["eta"] == eta
            assert rec["a"] == tn.a
            assert rec["cvar"] == riskmodel.discrete_cvar(s)


class TestCommands:
    def generate(self, tmp_path, seed=3):
        rc = main(
            [
                "generate",
                "--benchmark",
                "bar1d",
                "--seed",
                str(seed),
                "--n-scenarios",
                "64",
                "--out-dir",
                str(tmp_path),
            ]
        )
        assert rc == 0
        ens_path = tmp_path / f"bar1d_seed{seed}.ensemble.txt"
        truth_path = tmp_path / f"bar1d_seed{seed}.truth.json"
        assert ens_path.exists() and truth_path.exists()
        return ens_path, truth_path

    def test_generate_writes_consistent_pair(self, tmp_path):
        ens_path, truth_path = self.generate(tmp_path)
        ens = stochfem.read_ensemble(ens_path)
        side = json.loads(truth_path.read_text())
        s = riskmodel.ScenarioSet(
            ens.probs, ens.responses["compliance"], ens.alpha_level
        )
        assert side["qois"]["compliance"]["cvar"] == pytest.approx(
            riskmodel.discrete_cvar(s), rel=1e-15
        )
        assert side["n_scenarios"] == 64

    def test_generate_twice_is_byte_identical(self, tmp_path):
        ens_path, truth_path = self.generate(tmp_path)
        first = (ens_path.read_bytes(), truth_path.read_bytes())
        self.generate(tmp_path)
        assert (ens_path.read_bytes(), truth_path.read_bytes()) == first

    def test_estimate_prints_one_row(self, tmp_path, capsys):
        ens_path, _ = self.generate(tmp_path)
        capsys.readouterr()
        rc = main(
            [
                "estimate",
                "--ensemble",
                str(ens_path),
                "--method",
                "mc",
                "--budget",
                "100",
                "--seed",
                "4",
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0] == ",".join(RAW_COLUMNS)
        cells = out[1].split(",")
        assert len(cells) == len(RAW_COLUMNS)
        assert cells[0] == "mc"
        assert cells[2] == "100"

    def test_bench_writes_both_csv_files(self, tmp_path, capsys):
        rc = main(
            [
                "bench",
                "--benchmark",
                "bar1d",
                "--seed",
                "1",
                "--n-scenarios",
                "64",
                "--reps",
                "2",
                "--budgets",
                "300,600",
                "--out-dir",
                str(tmp_path),
            ]
        )
        assert rc == 0
        raw = (tmp_path / "bar1d_compliance_raw.csv").read_text().splitlines()
        agg = (tmp_path / "bar1d_compliance_agg.csv").read_text().splitlines()
        assert raw[0] == ",".join(RAW_COLUMNS)
        assert agg[0] == ",".join(AGG_COLUMNS)
        assert len(raw) == 1 + 2 * 2 * 2
        assert len(agg) == 1 + 4

    def test_estimate_missing_file_exits_nonzero(self, tmp_path, capsys):
        rc = main(
            [
                "estimate",
                "--ensemble",
                str(tmp_path / "absent.txt"),
                "--method",
                "mc",
                "--budget",
                "10",
            ]
        )
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_config_field_exits_nonzero(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"benchmark": "bar1d", "spam": 1}))
        rc = main(["bench", "--config", str(cfg_path), "--out-dir", str(tmp_path)])
        assert rc == 1
        assert "unknown config fields" in capsys.readouterr().err

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(
            json.dumps(
                {
                    "benchmark": "bar1d",
                    "n_scenarios": 64,
                    "repetitions": 1,
                    "budgets": [300],
                    "methods": ["mc"],
                }
            )
        )
        rc = main(
            [
                "bench",
                "--config",
                str(cfg_path),
                "--seed",
                "2",
                "--out-dir",
                str(tmp_path),
            ]
        )
        assert rc == 0
        raw = (tmp_path / "bar1d_compliance_raw.csv").read_text().splitlines()
        assert len(raw) == 2
