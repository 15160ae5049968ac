"""Full-system acceptance checks.

Each test pins one externally meaningful guarantee of the package: the
worked two-qubit example is reproduced state by state, interval inference
reproduces its reference endpoints, the controller keeps its coverage and
convergence-rate promises on seeded sweeps, the mechanics kernels match
closed forms, and the benchmark harness is bit-deterministic.
"""

import math
import time

import numpy as np
import pytest
import scipy.stats as sps

from tailamp.cli import BenchConfig, format_row, run_bench
from tailamp.intervals import theta_preimage
from tailamp.mliqae import ControllerConfig, run
from tailamp.qsim import (
    AnalyticOracle,
    OracleSpec,
    apply_grover,
    apply_oracle,
    build_oracle_state,
    reflect_success,
    reflect_zero,
    success_probability,
)
from tailamp.riskmodel import (
    ScenarioSet,
    cvar_from_amplitude,
    discrete_cvar,
    normalize_hinge,
    var_threshold,
)
from tailamp.stats import clopper_pearson
from tailamp.stochfem import (
    PlaneStressSolver,
    build_bar_mesh,
    build_cantilever_mesh,
    solve_bar_1d,
    solve_plane_stress_q4,
)

# Worked two-qubit example: four equally likely scenarios with response
# rotation angles (0, 0.70, 1.20, 1.80).
WORKED_ANGLES = (0.0, 0.70, 1.20, 1.80)

STATE_PREPARED = (
    0.500000, 0.000000, 0.469686, 0.171449,
    0.412668, 0.282321, 0.310805, 0.391663,
)
STATE_AFTER_SUCCESS_FLIP = (
    0.500000, 0.000000, 0.469686, -0.171449,
    0.412668, -0.282321, 0.310805, -0.391663,
)
STATE_AFTER_UNPREPARE = (
    0.474999, -0.637526, 0.206179, 0.171507,
    0.407422, 0.315417, -0.088601, 0.150602,
)
STATE_AFTER_ZERO_FLIP = (
    -0.474999, -0.637526, 0.206179, 0.171507,
    0.407422, 0.315417, -0.088601, 0.150602,
)
STATE_AFTER_ONE_ITERATE = (
    -0.025001, 0.000000, -0.023485, 0.334325,
    -0.020634, 0.550526, -0.015541, 0.763743,
)

SWEEP_BUDGETS = (2000, 4000, 8000, 16000, 32000, 64000, 128000)
COVERAGE_AMPLITUDES = (0.05, 0.2625, 0.5, 0.9)


@pytest.fixture(scope="module")
def coverage_runs():
    """200 seeded controller runs per true amplitude at budget 32000."""
    start = time.perf_counter()
    results = {}
    for j, a in enumerate(COVERAGE_AMPLITUDES):
        oracle = AnalyticOracle(a)
        reports = []
        for i in range(200):
            cfg = ControllerConfig(budget=32_000, delta_tot=0.05)
            rng = np.random.default_rng(1_000_000 * (j + 1) + i)
            reports.append(run(oracle, cfg, rng))
        results[a] = reports
    return results, time.perf_counter() - start


@pytest.fixture(scope="module")
def rate_sweep():
    """Budget sweep on the 1D bar ensemble, 50 repetitions per cell."""
    start = time.perf_counter()
    cfg = BenchConfig(
        benchmark="bar1d",
        qoi="compliance",
        budgets=SWEEP_BUDGETS,
        repetitions=50,
        methods=("mc", "mliqae"),
        seed=1,
        n_scenarios=1024,
    )
    rows, agg = run_bench(cfg)
    return rows, agg, time.perf_counter() - start


def rmse_by_budget(rows, method):
    out = []
    for b in SWEEP_BUDGETS:
        errs = np.array([r.abs_err for r in rows if r.method == method and r.budget == b])
        out.append(float(np.sqrt(np.mean(errs**2))))
    return np.array(out)


def median_by_budget(agg, method):
    return {rec[1]: rec[3] for rec in agg if rec[0] == method}


def std_by_budget(agg, method):
    return {rec[1]: rec[4] for rec in agg if rec[0] == method}


class TestWorkedExampleStates:
    def test_every_stage_of_one_iterate(self):
        start = time.perf_counter()
        spec = OracleSpec.from_angles(np.full(4, 0.25), WORKED_ANGLES)
        state = build_oracle_state(spec)
        assert np.abs(state.amplitudes - STATE_PREPARED).max() < 1e-6

        flipped = reflect_success(state)
        assert np.abs(flipped.amplitudes - STATE_AFTER_SUCCESS_FLIP).max() < 1e-6

        unprepared = apply_oracle(flipped, spec, adjoint=True)
        assert np.abs(unprepared.amplitudes - STATE_AFTER_UNPREPARE).max() < 1e-6

        zero_flipped = reflect_zero(unprepared)
        assert np.abs(zero_flipped.amplitudes - STATE_AFTER_ZERO_FLIP).max() < 1e-6

        iterated = apply_oracle(zero_flipped, spec)
        assert np.abs(-iterated.amplitudes - STATE_AFTER_ONE_ITERATE).max() < 1e-6

        direct = apply_grover(state, spec, 1)
        assert np.abs(direct.amplitudes - STATE_AFTER_ONE_ITERATE).max() < 1e-6
        assert time.perf_counter() - start < 1.0

    def test_success_probabilities_along_the_example(self):
        spec = OracleSpec.from_angles(np.full(4, 0.25), WORKED_ANGLES)
        state = build_oracle_state(spec)
        a = success_probability(state)
        assert a == pytest.approx(0.262500, abs=1e-6)
        theta = math.asin(math.sqrt(a))
        assert theta == pytest.approx(0.537916, abs=1e-6)
        amplified = success_probability(apply_grover(state, spec, 1))
        assert amplified == pytest.approx(0.998156, abs=1e-6)
        assert math.sin(3 * theta) ** 2 == pytest.approx(0.998156, abs=1e-6)


class TestWorkedExampleInference:
    def test_binomial_bands_and_angle_sets(self):
        start = time.perf_counter()

        # First corroborate the interval construction itself against an
        # independent binomial-tail bisection built on scipy's binom, at the
        # same risk split the reference endpoints assume.
        def tail_bisect(func, target):
            lo, hi = 0.0, 1.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if func(mid) < target:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)

        for h, m in ((262, 1000), (998, 1000)):
            ci = clopper_pearson(h, m, 0.05)
            lo = tail_bisect(lambda p: sps.binom.sf(h - 1, m, p), 0.025)
            hi = tail_bisect(lambda p: -sps.binom.cdf(h, m, p), -0.025)
            assert ci.lo == pytest.approx(lo, abs=1e-9)
            assert ci.hi == pytest.approx(hi, abs=1e-9)

        ci0 = clopper_pearson(262, 1000, 0.05)
        assert round(ci0.lo, 5) == 0.23498
        assert round(ci0.hi, 5) == 0.29043
        ci1 = clopper_pearson(998, 1000, 0.05)
        assert round(ci1.lo, 5) == 0.99279
        assert round(ci1.hi, 5) == 0.99976

        band0 = theta_preimage(0, ci0.lo, ci0.hi)
        assert len(band0) == 1
        assert band0.components[0][0] == pytest.approx(0.50607, abs=1e-5)
        assert band0.components[0][1] == pytest.approx(0.56915, abs=1e-5)

        band1 = theta_preimage(1, ci1.lo, ci1.hi)
        first_two = band1.components[:2]
        expected1 = ((0.49527, 0.51841), (0.52879, 0.55193))
        for got, want in zip(first_two, expected1):
            assert got[0] == pytest.approx(want[0], abs=1e-5)
            assert got[1] == pytest.approx(want[1], abs=1e-5)

        both = band0.intersect(band1)
        expected = ((0.50607, 0.51841), (0.52879, 0.55193))
        assert len(both) == 2
        for got, want in zip(both.components, expected):
            assert got[0] == pytest.approx(want[0], abs=1e-5)
            assert got[1] == pytest.approx(want[1], abs=1e-5)
        assert time.perf_counter() - start < 1.0


class TestCoverageGuarantee:
    def test_true_angle_rarely_escapes_the_feasible_set(self, coverage_runs):
        results, elapsed = coverage_runs
        for a, reports in results.items():
            theta_true = math.asin(math.sqrt(a))
            covered = sum(
                (not rep.failed) and rep.feasible.contains(theta_true, tol=1e-12)
                for rep in reports
            )
            assert covered >= 186, f"amplitude {a}: covered {covered}/200"
        assert elapsed < 120.0


class TestConvergenceRates:
    def test_monte_carlo_error_follows_the_square_root_law(self, rate_sweep):
        rows, _, elapsed = rate_sweep
        rmse = rmse_by_budget(rows, "mc")
        slope = np.polyfit(np.log(SWEEP_BUDGETS), np.log(rmse), 1)[0]
        assert -0.6 <= slope <= -0.4
        assert elapsed < 600.0

    def test_amplified_estimator_converges_faster(self, rate_sweep):
        rows, _, _ = rate_sweep
        rmse = rmse_by_budget(rows, "mliqae")
        slope = np.polyfit(np.log(SWEEP_BUDGETS), np.log(rmse), 1)[0]
        assert slope <= -0.6

    def test_amplified_median_error_wins_at_moderate_budgets(self, rate_sweep):
        _, agg, _ = rate_sweep
        mc = median_by_budget(agg, "mc")
        ml = median_by_budget(agg, "mliqae")
        for b in SWEEP_BUDGETS:
            if b >= 8000:
                assert ml[b] < mc[b], f"budget {b}: {ml[b]} !< {mc[b]}"

    def test_amplified_spread_narrows_at_high_budgets(self, rate_sweep):
        _, agg, _ = rate_sweep
        mc = std_by_budget(agg, "mc")
        ml = std_by_budget(agg, "mliqae")
        cells = [b for b in SWEEP_BUDGETS if b >= 16_000]
        wins = sum(ml[b] <= mc[b] for b in cells)
        # One miss is tolerated across the high-budget cells.
        assert wins >= len(cells) - 1


class TestRobustness:
    def test_no_run_fails_with_default_restart_cap(self, rate_sweep, coverage_runs):
        rows, _, _ = rate_sweep
        assert not any(r.failed for r in rows)
        results, _ = coverage_runs
        for reports in results.values():
            assert not any(rep.failed for rep in reports)


class TestMechanicsOracles:
    def test_bar_matches_series_spring_closed_form(self):
        start = time.perf_counter()
        rng = np.random.default_rng(101)
        for _ in range(100):
            n = int(rng.integers(1, 50))
            mesh = build_bar_mesh(float(rng.uniform(0.5, 2.0)), n)
            moduli = rng.uniform(0.1, 10.0, n)
            p = float(rng.uniform(0.5, 2.0))
            area = float(rng.uniform(0.5, 2.0))
            qoi = solve_bar_1d(mesh, moduli, P=p, A=area)
            want = (p / area) * np.sum(mesh.elem_length / moduli)
            assert abs(qoi.tip_displacement - want) / want < 1e-10
        assert time.perf_counter() - start < 60.0

    def test_patch_test_is_exact(self):
        mesh = build_cantilever_mesh(1.0, 1.0, 4, 4)
        solver = PlaneStressSolver(mesh, nu=0.3)
        xy = mesh.coords
        on_edge = (
            np.isclose(xy[:, 0], 0.0)
            | np.isclose(xy[:, 0], 1.0)
            | np.isclose(xy[:, 1], 0.0)
            | np.isclose(xy[:, 1], 1.0)
        )
        edge = np.flatnonzero(on_edge)
        dofs = np.concatenate([2 * edge, 2 * edge + 1])
        vals = np.concatenate(
            [0.003 * xy[edge, 0] + 0.001 * xy[edge, 1],
             -0.002 * xy[edge, 0] + 0.004 * xy[edge, 1]]
        )
        u = solver.solve_prescribed(np.ones(mesh.n_elems), dofs, vals)
        want = np.column_stack(
            [0.003 * xy[:, 0] + 0.001 * xy[:, 1], -0.002 * xy[:, 0] + 0.004 * xy[:, 1]]
        )
        assert np.abs(u.reshape(-1, 2) - want).max() < 1e-10

    def test_slender_cantilever_matches_beam_theory(self):
        start = time.perf_counter()
        mesh = build_cantilever_mesh(5.0, 1.0, 80, 16)
        qoi = solve_plane_stress_q4(mesh, np.ones(mesh.n_elems), nu=0.3)
        beam = 5.0**3 / (3.0 * (1.0 / 12.0))
        assert abs(qoi.tip_displacement - beam) / beam < 0.10
        assert time.perf_counter() - start < 60.0

    def test_tail_average_equals_affine_image_of_amplitude(self):
        rng = np.random.default_rng(202)
        for _ in range(100):
            n = int(rng.integers(20, 200))
            probs = rng.dirichlet(np.ones(n))
            responses = rng.normal(0.0, 3.0, size=n)
            s = ScenarioSet(probs, responses, float(rng.uniform(0.5, 0.99)))
            eta = var_threshold(s)
            tn = normalize_hinge(s, eta)
            direct = discrete_cvar(s)
            mapped = cvar_from_amplitude(tn.a, tn.eta, tn.q_max, s.alpha_level)
            assert mapped == pytest.approx(direct, abs=1e-10)


class TestDeterminism:
    def test_bench_rerun_is_byte_identical(self):
        cfg = BenchConfig(
            benchmark="bar1d",
            qoi="compliance",
            budgets=(2000, 8000),
            repetitions=5,
            methods=("mc", "mliqae"),
            seed=3,
            n_scenarios=256,
        )
        rows_a, agg_a = run_bench(cfg)
        rows_b, agg_b = run_bench(cfg)
        assert [format_row(r) for r in rows_a] == [format_row(r) for r in rows_b]
        assert agg_a == agg_b
