import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import BSC_H_CLASSES, BSC_MI
from iib.foundation import EXACT
from iib.generators import binary_symmetric_joint, random_joint
from iib.info_measures import iib_constraint, iib_objective, mutual_information
from iib.iterative import (
    PROJECTED_GRADIENT,
    SolverConfig,
    default_beta_schedule,
    pareto_sweep,
    solve_iib_at,
)
from iib.partition import solve_iib_max

SHORT = [0.0, 1.0, 10.0, 100.0, 1e4, 1e6]


class TestConfig:
    def test_default_schedule(self):
        s = default_beta_schedule()
        assert s[0] == 0.0 and s[-1] == pytest.approx(1e12)
        assert all(a < b for a, b in zip(s, s[1:]))

    @pytest.mark.parametrize("kw", [{"restarts": 0}, {"max_iters": 0}, {"step_rule": "newton"},
                                    {"beta_schedule": [-1.0]}, {"conv_tol": 0.0}])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            SolverConfig(**kw)

    def test_lambda_out_of_range(self):
        with pytest.raises(ValueError):
            solve_iib_at(binary_symmetric_joint(), 0.5)


class TestEndpoints:
    def test_lambda_zero(self):
        sol = solve_iib_at(binary_symmetric_joint(), 0.0)
        assert abs(sol.lambda_achieved) < 1e-12
        assert abs(sol.objective) < 1e-12

    def test_lambda_max_bsc(self):
        sol = solve_iib_at(binary_symmetric_joint(), BSC_MI)
        assert abs(sol.lambda_achieved - BSC_MI) < 1e-12
        assert abs(sol.objective - BSC_H_CLASSES) < 1e-9

    def test_exact_joint_is_accepted(self):
        sol = solve_iib_at(binary_symmetric_joint(EXACT), 0.0, SolverConfig(beta_schedule=SHORT))
        assert abs(sol.objective) < 1e-12

    def test_reported_values_match_kappa(self):
        j = random_joint(2, 3, seed=1)
        sol = solve_iib_at(j, 0.5 * mutual_information(j), SolverConfig(beta_schedule=SHORT, restarts=2))
        assert sol.lambda_achieved == pytest.approx(iib_constraint(sol.kappa, j), abs=1e-15)
        assert sol.objective == pytest.approx(iib_objective(sol.kappa, j), abs=1e-15)

    def test_diagnostics(self):
        cfg = SolverConfig(beta_schedule=SHORT, restarts=2)
        sol = solve_iib_at(binary_symmetric_joint(), 0.1, cfg)
        d = sol.diagnostics
        assert len(d["runs"]) > 0
        assert 0 <= d["selected"] < len(d["runs"])
        assert 0.0 <= d["monotone_fraction"] <= 1.0
        assert d["monotone_fraction"] > 0.9


class TestProperties:
    @settings(max_examples=15)
    @given(st.integers(2, 3), st.integers(2, 3), st.integers(0, 10**6), st.floats(0.0, 1.0))
    def test_constraint_never_exceeds_information(self, nx, ny, seed, frac):
        j = random_joint(nx, ny, seed=seed)
        mi = mutual_information(j)
        sol = solve_iib_at(j, frac * mi, SolverConfig(beta_schedule=SHORT, restarts=1))
        assert sol.lambda_achieved <= mi + 1e-12
        assert sol.objective >= -1e-12

    def test_determinism(self):
        j = random_joint(3, 2, seed=5)
        cfg = SolverConfig(beta_schedule=SHORT, restarts=3, seed=11)
        a = solve_iib_at(j, 0.3 * mutual_information(j), cfg)
        b = solve_iib_at(j, 0.3 * mutual_information(j), cfg)
        np.testing.assert_array_equal(a.kappa.matrix, b.kappa.matrix)
        assert a.objective == b.objective

    def test_thread_count_does_not_change_result(self):
        j = random_joint(2, 3, seed=2)
        lam = mutual_information(j)
        a = solve_iib_at(j, lam, SolverConfig(beta_schedule=SHORT, restarts=3, threads=1))
        b = solve_iib_at(j, lam, SolverConfig(beta_schedule=SHORT, restarts=3, threads=3))
        np.testing.assert_array_equal(a.kappa.matrix, b.kappa.matrix)

    def test_closed_form_on_random_joints(self):
        for seed in range(4):
            j = random_joint(3, 3, seed=seed)
            ref = solve_iib_max(j)
            sol = solve_iib_at(j, ref.lambda_achieved)
            assert abs(sol.lambda_achieved - ref.lambda_achieved) < 1e-10
            assert abs(sol.objective - ref.objective) < 1e-8

    def test_small_bottleneck(self):
        j = binary_symmetric_joint()
        sol = solve_iib_at(j, BSC_MI, SolverConfig(bottleneck_size=2))
        assert sol.kappa.n_out == 2
        assert abs(sol.objective - BSC_H_CLASSES) < 1e-9


class TestProjectedGradient:
    def test_endpoints(self):
        cfg = SolverConfig(step_rule=PROJECTED_GRADIENT, beta_schedule=[0.0, 1.0, 10.0],
                           restarts=1, max_iters=300)
        j = binary_symmetric_joint()
        sol = solve_iib_at(j, 0.0, cfg)
        assert abs(sol.objective) < 1e-6
        sol = solve_iib_at(j, BSC_MI, cfg)
        assert sol.lambda_achieved <= BSC_MI + 1e-12
        assert abs(sol.lambda_achieved - BSC_MI) < 1e-3


class TestPareto:
    def test_monotone_frontier(self):
        j = binary_symmetric_joint()
        grid = np.linspace(0.0, BSC_MI, 5)
        pts = pareto_sweep(j, grid, SolverConfig(beta_schedule=SHORT, restarts=2))
        assert len(pts) == 5
        lam = [p.lambda_achieved for p in pts]
        obj = [p.objective for p in pts]
        assert lam == sorted(lam)
        assert all(a <= b + 1e-12 for a, b in zip(obj, obj[1:]))
        assert all(p.objective <= p.raw_objective for p in pts)
