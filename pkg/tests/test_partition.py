from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import BSC_H_CLASSES, BSC_MI, uniformized_joint
from iib.foundation import EXACT, BottleneckChannel, Channel, JointDist, compose
from iib.generators import (
    binary_symmetric_joint,
    circulant_channel,
    decreasing_profile,
    random_channel,
    random_joint,
)
from iib.info_measures import entropy, iib_constraint, iib_objective, mutual_information
from iib.partition import (
    MarginalNotFullSupport,
    build_partition,
    canonical_kappa,
    is_congruent,
    is_iib_max_solution,
    likelihood_ratio,
    merge_classes,
    solve_iib_max,
)



def random_congruent(rng, n_in, n_out):
    """Each input gets a disjoint, non-empty block of outputs."""
    owner = np.concatenate([np.arange(n_in), rng.integers(0, n_in, n_out - n_in)])
    rng.shuffle(owner)
    m = np.zeros((n_out, n_in))
    for a in range(n_in):
        rows = np.flatnonzero(owner == a)
        m[rows, a] = rng.dirichlet(np.ones(rows.size))
    return Channel(m, repair=True)


class TestBuildPartition:
    def test_bsc_classes(self):
        part = build_partition(binary_symmetric_joint())
        assert part.classes == ((0, 3), (1, 2))
        np.testing.assert_allclose(part.ratios, [1.6, 0.4])

    def test_exact_ratio(self):
        j = binary_symmetric_joint(EXACT)
        assert likelihood_ratio(j, 0, 0) == Fraction(8, 5)

    def test_circulant_classes_are_diagonals(self):
        ch = circulant_channel(4, decreasing_profile(4, 2))
        part = build_partition(uniformized_joint(ch))
        assert part.n_classes == 4
        for cls in part.classes:
            diffs = {(c % 4 - c // 4) % 4 for c in cls}
            assert len(diffs) == 1

    def test_zero_cells_go_to_complement(self):
        j = JointDist([[0.5, 0.0], [0.25, 0.25]])
        part = build_partition(j)
        assert part.complement == (1,)
        k = canonical_kappa(part)
        assert k.n_out == part.n_classes + 1
        assert k.labels()[1] == 0

    def test_marginal_zero_rejected(self):
        j = JointDist([[0.5, 0.5], [0.0, 0.0]])
        with pytest.raises(MarginalNotFullSupport):
            build_partition(j)

    def test_float_tolerance_groups_near_ties(self):
        j = JointDist([[0.25, 0.25 + 1e-13], [0.25, 0.25 - 1e-13]], repair=True)
        assert build_partition(j).n_classes == 1


class TestSolveMax:
    def test_bsc_values(self):
        sol = solve_iib_max(binary_symmetric_joint())
        assert abs(sol.lambda_achieved - BSC_MI) < 1e-15
        assert abs(sol.objective - BSC_H_CLASSES) < 1e-15

    def test_exact_values(self):
        j = binary_symmetric_joint(EXACT)
        sol = solve_iib_max(j)
        assert iib_constraint(sol.kappa, j) == mutual_information(j)
        assert iib_objective(sol.kappa, j) == sol.objective
        # H(1/5, 4/5) = log 5 - (8/5) log 2
        assert sol.objective.coeffs == {2: Fraction(-8, 5), 5: 1}

    @given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 10**6))
    def test_closed_form_random(self, nx, ny, seed):
        j = random_joint(nx, ny, seed=seed)
        sol = solve_iib_max(j)
        assert abs(iib_constraint(sol.kappa, j) - mutual_information(j)) < 1e-10
        assert abs(iib_objective(sol.kappa, j) - entropy(sol.partition.class_masses())) < 1e-10

    def test_canonical_is_member(self):
        j = uniformized_joint(circulant_channel(3, decreasing_profile(3, 0)))
        sol = solve_iib_max(j)
        res = is_iib_max_solution(sol.kappa, j, tol=0)
        assert res
        assert is_congruent(res.gamma)


class TestMembership:
    def test_congruent_post_composition_is_member(self):
        rng = np.random.default_rng(0)
        j = binary_symmetric_joint()
        k = solve_iib_max(j).kappa
        g = random_congruent(rng, 2, 5)
        assert is_iib_max_solution(compose(g, k), j)

    def test_merged_classes_rejected(self):
        j = uniformized_joint(circulant_channel(3, decreasing_profile(3, 0)))
        part = build_partition(j)
        merged = merge_classes(part, 1, 2)
        res = is_iib_max_solution(merged, j, tol=0)
        assert not res
        assert "reached from classes" in res.violation
        assert iib_constraint(merged, j) < mutual_information(j)

    def test_split_class_rejected(self):
        j = binary_symmetric_joint()
        k = BottleneckChannel.from_labels([0, 1, 1, 2], 2, 2)
        res = is_iib_max_solution(k, j)
        assert not res
        assert "differ" in res.violation


class TestCongruence:
    def test_detects_overlap(self):
        assert is_congruent(Channel([[1.0, 0.0], [0.0, 0.5], [0.0, 0.5]]))
        assert not is_congruent(Channel([[0.5, 0.5], [0.5, 0.5]]))

    @given(st.integers(0, 10**6))
    def test_post_composition_is_neutral(self, seed):
        rng = np.random.default_rng(seed)
        j = random_joint(2, 3, seed=seed)
        k = random_channel(6, 3, rng)
        k = BottleneckChannel(k.matrix, 2, 3)
        g = random_congruent(rng, 3, 5)
        gk = compose(g, k)
        assert abs(iib_constraint(gk, j) - iib_constraint(k, j)) < 1e-10
        assert abs(iib_objective(gk, j) - iib_objective(k, j)) < 1e-10
