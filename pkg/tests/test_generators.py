from fractions import Fraction

import numpy as np
import pytest

from iib.equivariance import Infeasible, find_uniformizing_input
from iib.foundation import EXACT, FLOAT, JointDist, pushforward
from iib.generators import (
    GeneratorSpec,
    circulant_channel,
    decreasing_profile,
    doubly_stochastic_channel,
    generate,
    near_identity_channel,
    perturb,
    planted_block_channel,
    random_dense_channel,
    random_joint,
    standard_corpus,
)


class TestDeterminism:
    @pytest.mark.parametrize("kind", ["circulant", "near_identity", "random_dense",
                                      "doubly_stochastic", "independent", "block_permutation"])
    def test_same_seed_same_channel(self, kind):
        spec = GeneratorSpec(kind, n=3, seed=7, mode=EXACT)
        a, b = generate(spec), generate(spec)
        assert a == b

    def test_float_mode_matches_exact(self):
        a = doubly_stochastic_channel(4, 3, mode=EXACT)
        b = doubly_stochastic_channel(4, 3, mode=FLOAT)
        np.testing.assert_array_equal(a.to_float().matrix, b.matrix)

    def test_random_joint_fully_supported(self):
        for s in range(10):
            assert random_joint(3, 4, seed=s).is_fully_supported()


class TestStructure:
    def test_circulant(self):
        ch = circulant_channel(4, decreasing_profile(4, 0))
        m = ch.matrix
        assert all(m[(y + 1) % 4, (x + 1) % 4] == m[y, x] for x in range(4) for y in range(4))

    def test_decreasing_profile_distinct(self):
        p = decreasing_profile(5, 3).mass
        assert all(a > b for a, b in zip(p, p[1:]))

    def test_near_identity(self):
        ch = near_identity_channel(3, Fraction(1, 10))
        assert ch.matrix[0, 0] == Fraction(4, 5)
        with pytest.raises(ValueError):
            near_identity_channel(3, Fraction(1, 2))

    def test_denominators_bounded(self):
        ch = random_dense_channel(3, 4, seed=1)
        assert max(v.denominator for v in ch.matrix.ravel()) <= 1000

    def test_planted_order(self):
        pc = planted_block_channel((2, 1), (2, 1), seed=0)
        assert pc.expected_order == 4
        assert len(pc.generators) == 2

    def test_planted_needs_two_blocks(self):
        with pytest.raises(ValueError):
            planted_block_channel((3,))


class TestUniformizing:
    def test_planted_has_full_support_joint(self):
        for seed in range(5):
            ch = planted_block_channel((2, 1, 1), (2, 1), seed=seed).channel
            p = find_uniformizing_input(ch)
            assert not isinstance(p, Infeasible)
            assert all(v > 0 for v in p.mass)
            out = pushforward(ch, p)
            assert all(v == Fraction(1, ch.n_out) for v in out.mass)


class TestPerturb:
    def test_zero_epsilon_is_identity(self):
        ch = near_identity_channel(3, Fraction(1, 10))
        np.testing.assert_array_equal(perturb(ch, 0.0).matrix, ch.to_float().matrix)

    def test_columns_stay_stochastic(self):
        ch = near_identity_channel(3, Fraction(1, 10))
        np.testing.assert_allclose(perturb(ch, 0.3, seed=2).matrix.sum(axis=0), 1.0)

    def test_range(self):
        with pytest.raises(ValueError):
            perturb(near_identity_channel(2), 1.0)


class TestCorpus:
    def test_size_and_shapes(self):
        corpus = standard_corpus()
        assert len(corpus) >= 200
        assert len({name for name, _ in corpus}) == len(corpus)
        assert all(ch.n_in <= 5 and ch.n_out <= 5 for _, ch in corpus)

    def test_every_member_gives_full_support_joint(self):
        for name, ch in standard_corpus()[::7]:
            p = find_uniformizing_input(ch)
            assert not isinstance(p, Infeasible), name
            assert JointDist.from_channel(ch, p).is_fully_supported(), name
