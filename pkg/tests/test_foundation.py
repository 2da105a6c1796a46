from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iib.foundation import (
    EXACT,
    FLOAT,
    Alphabet,
    BottleneckChannel,
    Channel,
    DimensionMismatch,
    Dist,
    InvalidDistribution,
    JointDist,
    ModeMismatch,
    Permutation,
    compose,
    identity_channel,
    parse_fraction,
    permutation_to_channel,
    product_permutation,
    pushforward,
    tensor,
)


class TestParseFraction:
    def test_string_forms(self):
        assert parse_fraction("3/4") == Fraction(3, 4)
        assert parse_fraction("2") == Fraction(2)
        assert parse_fraction(5) == Fraction(5)

    def test_rejects_floats(self):
        with pytest.raises((TypeError, ValueError)):
            parse_fraction(0.5)


class TestDist:
    def test_float_validation(self):
        with pytest.raises(InvalidDistribution):
            Dist([0.5, 0.6])
        with pytest.raises(InvalidDistribution):
            Dist([1.5, -0.5])

    def test_repair_renormalizes(self):
        d = Dist([1.0, 3.0], repair=True)
        np.testing.assert_allclose(d.mass, [0.25, 0.75])

    def test_exact_requires_unit_sum(self):
        Dist(["1/3", "2/3"], mode=EXACT)
        with pytest.raises(InvalidDistribution):
            Dist(["1/3", "1/3"], mode=EXACT)

    def test_mass_is_read_only(self):
        d = Dist.uniform(3)
        with pytest.raises(ValueError):
            d.mass[0] = 1.0

    def test_to_float(self):
        d = Dist(["1/4", "3/4"], mode=EXACT).to_float()
        assert d.mode == FLOAT
        np.testing.assert_array_equal(d.mass, [0.25, 0.75])


class TestChannel:
    def test_columns_must_be_stochastic(self):
        with pytest.raises(InvalidDistribution):
            Channel([[0.5, 0.5], [0.4, 0.5]])

    def test_deterministic_labels(self):
        ch = Channel([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        assert ch.is_deterministic()
        np.testing.assert_array_equal(ch.labels(), [0, 1, 0])

    def test_identity(self):
        e = identity_channel(3, EXACT)
        assert e.mode == EXACT
        assert all(e.matrix[i, i] == 1 for i in range(3))


class TestAlgebra:
    def test_compose_order(self):
        # f o g applies g first
        g = permutation_to_channel(Permutation([1, 2, 0]))
        f = permutation_to_channel(Permutation([2, 0, 1]))
        np.testing.assert_array_equal(compose(f, g).matrix, np.eye(3))

    def test_compose_dimension_check(self):
        with pytest.raises(DimensionMismatch):
            compose(identity_channel(2), identity_channel(3))

    def test_mode_mismatch(self):
        with pytest.raises(ModeMismatch):
            compose(identity_channel(2, EXACT), identity_channel(2, FLOAT))

    def test_tensor_pairing_is_row_major(self):
        mu = permutation_to_channel(Permutation([1, 0]))
        eta = identity_channel(3)
        t = tensor(mu, eta)
        # input (x, y) = (0, 2) -> product index 2 goes to (1, 2) -> 5
        assert t.matrix[5, 2] == 1.0

    def test_product_permutation_matches_tensor(self):
        s, t = Permutation([1, 2, 0]), Permutation([1, 0])
        direct = permutation_to_channel(product_permutation(s, t))
        via = tensor(permutation_to_channel(s), permutation_to_channel(t))
        np.testing.assert_array_equal(direct.matrix, via.matrix)

    def test_pushforward_exact(self):
        ch = Channel([["1/2", "1/3"], ["1/2", "2/3"]], mode=EXACT)
        out = pushforward(ch, Dist(["1/2", "1/2"], mode=EXACT))
        assert list(out.mass) == [Fraction(5, 12), Fraction(7, 12)]

    def test_pushforward_exact_matches_float(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            w = rng.integers(0, 5, size=(4, 3)) + np.eye(4, 3, dtype=int)
            m = np.array([[Fraction(int(v), int(w[:, a].sum())) for a, v in enumerate(row)]
                          for row in w], dtype=object)
            ch = Channel(m, mode=EXACT)
            p = Dist([Fraction(1, 6), Fraction(2, 6), Fraction(3, 6)], mode=EXACT)
            exact = pushforward(ch, p).to_float().mass
            np.testing.assert_allclose(exact, ch.to_float().matrix @ p.to_float().mass, atol=1e-15)


class TestPermutation:
    def test_composition_convention(self):
        a, b = Permutation([1, 2, 0]), Permutation([0, 2, 1])
        assert (a * b).map == tuple(a(b(i)) for i in range(3))

    def test_inverse(self):
        p = Permutation([2, 0, 3, 1])
        assert (p * p.inverse()).is_identity()

    def test_cycle_notation(self):
        assert Permutation([1, 0, 2]).cycle_notation() == "(0 1)"
        assert Permutation.identity(3).cycle_notation() == "()"

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            Permutation([0, 0, 1])

    @given(st.permutations(list(range(5))), st.permutations(list(range(5))))
    def test_channel_is_homomorphism(self, a, b):
        pa, pb = Permutation(a), Permutation(b)
        lhs = permutation_to_channel(pa * pb).matrix
        rhs = compose(permutation_to_channel(pa), permutation_to_channel(pb)).matrix
        np.testing.assert_array_equal(lhs, rhs)


class TestJoint:
    def test_marginals_exact(self):
        j = JointDist([["2/5", "1/10"], ["1/10", "2/5"]], mode=EXACT)
        assert list(j.marginal_x.mass) == [Fraction(1, 2)] * 2
        assert j.is_fully_supported()

    def test_from_channel_orientation(self):
        ch = Channel([[0.9, 0.2], [0.1, 0.8]])
        j = JointDist.from_channel(ch, Dist([0.5, 0.5]))
        np.testing.assert_allclose(j.table, [[0.45, 0.05], [0.1, 0.4]])

    def test_flat_index_is_x_major(self):
        j = JointDist([[0.1, 0.2, 0.3], [0.15, 0.05, 0.2]])
        np.testing.assert_array_equal(j.flat().mass, j.table.reshape(-1))

    def test_conditional_roundtrip(self):
        ch = Channel([[0.9, 0.2], [0.1, 0.8]])
        j = JointDist.from_channel(ch, Dist([0.3, 0.7]))
        np.testing.assert_allclose(j.conditional_y_given_x().matrix, ch.matrix)


class TestBottleneck:
    def test_from_labels(self):
        k = BottleneckChannel.from_labels([0, 1, 1, 0], 2, 2, mode=EXACT)
        assert k.shape == (2, 4)
        assert k.deterministic
        np.testing.assert_array_equal(k.labels(), [0, 1, 1, 0])

    def test_product_alphabet_labels(self):
        a = Alphabet(2, ("a", "b")).product(Alphabet(2, ("0", "1")))
        assert a.size == 4
