import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import BSC_H_CLASSES, BSC_MI
from iib.foundation import EXACT, BottleneckChannel, Dist, JointDist
from iib.generators import binary_symmetric_joint, random_joint
from iib.info_measures import (
    ExactNats,
    entropy,
    iib_constraint,
    iib_objective,
    kl_divergence,
    mutual_information,
    to_bits,
)



class TestExactNats:
    def test_log_factorization(self):
        v = ExactNats.log(Fraction(12, 5))
        assert v.coeffs == {2: 2, 3: 1, 5: -1}

    def test_arithmetic(self):
        a = ExactNats.log(6)
        b = ExactNats.log(2) + ExactNats.log(3)
        assert a == b
        assert (a - b).is_zero()
        assert (Fraction(1, 2) * a).coeffs == {2: Fraction(1, 2), 3: Fraction(1, 2)}

    def test_sign_and_order(self):
        assert ExactNats.log(Fraction(3, 2)) > 0
        assert ExactNats.log(Fraction(2, 3)) < 0
        # log 8 - 3 log 2 is exactly zero
        assert (ExactNats.log(8) - 3 * ExactNats.log(2)).sign() == 0
        # 2^10 = 1024 vs 10^3 = 1000: 10 log 2 > 3 log 10
        assert 10 * ExactNats.log(2) > 3 * ExactNats.log(10)

    def test_float_matches_mpmath(self):
        v = Fraction(7, 3) * ExactNats.log(Fraction(11, 4))
        with mpmath.workdps(40):
            ref = mpmath.mpf(7) / 3 * mpmath.log(mpmath.mpf(11) / 4)
        assert abs(float(v) - float(ref)) < 1e-15

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ExactNats.log(0)


class TestBinarySymmetric:
    def test_float_mutual_information(self):
        assert abs(mutual_information(binary_symmetric_joint()) - BSC_MI) < 1e-15

    def test_exact_mutual_information(self):
        v = mutual_information(binary_symmetric_joint(EXACT))
        # (4/5) log(8/5) + (1/5) log(2/5) = (13/5) log 2 - log 5
        assert v.coeffs == {2: Fraction(13, 5), 5: -1}
        assert abs(float(v) - BSC_MI) < 1e-15

    def test_bits(self):
        assert abs(to_bits(BSC_MI) - BSC_MI / math.log(2)) < 1e-15


class TestKL:
    def test_zero_for_equal(self):
        p = Dist([0.2, 0.3, 0.5])
        assert kl_divergence(p, p).value == 0.0

    def test_infinite_on_support_violation(self):
        kl = kl_divergence(Dist([0.5, 0.5]), Dist([1.0, 0.0]))
        assert kl.infinite
        assert float(kl) == math.inf

    def test_zero_convention(self):
        kl = kl_divergence(Dist([1.0, 0.0]), Dist([0.5, 0.5]))
        assert abs(kl.value - math.log(2)) < 1e-15

    def test_exact_matches_float(self):
        p = Dist(["1/6", "1/3", "1/2"], mode=EXACT)
        q = Dist(["1/3", "1/3", "1/3"], mode=EXACT)
        exact = kl_divergence(p, q).value
        flt = kl_divergence(p.to_float(), q.to_float()).value
        assert abs(float(exact) - flt) < 1e-15


class TestEntropy:
    def test_uniform(self):
        assert abs(entropy(Dist.uniform(5)) - math.log(5)) < 1e-15
        assert entropy(Dist.uniform(4, EXACT)).coeffs == {2: 2}

    def test_point_mass(self):
        assert entropy(Dist.point(3, 1)) == 0.0


class TestIIBFunctionals:
    def test_identity_bottleneck(self):
        # the identity keeps everything: D = I(X;Y), objective = H(X,Y)
        j = binary_symmetric_joint()
        k = BottleneckChannel(np.eye(4), 2, 2)
        assert abs(iib_constraint(k, j) - BSC_MI) < 1e-15
        assert abs(iib_objective(k, j) - entropy(j.flat())) < 1e-15

    def test_constant_bottleneck(self):
        j = binary_symmetric_joint(EXACT)
        k = BottleneckChannel.from_labels([0, 0, 0, 0], 2, 2, mode=EXACT)
        assert iib_constraint(k, j).is_zero()
        assert iib_objective(k, j).is_zero()

    def test_closed_form_classes(self):
        j = binary_symmetric_joint()
        k = BottleneckChannel.from_labels([0, 1, 1, 0], 2, 2)
        assert abs(iib_constraint(k, j) - BSC_MI) < 1e-15
        assert abs(iib_objective(k, j) - BSC_H_CLASSES) < 1e-15

    def test_mixed_modes_fall_back_to_float(self):
        j = binary_symmetric_joint(EXACT)
        k = BottleneckChannel.from_labels([0, 1, 1, 0], 2, 2)
        assert isinstance(iib_constraint(k, j), float)

    @given(st.integers(2, 4), st.integers(2, 4), st.integers(1, 5), st.integers(0, 10**6))
    def test_log_sum_bound(self, nx, ny, nt, seed):
        rng = np.random.default_rng(seed)
        j = random_joint(nx, ny, seed=seed)
        m = rng.dirichlet(np.full(nt, 0.5), size=nx * ny).T
        k = BottleneckChannel(m, nx, ny, repair=True)
        assert iib_constraint(k, j) <= mutual_information(j) + 1e-12

    @given(st.integers(2, 3), st.integers(2, 3), st.integers(0, 10**6))
    def test_objective_bounded_by_joint_entropy(self, nx, ny, seed):
        rng = np.random.default_rng(seed)
        j = random_joint(nx, ny, seed=seed)
        m = rng.dirichlet(np.ones(4), size=nx * ny).T
        k = BottleneckChannel(m, nx, ny, repair=True)
        obj = iib_objective(k, j)
        assert -1e-15 <= obj <= entropy(j.flat()) + 1e-12

    def test_exact_agrees_with_float(self):
        j = random_joint(3, 2, seed=4, mode=EXACT)
        k = BottleneckChannel.from_labels([0, 1, 0, 2, 1, 2], 3, 2, mode=EXACT)
        assert abs(float(iib_constraint(k, j)) - iib_constraint(k.to_float(), j.to_float())) < 1e-14
        assert abs(float(iib_objective(k, j)) - iib_objective(k.to_float(), j.to_float())) < 1e-14

    def test_independent_joint_has_zero_constraint(self):
        j = JointDist.independent(Dist([0.3, 0.7]), Dist([0.6, 0.4]))
        k = BottleneckChannel(np.eye(4), 2, 2)
        assert abs(iib_constraint(k, j)) < 1e-15
