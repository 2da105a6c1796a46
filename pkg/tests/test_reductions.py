import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iib.foundation import Channel, DimensionMismatch, JointDist
from iib.generators import binary_symmetric_joint, random_channel, random_joint
from iib.info_measures import iib_constraint, mutual_information
from iib.reductions import (
    IB_X,
    SIB,
    check_equality_at_optimum,
    lift_ib,
    lift_ib_y,
    lift_sib,
    verify_ib_identities,
    verify_sib_identities,
)


class TestLifts:
    def test_shapes(self):
        rng = np.random.default_rng(0)
        kx = random_channel(3, 2, rng)
        ky = random_channel(2, 4, rng)
        ib = lift_ib(kx, 2)
        assert ib.kind == IB_X
        assert ib.lifted.shape == (4, 6)
        assert lift_ib_y(ky, 3).lifted.shape == (12, 6)
        s = lift_sib(kx, ky)
        assert s.kind == SIB and s.lifted.shape == (8, 6)
        assert (s.lifted.x_size, s.lifted.y_size) == (3, 2)

    def test_identity_lift_keeps_everything(self):
        j = binary_symmetric_joint()
        lifted = lift_ib(random_channel(2, 2, np.random.default_rng(1)), 2).lifted
        # D is the information T keeps about Y; never more than I(X;Y)
        assert iib_constraint(lifted, j) <= mutual_information(j) + 1e-12

    def test_dimension_check(self):
        rng = np.random.default_rng(0)
        with pytest.raises(DimensionMismatch):
            verify_ib_identities(random_channel(3, 2, rng), binary_symmetric_joint())


class TestIdentities:
    @given(st.integers(2, 4), st.integers(2, 4), st.integers(1, 4), st.integers(0, 10**6))
    def test_ib(self, nx, ny, nt, seed):
        rng = np.random.default_rng(seed)
        j = random_joint(nx, ny, seed=seed)
        r = verify_ib_identities(random_channel(nx, nt, rng), j)
        assert r.passed, r

    @given(st.integers(2, 3), st.integers(2, 3), st.integers(1, 3), st.integers(1, 3),
           st.integers(0, 10**6))
    def test_sib(self, nx, ny, ta, tb, seed):
        rng = np.random.default_rng(seed)
        j = random_joint(nx, ny, seed=seed)
        r = verify_sib_identities(random_channel(nx, ta, rng), random_channel(ny, tb, rng), j)
        assert r.passed, r
        assert r.chain_direct is not None

    def test_identity_encoder(self):
        # kx = identity makes T_ib a copy of X, so the constraint is I(X;Y)
        j = random_joint(3, 2, seed=4)
        r = verify_ib_identities(Channel(np.eye(3)), j)
        assert r.passed
        assert abs(r.constraint_iib - mutual_information(j)) < 1e-12

    def test_zero_cells(self):
        j = JointDist([[0.5, 0.0], [0.2, 0.3]])
        rng = np.random.default_rng(2)
        assert verify_sib_identities(random_channel(2, 2, rng), random_channel(2, 2, rng), j).passed


class TestEqualityAtOptimum:
    @pytest.mark.parametrize("frac", [0.0, 0.5, 0.9, 1.0])
    def test_bsc(self, frac):
        j = binary_symmetric_joint()
        r = check_equality_at_optimum(j, frac * mutual_information(j))
        assert r.passed
        assert all(a >= r.lam - 1e-12 for a in r.achieved)

    def test_random_joint(self):
        j = random_joint(2, 2, seed=3)
        assert check_equality_at_optimum(j, 0.6 * mutual_information(j)).passed

    def test_requires_binary(self):
        with pytest.raises(DimensionMismatch):
            check_equality_at_optimum(random_joint(3, 2), 0.0)

    def test_unreachable_lambda(self):
        with pytest.raises(ValueError):
            check_equality_at_optimum(binary_symmetric_joint(), 1.0)
