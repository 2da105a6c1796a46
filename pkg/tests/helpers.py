"""Shared fixtures and oracles for the test suite."""

from fractions import Fraction

import numpy as np

from iib.equivariance import find_uniformizing_input
from iib.foundation import EXACT, BottleneckChannel, Channel, JointDist
from iib.generators import (
    binary_symmetric_joint,
    circulant_channel,
    decreasing_profile,
    doubly_stochastic_channel,
    near_identity_channel,
    planted_block_channel,
    random_joint,
)

# Binary symmetric joint p(x, y) = 2/5 on the diagonal, 1/10 off it.
# I(X;Y) = (13/5) log 2 - log 5 and H(pi) = log 5 - (8/5) log 2, evaluated
# with mpmath at 40 digits and rounded to the nearest double.
BSC_MI = 0.19274475702175742
BSC_H_CLASSES = 0.5004024235381879


def set_partitions(n):
    """Restricted growth strings of length n: every set partition once."""
    if n == 0:
        yield ()
        return
    labels = [0] * n

    def rec(i, top):
        if i == n:
            yield tuple(labels)
            return
        for v in range(top + 2):
            labels[i] = v
            yield from rec(i + 1, max(top, v))

    yield from rec(1, 0)


def uniformized_joint(ch):
    return JointDist.from_channel(ch, find_uniformizing_input(ch))


def solver_corpus():
    """Float joints used for the iterative solver checks."""
    out = [("bsc", binary_symmetric_joint())]
    chans = [
        ("circulant-3", circulant_channel(3, decreasing_profile(3, 0, "float"))),
        ("circulant-4", circulant_channel(4, decreasing_profile(4, 1, "float"))),
        ("near-identity-3", near_identity_channel(3, 0.05, "float")),
        ("planted-21", planted_block_channel((2, 1), seed=0, mode="float").channel),
        ("planted-12", planted_block_channel((1, 2), (2, 1), seed=1, mode="float").channel),
        ("doubly-stochastic-3", doubly_stochastic_channel(3, 0, mode="float")),
    ]
    out += [(name, uniformized_joint(ch)) for name, ch in chans]
    for s, (a, b) in enumerate([(2, 3), (3, 2), (3, 3), (2, 2), (2, 4), (4, 2)]):
        out.append((f"random-{a}x{b}-s{s}", random_joint(a, b, seed=s)))
    return out


def random_kappa(rng, n_cells, n_out, x_size, y_size, alpha=1.0):
    m = rng.dirichlet(np.full(n_out, alpha), size=n_cells).T
    return BottleneckChannel(m, x_size, y_size, repair=True)


def random_exact_stochastic(rng, n_out, n_in, denom=6, zero_prob=0.3):
    """Column-stochastic Fraction matrix with some structural zeros."""
    m = np.empty((n_out, n_in), dtype=object)
    for a in range(n_in):
        w = rng.integers(0, denom + 1, size=n_out)
        w[rng.random(n_out) < zero_prob] = 0
        if w.sum() == 0:
            w[rng.integers(n_out)] = 1
        s = int(w.sum())
        m[:, a] = [Fraction(int(v), s) for v in w]
    return Channel(m, mode=EXACT)
