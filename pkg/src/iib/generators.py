"""Channels and joints with known structure, for tests and experiments.

Randomness comes from :func:`numpy.random.default_rng` (PCG64) seeded with
plain integers, so a given ``(kind, sizes, seed)`` produces the same object
on every platform.  Exact-mode rationals keep denominators at most 1000.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .foundation import (
    EXACT,
    FLOAT,
    Channel,
    Dist,
    JointDist,
    Permutation,
)

MAX_DENOMINATOR = 1000

KINDS = ("circulant", "block_permutation", "near_identity", "random_dense", "independent",
         "doubly_stochastic")


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _as_mode(values: np.ndarray, mode: str):
    """Turn an array of Fractions into the requested mode."""
    if mode == EXACT:
        return values
    return np.array([float(v) for v in values.ravel()]).reshape(values.shape)


def _random_weights(rng: np.random.Generator, n: int, total_cap: int = MAX_DENOMINATOR) -> list[Fraction]:
    """n positive rationals summing to 1 with denominator <= total_cap."""
    hi = max(2, total_cap // n)
    w = rng.integers(1, hi + 1, size=n)
    s = int(w.sum())
    return [Fraction(int(v), s) for v in w]


def circulant_channel(n: int, profile: Dist | Sequence) -> Channel:
    """``ch(y | x) = profile((y - x) mod n)``; doubly stochastic."""
    if not isinstance(profile, Dist):
        profile = Dist(profile)
    if len(profile) != n:
        raise ValueError("profile length must equal n")
    if not np.all(profile.support()):
        raise ValueError("profile must be fully supported")
    m = np.empty((n, n), dtype=object if profile.mode == EXACT else float)
    for x in range(n):
        for y in range(n):
            m[y, x] = profile.mass[(y - x) % n]
    return Channel(m, mode=profile.mode)


def decreasing_profile(n: int, seed=0, mode: str = EXACT) -> Dist:
    """A random, strictly decreasing, fully supported profile.

    Distinct values make the circulant's symmetry group exactly the shifts.
    """
    rng = _rng(seed)
    cap = MAX_DENOMINATOR // n
    vals = sorted(rng.choice(np.arange(1, cap + 1), size=n, replace=False).tolist(), reverse=True)
    s = sum(vals)
    prof = [Fraction(v, s) for v in vals]
    return Dist(_as_mode(np.array(prof, dtype=object), mode), mode=mode, repair=mode == FLOAT)


def near_identity_channel(n: int, eps=Fraction(1, 100), mode: str = EXACT) -> Channel:
    """Diagonal ``1 - (n-1) eps``, off-diagonal ``eps``."""
    eps = Fraction(eps) if mode == EXACT else float(eps)
    if not 0 < eps * (n - 1) < 1:
        raise ValueError("need 0 < (n-1) eps < 1")
    m = np.empty((n, n), dtype=object if mode == EXACT else float)
    m[...] = eps
    for i in range(n):
        m[i, i] = 1 - (n - 1) * eps
    return Channel(m, mode=mode, repair=mode == FLOAT)


def doubly_stochastic_channel(n: int, seed=0, n_perms: int = 3, smoothing=Fraction(1, 20),
                              mode: str = EXACT) -> Channel:
    """Random convex mix of permutation matrices, smoothed towards uniform.

    Smoothing keeps every entry positive, so uniform p(X) gives a fully
    supported joint.
    """
    rng = _rng(seed)
    weights = _random_weights(rng, n_perms, 100)
    m = np.empty((n, n), dtype=object)
    m[...] = Fraction(0)
    for w in weights:
        perm = rng.permutation(n)
        for x in range(n):
            m[perm[x], x] += w
    s = Fraction(smoothing)
    m = (1 - s) * m + s * Fraction(1, n)
    return Channel(_as_mode(m, mode), mode=mode, repair=mode == FLOAT)


def random_dense_channel(nx: int, ny: int, seed=0, mode: str = EXACT) -> Channel:
    """Columns with independent random positive rationals; generically asymmetric."""
    rng = _rng(seed)
    cols = [_random_weights(rng, ny) for _ in range(nx)]
    m = np.array(cols, dtype=object).T
    return Channel(_as_mode(m, mode), mode=mode, repair=mode == FLOAT)


@dataclass
class PlantedChannel:
    channel: Channel
    generators: list[tuple[Permutation, Permutation]]
    expected_order: int


def planted_block_channel(x_blocks: Sequence[int], y_blocks: Sequence[int] | None = None,
                          within_noise=Fraction(1, 4), seed=0, mode: str = EXACT) -> PlantedChannel:
    """Channel with duplicated columns inside each X-block and duplicated rows
    inside each Y-block.

    Columns are ``u + d_b`` (``u`` uniform) with the deviations ``d_b``
    summing to zero over X-blocks, so uniform p(X) over one representative
    per block (and hence some full-support p(X)) makes p(Y) uniform.
    ``within_noise`` bounds the deviation relative to ``1/|Y|``.

    Returned generators are the transpositions inside every block; the
    planted subgroup has order ``prod(|block|!)`` over all X and Y blocks.
    Generic seeds produce no symmetry beyond it.
    """
    rng = _rng(seed)
    x_blocks = [int(b) for b in x_blocks]
    y_blocks = [int(b) for b in (y_blocks if y_blocks is not None else [1] * sum(x_blocks))]
    if min(x_blocks + y_blocks) < 1:
        raise ValueError("block sizes must be >= 1")
    if len(x_blocks) < 2:
        raise ValueError("need at least two X-blocks (one block forces a constant channel)")
    nx, ny = sum(x_blocks), sum(y_blocks)
    kx, ky = len(x_blocks), len(y_blocks)
    noise = Fraction(within_noise)

    # per-block deviations: constant over each Y-block, zero-sum over Y and over X-blocks
    dev = np.empty((ky, kx), dtype=object)
    for b in range(kx - 1):
        raw = [Fraction(int(v), 40) for v in rng.integers(-20, 21, size=ky)]
        dev[:, b] = raw
    dev[:, kx - 1] = [-sum(dev[i, :kx - 1]) for i in range(ky)]
    sizes = np.array([Fraction(s) for s in y_blocks], dtype=object)
    for b in range(kx):
        col = dev[:, b]
        mean = sum(col * sizes) / ny
        dev[:, b] = col - mean  # weighted zero-sum over Y
    scale = max([abs(v) for v in dev.ravel()] + [Fraction(1)])
    dev = dev * (noise / scale)

    u = Fraction(1, ny)
    m = np.empty((ny, nx), dtype=object)
    x0 = 0
    for b, bx in enumerate(x_blocks):
        y0 = 0
        for i, by in enumerate(y_blocks):
            m[y0:y0 + by, x0:x0 + bx] = u * (1 + dev[i, b])
            y0 += by
        x0 += bx

    gens = []
    for size, offset in zip(x_blocks, itertools.accumulate([0] + x_blocks[:-1])):
        for k in range(1, size):
            gens.append((Permutation.cycle(nx, offset, offset + k), Permutation.identity(ny)))
    for size, offset in zip(y_blocks, itertools.accumulate([0] + y_blocks[:-1])):
        for k in range(1, size):
            gens.append((Permutation.identity(nx), Permutation.cycle(ny, offset, offset + k)))
    order = 1
    for s in x_blocks + y_blocks:
        order *= math.factorial(s)
    ch = Channel(_as_mode(m, mode), mode=mode, repair=mode == FLOAT)
    return PlantedChannel(ch, gens, order)


def perturb(ch: Channel, epsilon: float, seed=0) -> Channel:
    """Entrywise multiplicative noise ``e * (1 + eps * u)``, ``u ~ U[-1, 1]``,
    then column renormalization.  Always returns a float channel."""
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    base = ch.to_float().matrix
    if epsilon == 0:
        return Channel(base, ch.input, ch.output)
    u = _rng(seed).uniform(-1.0, 1.0, size=base.shape)
    m = base * (1.0 + epsilon * u)
    return Channel(m / m.sum(axis=0), ch.input, ch.output, repair=True)


def random_joint(nx: int, ny: int, seed=0, mode: str = FLOAT) -> JointDist:
    """A fully supported random joint distribution."""
    rng = _rng(seed)
    if mode == EXACT:
        w = _random_weights(rng, nx * ny)
        return JointDist(np.array(w, dtype=object).reshape(nx, ny), mode=EXACT)
    w = rng.dirichlet(np.ones(nx * ny)) + 1e-3
    return JointDist((w / w.sum()).reshape(nx, ny), repair=True)


def random_channel(n_in: int, n_out: int, rng: np.random.Generator, alpha: float = 1.0) -> Channel:
    """Float channel with Dirichlet(alpha) columns."""
    m = rng.dirichlet(np.full(n_out, alpha), size=n_in).T
    return Channel(m, repair=True)


def independent_joint(p_x: Dist, p_y: Dist) -> JointDist:
    return JointDist.independent(p_x, p_y)


def binary_symmetric_joint(mode: str = FLOAT) -> JointDist:
    """p(x, y) = 0.4 on the diagonal, 0.1 off it."""
    if mode == EXACT:
        return JointDist([["2/5", "1/10"], ["1/10", "2/5"]], mode=EXACT)
    return JointDist([[0.4, 0.1], [0.1, 0.4]])


def binary_symmetric_channel(flip=Fraction(1, 5), mode: str = FLOAT) -> Channel:
    flip = Fraction(flip)
    m = np.array([[1 - flip, flip], [flip, 1 - flip]], dtype=object)
    return Channel(_as_mode(m, mode), mode=mode, repair=mode == FLOAT)


@dataclass
class GeneratorSpec:
    kind: str
    n: int = 3
    m: int | None = None
    epsilon: float = 0.0
    seed: int = 0
    mode: str = EXACT
    blocks: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")
        if self.n < 1 or (self.m is not None and self.m < 1):
            raise ValueError("sizes must be positive")


def generate(spec: GeneratorSpec) -> Channel:
    """Build the channel described by ``spec`` (optionally perturbed)."""
    n, m = spec.n, spec.m or spec.n
    if spec.kind == "circulant":
        ch = circulant_channel(n, decreasing_profile(n, spec.seed, spec.mode))
    elif spec.kind == "near_identity":
        ch = near_identity_channel(n, Fraction(1, 10 * n), spec.mode)
    elif spec.kind == "doubly_stochastic":
        ch = doubly_stochastic_channel(n, spec.seed, mode=spec.mode)
    elif spec.kind == "random_dense":
        ch = random_dense_channel(n, m, spec.seed, spec.mode)
    elif spec.kind == "block_permutation":
        ch = planted_block_channel(spec.blocks or (2, 1), seed=spec.seed, mode=spec.mode).channel
    else:  # independent
        prof = random_dense_channel(1, m, spec.seed, spec.mode).matrix[:, 0]
        ch = Channel(np.repeat(prof.reshape(-1, 1), n, axis=1), mode=spec.mode)
    if spec.epsilon:
        ch = perturb(ch, spec.epsilon, spec.seed)
    return ch


def standard_corpus(mode: str = EXACT) -> list[tuple[str, Channel]]:
    """200 named channels with uniformizing inputs and fully supported joints.

    80 circulants (n = 2..5), 20 near-identity channels, 50 planted-block
    channels and 50 smoothed doubly-stochastic channels, all of size <= 5.
    """
    out: list[tuple[str, Channel]] = []
    for n in range(2, 6):
        for seed in range(20):
            out.append((f"circulant-n{n}-s{seed}", circulant_channel(n, decreasing_profile(n, seed, mode))))
    for n in range(2, 6):
        for eps in (Fraction(1, 100), Fraction(1, 50), Fraction(1, 20), Fraction(1, 10), Fraction(1, 8)):
            out.append((f"near-identity-n{n}-e{eps}", near_identity_channel(n, eps, mode)))
    shapes = [((1, 1), None), ((2, 1), None), ((1, 2), (2, 1)), ((2, 2), (2, 2)), ((3, 1), (1, 1, 1, 1)),
              ((2, 1, 1), (2, 1)), ((2, 2), (1, 1, 1)), ((1, 1, 1), (3,)), ((2, 3), (2, 2, 1)),
              ((1, 2), (1, 1, 1, 1, 1))]
    for k, (xb, yb) in enumerate(shapes):
        for seed in range(5):
            pc = planted_block_channel(xb, yb, seed=seed, mode=mode)
            out.append((f"planted-{k}-s{seed}", pc.channel))
    for n in range(2, 6):
        for seed in range(12 if n < 4 else 13):
            out.append((f"doubly-stochastic-n{n}-s{seed}", doubly_stochastic_channel(n, seed, mode=mode)))
    return out
