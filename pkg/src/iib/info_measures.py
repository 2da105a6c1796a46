"""Entropies, divergences, mutual information and the two IIB functionals.

All quantities are in nats.  In float mode they are plain floats.  In exact
mode they are :class:`ExactNats`: a finite sum ``sum_p c_p * log(p)`` over
primes ``p`` with rational coefficients.  Because the logarithms of distinct
primes are linearly independent over the rationals, two such sums are equal
iff their coefficient maps are equal, so identities can be checked with no
tolerance at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from sympy import factorint

from .foundation import (
    EXACT,
    BottleneckChannel,
    DimensionMismatch,
    Dist,
    JointDist,
    pushforward,
)

__all__ = [
    "ExactNats",
    "KL",
    "kl_divergence",
    "entropy",
    "mutual_information",
    "mutual_information_table",
    "iib_constraint",
    "iib_objective",
    "to_bits",
]


@lru_cache(maxsize=1 << 16)
def _factor(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted(factorint(n).items()))


class ExactNats:
    """An exact real number of the form ``sum_p coeff[p] * log(p)``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[int, Fraction] | None = None):
        self.coeffs = {p: c for p, c in (coeffs or {}).items() if c != 0}

    @classmethod
    def log(cls, r) -> "ExactNats":
        """``log(r)`` for a positive rational ``r``."""
        r = Fraction(r)
        if r <= 0:
            raise ValueError("log of a non-positive rational")
        out: dict[int, Fraction] = {}
        for p, e in _factor(r.numerator):
            out[p] = out.get(p, Fraction(0)) + e
        for p, e in _factor(r.denominator):
            out[p] = out.get(p, Fraction(0)) - e
        return cls(out)

    @classmethod
    def zero(cls) -> "ExactNats":
        return cls()

    def _add_scaled(self, other: "ExactNats", scale: Fraction) -> "ExactNats":
        out = dict(self.coeffs)
        for p, c in other.coeffs.items():
            out[p] = out.get(p, Fraction(0)) + scale * c
        return ExactNats(out)

    def __add__(self, other):
        if isinstance(other, ExactNats):
            return self._add_scaled(other, Fraction(1))
        if other == 0:
            return self
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ExactNats):
            return self._add_scaled(other, Fraction(-1))
        if other == 0:
            return self
        return NotImplemented

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return ExactNats({p: -c for p, c in self.coeffs.items()})

    def __mul__(self, k):
        k = Fraction(k)
        return ExactNats({p: k * c for p, c in self.coeffs.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if isinstance(other, ExactNats):
            return self.coeffs == other.coeffs
        if other == 0:
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def to_mpf(self, dps: int = 50):
        with mpmath.workdps(dps):
            return mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * mpmath.log(p)
                               for p, c in self.coeffs.items())

    def __float__(self):
        return float(self.to_mpf(30))

    def sign(self) -> int:
        """Exact zero test, then a 50-digit evaluation for the sign."""
        if self.is_zero():
            return 0
        v = self.to_mpf(50)
        if v == 0:
            v = self.to_mpf(200)
        return 1 if v > 0 else -1

    def _cmp(self, other) -> int:
        if not isinstance(other, ExactNats):
            if other == 0:
                return self.sign()
            return (float(self) > float(other)) - (float(self) < float(other))
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __repr__(self):
        return f"ExactNats({float(self):.12g})"


@dataclass(frozen=True)
class KL:
    """Result of a KL divergence; ``infinite`` flags a support violation."""

    value: float | ExactNats | None
    infinite: bool = False

    def __float__(self):
        return math.inf if self.infinite else float(self.value)


def to_bits(nats):
    return float(nats) / math.log(2)


# ---------------------------------------------------------------------------
# float kernels
# ---------------------------------------------------------------------------


def _signed_fsum(terms: np.ndarray) -> float:
    """Sum positive and negative terms separately before combining."""
    terms = np.asarray(terms, dtype=float).ravel()
    return math.fsum(terms[terms > 0]) + math.fsum(terms[terms < 0])


def _float_plogr(p: np.ndarray, num: np.ndarray, den: np.ndarray) -> float:
    """``sum p * log(num / den)`` over entries with ``p > 0``."""
    m = p > 0
    return _signed_fsum(p[m] * (np.log(num[m]) - np.log(den[m])))


def _exact_plogr(p, num, den) -> ExactNats:
    """Exact ``sum p * log(num / den)`` with ``0 log(0/0) = 0``.

    Terms sharing a ratio are merged before factoring.
    """
    by_ratio: dict[Fraction, Fraction] = {}
    for pi, ni, di in zip(p, num, den):
        if pi == 0:
            continue
        r = Fraction(ni) / Fraction(di)
        by_ratio[r] = by_ratio.get(r, Fraction(0)) + pi
    out = ExactNats()
    for r, w in by_ratio.items():
        if r != 1:
            out = out + w * ExactNats.log(r)
    return out


# ---------------------------------------------------------------------------
# public measures
# ---------------------------------------------------------------------------


def kl_divergence(p: Dist, q: Dist) -> KL:
    """``D(p || q) = sum_a p(a) log(p(a) / q(a))`` with ``0 log(0/0) = 0``."""
    if len(p) != len(q):
        raise DimensionMismatch("KL divergence needs distributions on the same alphabet")
    if p.mode != q.mode:
        p, q = p.to_float(), q.to_float()
    pm, qm = p.mass, q.mass
    if p.mode == EXACT:
        if any(pi > 0 and qi == 0 for pi, qi in zip(pm, qm)):
            return KL(None, True)
        return KL(_exact_plogr(pm, pm, qm))
    if np.any((pm > 0) & (qm <= 0)):
        return KL(None, True)
    return KL(_float_plogr(pm, pm, qm))


def entropy(p: Dist):
    """Shannon entropy ``-sum p log p`` with ``0 log 0 = 0``."""
    m = p.mass
    if p.mode == EXACT:
        return -_exact_plogr(m, m, [1] * len(m))
    return -_float_plogr(m, m, np.ones_like(m))


def mutual_information_table(table: np.ndarray):
    """Mutual information of a 2-d joint probability array (either mode)."""
    table = np.asarray(table)
    px = table.sum(axis=1)
    py = table.sum(axis=0)
    prod = np.outer(px, py)
    if table.dtype == object:
        return _exact_plogr(table.ravel(), table.ravel(), prod.ravel())
    return _float_plogr(table.ravel(), table.ravel(), prod.ravel())


def mutual_information(j: JointDist):
    """``I(X;Y) = D(p(X,Y) || p(X) p(Y))``."""
    kl = kl_divergence(j.flat(), j.product_of_marginals())
    return kl.value


def _check_kappa(kappa: BottleneckChannel, j: JointDist):
    if kappa.n_in != j.nx * j.ny:
        raise DimensionMismatch(
            f"bottleneck takes {kappa.n_in} cells, joint has {j.nx}x{j.ny}")
    if kappa.mode != j.mode:
        return kappa.to_float(), j.to_float()
    return kappa, j


def iib_constraint(kappa: BottleneckChannel, j: JointDist):
    """``D(kappa(p(X,Y)) || kappa(p(X) p(Y)))``, the preserved divergence."""
    kappa, j = _check_kappa(kappa, j)
    q = pushforward(kappa, j.flat())
    q_tilde = pushforward(kappa, j.product_of_marginals())
    kl = kl_divergence(q, q_tilde)
    # supp p(X,Y) is inside supp p(X)p(Y), so this cannot be infinite
    assert not kl.infinite
    return kl.value


def iib_objective(kappa: BottleneckChannel, j: JointDist):
    """``I(X,Y; T)`` under ``p(x, y) kappa(t | x, y)``."""
    kappa, j = _check_kappa(kappa, j)
    w = j.table.reshape(-1)
    q_ct = (kappa.matrix * w[None, :]).T  # cells x bottleneck symbols
    return mutual_information_table(q_ct)
