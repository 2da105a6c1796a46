"""Probability types and elementary channel algebra.

Every probability object carries a numeric *mode*:

* ``"exact"``: entries are :class:`fractions.Fraction` stored in numpy object
  arrays. Arithmetic never rounds.
* ``"float"``: entries are float64. Comparisons always go through an explicit
  tolerance.

Channels are column-stochastic: ``ch.matrix[b, a] == p(b | a)``.  Pairs
``(x, y)`` of a product alphabet are indexed as ``x * |Y| + y`` everywhere in
the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

NORMALIZATION_TOL = 1e-12
DEFAULT_SUPPORT_EPSILON = 1e-12


class IIBError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatch(IIBError, ValueError):
    pass


class ModeMismatch(IIBError, TypeError):
    pass


class InvalidDistribution(IIBError, ValueError):
    pass


# ---------------------------------------------------------------------------
# numeric helpers
# ---------------------------------------------------------------------------


def parse_fraction(value) -> Fraction:
    """Convert ints, Fractions and ``"num/den"`` strings to a Fraction.

    Floats are rejected: silently turning 0.1 into 3602879701896397/2**55 is
    almost never what the caller meant in exact mode.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not probabilities")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot use {value!r} ({type(value).__name__}) as an exact rational")


def _infer_mode(flat: Sequence) -> str:
    for v in flat:
        if isinstance(v, (Fraction, str)):
            return EXACT
    return FLOAT


def as_array(values, mode: str | None = None) -> np.ndarray:
    """Build a read-only array in the requested (or inferred) mode."""
    if isinstance(values, np.ndarray) and values.dtype != object:
        inferred = FLOAT
    else:
        inferred = _infer_mode(np.asarray(values, dtype=object).ravel())
    mode = mode or inferred
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == EXACT:
        obj = np.asarray(values, dtype=object)
        out = np.empty(obj.shape, dtype=object)
        for idx, v in np.ndenumerate(obj):
            out[idx] = parse_fraction(v)
    else:
        obj = np.asarray(values, dtype=object)
        if any(isinstance(v, str) for v in obj.ravel()):
            out = np.array([float(Fraction(v)) if isinstance(v, str) else float(v)
                            for v in obj.ravel()], dtype=float).reshape(obj.shape)
        else:
            out = np.array(values, dtype=float)
    out.flags.writeable = False
    return out


def array_mode(arr: np.ndarray) -> str:
    return EXACT if arr.dtype == object else FLOAT


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _to_float_array(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == object:
        return _frozen(np.array([float(v) for v in arr.ravel()], dtype=float).reshape(arr.shape))
    return arr


def _check_same_mode(*objs) -> str:
    modes = {o.mode for o in objs}
    if len(modes) > 1:
        raise ModeMismatch(f"cannot mix numeric modes {sorted(modes)}; use to_float() explicitly")
    return modes.pop()


# ---------------------------------------------------------------------------
# alphabets, distributions, channels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Alphabet:
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.size) < 1:
            raise ValueError("alphabet size must be >= 1")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise ValueError("labels must have one entry per symbol")
            if len(set(labels)) != len(labels):
                raise ValueError("labels must be unique")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.size

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)

    def product(self, other: "Alphabet") -> "Alphabet":
        """Alphabet of pairs, row-major: (a, b) -> a * |other| + b."""
        labels = None
        if self.labels or other.labels:
            labels = tuple(f"({self.label(a)},{other.label(b)})"
                           for a in range(self.size) for b in range(other.size))
        return Alphabet(self.size * other.size, labels)


def _coerce_alphabet(alph, size: int) -> Alphabet:
    if alph is None:
        return Alphabet(size)
    if isinstance(alph, int):
        alph = Alphabet(alph)
    if alph.size != size:
        raise DimensionMismatch(f"alphabet of size {alph.size} given for {size} entries")
    return alph


def _validate_columns(mat: np.ndarray, repair: bool, what: str) -> np.ndarray:
    """Check nonnegativity and unit column sums; optionally renormalize."""
    if mat.dtype == object:
        if any(v < 0 for v in mat.ravel()):
            raise InvalidDistribution(f"{what} has negative entries")
        sums = mat.sum(axis=0)
        if all(s == 1 for s in sums):
            return mat
        if not repair or any(s == 0 for s in sums):
            raise InvalidDistribution(f"{what} columns do not sum to 1: {list(sums)}")
        return _frozen(mat / sums)
    if not np.all(np.isfinite(mat)):
        raise InvalidDistribution(f"{what} has non-finite entries")
    if np.any(mat < 0):
        raise InvalidDistribution(f"{what} has negative entries")
    sums = mat.sum(axis=0)
    if np.all(np.abs(sums - 1.0) <= NORMALIZATION_TOL):
        return mat
    if not repair or np.any(sums <= 0):
        raise InvalidDistribution(
            f"{what} columns do not sum to 1 (max deviation {np.max(np.abs(sums - 1.0)):.3g})")
    return _frozen(mat / sums)


class Dist:
    """A probability vector over a finite alphabet."""

    __slots__ = ("mass", "alphabet", "mode")

    def __init__(self, mass, alphabet: Alphabet | int | None = None, *,
                 mode: str | None = None, repair: bool = False):
        arr = as_array(mass, mode)
        if arr.ndim != 1:
            raise DimensionMismatch("a distribution is a 1-d vector")
        arr = _validate_columns(arr.reshape(-1, 1), repair, "distribution").reshape(-1)
        self.mass = _frozen(arr)
        self.alphabet = _coerce_alphabet(alphabet, arr.shape[0])
        self.mode = array_mode(arr)

    @classmethod
    def uniform(cls, n: int, mode: str = FLOAT) -> "Dist":
        if mode == EXACT:
            return cls([Fraction(1, n)] * n, mode=EXACT)
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point(cls, n: int, i: int, mode: str = FLOAT) -> "Dist":
        v = [0] * n
        v[i] = 1
        return cls(v, mode=mode)

    def __len__(self):
        return self.alphabet.size

    def __getitem__(self, i):
        return self.mass[i]

    def __repr__(self):
        return f"Dist({list(self.mass)!r}, mode={self.mode!r})"

    def to_float(self) -> "Dist":
        return self if self.mode == FLOAT else Dist(_to_float_array(self.mass), self.alphabet)

    def support(self, epsilon: float = DEFAULT_SUPPORT_EPSILON) -> np.ndarray:
        return _support_mask(self.mass, epsilon)

    def allclose(self, other: "Dist", tol: float = 1e-12) -> bool:
        if len(self) != len(other):
            return False
        if self.mode == EXACT and other.mode == EXACT and tol == 0:
            return bool(np.all(self.mass == other.mass))
        return bool(np.max(np.abs(_to_float_array(self.mass) - _to_float_array(other.mass))) <= tol)


def _support_mask(arr: np.ndarray, epsilon: float) -> np.ndarray:
    if arr.dtype == object:
        mask = np.array([v > 0 for v in arr.ravel()], dtype=bool).reshape(arr.shape)
    else:
        mask = arr > epsilon
    mask.flags.writeable = False
    return mask


class Channel:
    """A column-stochastic matrix ``matrix[b, a] = p(b | a)``."""

    def __init__(self, matrix, input: Alphabet | int | None = None,
                 output: Alphabet | int | None = None, *, mode: str | None = None,
                 repair: bool = False):
        arr = as_array(matrix, mode)
        if arr.ndim != 2:
            raise DimensionMismatch("a channel matrix is 2-d (outputs x inputs)")
        self.matrix = _frozen(_validate_columns(arr, repair, "channel"))
        self.output = _coerce_alphabet(output, arr.shape[0])
        self.input = _coerce_alphabet(input, arr.shape[1])
        self.mode = array_mode(self.matrix)

    @property
    def n_in(self) -> int:
        return self.input.size

    @property
    def n_out(self) -> int:
        return self.output.size

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __repr__(self):
        return f"{type(self).__name__}({self.n_in}->{self.n_out}, mode={self.mode!r})"

    def column(self, a: int) -> Dist:
        return Dist(self.matrix[:, a], self.output, mode=self.mode)

    def _rebuild(self, matrix: np.ndarray) -> "Channel":
        return Channel(matrix, self.input, self.output)

    def to_float(self) -> "Channel":
        return self if self.mode == FLOAT else self._rebuild(_to_float_array(self.matrix))

    def is_deterministic(self) -> bool:
        m = self.matrix
        if self.mode == EXACT:
            return all(sum(1 for v in m[:, a] if v != 0) == 1 for a in range(m.shape[1]))
        return bool(np.all(np.isclose(m.max(axis=0), 1.0, rtol=0, atol=NORMALIZATION_TOL)))

    def labels(self) -> np.ndarray:
        """Output symbol of every input, for deterministic channels."""
        if not self.is_deterministic():
            raise ValueError("channel is not deterministic")
        if self.mode == EXACT:
            return np.array([next(b for b, v in enumerate(self.matrix[:, a]) if v == 1)
                             for a in range(self.n_in)], dtype=int)
        return np.argmax(self.matrix, axis=0)

    def allclose(self, other: "Channel", tol: float = 1e-12) -> bool:
        if self.shape != other.shape:
            return False
        if self.mode == EXACT and other.mode == EXACT and tol == 0:
            return bool(np.all(self.matrix == other.matrix))
        return bool(np.max(np.abs(_to_float_array(self.matrix) - _to_float_array(other.matrix))) <= tol)

    def __eq__(self, other):
        if not isinstance(other, Channel):
            return NotImplemented
        return self.mode == other.mode and self.shape == other.shape and bool(
            np.all(self.matrix == other.matrix))

    __hash__ = None


class BottleneckChannel(Channel):
    """A channel from the product alphabet X x Y to a finite bottleneck T."""

    def __init__(self, matrix, x_size: int, y_size: int, output: Alphabet | int | None = None,
                 *, mode: str | None = None, repair: bool = False):
        super().__init__(matrix, Alphabet(x_size * y_size), output, mode=mode, repair=repair)
        self.x_size = int(x_size)
        self.y_size = int(y_size)

    @classmethod
    def from_channel(cls, ch: Channel, x_size: int, y_size: int) -> "BottleneckChannel":
        if ch.n_in != x_size * y_size:
            raise DimensionMismatch(f"channel input size {ch.n_in} != {x_size}*{y_size}")
        return cls(ch.matrix, x_size, y_size, ch.output)

    @classmethod
    def from_labels(cls, labels: Sequence[int], x_size: int, y_size: int,
                    n_out: int | None = None, mode: str = FLOAT) -> "BottleneckChannel":
        """Deterministic bottleneck sending cell ``c`` to ``labels[c]``."""
        labels = [int(t) for t in labels]
        n_out = n_out if n_out is not None else max(labels) + 1
        m = np.zeros((n_out, len(labels)), dtype=object if mode == EXACT else float)
        if mode == EXACT:
            m[:] = Fraction(0)
        for c, t in enumerate(labels):
            m[t, c] = Fraction(1) if mode == EXACT else 1.0
        return cls(m, x_size, y_size, mode=mode)

    @property
    def deterministic(self) -> bool:
        return self.is_deterministic()

    def _rebuild(self, matrix):
        return BottleneckChannel(matrix, self.x_size, self.y_size, self.output)


class JointDist:
    """A joint distribution ``table[x, y] = p(x, y)`` with cached marginals."""

    def __init__(self, table, x_alphabet: Alphabet | int | None = None,
                 y_alphabet: Alphabet | int | None = None, *, mode: str | None = None,
                 repair: bool = False, support_epsilon: float = DEFAULT_SUPPORT_EPSILON):
        arr = as_array(table, mode)
        if arr.ndim != 2:
            raise DimensionMismatch("a joint table is 2-d (x by y)")
        flat = _validate_columns(arr.reshape(-1, 1), repair, "joint distribution")
        self.table = _frozen(np.array(flat.reshape(arr.shape)))
        self.mode = array_mode(self.table)
        self.x_alphabet = _coerce_alphabet(x_alphabet, arr.shape[0])
        self.y_alphabet = _coerce_alphabet(y_alphabet, arr.shape[1])
        self.support_epsilon = support_epsilon
        self.marginal_x = Dist(self.table.sum(axis=1), self.x_alphabet, mode=self.mode, repair=True)
        self.marginal_y = Dist(self.table.sum(axis=0), self.y_alphabet, mode=self.mode, repair=True)
        self.support = _support_mask(self.table, support_epsilon)

    @classmethod
    def from_channel(cls, ch: Channel, p_x: Dist, **kw) -> "JointDist":
        """p(x, y) = p(x) * ch(y | x)."""
        mode = _check_same_mode(ch, p_x)
        if ch.n_in != len(p_x):
            raise DimensionMismatch("p(X) length differs from channel input size")
        table = (ch.matrix * p_x.mass[None, :]).T
        return cls(table, ch.input, ch.output, mode=mode, repair=mode == FLOAT, **kw)

    @classmethod
    def independent(cls, p_x: Dist, p_y: Dist) -> "JointDist":
        mode = _check_same_mode(p_x, p_y)
        return cls(np.outer(p_x.mass, p_y.mass), p_x.alphabet, p_y.alphabet, mode=mode,
                   repair=mode == FLOAT)

    @property
    def shape(self) -> tuple[int, int]:
        return self.table.shape

    @property
    def nx(self) -> int:
        return self.table.shape[0]

    @property
    def ny(self) -> int:
        return self.table.shape[1]

    def __repr__(self):
        return f"JointDist({self.nx}x{self.ny}, mode={self.mode!r})"

    def flat(self) -> Dist:
        """The joint as a distribution over the product alphabet."""
        return Dist(self.table.reshape(-1), self.x_alphabet.product(self.y_alphabet), mode=self.mode)

    def product_of_marginals(self) -> Dist:
        prod = np.outer(self.marginal_x.mass, self.marginal_y.mass).reshape(-1)
        return Dist(prod, self.x_alphabet.product(self.y_alphabet), mode=self.mode,
                    repair=self.mode == FLOAT)

    def is_fully_supported(self) -> bool:
        return bool(np.all(self.support))

    def conditional_y_given_x(self) -> Channel:
        if not np.all(self.marginal_x.support(self.support_epsilon)):
            raise InvalidDistribution("p(X) is not fully supported")
        return Channel((self.table / self.marginal_x.mass[:, None]).T, self.x_alphabet,
                       self.y_alphabet, mode=self.mode, repair=self.mode == FLOAT)

    def to_float(self) -> "JointDist":
        if self.mode == FLOAT:
            return self
        return JointDist(_to_float_array(self.table), self.x_alphabet, self.y_alphabet,
                         repair=True, support_epsilon=self.support_epsilon)


class Permutation:
    """A bijection of ``{0, ..., n-1}``; ``p(i) == p.map[i]``."""

    __slots__ = ("map",)

    def __init__(self, mapping: Iterable[int]):
        m = tuple(int(i) for i in mapping)
        if sorted(m) != list(range(len(m))):
            raise ValueError(f"{m} is not a permutation")
        self.map = m

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def cycle(cls, n: int, *cycle: int) -> "Permutation":
        m = list(range(n))
        for a, b in zip(cycle, cycle[1:] + cycle[:1]):
            m[a] = b
        return cls(m)

    @classmethod
    def shift(cls, n: int, k: int = 1) -> "Permutation":
        return cls((i + k) % n for i in range(n))

    @property
    def size(self) -> int:
        return len(self.map)

    def __len__(self):
        return len(self.map)

    def __call__(self, i: int) -> int:
        return self.map[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        """Composition: ``(self * other)(i) == self(other(i))``."""
        if self.size != other.size:
            raise DimensionMismatch("permutations act on different sets")
        return Permutation(self.map[i] for i in other.map)

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, j in enumerate(self.map):
            inv[j] = i
        return Permutation(inv)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.map))

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for i in range(self.size):
            if i in seen or self.map[i] == i:
                continue
            cyc, j = [], i
            while j not in seen:
                seen.add(j)
                cyc.append(j)
                j = self.map[j]
            out.append(tuple(cyc))
        return out

    def cycle_notation(self) -> str:
        cyc = self.cycles()
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cyc) if cyc else "()"

    def __eq__(self, other):
        return isinstance(other, Permutation) and self.map == other.map

    def __lt__(self, other):
        return self.map < other.map

    def __hash__(self):
        return hash(self.map)

    def __repr__(self):
        return f"Permutation({list(self.map)})"


# ---------------------------------------------------------------------------
# channel algebra
# ---------------------------------------------------------------------------


def _zeros(shape, mode: str) -> np.ndarray:
    if mode == EXACT:
        z = np.empty(shape, dtype=object)
        z[...] = Fraction(0)
        return z
    return np.zeros(shape)


def identity_channel(n: int | Alphabet, mode: str = FLOAT) -> Channel:
    alph = n if isinstance(n, Alphabet) else Alphabet(n)
    m = _zeros((alph.size, alph.size), mode)
    for i in range(alph.size):
        m[i, i] = Fraction(1) if mode == EXACT else 1.0
    return Channel(m, alph, alph, mode=mode)


def constant_channel(column: Dist, n_in: int) -> Channel:
    """Channel whose every column equals ``column``."""
    m = np.repeat(np.asarray(column.mass).reshape(-1, 1), n_in, axis=1)
    return Channel(m, n_in, column.alphabet, mode=column.mode)


def compose(f: Channel, g: Channel) -> Channel:
    """Channel composition ``f o g``: ``(f o g)(c|a) = sum_b f(c|b) g(b|a)``."""
    mode = _check_same_mode(f, g)
    if f.n_in != g.n_out:
        raise DimensionMismatch(f"cannot compose: f takes {f.n_in} symbols, g emits {g.n_out}")
    m = f.matrix @ g.matrix
    out = Channel(m, g.input, f.output, mode=mode, repair=mode == FLOAT)
    # keep the X x Y bookkeeping when the product alphabet survives the composition
    if isinstance(g, BottleneckChannel):
        return BottleneckChannel(out.matrix, g.x_size, g.y_size, f.output)
    if isinstance(f, BottleneckChannel) and g.n_in == g.n_out == f.n_in:
        return BottleneckChannel(out.matrix, f.x_size, f.y_size, f.output)
    return out


def tensor(mu: Channel, eta: Channel) -> Channel:
    """``(mu (x) eta)((x', y') | (x, y)) = mu(x'|x) * eta(y'|y)`` in row-major pairing."""
    mode = _check_same_mode(mu, eta)
    m = np.kron(mu.matrix, eta.matrix)
    return Channel(m, mu.input.product(eta.input), mu.output.product(eta.output), mode=mode,
                   repair=mode == FLOAT)


def pushforward(k: Channel, p: Dist) -> Dist:
    """Output distribution ``sum_a k(b|a) p(a)``."""
    mode = _check_same_mode(k, p)
    if k.n_in != len(p):
        raise DimensionMismatch(f"channel takes {k.n_in} symbols, distribution has {len(p)}")
    mass = _exact_matvec(k.matrix, p.mass) if mode == EXACT else k.matrix @ p.mass
    return Dist(mass, k.output, mode=mode, repair=mode == FLOAT)


def _exact_matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``m @ v`` over Fractions, skipping zero and unit coefficients."""
    out = [Fraction(0)] * m.shape[0]
    for a, va in enumerate(v):
        if va == 0:
            continue
        for b, mba in enumerate(m[:, a]):
            if mba == 0:
                continue
            out[b] += va if mba == 1 else mba * va
    res = np.empty(m.shape[0], dtype=object)
    res[:] = out
    return res


def permutation_to_channel(s: Permutation, mode: str = FLOAT) -> Channel:
    """Deterministic channel with ``result(b|a) = 1`` iff ``b == s(a)``."""
    m = _zeros((s.size, s.size), mode)
    for a, b in enumerate(s.map):
        m[b, a] = Fraction(1) if mode == EXACT else 1.0
    return Channel(m, mode=mode)


def product_permutation(sigma: Permutation, tau: Permutation) -> Permutation:
    """``sigma (x) tau`` acting on product indices ``x * |Y| + y``."""
    ny = tau.size
    return Permutation(sigma(x) * ny + tau(y) for x in range(sigma.size) for y in range(ny))
