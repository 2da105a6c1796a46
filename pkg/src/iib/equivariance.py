"""Exact channel equivariances.

A pair of permutations ``(sigma, tau)`` is an equivariance of ``p(Y|X)`` when
``p(tau(y) | sigma(x)) == p(y | x)`` for every cell.  The set of such pairs
is a group under componentwise composition.

The search treats the channel as an ``|X| x |Y|`` matrix of cell colours and
enumerates colour-preserving row/column permutation pairs by backtracking:
sigma is assigned one input at a time and the admissible images of every
output are narrowed (as bitsets) after each assignment.  The same engine is
reused for any cell colouring, e.g. bottleneck labels or likelihood ratios.
"""

from __future__ import annotations

import itertools
import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog, nnls

from .foundation import (
    EXACT,
    FLOAT,
    BottleneckChannel,
    Channel,
    DimensionMismatch,
    Dist,
    IIBError,
    JointDist,
    Permutation,
    product_permutation,
)
from .partition import IIBSolution, ratio_matrix, solve_iib_max

DEFAULT_TOL = 1e-12
DEFAULT_MAX_NODES = 10**7
EXHAUSTIVE_LIMIT = 10**6


class SearchBudgetExceeded(IIBError, RuntimeError):
    pass


class NoUniformizingInput(IIBError, ValueError):
    pass


class JointNotFullySupported(IIBError, ValueError):
    pass


@dataclass(frozen=True, order=True)
class EquivariancePair:
    sigma: Permutation
    tau: Permutation

    def __mul__(self, other: "EquivariancePair") -> "EquivariancePair":
        return EquivariancePair(self.sigma * other.sigma, self.tau * other.tau)

    def inverse(self) -> "EquivariancePair":
        return EquivariancePair(self.sigma.inverse(), self.tau.inverse())

    def is_identity(self) -> bool:
        return self.sigma.is_identity() and self.tau.is_identity()

    @classmethod
    def identity(cls, nx: int, ny: int) -> "EquivariancePair":
        return cls(Permutation.identity(nx), Permutation.identity(ny))

    def __str__(self):
        return f"({self.sigma.cycle_notation()}, {self.tau.cycle_notation()})"


@dataclass
class EquivarianceGroup:
    pairs: tuple[EquivariancePair, ...]
    nodes: int = 0

    def __post_init__(self):
        self.pairs = tuple(sorted(set(self.pairs)))

    @property
    def order(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair):
        return pair in set(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def as_set(self) -> frozenset:
        return frozenset(self.pairs)

    def generators(self) -> list[EquivariancePair]:
        """A small generating set, chosen greedily in sorted order."""
        if not self.pairs:
            return []
        generated = {p for p in self.pairs if p.is_identity()}
        gens: list[EquivariancePair] = []
        for p in self.pairs:
            if p in generated:
                continue
            gens.append(p)
            frontier = list(generated)
            generated.add(p)
            frontier.append(p)
            while frontier:
                a = frontier.pop()
                for g in gens:
                    b = a * g
                    if b not in generated:
                        generated.add(b)
                        frontier.append(b)
            if len(generated) == len(self.pairs):
                break
        return gens


@dataclass
class SearchConfig:
    tol: float = DEFAULT_TOL
    max_nodes: int = DEFAULT_MAX_NODES
    method: str = "auto"  # "auto" | "pruned" | "exhaustive"
    exhaustive_limit: int = EXHAUSTIVE_LIMIT


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------


def _values_equal(a, b, tol: float, exact: bool) -> bool:
    if exact and tol == 0:
        return a == b
    return abs(float(a) - float(b)) <= tol


def is_equivariance(ch: Channel, pair: EquivariancePair, tol: float = DEFAULT_TOL) -> bool:
    """``ch(tau(y) | sigma(x)) == ch(y | x)`` for all cells (exact when ``tol == 0``)."""
    sigma, tau = pair.sigma, pair.tau
    if sigma.size != ch.n_in or tau.size != ch.n_out:
        raise DimensionMismatch("permutation sizes do not match the channel")
    m = ch.matrix
    exact = ch.mode == EXACT
    for x in range(ch.n_in):
        sx = sigma(x)
        for y in range(ch.n_out):
            if not _values_equal(m[tau(y), sx], m[y, x], tol, exact):
                return False
    return True


def is_invariance(ch: Channel, sigma: Permutation, tol: float = DEFAULT_TOL) -> bool:
    """``ch(y | sigma(x)) == ch(y | x)`` for all cells."""
    return is_equivariance(ch, EquivariancePair(sigma, Permutation.identity(ch.n_out)), tol)


def kappa_fixed_by(kappa: BottleneckChannel, pair: EquivariancePair, tol: float = 0.0) -> bool:
    """``kappa o (sigma (x) tau) == kappa``.

    Column ``c`` of ``kappa o P`` is column ``P(c)`` of ``kappa``; for a
    deterministic ``kappa`` columns are compared as point masses.
    """
    perm = product_permutation(pair.sigma, pair.tau).map
    if kappa.is_deterministic():
        lab = kappa.labels()
        return all(lab[perm[c]] == lab[c] for c in range(kappa.n_in))
    m = kappa.matrix
    exact = kappa.mode == EXACT
    return all(_values_equal(m[t, perm[c]], m[t, c], tol, exact)
               for c in range(kappa.n_in) for t in range(kappa.n_out))


# ---------------------------------------------------------------------------
# colour-preserving pair search
# ---------------------------------------------------------------------------


def colour_codes(values: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Integer colour per entry; entries share a colour iff they are equal.

    Object arrays compare exactly.  Float arrays are sorted and split at
    gaps wider than ``tol``, which keeps the relation transitive.
    """
    values = np.asarray(values)
    flat = values.ravel()
    codes = np.empty(flat.shape, dtype=np.int64)
    if values.dtype == object:
        seen: dict = {}
        for i, v in enumerate(flat):
            codes[i] = seen.setdefault(v, len(seen))
        return codes.reshape(values.shape)
    order = np.argsort(flat, kind="stable")
    code = 0
    for k, idx in enumerate(order):
        if k and flat[idx] - flat[order[k - 1]] > tol:
            code += 1
        codes[idx] = code
    return codes.reshape(values.shape)


def _bits(indices) -> int:
    out = 0
    for i in indices:
        out |= 1 << int(i)
    return out


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.nodes = 0

    def tick(self):
        self.nodes += 1
        if self.nodes > self.limit:
            raise SearchBudgetExceeded(f"search exceeded {self.limit} nodes")


def preserving_pairs_pruned(codes: np.ndarray, max_nodes: int = DEFAULT_MAX_NODES,
                            first_choices: list[int] | None = None,
                            budget: _Budget | None = None) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All ``(sigma, tau)`` with ``codes[sigma(x), tau(y)] == codes[x, y]``.

    ``codes`` is indexed ``[x, y]``.  ``first_choices`` restricts the image
    of the first input in the search order (used to split work).
    """
    codes = np.asarray(codes)
    nx, ny = codes.shape
    budget = budget or _Budget(max_nodes)
    col_fp = [tuple(sorted(Counter(codes[x, :].tolist()).items())) for x in range(nx)]
    row_fp = [tuple(sorted(Counter(codes[:, y].tolist()).items())) for y in range(ny)]
    sigma_cand = [[x2 for x2 in range(nx) if col_fp[x2] == col_fp[x]] for x in range(nx)]
    tau0 = [_bits(y2 for y2 in range(ny) if row_fp[y2] == row_fp[y]) for y in range(ny)]
    # rows_with[x'][c]: outputs y' with codes[x', y'] == c
    rows_with = []
    for x2 in range(nx):
        d: dict[int, int] = {}
        for y2 in range(ny):
            d[int(codes[x2, y2])] = d.get(int(codes[x2, y2]), 0) | (1 << y2)
        rows_with.append(d)
    # fail-first: inputs with the rarest fingerprints go first
    order = sorted(range(nx), key=lambda x: (len(sigma_cand[x]), x))
    results = []
    sigma = [-1] * nx

    def complete_tau(tau_cand):
        tau = [-1] * ny
        y_order = sorted(range(ny), key=lambda y: bin(tau_cand[y]).count("1"))

        def rec(k, used):
            if k == ny:
                results.append((tuple(sigma), tuple(tau)))
                return
            y = y_order[k]
            for y2 in _iter_bits(tau_cand[y] & ~used):
                budget.tick()
                tau[y] = y2
                rec(k + 1, used | (1 << y2))
            tau[y] = -1

        rec(0, 0)

    def assign(level, used, tau_cand):
        if level == nx:
            complete_tau(tau_cand)
            return
        x = order[level]
        choices = sigma_cand[x]
        if level == 0 and first_choices is not None:
            choices = [c for c in choices if c in first_choices]
        for x2 in choices:
            if used >> x2 & 1:
                continue
            budget.tick()
            table = rows_with[x2]
            new = []
            for y in range(ny):
                m = tau_cand[y] & table.get(int(codes[x, y]), 0)
                if not m:
                    break
                new.append(m)
            else:
                sigma[x] = x2
                assign(level + 1, used | (1 << x2), new)
                sigma[x] = -1

    assign(0, 0, tau0)
    return results


def preserving_pairs_exhaustive(codes: np.ndarray) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Brute-force double loop over all ``|X|! |Y|!`` pairs."""
    codes = np.asarray(codes)
    nx, ny = codes.shape
    out = []
    for s in itertools.permutations(range(nx)):
        for t in itertools.permutations(range(ny)):
            if all(codes[s[x], t[y]] == codes[x, y] for x in range(nx) for y in range(ny)):
                out.append((s, t))
    return out


def _n_threads() -> int:
    n = int(os.environ.get("IIB_THREADS", "0") or 0)
    return n if n > 0 else min(8, os.cpu_count() or 1)


def _search(codes: np.ndarray, cfg: SearchConfig) -> tuple[list[EquivariancePair], int]:
    nx, ny = codes.shape
    method = cfg.method
    if method == "auto":
        method = "pruned"
    if method == "exhaustive":
        if math.factorial(nx) * math.factorial(ny) > cfg.exhaustive_limit:
            raise SearchBudgetExceeded(
                f"exhaustive search over {nx}!*{ny}! pairs exceeds the limit {cfg.exhaustive_limit}")
        raw = preserving_pairs_exhaustive(codes)
        nodes = math.factorial(nx) * math.factorial(ny)
    elif method == "pruned":
        budget = _Budget(cfg.max_nodes)
        raw = preserving_pairs_pruned(codes, budget=budget)
        nodes = budget.nodes
    else:
        raise ValueError(f"unknown search method {method!r}")
    return [EquivariancePair(Permutation(s), Permutation(t)) for s, t in raw], nodes


def enumerate_group(ch: Channel, cfg: SearchConfig | None = None) -> EquivarianceGroup:
    """The exact equivariance group of ``ch``."""
    cfg = cfg or SearchConfig()
    tol = 0.0 if ch.mode == EXACT else cfg.tol
    codes = colour_codes(ch.matrix.T, tol)
    pairs, nodes = _search(codes, cfg)
    return EquivarianceGroup(tuple(pairs), nodes)


def enumerate_group_parallel(ch: Channel, cfg: SearchConfig | None = None) -> EquivarianceGroup:
    """As :func:`enumerate_group`, splitting on the first sigma image across
    threads (``IIB_THREADS``, 0 = auto).  The merged result is sorted."""
    cfg = cfg or SearchConfig()
    tol = 0.0 if ch.mode == EXACT else cfg.tol
    codes = colour_codes(ch.matrix.T, tol)
    nx = codes.shape[0]
    budget = _Budget(cfg.max_nodes)

    def branch(first):
        return preserving_pairs_pruned(codes, first_choices=[first], budget=budget)

    with ThreadPoolExecutor(max_workers=_n_threads()) as pool:
        chunks = list(pool.map(branch, range(nx)))
    pairs = [EquivariancePair(Permutation(s), Permutation(t)) for chunk in chunks for s, t in chunk]
    return EquivarianceGroup(tuple(pairs), budget.nodes)


def check_group_axioms(g: EquivarianceGroup | set | list) -> bool:
    """Identity present, closed under composition and inverses."""
    pairs = set(g.pairs if isinstance(g, EquivarianceGroup) else g)
    if not pairs:
        return False
    first = next(iter(pairs))
    if EquivariancePair.identity(first.sigma.size, first.tau.size) not in pairs:
        return False
    for a in pairs:
        if a.inverse() not in pairs:
            return False
        for b in pairs:
            if a * b not in pairs:
                return False
    return True


# ---------------------------------------------------------------------------
# uniformizing input
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Infeasible:
    """No input distribution makes the output uniform."""

    residual: float = math.inf

    def __bool__(self):
        return False


def _rank_and_solve(a: list[list[Fraction]], b: list[Fraction]):
    """Exact Gauss-Jordan elimination.

    Returns ``(rank, solution)``; ``solution`` is ``None`` when the system is
    inconsistent or has free variables.
    """
    rows, cols = len(a), len(a[0]) if a else 0
    m = [list(r) + [bi] for r, bi in zip(a, b)]
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [vi - f * vr for vi, vr in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if any(m[i][cols] != 0 for i in range(r, rows)):
        return r, None
    if r < cols:
        return r, None
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        x[c] = m[i][cols]
    return r, x


def _exact_uniformizing(ch: Channel) -> Dist | Infeasible:
    nx, ny = ch.n_in, ch.n_out
    a = [[ch.matrix[y, x] for x in range(nx)] for y in range(ny)]
    u = [Fraction(1, ny)] * ny
    uniform_x = [Fraction(1, nx)] * nx
    if all(sum(a[y][x] * uniform_x[x] for x in range(nx)) == u[y] for y in range(ny)):
        return Dist(uniform_x, ch.input, mode=EXACT)
    rank, _ = _rank_and_solve(a, u)
    vertices = set()
    for support in itertools.combinations(range(nx), rank):
        sub = [[row[x] for x in support] for row in a]
        r, sol = _rank_and_solve(sub, u)
        if sol is None or r < rank or any(v < 0 for v in sol):
            continue
        p = [Fraction(0)] * nx
        for x, v in zip(support, sol):
            p[x] = v
        vertices.add(tuple(p))
    if not vertices:
        return Infeasible()
    # the vertex centroid lies in the relative interior, so it is positive
    # wherever any feasible input is
    k = len(vertices)
    centroid = [sum(v[x] for v in vertices) / k for x in range(nx)]
    return Dist(centroid, ch.input, mode=EXACT)


FEASIBILITY_TOL = 1e-8
RESIDUAL_TOL = 1e-10


def _float_uniformizing(ch: Channel) -> Dist | Infeasible:
    a = ch.matrix
    ny, nx = a.shape
    u = np.full(ny, 1.0 / ny)
    px = np.full(nx, 1.0 / nx)
    if np.max(np.abs(a @ px - u)) <= RESIDUAL_TOL:
        return Dist(px, ch.input, repair=True)
    # active-set least squares over the simplex; the sum row is heavily weighted
    w = 1e3
    sol, _ = nnls(np.vstack([a, w * np.ones((1, nx))]), np.concatenate([u, [w]]))
    residual = float(np.linalg.norm(a @ sol - u))
    if residual > FEASIBILITY_TOL:
        return Infeasible(residual)
    # push towards the interior: maximise the smallest entry
    c = np.zeros(nx + 1)
    c[-1] = -1.0
    a_eq = np.hstack([np.vstack([a, np.ones((1, nx))]), np.zeros((ny + 1, 1))])
    b_eq = np.concatenate([u, [1.0]])
    a_ub = np.hstack([-np.eye(nx), np.ones((nx, 1))])
    lp = linprog(c, A_ub=a_ub, b_ub=np.zeros(nx), A_eq=a_eq, b_eq=b_eq,
                 bounds=[(0, None)] * nx + [(0, 1)], method="highs")
    p = lp.x[:nx] if lp.status == 0 else sol
    # polish onto the affine set {a p = u}
    for _ in range(3):
        corr = np.linalg.lstsq(np.vstack([a, np.ones((1, nx))]),
                               np.concatenate([u - a @ p, [1.0 - p.sum()]]), rcond=None)[0]
        cand = p + corr
        if np.all(cand >= 0):
            p = cand
    p = np.clip(p, 0.0, None)
    if np.max(np.abs(a @ (p / p.sum()) - u)) > RESIDUAL_TOL:
        p = sol
    return Dist(p / p.sum(), ch.input, repair=True)


def find_uniformizing_input(ch: Channel) -> Dist | Infeasible:
    """An input distribution whose image through ``ch`` is uniform.

    Uniform ``p(X)`` is returned when it works.  Otherwise exact mode
    returns the centroid of the feasible polytope's vertices and float mode
    a max-min interior point; both are strictly positive whenever some
    strictly positive solution exists.  :class:`Infeasible` when the uniform
    distribution lies outside the convex hull of the columns.
    """
    if ch.mode == EXACT:
        return _exact_uniformizing(ch)
    return _float_uniformizing(ch)


# ---------------------------------------------------------------------------
# cross-check of the equivariance / compression duality
# ---------------------------------------------------------------------------


@dataclass
class Theorem1Config:
    tol: float = DEFAULT_TOL
    max_nodes: int = DEFAULT_MAX_NODES
    exhaustive_below: int = 1000  # use the brute-force double loop when |X|!|Y|! <= this


@dataclass
class Theorem1Report:
    p_x: Dist
    joint: JointDist
    solution: IIBSolution
    channel_pairs: frozenset  # A: p(tau y | sigma x) == p(y | x)
    kappa_pairs: frozenset  # B: kappa o (sigma x tau) == kappa
    ratio_pairs: frozenset  # C: (x, y) ~ (sigma x, tau y)
    method: str
    literal_checks: int = 0
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.channel_pairs == self.kappa_pairs == self.ratio_pairs

    @property
    def order(self) -> int:
        return len(self.channel_pairs)

    def summary(self) -> str:
        verdict = "PASS A==B==C" if self.passed else "FAIL"
        return (f"{verdict}, order {self.order} "
                f"(|A|={len(self.channel_pairs)}, |B|={len(self.kappa_pairs)}, "
                f"|C|={len(self.ratio_pairs)}, method={self.method})")


def _ratio_codes(j: JointDist, tol: float) -> np.ndarray:
    r = ratio_matrix(j)
    if j.mode == EXACT:
        return colour_codes(r)
    return colour_codes(np.log(np.asarray(r, dtype=float)), tol)


def _kappa_codes(kappa: BottleneckChannel, nx: int, ny: int, tol: float) -> np.ndarray:
    if kappa.is_deterministic():
        return np.asarray(kappa.labels()).reshape(nx, ny)
    cols = [tuple(kappa.matrix[:, c]) for c in range(kappa.n_in)]
    if kappa.mode == EXACT:
        seen: dict = {}
        return np.array([seen.setdefault(c, len(seen)) for c in cols]).reshape(nx, ny)
    # float columns: equal within tol entrywise
    reps: list[np.ndarray] = []
    out = []
    for c in range(kappa.n_in):
        col = kappa.matrix[:, c]
        for k, r in enumerate(reps):
            if np.max(np.abs(col - r)) <= tol:
                out.append(k)
                break
        else:
            reps.append(col)
            out.append(len(reps) - 1)
    return np.array(out).reshape(nx, ny)


def verify_theorem1(ch: Channel, cfg: Theorem1Config | None = None,
                    kappa: BottleneckChannel | None = None) -> Theorem1Report:
    """Compare three characterisations of the equivariance group.

    * A: pairs satisfying ``p(tau y | sigma x) == p(y | x)``;
    * B: pairs with ``kappa o (sigma (x) tau) == kappa`` for the closed-form
      solution ``kappa`` at lambda = I(X;Y) (or a supplied solution);
    * C: pairs mapping every cell to a cell with the same likelihood ratio.

    Requires a uniformizing input and a fully supported joint.  Every pair
    found by the search is re-checked with the literal predicate.
    """
    cfg = cfg or Theorem1Config()
    p_x = find_uniformizing_input(ch)
    if isinstance(p_x, Infeasible):
        raise NoUniformizingInput("uniform p(Y) is outside the convex hull of the channel columns")
    j = JointDist.from_channel(ch, p_x)
    if not j.is_fully_supported():
        raise JointNotFullySupported("the joint built from the uniformizing input has zero cells")
    sol = solve_iib_max(j)
    kap = kappa if kappa is not None else sol.kappa
    nx, ny = ch.n_in, ch.n_out
    tol = 0.0 if ch.mode == EXACT else cfg.tol

    codes_a = colour_codes(ch.matrix.T, tol)
    codes_b = _kappa_codes(kap, nx, ny, tol)
    codes_c = _ratio_codes(j, 1e-9 if ch.mode == FLOAT else 0.0)

    if math.factorial(nx) * math.factorial(ny) <= cfg.exhaustive_below:
        method = "exhaustive"
        every = [EquivariancePair(Permutation(s), Permutation(t))
                 for s in itertools.permutations(range(nx))
                 for t in itertools.permutations(range(ny))]
        ratios = ratio_matrix(j)

        def same_ratio(pair):
            return all(_values_equal(ratios[pair.sigma(x), pair.tau(y)], ratios[x, y],
                                     0.0 if ch.mode == EXACT else 1e-9 * abs(float(ratios[x, y])),
                                     ch.mode == EXACT)
                       for x in range(nx) for y in range(ny))

        a = frozenset(p for p in every if is_equivariance(ch, p, tol))
        b = frozenset(p for p in every if kappa_fixed_by(kap, p, tol))
        c = frozenset(p for p in every if same_ratio(p))
        checks = 3 * len(every)
    else:
        method = "pruned"
        found = []
        for codes in (codes_a, codes_b, codes_c):
            pairs, _ = _search(codes, SearchConfig(tol=tol, max_nodes=cfg.max_nodes, method="pruned"))
            found.append(frozenset(pairs))
        a, b, c = found
        checks = 0
        for p in a:
            assert is_equivariance(ch, p, tol)
            checks += 1
        for p in b:
            assert kappa_fixed_by(kap, p, tol)
            checks += 1
    return Theorem1Report(p_x, j, sol, a, b, c, method, checks)
