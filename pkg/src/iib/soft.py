"""Soft equivariances of a bottleneck channel.

A pair of stochastic maps ``(mu, eta)`` on X and Y is a soft equivariance of
``kappa`` when ``kappa o (mu (x) eta) == kappa``, i.e. every vector
``(mu (x) eta) e_c - e_c`` lies in the kernel of ``kappa``.  Satisfying pairs
form a semigroup containing the identity; deterministic permutation pairs in
it are exactly the equivariances of the channel when ``kappa`` is the
closed-form solution at lambda = I(X;Y).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .equivariance import (
    EquivariancePair,
    enumerate_group,
    find_uniformizing_input,
    Infeasible,
    NoUniformizingInput,
    SearchConfig,
)
from .foundation import (
    EXACT,
    FLOAT,
    BottleneckChannel,
    Channel,
    DimensionMismatch,
    JointDist,
    compose,
    identity_channel,
    permutation_to_channel,
    tensor,
)
from .generators import perturb
from .info_measures import mutual_information
from .iterative import SolverConfig, solve_iib_at
from .simplex import project_columns


@dataclass(frozen=True)
class SoftPair:
    mu: Channel
    eta: Channel

    def __post_init__(self):
        for name, ch in (("mu", self.mu), ("eta", self.eta)):
            if ch.n_in != ch.n_out:
                raise DimensionMismatch(f"{name} must be square, got {ch.shape}")

    @property
    def nx(self) -> int:
        return self.mu.n_in

    @property
    def ny(self) -> int:
        return self.eta.n_in

    @property
    def mode(self) -> str:
        return EXACT if self.mu.mode == EXACT and self.eta.mode == EXACT else FLOAT

    @classmethod
    def identity(cls, nx: int, ny: int, mode: str = FLOAT) -> "SoftPair":
        return cls(identity_channel(nx, mode), identity_channel(ny, mode))

    @classmethod
    def from_permutations(cls, pair: EquivariancePair, mode: str = FLOAT) -> "SoftPair":
        return cls(permutation_to_channel(pair.sigma, mode), permutation_to_channel(pair.tau, mode))

    def to_float(self) -> "SoftPair":
        return SoftPair(self.mu.to_float(), self.eta.to_float())

    def distance(self, other: "SoftPair") -> float:
        """Max entrywise distance over both components."""
        a = np.abs(self.mu.to_float().matrix - other.mu.to_float().matrix).max()
        b = np.abs(self.eta.to_float().matrix - other.eta.to_float().matrix).max()
        return float(max(a, b))


def _check_dims(kappa: BottleneckChannel, pair: SoftPair):
    if (pair.nx, pair.ny) != (kappa.x_size, kappa.y_size):
        raise DimensionMismatch(
            f"pair acts on {pair.nx}x{pair.ny}, bottleneck on {kappa.x_size}x{kappa.y_size}")


def is_soft_equivariance(kappa: BottleneckChannel, pair: SoftPair, tol: float = 0.0) -> bool:
    """``kappa o (mu (x) eta) == kappa`` entrywise within ``tol``.

    Exact comparison when everything is rational and ``tol == 0``.
    """
    _check_dims(kappa, pair)
    exact = kappa.mode == EXACT and pair.mode == EXACT
    if not exact:
        kappa, pair = kappa.to_float(), pair.to_float()
    moved = compose(kappa, tensor(pair.mu, pair.eta)).matrix
    if exact and tol == 0:
        return bool(np.all(moved == kappa.matrix))
    return float(np.max(np.abs(np.asarray(moved, float) - np.asarray(kappa.matrix, float)))) <= tol


def kernel_residual(kappa: BottleneckChannel, pair: SoftPair):
    """``max_c || kappa ((mu (x) eta) e_c - e_c) ||_inf``.

    Each image ``(mu (x) eta) e_c`` is built as the outer product of the
    columns ``mu[:, x]`` and ``eta[:, y]``, independently of
    :func:`is_soft_equivariance`.  Exact (a Fraction) when everything is
    rational, a float otherwise.
    """
    _check_dims(kappa, pair)
    exact = kappa.mode == EXACT and pair.mode == EXACT
    if not exact:
        kappa, pair = kappa.to_float(), pair.to_float()
    k = kappa.matrix
    mu, eta = pair.mu.matrix, pair.eta.matrix
    nx, ny = pair.nx, pair.ny
    worst = Fraction(0) if exact else 0.0
    for x in range(nx):
        for y in range(ny):
            v = np.outer(mu[:, x], eta[:, y]).reshape(-1)
            v[x * ny + y] -= 1
            image = k @ v
            m = max(abs(e) for e in image)
            if m > worst:
                worst = m
    return worst


def compose_pairs(a: SoftPair, b: SoftPair) -> SoftPair:
    """``(a.mu o b.mu, a.eta o b.eta)``."""
    if (a.nx, a.ny) != (b.nx, b.ny):
        raise DimensionMismatch("pairs act on different alphabets")
    return SoftPair(compose(a.mu, b.mu), compose(a.eta, b.eta))


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


@dataclass
class SoftSearchConfig:
    seeds: int = 32
    max_alt_iters: int = 50
    residual_tol: float = 1e-8
    dedupe_tol: float = 1e-6
    inner_iters: int = 500
    base_seed: int = 0
    init_noise: float = 0.3  # weight of the Dirichlet part of each initial column
    snap_denominator: int = 64
    threads: int | None = None

    def __post_init__(self):
        if min(self.seeds, self.max_alt_iters, self.inner_iters) < 1:
            raise ValueError("seeds, max_alt_iters and inner_iters must be positive")
        if not (self.residual_tol > 0 and self.dedupe_tol > 0):
            raise ValueError("tolerances must be positive")


def _simplex_lstsq(b: np.ndarray, targets: np.ndarray, start: np.ndarray, iters: int) -> np.ndarray:
    """Columns ``v_i`` minimising ``||b v_i - targets_i||`` over the simplex.

    Accelerated projected gradient (FISTA) with step ``1 / ||b||_2^2``,
    followed by an equality-constrained least-squares polish on each
    column's support.
    """
    lip = float(np.linalg.norm(b, 2) ** 2) or 1.0
    bt_b = b.T @ b
    bt_t = b.T @ targets
    v = start.copy()
    z = v.copy()
    s = 1.0
    for _ in range(iters):
        v_next = project_columns(z - (bt_b @ z - bt_t) / lip)
        s_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * s * s))
        z = v_next + ((s - 1.0) / s_next) * (v_next - v)
        v, s = v_next, s_next
    return _polish(b, targets, v)


def _polish(b: np.ndarray, targets: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = v.copy()
    for i in range(v.shape[1]):
        supp = np.flatnonzero(v[:, i] > 1e-9)
        if supp.size == 0:
            continue
        bs = b[:, supp]
        n = supp.size
        kkt = np.zeros((n + 1, n + 1))
        kkt[:n, :n] = bs.T @ bs
        kkt[:n, n] = 1.0
        kkt[n, :n] = 1.0
        rhs = np.concatenate([bs.T @ targets[:, i], [1.0]])
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:n]
        if np.all(sol >= -1e-14):
            cand = np.zeros(v.shape[0])
            cand[supp] = np.clip(sol, 0.0, None)
            cand /= cand.sum()
            if np.linalg.norm(b @ cand - targets[:, i]) <= np.linalg.norm(b @ v[:, i] - targets[:, i]):
                out[:, i] = cand
    return out


def _residual(k3: np.ndarray, mu: np.ndarray, eta: np.ndarray) -> float:
    moved = np.einsum("tab,ax,by->txy", k3, mu, eta)
    return float(np.max(np.abs(moved - k3)))


def _alternate(k3: np.ndarray, mu: np.ndarray, eta: np.ndarray, cfg: SoftSearchConfig):
    """Alternating simplex-constrained least squares on ``||kappa (mu x eta) - kappa||``.

    ``k3[t, x, y] = kappa(t | x, y)``.
    """
    n_t, nx, ny = k3.shape
    res = _residual(k3, mu, eta)
    for _ in range(cfg.max_alt_iters):
        # mu step: rows (t, y), one column per x
        b_mu = np.einsum("tab,by->tya", k3, eta).reshape(n_t * ny, nx)
        tgt_mu = k3.transpose(0, 2, 1).reshape(n_t * ny, nx)
        mu = _simplex_lstsq(b_mu, tgt_mu, mu, cfg.inner_iters)
        # eta step: rows (t, x), one column per y
        b_eta = np.einsum("tab,ax->txb", k3, mu).reshape(n_t * nx, ny)
        tgt_eta = k3.reshape(n_t * nx, ny)
        eta = _simplex_lstsq(b_eta, tgt_eta, eta, cfg.inner_iters)
        new = _residual(k3, mu, eta)
        if new <= cfg.residual_tol * 1e-2 or new >= res - 1e-15:
            res = new
            break
        res = new
    return mu, eta, res


def _snap(kappa: BottleneckChannel, mu: np.ndarray, eta: np.ndarray, denom: int) -> SoftPair | None:
    """Rational pair near ``(mu, eta)`` satisfying the equation exactly, if any."""

    def rational(m):
        out = np.empty(m.shape, dtype=object)
        for idx, v in np.ndenumerate(m):
            out[idx] = Fraction(float(v)).limit_denominator(denom)
        sums = out.sum(axis=0)
        if any(s == 0 for s in sums):
            return None
        return out / sums

    rm, re = rational(mu), rational(eta)
    if rm is None or re is None:
        return None
    pair = SoftPair(Channel(rm, mode=EXACT), Channel(re, mode=EXACT))
    return pair if is_soft_equivariance(kappa, pair, 0.0) else None


def _initial_pair(rng: np.random.Generator, nx: int, ny: int, noise: float):
    def one(n):
        perm = np.eye(n)[:, rng.permutation(n)]
        return (1.0 - noise) * perm + noise * rng.dirichlet(np.ones(n), size=n).T

    return one(nx), one(ny)


def search_soft_equivariances(kappa: BottleneckChannel, cfg: SoftSearchConfig | None = None) -> list[SoftPair]:
    """Local search for pairs with ``kappa o (mu (x) eta) == kappa``.

    Each seed starts from a random permutation pair blended with Dirichlet
    noise and alternates simplex-constrained least-squares updates of ``mu``
    and ``eta``.  The search is heuristic and incomplete.  Returned pairs
    satisfy the equation within ``residual_tol``, are pairwise further apart
    than ``dedupe_tol`` and start with the identity pair.  For a rational
    ``kappa`` a found pair is replaced by a nearby rational pair when that
    pair satisfies the equation exactly.
    """
    cfg = cfg or SoftSearchConfig()
    nx, ny = kappa.x_size, kappa.y_size
    kf = kappa.to_float()
    k3 = kf.matrix.reshape(kf.n_out, nx, ny)

    def run(s):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.base_seed, s]))
        mu0, eta0 = _initial_pair(rng, nx, ny, cfg.init_noise)
        return _alternate(k3, mu0, eta0, cfg)

    threads = cfg.threads or int(os.environ.get("IIB_THREADS", "0") or 0) or min(8, os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        found = list(pool.map(run, range(cfg.seeds)))

    out = [SoftPair.identity(nx, ny, kappa.mode)]
    for mu, eta, res in found:
        if res > cfg.residual_tol:
            continue
        cand = None
        if kappa.mode == EXACT:
            cand = _snap(kappa, mu, eta, cfg.snap_denominator)
        if cand is None:
            cand = SoftPair(Channel(mu, repair=True), Channel(eta, repair=True))
            if not is_soft_equivariance(kf, cand, cfg.residual_tol):
                continue
        if all(cand.distance(p) > cfg.dedupe_tol for p in out):
            out.append(cand)
    return out


# ---------------------------------------------------------------------------
# perturbation study
# ---------------------------------------------------------------------------


@dataclass
class PerturbationConfig:
    lambda_fractions: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)  # of I(X;Y) of the perturbed joint
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(restarts=2))
    group: SearchConfig = field(default_factory=SearchConfig)


@dataclass
class LambdaResult:
    lambda_target: float
    lambda_achieved: float
    objective: float
    residuals: dict  # EquivariancePair -> kernel residual


@dataclass
class PerturbationReport:
    epsilon: float
    seed: int
    pairs: tuple[EquivariancePair, ...]
    perturbed: Channel
    mutual_information: float
    results: list[LambdaResult]

    def residual(self, pair: EquivariancePair, fraction_index: int = -1) -> float:
        return self.results[fraction_index].residuals[pair]


def perturbation_study(ch: Channel, epsilon: float, seed: int = 0,
                       cfg: PerturbationConfig | None = None) -> PerturbationReport:
    """Track how the exact equivariances of ``ch`` survive channel noise.

    The exact group of ``ch`` is computed first.  ``ch`` is then perturbed by
    multiplicative noise of size ``epsilon`` and joined with the uniformizing
    input of the unperturbed channel.  For each lambda (a fraction of the
    perturbed joint's mutual information) the iterative solver's ``kappa``
    is scored by the kernel residual of every original pair.
    """
    cfg = cfg or PerturbationConfig()
    p_x = find_uniformizing_input(ch)
    if isinstance(p_x, Infeasible):
        raise NoUniformizingInput("uniform p(Y) is outside the convex hull of the channel columns")
    group = enumerate_group(ch, cfg.group)
    noisy = perturb(ch, epsilon, seed)
    j = JointDist.from_channel(noisy, p_x.to_float())
    mi = float(mutual_information(j))
    soft = {p: SoftPair.from_permutations(p) for p in group.pairs}
    results = []
    for frac in cfg.lambda_fractions:
        lam = min(max(frac * mi, 0.0), mi)
        sol = solve_iib_at(j, lam, cfg.solver)
        res = {p: float(kernel_residual(sol.kappa, sp)) for p, sp in soft.items()}
        results.append(LambdaResult(lam, sol.lambda_achieved, sol.objective, res))
    return PerturbationReport(float(epsilon), seed, group.pairs, noisy, mi, results)
