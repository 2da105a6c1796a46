"""Numerical IIB solver for intermediate lambda.

Minimises the Lagrangian ``L_beta(kappa) = I(X,Y;T) - beta * D(q || q~)``
over column-stochastic ``kappa`` for each beta of a schedule, then returns
the solution whose preserved divergence is closest to the requested lambda.
No optimality guarantee is claimed.

The default step is a fixed-point iteration on the stationarity condition.
Writing ``w_c = p(x, y)``, ``w~_c = p(x) p(y)``, ``r_c = w_c / w~_c``, ``q`` and
``q~`` for the two pushforwards of ``kappa``,

    kappa(t | c)  propto  q(t)^(1 + beta) q~(t)^(-beta) exp(-beta q(t) / (q~(t) r_c)).

At beta = 0 this is the Blahut-Arimoto step for the rate term alone and
collapses every column to ``q``.  A constant ``kappa`` is a fixed point for
every beta, so each (restart, beta) pair starts from the restart's own random
initialisation rather than from the previous beta's solution.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .foundation import BottleneckChannel, JointDist
from .info_measures import iib_constraint, iib_objective, mutual_information
from .partition import IIBSolution
from .simplex import project_columns

MULTIPLICATIVE = "multiplicative-update"
PROJECTED_GRADIENT = "projected-gradient"
STEP_RULES = (MULTIPLICATIVE, PROJECTED_GRADIENT)


def default_beta_schedule() -> list[float]:
    return [0.0] + [float(b) for b in np.geomspace(1.0, 1e12, 25)]


@dataclass
class SolverConfig:
    bottleneck_size: int | None = None  # None: |X| * |Y|
    beta_schedule: list[float] = field(default_factory=default_beta_schedule)
    restarts: int = 4
    seed: int = 0
    max_iters: int = 10_000
    conv_tol: float = 1e-9
    step_rule: str = MULTIPLICATIVE
    constraint_slack: float = 1e-4
    learning_rate: float = 0.05  # projected-gradient only
    threads: int | None = None  # None: IIB_THREADS or cpu count
    feasibility_tol: float = 1e-12
    split_noise: float = 0.1

    def __post_init__(self):
        if self.bottleneck_size is not None and self.bottleneck_size < 1:
            raise ValueError("bottleneck_size must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.conv_tol > 0:
            raise ValueError("conv_tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule must be one of {STEP_RULES}")
        if any(b < 0 for b in self.beta_schedule) or not self.beta_schedule:
            raise ValueError("beta_schedule must be a non-empty list of non-negative reals")


@dataclass
class RunRecord:
    restart: int
    beta: float
    objective: float
    constraint: float
    iterations: int
    converged: bool
    lagrangian_monotone: bool
    start: str = "cold"  # "cold": from the restart's initialisation; "anneal": warm chain


def _threads(cfg: SolverConfig) -> int:
    if cfg.threads:
        return cfg.threads
    n = int(os.environ.get("IIB_THREADS", "0") or 0)
    return n if n > 0 else min(8, os.cpu_count() or 1)


def _functionals(kappa: np.ndarray, w: np.ndarray, wt: np.ndarray) -> tuple[float, float]:
    """(I(C;T), D(q || q~)) in nats, float kernels only."""
    q = kappa @ w
    qt = kappa @ wt
    joint = kappa * w
    with np.errstate(divide="ignore", invalid="ignore"):
        m = joint > 0
        obj = float(np.sum(joint[m] * np.log((kappa / q[:, None])[m])))
        mq = q > 0
        con = float(np.sum(q[mq] * np.log(q[mq] / qt[mq])))
    return max(obj, 0.0), max(con, 0.0)


def _multiplicative_step(kappa, w, wt, inv_r, zero_cells, beta):
    """One fixed-point step; call under ``np.errstate(divide="ignore", invalid="ignore")``.

    ``inv_r`` holds ``1 / r_c`` (0 on zero-probability cells, handled via
    ``zero_cells``).
    """
    q = kappa @ w
    qt = kappa @ wt
    logq = np.log(q)
    if beta == 0:
        score = np.repeat(logq[:, None], kappa.shape[1], axis=1)
    else:
        rho = q / qt
        rho[qt <= 0] = 0.0
        base = (1.0 + beta) * logq - beta * np.log(qt)
        score = base[:, None] - (beta * rho)[:, None] * inv_r
        # zero-probability cells: the r -> 0 limit puts all mass on argmin q/q~
        if zero_cells.any():
            target = np.full(kappa.shape[0], -np.inf)
            live = np.flatnonzero(q > 0)
            target[live[np.argmin(rho[live])] if live.size else 0] = 0.0
            score[:, zero_cells] = target[:, None]
    score[np.isnan(score)] = -np.inf
    out = np.exp(score - score.max(axis=0))
    return out / out.sum(axis=0)


def _gradient_step(kappa, w, wt, beta, lr):
    q = kappa @ w
    qt = kappa @ wt
    tiny = 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        g_obj = w[None, :] * np.log(np.maximum(kappa, tiny) / np.maximum(q, tiny)[:, None])
        g_con = (w[None, :] * (np.log(np.maximum(q, tiny) / np.maximum(qt, tiny)) + 1.0)[:, None]
                 - wt[None, :] * np.where(qt > 0, q / np.maximum(qt, tiny), 0.0)[:, None])
    grad = g_obj - beta * g_con
    scale = np.maximum(w, wt)[None, :]
    return project_columns(kappa - lr * grad / np.maximum(scale, tiny))


def _run(init: np.ndarray, w, wt, r, beta, cfg: SolverConfig):
    kappa = init
    prev_l = math.inf
    monotone = True
    converged = False
    it = 0
    zero_cells = r <= 0
    inv_r = np.zeros_like(r)
    inv_r[~zero_cells] = 1.0 / r[~zero_cells]
    for it in range(1, cfg.max_iters + 1):
        if cfg.step_rule == MULTIPLICATIVE:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                new = _multiplicative_step(kappa, w, wt, inv_r, zero_cells, beta)
        else:
            new = _gradient_step(kappa, w, wt, beta, cfg.learning_rate)
        delta = float(np.max(np.abs(new - kappa)))
        kappa = new
        obj, con = _functionals(kappa, w, wt)
        lag = obj - beta * con
        if lag > prev_l + 1e-12 * max(1.0, abs(prev_l)):
            monotone = False
        prev_l = lag
        if delta < cfg.conv_tol:
            converged = True
            break
    return kappa, it, converged, monotone


def _merge_duplicates(kappa: np.ndarray, w: np.ndarray, wt: np.ndarray) -> np.ndarray:
    """Merge symbols with the same ``q / q~``; such copies are interchangeable
    and would otherwise hold every free symbol."""
    kappa = kappa.copy()
    q = kappa @ w
    qt = kappa @ wt
    live = [int(t) for t in np.flatnonzero((q > 0) & (qt > 0))]
    kappa[[t for t in range(kappa.shape[0]) if t not in live]] = 0.0
    live.sort(key=lambda t: q[t] / qt[t])
    groups: list[list[int]] = []
    for t in live:
        if groups and math.log(q[t] / qt[t]) - math.log(q[groups[-1][-1]] / qt[groups[-1][-1]]) < 1e-6:
            groups[-1].append(t)
        else:
            groups.append([t])
    for g in groups:
        keep = max(g, key=lambda t: (q[t], -t))
        for t in g:
            if t != keep:
                kappa[keep] += kappa[t]
                kappa[t] = 0.0
    return kappa


def _split_symbols(kappa: np.ndarray, w: np.ndarray, wt: np.ndarray, r: np.ndarray,
                   rng: np.random.Generator, noise: float) -> np.ndarray:
    kappa = _merge_duplicates(kappa, w, wt)
    q = kappa @ w
    # free symbols go to the clusters whose cells disagree most on log r;
    # splitting a homogeneous cluster would only create a duplicate
    with np.errstate(divide="ignore"):
        logr = np.where(r > 0, np.log(np.where(r > 0, r, 1.0)), 0.0)
    spread = np.zeros(kappa.shape[0])
    for t in np.flatnonzero(q > 0):
        mass = kappa[t] * w / q[t]
        mean = float(mass @ logr)
        spread[t] = float(mass @ (logr - mean) ** 2)
    occupied = [int(t) for t in np.argsort(-spread, kind="stable") if q[t] > 0 and spread[t] > 1e-18]
    free = [t for t in range(kappa.shape[0]) if q[t] <= 0]
    for t, t2 in zip(occupied, free):
        frac = 0.5 * (1.0 + noise * rng.uniform(-1.0, 1.0, size=kappa.shape[1]))
        moved = kappa[t] * frac
        kappa[t] -= moved
        kappa[t2] += moved
    return kappa / kappa.sum(axis=0, keepdims=True)


def _harden(kappa: np.ndarray) -> np.ndarray:
    """Deterministic channel sending each cell to its most likely symbol."""
    out = np.zeros_like(kappa)
    out[np.argmax(kappa, axis=0), np.arange(kappa.shape[1])] = 1.0
    return out


def _initial(n_t: int, n_c: int, seed: int, restart: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), restart]))
    return rng.dirichlet(np.ones(n_t), size=n_c).T


def _select(results, lam: float, cfg: SolverConfig) -> int:
    """Index of the reported run.

    Runs preserving at least ``lam - feasibility_tol`` are feasible for the
    inequality-constrained problem; the cheapest of them wins, with ties
    broken by closeness to ``lam``.  With no feasible run, the runs within
    ``constraint_slack`` of the best distance compete on objective.
    """
    recs = [rec for _, rec in results]
    feasible = [i for i, rec in enumerate(recs) if rec.constraint >= lam - cfg.feasibility_tol]
    if feasible:
        low = min(recs[i].objective for i in feasible)
        near = [i for i in feasible if recs[i].objective <= low + 1e-12]
        return min(near, key=lambda i: (abs(recs[i].constraint - lam), i))
    dist = [abs(rec.constraint - lam) for rec in recs]
    best = min(dist)
    pool_idx = [i for i, d in enumerate(dist) if d <= best + cfg.constraint_slack]
    return min(pool_idx, key=lambda i: (recs[i].objective, i))


def solve_iib_at(j: JointDist, lambda_target: float, cfg: SolverConfig | None = None) -> IIBSolution:
    """Approximate IIB solution with preserved divergence close to ``lambda_target``.

    Every restart runs a warm annealing chain over the beta schedule and a
    cold start at each beta; the winner is picked by :func:`_select`.
    Diagnostics hold one record per run; non-convergence is reported, not
    raised.
    """
    cfg = cfg or SolverConfig()
    jf = j.to_float()
    mi = float(mutual_information(jf))
    lam = float(lambda_target)
    if not 0 <= lam <= mi + 1e-9:
        raise ValueError(f"lambda_target {lam} outside [0, I(X;Y) = {mi}]")
    w = jf.table.reshape(-1).astype(float)
    wt = np.asarray(jf.product_of_marginals().mass, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(wt > 0, w / wt, 0.0)
    n_c = w.size
    n_t = cfg.bottleneck_size or n_c

    inits = [_initial(n_t, n_c, cfg.seed, k) for k in range(cfg.restarts)]
    schedule = sorted(cfg.beta_schedule)

    def chain(k):
        # warm-started annealing: before each beta every occupied symbol is
        # duplicated into a free one with a small asymmetric perturbation,
        # so a cluster can split once beta passes its critical value
        out = []
        kap = inits[k]
        split_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed & (2**64 - 1), k, 1]))
        for beta in schedule:
            start = _split_symbols(kap, w, wt, r, split_rng, cfg.split_noise)
            kap, its, conv, mono = _run(start, w, wt, r, beta, cfg)
            kap = _merge_duplicates(kap, w, wt)
            obj, con = _functionals(kap, w, wt)
            out.append((kap, RunRecord(k, beta, obj, con, its, conv, mono, "anneal")))
            if beta > 0:
                hard = _harden(kap)
                obj, con = _functionals(hard, w, wt)
                out.append((hard, RunRecord(k, beta, obj, con, its, conv, mono, "anneal-hard")))
        for beta in schedule:
            cold, its, conv, mono = _run(inits[k], w, wt, r, beta, cfg)
            cold = _merge_duplicates(cold, w, wt)
            obj, con = _functionals(cold, w, wt)
            out.append((cold, RunRecord(k, beta, obj, con, its, conv, mono, "cold")))
        return out

    with ThreadPoolExecutor(max_workers=_threads(cfg)) as pool:
        results = [item for chunk in pool.map(chain, range(cfg.restarts)) for item in chunk]

    win = _select(results, lam, cfg)
    kappa = BottleneckChannel(results[win][0], jf.nx, jf.ny, repair=True)
    records = [rec for _, rec in results]
    diagnostics = {
        "runs": records,
        "selected": win,
        "beta": results[win][1].beta,
        "restart": results[win][1].restart,
        "converged": results[win][1].converged,
        "iterations": results[win][1].iterations,
        "monotone_fraction": sum(r.lagrangian_monotone for r in records
                                 if cfg.step_rule == MULTIPLICATIVE) / len(records),
        "lambda_target": lam,
    }
    return IIBSolution(kappa, float(iib_constraint(kappa, jf)), float(iib_objective(kappa, jf)),
                       None, diagnostics)


@dataclass
class FrontierPoint:
    lambda_target: float
    lambda_achieved: float
    objective: float
    raw_objective: float


def pareto_sweep(j: JointDist, grid, cfg: SolverConfig | None = None) -> list[FrontierPoint]:
    """Solve at every grid value and report a frontier sorted by achieved lambda.

    Monotone cleanup: the objective needed to preserve ``lambda`` can only
    grow with ``lambda``, so each reported objective is the minimum over the
    points at the same or larger achieved lambda.  The uncleaned value is
    kept in ``raw_objective``.
    """
    cfg = cfg or SolverConfig()
    sols = [(float(lam), solve_iib_at(j, lam, cfg)) for lam in grid]
    sols.sort(key=lambda s: (s[1].lambda_achieved, s[0]))
    out: list[FrontierPoint] = []
    running = math.inf
    for lam, sol in reversed(sols):
        running = min(running, sol.objective)
        out.append(FrontierPoint(lam, sol.lambda_achieved, running, sol.objective))
    return out[::-1]


__all__ = ["SolverConfig", "RunRecord", "FrontierPoint", "solve_iib_at", "pareto_sweep",
           "default_beta_schedule", "MULTIPLICATIVE", "PROJECTED_GRADIENT"]
