"""The Information Bottleneck and the Symmetric IB as shape-constrained IIB.

Restricting the bottleneck to ``kx (x) e_Y`` turns the IIB functionals into
the IB quantities; restricting it to ``kx (x) ky`` gives the symmetric IB.
The ``verify_*`` functions evaluate each identity along two paths that share
no code: the IIB functionals applied to the lifted channel, and direct
entropy sums over the explicit joint table ``q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .foundation import (
    BottleneckChannel,
    Channel,
    DimensionMismatch,
    JointDist,
    identity_channel,
    tensor,
)
from .info_measures import iib_constraint, iib_objective

IB_X = "IB_X"
IB_Y = "IB_Y"
SIB = "SIB"
IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class LiftedChannel:
    kind: str
    factors: tuple[Channel, ...]
    lifted: BottleneckChannel


def _lift(kind: str, left: Channel, right: Channel, factors) -> LiftedChannel:
    lifted = tensor(left, right)
    out = left.output.product(right.output)
    return LiftedChannel(kind, tuple(factors),
                         BottleneckChannel(lifted.matrix, left.n_in, right.n_in, out))


def lift_ib(kx: Channel, y_size: int) -> LiftedChannel:
    """``kx (x) e_Y``: compress X, keep Y.  Output alphabet is ``T_ib x Y``."""
    return _lift(IB_X, kx, identity_channel(y_size, kx.mode), (kx,))


def lift_ib_y(ky: Channel, x_size: int) -> LiftedChannel:
    """``e_X (x) ky``: keep X, compress Y."""
    return _lift(IB_Y, identity_channel(x_size, ky.mode), ky, (ky,))


def lift_sib(kx: Channel, ky: Channel) -> LiftedChannel:
    """``kx (x) ky``: compress both coordinates independently."""
    return _lift(SIB, kx, ky, (kx, ky))


# ---------------------------------------------------------------------------
# direct-summation path
# ---------------------------------------------------------------------------


def _h(p: np.ndarray) -> float:
    """Entropy in nats of a probability array of any shape."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return -math.fsum(p * np.log(p))


def _mi(q: np.ndarray, a: tuple[int, ...], b: tuple[int, ...]) -> float:
    """``I(A;B)`` for groups of axes ``a`` and ``b`` of the joint array ``q``."""
    axes = set(range(q.ndim))
    qa = q.sum(axis=tuple(axes - set(a)))
    qb = q.sum(axis=tuple(axes - set(b)))
    qab = q.sum(axis=tuple(axes - set(a) - set(b)))
    return _h(qa) + _h(qb) - _h(qab)


@dataclass
class IdentityReport:
    """Two evaluations of each identity, in nats."""

    constraint_iib: float
    constraint_direct: float
    objective_iib: float
    objective_direct: float
    tol: float
    chain_direct: float | None = None  # I_q(X,Y;T) from the full table, SIB only

    @property
    def discrepancy(self) -> float:
        d = max(abs(self.constraint_iib - self.constraint_direct),
                abs(self.objective_iib - self.objective_direct))
        if self.chain_direct is not None:
            d = max(d, abs(self.chain_direct - self.objective_direct))
        return d

    @property
    def passed(self) -> bool:
        return self.discrepancy <= self.tol


def _float_table(j: JointDist) -> np.ndarray:
    return np.asarray(j.to_float().table, dtype=float)


def verify_ib_identities(kx: Channel, j: JointDist, tol: float = IDENTITY_TOL) -> IdentityReport:
    """Check, for ``q(x, y, t) = p(x, y) kx(t | x)``,

    * preserved divergence of ``kx (x) e_Y`` equals ``I_q(T;Y)``;
    * ``I(X,Y; T, Y)`` equals ``I_q(X;T) - I_q(Y;T) + H(Y)``.
    """
    if kx.n_in != j.nx:
        raise DimensionMismatch(f"kx reads {kx.n_in} symbols, X has {j.nx}")
    lifted = lift_ib(kx, j.ny).lifted
    con = float(iib_constraint(lifted, j))
    obj = float(iib_objective(lifted, j))

    p = _float_table(j)
    k = np.asarray(kx.to_float().matrix, dtype=float)  # [t, x]
    q = np.einsum("xy,tx->xyt", p, k)
    con_d = _mi(q, (2,), (1,))
    obj_d = _mi(q, (0,), (2,)) - _mi(q, (1,), (2,)) + _h(q.sum(axis=(0, 2)))
    return IdentityReport(con, con_d, obj, obj_d, tol)


def verify_sib_identities(kx: Channel, ky: Channel, j: JointDist,
                          tol: float = IDENTITY_TOL) -> IdentityReport:
    """Check, for ``q(x, y, tx, ty) = p(x, y) kx(tx | x) ky(ty | y)``,

    * preserved divergence of ``kx (x) ky`` equals ``I_q(T_X;T_Y)``;
    * ``I(X,Y; T_X,T_Y)`` equals ``I_q(X;T_X) + I_q(Y;T_Y) - I_q(T_X;T_Y)``;
    * ``I_q(X,Y; T_X,T_Y)`` summed directly over ``q`` agrees with the latter.
    """
    if kx.n_in != j.nx or ky.n_in != j.ny:
        raise DimensionMismatch("factor input sizes must match the joint")
    lifted = lift_sib(kx, ky).lifted
    con = float(iib_constraint(lifted, j))
    obj = float(iib_objective(lifted, j))

    p = _float_table(j)
    a = np.asarray(kx.to_float().matrix, dtype=float)
    b = np.asarray(ky.to_float().matrix, dtype=float)
    q = np.einsum("xy,sx,ty->xyst", p, a, b)
    con_d = _mi(q, (2,), (3,))
    obj_d = _mi(q, (0,), (2,)) + _mi(q, (1,), (3,)) - con_d
    chain = _mi(q, (0, 1), (2, 3))
    return IdentityReport(con, con_d, obj, obj_d, tol, chain)


# ---------------------------------------------------------------------------
# equality of the constraint at the optimum, on a grid
# ---------------------------------------------------------------------------


@dataclass
class OptimumReport:
    lam: float
    resolution: float
    optimum: float  # min I(X;T) over feasible grid points
    achieved: list[float]  # I(Y;T) at every grid-optimal point
    slack: float
    passed: bool


def _ib_grid(p: np.ndarray, resolution: float):
    """I(X;T) and I(Y;T) for every ``kx = [[a, b], [1 - a, 1 - b]]`` on the grid."""
    steps = int(round(1.0 / resolution))
    g = np.linspace(0.0, 1.0, steps + 1)
    a, b = np.meshgrid(g, g, indexing="ij")
    px = p.sum(axis=1)
    py = p.sum(axis=0)

    def h2(*cols):
        total = 0.0
        for c in cols:
            with np.errstate(divide="ignore", invalid="ignore"):
                total = total - np.where(c > 0, c * np.log(np.where(c > 0, c, 1.0)), 0.0)
        return total

    qt0 = a * px[0] + b * px[1]
    h_t = h2(qt0, 1.0 - qt0)
    h_t_x = px[0] * h2(a, 1.0 - a) + px[1] * h2(b, 1.0 - b)
    i_xt = h_t - h_t_x
    h_t_y = 0.0
    for y in range(2):
        # q(t=0 | y) = sum_x p(x | y) kx(0 | x)
        t0 = (p[0, y] * a + p[1, y] * b) / py[y]
        h_t_y = h_t_y + py[y] * h2(t0, 1.0 - t0)
    i_yt = h_t - h_t_y
    return i_xt, i_yt


def check_equality_at_optimum(j: JointDist, lam: float, resolution: float = 0.01) -> OptimumReport:
    """Grid search of ``min I(X;T)`` subject to ``I(Y;T) >= lam`` with
    ``|X| = |Y| = |T| = 2``.

    Passes when every grid-optimal point has ``I(Y;T)`` in
    ``[lam, lam + slack]``; ``slack`` is the largest change of ``I(Y;T)``
    between neighbouring grid points, the resolution limit of the grid.
    """
    if j.shape != (2, 2):
        raise DimensionMismatch("the grid check is defined for 2 x 2 joints")
    p = _float_table(j)
    i_xt, i_yt = _ib_grid(p, resolution)
    feasible = i_yt >= lam - 1e-12
    if not feasible.any():
        raise ValueError("lambda exceeds the largest achievable I(Y;T)")
    best = float(i_xt[feasible].min())
    optimal = feasible & (i_xt <= best + 1e-12)
    slack = float(max(np.abs(np.diff(i_yt, axis=0)).max(), np.abs(np.diff(i_yt, axis=1)).max()))
    achieved = [float(v) for v in i_yt[optimal]]
    passed = all(lam - 1e-12 <= v <= lam + slack for v in achieved)
    return OptimumReport(float(lam), resolution, best, achieved, slack, passed)
