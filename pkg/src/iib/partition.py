"""Likelihood-ratio partition and the closed-form IIB solution at lambda = I(X;Y).

Cells ``(x, y)`` of the support are grouped by the value of
``p(x, y) / (p(x) p(y))``.  Clustering a joint onto these classes preserves
all of ``I(X;Y)`` with the least possible ``I(X,Y;T)``; every other optimal
bottleneck is that clustering followed by a congruent channel (a channel
that only relabels or splits symbols).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .foundation import (
    EXACT,
    FLOAT,
    Alphabet,
    BottleneckChannel,
    Channel,
    Dist,
    IIBError,
    JointDist,
)
from .info_measures import entropy, mutual_information

RATIO_TOLERANCE = 1e-9


class MarginalNotFullSupport(IIBError, ValueError):
    """The likelihood ratio is undefined when a marginal has a zero."""


@dataclass(frozen=True)
class PartitionConfig:
    ratio_tolerance: float = RATIO_TOLERANCE  # on |log r1 - log r2|, float mode only


@dataclass(frozen=True)
class SupportPartition:
    """Equivalence classes of support cells sharing the same likelihood ratio.

    ``classes[j - 1]`` is the sorted tuple of product indices in class ``j``;
    classes are numbered by their smallest member.  ``complement`` holds the
    zero-probability cells.
    """

    joint: JointDist = field(repr=False, compare=False)
    classes: tuple[tuple[int, ...], ...]
    complement: tuple[int, ...]
    ratios: tuple  # representative ratio per class (Fraction or float)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def labels(self) -> np.ndarray:
        """Class label of every cell; 0 marks the complement."""
        lab = np.zeros(self.joint.nx * self.joint.ny, dtype=int)
        for j, cls in enumerate(self.classes, start=1):
            lab[list(cls)] = j
        return lab

    def class_masses(self) -> Dist:
        flat = self.joint.table.reshape(-1)
        mass = [sum(flat[c] for c in cls) for cls in self.classes]
        return Dist(mass, mode=self.joint.mode, repair=self.joint.mode == FLOAT)

    def cells(self, j: int) -> list[tuple[int, int]]:
        ny = self.joint.ny
        return [divmod(c, ny) for c in self.classes[j - 1]]


@dataclass
class IIBSolution:
    kappa: BottleneckChannel
    lambda_achieved: object
    objective: object
    partition: SupportPartition | None = None
    diagnostics: dict = field(default_factory=dict)


def _require_full_marginals(j: JointDist):
    eps = j.support_epsilon
    if not (np.all(j.marginal_x.support(eps)) and np.all(j.marginal_y.support(eps))):
        raise MarginalNotFullSupport("p(X) and p(Y) must be fully supported")


def likelihood_ratio(j: JointDist, x: int, y: int):
    """``p(x, y) / (p(x) p(y))``; zero on zero-probability cells."""
    _require_full_marginals(j)
    return j.table[x, y] / (j.marginal_x[x] * j.marginal_y[y])


def ratio_matrix(j: JointDist) -> np.ndarray:
    _require_full_marginals(j)
    return j.table / np.outer(j.marginal_x.mass, j.marginal_y.mass)


def build_partition(j: JointDist, cfg: PartitionConfig | None = None) -> SupportPartition:
    """Group support cells into level sets of the likelihood ratio."""
    cfg = cfg or PartitionConfig()
    ratios = ratio_matrix(j).reshape(-1)
    support = j.support.reshape(-1)
    complement = tuple(int(c) for c in np.flatnonzero(~support))
    cells = [int(c) for c in np.flatnonzero(support)]

    groups: list[list[int]] = []
    reps: list = []
    if j.mode == EXACT:
        by_value: dict[Fraction, list[int]] = {}
        for c in cells:
            by_value.setdefault(ratios[c], []).append(c)
        for value, members in by_value.items():
            groups.append(members)
            reps.append(value)
    else:
        # single linkage on the log scale: split sorted log-ratios at gaps
        # wider than the tolerance, which is transitive by construction
        logs = np.log(ratios[cells])
        order = np.argsort(logs, kind="stable")
        current = [cells[order[0]]] if cells else []
        for prev, nxt in zip(order, order[1:]):
            if logs[nxt] - logs[prev] > cfg.ratio_tolerance:
                groups.append(current)
                current = []
            current.append(cells[nxt])
        if current:
            groups.append(current)
        reps = [float(np.exp(np.mean(np.log(ratios[g])))) for g in groups]

    order = sorted(range(len(groups)), key=lambda k: min(groups[k]))
    classes = tuple(tuple(sorted(groups[k])) for k in order)
    return SupportPartition(j, classes, complement, tuple(reps[k] for k in order))


def canonical_kappa(part: SupportPartition) -> BottleneckChannel:
    """The deterministic clustering onto class labels.

    Output symbols are ``1..n`` (index ``j - 1``) for a fully supported
    joint.  Otherwise the alphabet is ``0..n`` and symbol ``0`` (index 0)
    collects the complement cells.
    """
    j = part.joint
    n = part.n_classes
    labels = part.labels()
    if part.complement:
        out = Alphabet(n + 1, tuple(str(t) for t in range(n + 1)))
        idx = labels
    else:
        out = Alphabet(n, tuple(str(t) for t in range(1, n + 1)))
        idx = labels - 1
    kappa = BottleneckChannel.from_labels(idx, j.nx, j.ny, out.size, mode=j.mode)
    return BottleneckChannel(kappa.matrix, j.nx, j.ny, out)


def solve_iib_max(j: JointDist, cfg: PartitionConfig | None = None) -> IIBSolution:
    """Closed-form IIB solution at lambda = I(X;Y).

    ``lambda_achieved`` is ``I(X;Y)`` and ``objective`` is the entropy of the
    class masses; both are returned in the joint's numeric mode.
    """
    part = build_partition(j, cfg)
    kappa = canonical_kappa(part)
    return IIBSolution(kappa, mutual_information(j), entropy(part.class_masses()), part)


def is_congruent(g: Channel, tol: float = 0.0) -> bool:
    """True iff the column supports are pairwise disjoint."""
    m = g.matrix
    if g.mode == EXACT:
        support = np.array([[v != 0 for v in row] for row in m], dtype=bool)
    else:
        support = m > tol
    return bool(np.all(support.sum(axis=1) <= 1))


@dataclass
class MembershipResult:
    """Outcome of :func:`is_iib_max_solution`.

    On success ``gamma`` is the congruent channel with
    ``kappa == gamma o pi`` on the support.  On failure ``violation``
    describes the first offending cells or classes.
    """

    ok: bool
    gamma: Channel | None = None
    violation: str | None = None

    def __bool__(self):
        return self.ok


def is_iib_max_solution(kappa: BottleneckChannel, j: JointDist,
                        cfg: PartitionConfig | None = None, tol: float = 1e-12) -> MembershipResult:
    """Decide whether ``kappa`` solves the IIB problem at lambda = I(X;Y).

    ``kappa`` must agree column-for-column inside each likelihood-ratio
    class, and different classes must reach disjoint sets of bottleneck
    symbols.  Columns on zero-probability cells are unconstrained.
    """
    if kappa.n_in != j.nx * j.ny:
        raise ValueError("bottleneck input size does not match the joint")
    if kappa.mode != j.mode:
        kappa, j = kappa.to_float(), j.to_float()
    part = build_partition(j, cfg)
    m = kappa.matrix
    exact = kappa.mode == EXACT

    def same(a, b):
        if exact and tol == 0:
            return bool(np.all(m[:, a] == m[:, b]))
        return float(np.max(np.abs(np.asarray(m[:, a], float) - np.asarray(m[:, b], float)))) <= tol

    reps = []
    for k, cls in enumerate(part.classes, start=1):
        first = cls[0]
        for c in cls[1:]:
            if not same(first, c):
                return MembershipResult(False, violation=(
                    f"class {k}: columns of cells {divmod(first, j.ny)} and "
                    f"{divmod(c, j.ny)} differ"))
        reps.append(first)

    gamma = np.stack([m[:, c] for c in reps], axis=1) if reps else np.zeros((kappa.n_out, 0))
    if exact:
        support = np.array([[v != 0 for v in row] for row in gamma], dtype=bool)
    else:
        support = gamma > tol
    shared = np.flatnonzero(support.sum(axis=1) > 1)
    if shared.size:
        t = int(shared[0])
        owners = [k + 1 for k in np.flatnonzero(support[t])]
        return MembershipResult(False, violation=(
            f"bottleneck symbol {t} is reached from classes {owners}"))
    return MembershipResult(True, gamma=Channel(gamma, part.n_classes, kappa.output,
                                                mode=kappa.mode, repair=not exact))


def merge_classes(part: SupportPartition, a: int, b: int) -> BottleneckChannel:
    """Canonical clustering with classes ``a`` and ``b`` sent to one symbol."""
    labels = part.labels()
    labels[labels == b] = a
    remap = {old: new for new, old in enumerate(sorted(set(labels.tolist())))}
    idx = [remap[v] for v in labels]
    return BottleneckChannel.from_labels(idx, part.joint.nx, part.joint.ny, mode=part.joint.mode)
