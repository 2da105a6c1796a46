"""Closed-form compression that keeps all of I(X;Y).

Cells (x, y) are grouped by the likelihood ratio p(x, y) / (p(x) p(y)).
Sending each cell to its group label preserves the whole mutual
information, and no deterministic bottleneck that does so is cheaper.
"""

from iib import (
    EXACT,
    JointDist,
    build_partition,
    find_uniformizing_input,
    iib_constraint,
    iib_objective,
    is_iib_max_solution,
    mutual_information,
    solve_iib_max,
)
from iib.io import nats_expression
from iib.generators import binary_symmetric_joint, circulant_channel, decreasing_profile
from iib.partition import merge_classes


def show(name, j):
    sol = solve_iib_max(j)
    part = sol.partition
    print(f"{name}: {part.n_classes} classes")
    for k, ratio in enumerate(part.ratios, start=1):
        print(f"  class {k}: ratio {ratio}, cells {part.cells(k)}")
    print(f"  I(X;Y) = {float(sol.lambda_achieved):.6f} nats")
    if j.mode == EXACT:
        print(f"         = {nats_expression(sol.lambda_achieved)}")
    print(f"  cost H(classes) = {float(sol.objective):.6f} nats")
    print(f"  membership check: {bool(is_iib_max_solution(sol.kappa, j, tol=0))}")


# the binary symmetric joint: two classes, agreement and disagreement
show("binary symmetric", binary_symmetric_joint(EXACT))

# a circulant channel driven by its uniformizing input: one class per diagonal
ch = circulant_channel(4, decreasing_profile(4, seed=0))
j = JointDist.from_channel(ch, find_uniformizing_input(ch))
show("circulant n=4", j)

# merging two classes loses information, exactly
merged = merge_classes(build_partition(j), 1, 2)
loss = mutual_information(j) - iib_constraint(merged, j)
print(f"merging classes 1 and 2 keeps {float(iib_constraint(merged, j)):.6f} nats "
      f"(loses {float(loss):.6f}), cost {float(iib_objective(merged, j)):.6f}")
assert loss > 0
