"""The Information Bottleneck and Symmetric IB as restricted bottlenecks.

Compressing only X, kappa = kx (x) e_Y, turns the preserved divergence into
I(T;Y) and the cost into I(X;T) - I(Y;T) + H(Y).  Compressing both sides
independently, kappa = kx (x) ky, gives I(T_X;T_Y) and
I(X;T_X) + I(Y;T_Y) - I(T_X;T_Y).  Each identity is checked against direct
entropy sums over the full joint table.
"""

import numpy as np

from iib import check_equality_at_optimum, mutual_information, verify_ib_identities, verify_sib_identities
from iib.generators import binary_symmetric_joint, random_channel, random_joint

rng = np.random.default_rng(0)
worst_ib = worst_sib = 0.0
for _ in range(200):
    j = random_joint(int(rng.integers(2, 5)), int(rng.integers(2, 5)), seed=int(rng.integers(2**32)))
    kx = random_channel(j.nx, 3, rng)
    ky = random_channel(j.ny, 2, rng)
    worst_ib = max(worst_ib, verify_ib_identities(kx, j).discrepancy)
    worst_sib = max(worst_sib, verify_sib_identities(kx, ky, j).discrepancy)
print(f"200 random instances: IB discrepancy {worst_ib:.1e}, SIB discrepancy {worst_sib:.1e}")

# at the optimum the information constraint is tight (grid search, |T| = 2)
j = binary_symmetric_joint()
for frac in (0.25, 0.5, 0.9):
    r = check_equality_at_optimum(j, frac * mutual_information(j))
    print(f"lambda = {frac:.2f} I: optimum I(X;T) {r.optimum:.4f}, "
          f"I(Y;T) at optimum {min(r.achieved):.4f}..{max(r.achieved):.4f}, tight: {r.passed}")
