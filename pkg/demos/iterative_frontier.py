"""Trading preserved divergence against compression cost.

``solve_iib_at`` looks for a bottleneck that keeps a target amount of the
divergence between p(X, Y) and p(X) p(Y) at the lowest I(X,Y;T).  At the
two ends the answers are known: nothing kept costs nothing, and keeping
everything costs the entropy of the likelihood-ratio classes.
"""

import numpy as np

from iib import SolverConfig, mutual_information, pareto_sweep, solve_iib_at, solve_iib_max
from iib.generators import random_joint

j = random_joint(3, 3, seed=7)
mi = float(mutual_information(j))
ref = solve_iib_max(j)
print(f"I(X;Y) = {mi:.6f} nats, closed-form cost at full information {float(ref.objective):.6f}")

cfg = SolverConfig(seed=1)
for lam in (0.0, mi):
    sol = solve_iib_at(j, lam, cfg)
    d = sol.diagnostics
    print(f"target {lam:.6f}: kept {sol.lambda_achieved:.6f}, cost {sol.objective:.6f} "
          f"(beta {d['beta']:.3g}, {len(d['runs'])} runs)")

print("frontier (cost is the best found at this or any larger kept value):")
for p in pareto_sweep(j, np.linspace(0.0, mi, 6), SolverConfig(seed=1, restarts=2)):
    print(f"  target {p.lambda_target:.4f} -> kept {p.lambda_achieved:.4f}, cost {p.objective:.4f}")
