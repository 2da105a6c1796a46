"""Stochastic symmetries of a bottleneck and how noise breaks them.

A pair of stochastic maps (mu, eta) is a soft equivariance of kappa when
kappa o (mu (x) eta) = kappa.  Permutation pairs from the exact group are
soft equivariances of the closed-form kappa; a constant kappa accepts every
pair.  Perturbing the channel breaks the exact symmetry and the kernel
residual measures by how much.
"""

from iib import (
    EXACT,
    SoftPair,
    SoftSearchConfig,
    enumerate_group,
    is_soft_equivariance,
    kernel_residual,
    perturbation_study,
    search_soft_equivariances,
    solve_iib_max,
)
from iib.foundation import BottleneckChannel, Channel
from iib.generators import binary_symmetric_channel, binary_symmetric_joint
from iib.soft import PerturbationConfig



def matrix_text(ch):
    return "[" + "; ".join(" ".join(str(v) for v in row) for row in ch.matrix) + "]"


kappa = solve_iib_max(binary_symmetric_joint(EXACT)).kappa
for pair in enumerate_group(binary_symmetric_channel(mode=EXACT)):
    sp = SoftPair.from_permutations(pair, EXACT)
    print(f"{pair}: satisfied {is_soft_equivariance(kappa, sp)}, residual {kernel_residual(kappa, sp)}")

blur = SoftPair(Channel([["3/4", "1/4"], ["1/4", "3/4"]], mode=EXACT),
                Channel([["3/4", "1/4"], ["1/4", "3/4"]], mode=EXACT))
print(f"blurring both coordinates: residual {kernel_residual(kappa, blur)}")
constant = BottleneckChannel.from_labels([0, 0, 0, 0], 2, 2, mode=EXACT)
print(f"constant kappa accepts the blur: {is_soft_equivariance(constant, blur)}")

found = search_soft_equivariances(kappa, SoftSearchConfig(seeds=16))
print(f"search found {len(found)} distinct pairs:")
for p in found:
    print(f"  mu={matrix_text(p.mu)} eta={matrix_text(p.eta)}")

swap = [p for p in enumerate_group(binary_symmetric_channel()) if not p.is_identity()][0]
cfg = PerturbationConfig(lambda_fractions=(0.5, 1.0))
for eps in (0.0, 0.01, 0.05):
    rep = perturbation_study(binary_symmetric_channel(), eps, seed=0, cfg=cfg)
    print(f"eps {eps:<5}: swap residual at half / full information "
          f"{rep.residual(swap, 0):.4f} / {rep.residual(swap, 1):.4f}")
