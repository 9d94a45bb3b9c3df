"""Separable potentials cannot entangle: the two-qubit picture.

Each model fixes four branch phases. A phase table that splits as
g1[k] + g2[l] leaves the equal-weight state a product, whatever the
phases are. Below, the entropy of every separable model stays at zero
while Newtonian gravity builds it up. The last block takes the
Bohmian branch phases and puts each branch's own phase on the diagonal.
That state is entangled, but no single dynamics produces it: every
branch evolution is itself a product.
"""
import numpy as np

from gie_lab import (
    BRANCH_PAIRS,
    NS,
    NSB,
    ExperimentGeometry,
    Newton,
    PhysicalConstants,
    dg_branch_states,
    dg_diagonal_state,
    entanglement_entropy,
    nsb_family,
    nsb_mixture,
    ppt_min_eigenvalue,
    state_at,
    witness_mixed,
)

geom = ExperimentGeometry()
consts = PhysicalConstants()

print(f"{'t (s)':>6} {'S_N':>10} {'S_NS':>10} {'max S_NSB':>10} {'PPT min':>10} {'W_mix':>10}")
for t in (0.0, 0.5, 1.0, 2.0, 4.0):
    s_n = entanglement_entropy(state_at(Newton(), geom, consts, t))
    s_ns = entanglement_entropy(state_at(NS(), geom, consts, t))
    s_nsb = max(entanglement_entropy(state_at(NSB(b), geom, consts, t)) for b in BRANCH_PAIRS)
    rho = nsb_mixture(geom, consts, t)
    print(f"{t:6.1f} {s_n:10.3e} {s_ns:10.3e} {s_nsb:10.3e} {ppt_min_eigenvalue(rho):10.3e} {witness_mixed(rho):10.3e}")

family = nsb_family(geom, consts)
t = 1.0
print("\nBohmian branch states at t = 1 s")
for (m, n), state in dg_branch_states(family, t).items():
    print(f"  branch {m.name}{n.name}: entropy {entanglement_entropy(state):.2e}")
diag = dg_diagonal_state(family, t)
print(f"diagonal-phase state: entropy {entanglement_entropy(diag):.4f}, produced by a dynamics: {diag.is_dynamical}")
print(f"ln 2 for reference: {np.log(2):.4f}")
