"""Bohmian trajectories stay distributed as |psi|^2.

A thousand configurations are drawn from a free Gaussian and moved by the
guidance equation while the packet spreads. Their histogram is compared
with the evolved density, and each trajectory with the exact scaling
x(t) = x(0) sqrt(1 + (t / 2 sigma0^2)^2).
"""
from gie_lab.scenarios import equivariance

verdict = equivariance()
for key, value in sorted(verdict.metrics.items()):
    print(f"{key:36s} {value}")
print("equivariant" if verdict.passed else "NOT equivariant")
