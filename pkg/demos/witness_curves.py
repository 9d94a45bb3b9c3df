"""Witness curves for the three gravity models over four seconds.

Only the Newtonian coupling drives the witness negative; the two
semi-classical models stay at or above zero for all times. Writes
witness_curves.csv and witness_curves.svg to the current directory.
"""
import numpy as np

from gie_lab import ExperimentGeometry, PhysicalConstants
from gie_lab.diagnostics import CLOSED_FORMS
from gie_lab.svgplot import witness_svg

geom = ExperimentGeometry(d=450e-6, delta=250e-6, m1=1e-14, m2=1e-14)
consts = PhysicalConstants()
print(f"gamma = G m1 m2 / hbar = {geom.gamma(consts):.6e} m/s")

t = np.linspace(0.0, 4.0, 2000)
curves = {f"W_{name}": f(geom, consts, t) for name, f in CLOSED_FORMS.items()}

for name, w in curves.items():
    i = int(np.argmin(w))
    at_one = float(CLOSED_FORMS[name[2:]](geom, consts, 1.0))
    print(f"{name:6s} min {w[i]: .6f} at t = {t[i]:.3f} s, W(1 s) = {at_one: .6f}")

# Newton: first time the witness certifies entanglement at a visible margin
wn = curves["W_N"]
first = t[np.argmax(wn < -0.05)]
print(f"W_N first drops below -0.05 at t = {first:.3f} s")

with open("witness_curves.csv", "w") as fh:
    fh.write("t," + ",".join(curves) + "\n")
    for row in zip(t, *curves.values()):
        fh.write(",".join(f"{v:.12g}" for v in row) + "\n")
with open("witness_curves.svg", "w") as fh:
    fh.write(witness_svg(t, curves, guide_t=2.0))
print("wrote witness_curves.csv, witness_curves.svg")
