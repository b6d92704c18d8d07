"""Thomas-Fermi atoms: energy scaling and the Sommerfeld tail.

Run with ``python3 demos/tf_atom.py``. Writes nothing, prints a few tables.
"""
import numpy as np

from hfatom.thomas_fermi import solve_neutral_tf, solve_tf, sommerfeld_lower, sommerfeld_upper

# the neutral TF energy is -0.7687 Z^{7/3}, exactly, for every Z
for Z in (1, 10, 100, 1000):
    sol = solve_neutral_tf(Z)
    print(f"Z={Z:5d}  E={sol.energy:14.6f}  E/Z^(7/3)={sol.energy / Z ** (7 / 3):.8f}")

# far out the potential forgets Z and sits between the two Sommerfeld curves
sol = solve_neutral_tf(100)
r = sol.phi.grid.points
print("\n      r        lower          phi          upper")
for x in (0.1, 1.0, 5.0, 20.0):
    i = np.searchsorted(r, x)
    lo = sommerfeld_lower(r[i], 100, 100)
    up = sommerfeld_upper(r[i], 0.0, 100)
    print(f"{r[i]:8.3f} {float(lo):12.5g} {sol.phi.values[i]:12.5g} {float(up):12.5g}")

# a positive ion has a finite radius and a positive chemical potential
ion = solve_tf(10, 5)
print(f"\nNe5+ in TF: mu = {ion.mu:.5f}, electrons = {ion.electrons:.6f}")
