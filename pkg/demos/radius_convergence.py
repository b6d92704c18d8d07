"""How slowly R(nu) nu^{1/3} approaches its large-Z limit in TF theory.

The radius outside which nu electrons remain converges to a universal
constant only when Z is huge. This prints the approach.
"""
from hfatom.electrostatics import radius_of_charge
from hfatom.grid import RadialGrid
from hfatom.verification import RADIUS_CONSTANT
from hfatom.thomas_fermi import solve_neutral_tf

print(f"limit: {RADIUS_CONSTANT:.5f}")
print("        Z      nu=4     nu=10     nu=20")
for Z in (1e2, 1e3, 1e6, 1e9):
    sol = solve_neutral_tf(Z, grid=RadialGrid.log(1e-6 / Z, 2000.0, 8000))
    vals = [radius_of_charge(sol.rho, nu) * nu ** (1 / 3) for nu in (4, 10, 20)]
    print(f"{Z:9.0e}" + "".join(f"{v:10.4f}" for v in vals))
