import math

import numpy as np
import pytest

from hfatom.electrostatics import integrate3d, screened_at_radius
from hfatom.errors import DomainError, InvalidInputError
from hfatom.thomas_fermi import (
    TF, ExteriorTFProblem, TFSolution, ionic_profile, solve_exterior_tf, solve_neutral_tf,
    solve_tf, sommerfeld_comparators, sommerfeld_lower, sommerfeld_parameters,
    sommerfeld_upper, tf_energy, universal_slope,
)

# chi'(0) of the neutral TF function, high-precision literature value
TF_SLOPE = -1.588071022611375


@pytest.fixture(scope="module")
def neutral():
    return {Z: solve_neutral_tf(Z) for Z in (1, 10, 20, 100)}


def test_constants():
    assert TF.zeta * (TF.zeta + 7) == pytest.approx(6, abs=1e-12)
    assert TF.somm4 == pytest.approx(81 * math.pi ** 2 / 8, rel=1e-12)
    assert TF.screen4 == pytest.approx(81 * math.pi ** 2 / 2, rel=1e-12)
    assert TF.length == pytest.approx(0.885341377, rel=1e-8)
    assert 2 * (3 * math.pi ** 2) ** (-2 / 3) * 3.67874 == pytest.approx(TF.e0, abs=1e-4)


def test_universal_slope():
    assert universal_slope() == pytest.approx(TF_SLOPE, abs=1e-9)


def test_binding_energy_hydrogen(neutral):
    assert neutral[1].energy == pytest.approx(-0.7687, abs=8e-4)
    # the virial-type identity E = (3/7) chi'(0) Z^{7/3} / a_1
    assert neutral[1].energy == pytest.approx(3 / 7 * TF_SLOPE / TF.length, rel=1e-7)


def test_energy_scaling(neutral):
    e = [neutral[Z].energy / Z ** (7 / 3) for Z in (1, 10, 100)]
    assert max(e) - min(e) < 1e-5 * abs(e[0])


def test_potential_scaling(neutral):
    # phi_Z(r) = Z^{4/3} phi_1(Z^{1/3} r)
    r = np.geomspace(1e-3, 20, 40)
    phi10 = neutral[10].phi(r)
    phi1 = neutral[1].phi(10 ** (1 / 3) * r)
    assert np.max(np.abs(phi10 / (10 ** (4 / 3) * phi1) - 1)) < 1e-6


@pytest.mark.parametrize("Z", [1, 10, 100])
def test_neutral_invariants(neutral, Z):
    s = neutral[Z]
    g = s.rho.grid
    assert s.mu == 0
    assert s.residual < 1e-6
    assert s.electrons == pytest.approx(Z, rel=1e-6)
    assert integrate3d(s.rho) == pytest.approx(Z, rel=1e-4)
    assert s.phi.values[0] * g.r_min / Z == pytest.approx(1, rel=1e-4)
    # the TF equation itself
    defect = TF.k_tf * s.rho.values ** (2 / 3) - np.maximum(s.phi.values - s.mu, 0)
    assert np.max(np.abs(defect) / (1 + np.abs(s.phi.values))) < 1e-6


def test_ionic_solution():
    s = solve_tf(10, 5)
    assert s.mu > 0
    assert s.electrons == pytest.approx(5, rel=1e-6)
    assert s.residual < 1e-6
    r = s.rho.grid.points
    r0 = s.metadata["r0"]
    assert s.mu == pytest.approx(5 / r0, rel=1e-12)
    assert np.all(s.rho.values[r > r0] == 0)
    assert np.allclose(s.phi.values[r > r0] * r[r > r0], 5, rtol=1e-12)


def test_ionic_profile_matches_fraction():
    for q in (0.9, 0.5, 1e-3):
        prof, x0 = ionic_profile(q)
        c0, c1 = prof.chi(np.array([x0 * (1 - 1e-9)]))
        assert prof.chi0 == pytest.approx(1, rel=1e-10)
        assert -c1[0] == pytest.approx(q, rel=1e-6)


def test_overfull_returns_neutral(neutral):
    s = solve_tf(10, 12)
    assert s.mu == 0 and s.N == 12
    assert np.array_equal(s.phi.values, neutral[10].phi.values)
    same = solve_tf(10, 10)
    assert np.array_equal(same.rho.values, neutral[10].rho.values)


def test_sandwich_between_neutral_and_shifted(neutral):
    base = neutral[10]
    ion = solve_tf(10, 5, grid=base.rho.grid)
    d = ion.phi.values - base.phi.values
    assert np.all(d >= -1e-9 * base.phi.values)
    assert np.all(d <= ion.mu * (1 + 1e-9))


def test_vanishing_electrons():
    s = solve_tf(10, 1e-3)
    r = s.rho.grid.points
    assert s.electrons == pytest.approx(1e-3, rel=1e-6)
    assert np.all(np.abs(s.phi.values - 10 / r) <= 1e-3 * 10 / r)


def test_bad_inputs():
    with pytest.raises(DomainError):
        solve_neutral_tf(0)
    with pytest.raises(DomainError):
        solve_tf(10, -1)


def test_energy_functional(neutral):
    s = neutral[1]
    assert tf_energy(s.rho, 1) == pytest.approx(s.energy, rel=1e-12)
    assert tf_energy(s.rho.with_values(np.zeros(s.rho.grid.n)), 1) == 0
    assert tf_energy(s.rho.with_values(1.05 * s.rho.values), 1) > s.energy


def test_energy_lower_bound_on_trial_densities(neutral):
    g = neutral[10].rho.grid
    for alpha in (0.5, 1, 3, 8):
        trial = g.points ** 0 * 0 + 10 * alpha ** 3 / (8 * math.pi) * np.exp(-alpha * g.points)
        e = tf_energy(neutral[10].rho.with_values(trial), 10)
        assert e >= -TF.e0 * 10 ** (7 / 3) - 1e-6


def test_json_round_trip(neutral):
    s = neutral[1]
    back = TFSolution.from_json(s.to_json())
    assert back.energy == s.energy and back.mu == s.mu
    assert np.array_equal(back.rho.values, s.rho.values)
    assert back.rho.grid.same_as(s.rho.grid)
    with pytest.raises(InvalidInputError):
        TFSolution.from_json('{"Z": 1}')


@pytest.mark.parametrize("Z", [1, 100])
def test_sommerfeld_sandwich(neutral, Z):
    s = neutral[Z]
    r = s.rho.grid.points
    phi = s.phi.values
    assert np.all(phi - sommerfeld_lower(r, Z, Z) >= -1e-5 * phi)
    assert np.all(sommerfeld_upper(r, 0, Z) - phi >= -1e-5 * phi)


@pytest.mark.parametrize("Z", [1, 20, 100])
def test_screened_potential_bound(neutral, Z):
    s = neutral[Z]
    probes = np.geomspace(s.rho.grid.points[1], 50, 50)
    assert np.all(screened_at_radius(s.rho, Z, probes) <= TF.screen4 * probes ** -4 + 1e-8)


@pytest.mark.parametrize("Z", [1, 100])
def test_density_bound(neutral, Z):
    s = neutral[Z]
    assert np.all(s.rho.values <= TF.density_tail * s.rho.grid.points ** -6)


def test_sommerfeld_upper_examples():
    assert sommerfeld_upper(10, 0, 1e6) == pytest.approx(9.9931e-3, rel=1e-4)
    assert sommerfeld_upper(1e-3, 0, 2) == pytest.approx(2e3)
    assert sommerfeld_upper(1e4, 0.3, 1e9) == pytest.approx(0.3, rel=1e-10)


def test_sommerfeld_lower_continuity():
    Z = 20
    R = TF.beta0 * Z ** (-1 / 3)
    left, right = sommerfeld_lower(R * (1 - 1e-13), Z, Z), sommerfeld_lower(R * (1 + 1e-13), Z, Z)
    assert left == pytest.approx(right, rel=1e-10)
    assert TF.a_continuous == pytest.approx(43.7, abs=0.15)


def test_sommerfeld_lower_branches():
    Z, r = 20, 1e-6
    assert sommerfeld_lower(r, Z, Z) == pytest.approx(Z / r - 22 * (9 * math.pi) ** (-2 / 3) * Z ** (4 / 3))
    rr = 3.0
    expect = TF.somm4 * (1 + TF.a_continuous * Z ** (-TF.zeta / 3) * rr ** -TF.zeta) ** -2 * rr ** -4
    assert sommerfeld_lower(rr, Z, 25) == pytest.approx(expect)
    assert sommerfeld_lower(1e3, Z, 10) == pytest.approx(10 / 1e3)


def test_comparators():
    r = np.geomspace(1, 100, 200)
    assert np.allclose(sommerfeld_comparators(0, r, "upper"), 81 * math.pi ** 2 / 8 * r ** -4)
    assert sommerfeld_comparators(43.7, 1.0, "lower") == pytest.approx(5.0017e-2, rel=1e-4)
    with pytest.raises(DomainError):
        sommerfeld_comparators(-2.0, 0.5, "lower")
    with pytest.raises(DomainError):
        sommerfeld_comparators(1.0, 1.0, "middle")


@pytest.mark.parametrize("A", [0.5, 1.0, 5.0])
def test_comparator_differential_inequalities(A):
    r = np.geomspace(1, 100, 300)
    h = 1e-4

    def lap(w):
        up, mid, dn = r * (1 + h), r, r * (1 - h)
        return (w(up) * up - 2 * w(mid) * mid + w(dn) * dn) / (r * h) ** 2 / r

    plus = lambda x: sommerfeld_comparators(A, x, "upper")
    minus = lambda x: sommerfeld_comparators(A, x, "lower")
    assert np.all(lap(plus) - TF.c_tf * plus(r) ** 1.5 <= 1e-9 * plus(r) ** 1.5)
    assert np.all(lap(minus) - TF.c_tf * minus(r) ** 1.5 >= -1e-9 * minus(r) ** 1.5)


def test_chemical_potential_estimate():
    Z = 10
    R = TF.beta0 * Z ** (-1 / 3)
    for N in (2, 5, 8, 9.5):
        s = solve_tf(Z, N)
        a, _ = sommerfeld_parameters(s.phi, R, s.mu)
        bound = 2 ** 0.75 / (3 * math.sqrt(math.pi)) * (1 + abs(a) * R ** -TF.zeta) ** 0.5 * (Z - N)
        assert s.mu ** 0.75 <= bound


# -- exterior problem --------------------------------------------------------

@pytest.mark.parametrize("r_cut", [0.1, 0.5, 2.0])
def test_exterior_reproduces_tf_tail(neutral, r_cut):
    tf = neutral[20]
    r = tf.rho.grid.points
    problem = ExteriorTFProblem.from_density(tf.rho, 20, r_cut)
    out = solve_exterior_tf(problem)
    ref = np.where(r >= r_cut, tf.rho.values, 0.0)
    l1 = integrate3d(tf.rho.with_values(np.abs(out.rho.values - ref)))
    assert l1 / integrate3d(tf.rho.with_values(ref)) < 1e-3
    assert out.mu == 0
    assert out.residual < 1e-6
    assert np.all(out.rho.values[r < r_cut] == 0)


def test_exterior_budget_constraint(neutral):
    tf = neutral[20]
    base = ExteriorTFProblem.from_density(tf.rho, 20, 0.5)
    tight = ExteriorTFProblem(0.5, base.V, 0.7 * base.budget)
    out = solve_exterior_tf(tight)
    assert out.mu > 0
    assert out.N == pytest.approx(tight.budget, rel=1e-9)
    assert out.residual < 1e-6


def test_exterior_zero_budget(neutral):
    base = ExteriorTFProblem.from_density(neutral[20].rho, 20, 0.5)
    out = solve_exterior_tf(ExteriorTFProblem(0.5, base.V, 0.0))
    assert np.all(out.rho.values == 0)
    assert np.array_equal(out.phi.values, base.V.values)


def test_exterior_sommerfeld_sandwich(neutral):
    tf = neutral[20]
    rc = 0.5
    out = solve_exterior_tf(ExteriorTFProblem.from_density(tf.rho, 20, rc))
    r = tf.rho.grid.points
    a, A = sommerfeld_parameters(out.phi, rc)
    beyond = r > r[np.searchsorted(r, rc, side="right")]
    x = r[beyond]
    phi = out.phi.values[beyond]
    # a and A already carry the r_cut^zeta factor
    upper = TF.somm4 * x ** -4 * (1 + A * x ** -TF.zeta)
    lower = TF.somm4 * x ** -4 * (1 + a * x ** -TF.zeta) ** -2
    assert np.all(phi <= upper * (1 + 1e-9))
    assert np.all(phi >= lower * (1 - 1e-9))


def test_exterior_problem_validation(neutral):
    g = neutral[20].rho.grid
    r = g.points
    from hfatom.grid import RadialFunction
    with pytest.raises(InvalidInputError):
        ExteriorTFProblem(0.5, RadialFunction(g, 1 / r, "potential"), 1.0)
    with pytest.raises(InvalidInputError):
        ExteriorTFProblem(0.5, RadialFunction(g, np.where(r > 0.5, r ** -2, 0), "potential"), 1.0)
    with pytest.raises(DomainError):
        ExteriorTFProblem(-1, RadialFunction(g, np.zeros(g.n), "potential"), 1.0)
