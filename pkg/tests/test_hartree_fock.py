import math

import numpy as np
import pytest

from hfatom.electrostatics import integrate3d
from hfatom.errors import DomainError, InvalidInputError, SolverFailure
from hfatom.hartree_fock import (
    HFState, SCFSettings, aufbau_configuration, hf_energy_breakdown, hf_lower_bound,
    hf_mean_field, hf_radius, ionization_energy, koopmans_check, max_bound_electrons,
    scf_solve, state_invariants, three_j_squared, virial_ratio,
)

from oracles import HELIUM_ORACLE, helium_oracle


@pytest.fixture(scope="module")
def states():
    return {Z: scf_solve(Z, Z) for Z in (1, 2, 6, 10)}


def test_aufbau_examples():
    assert aufbau_configuration(1) == [(1, 0, 1)]
    assert aufbau_configuration(10) == [(1, 0, 2), (2, 0, 2), (2, 1, 6)]
    assert aufbau_configuration(7) == [(1, 0, 2), (2, 0, 2), (2, 1, 3)]
    assert aufbau_configuration(0) == []
    # 4s before 3d, 5s before 4d
    labels = [(n, l) for n, l, _ in aufbau_configuration(38)]
    assert labels.index((4, 0)) < labels.index((3, 2)) < labels.index((4, 1)) < labels.index((5, 0))
    for N in range(1, 90):
        assert sum(o for *_, o in aufbau_configuration(N)) == N


def test_aufbau_rejects_bad_counts():
    for bad in (-1, 2.5, True):
        with pytest.raises(InvalidInputError):
            aufbau_configuration(bad)


def test_three_j_values():
    assert three_j_squared(0, 0, 0) == 1.0
    assert three_j_squared(1, 1, 0) == pytest.approx(1 / 3)
    assert three_j_squared(1, 1, 2) == pytest.approx(2 / 15)
    assert three_j_squared(1, 1, 1) == 0.0
    assert three_j_squared(2, 2, 2) == pytest.approx(2 / 35)


def test_settings_validation():
    for kw in ({"mixing": 0.0}, {"mixing": 1.5}, {"tol": 0.0}, {"max_sweeps": 0}, {"k_max": -1}):
        with pytest.raises(InvalidInputError):
            SCFSettings(**kw)


def test_hydrogen(states):
    s = states[1]
    assert s.energy_total == pytest.approx(-0.5, abs=1e-6)
    assert s.energy_direct == pytest.approx(5 / 16, abs=1e-6)
    assert s.energy_exchange == pytest.approx(5 / 16, abs=1e-6)
    assert s.energy_kinetic == pytest.approx(0.5, abs=1e-6)
    assert s.energy_nuclear == pytest.approx(-1.0, abs=1e-6)


def test_helium_matches_oracle(states):
    assert abs(states[2].energy_total - HELIUM_ORACLE) < 1e-5


@pytest.mark.slow
def test_helium_oracle_reproduces():
    assert helium_oracle() == pytest.approx(HELIUM_ORACLE, abs=1e-9)


def test_literature_energies(states):
    # numerical HF limits for the restricted configuration-averaged model
    assert states[6].energy_total == pytest.approx(-37.6596986, abs=2e-6)
    assert states[10].energy_total == pytest.approx(-128.5470981, abs=2e-6)


def test_state_invariants(states):
    for s in states.values():
        b = s.breakdown()
        assert b["total"] == pytest.approx(b["kinetic"] + b["nuclear"] + b["direct"] - b["exchange"],
                                           rel=1e-9)
        assert s.energy_direct >= s.energy_exchange >= 0
        assert all(sh.epsilon <= 0 for sh in s.shells)
        assert integrate3d(s.rho) == pytest.approx(s.N, rel=1e-9)
        assert virial_ratio(s) < 1e-3
        assert s.scf_residual < 1e-8
        assert s.flags == ()
        for sh in s.shells:
            assert sh.u.grid.integrate(sh.u.values ** 2) == pytest.approx(1.0, abs=1e-9)


def test_energy_falls_after_first_sweeps(states):
    for s in states.values():
        e = np.array(s.metadata["energy_history"])
        assert np.all(np.diff(e[5:]) <= 1e-9 * abs(e[-1]))


def test_breakdown_recomputes_stored_values(states):
    for s in states.values():
        b = hf_energy_breakdown(s)
        for key, val in s.breakdown().items():
            assert b[key] == pytest.approx(val, rel=1e-9, abs=1e-12)


def test_empty_state():
    s = scf_solve(3.0, 0)
    assert s.N == 0 and s.shells == ()
    assert hf_energy_breakdown(s) == dict.fromkeys(("total", "kinetic", "nuclear", "direct", "exchange"), 0.0)


def test_mean_field_of_hydrogen(states):
    s = states[1]
    phi = hf_mean_field(s)
    r = s.grid.points
    exact = np.exp(-2 * r) * (1 + 1 / r)
    # Z/r and the electron potential cancel in the tail, leaving absolute errors
    assert np.all(np.abs(phi.values - exact) <= 1e-6 * exact + 1e-9)
    assert r[0] * phi.values[0] == pytest.approx(1.0, abs=1e-6)


def test_neutral_mean_field_is_screened(states):
    for s in states.values():
        phi = hf_mean_field(s)
        assert phi.values[-1] * s.grid.r_max < 1e-3


def test_monotone_in_electron_number(states):
    he_plus = scf_solve(2, 1)
    assert he_plus.energy_total == pytest.approx(-2.0, abs=1e-6)
    assert he_plus.energy_total >= states[2].energy_total


def test_ionization_of_helium(states):
    ip = ionization_energy(2)
    assert ip == pytest.approx(-2.0 - states[2].energy_total, abs=1e-6)
    assert ip > 0
    k = koopmans_check(states[2], ip)
    assert k["same_sign"] and k["same_order"]


def test_ionization_rejects_hydrogen():
    with pytest.raises(DomainError):
        ionization_energy(1)


def test_lower_bound_and_exchange_bound(states):
    for s in states.values():
        inv = state_invariants(s)
        assert inv["energy_lower_bound"][2] and inv["exchange_bound"][2]
        assert inv["direct_exceeds_exchange"][2]
        assert inv["energy_lower_bound"][0] == hf_lower_bound(s.Z, s.N)


def test_hydrogen_anion_binds():
    # restricted HF still binds H^- weakly
    s = scf_solve(1, 2)
    assert s.energy_total == pytest.approx(-0.4879297, abs=1e-6)
    assert not s.unbound
    assert max_bound_electrons(1) == 2


def test_far_beyond_two_z_plus_one_is_not_bound():
    try:
        s = scf_solve(2, 10, SCFSettings(max_sweeps=60))
    except SolverFailure as exc:
        assert len(exc.diagnostics["residual_history"]) == 60
    else:
        assert s.unbound


def test_failure_carries_history():
    with pytest.raises(SolverFailure) as info:
        scf_solve(6, 6, SCFSettings(max_sweeps=3))
    assert len(info.value.diagnostics["residual_history"]) == 3


def test_open_shell_bookkeeping():
    s = scf_solve(7, 7)
    assert [(sh.n, sh.l, sh.occ) for sh in s.shells] == [(1, 0, 2), (2, 0, 2), (2, 1, 3)]
    assert not s.shells[-1].closed
    # configuration average of p^3 lies 9 F2/25 above the quartet (-54.40093)
    g, u = s.grid, s.shells[-1].u.values
    r, f = g.points, u * u
    y2 = g.cumulative(r**2 * f) / r**3 + r**2 * g.cumulative_outer(f / r**3)
    F2 = g.integrate(f * y2)
    assert s.energy_total - 9 * F2 / 25 == pytest.approx(-54.40093, abs=5e-3)


def test_json_round_trip(states):
    s = states[6]
    back = HFState.from_json(s.to_json())
    assert back.energy_total == s.energy_total and back.N == s.N
    assert np.array_equal(back.rho.values, s.rho.values)
    assert back.grid.n == s.grid.n and back.grid.r_min == s.grid.r_min
    assert hf_energy_breakdown(back)["total"] == pytest.approx(s.energy_total, rel=1e-12)
    assert back.to_json() == s.to_json()


def test_orbitals_csv(states):
    text = states[6].orbitals_csv()
    lines = text.splitlines()
    assert lines[0].startswith("# grid=log")
    assert lines[1] == "r,1s,2s,2p"
    assert len(lines) == 2 + states[6].grid.n


def test_radius_function(states):
    s = states[10]
    r1 = hf_radius(s, 1.0)
    outside = 4 * math.pi * s.grid.cumulative_outer(s.grid.points**2 * s.rho.values)
    assert np.interp(r1, s.grid.points, outside) == pytest.approx(1.0, abs=1e-3)
    assert hf_radius(s, 0.5) > r1 > hf_radius(s, 2.0)


def test_nonpositive_charge_rejected():
    with pytest.raises(DomainError):
        scf_solve(0.0, 1)
    with pytest.raises(DomainError):
        scf_solve(math.nan, 1)
