import math

import numpy as np
import pytest

from hfatom.errors import InvalidInputError
from hfatom.hartree_fock import scf_solve
from hfatom.reports import BoundReport, upper
from hfatom.thomas_fermi import solve_neutral_tf, solve_tf
from hfatom.verification import (
    RADIUS_CONSTANT, SweepCache, SweepPlan, check_coulomb_estimates, check_exterior_l1,
    check_hf_invariants, check_hydrogenic_levels, check_ionization_suite, check_otf_from_hf,
    check_potential_estimate, check_radius_asymptote_tf, check_radius_trend_hf,
    check_screened_tf_bound, coulomb_pairs, fit_decay, k_lambda, merge_reports,
    potential_differences, run_checks,
)

SMALL = SweepPlan(Z_list=(2, 6, 10))


@pytest.fixture(scope="module")
def cache():
    return SweepCache(workers=1)


def test_plan_validation():
    for bad in ({"Z_list": ()}, {"Z_list": (2.5,)}, {"lam": 1.0}, {"lam": 0.0}, {"r_probes": (-1.0,)},
                {"nu_list": (math.nan,)}):
        with pytest.raises(InvalidInputError):
            SweepPlan(**bad)
    with pytest.raises(InvalidInputError):
        SweepPlan.from_dict({"Z_list": [2], "extra": 1})


def test_plan_round_trip_and_defaults():
    plan = SweepPlan()
    assert plan.Z_list == (2, 6, 10, 18, 36, 54, 86)
    assert plan.r_probes[0] == pytest.approx(0.25) and plan.r_probes[-1] == pytest.approx(16.0)
    assert plan.nu_list == (1, 2, 4, 8, 16)
    assert SweepPlan.from_dict(plan.to_dict()) == plan
    assert SweepPlan(Z_list=(10, 2, 2)).Z_list == (2, 10)


def test_k_lambda_at_one_half():
    assert k_lambda(0.5) == pytest.approx((1 / math.pi + 2) * math.pi ** 2, rel=1e-15)


def test_exterior_l1_neon(cache):
    rep = check_exterior_l1(cache.hf(10), 2.0, 0.5)
    assert rep.passed and rep.worst_margin > 0


def test_exterior_l1_far_outside(cache):
    rep = check_exterior_l1(cache.hf(10), 25.0, 0.5)
    s = rep.samples[0]
    assert s.lhs < 1e-8 and s.rhs >= 1 and rep.passed


@pytest.mark.parametrize("sol", [
    pytest.param(lambda: solve_neutral_tf(1), id="Z1"),
    pytest.param(lambda: solve_neutral_tf(100), id="Z100"),
    pytest.param(lambda: solve_tf(100, 50), id="ion"),
])
def test_screened_tf_bound(sol):
    s = sol()
    rep = check_screened_tf_bound(s)
    assert len(rep.samples) == 50 and rep.passed


def test_radius_asymptote_tf_is_far_from_limit_at_z100():
    rep = check_radius_asymptote_tf()
    # R nu^{1/3} at Z = 100 sits near 3.3 for nu = 10; the limit needs Z of order 1e9
    assert rep.verdict == "fail"
    big = rep.metadata["larger_Z"]
    vals = [big[k]["nu=10"] for k in ("Z=1000", "Z=1e+06", "Z=1e+09")]
    assert vals[0] < vals[1] < vals[2] < RADIUS_CONSTANT
    assert vals[2] == pytest.approx(RADIUS_CONSTANT, rel=0.01)


def test_potential_difference_for_hydrogen():
    s = scf_solve(1, 1)
    tf = solve_neutral_tf(1, grid=s.grid)
    d, D = potential_differences(s, tf, np.geomspace(0.25, 16, 9))
    assert np.all(np.isfinite(d)) and np.all(np.isfinite(D))


def test_fit_decay_recovers_power_law():
    r = np.geomspace(1, 8, 9)
    A, p = fit_decay(r, 3.0 * r ** -2.5)
    assert A == pytest.approx(3.0) and p == pytest.approx(-2.5)
    assert math.isnan(fit_decay(r, np.zeros_like(r))[1])


def test_potential_estimate_small_sweep(cache):
    expo, cap, trend = check_potential_estimate(SMALL, cache)
    assert expo.passed
    for fit in expo.metadata["fits"].values():
        assert 0 < fit["epsilon"] < 4
    assert {s.param["quantity"] for s in trend.samples} == {"phi", "screened"}
    assert all(s.param["r"] >= 1 for s in cap.samples)
    assert "Kendall" in trend.metadata["surrogate"]


def test_hf_invariants_aggregate(cache):
    reps = {r.claim_id: r for r in check_hf_invariants(SMALL, cache)}
    assert reps["hf_exchange_bound"].passed and reps["hf_energy_lower_bound"].passed
    assert reps["hf_direct_exceeds_exchange"].passed
    assert len(reps["hf_exchange_bound"].samples) == 3


def test_radius_trend_reports_values(cache):
    rep = check_radius_trend_hf(SMALL, cache)
    assert set(rep.metadata["values"]) == {"nu=1", "nu=2", "nu=4", "nu=8", "nu=16"}
    # nu = 16 exceeds every N in the plan, so it has no trend sample value
    assert math.isnan(rep.samples[-1].lhs)


def test_ionization_suite_small(cache):
    nonneg, nmax, trend = check_ionization_suite(SweepPlan(Z_list=(2, 6)), cache)
    assert nonneg.passed and nmax.passed
    he = [s for s in nonneg.samples if s.param["Z"] == 2][0]
    assert he.lhs == pytest.approx(-2.0 - cache.hf(2).energy_total, abs=1e-6)
    assert nmax.metadata["excess"] == {"2": 0, "6": 1}


def test_otf_from_neutral_hf(cache):
    mu, tail = check_otf_from_hf(cache, Z=10)
    assert mu.passed and mu.samples[0].lhs == 0.0
    assert tail.metadata["fitted_constant"] > 0


def test_coulomb_estimates():
    est, loc = check_coulomb_estimates()
    assert est.passed and loc.passed
    assert len(est.samples) == 50 and len(loc.samples) == 1000
    f0, g0 = coulomb_pairs()[0]
    assert np.array_equal(f0.values, coulomb_pairs()[0][0].values)


def test_hydrogenic_levels():
    rep = check_hydrogenic_levels()
    assert rep.passed and len(rep.samples) == 30


def test_merge_reports():
    ok = BoundReport.build("a", [upper({}, 0, 1)])
    bad = BoundReport.build("a", [upper({}, 2, 1)])
    maybe = BoundReport.build("a", [], inconclusive=True)
    assert merge_reports("x", [ok, ok]).verdict == "pass"
    assert merge_reports("x", [ok, maybe]).verdict == "inconclusive"
    assert merge_reports("x", [ok, maybe, bad]).verdict == "fail"
    assert merge_reports("x", [ok, bad]).worst_margin == -1.0


def test_tf_suite_is_deterministic(tmp_path):
    a, b = run_checks("tf"), run_checks("tf")
    assert a.ledger() == b.ledger()
    assert {"tf_sommerfeld_upper", "tf_sommerfeld_lower", "tf_screened_bound",
            "tf_chemical_potential"} <= {r.claim_id for r in a.reports}
    assert a.exit_status() == 0
    a.write(tmp_path)
    text = (tmp_path / "tf_screened_bound.json").read_text()
    assert BoundReport.from_json(text).verdict == "pass"
    assert (tmp_path / "ledger.csv").read_text() == b.ledger()


def test_unknown_suite():
    with pytest.raises(InvalidInputError):
        run_checks("everything")
