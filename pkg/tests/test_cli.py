import json

import pytest

from hfatom.cli import dump_config, main, parse_config
from hfatom.errors import InvalidInputError
from hfatom.hartree_fock import SCFSettings
from hfatom.verification import SweepPlan


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 1
    return code, json.loads(out[0])


def test_tf_hydrogen(capsys, tmp_path):
    code, line = run(capsys, "tf", "--Z", "1", "--out", str(tmp_path))
    assert code == 0
    assert line["energy"] == pytest.approx(-0.7687, abs=8e-4)
    assert (tmp_path / "tf.json").exists()
    csv = (tmp_path / "tf.csv").read_text().splitlines()
    assert csv[0].startswith("# grid=log") and csv[1] == "r,rho,phi"


def test_tf_ion_has_positive_mu(capsys, tmp_path):
    code, line = run(capsys, "tf", "--Z", "10", "--N", "5", "--out", str(tmp_path))
    assert code == 0 and line["mu"] > 0


def test_tf_rejects_negative_charge(capsys):
    with pytest.raises(SystemExit) as info:
        main(["tf", "--Z", "-1"])
    assert info.value.code == 2


def test_hf_hydrogen_and_helium(capsys, tmp_path):
    code, line = run(capsys, "hf", "--Z", "1", "--N", "1", "--out", str(tmp_path / "h"))
    assert code == 0 and line["energies"]["total"] == pytest.approx(-0.5, abs=1e-6)
    code, line = run(capsys, "hf", "--Z", "2", "--N", "2", "--out", str(tmp_path / "he"))
    e = line["energies"]
    assert code == 0 and e["direct"] >= e["exchange"]
    assert line["homo"]["label"] == "1s"


def test_hf_far_anion_fails(capsys, tmp_path):
    code, line = run(capsys, "hf", "--Z", "2", "--N", "10", "--max-sweeps", "40", "--out", str(tmp_path))
    assert code == 1 and "unbound electron" in line["flags"]
    diag = json.loads((tmp_path / "hf_failure.json").read_text())
    assert len(diag["residual_history"]) == 40


def test_hf_rejects_zero_charge(capsys):
    assert main(["hf", "--Z", "0", "--N", "1"]) == 2


def test_otf_from_state_file(capsys, tmp_path):
    run(capsys, "hf", "--Z", "10", "--N", "10", "--out", str(tmp_path))
    code, line = run(capsys, "otf", "--state", str(tmp_path / "hf.json"), "--r-cut", "0.5",
                     "--out", str(tmp_path))
    assert code == 0 and line["mu"] == 0.0
    assert line["electrons"] == pytest.approx(line["budget"], rel=1e-6)


def test_otf_missing_state(capsys):
    assert main(["otf", "--state", "/nonexistent.json", "--r-cut", "1"]) == 2


def test_config_round_trip():
    plan, scf = SweepPlan(Z_list=(2, 10), lam=0.25), SCFSettings(mixing=0.3)
    text = dump_config(plan, scf)
    assert parse_config(text) == (plan, scf)
    assert dump_config(*parse_config(text)) == text


@pytest.mark.parametrize("doc", [
    {"plan": {}}, {"version": 2}, {"version": 1, "plans": {}},
    {"version": 1, "plan": {"Z": [2]}}, {"version": 1, "scf": {"mix": 0.3}},
])
def test_config_rejects(doc):
    with pytest.raises(InvalidInputError):
        parse_config(json.dumps(doc))


def test_verify_plan_errors(capsys, tmp_path):
    assert main(["verify", "--plan", str(tmp_path / "missing.json")]) == 2
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"version": 1, "plan": {"Z_list": []}}))
    assert main(["verify", "--plan", str(empty)]) == 2


def test_verify_tf_suite(capsys, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        code, line = run(capsys, "verify", "--suite", "tf", "--out", str(out))
        assert code == 0
        assert {"tf_sommerfeld_upper", "tf_sommerfeld_lower", "tf_screened_bound",
                "tf_chemical_potential"} <= set(line["claims"])
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir())
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_verify_semiclassics_rows(capsys, tmp_path):
    code, line = run(capsys, "verify", "--suite", "semiclassics", "--out", str(tmp_path))
    assert code == 0
    import csv
    rows = list(csv.DictReader((tmp_path / "semiclassics.csv").open()))
    assert len(rows) == 30
    for row in rows:
        if row["box_sensitive"] == "false":
            assert float(row["lower"]) <= float(row["e_exact"]) <= float(row["upper"])


def test_sweep_tf(capsys, tmp_path):
    code, line = run(capsys, "sweep", "--model", "tf", "--Z", "1", "10", "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("Z,energy,energy_per_Z73")
    assert len(lines) == 3
    a, b = (float(x.split(",")[2]) for x in lines[1:])
    assert a == pytest.approx(b, rel=1e-5)


def test_sweep_hf(capsys, tmp_path):
    code, line = run(capsys, "sweep", "--model", "hf", "--Z", "2", "4", "--out", str(tmp_path))
    assert code == 0 and line["failed"] == []
    assert (tmp_path / "potential_differences.csv").exists() and (tmp_path / "hf_Z4.csv").exists()
