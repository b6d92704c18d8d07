"""Command-line front end.

    hfatom tf --Z 1
    hfatom hf --Z 10 --N 10 --out runs/ne
    hfatom otf --state runs/ne/hf.json --r-cut 0.5
    hfatom verify --suite tf --out reports
    hfatom sweep --model hf --Z 2 6 10 --out sweep

Every command prints exactly one JSON line on stdout; logs go to stderr.
Exit status: 0 success, 1 solver failure or failed check, 2 bad input.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .electrostatics import radius_of_charge, screened_at_radius
from .errors import DomainError, InvalidInputError, ResolutionError, SolverFailure
from .grid import DEFAULT_NUMERICS
from .hartree_fock import HFState, SCFSettings, hf_mean_field, scf_solve, virial_ratio
from .reports import write_atomic
from .thomas_fermi import ExteriorTFProblem, solve_exterior_tf, solve_tf
from .verification import SUITES, SweepPlan, potential_differences, run_checks, worker_count

log = logging.getLogger("hfatom")

CONFIG_VERSION = 1
SCF_KEYS = ("mixing", "tol", "max_sweeps", "level_shift", "n")


class UsageError(Exception):
    pass


# -- config files ------------------------------------------------------------

def parse_config(text: str):
    """``(SweepPlan, SCFSettings)`` from a versioned JSON document; unknown keys are errors."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"config is not JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidInputError("config must be a JSON object")
    if data.get("version") != CONFIG_VERSION:
        raise InvalidInputError(f"config needs \"version\": {CONFIG_VERSION}")
    extra = set(data) - {"version", "plan", "scf"}
    if extra:
        raise InvalidInputError(f"unknown config keys: {sorted(extra)}")
    plan = SweepPlan.from_dict(data.get("plan", {}))
    scf = data.get("scf", {})
    bad = set(scf) - set(SCF_KEYS)
    if bad:
        raise InvalidInputError(f"unknown scf keys: {sorted(bad)}")
    return plan, SCFSettings(**scf)


def dump_config(plan: SweepPlan, scf: SCFSettings) -> str:
    doc = {"version": CONFIG_VERSION, "plan": plan.to_dict(),
           "scf": {k: getattr(scf, k) for k in SCF_KEYS}}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# -- helpers -------------------------------------------------------------------

def _emit(doc):
    sys.stdout.write(json.dumps(doc, sort_keys=True, allow_nan=False, default=_plain) + "\n")
    sys.stdout.flush()


def _plain(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _finite(x):
    return float(x) if math.isfinite(x) else None


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _profile_csv(grid, columns) -> str:
    names = list(columns)
    lines = [f"# {grid.header()}", ",".join(["r"] + names)]
    data = np.column_stack([grid.points] + [np.asarray(columns[k], dtype=float) for k in names])
    lines += [",".join(repr(float(v)) for v in row) for row in data]
    return "\n".join(lines) + "\n"


def _table_csv(header, rows) -> str:
    def fmt(v):
        if isinstance(v, float):
            return repr(float(v))
        return str(v)
    return "\n".join([",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]) + "\n"


def _positive(name):
    def check(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number") from None
        if not (math.isfinite(v) and v > 0):
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {text}")
        return v
    return check


def _count(name):
    def check(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer") from None
        if v < 0:
            raise argparse.ArgumentTypeError(f"{name} must be nonnegative")
        return v
    return check


# -- commands ------------------------------------------------------------------

def cmd_tf(args) -> int:
    numerics = DEFAULT_NUMERICS if args.grid_n is None else dataclasses.replace(DEFAULT_NUMERICS, n=args.grid_n)
    N = args.Z if args.N is None else args.N
    sol = solve_tf(args.Z, N, numerics)
    out = _outdir(args.out)
    write_atomic(out / "tf.json", sol.to_json() + "\n")
    write_atomic(out / "tf.csv", _profile_csv(sol.rho.grid, {"rho": sol.rho.values, "phi": sol.phi.values}))
    _emit({"command": "tf", "Z": sol.Z, "N": sol.N, "energy": sol.energy, "mu": sol.mu,
           "electrons": sol.electrons, "residual": sol.residual,
           "files": [str(out / "tf.json"), str(out / "tf.csv")]})
    return 0


def _state_line(state: HFState):
    homo = state.homo
    return {"Z": state.Z, "N": state.N, "energies": state.breakdown(),
            "homo": None if homo is None else {"label": homo.label, "epsilon": homo.epsilon},
            "sweeps": state.metadata.get("sweeps", 0), "scf_residual": state.scf_residual,
            "virial": _finite(virial_ratio(state)) if state.N else 0.0, "flags": list(state.flags)}


def cmd_hf(args) -> int:
    kw = {k: getattr(args, k) for k in ("mixing", "tol", "max_sweeps") if getattr(args, k) is not None}
    settings = SCFSettings(**kw)
    out = _outdir(args.out)
    try:
        state = scf_solve(args.Z, args.N, settings)
    except SolverFailure as exc:
        path = out / "hf_failure.json"
        write_atomic(path, json.dumps(exc.diagnostics, default=_plain, indent=1) + "\n")
        flags = ["unbound electron"] if args.N > 2 * args.Z + 1 else []
        log.error("%s", exc)
        _emit({"command": "hf", "status": "failed", "Z": args.Z, "N": args.N, "flags": flags,
               "error": str(exc), "diagnostics_file": str(path)})
        return 1
    write_atomic(out / "hf.json", state.to_json() + "\n")
    write_atomic(out / "hf_orbitals.csv", state.orbitals_csv())
    line = {"command": "hf", "status": "converged", **_state_line(state),
            "files": [str(out / "hf.json"), str(out / "hf_orbitals.csv")]}
    if state.unbound:
        log.error("the highest orbital is not bound (unbound electron)")
        line["status"] = "unbound"
        _emit(line)
        return 1
    _emit(line)
    return 0


def cmd_otf(args) -> int:
    try:
        text = Path(args.state).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read state file: {exc}") from None
    state = HFState.from_json(text)
    problem = ExteriorTFProblem.from_density(state.rho, state.Z, args.r_cut, args.budget)
    sol = solve_exterior_tf(problem)
    out = _outdir(args.out)
    write_atomic(out / "otf.json", sol.to_json() + "\n")
    write_atomic(out / "otf.csv", _profile_csv(sol.rho.grid, {"rho": sol.rho.values, "phi": sol.phi.values}))
    _emit({"command": "otf", "Z": state.Z, "r_cut": args.r_cut, "budget": problem.budget,
           "charge": problem.charge, "mu": sol.mu, "electrons": sol.N, "energy": sol.energy,
           "residual": sol.residual, "files": [str(out / "otf.json"), str(out / "otf.csv")]})
    return 0


def _load_plan(path):
    if path is None:
        return SweepPlan(), SCFSettings()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read plan file: {exc}") from None
    return parse_config(text)


def cmd_verify(args) -> int:
    plan, settings = _load_plan(args.plan)
    result = run_checks(args.suite, plan, settings)
    result.write(args.out)
    write_atomic(Path(args.out) / "plan.json", dump_config(plan, settings))
    for rep in result.reports:
        log.info("%-28s %s (worst margin %.3g)", rep.claim_id, rep.verdict, rep.worst_margin)
    status = result.exit_status(args.strict)
    _emit({"command": "verify", "suite": args.suite, "strict": args.strict,
           "claims": {r.claim_id: r.verdict for r in result.reports},
           "failed": result.failed, "inconclusive": result.inconclusive, "out": str(args.out),
           "exit": status})
    return status


def _tf_cell(Z):
    return solve_tf(Z, Z)


def _hf_cell(args):
    Z, settings = args
    try:
        return scf_solve(Z, Z, settings)
    except SolverFailure as exc:
        log.warning("Z=%s: %s", Z, exc)
        return None


def _map(fn, items):
    n = worker_count()
    if n > 1 and len(items) > 1:
        with concurrent.futures.ProcessPoolExecutor(n) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def cmd_sweep(args) -> int:
    plan, settings = _load_plan(args.plan)
    Zs = args.Z or list(plan.Z_list)
    out = _outdir(args.out)
    probes = np.asarray(plan.r_probes)
    failed = []
    if args.model == "tf":
        sols = _map(_tf_cell, Zs)
        rows = []
        for Z, s in zip(Zs, sols):
            radii = [radius_of_charge(s.rho, nu) if nu < Z else math.nan for nu in plan.nu_list]
            rows.append([Z, s.energy, s.energy / Z ** (7 / 3), s.mu] + radii)
            write_atomic(out / f"tf_Z{Z:g}.csv", _profile_csv(s.rho.grid, {"rho": s.rho.values, "phi": s.phi.values}))
        header = ["Z", "energy", "energy_per_Z73", "mu"] + [f"R_nu{nu:g}" for nu in plan.nu_list]
    else:
        if any(Z != int(Z) for Z in Zs):
            raise UsageError("HF sweeps need integer Z")
        Zs = [int(Z) for Z in Zs]
        states = _map(_hf_cell, [(Z, settings) for Z in Zs])
        rows, diffs = [], []
        for Z, s in zip(Zs, states):
            if s is None:
                failed.append(Z)
                continue
            b = s.breakdown()
            radii = [radius_of_charge(s.rho, nu) if nu < Z else math.nan for nu in plan.nu_list]
            rows.append([Z, b["total"], b["kinetic"], b["nuclear"], b["direct"], b["exchange"],
                         s.homo.epsilon, virial_ratio(s)] + radii)
            tf = solve_tf(Z, Z, grid=s.grid)
            d, D = potential_differences(s, tf, probes)
            phi = hf_mean_field(s)(probes)
            scr = screened_at_radius(s.rho, Z, probes)
            diffs += [[Z, float(r), float(a), float(b_), float(c), float(e)]
                      for r, a, b_, c, e in zip(probes, phi, scr, d, D)]
            write_atomic(out / f"hf_Z{Z}.csv", _profile_csv(s.grid, {"rho": s.rho.values,
                                                                      "phi": hf_mean_field(s).values}))
        header = ["Z", "energy", "kinetic", "nuclear", "direct", "exchange", "homo", "virial"] + \
                 [f"R_nu{nu:g}" for nu in plan.nu_list]
        write_atomic(out / "potential_differences.csv",
                     _table_csv(["Z", "r", "phi_hf", "screened_hf", "abs_phi_diff", "abs_screened_diff"], diffs))
    write_atomic(out / "sweep.csv", _table_csv(header, rows))
    _emit({"command": "sweep", "model": args.model, "Z": Zs, "failed": failed, "out": str(out)})
    return 1 if failed else 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hfatom", description="Radial TF and HF atoms and bound checks")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    tf = sub.add_parser("tf", help="Thomas-Fermi atom or ion")
    tf.add_argument("--Z", type=_positive("Z"), required=True)
    tf.add_argument("--N", type=_positive("N"))
    tf.add_argument("--out", default=".")
    tf.add_argument("--grid-n", type=_count("grid-n"))
    tf.set_defaults(func=cmd_tf)

    hf = sub.add_parser("hf", help="restricted Hartree-Fock atom or ion")
    hf.add_argument("--Z", type=_count("Z"), required=True)
    hf.add_argument("--N", type=_count("N"), required=True)
    hf.add_argument("--mixing", type=float)
    hf.add_argument("--tol", type=float)
    hf.add_argument("--max-sweeps", type=_count("max-sweeps"))
    hf.add_argument("--out", default=".")
    hf.set_defaults(func=cmd_hf)

    otf = sub.add_parser("otf", help="exterior TF problem seeded by an HF state file")
    otf.add_argument("--state", required=True)
    otf.add_argument("--r-cut", type=_positive("r-cut"), required=True)
    otf.add_argument("--budget", type=float)
    otf.add_argument("--out", default=".")
    otf.set_defaults(func=cmd_otf)

    ver = sub.add_parser("verify", help="run the bound checks and write reports")
    ver.add_argument("--suite", choices=("all",) + SUITES, default="all")
    ver.add_argument("--plan")
    ver.add_argument("--out", default="reports")
    ver.add_argument("--strict", action="store_true", help="inconclusive verdicts also fail")
    ver.set_defaults(func=cmd_verify)

    sw = sub.add_parser("sweep", help="solve a list of neutral atoms and write plot-ready tables")
    sw.add_argument("--model", choices=("tf", "hf"), default="hf")
    sw.add_argument("--Z", type=_positive("Z"), nargs="+")
    sw.add_argument("--plan")
    sw.add_argument("--out", default="sweep")
    sw.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "hf" and args.Z < 1:
            raise UsageError("Z must be a positive integer")
        return args.func(args)
    except (UsageError, InvalidInputError, DomainError) as exc:
        log.error("%s", exc)
        return 2
    except (SolverFailure, ResolutionError) as exc:
        log.error("solver failure: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
