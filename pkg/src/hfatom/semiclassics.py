"""Phase-space (semiclassical) approximations for ``h = -1/2 Laplacian - V`` without spin.

The sum of negative eigenvalues is compared with ``-c int V^{5/2}`` and with
two-sided bounds built from coherent states smeared by ``g^2``, where g is the
Dirichlet ground state of a ball of radius s.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .electrostatics import integrate3d, radial_derivative, smear_g2
from .errors import DomainError
from .grid import RadialFunction, RadialGrid
from .reports import BoundReport, lower, upper
from .schrodinger import L0_CLR, L1_LT, negative_spectrum_3d

ENERGY_CONSTANT = 2.0 ** 1.5 / (15.0 * math.pi ** 2)     # -c int V^{5/2}
DENSITY_CONSTANT = 2.0 ** 1.5 / (6.0 * math.pi ** 2)     # c' V^{3/2}
KINETIC_CONSTANT = 2.0 ** 0.5 / (5.0 * math.pi ** 2)
# prefactor of the gradient correction in the lower bound
A_L = (9.0 / 4.0 * 2.0 ** -0.9 * (15.0 * math.pi ** 2) ** 0.6
       * (2.0 * math.pi ** 2 / 5.0) ** (1.0 / 3.0) * L0_CLR ** (1.0 / 3.0) * L1_LT ** (4.0 / 15.0))
UPPER_CONSTANT = 2.0 ** -0.5 * math.pi ** (-4.0 / 3.0)

SUITE_SEED = 20240807
SUITE_SIZE = 30
CSV_COLUMNS = ("V_id", "e_semi", "e_exact", "lower", "upper", "lower_margin", "upper_margin",
               "lemma_lower", "lemma_margin", "s_used", "delta_used", "box_sensitive", "verdict")


def _positive(V: RadialFunction) -> np.ndarray:
    return np.maximum(V.values, 0.0)


def _power_integral(f: np.ndarray, grid: RadialGrid, p: float) -> float:
    """``int |f|^p d^3x``; inf when the power law at r -> 0 is not integrable."""
    a = np.abs(f) ** p
    g = a * grid.points ** 3           # integrand in log r
    # local power of g over the first decade (single steps see difference noise)
    k = min(int(round(math.log(10.0) / grid.h)), grid.n - 1)
    if g[0] > 0 and g[k] > 0 and math.log(g[k] / g[0]) / math.log(10.0) <= 0.1:
        return math.inf
    return integrate3d(RadialFunction(grid, a))


def lp_norm(f, p: float) -> float:
    """``||f||_p`` over R^3 for a radial function (array values on ``f.grid``)."""
    return _power_integral(f.values, f.grid, p) ** (1.0 / p)


def gradient_lp_norm(V: RadialFunction, p: float = 2.5) -> float:
    """``||grad V||_p`` with the radial derivative taken by finite differences."""
    return _power_integral(radial_derivative(V), V.grid, p) ** (1.0 / p)


def semiclassical_energy(V: RadialFunction) -> float:
    """``-2^{3/2} (15 pi^2)^{-1} int [V]_+^{5/2}``."""
    total = _power_integral(_positive(V), V.grid, 2.5)
    if not math.isfinite(total):
        raise OverflowError("int [V]_+^{5/2} diverges")
    return -ENERGY_CONSTANT * total


def semiclassical_density(V: RadialFunction) -> RadialFunction:
    """``2^{3/2} (6 pi^2)^{-1} [V]_+^{3/2}``, one spin state."""
    return RadialFunction(V.grid, DENSITY_CONSTANT * _positive(V) ** 1.5, "density")


def coherent_trial(V: RadialFunction, s: float):
    """Density and kinetic energy of the coherent-state trial density matrix.

    The density is the semiclassical one smeared with g^2; the kinetic energy is
    ``2^{1/2}(5 pi^2)^{-1} int [V]_+^{5/2} + pi^2/(2 s^2) int semiclassical density``.
    """
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    rho = semiclassical_density(V)
    smeared = smear_g2(rho, s)
    kinetic = (KINETIC_CONSTANT * integrate3d(RadialFunction(V.grid, _positive(V) ** 2.5))
               + 0.5 * math.pi ** 2 / s ** 2 * integrate3d(rho))
    return smeared, kinetic


def lemma_lower_bound(V: RadialFunction, count: int, delta: float = 0.5, s: float = 1.0) -> float:
    """Coherent-state lower bound on the sum of the lowest ``count`` eigenvalues."""
    if not (0 < delta < 1) or not s > 0:
        raise DomainError("need 0 < delta < 1 and s > 0")
    vp = _positive(V)
    smeared = smear_g2(RadialFunction(V.grid, vp, "potential"), s)
    rest = _power_integral(np.maximum(vp - smeared.values, 0.0), V.grid, 2.5)
    return (-ENERGY_CONSTANT * (1 - delta) ** -1.5 * _power_integral(vp, V.grid, 2.5)
            - 0.5 * math.pi ** 2 / s ** 2 * count
            - L1_LT * delta ** -1.5 * rest)


def smearing_estimate(V: RadialFunction, s: float):
    """``(||V - V*g^2||_{5/2}, s ||grad V||_{5/2})``."""
    smeared = smear_g2(V.with_values(V.values, meaning="potential"), s)
    lhs = _power_integral(V.values - smeared.values, V.grid, 2.5) ** 0.4
    return lhs, s * gradient_lp_norm(V)


@dataclass(frozen=True)
class SemiclassicalReport:
    V_id: str
    e_semi: float
    e_exact: float
    lower: float
    upper: float
    s_used: float
    delta_used: float
    lemma_lower: float
    box_sensitive: bool
    verdict: str
    metadata: Mapping = field(default_factory=dict)

    @property
    def margins(self):
        return self.e_exact - self.lower, self.upper - self.e_exact

    def row(self):
        lo, up = self.margins

        def num(x):
            return repr(float(x))
        return {
            "V_id": self.V_id, "e_semi": num(self.e_semi), "e_exact": num(self.e_exact),
            "lower": num(self.lower), "upper": num(self.upper),
            "lower_margin": num(lo), "upper_margin": num(up),
            "lemma_lower": num(self.lemma_lower),
            "lemma_margin": num(self.e_exact - self.lemma_lower),
            "s_used": num(self.s_used), "delta_used": num(self.delta_used),
            "box_sensitive": str(self.box_sensitive).lower(), "verdict": self.verdict,
        }

    def bound_reports(self):
        """The sandwich and the coherent-state lower bound as ledger reports."""
        param = {"V_id": self.V_id}
        sandwich = BoundReport.build(
            "semiclassical_sandwich",
            [lower(param, self.e_exact, self.lower), upper(param, self.e_exact, self.upper)],
            V_id=self.V_id, box_sensitive=self.box_sensitive)
        if sandwich.verdict == "fail" and self.box_sensitive:
            # shallow levels feel the box, so a miss says nothing about the bound
            sandwich = dataclasses.replace(sandwich, verdict="inconclusive")
        lemma = BoundReport.build(
            "coherent_state_lower", [lower(param, self.e_exact, self.lemma_lower)], V_id=self.V_id,
            delta=0.5, s=1.0)
        return sandwich, lemma


def check_semiclassical_bounds(V: RadialFunction, V_id: str = "V") -> SemiclassicalReport:
    """Compare the exact negative eigenvalue sum with both semiclassical bounds."""
    if np.any(V.values < 0):
        raise DomainError("the two-sided bounds need V >= 0")
    grid = V.grid
    spec = negative_spectrum_3d(V)
    e_exact = spec.total
    box = any(lv[4] for lv in spec.levels)
    I52 = _power_integral(V.values, grid, 2.5)
    I32 = _power_integral(V.values, grid, 1.5)
    grad = gradient_lp_norm(V)
    e_semi = -ENERGY_CONSTANT * I52
    n52, n32 = I52 ** 0.4, I32 ** (2.0 / 3.0)
    finite = math.isfinite(grad) and math.isfinite(I32)
    if I52 == 0.0:
        lo = up = 0.0
        s_used = delta_used = math.nan
    elif not finite:
        # the gradient (or V^{3/2}) is not integrable: both bounds are vacuous
        lo, up = -math.inf, math.inf
        s_used = delta_used = math.nan
    else:
        t = A_L * n52 ** -1.5 * grad ** (2.0 / 3.0) * n32 ** 0.5
        lo = e_semi * (1.0 + t) ** (5.0 / 3.0)
        up = e_semi + UPPER_CONSTANT * n52 * grad ** (2.0 / 3.0) * n32 ** 0.5
        # the optimal smearing radius of the upper bound and the split of the lower one
        s_used = (math.pi ** 2 * n32 ** 1.5 / (n52 ** 1.5 * grad)) ** (1.0 / 3.0)
        dprime = t / (1.0 + t)
        delta_used = 1.0 - (1.0 - dprime) ** (4.0 / 9.0)
    lemma = lemma_lower_bound(V, spec.count) if spec.count else 0.0
    holds = lo <= e_exact <= up
    verdict = "pass" if holds else ("inconclusive" if box else "fail")
    meta = {"count": spec.count, "gradient_norm": grad, "int_v32": I32, "int_v52": I52,
            "preconditions": bool(finite)}
    return SemiclassicalReport(V_id, e_semi, e_exact, lo, up, s_used, delta_used, lemma, box,
                               verdict, meta)


def suite_grid() -> RadialGrid:
    return RadialGrid.log(1e-6, 60.0, 4000)


def random_suite(seed: int = SUITE_SEED, size: int = SUITE_SIZE, grid: RadialGrid | None = None):
    """Deterministic list of ``(V_id, V)``: truncated Coulomb and Gaussian wells, alternating."""
    grid = grid or suite_grid()
    rng = np.random.default_rng(seed)
    out = []
    for i in range(size):
        c = float(rng.uniform(1.0, 100.0))
        a = float(rng.uniform(0.5, 5.0))
        if i % 2 == 0:
            vid = f"coulomb c={c:.6g} R={a:.6g}"
            V = RadialFunction(grid, c * np.maximum(1.0 / grid.points - 1.0 / a, 0.0), "potential")
        else:
            vid = f"gauss c={c:.6g} w={a:.6g}"
            V = RadialFunction(grid, c * np.exp(-(grid.points / a) ** 2), "potential")
        out.append((vid, V))
    return out


def run_suite(seed: int = SUITE_SEED, size: int = SUITE_SIZE):
    return [check_semiclassical_bounds(V, vid) for vid, V in random_suite(seed, size)]


def reports_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rep in reports:
        writer.writerow(rep.row())
    return buf.getvalue()


__all__ = [
    "ENERGY_CONSTANT", "DENSITY_CONSTANT", "KINETIC_CONSTANT", "A_L", "SemiclassicalReport",
    "semiclassical_energy", "semiclassical_density", "coherent_trial", "lemma_lower_bound",
    "smearing_estimate", "check_semiclassical_bounds", "random_suite", "run_suite", "reports_csv",
    "lp_norm", "gradient_lp_norm",
]
