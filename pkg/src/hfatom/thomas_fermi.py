"""Thomas-Fermi atoms: neutral, ionic and exterior problems, energies, Sommerfeld bounds.

All three problems reduce to the universal equation ``chi'' = x^{-1/2} chi^{3/2}``
through ``phi - mu = Z chi(r/a) / r`` with ``a = c_tf^{-2/3} Z^{-1/3}``.  The
equation is invariant under ``chi -> lam^3 chi(lam x)``, so a handful of base
solutions integrated once (inward, where the integration is stable) serve
every Z, every ionisation and every exterior boundary condition.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .electrostatics import coulomb_inner, integrate3d, newton_potential
from .errors import DomainError, InvalidInputError, SolverFailure
from .grid import DEFAULT_NUMERICS, NumericsSettings, RadialFunction, RadialGrid


@dataclass(frozen=True)
class TFConstants:
    c_tf: float = 2 ** 3.5 / (3 * math.pi)
    k_tf: float = 0.5 * (3 * math.pi ** 2) ** (2 / 3)
    density_c: float = 2 ** 1.5 / (3 * math.pi ** 2)
    e0: float = 0.7687
    zeta: float = (-7 + math.sqrt(73)) / 2
    beta0: float = (9 * math.pi) ** (2 / 3) / 44
    a_somm: float = 43.7               # published, rounded
    somm4: float = 3 ** 4 * 2 ** -3 * math.pi ** 2
    screen4: float = 3 ** 4 * 2 ** -1 * math.pi ** 2
    density_tail: float = 3 ** 5 * 2 ** -3 * math.pi
    inner_shift: float = 22 * (9 * math.pi) ** (-2 / 3)

    @property
    def length(self) -> float:
        """TF length for Z = 1: ``c_tf^{-2/3}`` (about 0.88534)."""
        return self.c_tf ** (-2 / 3)

    @property
    def a_continuous(self) -> float:
        """The Sommerfeld lower-bound constant that makes the bound continuous."""
        inner = 1 / self.beta0 - self.inner_shift
        ratio = math.sqrt(self.somm4 * self.beta0 ** -4 / inner)
        return (ratio - 1) * self.beta0 ** self.zeta


TF = TFConstants()

_X_FAR = 1e7        # start of inward integrations on the asymptotic tail
_X_NEAR = 1e-14     # where inward integrations stop
_RTOL = 1e-13


# -- universal ODE in t = log x ------------------------------------------

def _rhs(t, y):
    x = math.exp(t)
    c = y[0] if y[0] > 0 else 0.0
    return (y[1], y[1] + x * math.sqrt(x) * c * math.sqrt(c))


def _tail(x, c):
    """``144/x^3 (1 + c x^{-zeta})^{-2}`` and ``x d/dx`` of it."""
    x = np.asarray(x, dtype=float)
    corr = c * x ** -TF.zeta
    chi = 144.0 / x ** 3 / (1 + corr) ** 2
    return chi, chi * (-3 + 2 * TF.zeta * corr / (1 + corr))


def _blowup(t, y):
    return y[0] - 1e30


_blowup.terminal = True


def _inward(x_start, chi, xdchi, x_end=_X_NEAR, stop_on_blowup=False):
    events = (_blowup,) if stop_on_blowup else None
    span = abs(math.log(x_start) - math.log(x_end))
    sol = solve_ivp(_rhs, (math.log(x_start), math.log(x_end)), (chi, xdchi),
                    method="DOP853", rtol=_RTOL, atol=1e-200, first_step=min(1e-4, span / 4),
                    dense_output=True, events=events)
    if sol.status < 0:
        raise SolverFailure("TF integration failed", {"message": sol.message})
    return sol


@dataclass(frozen=True)
class _Base:
    """A base solution on ``[x_lo, x_hi]`` with dense output in ``log x``."""

    sol: object
    x_lo: float
    x_hi: float
    c_tail: float | None       # asymptotic tail parameter beyond x_hi (None: no tail)

    def eval(self, x):
        """``(chi, x chi')`` at x inside the integrated range."""
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, self.x_lo, self.x_hi)
        y = self.sol.sol(np.log(xc))
        return y[0], y[1]

    @property
    def origin(self) -> tuple[float, float]:
        """``(chi(0), chi'(0))`` from the small-x series fitted at a moderate x.

        ``chi = C + s x + 4/3 C^{3/2} x^{3/2} + 2/5 C^{1/2} s x^{5/2} + 1/3 C^2 x^3 + ...``
        """
        y0, y1 = self.eval(self.x_lo)
        C = float(y0 - y1)
        x = max(1e-4 * C ** (-1 / 3), self.x_lo)
        y0, y1 = (float(v) for v in self.eval(x))
        s = y1 / x
        for _ in range(8):
            rc = math.sqrt(C)
            s = (y1 - 2 * C * rc * x ** 1.5 - C * C * x ** 3) / (x + rc * x ** 2.5)
            C = y0 - s * x - 4 / 3 * C * rc * x ** 1.5 - 0.4 * rc * s * x ** 2.5 - C * C * x ** 3 / 3
        return C, s

    @property
    def value_at_zero(self) -> float:
        return self.origin[0]

    @property
    def slope_at_zero(self) -> float:
        return self.origin[1]


@lru_cache(maxsize=None)
def _tail_base(sign: int) -> _Base:
    chi, xd = _tail(_X_FAR, float(sign))
    sol = _inward(_X_FAR, float(chi), float(xd), stop_on_blowup=sign < 0)
    x_lo = math.exp(sol.t[-1]) * (1 + 1e-12) if sign < 0 else _X_NEAR
    return _Base(sol, x_lo, _X_FAR, float(sign))


@dataclass(frozen=True)
class ScaledProfile:
    """``chi(x) = lam^3 W(lam x)`` for a base solution W."""

    base: _Base
    lam: float

    def chi(self, x) -> tuple[np.ndarray, np.ndarray]:
        """``(chi, x chi')`` for any x > 0 (series near 0, tail beyond the base range)."""
        x = np.asarray(x, dtype=float)
        y = self.lam * x
        b = self.base
        c0, c1 = b.eval(y)
        c0 = c0 * self.lam ** 3
        c1 = c1 * self.lam ** 3
        if b.c_tail is not None:
            far = y > b.x_hi
            if np.any(far):
                t0, t1 = _tail(y[far], b.c_tail)
                c0[far] = self.lam ** 3 * t0
                c1[far] = self.lam ** 3 * t1
        near = y < b.x_lo
        if np.any(near):
            s = self.slope0
            xn = x[near]
            c0[near] = self.chi0 + s * xn + 4 / 3 * xn ** 1.5
            c1[near] = s * xn + 2 * xn ** 1.5
        return c0, c1

    @property
    def chi0(self) -> float:
        return self.lam ** 3 * self.base.value_at_zero

    @property
    def slope0(self) -> float:
        return self.lam ** 4 * self.base.slope_at_zero


@lru_cache(maxsize=None)
def universal_profile() -> ScaledProfile:
    """The neutral solution: ``chi(0) = 1``, ``chi -> 144/x^3``."""
    base = _tail_base(+1)
    return ScaledProfile(base, base.value_at_zero ** (-1 / 3))


def universal_slope() -> float:
    """``chi'(0)`` of the neutral solution (about -1.5880710226)."""
    return universal_profile().slope0


@lru_cache(maxsize=4096)
def _zero_base(sigma: float) -> _Base | None:
    """Base solution with ``W(1) = 0`` and ``W'(1) = -sigma``, integrated inward.

    None when the solution blows up before reaching the origin (sigma too large).
    """
    try:
        sol = _inward(1.0, 0.0, -sigma, stop_on_blowup=True)
    except SolverFailure:
        return None
    if sol.status == 1:
        return None
    return _Base(sol, _X_NEAR, 1.0, None)


def ionic_profile(q: float) -> tuple[ScaledProfile, float]:
    """Profile with ``chi(0) = 1`` vanishing at ``x0`` where ``-x0 chi'(x0) = q``; returns (profile, x0)."""
    if not 0 < q < 1:
        raise DomainError(f"ionisation fraction must lie in (0, 1), got {q}")

    # -x0 chi'(x0) decreases from 1 to 0 as sigma grows towards the blow-up threshold
    def f(ls):
        base = _zero_base(math.exp(ls))
        if base is None:
            return -1e3
        return math.log(math.exp(ls) / base.value_at_zero) - math.log(q)

    lo, hi = 0.0, 0.0
    while f(lo) < 0:
        lo -= 2.0
        if lo < -200:
            raise SolverFailure("cannot bracket the ionic slope", {"q": q, "lo": lo})
    while f(hi) > 0:
        hi += 1.0
        if hi > 200:
            raise SolverFailure("cannot bracket the ionic slope", {"q": q, "hi": hi})
    ls = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)
    sigma = math.exp(ls)
    base = _zero_base(sigma)
    lam = base.value_at_zero ** (-1 / 3)
    return ScaledProfile(base, lam), 1 / lam


# -- solutions ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TFSolution:
    Z: float
    N: float
    mu: float
    rho: RadialFunction
    phi: RadialFunction
    energy: float
    residual: float
    kind: str = "atomic"
    metadata: dict = field(default_factory=dict)

    @property
    def electrons(self) -> float:
        """``int rho``, with the exact charge beyond r_max when the solver knows it."""
        if "electrons" in self.metadata:
            return float(self.metadata["electrons"])
        tail = self.metadata.get("tail_charge")
        if tail is None:
            return integrate3d(self.rho)
        g = self.rho.grid
        return 4 * math.pi * g.integrate_extended(self.rho.values * g.points ** 2, tail=False) + tail

    def to_json(self) -> str:
        g = self.rho.grid
        doc = {
            "Z": self.Z, "N": self.N, "mu": self.mu, "energy": self.energy,
            "residual": self.residual, "kind": self.kind,
            "grid": {"kind": "log", "n": g.n, "r_min": g.r_min, "r_max": g.r_max},
            "rho": self.rho.values.tolist(), "phi": self.phi.values.tolist(),
            "metadata": dict(self.metadata),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "TFSolution":
        doc = json.loads(text)
        try:
            gd = doc["grid"]
            grid = RadialGrid.log(gd["r_min"], gd["r_max"], gd["n"])
            rho = RadialFunction(grid, doc["rho"], "density")
            phi = RadialFunction(grid, doc["phi"], "potential")
            return cls(doc["Z"], doc["N"], doc["mu"], rho, phi, doc["energy"], doc["residual"],
                       doc.get("kind", "atomic"), doc.get("metadata", {}))
        except KeyError as exc:
            raise InvalidInputError(f"TF solution document lacks {exc}") from None


def tf_density(phi_minus_mu) -> np.ndarray:
    """``2^{3/2}(3 pi^2)^{-1} [phi - mu]_+^{3/2}``."""
    t = np.maximum(np.asarray(phi_minus_mu, dtype=float), 0.0)
    return TF.density_c * t * np.sqrt(t)


def tf_kinetic(rho: RadialFunction) -> float:
    """``(3/10)(3 pi^2)^{2/3} int rho^{5/3}``."""
    return 0.6 * TF.k_tf * integrate3d(rho.with_values(rho.values ** (5 / 3), meaning="generic"))


def tf_energy(rho: RadialFunction, Z: float, V: RadialFunction | None = None) -> float:
    """TF functional ``kinetic - int V rho + D(rho, rho)`` with ``V = Z/r`` unless given."""
    if rho.meaning != "density":
        rho = RadialFunction(rho.grid, rho.values, "density")
    r = rho.grid.points
    v = Z / r if V is None else V.values
    with np.errstate(over="raise", invalid="raise"):
        try:
            attraction = integrate3d(rho.with_values(rho.values * v, meaning="generic"))
        except FloatingPointError as exc:
            raise OverflowError("attraction integral diverges") from exc
    e = tf_kinetic(rho) - attraction + coulomb_inner(rho, rho)
    if not math.isfinite(e):
        raise OverflowError("TF energy diverges on this grid")
    return e


def _poisson_residual(phi: np.ndarray, V: np.ndarray, rho: RadialFunction) -> float:
    """``max |phi - (V - rho * 1/|x|)| / (1 + |phi|)``: the TF equation with rho = rho[phi]."""
    defect = phi - (V - newton_potential(rho).values)
    return float(np.max(np.abs(defect) / (1 + np.abs(phi))))


def _atomic_solution(Z, N, grid, profile, mu, r0, kind_meta) -> TFSolution:
    r = grid.points
    a = TF.length * Z ** (-1 / 3)
    chi, _ = profile.chi(r / a)
    if r0 is not None:
        chi = np.where(r < r0, np.maximum(chi, 0.0), 0.0)
    excess = Z * chi / r
    phi = excess + mu
    if r0 is not None:
        phi = np.where(r < r0, phi, (Z - N) / r)
    rho = RadialFunction(grid, tf_density(excess), "density")
    res = _poisson_residual(phi, Z / r, rho)
    energy = tf_energy(rho, Z)
    x_max = grid.r_max / a
    tail = 0.0
    if r0 is None or r0 > grid.r_max:
        c0, c1 = profile.chi(np.array([x_max]))
        tail = max(float(Z * (c0[0] - c1[0])) - (Z - N), 0.0)
    meta = {"length": a, "tail_charge": tail, **kind_meta}
    return TFSolution(float(Z), float(N), float(mu), rho,
                      RadialFunction(grid, phi, "potential"), energy, res, "atomic", meta)


def solve_neutral_tf(Z: float, settings: NumericsSettings = DEFAULT_NUMERICS,
                     grid: RadialGrid | None = None) -> TFSolution:
    """Neutral TF atom (``mu = 0``, ``int rho = Z``) from the universal profile."""
    if not (Z > 0 and math.isfinite(Z)):
        raise DomainError(f"Z must be positive, got {Z}")
    grid = grid or settings.grid_for(Z, Z)
    prof = universal_profile()
    return _atomic_solution(Z, Z, grid, prof, 0.0, None, {"slope": prof.slope0})


def solve_tf(Z: float, N: float, settings: NumericsSettings = DEFAULT_NUMERICS,
             grid: RadialGrid | None = None) -> TFSolution:
    """TF atom with N electrons; for ``N >= Z`` the neutral solution is returned."""
    if not (Z > 0 and math.isfinite(Z)):
        raise DomainError(f"Z must be positive, got {Z}")
    if not (N > 0 and math.isfinite(N)):
        raise DomainError(f"N must be positive, got {N}")
    if N >= Z:
        sol = solve_neutral_tf(Z, settings, grid or settings.grid_for(Z, N))
        return TFSolution(sol.Z, float(N), 0.0, sol.rho, sol.phi, sol.energy, sol.residual,
                          "atomic", sol.metadata)
    grid = grid or settings.grid_for(Z, N)
    q = (Z - N) / Z
    prof, x0 = ionic_profile(q)
    a = TF.length * Z ** (-1 / 3)
    r0 = a * x0
    mu = (Z - N) / r0
    return _atomic_solution(Z, N, grid, prof, mu, r0, {"r0": r0, "q": q})


# -- exterior problem -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExteriorTFProblem:
    """TF problem for a potential vanishing inside ``r_cut`` and harmonic outside."""

    r_cut: float
    V: RadialFunction
    budget: float

    def __post_init__(self):
        if not self.r_cut > 0:
            raise DomainError(f"r_cut must be positive, got {self.r_cut}")
        if self.budget < 0:
            raise DomainError(f"budget must be nonnegative, got {self.budget}")
        r = self.V.grid.points
        if self.r_cut >= self.V.grid.r_max:
            raise DomainError("r_cut must lie inside the grid")
        v = self.V.values
        if np.any(np.abs(v[r < self.r_cut * (1 - 1e-12)]) > 0):
            raise InvalidInputError("exterior potential must vanish for r < r_cut")
        rv = (r * v)[r > self.r_cut * (1 + 1e-9)]
        q = float(np.median(rv))
        if np.max(np.abs(rv - q)) > 1e-6 * max(abs(q), 1e-300):
            raise InvalidInputError("exterior potential is not harmonic (r V not constant) beyond r_cut")

    @property
    def charge(self) -> float:
        """``lim r V(r)``."""
        r = self.V.grid.points
        return float(np.median((r * self.V.values)[r > self.r_cut * (1 + 1e-9)]))

    @classmethod
    def from_density(cls, rho: RadialFunction, Z: float, r_cut: float, budget: float | None = None):
        """``V = chi_{>r_cut} Phi_{r_cut}`` for an atom with density rho; budget defaults to the exterior charge."""
        from .electrostatics import charge_profile

        grid = rho.grid
        r = grid.points
        prof = charge_profile(rho)
        q = Z - float(prof.enclosed(r_cut))
        v = np.where(r >= r_cut, q / r, 0.0)
        if budget is None:
            budget = float(prof.exterior(r_cut))
        return cls(r_cut, RadialFunction(grid, v, "potential"), budget)


def _exterior_decaying(T: float) -> ScaledProfile:
    """Decaying solution family member with ``y^3 (W - y W') = T`` at the cut (unit x_cut)."""
    if abs(T - 576.0) < 1e-13 * 576.0:
        raise SolverFailure("exactly Sommerfeld exterior data not supported", {"T": T})
    base = _tail_base(+1 if T < 576.0 else -1)

    def g(ly):
        y = math.exp(ly)
        c0, c1 = base.eval(y)
        return math.log(y ** 3 * float(c0 - c1)) - math.log(T)

    lo, hi = math.log(base.x_lo * 1.0001), math.log(base.x_hi)
    glo, ghi = g(lo), g(hi)
    if glo * ghi > 0:
        raise SolverFailure("cannot bracket the exterior tail parameter",
                            {"T": T, "g_lo": glo, "g_hi": ghi})
    ly = brentq(g, lo, hi, xtol=1e-14, rtol=1e-15)
    return ScaledProfile(base, math.exp(ly))


def _exterior_ionic(x_cut: float, qv: float, D: float):
    """Solution vanishing at ``X_R`` with ``x w' = -D`` there and Robin data ``qv`` at ``x_cut``."""
    history = []

    def resid(lx):
        X = math.exp(lx)
        sol = _inward(X, 0.0, -D, x_end=x_cut, stop_on_blowup=True)
        if sol.status == 1:
            return 1e300
        y0, y1 = sol.y[:, -1]
        history.append((X, y0 - y1 - qv))
        return float(y0 - y1 - qv)

    lo = math.log(x_cut * (1 + 1e-9))
    hi = lo + 0.5
    while resid(hi) < 0:
        hi += 0.5
        if hi - lo > 60:
            raise SolverFailure("cannot bracket the exterior TF radius", {"history": history[-10:]})
    lx = brentq(resid, lo, hi, xtol=1e-14, rtol=1e-15)
    X = math.exp(lx)
    return _inward(X, 0.0, -D, x_end=x_cut), X


def solve_exterior_tf(problem: ExteriorTFProblem, settings: NumericsSettings = DEFAULT_NUMERICS) -> TFSolution:
    """TF minimiser for the exterior potential under ``int rho <= budget``.

    ``u = r phi`` solves ``u'' = c_tf r [u/r - mu]_+^{3/2}`` beyond the cut with the
    Robin condition ``u - r u' = lim r V``.  The unconstrained (``mu = 0``) solution
    neutralises the exterior charge; if that exceeds the budget, mu > 0 and the
    density ends at a finite radius.
    """
    V = problem.V
    grid = V.grid
    r = grid.points
    rc = problem.r_cut
    qv = problem.charge
    b = TF.length
    x_cut = rc / b
    zero = RadialFunction(grid, np.zeros(grid.n), "density")
    if problem.budget == 0 or qv <= 0:
        return TFSolution(qv, 0.0, 0.0, zero, V, 0.0, 0.0, "exterior",
                          {"r_cut": rc, "budget": problem.budget, "charge": qv})
    if qv <= problem.budget:
        prof = _exterior_decaying(qv * x_cut ** 3)
        lam = prof.lam / x_cut
        prof = ScaledProfile(prof.base, lam)
        mu = 0.0

        def u_of(rr):
            return prof.chi(np.asarray(rr, dtype=float) / b)[0]

        def charge_beyond(rr):
            c0, c1 = prof.chi(np.array([rr / b]))
            return max(float(c0[0] - c1[0]), 0.0)

        meta = {"lam": lam}
    else:
        D = qv - problem.budget
        sol, X = _exterior_ionic(x_cut, qv, D)
        R = b * X
        mu = D / R

        def u_of(rr):
            rr = np.asarray(rr, dtype=float)
            inner = rr < R
            out = np.full(rr.shape, D)
            y = sol.sol(np.log(rr[inner] / b))
            out[inner] = np.maximum(y[0], 0.0) + mu * rr[inner]
            return out

        def charge_beyond(rr):
            if rr >= R:
                return 0.0
            y = sol.sol(math.log(rr / b))
            return max(float(y[0] - y[1]) - D, 0.0)

        meta = {"R": R}
    meta.update(r_cut=rc, budget=problem.budget, charge=qv, tail_charge=charge_beyond(grid.r_max))
    outside = r >= rc
    u = np.zeros(grid.n)
    u[outside] = u_of(r[outside])
    # inside the cut phi is constant and equal to u'(r_cut); the Robin condition gives it exactly
    inside_phi = (float(u_of(np.array([rc]))[0]) - qv) / rc
    phi = np.where(outside, u / r, inside_phi)
    rho = RadialFunction(grid, np.where(outside, tf_density(phi - mu), 0.0), "density")
    res = _exterior_residual(u_of, mu, qv, rc, grid.r_max, grid.n)
    energy = tf_energy(rho, 0.0, V)
    # the grid sum carries an O(h) error from the density jump at the cut; the
    # charge beyond the cut is known exactly from u - r u'
    meta["electrons"] = charge_beyond(rc)
    return TFSolution(qv, meta["electrons"], mu, rho, RadialFunction(grid, phi, "potential"),
                      energy, res, "exterior", meta)


def _exterior_residual(u_of, mu, qv, rc, r_max, n) -> float:
    """TF-equation defect on a log grid starting exactly at the cut (no density jump inside)."""
    g = RadialGrid.log(rc, r_max, n)
    rr = g.points
    phi = u_of(rr) / rr
    rho = tf_density(phi - mu)
    q_in = 4 * math.pi * g.cumulative(rho * rr * rr, head=False)
    outer = 4 * math.pi * g.cumulative_outer(rho * rr)
    defect = phi - (qv / rr - q_in / rr - outer)
    return float(np.max(np.abs(defect) / (1 + np.abs(phi))))


# -- Sommerfeld bounds --------------------------------------------------------

def sommerfeld_upper(r, mu: float, Z: float):
    """``min{81 pi^2/8 r^-4 + mu, Z/r}``."""
    r = np.asarray(r, dtype=float)
    return np.minimum(TF.somm4 * r ** -4 + mu, Z / r)


def sommerfeld_lower(r, Z: float, N: float, a: float | None = None):
    """Piecewise lower bound on the atomic TF potential, split at ``beta0 Z^{-1/3}``.

    ``a`` defaults to the value that makes the bound continuous (43.59...); the
    rounded 43.7 is ``TF.a_somm``.
    """
    a = TF.a_continuous if a is None else a
    r = np.asarray(r, dtype=float)
    R = TF.beta0 * Z ** (-1 / 3)
    inner = Z / r - TF.inner_shift * Z ** (4 / 3)
    outer = np.maximum(
        TF.somm4 * (1 + a * Z ** (-TF.zeta / 3) * r ** -TF.zeta) ** -2 * r ** -4,
        max(Z - N, 0.0) / r,
    )
    return np.where(r <= R, inner, outer)


def sommerfeld_comparators(a_or_A: float, r, kind: str):
    """``omega^+_A = S r^-4 (1 + A r^-zeta)`` or ``omega^-_a = S r^-4 (1 + a r^-zeta)^-2``."""
    r = np.asarray(r, dtype=float)
    corr = a_or_A * r ** -TF.zeta
    if kind == "upper":
        return TF.somm4 * r ** -4 * (1 + corr)
    if kind == "lower":
        if np.any(1 + corr <= 0):
            raise DomainError("lower comparator needs 1 + a r^-zeta > 0")
        return TF.somm4 * r ** -4 * (1 + corr) ** -2
    raise DomainError(f"kind must be 'upper' or 'lower', got {kind!r}")


def sommerfeld_parameters(phi: RadialFunction, R: float, mu: float = 0.0) -> tuple[float, float]:
    """``(a(R), A(R, mu))`` measured on the first grid shell outside R."""
    r = phi.grid.points
    i = int(np.searchsorted(r, R, side="right"))
    if i >= r.size:
        raise DomainError("R lies beyond the grid")
    ri, p = r[i], phi.values[i]
    ratio = p / (TF.somm4 * ri ** -4)
    if ratio <= 0:
        raise DomainError("potential must be positive on the shell")
    a = (ratio ** -0.5 - 1) * ri ** TF.zeta
    A = ((p - mu) / (TF.somm4 * ri ** -4) - 1) * ri ** TF.zeta
    return a, A
