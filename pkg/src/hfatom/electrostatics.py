"""Spherically symmetric electrostatics on a radial grid.

Newton potentials, screened nuclear potentials, the Coulomb inner product and
norm, smearing with the squared Dirichlet ball ground state, and the
charge-radius function.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import sici

from .errors import DomainError, InvalidInputError, ResolutionError
from .grid import DEFAULT_NUMERICS, RadialFunction, RadialGrid

FOUR_PI = 4.0 * math.pi

# Pointwise Newton-theorem checks on every potential (enabled by the test suite).
CHECK_INVARIANTS = os.environ.get("HFATOM_CHECKS", "") == "1"


def _finite(f: RadialFunction, what: str = "function") -> np.ndarray:
    v = f.values
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{what} has non-finite samples")
    return v


def _check_same_grid(f: RadialFunction, g: RadialFunction):
    if not f.grid.same_as(g.grid):
        raise InvalidInputError("functions live on different grids")


def integrate3d(f: RadialFunction) -> float:
    """``int f(|x|) d^3x = 4 pi int f r^2 dr`` including power-law end continuations."""
    v = _finite(f)
    r = f.grid.points
    return FOUR_PI * f.grid.integrate_extended(v * r * r)


@dataclass(frozen=True)
class ChargeProfile:
    """Enclosed charge ``Q(r) = int_{|y|<r} rho``."""

    cumulative: RadialFunction
    total: float

    def enclosed(self, R) -> np.ndarray:
        """Q at arbitrary radii, monotone cubic in log r between samples."""
        grid = self.cumulative.grid
        R = np.asarray(R, dtype=float)
        q = self.cumulative.values
        x = np.log(np.clip(R, grid.r_min, grid.r_max))
        out = PchipInterpolator(grid.x, q)(x)
        out = np.where(R <= grid.r_min, q[0] * np.clip(R / grid.r_min, 0, 1) ** 3, out)
        return np.where(R >= grid.r_max, self.total, out)

    def exterior(self, R) -> np.ndarray:
        return self.total - self.enclosed(R)


def charge_profile(rho: RadialFunction) -> ChargeProfile:
    v = _finite(rho, "density")
    r = rho.grid.points
    q = FOUR_PI * rho.grid.cumulative(v * r * r)
    q = np.maximum.accumulate(np.maximum(q, 0.0)) if rho.meaning == "density" else q
    total = integrate3d(rho)
    if rho.meaning == "density":
        total = max(total, float(q[-1]))
    return ChargeProfile(RadialFunction(rho.grid, q, "generic"), total)


def _newton_values(grid: RadialGrid, v: np.ndarray) -> np.ndarray:
    r = grid.points
    inner = FOUR_PI * grid.cumulative(v * r * r)
    outer = FOUR_PI * grid.cumulative_outer(v * r)
    return inner / r + outer


def newton_potential(rho: RadialFunction) -> RadialFunction:
    """Radial function of ``rho * |x|^{-1}`` by Newton's theorem.

    ``(1/r) int_{s<r} 4 pi s^2 rho ds + int_{s>r} 4 pi s rho ds``.  Signed
    inputs are allowed unless ``rho.meaning == "density"``.
    """
    v = _finite(rho, "density")
    phi = _newton_values(rho.grid, v)
    if CHECK_INVARIANTS and rho.meaning == "density":
        _assert_newton(rho.grid, v, phi)
    return RadialFunction(rho.grid, phi, "potential")


def _assert_newton(grid: RadialGrid, v: np.ndarray, phi: np.ndarray):
    rphi = grid.points * phi
    total = integrate3d(RadialFunction(grid, v))
    scale = max(total, float(np.max(np.abs(rphi), initial=0.0)), 1e-300)
    if np.any(np.diff(rphi) < -1e-9 * scale) or np.any(rphi > total + 1e-9 * scale):
        raise AssertionError("r * (rho * 1/|x|) must be nondecreasing and bounded by the charge")


def screened_potential(rho: RadialFunction, Z: float, R: float) -> RadialFunction:
    """Nuclear potential ``Z/r`` screened by the part of ``rho`` inside radius R."""
    v = _finite(rho, "density")
    grid = rho.grid
    r = grid.points
    meta = {"R": float(R), "clamped": False}
    if not math.isfinite(R):
        raise DomainError(f"screening radius must be finite, got {R}")
    if R < 0:
        R = 0.0
        meta["clamped"] = True
    if R > grid.r_max:
        R = grid.r_max
        meta["clamped"] = True
    if R <= 0:
        return RadialFunction(grid, Z / r, "potential", meta)
    q_inner = charge_profile(rho).enclosed(np.minimum(r, R))
    # int_r^R 4 pi s rho ds for r < R, zero beyond
    outer = FOUR_PI * grid.cumulative_outer(v * r)
    outer_R = float(PchipInterpolator(grid.x, outer)(math.log(max(R, grid.r_min))))
    between = np.where(r < R, outer - outer_R, 0.0)
    phi = (Z - q_inner) / r - between
    return RadialFunction(grid, phi, "potential", meta)


def screened_at_radius(rho: RadialFunction, Z: float, radii) -> np.ndarray:
    """``Phi_{|x|}(x)`` evaluated at ``|x| = radii``: ``(Z - Q(r)) / r``."""
    radii = np.asarray(radii, dtype=float)
    return (Z - charge_profile(rho).enclosed(radii)) / radii


def coulomb_inner(f: RadialFunction, g: RadialFunction) -> float:
    """``D(f, g) = 1/2 iint f(x) g(y) / |x - y|``, symmetrised on the grid."""
    _check_same_grid(f, g)
    fv, gv = _finite(f), _finite(g)
    grid = f.grid
    r2 = grid.points ** 2
    with np.errstate(over="raise", invalid="raise"):
        try:
            a = grid.integrate_extended(fv * _newton_values(grid, gv) * r2)
            b = grid.integrate_extended(gv * _newton_values(grid, fv) * r2)
        except FloatingPointError as exc:
            raise OverflowError("Coulomb integral diverges on this grid") from exc
    d = 0.25 * FOUR_PI * (a + b)
    if not math.isfinite(d):
        raise OverflowError("Coulomb integral diverges on this grid")
    return d


def coulomb_norm(f: RadialFunction) -> float:
    d = coulomb_inner(f, f)
    if d < 0:
        scale = integrate3d(RadialFunction(f.grid, np.abs(f.values)))
        if d < -1e-10 * max(scale * scale, 1e-300):
            raise ArithmeticError(f"negative Coulomb self-energy {d}")
        d = 0.0
    return math.sqrt(d)


# -- smearing with g^2 ---------------------------------------------------

def _cin(z: np.ndarray) -> np.ndarray:
    """``int_0^z (1 - cos t)/t dt``."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = z < 0.05
    zs = z[small]
    zs2 = zs * zs
    out[small] = zs2 / 4.0 * (1.0 - zs2 / 24.0 * (1.0 - zs2 / 45.0))
    zl = z[~small]
    _, ci = sici(zl)
    out[~small] = np.euler_gamma + np.log(zl) - ci
    return out


def g2_shell_mass(a, s: float) -> np.ndarray:
    """``M(a) = int_0^a g(rho)^2 rho d rho`` for the Dirichlet ball ground state g."""
    a = np.minimum(np.asarray(a, dtype=float), s)
    return _cin(2.0 * math.pi * a / s) / (4.0 * math.pi * s)


def g_profile(r, s: float) -> np.ndarray:
    """``g(r) = (2 pi s)^{-1/2} sin(pi r / s) / r`` on ``r <= s``, zero outside."""
    r = np.asarray(r, dtype=float)
    inside = r <= s
    out = np.zeros_like(r)
    ri = r[inside]
    out[inside] = np.sin(math.pi * ri / s) / ri / math.sqrt(2.0 * math.pi * s)
    return out


def _resolved_extent(f: RadialFunction, s: float, settings) -> float:
    """Largest radius inside which ``s`` spans the required number of grid steps."""
    grid = f.grid
    return s / (settings.smear_points_per_s * grid.h)


def smear_g2(f: RadialFunction, s: float, settings=DEFAULT_NUMERICS) -> RadialFunction:
    """Radial convolution ``f * g^2`` with g the ground state of a Dirichlet ball of radius s.

    For radial f the convolution reduces to a single radial integral,
    ``(f*g^2)(r) = int f(t) (2 pi t / r) [M(r+t) - M(|r-t|)] dt``.
    """
    if not s > 0:
        raise DomainError(f"smearing radius must be positive, got {s}")
    v = _finite(f)
    grid = f.grid
    r = grid.points
    extent = _resolved_extent(f, s, settings)
    if extent < grid.r_max:
        weight = np.abs(v) * r * r * grid.weights
        total = weight.sum()
        outside = weight[r > extent - s].sum()
        if total > 0 and outside > settings.smear_mass_cut * total:
            raise ResolutionError(
                f"s={s} spans fewer than {settings.smear_points_per_s} grid steps "
                f"beyond r={extent:.4g} where f still carries weight"
            )
    w = grid.weights * v
    out = np.zeros(grid.n)
    lo = np.searchsorted(r, r - s, side="left")
    hi = np.searchsorted(r, r + s, side="right")
    for i in range(grid.n):
        j0, j1 = lo[i], hi[i]
        t = r[j0:j1]
        kern = g2_shell_mass(r[i] + t, s) - g2_shell_mass(np.abs(r[i] - t), s)
        out[i] = 2.0 * math.pi / r[i] * np.dot(w[j0:j1], t * kern)
    meaning = f.meaning if f.meaning in ("density", "potential") else "generic"
    if meaning == "density":
        out = np.maximum(out, 0.0)
    return RadialFunction(grid, out, meaning, {"s": s})


# -- radius function -----------------------------------------------------

def radius_of_charge(rho: RadialFunction, nu: float, settings=DEFAULT_NUMERICS) -> float:
    """Radius R with ``int_{|x| >= R} rho = nu``."""
    prof = charge_profile(rho)
    grid = rho.grid
    total = prof.total
    if nu < 0 or nu > total * (1 + 1e-12) + 1e-300:
        raise DomainError(f"nu={nu} outside [0, {total}]")
    slack = 1e-12 * max(total, 1e-300)
    if nu >= float(prof.exterior(grid.r_min)) - slack:
        return grid.r_min
    if nu <= float(prof.exterior(grid.r_max)) + slack:
        return grid.r_max
    q = prof.cumulative.values
    interp = PchipInterpolator(grid.x, q)
    target = total - nu
    # bracket on grid samples, then bisect the monotone interpolant in log r
    k = int(np.searchsorted(q, target))
    a = grid.x[max(k - 1, 0)]
    b = grid.x[min(k, grid.n - 1)]
    for _ in range(200):
        m = 0.5 * (a + b)
        if interp(m) < target:
            a = m
        else:
            b = m
        if b - a < settings.radius_bisection_tol:
            break
    return math.exp(0.5 * (a + b))


# -- Coulomb-norm estimates ----------------------------------------------

def radial_derivative(f: RadialFunction) -> np.ndarray:
    """``df/dr`` by second-order differences in log r."""
    return np.gradient(f.values, f.grid.h, edge_order=2) / f.grid.points


def gradient_norm(f: RadialFunction) -> float:
    """``||grad f||_2`` for a radial function."""
    d = radial_derivative(f)
    return math.sqrt(max(integrate3d(RadialFunction(f.grid, d * d)), 0.0))


def coulomb_norm_estimate(f: RadialFunction, g: RadialFunction) -> tuple[float, float]:
    """``(|int f g|, (2 pi)^{-1/2} ||grad f||_2 ||g||_C)``; the first never exceeds the second."""
    _check_same_grid(f, g)
    lhs = abs(integrate3d(RadialFunction(f.grid, f.values * g.values)))
    rhs = gradient_norm(f) * coulomb_norm(g) / math.sqrt(2.0 * math.pi)
    return lhs, rhs


def _sphere_in_ball(t: np.ndarray, r: float, s: float) -> np.ndarray:
    """Area of the sphere ``|y| = t`` inside the ball ``B(x, s)`` with ``|x| = r``."""
    area = np.zeros_like(t)
    full = t + r <= s
    area[full] = FOUR_PI * t[full] ** 2
    part = (~full) & (np.abs(r - t) < s)
    if r > 0:
        tp = t[part]
        area[part] = math.pi * tp / r * (s * s - (r - tp) ** 2)
    return area


def ball_norm(f: RadialFunction, r: float, s: float, p: float) -> float:
    """``||f||_{L^p(B(x, s))}`` for radial f and ``|x| = r``."""
    t = f.grid.points
    area = _sphere_in_ball(t, r, s)
    val = f.grid.integrate(np.abs(f.values) ** p * area)
    return max(val, 0.0) ** (1.0 / p)


def potential_at(f: RadialFunction, r) -> np.ndarray:
    """``(f * |x|^{-1})`` at radii r for a signed radial function f."""
    return newton_potential(RadialFunction(f.grid, f.values))(np.asarray(r, dtype=float))


def local_coulomb_bound(f: RadialFunction, r: float, s: float) -> float:
    """Upper bound on ``(f * |x|^{-1})(x)`` at ``|x| = r`` from the positive part near x and ``||f||_C``.

    ``(25 pi^4 s / 16)^{1/5} ||f_+||_{L^{5/3}(B(x,s))} + (2/s)^{1/2} ||f||_C``.
    """
    fplus = RadialFunction(f.grid, np.maximum(f.values, 0.0))
    local = (25.0 * math.pi ** 4 * s / 16.0) ** 0.2 * ball_norm(fplus, r, s, 5.0 / 3.0)
    return local + math.sqrt(2.0 / s) * coulomb_norm(f)
