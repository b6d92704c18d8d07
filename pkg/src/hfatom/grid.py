"""Logarithmic radial grids, quadrature and radial function containers.

Everything in the package lives on a grid ``r_i = r_min * exp(i * h)``.  Integrals
over ``r`` are done in the log variable ``x = log r`` (``dr = r dx``), where the
samples are equally spaced and a Gregory-corrected trapezoid rule applies.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from math import comb
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import InvalidInputError

MEANINGS = ("density", "potential", "orbital", "generic")

# Gregory end-correction coefficients (Euler-Maclaurin with finite differences).
_GREGORY = (1.0 / 12.0, 1.0 / 24.0, 19.0 / 720.0, 3.0 / 160.0)


@dataclass(frozen=True)
class NumericsSettings:
    """Grid and tolerance defaults shared by every module."""

    n: int = 4000
    r_min_scale: float = 1e-6          # r_min = r_min_scale / Z
    r_max_floor: float = 60.0          # r_max = max(floor, per_cbrt_n * N**(1/3))
    r_max_per_cbrt_n: float = 12.0
    density_tol: float = 1e-12         # negative density samples allowed down to -tol * max
    smear_points_per_s: int = 4
    smear_mass_cut: float = 1e-8
    radius_bisection_tol: float = 1e-12
    tf_slope_tol: float = 1e-12
    tf_residual_tol: float = 1e-6

    def grid_for(self, Z: float, N: float | None = None) -> "RadialGrid":
        N = Z if N is None else N
        r_min = self.r_min_scale / Z
        r_max = max(self.r_max_floor, self.r_max_per_cbrt_n * max(N, 1e-300) ** (1.0 / 3.0))
        return RadialGrid.log(r_min, r_max, self.n)


DEFAULT_NUMERICS = NumericsSettings()


def _gregory_weights(n: int) -> np.ndarray:
    """Unit-step weights of the 6th order Gregory rule on ``n`` samples."""
    if n < 10:
        raise InvalidInputError(f"need at least 10 grid points, got {n}")
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    for k, c in enumerate(_GREGORY, start=1):
        # forward difference at the left end enters with sign (-1)**(k+1)...
        sign = 1.0 if k % 2 == 1 else -1.0
        for j in range(k + 1):
            coef = comb(k, j) * (-1.0) ** (k - j)
            w[j] += sign * c * coef
            # ...backward difference at the right end always with a minus sign
            w[n - 1 - j] -= c * comb(k, j) * (-1.0) ** j
    return w


def cumulative_integral(g: np.ndarray, h: float) -> np.ndarray:
    """Running integral ``G_i = int_{x_0}^{x_i} g dx`` of equally spaced samples.

    Each interval uses the cubic through four neighbouring samples, so the
    local error is O(h^5).
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[-1]
    seg = np.empty(g.shape[:-1] + (n - 1,))
    seg[..., 1:-1] = -g[..., :-3] + 13.0 * g[..., 1:-2] + 13.0 * g[..., 2:-1] - g[..., 3:]
    seg[..., 0] = 9.0 * g[..., 0] + 19.0 * g[..., 1] - 5.0 * g[..., 2] + g[..., 3]
    seg[..., -1] = g[..., -4] - 5.0 * g[..., -3] + 19.0 * g[..., -2] + 9.0 * g[..., -1]
    out = np.zeros_like(g)
    np.cumsum(seg * (h / 24.0), axis=-1, out=out[..., 1:])
    return out


def _power_law_end(g0: float, g1: float, h: float, outward: bool) -> float:
    """Integral of the power-law continuation of ``g`` past a grid end.

    ``g0`` is the end sample, ``g1`` its neighbour.  Returns 0 when the
    samples do not decay away from the grid (no convergent continuation).
    """
    if g0 == 0.0 or g1 == 0.0 or (g0 > 0) != (g1 > 0):
        return 0.0
    p = math.log(g0 / g1) / h        # g ~ exp(p x) moving away from the grid
    if outward:
        return -g0 / p if p < -1e-3 else 0.0
    p = -p
    return g0 / p if p > 1e-3 else 0.0


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing radii with quadrature weights for ``int f(r) dr``."""

    points: np.ndarray
    weights: np.ndarray
    h: float

    def __post_init__(self):
        r = np.asarray(self.points, dtype=float)
        if r.ndim != 1 or r.size < 10:
            raise InvalidInputError("grid needs a 1-d array of at least 10 radii")
        if not np.all(np.isfinite(r)) or r[0] <= 0 or np.any(np.diff(r) <= 0):
            raise InvalidInputError("grid radii must be finite, positive and strictly increasing")
        r.setflags(write=False)
        w = np.asarray(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "points", r)
        object.__setattr__(self, "weights", w)

    @classmethod
    def log(cls, r_min: float, r_max: float, n: int) -> "RadialGrid":
        if not (0 < r_min < r_max):
            raise InvalidInputError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
        h = math.log(r_max / r_min) / (n - 1)
        r = r_min * np.exp(h * np.arange(n))
        r[-1] = r_max
        return cls(points=r, weights=h * _gregory_weights(n) * r, h=h)

    @property
    def n(self) -> int:
        return self.points.size

    @property
    def r_min(self) -> float:
        return float(self.points[0])

    @property
    def r_max(self) -> float:
        return float(self.points[-1])

    @property
    def x(self) -> np.ndarray:
        return np.log(self.points)

    def integrate(self, f) -> float:
        """``int_{r_min}^{r_max} f(r) dr``."""
        return float(np.dot(self.weights, f))

    def integrate_extended(self, f, head: bool = True, tail: bool = True) -> float:
        """``int_0^inf f(r) dr`` with power-law continuation past both ends."""
        g = np.asarray(f, dtype=float) * self.points
        out = float(np.dot(self.weights, f))
        if head:
            out += _power_law_end(g[0], g[1], self.h, outward=False)
        if tail:
            out += _power_law_end(g[-1], g[-2], self.h, outward=True)
        return out

    def cumulative(self, f, head: bool = True) -> np.ndarray:
        """Running ``int_0^{r_i} f dr`` (head continuation below r_min included)."""
        g = np.asarray(f, dtype=float) * self.points
        out = cumulative_integral(g, self.h)
        if head:
            out = out + _power_law_end(g[0], g[1], self.h, outward=False)
        return out

    def cumulative_outer(self, f, tail: bool = True) -> np.ndarray:
        """Running ``int_{r_i}^inf f dr`` (tail continuation beyond r_max included)."""
        g = np.asarray(f, dtype=float) * self.points
        out = cumulative_integral(g[::-1], self.h)[::-1]
        if tail:
            out = out + _power_law_end(g[-1], g[-2], self.h, outward=True)
        return out

    def header(self) -> str:
        return f"grid=log n={self.n} r_min={self.r_min!r} r_max={self.r_max!r}"

    def same_as(self, other: "RadialGrid") -> bool:
        return self is other or (
            self.n == other.n and np.array_equal(self.points, other.points)
        )


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Samples of a spherically symmetric scalar field on a grid."""

    grid: RadialGrid
    values: np.ndarray
    meaning: str = "generic"
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.meaning not in MEANINGS:
            raise InvalidInputError(f"unknown meaning {self.meaning!r}")
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise InvalidInputError(
                f"values length {v.size} does not match grid length {self.grid.n}"
            )
        if self.meaning == "density":
            if not np.all(np.isfinite(v)):
                raise InvalidInputError("density has non-finite samples")
            floor = -DEFAULT_NUMERICS.density_tol * max(float(np.max(v, initial=0.0)), 1.0)
            if np.any(v < floor):
                raise InvalidInputError("density has negative samples")
            np.maximum(v, 0.0, out=v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    @property
    def r(self) -> np.ndarray:
        return self.grid.points

    def __len__(self):
        return self.grid.n

    def __call__(self, r):
        """Interpolate (cubic in log r) at arbitrary radii inside the grid."""
        from scipy.interpolate import CubicSpline

        spline = CubicSpline(self.grid.x, self.values)
        return spline(np.log(r))

    def with_values(self, values, meaning: str | None = None, **metadata) -> "RadialFunction":
        return RadialFunction(self.grid, values, meaning or self.meaning, metadata)

    # -- serialization -------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {self.grid.header()} meaning={self.meaning}\n")
        for r, v in zip(self.grid.points, self.values):
            buf.write(f"{float(r)!r},{float(v)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "RadialFunction":
        lines = text.strip().splitlines()
        if not lines or not lines[0].startswith("#"):
            raise InvalidInputError("missing '# grid=...' header line")
        fields = dict(tok.split("=", 1) for tok in lines[0][1:].split())
        if fields.get("grid") != "log":
            raise InvalidInputError("only log grids can be read back")
        n = int(fields["n"])
        grid = RadialGrid.log(float(fields["r_min"]), float(fields["r_max"]), n)
        data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)
        if data.shape != (n, 2):
            raise InvalidInputError(f"expected {n} rows of (r, value), got {data.shape}")
        if not np.allclose(data[:, 0], grid.points, rtol=1e-12, atol=0):
            raise InvalidInputError("radii in file do not match the header grid")
        return cls(grid, data[:, 1], fields.get("meaning", "generic"))


def sample(grid: RadialGrid, func, meaning: str = "generic") -> RadialFunction:
    """Evaluate ``func(r)`` on the grid."""
    return RadialFunction(grid, func(grid.points), meaning)


def zeros(grid: RadialGrid, meaning: str = "generic") -> RadialFunction:
    return RadialFunction(grid, np.zeros(grid.n), meaning)
