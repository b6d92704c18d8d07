"""Bound states of ``-1/2 u'' + [l(l+1)/(2r^2) - V(r)] u = eps u`` on a log grid.

With ``x = log r`` and ``u = r^{1/2} w`` the radial equation becomes

    w'' = g(x) w,    g = (l + 1/2)^2 - 2 r^2 (V + eps),

which has a uniform step, so the Numerov recurrence applies directly.  In the
variable ``y = (1 - h^2 g / 12) w`` the discrete problem is a symmetric
tridiagonal matrix ``K(eps)`` whose LDL pivots give a Sturm count: the number of
negative pivots equals the number of discrete eigenvalues below ``eps``.
Eigenvalues are located by bisection on that count, so near-degenerate levels
can never be skipped or swapped.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from numba import njit

from .electrostatics import integrate3d
from .errors import DomainError, InvalidInputError
from .grid import RadialFunction, RadialGrid
from .reports import BoundReport, lower, upper

# CLR and Lieb-Thirring constants for -1/2 Laplacian in three dimensions
K1_KINETIC = 20.49
L1_LT = 0.4 * (3.0 / (5.0 * K1_KINETIC)) ** (2.0 / 3.0)     # 0.038
L0_CLR = 2.0 ** 1.5 * 0.1156                                # 0.3270

BISECTION_TOL = 1e-11
BOX_FACTOR = 5.0          # |eps| < BOX_FACTOR / r_max^2 marks a level as box sensitive
_FMIN = 0.5               # trim the grid where the Numerov factor 1 - h^2 g/12 drops below this


@njit(cache=True)
def _sturm_count(g0, two_r2, eps, c, n_end, w_ratio):
    """Negative LDL pivots of K(eps) on interior nodes 1..n_end-1.

    ``w_ratio = w_1 / w_0`` carries the small-r power law below the grid.
    """
    count = 0
    f0 = 1.0 - c * (g0[0] - two_r2[0] * eps)
    f1 = 1.0 - c * (g0[1] - two_r2[1] * eps)
    p = w_ratio * f1 / f0
    for i in range(1, n_end):
        f = 1.0 - c * (g0[i] - two_r2[i] * eps)
        d = 12.0 / f - 10.0
        p = d - 1.0 / p
        if p == 0.0:
            p = -1e-300
        if p < 0.0:
            count += 1
    return count


@njit(cache=True)
def _numerov_y(g0, two_r2, eps, c, n_end, m, w_ratio):
    """Outward (0..m) and inward (n_end..m) Numerov solutions in y, matched at m."""
    n = n_end + 1
    d = np.empty(n)
    for i in range(n):
        f = 1.0 - c * (g0[i] - two_r2[i] * eps)
        d[i] = 12.0 / f - 10.0
    y = np.zeros(n)
    y[0] = 1.0 - c * (g0[0] - two_r2[0] * eps)
    y[1] = w_ratio * (1.0 - c * (g0[1] - two_r2[1] * eps))
    for i in range(1, m):
        y[i + 1] = d[i] * y[i] - y[i - 1]
        if abs(y[i + 1]) > 1e200:
            for j in range(i + 2):
                y[j] *= 1e-200
    left = y[m]
    z = np.zeros(n)
    z[n_end - 1] = 1.0
    for i in range(n_end - 1, m, -1):
        z[i - 1] = d[i] * z[i] - z[i + 1]
        if abs(z[i - 1]) > 1e200:
            for j in range(i - 1, n):
                z[j] *= 1e-200
    right = z[m]
    if right != 0.0:
        scale = left / right
        for i in range(m + 1, n):
            y[i] = z[i] * scale
    return y


@dataclass(frozen=True, eq=False)
class ChannelSpectrum:
    """Lowest Dirichlet eigenpairs in one angular channel."""

    l: int
    eigenvalues: np.ndarray
    orbitals: tuple
    truncated: bool = False
    metadata: Mapping = field(default_factory=dict)

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def box_sensitive(self) -> np.ndarray:
        if not self.orbitals:
            return np.zeros(0, dtype=bool)
        r_max = self.orbitals[0].grid.r_max
        return np.abs(self.eigenvalues) < BOX_FACTOR / r_max**2


class _Channel:
    """Numerov data for one (V, l); evaluates Sturm counts and orbitals."""

    def __init__(self, V: RadialFunction, l: int):
        if not isinstance(l, (int, np.integer)) or l < 0:
            raise InvalidInputError(f"angular momentum must be an integer >= 0, got {l!r}")
        v = np.asarray(V.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("potential has non-finite samples")
        self.grid = V.grid
        self.l = int(l)
        r = self.grid.points
        self.two_r2 = 2.0 * r * r
        self.g0 = (l + 0.5) ** 2 - self.two_r2 * v
        self.c = self.grid.h**2 / 12.0
        self.floor = float(np.min(l * (l + 1) / (2.0 * r * r) - v))
        # below r_min: u ~ r^{l+1} (1 - z r / (l+1)) with z = lim r V
        z = r[0] * v[0]
        self.w_ratio = float(
            math.exp((l + 0.5) * self.grid.h)
            * (1.0 - z * r[1] / (l + 1)) / (1.0 - z * r[0] / (l + 1))
        )

    def n_end(self, eps: float) -> int:
        # beyond this node the solution at eps is below exp(-sqrt(12)/h) of its peak
        bad = self.c * (self.g0 - self.two_r2 * eps) > 1.0 - _FMIN
        idx = np.flatnonzero(bad[1:])
        n_end = self.grid.n - 1 if idx.size == 0 else int(idx[0]) + 1
        return max(n_end, 3)

    def count(self, eps: float) -> int:
        return int(_sturm_count(self.g0, self.two_r2, eps, self.c, self.n_end(eps), self.w_ratio))

    def orbital(self, eps: float) -> np.ndarray:
        n_end = self.n_end(eps)
        g = self.g0[: n_end + 1] - self.two_r2[: n_end + 1] * eps
        allowed = np.flatnonzero(g < 0)
        m = int(allowed[-1]) if allowed.size else n_end // 2
        m = min(max(m, 2), n_end - 2)
        y = _numerov_y(self.g0, self.two_r2, eps, self.c, n_end, m, self.w_ratio)
        f = 1.0 - self.c * g
        u = np.zeros(self.grid.n)
        u[: n_end + 1] = np.sqrt(self.grid.points[: n_end + 1]) * y / f
        u /= np.max(np.abs(u))
        u /= math.sqrt(self.grid.integrate(u * u))
        big = np.flatnonzero(np.abs(u) > 1e-3 * np.max(np.abs(u)))
        if u[big[0]] < 0:
            u = -u
        return u


def _bisect_levels(ch: _Channel, count: int, eps_max: float):
    """Brackets for the lowest ``count`` levels below eps_max, refined together."""
    lo_eps = ch.floor - 1.0 - 1e-3 * abs(ch.floor)
    while ch.count(lo_eps) > 0:
        lo_eps = 2.0 * lo_eps - 1.0
    lo = np.full(count, lo_eps)
    hi = np.full(count, float(eps_max))
    for k in range(count):
        while hi[k] - lo[k] > max(BISECTION_TOL, 4e-16 * abs(lo[k])):
            mid = 0.5 * (lo[k] + hi[k])
            c = ch.count(mid)
            # one evaluation tightens every bracket it informs
            hi[:c] = np.minimum(hi[:c], mid)
            lo[c:] = np.maximum(lo[c:], mid)
    return 0.5 * (lo + hi)


def _nodes(u: np.ndarray) -> int:
    big = u[np.abs(u) > 1e-8 * np.max(np.abs(u))]
    return int(np.count_nonzero(np.diff(np.sign(big)) != 0))


def solve_channel(V: RadialFunction, l: int, count: int, eps_max: float = 0.0) -> ChannelSpectrum:
    """The ``count`` lowest Dirichlet eigenpairs below ``eps_max`` for angular momentum ``l``.

    ``V`` is the attractive potential (``V = Z/r`` for hydrogen).  If fewer than
    ``count`` states lie below ``eps_max`` in the box, the available ones are
    returned with ``truncated=True``.
    """
    if count < 1:
        raise InvalidInputError(f"count must be >= 1, got {count}")
    ch = _Channel(V, l)
    available = ch.count(eps_max)
    k = min(count, available)
    eps = _bisect_levels(ch, k, eps_max) if k else np.zeros(0)
    orbitals = []
    nodes = []
    for e in eps:
        u = ch.orbital(float(e))
        nodes.append(_nodes(u))
        orbitals.append(RadialFunction(ch.grid, u, "orbital", {"l": ch.l, "epsilon": float(e)}))
    return ChannelSpectrum(
        l=ch.l,
        eigenvalues=np.asarray(eps, dtype=float),
        orbitals=tuple(orbitals),
        truncated=k < count,
        metadata={"available": available, "nodes": tuple(nodes), "eps_max": eps_max},
    )


def count_bound(V: RadialFunction, l: int, eps_max: float = 0.0) -> int:
    """Number of Dirichlet levels below ``eps_max`` in channel ``l`` (no orbitals)."""
    return _Channel(V, l).count(eps_max)


@dataclass(frozen=True, eq=False)
class Spectrum3D:
    """Negative spectrum of ``-1/2 Laplacian - V`` on L^2(R^3), no spin."""

    channels: tuple
    r_max: float

    @property
    def levels(self):
        """Rows ``(l, k, eps, degeneracy, box_sensitive)`` sorted by energy."""
        rows = []
        for ch in self.channels:
            flags = ch.box_sensitive
            for k, e in enumerate(ch.eigenvalues):
                rows.append((ch.l, k + 1, float(e), 2 * ch.l + 1, bool(flags[k])))
        rows.sort(key=lambda row: (row[2], row[0]))
        return rows

    def pairs(self):
        return [(e, d) for _, _, e, d, _ in self.levels]

    @property
    def count(self) -> int:
        return sum(len(ch) * (2 * ch.l + 1) for ch in self.channels)

    @property
    def total(self) -> float:
        return float(sum(np.sum(ch.eigenvalues) * (2 * ch.l + 1) for ch in self.channels))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "k", "epsilon", "degeneracy", "box_sensitive"])
        for l, k, e, d, box in self.levels:
            w.writerow([l, k, repr(float(e)), d, str(box).lower()])
        return buf.getvalue()


def negative_spectrum_3d(V: RadialFunction, l_max: int | None = None,
                         channel_cap: int = 400) -> Spectrum3D:
    """All negative levels with multiplicity ``2l + 1``.

    Without ``l_max`` channels are added until two consecutive ones are empty.
    With ``l_max`` the last channel must be empty, otherwise DomainError.
    """
    channels = []
    empty_run = 0
    l = 0
    while True:
        n = count_bound(V, l)
        channels.append(solve_channel(V, l, n) if n else
                        ChannelSpectrum(l, np.zeros(0), (), False, {"available": 0}))
        if l_max is not None:
            if l == l_max:
                if n:
                    raise DomainError(f"channel l={l_max} still has {n} bound states; raise l_max")
                break
        else:
            empty_run = empty_run + 1 if n == 0 else 0
            if empty_run == 2:
                break
            if l >= channel_cap:
                raise DomainError(f"still binding at l={l}; potential is too long ranged")
        l += 1
    return Spectrum3D(tuple(ch for ch in channels if len(ch)), V.grid.r_max)


def _positive_part_integral(V: RadialFunction, power: float) -> float:
    vp = np.maximum(V.values, 0.0) ** power
    return integrate3d(V.with_values(vp, meaning="generic"))


def check_clr(V: RadialFunction, l_max: int | None = None, tolerance: float = 0.0) -> BoundReport:
    """Number of levels <= 0 against ``L0 int [V]_+^{3/2}``.

    The Dirichlet box can only remove levels, so the count is a lower
    estimate of the whole-space count for potentials with support inside it.
    """
    spec = negative_spectrum_3d(V, l_max)
    rhs = L0_CLR * _positive_part_integral(V, 1.5)
    return BoundReport.build(
        "clr_count",
        [upper({"r_max": V.grid.r_max}, spec.count, rhs)],
        tolerance,
        constant=L0_CLR,
        box_sensitive=sum(1 for row in spec.levels if row[4]),
    )


def check_lieb_thirring_sum(V: RadialFunction, l_max: int | None = None,
                            tolerance: float = 0.0) -> BoundReport:
    """Sum of negative eigenvalues against ``-L1 int [V]_+^{5/2}``."""
    spec = negative_spectrum_3d(V, l_max)
    rhs = -L1_LT * _positive_part_integral(V, 2.5)
    return BoundReport.build(
        "lieb_thirring_sum",
        [lower({"r_max": V.grid.r_max}, spec.total, rhs)],
        tolerance,
        constant=L1_LT,
        count=spec.count,
    )


def hydrogenic_levels(Z: float, n_max: int):
    """Exact ``(n, l, eps)`` for the Coulomb potential ``Z/r``."""
    return [(n, l, -Z * Z / (2.0 * n * n)) for n in range(1, n_max + 1) for l in range(n)]


__all__ = [
    "ChannelSpectrum", "Spectrum3D", "solve_channel", "count_bound", "negative_spectrum_3d",
    "check_clr", "check_lieb_thirring_sum", "hydrogenic_levels",
    "L0_CLR", "L1_LT", "K1_KINETIC", "RadialGrid",
]
