"""Restricted (central-field) Hartree-Fock for atoms.

Orbitals are ``u_nl(r)`` on a logarithmic grid, occupied with ``occ`` electrons
per (n, l) shell, spherically averaged.  The energy is the average over the
determinants of the configuration,

    E = sum_a q_a I(a) + sum_a q_a(q_a-1)/2 [F0(aa) - f_a sum_k c_k F^k(aa)]
        + sum_{a<b} q_a q_b [F0(ab) - 1/2 sum_k c_k G^k(ab)],

which is exact for one electron and for closed shells.  It is reported as
kinetic + nuclear + direct - exchange, where direct is the Hartree energy of
the spherical density (self-interaction included) and exchange is what closes
the identity.

Numerics.  With ``u = r^{1/2} w`` and ``x = log r`` the kinetic form is
``1/2 int (w_x^2 + (l+1/2)^2 w^2) dx``, discretised with a 6th order central
difference and zero ghost values below r_min.  Slater screening integrals use
first-order recursions for the ``r_<^k / r_>^{k+1}`` kernel plus Gregory
corrections at the kink, so the discrete Coulomb forms are symmetric and the
Fock operators are exact derivatives of the discrete energy.  Each sweep does
one Davidson-type subspace step per angular channel: current orbitals plus
preconditioned residuals (banded solve of the local part), followed by a
Rayleigh-Ritz step that couples closed and open shells through an effective
Fock matrix.
"""
from __future__ import annotations

import io
import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np
from numba import njit
from scipy.linalg import eigh, solve_banded

from .electrostatics import integrate3d, newton_potential, radius_of_charge
from .errors import DomainError, InvalidInputError, SolverFailure
from .grid import RadialFunction, RadialGrid, _gregory_weights
from .reports import settings_hash
from .schrodinger import BOX_FACTOR, K1_KINETIC, L1_LT, solve_channel
from .thomas_fermi import solve_tf

log = logging.getLogger(__name__)

SPD = "spdfghik"
EXCHANGE_CONSTANT = 1.68

# 6th order second difference: f'' ~ sum c_m f_{i+m} / h^2, m = -3..3
_D2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])

# Gregory end weights (relative to the trapezoid) used on both sides of a kernel kink
_GW = _gregory_weights(20)[:5] - np.array([0.5, 1, 1, 1, 1])


# -- configurations ---------------------------------------------------------

def aufbau_configuration(N: int):
    """Shells ``(n, l, occ)`` filled in Madelung order (n + l, then n)."""
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 0:
        raise InvalidInputError(f"N must be a non-negative integer, got {N!r}")
    order = sorted(((n, l) for n in range(1, 12) for l in range(n)), key=lambda s: (s[0] + s[1], s[0]))
    shells, left = [], int(N)
    for n, l in order:
        if left == 0:
            break
        occ = min(left, 2 * (2 * l + 1))
        shells.append((n, l, occ))
        left -= occ
    return shells


def shell_label(n, l) -> str:
    return f"{n}{SPD[l]}"


@lru_cache(maxsize=None)
def three_j_squared(l1: int, l2: int, l3: int) -> float:
    """``(l1 l2 l3; 0 0 0)^2``."""
    L = l1 + l2 + l3
    if L % 2 or l3 > l1 + l2 or l3 < abs(l1 - l2):
        return 0.0
    g = L // 2
    f = math.factorial
    val = f(L - 2 * l1) * f(L - 2 * l2) * f(L - 2 * l3) / f(L + 1)
    val *= (f(g) / (f(g - l1) * f(g - l2) * f(g - l3))) ** 2
    return val


# -- settings and results ---------------------------------------------------

@dataclass(frozen=True)
class SCFSettings:
    mixing: float = 0.4
    tol: float = 1e-8
    max_sweeps: int = 400
    k_max: int | None = None
    level_shift: float = 0.5
    n: int = 4000
    r_min_scale: float = 1e-13       # zero ghost values below r_min cost ~2 Z^3 r_min / h per 1s electron
    r_max_floor: float = 60.0
    r_max_per_cbrt_n: float = 12.0

    def __post_init__(self):
        if not (0 < self.mixing <= 1):
            raise InvalidInputError(f"mixing must lie in (0, 1], got {self.mixing}")
        if not (self.tol > 0):
            raise InvalidInputError(f"tol must be positive, got {self.tol}")
        if self.max_sweeps < 1:
            raise InvalidInputError("max_sweeps must be >= 1")
        if self.k_max is not None and self.k_max < 0:
            raise InvalidInputError("k_max must be >= 0")

    def grid_for(self, Z, N) -> RadialGrid:
        r_max = max(self.r_max_floor, self.r_max_per_cbrt_n * max(N, 1) ** (1 / 3))
        return RadialGrid.log(self.r_min_scale / Z, r_max, self.n)


@dataclass(frozen=True, eq=False)
class Shell:
    n: int
    l: int
    occ: float
    epsilon: float
    u: RadialFunction | None = None

    def __post_init__(self):
        if not (0 <= self.l < self.n):
            raise InvalidInputError(f"need 0 <= l < n, got n={self.n}, l={self.l}")
        if not (0 <= self.occ <= 2 * (2 * self.l + 1)):
            raise InvalidInputError(f"occupation {self.occ} outside [0, {2 * (2 * self.l + 1)}]")

    @property
    def label(self):
        return shell_label(self.n, self.l)

    @property
    def closed(self):
        return self.occ == 2 * (2 * self.l + 1)


@dataclass(frozen=True, eq=False)
class HFState:
    Z: float
    N: int
    shells: tuple
    rho: RadialFunction
    energy_total: float
    energy_kinetic: float
    energy_nuclear: float
    energy_direct: float
    energy_exchange: float
    scf_residual: float
    metadata: Mapping = field(default_factory=dict)

    @property
    def grid(self) -> RadialGrid:
        return self.rho.grid

    @property
    def homo(self) -> Shell | None:
        return max(self.shells, key=lambda s: s.epsilon) if self.shells else None

    @property
    def flags(self):
        return tuple(self.metadata.get("flags", ()))

    @property
    def unbound(self) -> bool:
        return "unbound electron" in self.flags

    def breakdown(self):
        return {
            "total": self.energy_total, "kinetic": self.energy_kinetic,
            "nuclear": self.energy_nuclear, "direct": self.energy_direct,
            "exchange": self.energy_exchange,
        }

    def to_json(self) -> str:
        data = {
            "Z": self.Z, "N": self.N,
            "shells": [{"n": s.n, "l": s.l, "occ": s.occ, "epsilon": s.epsilon} for s in self.shells],
            "energies": self.breakdown(),
            "scf_residual": self.scf_residual,
            "grid": self.grid.header(),
            "rho": [float(v) for v in self.rho.values],
            "orbitals": [[float(v) for v in s.u.values] for s in self.shells],
            "metadata": {k: v for k, v in self.metadata.items() if k != "history"}
            | {"history": list(self.metadata.get("history", ()))},
        }
        return json.dumps(data)

    @classmethod
    def from_json(cls, text: str) -> "HFState":
        data = json.loads(text)
        try:
            fields = dict(tok.split("=", 1) for tok in data["grid"].split())
            grid = RadialGrid.log(float(fields["r_min"]), float(fields["r_max"]), int(fields["n"]))
            orbitals = data.get("orbitals") or [None] * len(data["shells"])
            shells = tuple(
                Shell(s["n"], s["l"], s["occ"], s["epsilon"],
                      None if u is None else RadialFunction(grid, u, "orbital", {"n": s["n"], "l": s["l"]}))
                for s, u in zip(data["shells"], orbitals)
            )
            e = data["energies"]
            return cls(data["Z"], data["N"], shells, RadialFunction(grid, data["rho"], "density"),
                       e["total"], e["kinetic"], e["nuclear"], e["direct"], e["exchange"],
                       data["scf_residual"], data.get("metadata", {}))
        except KeyError as exc:
            raise InvalidInputError(f"HF state file is missing {exc}") from None

    def orbitals_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {self.grid.header()} meaning=orbital\n")
        buf.write("r," + ",".join(s.label for s in self.shells) + "\n")
        cols = np.column_stack([self.grid.points] + [s.u.values for s in self.shells])
        for row in cols:
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


# -- discrete operators -----------------------------------------------------

@njit(cache=True)
def _screening(F, r, h, k, corr):
    """``int r_<^k / r_>^{k+1} f(r') dr'`` at every node, for each column of F.

    Trapezoid in log r with Gregory corrections on both sides of the kink.
    """
    n, p = F.shape
    out = np.empty((n, p))
    down = math.exp(-(k + 1) * h)
    up = math.exp(-k * h)
    nc = corr.size
    left = np.empty(nc)
    right = np.empty(nc)
    for m in range(nc):
        left[m] = corr[m] * math.exp(-m * k * h)
        right[m] = corr[m] * math.exp(-m * (k + 1) * h)
    gr = np.empty(n)
    for j in range(p):
        for i in range(n):
            gr[i] = h * F[i, j]              # g / r with g = h r f
        acc = 0.0
        for i in range(n):
            acc = acc * down + gr[i]
            out[i, j] = acc
        acc = 0.0
        for i in range(n - 2, -1, -1):
            acc = up * (acc + gr[i + 1])
            out[i, j] += acc
        for i in range(n):
            s = 2.0 * corr[0] * gr[i] * r[i]
            for m in range(1, nc):
                if i - m >= 0:
                    s += left[m] * gr[i - m] * r[i - m]
                if i + m < n:
                    s += right[m] * gr[i + m] * r[i + m]
            out[i, j] += s / r[i]
    return out


class _Disc:
    """Grid-level operators in the variable ``w = u / sqrt(r)``."""

    def __init__(self, grid: RadialGrid):
        self.grid = grid
        self.r = np.asarray(grid.points)
        self.h = grid.h
        self.sqrt_r = np.sqrt(self.r)
        self.b = self.h * self.r**2           # metric: int u v dr = sum b w_u w_v

    def yk(self, f, k):
        f = np.asarray(f, dtype=float)
        if f.ndim == 1:
            return _screening(f[:, None], self.r, self.h, int(k), _GW)[:, 0]
        return _screening(np.ascontiguousarray(f), self.r, self.h, int(k), _GW)

    def dot(self, f, g):
        """``int f g dr`` for functions given as u-values (trapezoid in log r)."""
        return float(self.h * np.dot(self.r * f, g))

    def kinetic_apply(self, w, l):
        # 1/2 h (-w_xx + (l+1/2)^2 w)
        if w.ndim == 1:
            d2 = np.convolve(w, _D2, mode="same")
        else:
            d2 = np.apply_along_axis(np.convolve, 0, w, _D2, mode="same")
        return 0.5 * self.h * (-d2 / self.h**2 + (l + 0.5) ** 2 * w)

    def kinetic_energy(self, w, l):
        return float(np.dot(w, self.kinetic_apply(w, l)))

    def banded(self, l, U, theta):
        """Banded ``kinetic + h r^2 U - theta * metric`` for solve_banded with (3, 3)."""
        n = self.r.size
        ab = np.zeros((7, n))
        for m in range(1, 4):
            c = -0.5 * _D2[3 + m] / self.h
            ab[3 - m, m:] = c
            ab[3 + m, : n - m] = c
        ab[3] = -0.5 * _D2[3] / self.h + 0.5 * self.h * (l + 0.5) ** 2 + self.b * (U - theta)
        return ab


@dataclass
class _Orb:
    n: int
    l: int
    occ: float
    w: np.ndarray
    eps: float = 0.0

    @property
    def closed(self):
        return self.occ == 2 * (2 * self.l + 1)


class _Operator:
    """Mean-field operator: Hartree potential, exchange sources and open-shell corrections.

    Exchange is linear in the channel density matrices, so an under-relaxed
    operator is stored as compressed natural orbitals per channel instead of
    a growing list of past orbital sets.
    """

    def __init__(self, disc: _Disc, v_h, sources, deltas, k_max):
        self.disc = disc
        self.v_h = v_h
        self.sources = sources   # l -> (W columns, weights)
        self.deltas = deltas     # shell index -> local correction
        self.k_max = k_max

    @classmethod
    def from_orbitals(cls, disc: _Disc, orbs, k_max):
        u = [disc.sqrt_r * o.w for o in orbs]
        y0 = [disc.yk(x * x, 0) for x in u]
        v_h = sum(o.occ * y for o, y in zip(orbs, y0)) if orbs else np.zeros_like(disc.r)
        sources = {}
        for l in sorted({o.l for o in orbs}):
            idx = [i for i, o in enumerate(orbs) if o.l == l]
            sources[l] = (np.column_stack([orbs[i].w for i in idx]),
                          np.array([orbs[i].occ for i in idx]))
        deltas = {}
        for i, o in enumerate(orbs):
            if o.closed:
                continue
            l, q = o.l, o.occ
            f = (2 * l + 1) / (4 * l + 1)
            dv = -y0[i]
            for k in _ks(l, l, k_max):
                yk = y0[i] if k == 0 else disc.yk(u[i] * u[i], k)
                c = three_j_squared(l, k, l)
                dv = dv + 0.5 * q * c * yk
                if k > 0:
                    dv = dv - (q - 1) * f * c * yk
            deltas[i] = dv
        return cls(disc, v_h, sources, deltas, k_max)

    def mixed(self, new: "_Operator", alpha: float) -> "_Operator":
        """``alpha * new + (1 - alpha) * self``."""
        disc = self.disc
        v_h = alpha * new.v_h + (1 - alpha) * self.v_h
        deltas = {i: alpha * dv + (1 - alpha) * self.deltas.get(i, 0.0) for i, dv in new.deltas.items()}
        sources = {}
        for l in set(new.sources) | set(self.sources):
            cols, wts = [], []
            for op, wt in ((new, alpha), (self, 1 - alpha)):
                if l in op.sources:
                    cols.append(op.sources[l][0])
                    wts.append(wt * op.sources[l][1])
            S, q = np.column_stack(cols), np.concatenate(wts)
            X = _b_orthonormal(S, disc.b, drop=1e-14)
            C = X.T @ (disc.b[:, None] * S)
            M = (C * q) @ C.T
            vals, vecs = eigh(0.5 * (M + M.T))
            keep = np.abs(vals) > 1e-13 * np.abs(vals).max()
            sources[l] = (X @ vecs[:, keep], vals[keep])
        return _Operator(disc, v_h, sources, deltas, self.k_max)

    def local(self, Z):
        return -Z / self.disc.r + self.v_h

    def exchange_apply(self, W, l):
        """Metric-weighted ``K u`` for vectors W (columns, w-variables) in channel l."""
        disc = self.disc
        single = W.ndim == 1
        W2 = W[:, None] if single else W
        U = disc.sqrt_r[:, None] * W2
        p = U.shape[1]
        out = np.zeros_like(W2)
        for lb, (Wb, q) in self.sources.items():
            Ub = disc.sqrt_r[:, None] * Wb
            # all (source, vector) products in one batch: column s * p + j
            prod = (Ub[:, :, None] * U[:, None, :]).reshape(len(U), -1)
            for k in _ks(l, lb, self.k_max):
                c = 0.5 * three_j_squared(l, k, lb)
                if c == 0.0:
                    continue
                Y = disc.yk(prod, k).reshape(len(U), len(q), p)
                out += c * np.einsum("is,isj->ij", Ub * q, Y)
        out *= (disc.h * disc.r**1.5)[:, None]
        return out[:, 0] if single else out

    def open_delta(self, idx):
        """Local correction F_a - F_c (in potential units) for shell ``idx``."""
        return self.deltas[idx]


def _ks(la, lb, k_max):
    hi = la + lb if k_max is None else min(la + lb, k_max)
    return range(abs(la - lb), hi + 1, 2)


# -- energy -----------------------------------------------------------------

def _energy_terms(disc: _Disc, Z, orbs, k_max=None):
    """(kinetic, nuclear, direct, exchange) of the configuration-averaged energy."""
    if not orbs:
        return 0.0, 0.0, 0.0, 0.0
    u = [disc.sqrt_r * o.w for o in orbs]
    kin = sum(o.occ * disc.kinetic_energy(o.w, o.l) for o in orbs)
    nuc = sum(-Z * o.occ * disc.dot(ui * ui, 1.0 / disc.r) for o, ui in zip(orbs, u))
    y0 = [disc.yk(ui * ui, 0) for ui in u]
    F0 = np.array([[disc.dot(u[a] * u[a], y0[b]) for b in range(len(orbs))] for a in range(len(orbs))])
    q = np.array([o.occ for o in orbs])
    direct = 0.5 * float(q @ F0 @ q)
    ee = 0.0
    for a, oa in enumerate(orbs):
        la = oa.l
        hi = 2 * la if k_max is None else min(2 * la, k_max)
        s = F0[a, a]
        for k in range(2, hi + 1, 2):
            s -= (2 * la + 1) / (4 * la + 1) * three_j_squared(la, k, la) * disc.dot(u[a] * u[a], disc.yk(u[a] * u[a], k))
        ee += 0.5 * oa.occ * (oa.occ - 1) * s
        for b in range(a + 1, len(orbs)):
            ob = orbs[b]
            pair = u[a] * u[b]
            hi = la + ob.l if k_max is None else min(la + ob.l, k_max)
            g = sum(three_j_squared(la, k, ob.l) * disc.dot(pair, disc.yk(pair, k))
                    for k in range(abs(la - ob.l), hi + 1, 2))
            ee += oa.occ * ob.occ * (F0[a, b] - 0.5 * g)
    return kin, nuc, direct, direct - ee


# -- SCF --------------------------------------------------------------------

def _initial_orbitals(Z, config, grid):
    """Eigenfunctions of the TF potential with the Latter tail (Z - N + 1)/r."""
    N = sum(occ for _, _, occ in config)
    tf = solve_tf(Z, max(N, 1e-3), grid=grid)
    tail = max(Z - N + 1, 1.0) / grid.points
    V = tf.phi.with_values(np.maximum(tf.phi.values, tail))
    orbs = []
    for l in sorted({l for _, l, _ in config}):
        shells = [(n, occ) for n, ll, occ in config if ll == l]
        sp = solve_channel(V, l, len(shells), eps_max=1e4)
        if len(sp) < len(shells):
            raise SolverFailure(f"initial guess found only {len(sp)} {SPD[l]} states",
                                {"l": l, "wanted": len(shells)})
        for (n, occ), uf, e in zip(shells, sp.orbitals, sp.eigenvalues):
            orbs.append(_Orb(n, l, occ, uf.values / np.sqrt(grid.points), float(e)))
    return orbs


def _b_orthonormal(S, b, drop=1e-10):
    G = S.T @ (b[:, None] * S)
    G = 0.5 * (G + G.T)
    vals, vecs = eigh(G)
    keep = vals > drop * vals[-1]
    return S @ (vecs[:, keep] / np.sqrt(vals[keep]))


def _channel_step(disc, Z, op, l, orbs, idx, prev_w, shift):
    """One subspace update of the orbitals ``idx`` (all in channel l)."""
    b = disc.b
    Wocc = np.column_stack([orbs[i].w for i in idx])
    closed = [j for j, i in enumerate(idx) if orbs[i].closed]
    opened = [j for j, i in enumerate(idx) if not orbs[i].closed]
    if len(opened) > 1:
        raise DomainError(f"more than one open {SPD[l]} shell is not supported")
    # the open shell must be the outermost of its channel (true for Madelung filling)
    if opened and opened[0] != len(idx) - 1:
        raise DomainError("open shell below a closed shell of the same l")

    local = op.local(Z)
    dv = op.open_delta(idx[opened[0]]) if opened else None

    def apply_c(W, KW=None):
        KW = op.exchange_apply(W, l) if KW is None else KW
        return disc.kinetic_apply(W, l) + (b * local)[:, None] * W - KW

    kw = op.exchange_apply(Wocc, l)
    AW = apply_c(Wocc, kw)
    if opened:
        j = opened[0]
        AW[:, j] += b * dv * Wocc[:, j]
    # residuals with all occupied components of the channel projected out
    BW = b[:, None] * Wocc
    R = AW - BW @ (Wocc.T @ AW)
    theta = np.einsum("ij,ij->j", Wocc, AW)

    # Slater-averaged local exchange for the preconditioner
    qv = np.array([orbs[i].occ for i in idx])
    num = (Wocc * kw) @ qv
    den = (b[:, None] * Wocc**2) @ qv
    xloc = -num / (den + 1e-12 * den.max())   # exchange lowers the energy

    T = []
    for j in range(len(idx)):
        U = local + xloc + (dv if j in opened else 0.0)
        ab = disc.banded(l, U, theta[j])
        try:
            mr = solve_banded((3, 3), ab, R[:, j])
            mb = solve_banded((3, 3), ab, BW[:, j])
        except (np.linalg.LinAlgError, ValueError):
            continue
        alpha = np.dot(BW[:, j], mr) / np.dot(BW[:, j], mb)
        t = mr - alpha * mb
        if np.all(np.isfinite(t)):
            T.append(t)
    blocks = [Wocc] + ([np.column_stack(T)] if T else [])
    if prev_w is not None:
        blocks.append(Wocc - prev_w)
    X = _b_orthonormal(np.column_stack(blocks), b)

    AX = apply_c(X)
    Fc = X.T @ AX
    Fc = 0.5 * (Fc + Fc.T)
    C0 = X.T @ (b[:, None] * Wocc)
    # orthonormal basis of the subspace starting with the current orbitals
    Q, _ = np.linalg.qr(np.column_stack([C0, np.eye(X.shape[1])]))
    Q = Q[:, : X.shape[1]]
    Q[:, : len(idx)] *= np.sign(np.sum(Q[:, : len(idx)] * C0, axis=0))
    m = len(idx)
    if not opened:
        Fm = Q.T @ Fc @ Q
        Fm[m:, m:] += shift * np.eye(Fm.shape[0] - m)
        vals, vecs = eigh(Fm)
        Q = Q @ vecs
        eps = vals[:m]
    else:
        Fa = Fc + X.T @ ((b * dv)[:, None] * X)
        Fa = 0.5 * (Fa + Fa.T)
        qc = 2 * (2 * l + 1)
        qa = orbs[idx[opened[0]]].occ
        G = (qc * Fc - qa * Fa) / (qc - qa)
        a = m - 1
        for _ in range(100):
            Fcm, Fam, Gm = (Q.T @ M @ Q for M in (Fc, Fa, G))
            Rm = Fcm.copy()
            Rm[a, :] = Fam[a, :]
            Rm[:, a] = Fam[:, a]
            Rm[:a, a] = Gm[:a, a]
            Rm[a, :a] = Gm[a, :a]
            Rm[m:, m:] += shift * np.eye(Rm.shape[0] - m)
            vals, vecs = eigh(0.5 * (Rm + Rm.T))
            Qn = Q @ vecs
            change = np.linalg.norm(Qn[:, :m] @ Qn[:, :m].T - Q[:, :m] @ Q[:, :m].T)
            Q = Qn
            if change < 1e-13:
                break
        Fcm, Fam = Q.T @ Fc @ Q, Q.T @ Fa @ Q
        eps = np.array([Fcm[j, j] for j in range(a)] + [Fam[a, a]])
    Wnew = X @ Q[:, :m]
    # keep the sign convention of the previous iterate
    sgn = np.sign(np.einsum("ij,ij->j", Wnew, BW))
    sgn[sgn == 0] = 1
    Wnew = Wnew * sgn
    return Wnew, eps, float(np.max(np.linalg.norm(R, axis=0) / np.sqrt(b.sum())))


def _density(disc, orbs):
    r = disc.r
    if not orbs:
        return np.zeros_like(r)
    return sum(o.occ * (disc.sqrt_r * o.w) ** 2 for o in orbs) / (4 * math.pi * r * r)


def scf_solve(Z: float, N: int, settings: SCFSettings = SCFSettings(),
              config: Sequence | None = None, grid: RadialGrid | None = None) -> HFState:
    """Self-consistent restricted HF state with ``N`` electrons around charge ``Z``."""
    if not (Z > 0 and math.isfinite(Z)):
        raise DomainError(f"Z must be positive, got {Z}")
    config = list(aufbau_configuration(N) if config is None else config)
    N = int(sum(occ for _, _, occ in config))
    grid = grid or settings.grid_for(Z, N)
    disc = _Disc(grid)
    if N == 0:
        rho = RadialFunction(grid, np.zeros(grid.n), "density")
        return HFState(Z, 0, (), rho, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                       {"flags": (), "sweeps": 0, "settings": settings_hash(settings)})
    if N > 2 * Z + 1:
        log.warning("N = %d exceeds 2Z + 1 = %g; no bound state is expected", N, 2 * Z + 1)
    orbs = _initial_orbitals(Z, config, grid)
    channels = {}
    for i, o in enumerate(orbs):
        channels.setdefault(o.l, []).append(i)
    for l, idx in channels.items():
        W = _b_orthonormal(np.column_stack([orbs[i].w for i in idx]), disc.b)
        for j, i in enumerate(idx):
            orbs[i].w = W[:, j] * np.sign(np.dot(W[:, j], disc.b * orbs[i].w))

    op = _Operator.from_orbitals(disc, orbs, settings.k_max)
    history, energies = [], []
    prev = {l: None for l in channels}
    shift, rises, residual, eres = 0.0, 0, math.inf, math.inf
    for sweep in range(1, settings.max_sweeps + 1):
        new = [_Orb(o.n, o.l, o.occ, o.w.copy(), o.eps) for o in orbs]
        eres = 0.0
        for l, idx in channels.items():
            W, eps, res = _channel_step(disc, Z, op, l, orbs, idx, prev[l], shift)
            eres = max(eres, res)
            prev[l] = np.column_stack([orbs[i].w for i in idx])
            for j, i in enumerate(idx):
                new[i].w = W[:, j]
                new[i].eps = float(eps[j])
        residual = max(
            math.sqrt(disc.dot(disc.sqrt_r**2 * (a.w - o.w) ** 2, np.ones_like(disc.r)))
            for a, o in zip(new, orbs)
        )
        orbs = new
        kin, nuc, direct, exch = _energy_terms(disc, Z, orbs, settings.k_max)
        energy = kin + nuc + direct - exch
        energies.append(energy)
        history.append(residual)
        if len(energies) > 1 and energies[-1] > energies[-2] + 1e-12 * abs(energies[-2]):
            rises += 1
        else:
            rises = 0
        if rises >= 3 and shift == 0.0:
            shift = settings.level_shift
            log.info("energy rose for 3 sweeps, level shift %.2f switched on", shift)
        log.debug("sweep %d: E = %.12f residual = %.3e", sweep, energy, residual)
        if residual < settings.tol:
            break
        op = op.mixed(_Operator.from_orbitals(disc, orbs, settings.k_max), settings.mixing)
    else:
        raise SolverFailure(
            f"SCF did not converge in {settings.max_sweeps} sweeps (residual {residual:.3e})",
            {"residual_history": history, "energy_history": energies, "Z": Z, "N": N},
        )
    return _finish(Z, N, disc, orbs, settings, residual, history, energies, eres)


def _finish(Z, N, disc, orbs, settings, residual, history, energies, eres):
    kin, nuc, direct, exch = _energy_terms(disc, Z, orbs, settings.k_max)
    grid = disc.grid
    shells = []
    for o in sorted(orbs, key=lambda o: (o.n, o.l)):
        u = disc.sqrt_r * o.w
        shells.append(Shell(o.n, o.l, o.occ, o.eps,
                            RadialFunction(grid, u, "orbital", {"n": o.n, "l": o.l})))
    flags = []
    homo = max(o.eps for o in orbs)
    if homo >= -BOX_FACTOR / grid.r_max**2:
        flags.append("unbound electron")
    bad_nodes = [shell_label(s.n, s.l) for s in shells if _nodes(s.u.values) != s.n - s.l - 1]
    if bad_nodes:
        flags.append("node count " + ",".join(bad_nodes))
    rho = RadialFunction(grid, _density(disc, orbs), "density")
    meta = {
        "flags": tuple(flags),
        "sweeps": len(history),
        "history": tuple(history),
        "energy_history": tuple(energies),
        "fock_residual": eres,
        "settings": settings_hash(settings),
        "model": "restricted HF, configuration average",
    }
    return HFState(Z, N, tuple(shells), rho, kin + nuc + direct - exch, kin, nuc, direct, exch,
                   residual, meta)


def _nodes(u):
    # exchange is nonlocal, so tails far below the peak may change sign harmlessly
    big = u[np.abs(u) > 1e-4 * np.max(np.abs(u))]
    return int(np.count_nonzero(np.diff(np.sign(big)) != 0))


# -- derived quantities -----------------------------------------------------

def _orbs_from_state(state: HFState):
    r = state.grid.points
    return [_Orb(s.n, s.l, s.occ, s.u.values / np.sqrt(r), s.epsilon) for s in state.shells]


def hf_energy_breakdown(state: HFState, k_max: int | None = None):
    """Kinetic, nuclear, direct and exchange energies recomputed from the orbitals."""
    if not state.shells:
        return {"total": 0.0, "kinetic": 0.0, "nuclear": 0.0, "direct": 0.0, "exchange": 0.0}
    if any(s.u is None for s in state.shells):
        raise InvalidInputError("state carries no orbitals")
    kin, nuc, direct, exch = _energy_terms(_Disc(state.grid), state.Z, _orbs_from_state(state), k_max)
    return {"total": kin + nuc + direct - exch, "kinetic": kin, "nuclear": nuc,
            "direct": direct, "exchange": exch}


def hf_mean_field(state: HFState) -> RadialFunction:
    """``Z/r - rho * |x|^{-1}``."""
    r = state.grid.points
    phi = state.Z / r - newton_potential(state.rho).values
    return state.rho.with_values(phi, meaning="potential", Z=state.Z, N=state.N)


def hf_radius(state: HFState, nu: float) -> float:
    """Radius outside which ``nu`` electrons of the HF density remain."""
    return radius_of_charge(state.rho, nu)


def koopmans_check(state: HFState, ionization: float):
    """Compare ``-homo`` with an ionization energy; reported only, never asserted."""
    homo = state.homo.epsilon
    same_sign = (-homo > 0) == (ionization > 0)
    ratio = -homo / ionization if ionization else math.nan
    return {"homo": homo, "ionization": ionization, "same_sign": bool(same_sign),
            "ratio": ratio, "same_order": bool(same_sign and 0.1 <= ratio <= 10.0)}


def ionization_energy(Z: int, settings: SCFSettings = SCFSettings()) -> float:
    """``E(Z - 1, Z) - E(Z, Z)``."""
    if int(Z) != Z or Z < 2:
        raise DomainError(f"ionization energy needs an integer Z >= 2, got {Z}")
    Z = int(Z)
    return scf_solve(Z, Z - 1, settings).energy_total - scf_solve(Z, Z, settings).energy_total


def max_bound_electrons(Z: int, settings: SCFSettings = SCFSettings()) -> int:
    """Largest N (from Z upward, at most 2Z + 1) whose SCF converges with a bound HOMO."""
    if int(Z) != Z or Z < 1:
        raise DomainError(f"Z must be a positive integer, got {Z}")
    Z = int(Z)
    best = 0
    for N in range(Z, 2 * Z + 2):
        try:
            st = scf_solve(Z, N, settings)
        except (SolverFailure, DomainError):
            break
        if st.unbound:
            break
        best = N
    if best == 0:
        # the neutral atom itself failed; count down
        for N in range(Z - 1, 0, -1):
            try:
                if not scf_solve(Z, N, settings).unbound:
                    return N
            except (SolverFailure, DomainError):
                continue
    return best


# -- invariants ---------------------------------------------------------------

def hf_lower_bound(Z, N) -> float:
    """``-3 (4 pi L1)^{2/3} Z^2 N^{1/3}``."""
    return -3.0 * (4 * math.pi * L1_LT) ** (2 / 3) * Z * Z * N ** (1 / 3)


def state_invariants(state: HFState):
    """Sides of the per-state inequalities: {name: (lhs, rhs, holds)}."""

    rho = state.rho
    r43 = integrate3d(rho.with_values(rho.values ** (4 / 3), meaning="generic"))
    r53 = integrate3d(rho.with_values(rho.values ** (5 / 3), meaning="generic"))
    out = {
        "exchange_bound": (state.energy_exchange, EXCHANGE_CONSTANT * r43),
        "kinetic_lieb_thirring": (K1_KINETIC * r53, state.energy_kinetic),
        "energy_lower_bound": (hf_lower_bound(state.Z, state.N), state.energy_total),
        "direct_exceeds_exchange": (state.energy_exchange, state.energy_direct),
    }
    return {k: (float(a), float(b), bool(a <= b)) for k, (a, b) in out.items()}


def virial_ratio(state: HFState) -> float:
    """``|2 T + V| / |E|``; zero for an exact stationary point of a Coulomb system."""
    pot = state.energy_nuclear + state.energy_direct - state.energy_exchange
    return abs(2 * state.energy_kinetic + pot) / abs(state.energy_total)


__all__ = [
    "SCFSettings", "Shell", "HFState", "aufbau_configuration", "scf_solve",
    "hf_energy_breakdown", "hf_mean_field", "ionization_energy", "max_bound_electrons",
    "state_invariants", "virial_ratio", "hf_lower_bound", "three_j_squared", "hf_radius",
    "koopmans_check",
]
