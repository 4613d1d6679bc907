"""Dyadic decompositions and Besov-type space-time norms.

The smooth cutoff chi equals 1 on [-1, 1], vanishes outside (-2, 2) and
is built from the standard mollifier plateau

    chi(t) = rho(2 - |t|),   rho(r) = g(r) / (g(r) + g(1 - r)),
    g(r) = exp(-1/r) for r > 0 and 0 otherwise.

The annulus bump phi(t) = chi(t) - chi(2t) is supported on
1/2 <= |t| <= 2 and the scaled family phi(t/N) over dyadic N telescopes
to 1 at every t != 0.

On a finite grid the dyadic ladders are truncated.  Radial shells use
plain annuli (the origin mode is the only point they miss).  The
|xi+eta| ladder and the modulation ladder carry a capped bottom shell,
a low-pass chi at the smallest retained dyad, so that the family still
sums to exactly 1 on every grid point; the cap absorbs the antidiagonal
(where xi+eta vanishes identically) and the sub-resolution modulations.
Modulation is always measured against the wrapped difference
tau - xi^3 - eta^3 reduced to the principal window of the discrete tau
lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import GridSpec, SpaceTimeField, SpectralField

FAMILIES = ("Hs", "Hs0_anisotropic", "Hts_antidiagonal", "Xsb1", "Xtsb1")


# ---------------------------------------------------------------------------
# bump functions
# ---------------------------------------------------------------------------

def _g(r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r, dtype=np.float64)
    pos = r > 0
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        out[pos] = np.exp(-1.0 / r[pos])
    return out


def chi(t) -> np.ndarray:
    """Smooth even plateau: 1 on |t|<=1, 0 outside |t|<2."""
    t = np.asarray(t, dtype=np.float64)
    r = 2.0 - np.abs(t)
    num = _g(r)
    den = num + _g(1.0 - r)
    with np.errstate(invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return out


def phi(t) -> np.ndarray:
    """Annulus bump chi(t) - chi(2t), supported on 1/2 <= |t| <= 2."""
    t = np.asarray(t, dtype=np.float64)
    return chi(t) - chi(2.0 * t)


def phi_scaled(t, n_value: float) -> np.ndarray:
    return phi(np.asarray(t, dtype=np.float64) / n_value)


@dataclass(frozen=True)
class BumpProfile:
    """Named handle on the cutoff family (chi, phi, phi_N)."""

    def chi(self, t):
        return chi(t)

    def phi(self, t):
        return phi(t)

    def phi_n(self, t, n_value: float):
        return phi_scaled(t, n_value)


def bracket(x) -> np.ndarray:
    """Japanese bracket <x> = (1 + x^2)^(1/2)."""
    x = np.asarray(x, dtype=np.float64)
    return np.sqrt(1.0 + x * x)


def is_dyadic(v: float) -> bool:
    if v <= 0:
        return False
    e = math.log2(v)
    return abs(e - round(e)) < 1e-9


# ---------------------------------------------------------------------------
# shell bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicShell:
    """Index triple (N, M, L) addressing one frequency/modulation block."""

    N: float
    M: float
    L: float

    def __post_init__(self):
        for name, v in (("N", self.N), ("M", self.M), ("L", self.L)):
            if not is_dyadic(v):
                raise ValueError(f"{name} = {v} is not a power of two")
        if self.M > 4.0 * self.N:
            raise ValueError(
                f"inadmissible shell: M = {self.M} exceeds 4N = {4 * self.N} "
                "(|xi+eta| is controlled by |(xi,eta)|)"
            )


@dataclass(frozen=True)
class NormSpec:
    """Which norm to evaluate: family name, regularity s, exponent b."""

    family: str
    s: float
    b: float = 0.5

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown norm family {self.family!r}; choose from {FAMILIES}")


@dataclass(frozen=True)
class DyadicFamily:
    """Finite dyadic ladder; the bottom entry may be a chi low-pass cap."""

    values: tuple
    capped: bool

    def multiplier(self, i: int, t: np.ndarray) -> np.ndarray:
        v = self.values[i]
        if self.capped and i == 0:
            return chi(np.asarray(t) / v)
        return phi_scaled(t, v)

    def assignment(self, t: np.ndarray):
        """Per-point shell weights.

        Returns (idx, w) of shape t.shape + (3,): up to three active
        shells per point (adjacent dyads overlap), idx = -1 on unused
        slots.  The weights are the raw bump values, so they sum to 1
        wherever the ladder covers t.
        """
        t = np.asarray(t, dtype=np.float64)
        a = np.abs(t)
        vals = np.asarray(self.values)
        pos = np.searchsorted(vals, a)
        idx = np.stack([pos - 1, pos, pos + 1], axis=-1)
        np.clip(idx, 0, len(vals) - 1, out=idx)
        # De-duplicate slots produced by clipping.
        dup = np.zeros_like(idx, dtype=bool)
        dup[..., 1] = idx[..., 1] == idx[..., 0]
        dup[..., 2] = (idx[..., 2] == idx[..., 1]) | (idx[..., 2] == idx[..., 0])
        w = np.empty(idx.shape, dtype=np.float64)
        for slot in range(3):
            v = vals[idx[..., slot]]
            if self.capped:
                low = idx[..., slot] == 0
                w[..., slot] = np.where(low, chi(t / v), phi(t / v))
            else:
                w[..., slot] = phi(t / v)
        w[dup] = 0.0
        idx = np.where(w > 0.0, idx, -1)
        w[idx < 0] = 0.0
        return idx.astype(np.int32), w


def _dyadic_range(lo: float, hi: float):
    e0 = math.floor(math.log2(lo))
    e1 = math.ceil(math.log2(hi))
    return tuple(2.0 ** e for e in range(e0, e1 + 1))


def radial_family(grid: GridSpec) -> DyadicFamily:
    mag = np.hypot(grid.xi_mesh, grid.eta_mesh)
    nonzero = mag[mag > 0]
    return DyadicFamily(_dyadic_range(nonzero.min(), nonzero.max()), capped=False)


def sum_family(grid: GridSpec) -> DyadicFamily:
    sigma = np.abs(grid.xi_mesh + grid.eta_mesh)
    nonzero = sigma[sigma > 0]
    # Cap sits one dyad below the smallest nonzero |xi+eta|, so the chi
    # bucket holds exactly the antidiagonal modes.
    e0 = math.floor(math.log2(nonzero.min())) - 1
    e1 = math.ceil(math.log2(nonzero.max()))
    return DyadicFamily(tuple(2.0 ** e for e in range(e0, e1 + 1)), capped=True)


def modulation_family(window: float, nt: int) -> DyadicFamily:
    """Ladder for the wrapped modulation of an nt-sample window."""
    dtau = 2.0 * np.pi / window
    low = 2.0 ** math.ceil(math.log2(4.0 * dtau))   # smallest resolvable annulus
    bottom = low / 2.0                               # chi cap below it
    period = nt * dtau
    top = 2.0 ** math.ceil(math.log2(period / 2.0))
    e0 = int(round(math.log2(bottom)))
    e1 = math.ceil(math.log2(top))
    return DyadicFamily(tuple(2.0 ** e for e in range(e0, e1 + 1)), capped=True)


def wrap_modulation(tau, omega, period: float) -> np.ndarray:
    """tau - omega reduced to the principal window [-period/2, period/2)."""
    return np.mod(tau - omega + 0.5 * period, period) - 0.5 * period


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------

def project_PN(f: SpectralField, n_value: float) -> SpectralField:
    """Smooth restriction to the shell |(xi, eta)| ~ N."""
    mag = np.hypot(f.grid.xi_mesh, f.grid.eta_mesh)
    return SpectralField(f.grid, f.coeffs * phi_scaled(mag, n_value))


def project_PNM(f: SpectralField, n_value: float, m_value: float) -> SpectralField:
    """Restriction to |(xi,eta)| ~ N and |xi+eta| ~ M.

    For M at (or below) the grid's bottom dyad the second factor is the
    chi low-pass that carries the antidiagonal modes.
    """
    g = f.grid
    mag = np.hypot(g.xi_mesh, g.eta_mesh)
    sigma = g.xi_mesh + g.eta_mesh
    fam = sum_family(g)
    if m_value <= fam.values[0]:
        m_part = chi(sigma / m_value)
    else:
        m_part = phi_scaled(sigma, m_value)
    return SpectralField(g, f.coeffs * phi_scaled(mag, n_value) * m_part)


def project_QL(F: SpaceTimeField, l_value: float) -> SpaceTimeField:
    """Restriction to wrapped modulation |tau - xi^3 - eta^3| ~ L.

    Raises when the window cannot resolve an annulus at L (tau spacing
    exceeding L/4); the distinguished bottom dyad of the window is
    allowed and acts as the infrared low-pass bucket.
    """
    window = F.t1 - F.t0
    fam = modulation_family(window, F.nt)
    bottom = fam.values[0]
    dtau = 2.0 * np.pi / window
    if l_value > bottom and dtau > l_value / 4.0:
        raise ValueError(
            f"window too short to resolve modulation L = {l_value} "
            f"(tau spacing {dtau:.3g} > L/4)"
        )
    if l_value < bottom:
        raise ValueError(
            f"modulation L = {l_value} below the window's bottom dyad {bottom}"
        )
    from .propagators import dispersion_symbol

    g = F.grid
    omega = dispersion_symbol(g.xi_mesh, g.eta_mesh)
    period = F.nt * dtau
    theta = wrap_modulation(F.tau[:, None, None], omega[None, :, :], period)
    if l_value == bottom:
        mult = chi(theta / l_value)
    else:
        mult = phi_scaled(theta, l_value)
    stack = F.tau_coeffs * mult
    frames_stack = np.fft.ifft(stack / F.dt, axis=0)
    from .grid import spacetime_from_coeffs

    return spacetime_from_coeffs(g, F.t0, F.t1, frames_stack)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def _weighted_l2(f: SpectralField, weight: np.ndarray) -> float:
    total = np.sum((weight ** 2) * np.abs(f.coeffs) ** 2)
    return float(np.sqrt(total / f.grid.box_area))


def hs_norm(f: SpectralField, s: float) -> float:
    mag = np.hypot(f.grid.xi_mesh, f.grid.eta_mesh)
    return _weighted_l2(f, bracket(mag) ** s)


def hs0_norm(f: SpectralField, s: float) -> float:
    return _weighted_l2(f, bracket(f.grid.xi_mesh) ** s)


def hts_norm(f: SpectralField, s: float) -> float:
    return _weighted_l2(f, bracket(f.grid.xi_mesh + f.grid.eta_mesh) ** s)


@lru_cache(maxsize=8)
def _shell_system(grid: GridSpec, t0: float, t1: float, nt: int):
    return _SpaceTimeShellSystem(grid, t0, t1, nt)


class _SpaceTimeShellSystem:
    """Cached (N, M, L) block decomposition for one grid and window."""

    def __init__(self, grid: GridSpec, t0: float, t1: float, nt: int):
        from .propagators import dispersion_symbol

        self.grid = grid
        self.window = t1 - t0
        self.nt = nt
        self.n_family = radial_family(grid)
        self.m_family = sum_family(grid)
        self.l_family = modulation_family(self.window, nt)
        mag = np.hypot(grid.xi_mesh, grid.eta_mesh).ravel()
        sigma = (grid.xi_mesh + grid.eta_mesh).ravel()
        self.n_idx, self.n_w = self.n_family.assignment(mag)
        self.m_idx, self.m_w = self.m_family.assignment(sigma)
        self.omega = dispersion_symbol(grid.xi_mesh, grid.eta_mesh).ravel()
        self.tau = 2.0 * np.pi * np.fft.fftfreq(nt, d=1.0 / nt) / self.window
        self.period = nt * 2.0 * np.pi / self.window

    def block_table(self, F: SpaceTimeField) -> np.ndarray:
        """B[n, m, l] = ||P_{N,M} Q_L F||^2 over the shell enumeration."""
        n_shells = len(self.n_family.values)
        m_shells = len(self.m_family.values)
        l_shells = len(self.l_family.values)
        B = np.zeros((n_shells, m_shells, l_shells))
        npts = self.grid.nx * self.grid.ny
        norm_factor = 1.0 / (self.window * self.grid.box_area)
        tau_c = F.tau_coeffs.reshape(F.nt, npts)

        # Combine the two spatial ladders into joint (N, M) slots once.
        sp_ids, sp_ws = [], []
        for a in range(3):
            for b in range(3):
                wa = self.n_w[:, a] * self.m_w[:, b]
                ok = (self.n_idx[:, a] >= 0) & (self.m_idx[:, b] >= 0) & (wa > 0)
                if not ok.any():
                    continue
                ids = np.where(ok, self.n_idx[:, a] * m_shells + self.m_idx[:, b], 0)
                sp_ids.append((ok, ids))
                sp_ws.append(wa)

        flat = B.reshape(-1)
        for j in range(F.nt):
            theta = wrap_modulation(self.tau[j], self.omega, self.period)
            l_idx, l_w = self.l_family.assignment(theta)
            mass = np.abs(tau_c[j]) ** 2 * norm_factor
            for (ok, ids), wsp in zip(sp_ids, sp_ws):
                for c in range(3):
                    sel = ok & (l_idx[:, c] >= 0)
                    if not sel.any():
                        continue
                    keys = ids[sel] * l_shells + l_idx[sel, c]
                    wts = (wsp[sel] * l_w[sel, c]) ** 2 * mass[sel]
                    flat += np.bincount(keys, weights=wts, minlength=flat.size)
        return B

    def xnorm(self, F: SpaceTimeField, s: float, b: float, antidiagonal_s: bool) -> float:
        B = self.block_table(F)
        n_vals = np.asarray(self.n_family.values)
        m_vals = np.asarray(self.m_family.values)
        l_vals = np.asarray(self.l_family.values)
        lw = bracket(m_vals[:, None] ** 2 + l_vals[None, :]) ** b
        inner = np.sum(lw[None, :, :] * np.sqrt(B), axis=2)
        if antidiagonal_s:
            sw = bracket(m_vals)[None, :] ** s
        else:
            sw = bracket(n_vals)[:, None] ** s
        return float(np.sqrt(np.sum((sw * inner) ** 2)))

    def breakdown(self, F: SpaceTimeField):
        """Rows (N, M, L, block_l2) for every non-empty block."""
        B = self.block_table(F)
        rows = []
        for i, nv in enumerate(self.n_family.values):
            for j, mv in enumerate(self.m_family.values):
                for k, lv in enumerate(self.l_family.values):
                    if B[i, j, k] > 0:
                        rows.append((nv, mv, lv, float(np.sqrt(B[i, j, k]))))
        return rows


def xsb1_norm(F: SpaceTimeField, s: float, b: float = 0.5) -> float:
    sys = _shell_system(F.grid, F.t0, F.t1, F.nt)
    return sys.xnorm(F, s, b, antidiagonal_s=False)


def xtsb1_norm(F: SpaceTimeField, s: float, b: float = 0.5) -> float:
    sys = _shell_system(F.grid, F.t0, F.t1, F.nt)
    return sys.xnorm(F, s, b, antidiagonal_s=True)


def shell_breakdown(F: SpaceTimeField):
    sys = _shell_system(F.grid, F.t0, F.t1, F.nt)
    return sys.breakdown(F)


def norm(obj, spec: NormSpec) -> float:
    """Evaluate a NormSpec on a SpectralField or SpaceTimeField."""
    if spec.family in ("Xsb1", "Xtsb1"):
        if not isinstance(obj, SpaceTimeField):
            raise TypeError(f"{spec.family} requires a SpaceTimeField")
        fn = xsb1_norm if spec.family == "Xsb1" else xtsb1_norm
        return fn(obj, spec.s, spec.b)
    if not isinstance(obj, SpectralField):
        raise TypeError(f"{spec.family} requires a SpectralField")
    if spec.family == "Hs":
        return hs_norm(obj, spec.s)
    if spec.family == "Hs0_anisotropic":
        return hs0_norm(obj, spec.s)
    if spec.family == "Hts_antidiagonal":
        return hts_norm(obj, spec.s)
    raise ValueError(f"unsupported combination: {spec.family} on {type(obj).__name__}")
