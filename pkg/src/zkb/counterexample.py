"""Second-Picard-iterate growth for the slab-pair data.

The data is a pair of thin frequency slabs A, B centered at N*a and N*b
with long half-axis N^(-1/2) v and short half-axis N^(-2) (unit
perpendicular), amplitude N^(-s+5/4).  The centers and the long axis
are chosen so that the resonance transfer

    Phi = Omega(zeta1) + Omega(zeta2) - Omega(zeta1 + zeta2)
        = -3 (xi xi1 xi2 + eta eta1 eta2)

vanishes at the A x B center pair and is stationary along v, so Phi
stays of unit size across the interaction and the time integral
(e^{i t Phi} - 1)/(i Phi) adds up coherently.  The second iterate then
grows like N^{-s-1/4} in H^s, which is the quantity reproduced here.

Everything is evaluated by quadrature directly in frequency space over
the slab coordinates: the short width N^{-2} is far below any feasible
grid resolution, while the time integral has the closed form above, so
no time stepping is involved at all.  The A x A and B x B
self-interactions are kept (at reduced resolution) although they are
nonresonant, |Phi| ~ N^3, and suppressed accordingly.

The plane-Fourier normalisation ||f||^2 = (2 pi)^{-2} int |f_hat|^2 is
used throughout, matching the spectral-grid convention elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Slab geometry constants.
V_AXIS = np.array([3.0 * 9.0 ** (1.0 / 3.0), 100.0 ** (1.0 / 3.0)])
A_DIR = np.array([2.0 ** (1.0 / 3.0), 75.0 ** (1.0 / 3.0)])
B_DIR = np.array([-3.0 * 2.0 ** (1.0 / 3.0), -(75.0 ** (1.0 / 3.0)) / 5.0])
V_NORM = float(np.linalg.norm(V_AXIS))
W_AXIS = np.array([-V_AXIS[1], V_AXIS[0]]) / V_NORM   # unit perpendicular


@dataclass(frozen=True)
class CounterexampleParams:
    N: float
    s: float = 0.0
    T: float = 1.0
    quad: int = 64
    t_points: int = 64

    def __post_init__(self):
        if self.N < 16:
            raise ValueError("N must be at least 2^4 (slabs overlap below that)")
        if self.quad < 32:
            raise ValueError("quad must be at least 32")
        if self.T <= 0:
            raise ValueError("T must be positive")


@dataclass(frozen=True)
class SlabSpec:
    """One frequency slab: center +/- delta * long_axis +/- eps * short_axis."""

    center: np.ndarray
    long_axis: np.ndarray     # N^{-1/2} v
    short_axis: np.ndarray    # N^{-2} unit perp
    amplitude: float

    def area(self) -> float:
        # |2 long| x |2 short| parallelogram, axes orthogonal
        return 4.0 * float(np.linalg.norm(self.long_axis)
                           * np.linalg.norm(self.short_axis))

    def corners(self) -> np.ndarray:
        c, u, w = self.center, self.long_axis, self.short_axis
        return np.array([c + u + w, c + u - w, c - u - w, c - u + w])

    def points(self, deltas: np.ndarray, epsilons: np.ndarray) -> np.ndarray:
        return (self.center[None, :] + deltas[:, None] * self.long_axis[None, :]
                + epsilons[:, None] * self.short_axis[None, :])


@dataclass(frozen=True)
class SlabData:
    params: CounterexampleParams
    slab_a: SlabSpec
    slab_b: SlabSpec

    @property
    def amplitude(self) -> float:
        return self.slab_a.amplitude

    def hs_norm(self, s: float | None = None) -> float:
        """H^s norm of the data by midpoint quadrature over the slabs."""
        if s is None:
            s = self.params.s
        q = self.params.quad
        nodes = -1.0 + (np.arange(q) + 0.5) * (2.0 / q)
        total = 0.0
        for slab in (self.slab_a, self.slab_b):
            d, e = np.meshgrid(nodes, nodes, indexing="ij")
            pts = (slab.center[None, None, :]
                   + d[..., None] * slab.long_axis[None, None, :]
                   + e[..., None] * slab.short_axis[None, None, :])
            weight = (1.0 + pts[..., 0] ** 2 + pts[..., 1] ** 2) ** s
            jac = float(np.linalg.norm(slab.long_axis)
                        * np.linalg.norm(slab.short_axis))
            total += np.sum(weight) * jac * (2.0 / q) ** 2
        return math.sqrt(self.amplitude ** 2 * total / (2.0 * np.pi) ** 2)


def build_data(p: CounterexampleParams) -> SlabData:
    """Slab parameterisation of the data; errors out on overlapping slabs."""
    amp = p.N ** (-p.s + 1.25)
    long_axis = p.N ** -0.5 * V_AXIS
    short_axis = p.N ** -2.0 * W_AXIS
    a = SlabSpec(p.N * A_DIR, long_axis, short_axis, amp)
    b = SlabSpec(p.N * B_DIR, long_axis, short_axis, amp)
    sep = float(np.linalg.norm(a.center - b.center))
    radius = float(np.linalg.norm(long_axis) + np.linalg.norm(short_axis))
    if sep <= 2.0 * radius:
        raise ValueError(f"slabs overlap at N = {p.N}; increase N")
    return SlabData(p, a, b)


def _omega(zx, zy):
    return zx ** 3 + zy ** 3


def _region_profile(c1: np.ndarray, c2: np.ndarray, order_factor: float,
                    N: float, s_list, T: float, quad: int, t_points: int,
                    dissipative: bool) -> np.ndarray:
    """Accumulated |I(t)|^2 H^s mass from the c1 x c2 slab interaction.

    Returns an array of shape (len(s_list), t_points); the amplitude
    factor amp(s)^4 is applied by the caller.
    """
    alpha = N ** -0.5
    beta = N ** -2.0
    jac = alpha * V_NORM * beta          # d(zeta) per d(delta) d(eps)
    C = c1 + c2
    q = quad
    s_arr = np.asarray(s_list, dtype=np.float64)

    s_nodes = -2.0 + (np.arange(q) + 0.5) * (4.0 / q)
    e_nodes = s_nodes.copy()
    dS = 4.0 / q

    # epsilon_1 nodes depend on the output E coordinate
    e_lo = np.maximum(-1.0, e_nodes - 1.0)
    e_hi = np.minimum(1.0, e_nodes + 1.0)
    d_eps = (e_hi - e_lo) / q
    eps1 = e_lo[:, None] + (np.arange(q)[None, :] + 0.5) * d_eps[:, None]  # (E, eps)

    t_grid = (np.arange(t_points) + 1) * (T / t_points)
    dt_step = T / t_points
    out = np.zeros((len(s_arr), t_points))

    for si in range(q):
        S = s_nodes[si]
        lo = max(-1.0, S - 1.0)
        hi = min(1.0, S + 1.0)
        d_del = (hi - lo) / q
        del1 = lo + (np.arange(q) + 0.5) * d_del                     # (delta,)

        zeta_x = C[0] + alpha * S * V_AXIS[0] + beta * e_nodes * W_AXIS[0]   # (E,)
        zeta_y = C[1] + alpha * S * V_AXIS[1] + beta * e_nodes * W_AXIS[1]

        z1x = (c1[0] + alpha * del1[None, :, None] * V_AXIS[0]
               + beta * eps1[:, None, :] * W_AXIS[0])                # (E, delta, eps)
        z1y = (c1[1] + alpha * del1[None, :, None] * V_AXIS[1]
               + beta * eps1[:, None, :] * W_AXIS[1])
        z2x = zeta_x[:, None, None] - z1x
        z2y = zeta_y[:, None, None] - z1y
        phi_res = (_omega(z1x, z1y) + _omega(z2x, z2y)
                   - _omega(zeta_x, zeta_y)[:, None, None])

        sigma_out = zeta_x + zeta_y                                   # (E,)
        weight_out = ((1.0 + zeta_x ** 2 + zeta_y ** 2)[None, :] ** s_arr[:, None]
                      * (sigma_out ** 2)[None, :])                    # (s, E)

        if not dissipative:
            denom = 1j * phi_res
            tiny = np.abs(phi_res) < 1e-12
            denom_safe = np.where(tiny, 1.0, denom)
            einc = np.exp(1j * dt_step * phi_res)
            P = np.ones_like(einc)
            base = np.zeros_like(einc)  # holds e^{i t Phi} - 1 via P - 1
            for ti, t in enumerate(t_grid):
                P = P * einc
                g = (P - 1.0) / denom_safe
                if tiny.any():
                    g = np.where(tiny, t, g)
                G = g.sum(axis=(1, 2)) * (d_del * d_eps)              # (E,)
                out[:, ti] += weight_out @ (np.abs(G) ** 2 * d_eps) * dS
        else:
            d_out = sigma_out ** 2                                    # (E,)
            d1 = (z1x + z1y) ** 2
            d2 = (z2x + z2y) ** 2
            zcomb = (d_out[:, None, None] - d1 - d2) + 1j * phi_res
            tiny = np.abs(zcomb) < 1e-12
            zsafe = np.where(tiny, 1.0, zcomb)
            for ti, t in enumerate(t_grid):
                num = (np.exp(-t * (d1 + d2) + 1j * t * phi_res)
                       - np.exp(-t * d_out)[:, None, None])
                g = num / zsafe
                if tiny.any():
                    g = np.where(tiny, t * np.exp(-t * d_out)[:, None, None], g)
                G = g.sum(axis=(1, 2)) * (d_del * d_eps)
                out[:, ti] += weight_out @ (np.abs(G) ** 2 * d_eps) * dS

    # assemble constants: inner (2pi)^-2 jac, outer measure jac, H^s (2pi)^-2
    inner = (order_factor * jac / (2.0 * np.pi) ** 2) ** 2
    return out * inner * jac / (2.0 * np.pi) ** 2


@dataclass(frozen=True)
class IterateResult:
    value: float
    t_max: float
    t_grid: np.ndarray
    profile: np.ndarray     # H^s norm over the time grid


def second_iterate_profiles(N: float, s_list, T: float = 1.0, quad: int = 64,
                            t_points: int = 64, dissipative: bool = False,
                            self_interactions: bool = True):
    """Norm profiles of the second iterate for several s at once.

    The quadrature work is shared: the regularity only enters through
    the output weight and the amplitude normalisation.
    """
    data = build_data(CounterexampleParams(N=N, s=min(s_list), T=T, quad=quad,
                                           t_points=t_points))
    cA = data.slab_a.center
    cB = data.slab_b.center
    total = _region_profile(cA, cB, 2.0, N, s_list, T, quad, t_points, dissipative)
    if self_interactions:
        q_self = max(quad // 2, 32)
        total = total + _region_profile(cA, cA, 1.0, N, s_list, T, q_self,
                                        t_points, dissipative)
        total = total + _region_profile(cB, cB, 1.0, N, s_list, T, q_self,
                                        t_points, dissipative)
    t_grid = (np.arange(t_points) + 1) * (T / t_points)
    profiles = []
    for i, s in enumerate(s_list):
        amp = N ** (-s + 1.25)
        profiles.append(np.sqrt(np.maximum(total[i], 0.0)) * amp ** 2)
    return t_grid, np.asarray(profiles)


def second_iterate_norm(p: CounterexampleParams,
                        dissipative: bool = False) -> IterateResult:
    """sup over the (0, T] time grid of the H^s norm of the second iterate."""
    t_grid, profiles = second_iterate_profiles(
        p.N, [p.s], T=p.T, quad=p.quad, t_points=p.t_points,
        dissipative=dissipative)
    prof = profiles[0]
    k = int(np.argmax(prof))
    return IterateResult(value=float(prof[k]), t_max=float(t_grid[k]),
                         t_grid=t_grid, profile=prof)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    n_values: tuple
    norms: tuple
    u0_norms: tuple
    t_maxima: tuple


def slope_fit(s: float, n_list, T: float = 1.0, quad: int = 64,
              t_points: int = 64) -> SlopeFit:
    """Least-squares log2-log2 slope of the iterate norm against N."""
    n_list = list(n_list)
    if len(n_list) < 4:
        raise ValueError("need at least 4 dyadic N values for a slope fit")
    norms, u0n, tm = [], [], []
    for N in n_list:
        p = CounterexampleParams(N=N, s=s, T=T, quad=quad, t_points=t_points)
        res = second_iterate_norm(p)
        norms.append(res.value)
        tm.append(res.t_max)
        u0n.append(build_data(p).hs_norm())
    slope = float(np.polyfit(np.log2(n_list), np.log2(norms), 1)[0])
    return SlopeFit(slope, tuple(n_list), tuple(norms), tuple(u0n), tuple(tm))
