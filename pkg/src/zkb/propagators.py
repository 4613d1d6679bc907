"""Linear semigroups and the Duhamel integral.

The free group U(t) multiplies coefficients by exp(i t Omega) with the
dispersion phase Omega = xi^3 + eta^3.  The damped semigroup W(t) adds
the decay factor exp(-|t| (xi+eta)^2); its dissipation symbol vanishes
exactly on the antidiagonal xi + eta = 0, which is why W is an isometry
there and a strict contraction everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, SpaceTimeField, SpectralField


def dispersion_symbol(xi, eta):
    """Oscillation rate Omega(xi, eta) = xi^3 + eta^3 (odd)."""
    return xi ** 3 + eta ** 3


def dissipation_symbol(xi, eta):
    """Decay rate D(xi, eta) = (xi + eta)^2 >= 0, zero on xi + eta = 0."""
    return (xi + eta) ** 2


@dataclass(frozen=True)
class SymbolSet:
    """Dispersion/dissipation pair defining U and W."""

    dispersion: callable = field(default=dispersion_symbol)
    dissipation: callable = field(default=dissipation_symbol)

    def omega(self, grid: GridSpec) -> np.ndarray:
        return self.dispersion(grid.xi_mesh, grid.eta_mesh)

    def decay(self, grid: GridSpec) -> np.ndarray:
        return self.dissipation(grid.xi_mesh, grid.eta_mesh)


_DEFAULT = SymbolSet()


def apply_U(f: SpectralField, t: float, symbols: SymbolSet = _DEFAULT) -> SpectralField:
    """Free evolution by t: an exact L2 isometry for any t."""
    phase = np.exp(1j * t * symbols.omega(f.grid))
    return SpectralField(f.grid, f.coeffs * phase)


def apply_W(f: SpectralField, t: float, symbols: SymbolSet = _DEFAULT) -> SpectralField:
    """Damped evolution: exp(-|t| D) exp(i t Omega), |multiplier| <= 1."""
    g = f.grid
    mult = np.exp(-abs(t) * symbols.decay(g) + 1j * t * symbols.omega(g))
    return SpectralField(g, f.coeffs * mult)


def _w_multiplier(grid: GridSpec, t: float, symbols: SymbolSet) -> np.ndarray:
    return np.exp(-abs(t) * symbols.decay(grid) + 1j * t * symbols.omega(grid))


def _simpson_weights(k: int, dt: float) -> np.ndarray:
    """Composite Simpson weights on k intervals (3/8 tail when k is odd)."""
    if k == 1:
        return np.array([0.5, 0.5]) * dt
    w = np.zeros(k + 1)
    if k % 2 == 0:
        w[0] = w[k] = 1.0
        w[1:k:2] = 4.0
        w[2:k:2] = 2.0
        w *= dt / 3.0
    else:
        head = _simpson_weights(k - 3, dt) if k > 3 else np.array([0.0])
        w[: k - 2] += head
        w[k - 3:] += dt * np.array([3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0])
    return w


def duhamel(F: SpaceTimeField, t: float, symbols: SymbolSet = _DEFAULT) -> SpectralField:
    """Integral of W(t - t') F(t') dt' over [0, t] by composite Simpson.

    ``t`` must land on the sampling lattice of F (which must start at
    t0 = 0); the quadrature is fourth order once t spans at least two
    sampling intervals.
    """
    if abs(F.t0) > 1e-12:
        raise ValueError("duhamel expects a window starting at t0 = 0")
    if t < -1e-12 or t > F.t1 + 1e-12:
        raise ValueError(f"time {t} outside window [0, {F.t1}]")
    if F.nt < 64:
        raise ValueError("window too coarsely sampled (need nt >= 64)")
    k = int(round(t / F.dt))
    if abs(k * F.dt - t) > 1e-9 * max(F.t1, 1.0):
        raise ValueError(f"time {t} is not a sampling node (dt = {F.dt})")
    if k == 0:
        return SpectralField(F.grid, np.zeros_like(F.frames[0].coeffs))
    weights = _simpson_weights(k, F.dt)
    terms = np.stack([
        w * _w_multiplier(F.grid, t - j * F.dt, symbols) * F.frames[j].coeffs
        for j, w in enumerate(weights)
    ])
    return SpectralField(F.grid, np.sum(terms, axis=0))
