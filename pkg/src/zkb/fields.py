"""Initial-data constructors used by the solver, the labs and the tests."""

from __future__ import annotations

import numpy as np

from .grid import GridSpec, SpectralField, to_spectral


def gaussian_bump(grid: GridSpec, amplitude: float = 1.0, width: float = 8.0,
                  center=None) -> SpectralField:
    """Centered real Gaussian, amplitude * exp(-r^2 / (2 width^2))."""
    if center is None:
        center = (grid.lx / 2.0, grid.ly / 2.0)
    x, y = grid.points()
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2
    return to_spectral(amplitude * np.exp(-r2 / (2.0 * width ** 2)), grid)


def single_harmonic(grid: GridSpec, kx: int, ky: int, amplitude: float = 1.0) -> SpectralField:
    """Real field amplitude*cos(xi_k x + eta_k y) as a Hermitian mode pair."""
    coeffs = np.zeros((grid.nx, grid.ny), dtype=np.complex128)
    half = 0.5 * amplitude * grid.box_area
    coeffs[kx % grid.nx, ky % grid.ny] += half
    coeffs[(-kx) % grid.nx, (-ky) % grid.ny] += half
    return SpectralField(grid, coeffs)


def random_real_field(grid: GridSpec, rng: np.random.Generator,
                      decay: float = 2.0, amplitude: float = 1.0) -> SpectralField:
    """Random real field with |coeffs| ~ <(xi,eta)>^-decay, dealias-banded."""
    mag = np.hypot(grid.xi_mesh, grid.eta_mesh)
    envelope = (1.0 + mag ** 2) ** (-decay / 2.0)
    raw = rng.standard_normal((grid.nx, grid.ny))
    f = to_spectral(raw, grid)
    coeffs = f.coeffs * envelope * grid.dealias_mask
    coeffs[0, 0] = 0.0
    field = SpectralField(grid, coeffs)
    scale = np.sqrt(np.sum(np.abs(coeffs) ** 2) / grid.box_area)
    if scale == 0.0:
        return field
    return field * (amplitude / scale)


def shell_random_field(grid: GridSpec, rng: np.random.Generator, shell: float,
                       window) -> SpectralField:
    """Hermitian random field concentrated on |(xi,eta)| ~ shell.

    ``window`` is the radial bump used to carve the shell (typically the
    dyadic annulus profile), evaluated on |(xi, eta)|/shell.
    """
    mag = np.hypot(grid.xi_mesh, grid.eta_mesh)
    env = window(mag / shell)
    re = rng.standard_normal((grid.nx, grid.ny))
    im = rng.standard_normal((grid.nx, grid.ny))
    coeffs = (re + 1j * im) * env
    # Hermitian-symmetrise so the field is real.
    mirrored = np.conj(np.roll(coeffs[::-1, ::-1], shift=(1, 1), axis=(0, 1)))
    coeffs = 0.5 * (coeffs + mirrored)
    coeffs[0, 0] = 0.0
    return SpectralField(grid, coeffs)
