"""Real periodic 2D fields in spectral form.

A field lives on the torus [0, lx) x [0, ly) sampled by an nx x ny grid
and is stored through its complex Fourier coefficients.  Coefficients
follow the quadrature convention

    coeffs[k] ~ integral of f(x,y) exp(-i(xi*x + eta*y)) dx dy,

i.e. plain ``fft2`` scaled by the cell area lx*ly/(nx*ny).  With that
choice Parseval is an exact statement about the discretisation:

    sum |f|^2 * (lx*ly)/(nx*ny)  ==  sum |coeffs|^2 / (lx*ly).

Mode (k_x, k_y) sits at frequency (2*pi*k_x/lx, 2*pi*k_y/ly), with
integer indices in numpy fft order, k_x in [-nx/2, nx/2).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property

import numpy as np


class SymmetryError(ValueError):
    """Hermitian symmetry of a supposedly real field is broken."""


class MultiplierError(ValueError):
    """A Fourier multiplier is non-finite on an active mode."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Discretisation of the torus: mode counts, periods, dealias band.

    nx, ny must be powers of two >= 16 so that dyadic shell bookkeeping
    and the frame-doubling symmetry transform stay exact.
    """

    nx: int
    ny: int
    lx: float
    ly: float
    dealias_fraction: float = float(Fraction(2, 3))

    def __post_init__(self):
        if not (_is_pow2(self.nx) and self.nx >= 16):
            raise ValueError(f"nx must be a power of two >= 16, got {self.nx}")
        if not (_is_pow2(self.ny) and self.ny >= 16):
            raise ValueError(f"ny must be a power of two >= 16, got {self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError("periods lx, ly must be positive")
        if not (0 < self.dealias_fraction <= 1):
            raise ValueError("dealias_fraction must lie in (0, 1]")

    # -- frequency bookkeeping -------------------------------------------

    @cached_property
    def kx(self) -> np.ndarray:
        """Integer mode numbers along x in fft order."""
        return np.fft.fftfreq(self.nx, d=1.0 / self.nx).astype(np.int64)

    @cached_property
    def ky(self) -> np.ndarray:
        return np.fft.fftfreq(self.ny, d=1.0 / self.ny).astype(np.int64)

    @cached_property
    def xi(self) -> np.ndarray:
        """Continuum frequencies 2*pi*k/lx along x."""
        return 2.0 * np.pi * self.kx / self.lx

    @cached_property
    def eta(self) -> np.ndarray:
        return 2.0 * np.pi * self.ky / self.ly

    @cached_property
    def xi_mesh(self) -> np.ndarray:
        return np.broadcast_to(self.xi[:, None], (self.nx, self.ny))

    @cached_property
    def eta_mesh(self) -> np.ndarray:
        return np.broadcast_to(self.eta[None, :], (self.nx, self.ny))

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        cutx = self.dealias_fraction * self.nx / 2.0
        cuty = self.dealias_fraction * self.ny / 2.0
        return (np.abs(self.kx)[:, None] <= cutx) & (np.abs(self.ky)[None, :] <= cuty)

    @property
    def cell_area(self) -> float:
        """Physical quadrature weight lx*ly/(nx*ny)."""
        return self.lx * self.ly / (self.nx * self.ny)

    @property
    def box_area(self) -> float:
        return self.lx * self.ly

    def points(self):
        """Physical sample coordinates (x mesh, y mesh)."""
        x = np.arange(self.nx) * (self.lx / self.nx)
        y = np.arange(self.ny) * (self.ly / self.ny)
        return np.meshgrid(x, y, indexing="ij")

    def with_dealias(self, fraction: float) -> "GridSpec":
        return replace(self, dealias_fraction=fraction)


@dataclass(frozen=True)
class SpectralField:
    """Complex Fourier coefficients of one 2D field at a fixed time.

    Treated as an immutable value: every operation returns a new field.
    """

    grid: GridSpec
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.coeffs.shape != (self.grid.nx, self.grid.ny):
            raise ValueError(
                f"coefficient array {self.coeffs.shape} does not match grid "
                f"({self.grid.nx}, {self.grid.ny})"
            )

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _require_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _require_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy())


def _require_same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def zero_field(grid: GridSpec) -> SpectralField:
    return SpectralField(grid, np.zeros((grid.nx, grid.ny), dtype=np.complex128))


def to_spectral(values: np.ndarray, grid: GridSpec) -> SpectralField:
    """Forward transform of a real sample array, Parseval-normalised."""
    if values.shape != (grid.nx, grid.ny):
        raise ValueError(
            f"value array {values.shape} does not match grid ({grid.nx}, {grid.ny})"
        )
    coeffs = np.fft.fft2(values) * grid.cell_area
    return SpectralField(grid, coeffs)


def hermitian_defect(f: SpectralField) -> float:
    """Relative deviation of coeffs from conj(coeffs(-k))."""
    c = f.coeffs
    mirrored = np.conj(np.roll(c[::-1, ::-1], shift=(1, 1), axis=(0, 1)))
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(c - mirrored)) / scale)


def to_physical(f: SpectralField, tol: float = 1e-10) -> np.ndarray:
    """Inverse transform back to real samples.

    Raises SymmetryError when the Hermitian defect exceeds ``tol``; the
    result would silently lose a non-negligible imaginary part.
    """
    defect = hermitian_defect(f)
    if defect > tol:
        raise SymmetryError(
            f"Hermitian symmetry violated (defect {defect:.3e} > tol {tol:.1e})"
        )
    return _to_physical_unchecked(f)


def _to_physical_unchecked(f: SpectralField) -> np.ndarray:
    # Hot path for the solver; realness enforced by construction there.
    return np.fft.ifft2(f.coeffs / f.grid.cell_area).real


def apply_multiplier(f: SpectralField, m) -> SpectralField:
    """Multiply coefficients by m(xi, eta); the input is left untouched.

    ``m`` is a vectorised callable of the frequency meshes.  A non-finite
    multiplier value is tolerated on modes whose coefficient is exactly
    zero (the product is defined to vanish there) and rejected otherwise.
    """
    g = f.grid
    values = np.asarray(m(g.xi_mesh, g.eta_mesh), dtype=np.complex128)
    values = np.broadcast_to(values, f.coeffs.shape)
    finite = np.isfinite(values)
    if not finite.all():
        if np.any(~finite & (f.coeffs != 0)):
            raise MultiplierError("non-finite multiplier value at an active mode")
        values = np.where(finite, values, 0.0)
    return SpectralField(g, f.coeffs * values)


def dealias(f: SpectralField) -> SpectralField:
    """Zero every mode outside the dealias band of the grid."""
    return SpectralField(f.grid, f.coeffs * f.grid.dealias_mask)


def l2_norm(f: SpectralField) -> float:
    """L2 norm of the field, evaluated in spectral space by Parseval."""
    return float(np.linalg.norm(f.coeffs) / np.sqrt(f.grid.box_area))


def physical_l2_norm(values: np.ndarray, grid: GridSpec) -> float:
    """Direct quadrature of the L2 norm from samples (Parseval oracle)."""
    return float(np.sqrt(np.sum(np.abs(values) ** 2) * grid.cell_area))


@dataclass(frozen=True)
class SpaceTimeField:
    """Uniform time samples of spectral frames over a window [t0, t1).

    Frame j sits at t_j = t0 + j*(t1-t0)/nt, so the time axis is treated
    as periodic with period t1-t0; the tau transform below is the plain
    discrete transform under the same quadrature convention as space.
    """

    grid: GridSpec
    t0: float
    t1: float
    frames: tuple

    def __post_init__(self):
        if self.t1 <= self.t0:
            raise ValueError("window must satisfy t1 > t0")
        if len(self.frames) < 2:
            raise ValueError("need at least two frames")
        for fr in self.frames:
            if fr.grid != self.grid:
                raise ValueError("all frames must share the grid")

    @property
    def nt(self) -> int:
        return len(self.frames)

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.nt

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.nt) * self.dt

    @cached_property
    def tau(self) -> np.ndarray:
        """Time frequencies 2*pi*k_t/(t1-t0) in fft order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.nt, d=1.0 / self.nt) / (self.t1 - self.t0)

    @cached_property
    def tau_coeffs(self) -> np.ndarray:
        """(nt, nx, ny) transform in all variables, quadrature-normalised."""
        stack = np.stack([fr.coeffs for fr in self.frames], axis=0)
        return np.fft.fft(stack, axis=0) * self.dt

    def l2_norm(self) -> float:
        """Space-time L2 norm over the window (rectangle rule in t)."""
        total = sum(np.sum(np.abs(fr.coeffs) ** 2) for fr in self.frames)
        return float(np.sqrt(total * self.dt / self.grid.box_area))


def spacetime_from_coeffs(grid: GridSpec, t0: float, t1: float,
                          stack: np.ndarray) -> SpaceTimeField:
    """Bundle an (nt, nx, ny) coefficient stack into a SpaceTimeField."""
    frames = tuple(SpectralField(grid, stack[j]) for j in range(stack.shape[0]))
    return SpaceTimeField(grid, t0, t1, frames)
