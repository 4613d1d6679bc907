"""Change of frames between the raw equation and its symmetric form.

The symmetric frame is reached by v(t,x,y) = 4 u(16 t, 2(x+y), 2(x-y)/sqrt(3)).
Writing A for the spatial matrix [[2, 2], [2/sqrt(3), -2/sqrt(3)]]
(|det A| = 8/sqrt(3)), the transform acts on Fourier data as the exact
frequency remap zeta = A^T mu with coefficient factor 4/|det A|.

On periodic grids the remap is lattice-exact when the original-frame box
satisfies lx = sqrt(3) * ly with nx = ny = n: the image frequencies then
live on the square torus of period lx/2 sampled by 2n x 2n modes, via
the integer index map (k1, k2) -> (k1 + k2, k1 - k2).  That map fills
only the even-parity half of the output lattice; the odd-parity half is
recovered from a second transform of the half-frequency-modulated
samples, which is why the data must decay well inside the box.  The
result is the single periodization of the plane transform, so L2 and
pointwise relations carry over with the plane constants.

Constants and other non-decaying fields are outside the domain of the
transform (they fail the tail precondition and would pick up the
spurious second lattice copy); symmetrize_data rejects them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (GridSpec, SpectralField, SymmetryError, hermitian_defect,
                   _to_physical_unchecked)

_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class FrameMap:
    """Fixed change of variables between the two frames."""

    amplitude: float = 4.0
    time_factor: float = 16.0
    matrix: tuple = ((2.0, 2.0), (2.0 / _SQRT3, -2.0 / _SQRT3))

    @property
    def det(self) -> float:
        (a, b), (c, d) = self.matrix
        return a * d - b * c

    @property
    def abs_det(self) -> float:
        return abs(self.det)

    def apply(self, x, y):
        (a, b), (c, d) = self.matrix
        return a * x + b * y, c * x + d * y


FRAME_MAP = FrameMap()


def map_time(t_original: float) -> float:
    """Original-frame time to symmetric-frame time (factor 16)."""
    if t_original < 0:
        raise ValueError("time must be non-negative")
    return FRAME_MAP.time_factor * t_original


def adapted_original_grid(n: int, ly: float, dealias_fraction: float = 2.0 / 3.0) -> GridSpec:
    """Original-frame grid shaped so the frequency remap is lattice-exact."""
    return GridSpec(nx=n, ny=n, lx=_SQRT3 * ly, ly=ly, dealias_fraction=dealias_fraction)


def symmetric_grid_for(grid: GridSpec) -> GridSpec:
    _require_adapted(grid)
    return GridSpec(nx=2 * grid.nx, ny=2 * grid.ny, lx=grid.lx / 2.0,
                    ly=grid.lx / 2.0, dealias_fraction=grid.dealias_fraction)


def original_grid_for(grid: GridSpec) -> GridSpec:
    if grid.nx != grid.ny or abs(grid.lx - grid.ly) > 1e-12 * grid.lx:
        raise ValueError("symmetric-frame grid must be square")
    return GridSpec(nx=grid.nx // 2, ny=grid.ny // 2, lx=2.0 * grid.lx,
                    ly=2.0 * grid.lx / _SQRT3, dealias_fraction=grid.dealias_fraction)


def _require_adapted(grid: GridSpec) -> None:
    if grid.nx != grid.ny:
        raise ValueError("frame transform needs nx == ny")
    if abs(grid.lx - _SQRT3 * grid.ly) > 1e-9 * grid.lx:
        raise ValueError(
            "frame transform needs lx = sqrt(3)*ly; use adapted_original_grid"
        )


def _check_decay(u0: SpectralField, tol: float = 1e-8) -> None:
    g = u0.grid
    vals = _to_physical_unchecked(u0)
    x, y = g.points()
    inside = (np.abs(x - g.lx / 2) <= g.lx / 4) & (np.abs(y - g.ly / 2) <= g.ly / 4)
    total = np.sum(vals ** 2)
    if total == 0.0:
        return
    tail = np.sum(vals[~inside] ** 2) / total
    if tail > tol:
        raise ValueError(
            f"data does not decay inside the box (tail mass {tail:.2e} > {tol:.0e}); "
            "the frame transform is only faithful for decaying fields"
        )


def symmetrize_data(u0: SpectralField, check: bool = True) -> SpectralField:
    """Map original-frame data to the symmetric frame, spectrally.

    Output grid: 2n x 2n modes on the square torus of period lx/2.
    """
    g = u0.grid
    _require_adapted(g)
    if check:
        if hermitian_defect(u0) > 1e-10:
            raise SymmetryError("symmetrize_data expects a real field")
        _check_decay(u0)
    n = g.nx
    out = symmetric_grid_for(g)
    factor = FRAME_MAP.amplitude / FRAME_MAP.abs_det

    # Unpaired Nyquist lines cannot be carried through the remap.
    nyq = np.zeros((n, n), dtype=bool)
    nyq[n // 2, :] = True
    nyq[:, n // 2] = True
    total = np.sum(np.abs(u0.coeffs) ** 2)
    if total > 0 and np.sum(np.abs(u0.coeffs[nyq]) ** 2) > 1e-12 * total:
        raise ValueError("remapped support exceeds Nyquist band of the output grid")

    # Half-shifted transform supplies the odd-parity output modes.
    vals = _to_physical_unchecked(u0)
    x, y = g.points()
    shift = np.exp(-1j * (np.pi / g.lx) * x - 1j * (np.pi / g.ly) * y)
    half = np.fft.fft2(vals * shift) * g.cell_area

    P = np.fft.fftfreq(out.nx, d=1.0 / out.nx).astype(np.int64)
    S = P[:, None] + P[None, :]
    D = P[:, None] - P[None, :]
    coeffs = np.zeros((out.nx, out.ny), dtype=np.complex128)

    even = np.mod(S, 2) == 0
    mu1 = S // 2
    mu2 = D // 2
    in_band = even & (np.abs(mu1) <= n // 2 - 1) & (np.abs(mu2) <= n // 2 - 1)
    coeffs[in_band] = factor * u0.coeffs[mu1[in_band] % n, mu2[in_band] % n]

    odd = ~even
    m1 = (S - 1) // 2   # frequency index m1 + 1/2
    m2 = (D - 1) // 2
    in_band = odd & (m1 >= -n // 2) & (m1 <= n // 2 - 1) \
                  & (m2 >= -n // 2) & (m2 <= n // 2 - 1)
    coeffs[in_band] = factor * half[m1[in_band] % n, m2[in_band] % n]

    return SpectralField(out, coeffs)


def desymmetrize_data(v0: SpectralField) -> SpectralField:
    """Inverse frame map; exact on images of symmetrize_data.

    For general symmetric-frame fields this restricts to the part
    representable on the coarse original-frame lattice (the even-parity
    in-band modes); everything else is orthogonal to that lattice.
    """
    out = original_grid_for(v0.grid)
    n = out.nx
    factor = FRAME_MAP.abs_det / FRAME_MAP.amplitude
    k = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    K1 = k[:, None]
    K2 = k[None, :]
    P = (K1 + K2) % v0.grid.nx
    Q = (K1 - K2) % v0.grid.ny
    coeffs = factor * v0.coeffs[P, Q]
    # The unpaired input Nyquist lines were dropped on the way in.
    coeffs[n // 2, :] = 0.0
    coeffs[:, n // 2] = 0.0
    return SpectralField(out, coeffs)
