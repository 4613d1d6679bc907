"""Pseudo-spectral solver and estimate-verification lab for the 2D
Zakharov-Kuznetsov-Burgers equation in its symmetric frame."""

__version__ = "0.1.0"

from .grid import (GridSpec, SpectralField, SpaceTimeField, SymmetryError,
                   MultiplierError, to_spectral, to_physical, apply_multiplier,
                   dealias, l2_norm, hermitian_defect, zero_field,
                   spacetime_from_coeffs)
from .propagators import SymbolSet, apply_U, apply_W, duhamel
from .dyadic import (BumpProfile, DyadicShell, NormSpec, chi, phi, phi_scaled,
                     bracket, norm, hs_norm, hs0_norm, hts_norm, xsb1_norm,
                     xtsb1_norm, project_PN, project_PNM, project_QL,
                     shell_breakdown)
from .symmetry import (FrameMap, FRAME_MAP, map_time, symmetrize_data,
                       desymmetrize_data, adapted_original_grid,
                       symmetric_grid_for, original_grid_for)
from .solver import (SolverConfig, Trajectory, SolverBlowupError, solve, step,
                     nonlinearity, dissipation_residual, dissipation_rate,
                     linear_symbol)

__all__ = [name for name in dir() if not name.startswith("_")]
