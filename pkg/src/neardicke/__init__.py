"""Simulation of collective spontaneous emission from dipole-coupled two-level atoms.

The package models N identical two-level emitters with a shared dipole
orientation.  It provides the pairwise coupling coefficients (decay matrix and
transverse/longitudinal energy shifts, with and without momentum-space
regularization), Lindblad master-equation integration, Monte Carlo wave-function
trajectories with temporal or angle-resolved photon detection, and the
competing-timescale diagnostics for near-coincident atoms.
"""

__version__ = "0.1.0"

from .geometry import AtomConfig, PairGeometry, linear_chain, equilateral_triangle, pair_geometry
from .coupling import CouplingParams, CouplingMatrices, build_coupling_matrices

__all__ = [
    "AtomConfig",
    "PairGeometry",
    "linear_chain",
    "equilateral_triangle",
    "pair_geometry",
    "CouplingParams",
    "CouplingMatrices",
    "build_coupling_matrices",
    "__version__",
]
