"""Atomic configurations and pairwise geometric quantities.

All positions are stored pre-multiplied by the resonant wavenumber k0, so a
coordinate value of 0.01 means k0*r = 0.01.  The two quantities that enter the
coupling formulas are, for each pair (n, m):

    xi  = k0 * |r_n - r_m|          (dimensionless separation)
    eta = (d_hat . r_hat_nm)**2     (squared cosine between the common dipole
                                     direction and the interatomic axis)

Atom indices are 0-based internally; documentation and error messages use the
same convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AtomConfig",
    "PairGeometry",
    "linear_chain",
    "equilateral_triangle",
    "pair_geometry",
    "all_pair_geometries",
    "chain_axis",
]


@dataclass(frozen=True)
class AtomConfig:
    """Positions (in units of 1/k0) and the shared dipole orientation.

    positions: (N, 3) float array, each row an atom position times k0.
    dipole_direction: unit 3-vector shared by all atoms.
    """

    positions: np.ndarray
    dipole_direction: np.ndarray

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("positions must be an (N, 3) array")
        d = np.asarray(self.dipole_direction, dtype=float).reshape(3)
        norm = np.linalg.norm(d)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"dipole_direction must be a unit vector (|d| = {norm})")
        if pos.shape[0] > 1:
            diff = pos[:, None, :] - pos[None, :, :]
            dist = np.linalg.norm(diff, axis=-1)
            np.fill_diagonal(dist, np.inf)
            if dist.min() <= 0.0:
                raise ValueError("atom positions must be pairwise distinct")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "dipole_direction", d)

    @property
    def n_atoms(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class PairGeometry:
    """Dimensionless separation and orientation parameter of one atom pair."""

    xi: float
    eta: float

    def __post_init__(self):
        if self.xi <= 0.0:
            raise ValueError("xi must be positive for distinct atoms")
        if not -1e-12 <= self.eta <= 1.0 + 1e-12:
            raise ValueError("eta must lie in [0, 1]")
        object.__setattr__(self, "eta", float(min(max(self.eta, 0.0), 1.0)))


def linear_chain(n_atoms: int, spacing_xi: float, axis_parallel_to_dipole: bool) -> AtomConfig:
    """Equally spaced chain along the x-axis.

    If axis_parallel_to_dipole, the dipole points along the chain (eta = 1 for
    every pair); otherwise the dipole is perpendicular to it (eta = 0).
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be at least 1")
    if spacing_xi <= 0.0:
        raise ValueError("spacing_xi must be positive")
    pos = np.zeros((n_atoms, 3))
    pos[:, 0] = spacing_xi * np.arange(n_atoms)
    dipole = np.array([1.0, 0.0, 0.0]) if axis_parallel_to_dipole else np.array([0.0, 0.0, 1.0])
    return AtomConfig(positions=pos, dipole_direction=dipole)


def equilateral_triangle(side_xi: float) -> AtomConfig:
    """Three atoms at the vertices of an equilateral triangle.

    The triangle lies in the x-y plane and the dipole points along z, so all
    three pairs share the same xi (= side_xi) and the same eta (= 0).  This is
    the unique orientation choice for which all three couplings are identical.
    """
    if side_xi <= 0.0:
        raise ValueError("side_xi must be positive")
    h = side_xi * np.sqrt(3.0) / 2.0
    pos = np.array([
        [0.0, 0.0, 0.0],
        [side_xi, 0.0, 0.0],
        [side_xi / 2.0, h, 0.0],
    ])
    return AtomConfig(positions=pos, dipole_direction=np.array([0.0, 0.0, 1.0]))


def pair_geometry(config: AtomConfig, n: int, m: int) -> PairGeometry:
    """xi and eta for the ordered pair (n, m); symmetric under swap."""
    N = config.n_atoms
    if not (0 <= n < N and 0 <= m < N):
        raise ValueError(f"atom index out of range for N = {N}")
    if n == m:
        raise ValueError("pair geometry is undefined on the diagonal (n == m)")
    r = config.positions[n] - config.positions[m]
    xi = float(np.linalg.norm(r))
    eta = float(np.dot(config.dipole_direction, r / xi) ** 2)
    return PairGeometry(xi=xi, eta=eta)


def all_pair_geometries(config: AtomConfig) -> tuple[np.ndarray, np.ndarray]:
    """(xi, eta) as N x N symmetric arrays; diagonals are 0."""
    N = config.n_atoms
    xi = np.zeros((N, N))
    eta = np.zeros((N, N))
    for n in range(N):
        for m in range(n + 1, N):
            g = pair_geometry(config, n, m)
            xi[n, m] = xi[m, n] = g.xi
            eta[n, m] = eta[m, n] = g.eta
    return xi, eta


def chain_axis(config: AtomConfig, tol: float = 1e-9) -> np.ndarray | None:
    """Unit vector of the common line through all atoms, or None if not collinear."""
    pos = config.positions
    if config.n_atoms < 2:
        return None
    d = pos[1] - pos[0]
    axis = d / np.linalg.norm(d)
    rel = pos - pos[0]
    residual = rel - np.outer(rel @ axis, axis)
    if np.abs(residual).max() > tol:
        return None
    return axis
