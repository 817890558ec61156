"""Competing-timescale diagnostics for near-coincident atom clouds.

Two characteristic times are compared:

* t_rate: the fastest collective emission time, {(gamma_tilde/2) N (N/2 + 1)}^-1,
  attained at half excitation.
* t_Dicke: the inverse of the fastest dipole-induced population-mixing rate.
  The uniform (all-pairs-equal) component of the coupling matrix commutes with
  the collective ladder and causes no mixing, so only the nonuniform (mixing)
  part counts.  The headline estimate is the reciprocal of the largest mixing
  matrix element (an order-of-magnitude rate, valid for any N); a literal
  half-excitation-sector eigenvalue variant is also provided for comparison.

When t_Dicke becomes comparable to t_rate, dipole-dipole mixing interferes
with the collective cascade and the ideal superradiant description breaks
down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .coupling import CouplingParams, expansions_near_dicke, gamma_reg

__all__ = [
    "TimescaleRow",
    "TimescaleTable",
    "sector_hopping_matrix",
    "mixing_matrix",
    "t_dicke",
    "t_dicke_sector",
    "t_rate",
    "ratio_scan",
    "EXACT_DIAGONALIZATION_MAX_ATOMS",
]

# Largest N for which the half-excitation sector is diagonalized exactly;
# beyond this a rate bound replaces the eigenvalue.
EXACT_DIAGONALIZATION_MAX_ATOMS = 12


@dataclass(frozen=True)
class TimescaleRow:
    n_atoms: int
    spacing_lambda0: float
    xi: float
    t_dicke: float
    t_rate: float
    ratio: float
    min_gamma_ratio: float
    is_bound: bool
    validity_flag: str


@dataclass(frozen=True)
class TimescaleTable:
    rows: tuple[TimescaleRow, ...]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])


def sector_hopping_matrix(couplings: np.ndarray, n_excited: int) -> np.ndarray:
    """sum_{n != m} J_nm sigma_n+ sigma_m- restricted to the k-excitation sector.

    Basis states are k-subsets of atom indices in lexicographic order; matrix
    elements connect configurations that differ by moving one excitation.
    """
    J = np.asarray(couplings, dtype=float)
    N = J.shape[0]
    basis = list(combinations(range(N), n_excited))
    index = {b: i for i, b in enumerate(basis)}
    dim = len(basis)
    h = np.zeros((dim, dim))
    for i, occ in enumerate(basis):
        occ_set = set(occ)
        for m in occ:  # de-excite m ...
            for n in range(N):  # ... excite n
                if n == m or n in occ_set:
                    continue
                target = tuple(sorted(occ_set - {m} | {n}))
                h[index[target], i] += J[n, m]
    return h


def mixing_matrix(couplings: np.ndarray) -> np.ndarray:
    """Coupling matrix with its uniform all-pairs component removed.

    Subtracting the mean off-diagonal coupling from every off-diagonal entry
    removes the component proportional to the collective ladder product, which
    leaves the fully symmetric states invariant and causes no mixing.
    """
    J = np.asarray(couplings, dtype=float).copy()
    N = J.shape[0]
    off = ~np.eye(N, dtype=bool)
    J[off] -= J[off].mean()
    np.fill_diagonal(J, 0.0)
    return J


def t_dicke(mixing_couplings: np.ndarray) -> float:
    """Inverse of the fastest mixing rate: 1 / max |J_mix,nm| over pairs.

    The argument must already be the mixing (nonuniform) part of the coupling
    matrix -- the uniform component mixes nothing and must not be included
    (use mixing_matrix, or the first-order separation-dependent couplings
    directly).  The diagonal is ignored, so the estimate is invariant under
    adding any multiple of the identity.  A matrix with no mixing returns
    infinity.
    """
    J = np.asarray(mixing_couplings, dtype=float)
    off = ~np.eye(J.shape[0], dtype=bool)
    max_elem = np.abs(J[off]).max() if off.any() else 0.0
    if max_elem == 0.0:
        return math.inf
    return 1.0 / max_elem


def t_dicke_sector(couplings: np.ndarray, n_excited: int | None = None) -> tuple[float, bool]:
    """Literal eigenvalue variant of t_Dicke; returns (time, is_bound).

    The extreme eigenvalue is taken in the n_excited sector (default
    floor(N/2)) of the mixing part of the coupling matrix, with the sector
    spectrum centered (a uniform diagonal shift mixes nothing).  For N above
    EXACT_DIAGONALIZATION_MAX_ATOMS the bound N * max|J_mix| replaces the
    eigenvalue and is flagged.  Because collective enhancement makes the
    sector eigenvalue grow faster with N than the pair-rate estimate, this
    variant is reported for comparison only and is not used in ratio_scan.
    """
    J = np.asarray(couplings, dtype=float)
    N = J.shape[0]
    if n_excited is None:
        n_excited = N // 2
    J_mix = mixing_matrix(J)
    max_elem = np.abs(J_mix).max()
    if max_elem == 0.0:
        return math.inf, False
    if N > EXACT_DIAGONALIZATION_MAX_ATOMS:
        return 1.0 / (N * max_elem), True
    h = sector_hopping_matrix(J_mix, n_excited)
    w = np.linalg.eigvalsh(h)
    w = w - w.mean()
    top = np.abs(w).max()
    if top == 0.0:
        return math.inf, False
    return 1.0 / top, False


def t_rate(n_atoms: int, gamma_tilde: float) -> float:
    """Fastest collective emission time {(gamma_tilde/2) N (N/2 + 1)}^-1."""
    if n_atoms < 1:
        raise ValueError("n_atoms must be at least 1")
    return 1.0 / (0.5 * gamma_tilde * n_atoms * (0.5 * n_atoms + 1.0))


def ratio_scan(
    n_range,
    spacing_range_lambda0,
    params: CouplingParams,
    eta: float = 0.0,
) -> TimescaleTable:
    """t_Dicke / t_rate over chain sizes and spacings (spacings in units of lambda0).

    Chains use the first-order small-separation coupling coefficients; the
    mixing generator is the separation-dependent (first-order) part of the
    couplings, since the constant part acts collectively and mixes nothing.
    Each row also reports the worst-case pairwise decay coefficient (as
    2*gamma_nm / gamma, which is 1 in the co-located limit) so the
    constant-linewidth approximation can be checked, plus a validity flag when
    the farthest pair leaves the linearization regime.
    """
    rows = []
    for spacing in spacing_range_lambda0:
        xi0 = 2.0 * math.pi * spacing
        for n in n_range:
            J_mix = np.zeros((n, n))
            min_g = math.inf
            for a in range(n):
                for b in range(a + 1, n):
                    xi_ab = xi0 * (b - a)
                    exp = expansions_near_dicke(xi_ab, eta, params)
                    J_mix[a, b] = J_mix[b, a] = exp.delta1
                    min_g = min(min_g, 2.0 * gamma_reg(xi_ab, eta, params) / params.gamma)
            td = t_dicke(J_mix)
            is_bound = False
            tr = t_rate(n, params.gamma_tilde)
            max_xi = xi0 * (n - 1)
            flag = "ok"
            if max_xi * params.lambda_par_over_k0 > 1.0:
                flag = "linearization-marginal"
            rows.append(
                TimescaleRow(
                    n_atoms=n,
                    spacing_lambda0=float(spacing),
                    xi=xi0,
                    t_dicke=td,
                    t_rate=tr,
                    ratio=td / tr,
                    min_gamma_ratio=min_g,
                    is_bound=is_bound,
                    validity_flag=flag,
                )
            )
    return TimescaleTable(rows=tuple(rows))
