"""Operator algebra on the 2^N-dimensional Hilbert space of N two-level atoms.

Basis convention: computational basis kets are bit strings with atom 1 as the
most significant bit and |1> meaning "excited".  For three atoms the ket
|001> (only atom 3 excited) is basis index 1, |100> (only atom 1 excited) is
index 4.  All operators are dense complex matrices; this is comfortable up to
N = 12.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .coupling import CouplingMatrices

__all__ = [
    "sigma_op",
    "sigma_minus_ops",
    "collective_ops",
    "build_H_dipole",
    "build_H_between_jumps",
    "dicke_basis_three",
    "three_atom_mixing_hamiltonian",
    "embed_in_full",
    "require_hermitian",
]

_SIGMA = {
    "minus": np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),
    "plus": np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex),
    "z": np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex),
}


def require_hermitian(a: np.ndarray, tol: float = 1e-12, name: str = "operator") -> np.ndarray:
    if np.abs(a - a.conj().T).max() > tol:
        raise ValueError(f"{name} is not Hermitian within {tol}")
    return a


def sigma_op(n_atoms: int, atom_index: int, kind: str) -> np.ndarray:
    """Single-atom Pauli operator embedded at the given slot (0-based index)."""
    if kind not in _SIGMA:
        raise ValueError(f"kind must be one of {tuple(_SIGMA)}")
    if not 0 <= atom_index < n_atoms:
        raise ValueError(f"atom_index {atom_index} out of range for N = {n_atoms}")
    op = np.eye(1, dtype=complex)
    for i in range(n_atoms):
        op = np.kron(op, _SIGMA[kind] if i == atom_index else np.eye(2, dtype=complex))
    return op


@lru_cache(maxsize=32)
def _sigma_minus_tuple(n_atoms: int) -> tuple[np.ndarray, ...]:
    return tuple(sigma_op(n_atoms, n, "minus") for n in range(n_atoms))


def sigma_minus_ops(n_atoms: int) -> list[np.ndarray]:
    """All lowering operators [sigma_0-, ..., sigma_(N-1)-]."""
    return list(_sigma_minus_tuple(n_atoms))


def collective_ops(n_atoms: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collective (R_plus, R_minus, R_z) with R_z = sum sigma_nz / 2.

    They satisfy [R_plus, R_minus] = 2 R_z and [R_z, R_pm] = +/- R_pm.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be at least 1")
    sm = sigma_minus_ops(n_atoms)
    r_minus = sum(sm)
    r_plus = r_minus.conj().T
    r_z = sum(sigma_op(n_atoms, n, "z") for n in range(n_atoms)) / 2.0
    return r_plus, r_minus, r_z


def build_H_dipole(matrices: CouplingMatrices) -> np.ndarray:
    """Coherent dipole-dipole Hamiltonian sum_{n != m} Delta_nm sigma_n+ sigma_m-.

    Delta_nm is the total shift (transverse + longitudinal); diagonal terms are
    excluded (single-atom Lamb shift absorbed into the atomic frequency).
    Units: rate (hbar = 1).
    """
    N = matrices.n_atoms
    delta = matrices.delta_total
    sm = sigma_minus_ops(N)
    dim = 2**N
    h = np.zeros((dim, dim), dtype=complex)
    for n in range(N):
        sp_n = sm[n].conj().T
        for m in range(N):
            if n != m and delta[n, m] != 0.0:
                h += delta[n, m] * (sp_n @ sm[m])
    return require_hermitian(h, tol=1e-12 * max(np.abs(delta).max(), 1.0), name="H_dipole")


def build_H_between_jumps(matrices: CouplingMatrices) -> np.ndarray:
    """Non-Hermitian generator H_dipole - i sum_{n,m} gamma_nm sigma_n+ sigma_m-.

    The full -i factor (not -i/2) matches the master-equation convention in
    which the jump sandwich carries a factor 2: the squared norm then decays
    at exactly the total jump rate sum_k ||C_k psi||^2 = 2 <A> with
    A = sum gamma_nm sigma_n+ sigma_m-.  The decay sum includes the diagonal,
    so a single excited atom loses squared norm at the rate 2*gamma_nn.
    """
    N = matrices.n_atoms
    sm = sigma_minus_ops(N)
    dim = 2**N
    damp = np.zeros((dim, dim), dtype=complex)
    for n in range(N):
        sp_n = sm[n].conj().T
        for m in range(N):
            if matrices.gamma_mat[n, m] != 0.0:
                damp += matrices.gamma_mat[n, m] * (sp_n @ sm[m])
    return build_H_dipole(matrices) - 1j * damp


def dicke_basis_three() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three one-excitation states (b, c, d) of three atoms.

    b = (-2|001> + |010> + |100>)/sqrt(6)   (subradiant)
    c = (|010> - |100>)/sqrt(2)             (subradiant)
    d = (|001> + |010> + |100>)/sqrt(3)     (superradiant, symmetric)

    Bit convention: atom 1 is the most significant bit, so |001> is index 1,
    |010> index 2, |100> index 4.
    """
    b = np.zeros(8, dtype=complex)
    c = np.zeros(8, dtype=complex)
    d = np.zeros(8, dtype=complex)
    b[1], b[2], b[4] = -2.0, 1.0, 1.0
    b /= math.sqrt(6.0)
    c[2], c[4] = 1.0, -1.0
    c /= math.sqrt(2.0)
    d[1], d[2], d[4] = 1.0, 1.0, 1.0
    d /= math.sqrt(3.0)
    return b, c, d


def three_atom_mixing_hamiltonian(
    delta_12: float,
    delta_23: float,
    delta_13: float,
    include_diagonal: bool = True,
) -> np.ndarray:
    """3x3 dipole Hamiltonian in the ordered basis (b, c, d).

    Off-diagonals (for the basis sign conventions of dicke_basis_three):
        <c|H|d> = (delta_23 - delta_13)/sqrt(6)
        <b|H|d> = (2 delta_12 - delta_23 - delta_13)/(3 sqrt(2))
        <b|H|c> = (delta_13 - delta_23)/sqrt(3)

    With include_diagonal the diagonal entries are the exact expectation
    values of the full operator in the three states; without it they are zero,
    which drops the relative detuning of the symmetric state and describes
    pure population mixing between the three levels.
    """
    s2, s3, s6 = math.sqrt(2.0), math.sqrt(3.0), math.sqrt(6.0)
    h = np.zeros((3, 3), dtype=complex)
    h[1, 2] = h[2, 1] = (delta_23 - delta_13) / s6
    h[0, 2] = h[2, 0] = (2.0 * delta_12 - delta_23 - delta_13) / (3.0 * s2)
    h[0, 1] = h[1, 0] = (delta_13 - delta_23) / s3
    if include_diagonal:
        # Expectation values of sum_{n != m} delta_nm sigma_n+ sigma_m- in the
        # one-excitation site basis (the site matrix has zero diagonal).
        h[0, 0] = (delta_12 - 2.0 * delta_13 - 2.0 * delta_23) / 3.0
        h[1, 1] = -delta_12
        h[2, 2] = 2.0 * (delta_12 + delta_13 + delta_23) / 3.0
    return h


def embed_in_full(block: np.ndarray, states: list[np.ndarray] | tuple[np.ndarray, ...]) -> np.ndarray:
    """Lift a small-matrix operator sum_ij block[i,j] |s_i><s_j| to full dimension."""
    states = [np.asarray(s, dtype=complex) for s in states]
    k = len(states)
    if np.asarray(block).shape != (k, k):
        raise ValueError("block dimension must match the number of states")
    dim = states[0].shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(k):
        for j in range(k):
            if block[i, j] != 0.0:
                out += block[i, j] * np.outer(states[i], states[j].conj())
    return out
