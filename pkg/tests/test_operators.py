import numpy as np
import pytest

from neardicke import coupling, geometry, operators


def _mats(n=3, spacing=0.3, mode="regularized"):
    cfg = geometry.linear_chain(n, spacing, axis_parallel_to_dipole=True)
    return coupling.build_coupling_matrices(cfg, coupling.CouplingParams(mode=mode))


def test_sigma_bit_convention():
    # atom 1 is the most significant bit: sigma_1- |100> = |000>
    sm0 = operators.sigma_op(3, 0, "minus")
    v = np.zeros(8, dtype=complex)
    v[4] = 1.0  # |100>
    out = sm0 @ v
    assert out[0] == pytest.approx(1.0)
    assert np.abs(out).sum() == pytest.approx(1.0)
    # sigma_3- acts on the least significant bit
    sm2 = operators.sigma_op(3, 2, "minus")
    v = np.zeros(8, dtype=complex)
    v[1] = 1.0  # |001>
    assert (sm2 @ v)[0] == pytest.approx(1.0)


def test_sigma_algebra():
    sm = operators.sigma_op(2, 0, "minus")
    sp = operators.sigma_op(2, 0, "plus")
    sz = operators.sigma_op(2, 0, "z")
    assert np.allclose(sp @ sm - sm @ sp, sz)
    assert np.allclose(sm @ sm, 0.0)
    # operators on different atoms commute
    other = operators.sigma_op(2, 1, "plus")
    assert np.allclose(sm @ other, other @ sm)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_collective_commutators(n):
    rp, rm, rz = operators.collective_ops(n)
    assert np.allclose(rp @ rm - rm @ rp, 2.0 * rz)
    assert np.allclose(rz @ rp - rp @ rz, rp)
    assert np.allclose(rz @ rm - rm @ rz, -rm)


def test_H_dipole_hermitian_zero_diagonal():
    mats = _mats()
    h = operators.build_H_dipole(mats)
    assert np.allclose(h, h.conj().T)
    # no diagonal sigma+sigma- terms: fully excited and ground states have
    # zero energy
    assert h[0, 0] == 0.0
    assert h[-1, -1] == 0.0


def test_H_between_jumps_norm_decay_matches_channel_rate():
    # d||psi||^2/dt = -2 <A> must equal the summed jump rate sum_k ||C_k psi||^2
    from neardicke import trajectories

    mats = _mats(3, 0.2)
    hb = operators.build_H_between_jumps(mats)
    channels = trajectories.source_mode_jumps(mats)
    rng = np.random.default_rng(7)
    for _ in range(5):
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        psi /= np.linalg.norm(psi)
        decay = -2.0 * np.imag(np.vdot(psi, hb @ psi))
        jump_rate = sum(np.linalg.norm(c @ psi) ** 2 for c in channels)
        assert decay == pytest.approx(jump_rate, rel=1e-10)


def test_dicke_basis_three_orthonormal():
    b, c, d = operators.dicke_basis_three()
    for v in (b, c, d):
        assert np.linalg.norm(v) == pytest.approx(1.0, rel=1e-14)
    assert np.vdot(b, c) == pytest.approx(0.0, abs=1e-14)
    assert np.vdot(b, d) == pytest.approx(0.0, abs=1e-14)
    assert np.vdot(c, d) == pytest.approx(0.0, abs=1e-14)
    # all live in the one-excitation sector
    n_exc = sum(operators.sigma_op(3, k, "plus") @ operators.sigma_op(3, k, "minus") for k in range(3))
    for v in (b, c, d):
        assert np.vdot(v, n_exc @ v).real == pytest.approx(1.0, rel=1e-14)


def test_three_atom_mixing_matches_full_hamiltonian():
    # the 3x3 block must be exactly the full dipole Hamiltonian compressed
    # into the (b, c, d) subspace
    mats = _mats(3, 0.15)
    d12 = mats.delta_total[0, 1]
    d23 = mats.delta_total[1, 2]
    d13 = mats.delta_total[0, 2]
    h_full = operators.build_H_dipole(mats)
    basis = operators.dicke_basis_three()
    block = operators.three_atom_mixing_hamiltonian(d12, d23, d13, include_diagonal=True)
    for i, vi in enumerate(basis):
        for j, vj in enumerate(basis):
            assert block[i, j] == pytest.approx(np.vdot(vi, h_full @ vj), rel=1e-10, abs=1e-10)


def test_three_atom_mixing_zero_diagonal_variant():
    block = operators.three_atom_mixing_hamiltonian(1.0, 2.0, 3.0, include_diagonal=False)
    assert np.allclose(np.diag(block), 0.0)
    full = operators.three_atom_mixing_hamiltonian(1.0, 2.0, 3.0, include_diagonal=True)
    off = full - np.diag(np.diag(full))
    assert np.allclose(block, off)


def test_three_atom_mixing_symmetric_couplings_diagonalize():
    # equal couplings: b, c, d are exact eigenstates, so no mixing
    block = operators.three_atom_mixing_hamiltonian(5.0, 5.0, 5.0, include_diagonal=True)
    assert np.allclose(block - np.diag(np.diag(block)), 0.0)
    assert block[2, 2] == pytest.approx(10.0)  # symmetric state at +2*delta
    assert block[0, 0] == pytest.approx(-5.0)
    assert block[1, 1] == pytest.approx(-5.0)


def test_embed_in_full_roundtrip():
    basis = operators.dicke_basis_three()
    block = operators.three_atom_mixing_hamiltonian(1.0, -2.0, 0.5, include_diagonal=True)
    full = operators.embed_in_full(block, basis)
    assert full.shape == (8, 8)
    for i, vi in enumerate(basis):
        for j, vj in enumerate(basis):
            assert np.vdot(vi, full @ vj) == pytest.approx(block[i, j], rel=1e-12, abs=1e-14)
    with pytest.raises(ValueError):
        operators.embed_in_full(np.eye(2), basis)


def test_require_hermitian():
    with pytest.raises(ValueError):
        operators.require_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    a = np.array([[1.0, 2.0], [2.0, -1.0]])
    assert operators.require_hermitian(a) is a


def test_sigma_op_validation():
    with pytest.raises(ValueError):
        operators.sigma_op(2, 2, "minus")
    with pytest.raises(ValueError):
        operators.sigma_op(2, 0, "x")
