import numpy as np
import pytest

from neardicke import coupling, geometry, master, operators, validation

PARAMS = coupling.CouplingParams()


def test_compare_report():
    rep = validation.compare("demo", {"x": 1.0}, reference=2.0, value=2.0 + 1e-12, rel_tol=1e-9)
    assert rep.passed
    assert rep.rel_error < 1e-9
    rep = validation.compare("demo", {}, reference=2.0, value=2.1, rel_tol=1e-9)
    assert not rep.passed


def test_high_precision_self_consistency():
    # the extended-precision evaluation must satisfy the same identities the
    # double implementation does: unregularized = regularized in the
    # infinite-cutoff limit
    big = coupling.CouplingParams(lambda_perp_over_k0=1e10, lambda_par_over_k0=1e10)
    hp = validation.high_precision_coefficients(0.3, 0.6, big)
    assert hp["gamma_reg"] == pytest.approx(hp["gamma_unreg"], rel=1e-12)
    assert hp["delta_perp_reg"] == pytest.approx(hp["delta_perp_unreg"], rel=1e-8)
    assert hp["delta_par_reg"] == pytest.approx(hp["delta_par_unreg"], rel=1e-8)


def test_two_level_analytic():
    assert validation.two_level_analytic(1.0, 0.0) == 1.0
    assert validation.two_level_analytic(2.0, 0.5) == pytest.approx(np.exp(-1.0))
    with pytest.raises(ValueError):
        validation.two_level_analytic(1.0, -1.0)


def test_single_atom_liouvillian_spectrum():
    cfg = geometry.AtomConfig(positions=[[0.0, 0.0, 0.0]], dipole_direction=[0, 0, 1])
    mats = coupling.build_coupling_matrices(cfg, PARAMS)
    liouv = validation.brute_force_liouvillian(mats)
    w = np.sort(np.linalg.eigvals(liouv).real)
    gt = PARAMS.gamma_tilde
    # spectrum: 0 (steady state), -2*gamma_nn = -gamma_tilde (population
    # relaxation), and twofold -gamma_nn (coherences)
    assert w[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.any(np.isclose(w, -gt, atol=1e-12))
    assert np.isclose(w, -0.5 * gt, atol=1e-12).sum() == 2


def test_brute_force_matches_builder():
    cfg = geometry.linear_chain(3, 0.2, axis_parallel_to_dipole=True)
    mats = coupling.build_coupling_matrices(cfg, PARAMS)
    a = validation.brute_force_liouvillian(mats)
    b = master.build_liouvillian(mats)
    assert np.abs(a - b).max() < 1e-9 * np.abs(a).max()


def test_brute_force_refuses_large_systems():
    cfg = geometry.linear_chain(5, 0.2, axis_parallel_to_dipole=True)
    mats = coupling.build_coupling_matrices(cfg, PARAMS)
    with pytest.raises(ValueError):
        validation.brute_force_liouvillian(mats)


def test_evolve_superoperator_methods_agree():
    cfg = geometry.linear_chain(2, 0.3, axis_parallel_to_dipole=False)
    mats = coupling.build_coupling_matrices(cfg, PARAMS)
    liouv = validation.brute_force_liouvillian(mats)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[3, 3] = 1.0
    times = np.linspace(0.0, 2.0, 7)
    a = validation.evolve_superoperator(liouv, rho0, times, method="expm")
    b = validation.evolve_superoperator(liouv, rho0, times, method="eig")
    assert np.abs(np.asarray(a) - np.asarray(b)).max() < 1e-9
    for rho in a:
        assert abs(np.trace(rho).real - 1.0) < 1e-10


def test_zero_generator_is_identity_evolution():
    mats = coupling.CouplingMatrices(
        gamma_mat=np.zeros((2, 2)),
        delta_perp=np.zeros((2, 2)),
        delta_par=np.zeros((2, 2)),
        mode="none",
    )
    liouv = validation.brute_force_liouvillian(mats)
    assert np.abs(liouv).max() == 0.0
    rho0 = np.diag([0.25, 0.25, 0.25, 0.25]).astype(complex)
    out = validation.evolve_superoperator(liouv, rho0, np.array([0.0, 10.0]))
    assert np.abs(out[1] - rho0).max() < 1e-14
