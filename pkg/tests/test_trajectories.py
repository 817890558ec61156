import math

import numpy as np
import pytest
from scipy import stats

from neardicke import coupling, geometry, operators, trajectories

PARAMS = coupling.CouplingParams()


def _single_atom_setup():
    cfg = geometry.AtomConfig(positions=[[0.0, 0.0, 0.0]], dipole_direction=[0, 0, 1])
    mats = coupling.build_coupling_matrices(cfg, PARAMS)
    hb = operators.build_H_between_jumps(mats)
    channels = trajectories.source_mode_jumps(mats)
    psi0 = np.array([0.0, 1.0], dtype=complex)
    return mats, hb, channels, psi0


def _triangle_setup(side=0.2):
    cfg = geometry.equilateral_triangle(side)
    mats = coupling.build_coupling_matrices(cfg, PARAMS)
    hb = operators.build_H_between_jumps(mats)
    channels = trajectories.source_mode_jumps(mats)
    return cfg, mats, hb, channels


def test_single_atom_first_jump_times_are_exponential():
    mats, hb, channels, psi0 = _single_atom_setup()
    gt = PARAMS.gamma_tilde
    records = trajectories.ensemble(psi0, hb, channels, t_max=50.0, n_traj=10_000, seed_base=42)
    times = np.array([r.jump_times[0] for r in records if r.n_jumps == 1])
    assert len(times) == 10_000  # t_max = 50/gamma, survival ~ 2e-22
    ks = stats.kstest(times, "expon", args=(0.0, 1.0 / gt))
    assert ks.pvalue > 0.01, f"KS p = {ks.pvalue}"


def test_analytic_waiting_density_matches_exponential():
    mats, hb, channels, psi0 = _single_atom_setup()
    gt = PARAMS.gamma_tilde
    t = np.linspace(0.0, 5.0, 50)
    w = trajectories.analytic_waiting_density(hb, psi0, t)
    assert np.allclose(w, gt * np.exp(-gt * t), rtol=1e-9)


def test_waiting_histogram_matches_analytic_density():
    cfg, mats, hb, channels = _triangle_setup()
    b, c, d = operators.dicke_basis_three()
    records = trajectories.ensemble(d, hb, channels, t_max=40.0, n_traj=4000, seed_base=5)
    delays, counts, edges = trajectories.waiting_time_distribution(
        records, 1, bin_edges=np.linspace(0.0, 3.0, 16)
    )
    centers = 0.5 * (edges[:-1] + edges[1:])
    w = trajectories.analytic_waiting_density(hb, d, centers)
    widths = np.diff(edges)
    expected = w * widths * len(records)
    mask = expected > 25
    dev = (counts[mask] - expected[mask]) / np.sqrt(expected[mask])
    assert np.abs(dev).max() < 5.0
    # chi-square on the well-populated bins
    chi2 = float((dev**2).sum())
    assert stats.chi2.sf(chi2, mask.sum()) > 1e-4


def test_source_mode_channels_reproduce_dissipator():
    cfg, mats, hb, channels = _triangle_setup(0.3)
    # sum_k C_k^dag C_k = 2 sum_nm gamma_nm sigma_n+ sigma_m-
    total = sum(c.conj().T @ c for c in channels)
    sm = [operators.sigma_op(3, n, "minus") for n in range(3)]
    direct = sum(
        2.0 * mats.gamma_mat[n, m] * sm[n].conj().T @ sm[m]
        for n in range(3)
        for m in range(3)
    )
    assert np.abs(total - direct).max() < 1e-12


def test_directed_channels_sum_to_total_rate():
    cfg = geometry.AtomConfig(positions=[[0.0, 0.0, 0.0]], dipole_direction=[0, 0, 1])
    ch = trajectories.directed_jump_ops(cfg, bins=(40, 40), gamma=1.0)
    total = np.einsum("kij,kil->jl", ch.ops.conj(), ch.ops)
    sm = operators.sigma_op(1, 0, "minus")
    # single atom: channel rates integrate the dipole pattern to gamma
    assert np.abs(total - sm.conj().T @ sm).max() < 1e-3


def test_directed_channels_bin_bookkeeping():
    cfg = geometry.linear_chain(2, 0.3, axis_parallel_to_dipole=False)
    ch = trajectories.directed_jump_ops(cfg, bins=(12, 16))
    assert ch.n_channels == 12 * 16
    assert ch.cos_theta_edges[0] == 1.0 and ch.cos_theta_edges[-1] == -1.0
    assert ch.theta_bin.max() == 11 and ch.phi_bin.max() == 15
    assert ch.n_channels * ch.d_omega == pytest.approx(4.0 * math.pi, rel=1e-12)
    with pytest.raises(ValueError):
        trajectories.directed_jump_ops(cfg, bins=(4, 30))


def test_determinism_and_merge_invariance():
    cfg, mats, hb, channels = _triangle_setup()
    b, c, d = operators.dicke_basis_three()
    big = trajectories.ensemble(d, hb, channels, t_max=5.0, n_traj=4, seed_base=9)
    small = trajectories.ensemble(d, hb, channels, t_max=5.0, n_traj=2, seed_base=9)
    for r_big, r_small in zip(big[:2], small):
        assert r_big.n_jumps == r_small.n_jumps
        assert np.array_equal(r_big.jump_times, r_small.jump_times)
        assert [e.channel for e in r_big.events] == [e.channel for e in r_small.events]
    again = trajectories.ensemble(d, hb, channels, t_max=5.0, n_traj=4, seed_base=9)
    for r1, r2 in zip(big, again):
        assert np.array_equal(r1.jump_times, r2.jump_times)
    different = trajectories.ensemble(d, hb, channels, t_max=5.0, n_traj=4, seed_base=10)
    assert any(
        r1.n_jumps != r2.n_jumps or not np.array_equal(r1.jump_times, r2.jump_times)
        for r1, r2 in zip(big, different)
    )


def test_sampled_populations_match_master_equation():
    from neardicke import master

    cfg, mats, hb, channels = _triangle_setup(0.25)
    b, c, d = operators.dicke_basis_three()
    times = np.linspace(0.0, 2.0, 9)
    records = trajectories.ensemble(
        d, hb, channels, t_max=2.0, n_traj=1500, seed_base=21,
        sample_times=times, sample_states=[b, c, d],
    )
    mean, sem = trajectories.ensemble_mean_populations(records)
    res = master.evolve(np.outer(d, d.conj()), mats, t_final=2.0, t_eval=times, method="rk", rtol=1e-10)
    ref = master.populations(res, [b, c, d])
    p = np.clip(ref, 0.0, 1.0)
    tol = 4.0 * np.sqrt(sem**2 + p * (1.0 - p) / len(records)) + 1e-9
    assert np.all(np.abs(mean - ref) <= tol)


def test_angular_distribution_counts_all_photons():
    cfg = geometry.linear_chain(2, 0.4, axis_parallel_to_dipole=False)
    mats = coupling.build_coupling_matrices(cfg, PARAMS)
    hb = operators.build_H_between_jumps(mats)
    ch = trajectories.directed_jump_ops(cfg, bins=(10, 10))
    psi0 = np.zeros(4, dtype=complex)
    psi0[3] = 1.0  # both atoms excited
    records = trajectories.ensemble(psi0, hb, ch, t_max=40.0, n_traj=200, seed_base=3)
    dist = trajectories.angular_distribution(records, ch)
    total_jumps = sum(r.n_jumps for r in records)
    assert dist.counts.sum() == total_jumps
    assert total_jumps >= 2 * 200 * 0.95  # nearly every excitation emitted
    # sigma integrates back to photons per trajectory
    integral = float((dist.sigma * dist.solid_angle_per_theta_bin).sum())
    assert integral == pytest.approx(total_jumps / 200.0, rel=1e-12)


def test_angular_difference_requires_matching_bins():
    cfg = geometry.linear_chain(2, 0.4, axis_parallel_to_dipole=False)
    mats = coupling.build_coupling_matrices(cfg, PARAMS)
    hb = operators.build_H_between_jumps(mats)
    ch_a = trajectories.directed_jump_ops(cfg, bins=(10, 10))
    ch_b = trajectories.directed_jump_ops(cfg, bins=(12, 10))
    psi0 = np.zeros(4, dtype=complex)
    psi0[3] = 1.0
    rec = trajectories.ensemble(psi0, hb, ch_a, t_max=5.0, n_traj=10, seed_base=1)
    rec_b = trajectories.ensemble(psi0, hb, ch_b, t_max=5.0, n_traj=10, seed_base=1)
    da = trajectories.angular_distribution(rec, ch_a)
    db = trajectories.angular_distribution(rec_b, ch_b)
    assert trajectories.angular_difference(da, da).max() == 0.0
    with pytest.raises(ValueError):
        trajectories.angular_difference(da, db)


def test_run_trajectory_validation():
    mats, hb, channels, psi0 = _single_atom_setup()
    with pytest.raises(ValueError):
        trajectories.run_trajectory(2.0 * psi0, hb, channels, t_max=1.0)
    with pytest.raises(ValueError):
        trajectories.ensemble(psi0, hb, channels, t_max=1.0, n_traj=0, seed_base=0)
    with pytest.raises(ValueError):
        trajectories.waiting_time_distribution([], 0)
