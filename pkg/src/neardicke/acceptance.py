"""Built-in acceptance suite: ten end-to-end checks with frozen references.

Each check is independent, returns a CheckResult, and prints nothing; the
CLI "validate" subcommand and the test suite share these functions.  Frozen
reference values were produced by the oracles in the validation module
(extended-precision arithmetic and brute-force superoperator evolution) and
are pinned here with their tolerances.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import analysis, coupling, geometry, master, operators, trajectories, validation

__all__ = ["CheckResult", "run_all", "ALL_CHECKS", "DEFAULT_SEED"]

DEFAULT_SEED = 745912836

# First time the superradiant-state population exceeds 0.25 in the three-atom
# unequal-chain transfer experiment (chain spacing xi = 0.005, dipole along the
# chain, linearized couplings, pure off-diagonal three-level mixing model).
# Frozen from the brute-force superoperator oracle (eigendecomposition,
# cross-checked against scipy.linalg.expm to 1e-12).
GOLDEN_TRANSFER_TIME = 1.575264257109e-05


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    runtime_s: float
    detail: str


def _result(name: str, passed: bool, t0: float, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), runtime_s=time.perf_counter() - t0, detail=detail)


# ---------------------------------------------------------------------------
# 1. Coefficient limits at vanishing separation
# ---------------------------------------------------------------------------

def check_coefficient_limits() -> CheckResult:
    t0 = time.perf_counter()
    p = coupling.CouplingParams()
    xi = 1e-8
    gt = p.gamma_tilde
    refs = {
        "gamma": gt / 2.0,
        "delta_perp": -gt * p.lambda_perp_over_k0 / 2.0,
        "delta_par": p.gamma * p.lambda_par_over_k0**3 / (4.0 * math.sqrt(2.0)),
    }
    worst = 0.0
    for eta in (0.0, 1.0):
        vals = {
            "gamma": coupling.gamma_reg(xi, eta, p),
            "delta_perp": coupling.delta_perp_reg(xi, eta, p),
            "delta_par": coupling.delta_par_reg(xi, eta, p),
        }
        for k in refs:
            worst = max(worst, abs(vals[k] - refs[k]) / abs(refs[k]))
    return _result(
        "1 coefficient limits at xi=1e-8",
        worst < 1e-6,
        t0,
        f"worst relative deviation {worst:.2e} (tolerance 1e-6)",
    )


# ---------------------------------------------------------------------------
# 2. Large-cutoff recovery of the non-regularized coefficients
# ---------------------------------------------------------------------------

def check_unregularized_recovery() -> CheckResult:
    t0 = time.perf_counter()
    p = coupling.CouplingParams(lambda_perp_over_k0=1e8, lambda_par_over_k0=1e8)
    worst = 0.0
    for xi in (0.1, 0.5, 1.0, 5.0):
        for eta in (0.0, 0.5, 1.0):
            pairs = (
                (coupling.gamma_reg(xi, eta, p), coupling.gamma_unreg(xi, eta, p)),
                (coupling.delta_perp_reg(xi, eta, p), coupling.delta_perp_unreg(xi, eta, p)),
                (coupling.delta_par_reg(xi, eta, p), coupling.delta_par_unreg(xi, eta, p)),
            )
            for reg, unreg in pairs:
                if unreg == 0.0:
                    worst = max(worst, abs(reg))
                else:
                    worst = max(worst, abs(reg - unreg) / abs(unreg))
    return _result(
        "2 cutoff-to-infinity recovery",
        worst < 1e-4,
        t0,
        f"worst relative deviation {worst:.2e} over 12 sample points (tolerance 1e-4)",
    )


# ---------------------------------------------------------------------------
# 3. Agreement region of regularized vs non-regularized shift sums
# ---------------------------------------------------------------------------

def check_agreement_region() -> CheckResult:
    t0 = time.perf_counter()
    p = coupling.CouplingParams()
    grid = np.logspace(-2.0, 1.0, 200)
    worst = 0.0
    worst_xi = 0.0
    first_ok = None
    for eta in (0.0, 1.0):
        s_unreg = np.array([coupling.delta_perp_unreg(x, eta, p) + coupling.delta_par_unreg(x, eta, p) for x in grid])
        s_reg = np.array([coupling.delta_perp_reg(x, eta, p) + coupling.delta_par_reg(x, eta, p) for x in grid])
        # locate sign changes of the non-regularized sum and exclude their
        # 1e-3-wide neighborhoods
        signs = np.sign(s_unreg)
        roots = [0.5 * (grid[i] + grid[i + 1]) for i in range(len(grid) - 1) if signs[i] * signs[i + 1] < 0]
        keep = np.ones(len(grid), dtype=bool)
        for r in roots:
            keep &= np.abs(grid - r) > 1e-3
        rel = np.abs(s_reg - s_unreg) / np.abs(s_unreg)
        bad = keep & (rel >= 1e-2)
        if rel[keep].max() > worst:
            worst = rel[keep].max()
            worst_xi = grid[keep][np.argmax(rel[keep])]
        agree = ~bad
        idx_all_ok = next((i for i in range(len(grid)) if agree[i:].all()), None)
        if idx_all_ok is not None:
            thr = grid[idx_all_ok]
            first_ok = thr if first_ok is None else max(first_ok, thr)
    agreement_ok = worst < 1e-2
    # divergence of the difference below xi ~ 5e-4
    div_ok = True
    for eta in (0.0, 1.0):
        for x in (1e-4, 2e-4, 4e-4):
            su = coupling.delta_perp_unreg(x, eta, p) + coupling.delta_par_unreg(x, eta, p)
            sr = coupling.delta_perp_reg(x, eta, p) + coupling.delta_par_reg(x, eta, p)
            if abs(sr - su) / abs(su) <= 0.1:
                div_ok = False
    return _result(
        "3 agreement region of shift sums",
        agreement_ok and div_ok,
        t0,
        f"worst relative deviation {worst:.3f} at xi={worst_xi:.4f}; 1% agreement holds from "
        f"xi~{first_ok if first_ok is None else format(first_ok, '.4f')}; "
        f"short-distance divergence {'confirmed' if div_ok else 'NOT confirmed'}",
    )


# ---------------------------------------------------------------------------
# 4. Orientation independence at the origin
# ---------------------------------------------------------------------------

def check_origin_isotropy() -> CheckResult:
    t0 = time.perf_counter()
    p = coupling.CouplingParams()
    xi = 1e-8
    dp0 = coupling.delta_perp_reg(xi, 0.0, p)
    dp1 = coupling.delta_perp_reg(xi, 1.0, p)
    dl0 = coupling.delta_par_reg(xi, 0.0, p)
    dl1 = coupling.delta_par_reg(xi, 1.0, p)
    r1 = abs(dp0 - dp1) / abs(dp0)
    r2 = abs(dl0 - dl1) / abs(dl0)
    worst = max(r1, r2)
    return _result(
        "4 orientation independence at origin",
        worst < 1e-9,
        t0,
        f"relative eta-dependence: perp {r1:.2e}, par {r2:.2e} (tolerance 1e-9)",
    )


# ---------------------------------------------------------------------------
# 5. Equal couplings preserve the dark state
# ---------------------------------------------------------------------------

def check_dark_state_preservation() -> CheckResult:
    t0 = time.perf_counter()
    p = coupling.CouplingParams(mode="dicke_expansion")
    cfg = geometry.equilateral_triangle(0.01)
    mats = coupling.build_coupling_matrices(cfg, p)
    b, c, d = operators.dicke_basis_three()
    rho0 = np.outer(b, b.conj())
    res = master.evolve(rho0, mats, t_final=10.0, n_out=51, method="expm")
    pb = master.populations(res, [b])[:, 0]
    master_ok = np.abs(pb - 1.0).max() < 1e-6
    hb = operators.build_H_between_jumps(mats)
    chans = trajectories.source_mode_jumps(mats)
    recs = trajectories.ensemble(b, hb, chans, t_max=10.0, n_traj=1000, seed_base=DEFAULT_SEED)
    jumps = sum(r.n_jumps for r in recs)
    return _result(
        "5 dark-state preservation (equal couplings)",
        master_ok and jumps == 0,
        t0,
        f"max |P_b - 1| = {np.abs(pb - 1.0).max():.2e}; total jumps in 1000 trajectories = {jumps}",
    )


# ---------------------------------------------------------------------------
# 6. Three-atom population transfer time
# ---------------------------------------------------------------------------

def _three_atom_transfer_model():
    """Couplings, mixing Hamiltonian, and basis for the unequal-chain experiment."""
    p = coupling.CouplingParams(mode="dicke_expansion")
    cfg = geometry.linear_chain(3, 0.005, axis_parallel_to_dipole=True)
    mats = coupling.build_coupling_matrices(cfg, p)
    dlt = mats.delta_total
    b, c, d = operators.dicke_basis_three()
    h3 = operators.three_atom_mixing_hamiltonian(dlt[0, 1], dlt[1, 2], dlt[0, 2], include_diagonal=False)
    h_full = operators.embed_in_full(h3, (b, c, d))
    return mats, h_full, (b, c, d)


def check_population_transfer() -> CheckResult:
    t0 = time.perf_counter()
    mats, h_full, (b, c, d) = _three_atom_transfer_model()
    rho0 = np.outer(b, b.conj())
    t_eval = np.linspace(0.0, 2e-5, 2001)
    res = master.evolve(rho0, mats, t_final=2e-5, t_eval=t_eval, hamiltonian=h_full, method="rk")
    pd = master.populations(res, [d])[:, 0]
    above = pd > 0.25
    if not above.any():
        return _result("6 three-atom transfer time", False, t0, "population never exceeded 0.25")
    i = int(np.argmax(above))
    # linear interpolation of the crossing between the bracketing grid points
    t_star = np.interp(0.25, [pd[i - 1], pd[i]], [t_eval[i - 1], t_eval[i]])
    rel = abs(t_star - GOLDEN_TRANSFER_TIME) / GOLDEN_TRANSFER_TIME
    trace_ok = np.abs(res.traces - 1.0).max() < 1e-9
    return _result(
        "6 three-atom transfer time",
        (t_star < 1e-4) and rel < 0.05 and trace_ok,
        t0,
        f"t* = {t_star:.6e} vs frozen {GOLDEN_TRANSFER_TIME:.6e} (rel dev {rel:.2e}); "
        f"max trace drift {np.abs(res.traces - 1.0).max():.1e}",
    )


# ---------------------------------------------------------------------------
# 7. Trajectory-ensemble average equals the master equation
# ---------------------------------------------------------------------------

def check_unraveling_equivalence(n_traj: int = 5000) -> CheckResult:
    t0 = time.perf_counter()
    mats, h_full, (b, c, d) = _three_atom_transfer_model()
    checkpoints = np.logspace(math.log10(1e-5), math.log10(3.0), 20)
    rho0 = np.outer(b, b.conj())
    res = master.evolve(rho0, mats, t_final=3.0, t_eval=checkpoints, hamiltonian=h_full, method="expm")
    ref = master.populations(res, [b, c, d])
    ground = np.zeros(b.shape, dtype=complex)
    ground[0] = 1.0
    p_jumped = master.populations(res, [ground])[:, 0]

    damp = operators.build_H_between_jumps(mats) - operators.build_H_dipole(mats)
    hb = h_full + damp
    chans = trajectories.source_mode_jumps(mats)
    recs = trajectories.ensemble(
        b, hb, chans, t_max=3.0, n_traj=n_traj, seed_base=DEFAULT_SEED,
        sample_times=checkpoints, sample_states=[b, c, d],
    )
    mean, sem = trajectories.ensemble_mean_populations(recs)
    # Standard error of the ensemble mean.  The empirical SEM misses the
    # binomial variance of the had-a-jump indicator whenever no trajectory
    # happens to have jumped yet, so the jump component (population value
    # times the Bernoulli spread of the master's ground population) is added
    # in quadrature.
    jump_var = (ref**2) * (p_jumped * (1.0 - p_jumped))[:, None] / n_traj
    tol = 3.0 * np.sqrt(sem**2 + jump_var) + 1e-9
    dev = np.abs(mean - ref)
    worst = float((dev / tol).max())
    return _result(
        "7 unraveling equivalence",
        bool((dev <= tol).all()),
        t0,
        f"worst deviation {worst:.2f} x tolerance over 20 checkpoints x 3 populations ({n_traj} trajectories)",
    )


# ---------------------------------------------------------------------------
# 8. Five-atom directed-detection emission statistics
# ---------------------------------------------------------------------------

def check_five_atom_statistics(n_traj: int = 2000, t_max: float = 1e4) -> CheckResult:
    t0 = time.perf_counter()
    xi0 = 2.0 * math.pi * 1e-10 / coupling.DEFAULT_LAMBDA0_M
    cfg = geometry.linear_chain(5, xi0, axis_parallel_to_dipole=False)
    chans = trajectories.directed_jump_ops(cfg, bins=(30, 30), gamma=1.0)
    psi0 = np.zeros(32, dtype=complex)
    psi0[31] = 1.0  # all five atoms excited

    arms = {}
    for tag, mode in (("wd", "regularized"), ("nd", "none")):
        mats = coupling.build_coupling_matrices(cfg, coupling.CouplingParams(mode=mode))
        hb = operators.build_H_between_jumps(mats)
        arms[tag] = trajectories.ensemble(psi0, hb, chans, t_max=t_max, n_traj=n_traj, seed_base=DEFAULT_SEED)

    totals = {tag: sum(r.n_jumps for r in recs) for tag, recs in arms.items()}
    expected = 5 * n_traj
    a_ok = totals["nd"] == expected

    b_ok = False
    if totals["wd"] < totals["nd"]:
        p_nd = totals["nd"] / expected
        b_pval = stats.binomtest(totals["wd"], expected, p=p_nd, alternative="less").pvalue
        b_ok = b_pval < 0.01
    else:
        b_pval = 1.0

    t5 = {
        tag: np.array([r.jump_times[4] for r in recs if r.n_jumps >= 5])
        for tag, recs in arms.items()
    }
    welch = stats.ttest_ind(t5["wd"], t5["nd"], equal_var=False, alternative="greater")
    c_ok = (t5["wd"].mean() > t5["nd"].mean()) and welch.pvalue < 0.01

    dist = {tag: trajectories.angular_distribution(recs, chans) for tag, recs in arms.items()}
    sigma_prime = trajectories.angular_difference(dist["nd"], dist["wd"])
    n_theta = chans.n_theta
    decile = max(1, n_theta // 10)
    axis_val = sigma_prime[:decile].mean()
    mid = n_theta // 2
    half = max(1, decile // 2)
    equator_val = sigma_prime[mid - half:mid + (decile - half)].mean()
    d_ok = axis_val > equator_val

    return _result(
        "8 five-atom emission statistics",
        a_ok and b_ok and c_ok and d_ok,
        t0,
        f"(a) nd photons {totals['nd']}/{expected} {'ok' if a_ok else 'FAIL'}; "
        f"(b) wd photons {totals['wd']}, binomial p={b_pval:.3g} {'ok' if b_ok else 'FAIL'}; "
        f"(c) mean 5th-photon time wd {t5['wd'].mean():.2f} vs nd {t5['nd'].mean():.2f}, "
        f"Welch p={welch.pvalue:.2g} {'ok' if c_ok else 'FAIL'}; "
        f"(d) sigma' axis {axis_val:.3g} vs equator {equator_val:.3g} {'ok' if d_ok else 'FAIL'}",
    )


# ---------------------------------------------------------------------------
# 9. Timescale-ratio scan
# ---------------------------------------------------------------------------

def check_timescale_scan() -> CheckResult:
    t0 = time.perf_counter()
    p = coupling.CouplingParams(mode="dicke_expansion")
    spacings = np.linspace(1.7e-4, 5.1e-4, 5)
    table = analysis.ratio_scan(range(4, 21), spacings, p, eta=0.0)
    min_g = table.column("min_gamma_ratio").min()
    gamma_ok = min_g >= 0.99
    mono_ok = True
    worst_pair = ""
    for s in spacings:
        rows = [r for r in table.rows if r.spacing_lambda0 == s]
        rows.sort(key=lambda r: r.n_atoms)
        ratios = [r.ratio for r in rows]
        for i in range(1, len(ratios)):
            if ratios[i] <= ratios[i - 1]:
                mono_ok = False
                worst_pair = f" (spacing {s:.2e}: N={rows[i-1].n_atoms}->{rows[i].n_atoms})"
    return _result(
        "9 timescale-ratio scan",
        gamma_ok and mono_ok,
        t0,
        f"min pairwise decay ratio {min_g:.5f} (>= 0.99); "
        f"ratio monotonic in N: {mono_ok}{worst_pair}",
    )


# ---------------------------------------------------------------------------
# 10. Numerical hygiene
# ---------------------------------------------------------------------------

def check_numerical_hygiene() -> CheckResult:
    t0 = time.perf_counter()
    problems = []
    p = coupling.CouplingParams()

    if abs(coupling.alpha_fn(1e-8) - 2.0 / 3.0) > 1e-10:
        problems.append("alpha small-argument")
    if abs(coupling.beta_fn(1e-8)) > 1e-10:
        problems.append("beta small-argument")

    rng = np.random.default_rng(7)
    for _ in range(5):
        pos = rng.uniform(-1.0, 1.0, size=(4, 3))
        dvec = rng.normal(size=3)
        cfg = geometry.AtomConfig(positions=pos, dipole_direction=dvec / np.linalg.norm(dvec))
        mats = coupling.build_coupling_matrices(cfg, p)
        if np.linalg.eigvalsh(mats.gamma_mat).min() < -1e-10 * p.gamma:
            problems.append("decay matrix not positive semidefinite")
        h = operators.build_H_dipole(mats)
        if np.abs(h - h.conj().T).max() > 1e-10 * max(np.abs(h).max(), 1.0):
            problems.append("Hamiltonian not Hermitian")
        chans = trajectories.source_mode_jumps(mats)
        rate_sum = sum(c.conj().T @ c for c in chans)
        sm = operators.sigma_minus_ops(4)
        target = sum(
            2.0 * mats.gamma_mat[n, m] * (sm[n].conj().T @ sm[m])
            for n in range(4)
            for m in range(4)
        )
        if np.abs(rate_sum - target).max() > 1e-10 * np.abs(target).max():
            problems.append("source-mode channel sum")

    # Excitation-number conservation of the coherent part
    _, _, rz = operators.collective_ops(4)
    if np.abs(h @ rz - rz @ h).max() > 1e-9 * np.abs(h).max():
        problems.append("excitation-number conservation")

    # Directed-detection channel sum for a single atom
    single = geometry.AtomConfig(positions=[[0.0, 0.0, 0.0]], dipole_direction=[0.0, 0.0, 1.0])
    dchan = trajectories.directed_jump_ops(single, bins=(30, 30), gamma=1.0)
    rate = sum(dchan.ops[k].conj().T @ dchan.ops[k] for k in range(dchan.n_channels))
    sp_sm = np.array([[0.0, 0.0], [0.0, 1.0]])
    if np.abs(rate - sp_sm).max() > 1e-3:
        problems.append("directed channel sum")

    # Trace preservation on a random three-atom state
    rng_state = np.random.default_rng(11)
    a = rng_state.normal(size=(8, 8)) + 1j * rng_state.normal(size=(8, 8))
    rho = a @ a.conj().T
    rho /= np.trace(rho).real
    cfg3 = geometry.linear_chain(3, 0.4, True)
    mats3 = coupling.build_coupling_matrices(cfg3, p)
    res = master.evolve(rho, mats3, t_final=10.0, n_out=21, method="expm")
    if np.abs(res.traces - 1.0).max() > 1e-9:
        problems.append("trace preservation")

    # Seed determinism and merge invariance
    b, _, _ = operators.dicke_basis_three()
    hb3 = operators.build_H_between_jumps(mats3)
    ch3 = trajectories.source_mode_jumps(mats3)
    e4 = trajectories.ensemble(b, hb3, ch3, t_max=5.0, n_traj=4, seed_base=123)
    e4_again = trajectories.ensemble(b, hb3, ch3, t_max=5.0, n_traj=4, seed_base=123)
    e2 = trajectories.ensemble(b, hb3, ch3, t_max=5.0, n_traj=2, seed_base=123)
    if any(r1.events != r2.events for r1, r2 in zip(e4, e4_again)):
        problems.append("seed determinism")
    if any(r1.events != r2.events for r1, r2 in zip(e4[:2], e2)):
        problems.append("merge invariance")

    return _result(
        "10 numerical hygiene",
        not problems,
        t0,
        "all invariants hold" if not problems else "failed: " + ", ".join(problems),
    )


ALL_CHECKS = (
    check_coefficient_limits,
    check_unregularized_recovery,
    check_agreement_region,
    check_origin_isotropy,
    check_dark_state_preservation,
    check_population_transfer,
    check_unraveling_equivalence,
    check_five_atom_statistics,
    check_timescale_scan,
    check_numerical_hygiene,
)

_QUICK_SKIP = {"check_five_atom_statistics", "check_unraveling_equivalence"}


def run_all(quick: bool = False) -> list[CheckResult]:
    """Run the acceptance checks; quick mode skips the two slow Monte Carlo ones."""
    results = []
    for fn in ALL_CHECKS:
        if quick and fn.__name__ in _QUICK_SKIP:
            continue
        results.append(fn())
    return results
