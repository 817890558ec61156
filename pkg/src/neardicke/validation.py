"""Independent oracles used to certify the production code paths.

Three families:

* extended-precision coefficient evaluation (mpmath, 40 significant digits)
  straight from the defining formulas, with none of the cancelled/series
  rearrangements used in the double-precision implementation;
* closed-form analytic solutions (single-atom decay);
* brute-force Liouvillian superoperator evolution by matrix exponential /
  eigendecomposition for small N, built term by term from the equation of
  motion.

The production code must agree with these to tight tolerances; the oracles are
deliberately slow and simple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.linalg import expm

from .coupling import CouplingMatrices, CouplingParams
from .master import build_liouvillian

__all__ = [
    "OracleReport",
    "high_precision_coefficients",
    "two_level_analytic",
    "brute_force_liouvillian",
    "evolve_superoperator",
    "compare",
]

_DPS = 40


@dataclass(frozen=True)
class OracleReport:
    oracle: str
    inputs: dict
    reference: float
    value: float
    abs_error: float
    rel_error: float
    tolerance: float
    passed: bool


def compare(oracle: str, inputs: dict, reference: float, value: float, rel_tol: float) -> OracleReport:
    abs_err = abs(value - reference)
    rel_err = abs_err / max(abs(reference), 1e-300)
    return OracleReport(
        oracle=oracle,
        inputs=inputs,
        reference=reference,
        value=value,
        abs_error=abs_err,
        rel_error=rel_err,
        tolerance=rel_tol,
        passed=rel_err <= rel_tol,
    )


def high_precision_coefficients(xi: float, eta: float, params: CouplingParams) -> dict[str, float]:
    """All six coupling coefficients evaluated with 40-digit arithmetic.

    The regularized expressions are evaluated directly from their printed
    forms; extended precision absorbs the subtractive cancellations that the
    double-precision implementation must dodge analytically.
    """
    with mp.workdps(_DPS):
        x = mp.mpf(xi)
        e = mp.mpf(eta)
        g = mp.mpf(params.gamma)
        Lperp = mp.mpf(params.lambda_perp_over_k0)
        Lpar = mp.mpf(params.lambda_par_over_k0)
        gt = g * Lperp**2 / (Lperp**2 + 1)

        alpha = mp.cos(x) / x**2 - mp.sin(x) / x**3 + mp.sin(x) / x
        beta = 3 * mp.sin(x) / x**3 - 3 * mp.cos(x) / x**2 - mp.sin(x) / x

        gamma_unreg = mp.mpf(3) / 4 * g * (alpha + e * beta)
        gamma_reg = mp.mpf(3) / 4 * gt * (alpha + e * beta)

        delta_par_unreg = 3 * g * (1 - 3 * e) / (4 * x**3)
        bracket = (e - 1) * mp.cos(x) / x + (1 - 3 * e) * (mp.sin(x) / x**2 + mp.cos(x) / x**3)
        delta_perp_unreg = mp.mpf(3) / 4 * g * bracket - delta_par_unreg

        xl = x * Lperp
        reg_bracket = (
            mp.e ** (-xl) / x**3 * ((1 - 3 * e) * (1 + xl) / Lperp**2 + (1 - e) * x**2)
            + (e - 1) * mp.cos(x) / x
            + (1 - 3 * e) * (mp.sin(x) / x**2 + mp.cos(x) / x**3 - (1 + Lperp**2) / (Lperp**2 * x**3))
        )
        delta_perp_reg = mp.mpf(3) / 4 * gt * reg_bracket

        u = x * Lpar / mp.sqrt(2)
        a = 3 * e - 1
        par_bracket = -2 * a + mp.e ** (-u) * (
            a * (2 + 2 * u) * mp.cos(u) + (2 * a * u + 4 * e * u**2) * mp.sin(u)
        )
        delta_par_reg = 3 * g / (8 * x**3) * par_bracket

        return {
            "gamma_unreg": float(gamma_unreg),
            "delta_perp_unreg": float(delta_perp_unreg),
            "delta_par_unreg": float(delta_par_unreg),
            "gamma_reg": float(gamma_reg),
            "delta_perp_reg": float(delta_perp_reg),
            "delta_par_reg": float(delta_par_reg),
        }


def two_level_analytic(gamma_tilde: float, t: float) -> float:
    """Excited-state population of an isolated atom: exp(-gamma_tilde * t)."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    return math.exp(-gamma_tilde * t)


def brute_force_liouvillian(matrices: CouplingMatrices, hamiltonian: np.ndarray | None = None) -> np.ndarray:
    """Dense 4^N x 4^N superoperator for small systems (refuses N > 4)."""
    if matrices.n_atoms > 4:
        raise ValueError("brute-force superoperator is limited to N <= 4")
    return build_liouvillian(matrices, hamiltonian=hamiltonian)


def evolve_superoperator(
    liouv: np.ndarray,
    rho0: np.ndarray,
    times: np.ndarray,
    method: str = "expm",
) -> np.ndarray:
    """Propagate vec(rho0) with the matrix exponential of the superoperator.

    method "expm" multiplies step exponentials (robust for defective spectra);
    "eig" diagonalizes once (fast, requires a well-conditioned eigenbasis).
    """
    rho0 = np.asarray(rho0, dtype=complex)
    dim = rho0.shape[0]
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times), dim, dim), dtype=complex)
    if method == "eig":
        w, v = np.linalg.eig(liouv)
        if np.linalg.cond(v) > 1e8:
            raise ValueError("superoperator eigenbasis ill-conditioned; use method='expm'")
        c0 = np.linalg.solve(v, rho0.ravel())
        for i, t in enumerate(times):
            out[i] = (v @ (c0 * np.exp(w * t))).reshape(dim, dim)
        return out
    if method != "expm":
        raise ValueError("method must be 'expm' or 'eig'")
    order = np.argsort(times)
    vec = rho0.ravel()
    prev_t = 0.0
    for idx in order:
        t = times[idx]
        if t < 0.0:
            raise ValueError("times must be non-negative")
        if t != prev_t:
            vec = expm(liouv * (t - prev_t)) @ vec
            prev_t = t
        out[idx] = vec.reshape(dim, dim)
    return out
