"""Pairwise coupling coefficients for dipole-coupled two-level atoms.

Three families of coefficients are provided, all in units of the single-atom
free-space emission rate gamma (and with lengths expressed through the
dimensionless separation xi = k0 * r):

* non-regularized: gamma_unreg, delta_perp_unreg, delta_par_unreg.  The shift
  sum diverges as xi**-3 at short distance.
* regularized: gamma_reg, delta_perp_reg, delta_par_reg.  Momentum cutoffs
  Lambda_perp (transverse) and Lambda_par (longitudinal) keep every
  coefficient finite down to xi -> 0.
* near-Dicke linearization: expansions_near_dicke, first order in xi, used for
  co-located-atom limits and for large-N timescale scans.

Numerically delicate regions (small xi, small cutoff products) are evaluated
through explicitly cancelled forms with series fallbacks, so that all
coefficients are accurate to ~1e-12 relative across the full parameter range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .geometry import AtomConfig, all_pair_geometries

__all__ = [
    "CouplingParams",
    "CouplingMatrices",
    "NearDickeExpansion",
    "alpha_fn",
    "beta_fn",
    "gamma_unreg",
    "delta_perp_unreg",
    "delta_par_unreg",
    "gamma_reg",
    "delta_perp_reg",
    "delta_par_reg",
    "expansions_near_dicke",
    "lamb_shift_two_level",
    "build_coupling_matrices",
    "e0_over_hbar_gamma",
    "DEFAULT_LAMBDA0_M",
    "DEFAULT_LAMBDA_COMPTON_M",
    "DEFAULT_BOHR_RADIUS_M",
    "MODES",
]

# Hydrogen-like defaults: resonant wavelength (Lyman-alpha), electron Compton
# wavelength (sets the transverse cutoff), Bohr radius (sets the longitudinal
# cutoff through the atomic volume V0 = 4*pi*a0**3/3).
DEFAULT_LAMBDA0_M = 121.6e-9
DEFAULT_LAMBDA_COMPTON_M = 2.426e-12
DEFAULT_BOHR_RADIUS_M = 0.529177e-10

MODES = ("unregularized", "regularized", "dicke_expansion", "none")


def _default_lambda_perp() -> float:
    return DEFAULT_LAMBDA0_M / DEFAULT_LAMBDA_COMPTON_M


def _default_k0_a0() -> float:
    return 2.0 * math.pi * DEFAULT_BOHR_RADIUS_M / DEFAULT_LAMBDA0_M


def _default_lambda_par() -> float:
    return (3.0 / (4.0 * math.pi)) ** (1.0 / 3.0) / _default_k0_a0()


@dataclass(frozen=True)
class CouplingParams:
    """Coupling mode, cutoffs (in units of k0) and rate normalization."""

    mode: str = "regularized"
    lambda_perp_over_k0: float = field(default_factory=_default_lambda_perp)
    lambda_par_over_k0: float = field(default_factory=_default_lambda_par)
    gamma: float = 1.0
    k0_a0: float = field(default_factory=_default_k0_a0)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        for name in ("lambda_perp_over_k0", "lambda_par_over_k0", "gamma", "k0_a0"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def gamma_tilde(self) -> float:
        """Cutoff-renormalized single-atom rate gamma * L^2 / (L^2 + 1)."""
        L = self.lambda_perp_over_k0
        return self.gamma * L * L / (L * L + 1.0)

    def with_mode(self, mode: str) -> "CouplingParams":
        return replace(self, mode=mode)


@dataclass(frozen=True)
class CouplingMatrices:
    """N x N decay matrix and transverse/longitudinal shift matrices."""

    gamma_mat: np.ndarray
    delta_perp: np.ndarray
    delta_par: np.ndarray
    mode: str

    def __post_init__(self):
        for name in ("gamma_mat", "delta_perp", "delta_par"):
            m = np.asarray(getattr(self, name), dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise ValueError(f"{name} must be a square matrix")
            scale = max(np.abs(m).max(), 1.0)
            if np.abs(m - m.T).max() > 1e-12 * scale:
                raise ValueError(f"{name} must be symmetric")
            object.__setattr__(self, name, m)
        if self.gamma_mat.shape != self.delta_perp.shape or self.gamma_mat.shape != self.delta_par.shape:
            raise ValueError("all coupling matrices must share one shape")

    @property
    def n_atoms(self) -> int:
        return self.gamma_mat.shape[0]

    @property
    def delta_total(self) -> np.ndarray:
        return self.delta_perp + self.delta_par


# ---------------------------------------------------------------------------
# Radiation-pattern functions
# ---------------------------------------------------------------------------

_ALPHA_BETA_SWITCH = 1e-3


def alpha_fn(x: float) -> float:
    """cos x/x^2 - sin x/x^3 + sin x/x, stable at small argument."""
    if x <= 0.0:
        raise ValueError("alpha_fn requires x > 0")
    if x < _ALPHA_BETA_SWITCH:
        x2 = x * x
        return 2.0 / 3.0 - 2.0 * x2 / 15.0 + x2 * x2 / 140.0
    return math.cos(x) / x**2 - math.sin(x) / x**3 + math.sin(x) / x


def beta_fn(x: float) -> float:
    """3 sin x/x^3 - 3 cos x/x^2 - sin x/x, stable at small argument."""
    if x <= 0.0:
        raise ValueError("beta_fn requires x > 0")
    if x < _ALPHA_BETA_SWITCH:
        x2 = x * x
        return x2 / 15.0 - x2 * x2 / 210.0 + x2 * x2 * x2 / 7560.0
    return 3.0 * math.sin(x) / x**3 - 3.0 * math.cos(x) / x**2 - math.sin(x) / x


# ---------------------------------------------------------------------------
# Non-regularized coefficients
# ---------------------------------------------------------------------------


def gamma_unreg(xi: float, eta: float, params: CouplingParams) -> float:
    """Collective decay coefficient (3/4) gamma [alpha(xi) + eta beta(xi)]."""
    return 0.75 * params.gamma * (alpha_fn(xi) + eta * beta_fn(xi))


def delta_par_unreg(xi: float, eta: float, params: CouplingParams) -> float:
    """Static point-dipole interaction 3 gamma (1 - 3 eta) / (4 xi^3)."""
    if xi <= 0.0:
        raise ValueError("delta_par_unreg requires xi > 0")
    return 3.0 * params.gamma * (1.0 - 3.0 * eta) / (4.0 * xi**3)


def delta_perp_unreg(xi: float, eta: float, params: CouplingParams) -> float:
    """Transverse shift: retarded curly bracket minus the static shift."""
    if xi <= 0.0:
        raise ValueError("delta_perp_unreg requires xi > 0")
    bracket = (eta - 1.0) * math.cos(xi) / xi + (1.0 - 3.0 * eta) * (
        math.sin(xi) / xi**2 + math.cos(xi) / xi**3
    )
    return 0.75 * params.gamma * bracket - delta_par_unreg(xi, eta, params)


# ---------------------------------------------------------------------------
# Regularized coefficients
# ---------------------------------------------------------------------------


def gamma_reg(xi: float, eta: float, params: CouplingParams) -> float:
    """Regularized decay coefficient: gamma_unreg rescaled by gamma_tilde."""
    return 0.75 * params.gamma_tilde * (alpha_fn(xi) + eta * beta_fn(xi))


def _cancelled_exp_taylor(x: float) -> float:
    """E(x) = exp(-x)(1 + x) - 1 + x^2/2, with the O(1) and O(x^2) parts removed.

    E(x) = sum_{n>=3} (-1)^(n-1) (n-1) x^n / n! = x^3/3 - x^4/8 + x^5/30 - ...
    Direct evaluation loses ~x^-3 digits of the result to cancellation, so a
    series is used below x = 0.2.
    """
    if x > 0.2:
        return math.exp(-x) * (1.0 + x) - 1.0 + 0.5 * x * x
    total = 0.0
    term = x**3 / 6.0  # x^n / n! at n = 3
    for n in range(3, 26):
        total += (-1.0) ** (n - 1) * (n - 1) * term
        term *= x / (n + 1)
        if abs(term) * n < 1e-18 * abs(total) + 1e-300:
            break
    return total


def _trig_remainder(xi: float) -> float:
    """T2(xi) = sin xi/xi^2 + (cos xi - 1)/xi^3 - 1/(2 xi).

    Equals -xi/8 + xi^3/144 - xi^5/5760 + ...; the three leading pieces cancel
    to O(xi), so a series is used below xi = 0.1.
    """
    if xi > 0.1:
        return math.sin(xi) / xi**2 + (math.cos(xi) - 1.0) / xi**3 - 0.5 / xi
    x2 = xi * xi
    return xi * (-1.0 / 8.0 + x2 * (1.0 / 144.0 + x2 * (-1.0 / 5760.0 + x2 * (1.0 / 403200.0 - x2 / 43545600.0))))


def delta_perp_reg(xi: float, eta: float, params: CouplingParams) -> float:
    """Regularized transverse shift; finite as xi -> 0.

    With L = Lambda_perp/k0 and x = xi*L, the exact expression regroups into

        (3/4) gamma_tilde [ (1 - eta) * (e^{-x} - cos xi)/xi
                          + (1 - 3 eta) * ( E(x)/(L^2 xi^3) + T2(xi) ) ]

    where E and T2 are the cancelled helpers above.  Each piece is evaluated
    without subtractive loss, and the exponential underflows harmlessly at
    large x.
    """
    if xi <= 0.0:
        raise ValueError("delta_perp_reg requires xi > 0")
    L = params.lambda_perp_over_k0
    x = xi * L
    # (e^{-x} - cos xi)/xi with both near-1 constants removed:
    # expm1(-x) + 2 sin^2(xi/2)
    p1 = (math.expm1(-x) + 2.0 * math.sin(0.5 * xi) ** 2) / xi
    g = _cancelled_exp_taylor(x) / (L * L * xi**3) + _trig_remainder(xi)
    return 0.75 * params.gamma_tilde * ((1.0 - eta) * p1 + (1.0 - 3.0 * eta) * g)


# Taylor coefficients of the longitudinal bracket B(u, eta) below, stored as
# (power, eta-coefficient, constant) with exact rational values.
_PAR_BRACKET_SERIES = (
    (3, 0.0, 4.0 / 3.0),
    (4, -1.0, -1.0),
    (5, 8.0 / 15.0, 4.0 / 15.0),
    (7, -8.0 / 105.0, -2.0 / 105.0),
    (8, 1.0 / 36.0, 1.0 / 180.0),
    (9, -4.0 / 945.0, -2.0 / 2835.0),
    (11, 4.0 / 31185.0, 1.0 / 62370.0),
    (12, -1.0 / 37800.0, -1.0 / 340200.0),
    (13, 1.0 / 405405.0, 1.0 / 4054050.0),
    (15, -1.0 / 30405375.0, -1.0 / 364864500.0),
    (16, 1.0 / 209563200.0, 1.0 / 2724321600.0),
)


def delta_par_reg(xi: float, eta: float, params: CouplingParams) -> float:
    """Regularized static shift; finite as xi -> 0.

    With u = xi * Lambda_par / (sqrt(2) k0) and a = 3 eta - 1:

        delta_par_reg = (3 gamma / (8 xi^3)) * B(u, eta),
        B = -2 a + e^{-u} [ a (2 + 2u) cos u + (2 a u + 4 eta u^2) sin u ].

    B vanishes as (4/3) u^3, so for u < 0.3 it is evaluated from its Taylor
    series (coefficients linear in eta, through u^16) to avoid cancellation.
    """
    if xi <= 0.0:
        raise ValueError("delta_par_reg requires xi > 0")
    u = xi * params.lambda_par_over_k0 / math.sqrt(2.0)
    a = 3.0 * eta - 1.0
    if u < 0.3:
        bracket = 0.0
        for power, c_eta, c_one in _PAR_BRACKET_SERIES:
            bracket += (c_eta * eta + c_one) * u**power
    else:
        bracket = -2.0 * a + math.exp(-u) * (
            a * (2.0 + 2.0 * u) * math.cos(u) + (2.0 * a * u + 4.0 * eta * u * u) * math.sin(u)
        )
    return 3.0 * params.gamma * bracket / (8.0 * xi**3)


# ---------------------------------------------------------------------------
# Near-Dicke linearization and the Lamb shift
# ---------------------------------------------------------------------------


class NearDickeExpansion(NamedTuple):
    """First-order coefficients at small xi, all in rate units."""

    delta_par_lin: float
    delta_perp_lin: float
    gamma_const: float
    delta0: float
    delta1: float


def e0_over_hbar_gamma(params: CouplingParams) -> float:
    """Hydrogenic ground-state energy in units of hbar*gamma: 3/(8 (k0 a0)^3)."""
    return 3.0 / (8.0 * params.k0_a0**3)


def expansions_near_dicke(xi: float, eta: float, params: CouplingParams) -> NearDickeExpansion:
    """Shift and decay coefficients to first order in xi.

    delta_par_lin  = gamma Lpar^3/(4 sqrt 2) - (3 gamma (1+eta)/32) Lpar^4 xi
    delta_perp_lin = -(gamma/2) Lperp^3/(1+Lperp^2) + (3 gamma (3-eta)/32) Lperp^2 xi
    gamma_const    = gamma_tilde / 2 (independent of xi and eta)
    delta0         = xi-independent part of the total shift
    delta1         = first-order part, so delta_total ~ delta0 + delta1
    """
    if xi < 0.0:
        raise ValueError("expansions_near_dicke requires xi >= 0")
    g = params.gamma
    Lpar = params.lambda_par_over_k0
    Lperp = params.lambda_perp_over_k0
    par0 = g * Lpar**3 / (4.0 * math.sqrt(2.0))
    par1 = -3.0 * g * (1.0 + eta) * Lpar**4 / 32.0
    perp0 = -0.5 * g * Lperp**3 / (1.0 + Lperp * Lperp)
    perp1 = 3.0 * g * (3.0 - eta) * Lperp * Lperp / 32.0
    delta0 = par0 + perp0
    delta1 = (par1 + perp1) * xi
    return NearDickeExpansion(
        delta_par_lin=par0 + par1 * xi,
        delta_perp_lin=perp0 + perp1 * xi,
        gamma_const=0.5 * params.gamma_tilde,
        delta0=delta0,
        delta1=delta1,
    )


def lamb_shift_two_level(params: CouplingParams) -> float:
    """Two-level Lamb shift (gamma_tilde/pi) ln(Lambda_perp/k0).

    Diagnostic only: the shift is absorbed into the atomic frequency and never
    added to the dynamics.
    """
    L = params.lambda_perp_over_k0
    if L <= 1.0:
        raise ValueError("lamb_shift_two_level requires Lambda_perp/k0 > 1")
    return params.gamma_tilde * math.log(L) / math.pi


# ---------------------------------------------------------------------------
# Matrix assembly
# ---------------------------------------------------------------------------


def build_coupling_matrices(config: AtomConfig, params: CouplingParams) -> CouplingMatrices:
    """Assemble the N x N coupling matrices for the selected mode.

    Diagonals: gamma_mat carries the single-atom rate (gamma_tilde/2, or
    gamma/2 in the non-regularized mode); both shift matrices carry zero (the
    single-atom shift is the Lamb shift, absorbed into the atomic frequency).

    Mode "none" keeps the regularized decay matrix but zeroes all off-diagonal
    shifts: decay still happens, the coherent dipole-dipole coupling is off.
    """
    N = config.n_atoms
    xi, eta = all_pair_geometries(config)
    gamma_mat = np.zeros((N, N))
    delta_perp = np.zeros((N, N))
    delta_par = np.zeros((N, N))
    mode = params.mode
    diag_gamma = 0.5 * (params.gamma if mode == "unregularized" else params.gamma_tilde)
    np.fill_diagonal(gamma_mat, diag_gamma)
    for n in range(N):
        for m in range(n + 1, N):
            x, e = xi[n, m], eta[n, m]
            if mode == "unregularized":
                g = gamma_unreg(x, e, params)
                dpe = delta_perp_unreg(x, e, params)
                dpa = delta_par_unreg(x, e, params)
            elif mode == "regularized":
                g = gamma_reg(x, e, params)
                dpe = delta_perp_reg(x, e, params)
                dpa = delta_par_reg(x, e, params)
            elif mode == "dicke_expansion":
                exp = expansions_near_dicke(x, e, params)
                g = exp.gamma_const
                dpe = exp.delta_perp_lin
                dpa = exp.delta_par_lin
            else:  # none
                g = gamma_reg(x, e, params)
                dpe = 0.0
                dpa = 0.0
            gamma_mat[n, m] = gamma_mat[m, n] = g
            delta_perp[n, m] = delta_perp[m, n] = dpe
            delta_par[n, m] = delta_par[m, n] = dpa
    return CouplingMatrices(gamma_mat=gamma_mat, delta_perp=delta_perp, delta_par=delta_par, mode=mode)
