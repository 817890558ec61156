"""Monte Carlo wave-function unraveling of the master equation.

Between jumps the unnormalized state evolves under the non-Hermitian generator
H_B = H_dipole - (i/2) sum_{n,m} gamma_nm sigma_n+ sigma_m-.  A uniform draw r
fixes the next jump time through the survival law ||psi_bar(t)||^2 = r; the
emission channel is drawn with probability proportional to ||S_k psi||^2 and
the state is projected and renormalized.  H_B is time independent, so the
propagation uses its eigendecomposition (exact, no step-size limit from the
stiff coherent shifts).

Two channel families:

* source modes: eigenvectors of the decay matrix, one collapse operator per
  significantly decaying mode; exactly reproduces the dissipator.
* directed detection: one operator per far-field solid-angle bin,
  S(theta, phi) = sqrt(gamma D dOmega) sum_n exp(-i k0 Rhat.r_n) sigma_n-,
  with the single-dipole pattern D = (3/8 pi)(1 - (dhat.Rhat)^2); the channel
  sum converges to the full dissipator as the binning is refined.

Ensembles are merge invariant: trajectory k derives its RNG stream from
(seed_base, k) alone, so results do not depend on batching or scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import CouplingMatrices
from .geometry import AtomConfig, chain_axis
from .operators import sigma_minus_ops

__all__ = [
    "JumpEvent",
    "TrajectoryRecord",
    "DirectedChannels",
    "AngularDistribution",
    "BetweenJumpPropagator",
    "source_mode_jumps",
    "directed_jump_ops",
    "trajectory_rng",
    "run_trajectory",
    "ensemble",
    "ensemble_mean_populations",
    "waiting_time_distribution",
    "analytic_waiting_density",
    "angular_distribution",
    "angular_difference",
]


@dataclass(frozen=True)
class JumpEvent:
    time: float
    channel: int


@dataclass(frozen=True)
class TrajectoryRecord:
    seed_base: int
    stream_index: int
    events: tuple[JumpEvent, ...]
    t_max: float
    sampled_populations: np.ndarray | None = None  # (n_times, n_states)

    @property
    def n_jumps(self) -> int:
        return len(self.events)

    @property
    def jump_times(self) -> np.ndarray:
        return np.array([e.time for e in self.events])


@dataclass(frozen=True)
class DirectedChannels:
    """Stacked angular-bin collapse operators plus bin bookkeeping."""

    ops: np.ndarray  # (K, dim, dim)
    theta_bin: np.ndarray  # (K,)
    phi_bin: np.ndarray  # (K,)
    cos_theta_edges: np.ndarray  # (n_theta + 1,), from +1 down to -1
    n_theta: int
    n_phi: int
    d_omega: float  # solid angle per bin (equal-area binning)

    @property
    def n_channels(self) -> int:
        return self.ops.shape[0]


@dataclass(frozen=True)
class AngularDistribution:
    """Photon counts per polar bin, all azimuths and photon orders combined."""

    cos_theta_edges: np.ndarray
    counts: np.ndarray  # (n_theta,)
    n_traj: int
    solid_angle_per_theta_bin: np.ndarray  # (n_theta,)

    @property
    def sigma(self) -> np.ndarray:
        """Counts per trajectory per unit solid angle, resolved over theta."""
        return self.counts / (self.n_traj * self.solid_angle_per_theta_bin)

    @property
    def theta_centers(self) -> np.ndarray:
        c = 0.5 * (self.cos_theta_edges[:-1] + self.cos_theta_edges[1:])
        return np.arccos(np.clip(c, -1.0, 1.0))


def source_mode_jumps(matrices: CouplingMatrices, threshold: float = 1e-12) -> list[np.ndarray]:
    """Collapse operators from the eigenmodes of the decay matrix.

    For each eigenpair (g_k, v_k) of gamma_mat with g_k above threshold times
    the leading rate, the operator is C_k = sqrt(2 g_k) sum_n v_kn sigma_n-.
    Summed as (1/2)(2 C rho C+ - {C+C, rho}) these reproduce the dissipator of
    the master equation exactly.
    """
    g, v = np.linalg.eigh(matrices.gamma_mat)
    scale = max(abs(g).max(), 1e-300)
    if g.min() < -1e-10 * scale:
        raise ValueError(f"decay matrix has negative eigenvalue {g.min():.3e}")
    sm = sigma_minus_ops(matrices.n_atoms)
    ops = []
    for k in range(len(g)):
        if g[k] > threshold * scale:
            c = math.sqrt(2.0 * g[k]) * sum(v[n, k] * sm[n] for n in range(matrices.n_atoms))
            ops.append(c)
    return ops


def directed_jump_ops(
    config: AtomConfig,
    bins: tuple[int, int] = (30, 30),
    gamma: float = 1.0,
    polar_axis: np.ndarray | None = None,
) -> DirectedChannels:
    """Angular-bin collapse operators on an equal-solid-angle (theta, phi) grid.

    The polar axis defaults to the interatomic axis for collinear
    configurations (so the polar angle measures emission relative to the
    chain), falling back to z.
    """
    n_theta, n_phi = bins
    if n_theta < 8 or n_phi < 8:
        raise ValueError("binning must be at least 8 x 8")
    if polar_axis is None:
        axis = chain_axis(config)
        polar_axis = axis if axis is not None else np.array([0.0, 0.0, 1.0])
    polar_axis = np.asarray(polar_axis, dtype=float)
    polar_axis = polar_axis / np.linalg.norm(polar_axis)
    # Orthonormal frame completing the polar axis.
    helper = np.array([1.0, 0.0, 0.0])
    if abs(polar_axis @ helper) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    e1 = np.cross(polar_axis, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(polar_axis, e1)

    cos_edges = np.linspace(1.0, -1.0, n_theta + 1)
    cos_centers = 0.5 * (cos_edges[:-1] + cos_edges[1:])
    phi_centers = (np.arange(n_phi) + 0.5) * 2.0 * math.pi / n_phi
    d_omega = (2.0 / n_theta) * (2.0 * math.pi / n_phi)

    sm = sigma_minus_ops(config.n_atoms)
    dim = sm[0].shape[0]
    K = n_theta * n_phi
    ops = np.zeros((K, dim, dim), dtype=complex)
    theta_bin = np.zeros(K, dtype=int)
    phi_bin = np.zeros(K, dtype=int)
    d_hat = config.dipole_direction
    k = 0
    for it, c in enumerate(cos_centers):
        s = math.sqrt(max(0.0, 1.0 - c * c))
        for ip, phi in enumerate(phi_centers):
            r_hat = c * polar_axis + s * (math.cos(phi) * e1 + math.sin(phi) * e2)
            pattern = 3.0 / (8.0 * math.pi) * (1.0 - float(d_hat @ r_hat) ** 2)
            amp = math.sqrt(gamma * pattern * d_omega)
            op = np.zeros((dim, dim), dtype=complex)
            for n in range(config.n_atoms):
                phase = np.exp(-1j * float(r_hat @ config.positions[n]))
                op += phase * sm[n]
            ops[k] = amp * op
            theta_bin[k] = it
            phi_bin[k] = ip
            k += 1
    return DirectedChannels(
        ops=ops,
        theta_bin=theta_bin,
        phi_bin=phi_bin,
        cos_theta_edges=cos_edges,
        n_theta=n_theta,
        n_phi=n_phi,
        d_omega=d_omega,
    )


class BetweenJumpPropagator:
    """Eigendecomposition-based propagator for the non-Hermitian generator."""

    def __init__(self, h_between_jumps: np.ndarray):
        h = np.asarray(h_between_jumps, dtype=complex)
        self.dim = h.shape[0]
        self.eigvals, self.eigvecs = np.linalg.eig(h)
        self.inv_eigvecs = np.linalg.inv(self.eigvecs)
        # Consistency guard: reject a numerically defective eigenbasis.
        cond = np.linalg.cond(self.eigvecs)
        if not np.isfinite(cond) or cond > 1e10:
            raise ValueError(f"between-jump generator eigenbasis is ill-conditioned (cond = {cond:.2e})")

    def coefficients(self, psi: np.ndarray) -> np.ndarray:
        return self.inv_eigvecs @ psi

    def state(self, coeffs: np.ndarray, dt: float) -> np.ndarray:
        return self.eigvecs @ (coeffs * np.exp(-1j * self.eigvals * dt))

    def norm_sq(self, coeffs: np.ndarray, dt: float) -> float:
        psi = self.state(coeffs, dt)
        return float(np.real(np.vdot(psi, psi)))


def trajectory_rng(seed_base: int, stream_index: int) -> np.random.Generator:
    """Independent deterministic stream for trajectory number stream_index."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed_base, spawn_key=(stream_index,)))


def _channel_array(channels) -> np.ndarray:
    if isinstance(channels, DirectedChannels):
        return channels.ops
    ops = np.asarray(channels, dtype=complex)
    if ops.ndim == 2:
        ops = ops[None, :, :]
    return ops


def run_trajectory(
    psi0: np.ndarray,
    propagator: BetweenJumpPropagator | np.ndarray,
    channels,
    t_max: float,
    seed_base: int = 0,
    stream_index: int = 0,
    sample_times: np.ndarray | None = None,
    sample_states: list[np.ndarray] | None = None,
    time_tolerance: float = 1e-10,
) -> TrajectoryRecord:
    """Single quantum trajectory; deterministic given (seed_base, stream_index).

    Optionally records normalized populations |<s|psi(t)>|^2 / ||psi(t)||^2 at
    the requested sample times for the given states.
    """
    if not isinstance(propagator, BetweenJumpPropagator):
        propagator = BetweenJumpPropagator(propagator)
    psi = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized")
    ops = _channel_array(channels)
    n_channels = ops.shape[0]
    rng = trajectory_rng(seed_base, stream_index)

    do_sampling = sample_times is not None
    if do_sampling:
        sample_times = np.asarray(sample_times, dtype=float)
        states = np.asarray(sample_states, dtype=complex)  # (n_states, dim)
        samples = np.zeros((len(sample_times), states.shape[0]))
        sampled = np.zeros(len(sample_times), dtype=bool)

    events: list[JumpEvent] = []
    t = 0.0
    max_jumps = int(math.log2(propagator.dim))  # initial excitation cannot exceed N
    while True:
        coeffs = propagator.coefficients(psi)
        r = rng.random()
        horizon = t_max - t
        if propagator.norm_sq(coeffs, horizon) > r:
            # Survives to the end of the window: sample remaining times, stop.
            if do_sampling:
                for i in np.nonzero(~sampled)[0]:
                    if t <= sample_times[i] <= t_max:
                        st = propagator.state(coeffs, sample_times[i] - t)
                        nrm = np.real(np.vdot(st, st))
                        samples[i] = np.abs(states @ st.conj()) ** 2 / nrm
                        sampled[i] = True
            break
        # Bisect the survival function for the jump time.
        lo, hi = 0.0, horizon
        while hi - lo > time_tolerance:
            mid = 0.5 * (lo + hi)
            if propagator.norm_sq(coeffs, mid) > r:
                lo = mid
            else:
                hi = mid
        dt_jump = 0.5 * (lo + hi)
        t_jump = t + dt_jump
        if do_sampling:
            in_segment = (~sampled) & (sample_times >= t) & (sample_times < t_jump)
            for i in np.nonzero(in_segment)[0]:
                st = propagator.state(coeffs, sample_times[i] - t)
                nrm = np.real(np.vdot(st, st))
                samples[i] = np.abs(states @ st.conj()) ** 2 / nrm
                sampled[i] = True
        psi_bar = propagator.state(coeffs, dt_jump)
        amps = ops @ psi_bar  # (K, dim)
        weights = np.einsum("ki,ki->k", amps.conj(), amps).real
        total = weights.sum()
        if total <= 0.0:
            raise RuntimeError("norm decayed with no available jump channel")
        k = int(np.searchsorted(np.cumsum(weights) / total, rng.random(), side="right"))
        k = min(k, n_channels - 1)
        psi = amps[k] / np.linalg.norm(amps[k])
        events.append(JumpEvent(time=t_jump, channel=k))
        t = t_jump
        if len(events) > max_jumps:
            raise RuntimeError("more jumps than available excitations; inconsistent channels")
    return TrajectoryRecord(
        seed_base=seed_base,
        stream_index=stream_index,
        events=tuple(events),
        t_max=t_max,
        sampled_populations=samples if do_sampling else None,
    )


def ensemble(
    psi0: np.ndarray,
    h_between_jumps: np.ndarray,
    channels,
    t_max: float,
    n_traj: int,
    seed_base: int,
    parallelism: int = 1,
    sample_times: np.ndarray | None = None,
    sample_states: list[np.ndarray] | None = None,
) -> list[TrajectoryRecord]:
    """n_traj independent trajectories with deterministic per-index streams.

    The result is identical for any parallelism degree (streams depend only on
    (seed_base, index)); the parameter is accepted for interface stability and
    scheduling hints.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be at least 1")
    del parallelism  # deterministic merge makes scheduling irrelevant
    propagator = BetweenJumpPropagator(h_between_jumps)
    ops = _channel_array(channels)
    return [
        run_trajectory(
            psi0,
            propagator,
            ops if not isinstance(channels, DirectedChannels) else channels,
            t_max,
            seed_base=seed_base,
            stream_index=k,
            sample_times=sample_times,
            sample_states=sample_states,
        )
        for k in range(n_traj)
    ]


def ensemble_mean_populations(records: list[TrajectoryRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error of sampled populations across an ensemble."""
    data = np.stack([r.sampled_populations for r in records])  # (n_traj, n_times, n_states)
    mean = data.mean(axis=0)
    sem = data.std(axis=0, ddof=1) / math.sqrt(data.shape[0])
    return mean, sem


def waiting_time_distribution(
    records: list[TrajectoryRecord],
    photon_index: int,
    bin_edges: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Delays between photon (photon_index - 1) and photon_index across records.

    Returns (delays, counts, bin_edges); photon_index is 1-based and the delay
    of the first photon is measured from t = 0.  Records with fewer jumps are
    skipped; an empty result raises.
    """
    if photon_index < 1:
        raise ValueError("photon_index is 1-based")
    delays = []
    for r in records:
        if r.n_jumps >= photon_index:
            times = r.jump_times
            prev = times[photon_index - 2] if photon_index >= 2 else 0.0
            delays.append(times[photon_index - 1] - prev)
    if not delays:
        raise ValueError(f"no record contains {photon_index} jumps")
    delays = np.asarray(delays)
    if bin_edges is None:
        bin_edges = np.linspace(0.0, delays.max() * 1.0001, 51)
    counts, _ = np.histogram(delays, bins=bin_edges)
    return delays, counts, np.asarray(bin_edges)


def analytic_waiting_density(
    h_between_jumps: np.ndarray,
    psi0: np.ndarray,
    t_grid: np.ndarray,
) -> np.ndarray:
    """w(t) = -d/dt ||exp(-i H_B t) psi0||^2 = <psi_bar| K |psi_bar>.

    K = i(H_B - H_B^dagger) is twice the decay-rate operator; psi0 is the
    normalized state just after the previous emission.
    """
    h = np.asarray(h_between_jumps, dtype=complex)
    prop = BetweenJumpPropagator(h)
    K = 1j * (h - h.conj().T)
    coeffs = prop.coefficients(np.asarray(psi0, dtype=complex))
    out = np.empty(len(t_grid))
    for i, t in enumerate(t_grid):
        psi = prop.state(coeffs, float(t))
        out[i] = float(np.real(np.vdot(psi, K @ psi)))
    return out


def angular_distribution(records: list[TrajectoryRecord], channels: DirectedChannels) -> AngularDistribution:
    """Photon counts per polar bin, azimuth-integrated, divided bookkeeping attached."""
    if not isinstance(channels, DirectedChannels):
        raise ValueError("angular_distribution requires directed-detection channels")
    counts = np.zeros(channels.n_theta)
    for r in records:
        for e in r.events:
            counts[channels.theta_bin[e.channel]] += 1.0
    d_cos = -np.diff(channels.cos_theta_edges)
    solid = d_cos * 2.0 * math.pi
    return AngularDistribution(
        cos_theta_edges=channels.cos_theta_edges,
        counts=counts,
        n_traj=len(records),
        solid_angle_per_theta_bin=solid,
    )


def angular_difference(a: AngularDistribution, b: AngularDistribution) -> np.ndarray:
    """Per-bin difference sigma_a - sigma_b on identical binning."""
    if a.cos_theta_edges.shape != b.cos_theta_edges.shape or np.abs(a.cos_theta_edges - b.cos_theta_edges).max() > 1e-12:
        raise ValueError("angular distributions use different binning")
    return a.sigma - b.sigma
