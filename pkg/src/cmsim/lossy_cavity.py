"""Qubit decaying through a leaky bosonic mode (damped Jaynes-Cummings).

The composite model is: qubit S exchange-coupled (rate G, detuning
delta) to a bosonic auxiliary mode, which in turn exchange-couples
(rate g) to a fresh vacuum bosonic ancilla each collision.  Everything
conserves excitation number, so with one initial excitation the
dynamics closes on three amplitudes and is exactly solvable both at
finite tau and in the continuous limit gamma = g^2 tau.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .engine import AncillaSpec, CompositeModel
from .linalg import destroy, kron, matexp, projector, sigma_m, sigma_p


@dataclass(frozen=True)
class LossyCavityParams:
    delta: float
    big_g: float
    small_g: float
    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.big_g < 0 or self.small_g < 0:
            raise ValueError("coupling rates must be nonnegative")

    @property
    def omega(self) -> float:
        """Half the dressed splitting of the S-S1 doublet."""
        return 0.5 * np.sqrt(self.delta**2 + 4.0 * self.big_g**2)

    @property
    def gamma(self) -> float:
        return self.small_g**2 * self.tau


def transfer_matrix(p: LossyCavityParams) -> np.ndarray:
    """2x2 one-step map M on the (eps, beta) amplitude pair.

    M = e^{-i delta tau / 2} [[z, -i (G/Omega) sin(Omega tau)],
                              [-i (G/Omega) sin(Omega tau) cos(g tau),
                               z* cos(g tau)]]
    with z = cos(Omega tau) + i (delta / 2 Omega) sin(Omega tau); the
    Omega -> 0 limit sin(Omega tau)/Omega -> tau is taken smoothly.
    """
    om = p.omega
    # s = sin(Omega tau)/Omega, finite at Omega = 0.
    s = p.tau * np.sinc(om * p.tau / np.pi)
    z = np.cos(om * p.tau) + 0.5j * p.delta * s
    cg = np.cos(p.small_g * p.tau)
    phase = np.exp(-0.5j * p.delta * p.tau)
    return phase * np.array(
        [
            [z, -1j * p.big_g * s],
            [-1j * p.big_g * s * cg, np.conj(z) * cg],
        ],
        dtype=complex,
    )


def single_excitation_unitary(p: LossyCavityParams) -> np.ndarray:
    """One-step unitary on {|S excited>, |S1 excited>, |ancilla excited>}.

    Product of the ancilla-exchange rotation and the internal S-S1
    evolution; its upper-left 2x2 block is transfer_matrix and its last
    row yields the amplitude deposited on the fresh ancilla.
    """
    h3 = np.array(
        [[0.0, p.big_g, 0.0], [p.big_g, p.delta, 0.0], [0.0, 0.0, 0.0]],
        dtype=complex,
    )
    w3 = np.array(
        [[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]], dtype=complex
    )
    u_sys = matexp(-1j * h3 * p.tau)
    u_anc = matexp(-1j * p.small_g * w3 * p.tau)
    return u_anc @ u_sys


def amplitude_trajectory(p: LossyCavityParams, n, eps0=1.0, beta0=0.0):
    """[(eps_k, beta_k)] for k = 0..n via repeated application of M."""
    if abs(eps0) ** 2 + abs(beta0) ** 2 > 1.0 + 1e-12:
        raise ValueError("initial amplitudes exceed unit norm")
    m = transfer_matrix(p)
    vec = np.array([eps0, beta0], dtype=complex)
    out = [(vec[0], vec[1])]
    for _ in range(int(n)):
        vec = m @ vec
        out.append((vec[0], vec[1]))
    return out


def amplitude_trajectory_with_leakage(p: LossyCavityParams, n, eps0=1.0, beta0=0.0):
    """Like amplitude_trajectory but also accumulates per-step ancilla
    amplitudes, so total norm can be audited exactly."""
    u = single_excitation_unitary(p)
    vec = np.array([eps0, beta0, 0.0], dtype=complex)
    traj = [(vec[0], vec[1])]
    leaked = []
    for _ in range(int(n)):
        vec = u @ np.array([vec[0], vec[1], 0.0], dtype=complex)
        leaked.append(vec[2])
        traj.append((vec[0], vec[1]))
    return traj, leaked


def analytic_excited_amplitude(delta, big_g, gamma, t):
    """Closed-form continuous-time excited amplitude eps(t).

    eps(t) = e^{-i delta t/2} e^{-gamma t/4}
             [cos(d t/2) + i (w1/d) sin(d t/2)],
    w1 = delta - i gamma/2, d = sqrt(4 G^2 + w1^2) (complex branch),
    with the d -> 0 limit (w1/d) sin(d t/2) -> w1 t/2.
    """
    t = np.asarray(t, dtype=float)
    w1 = delta - 0.5j * gamma
    d = np.sqrt(complex(4.0 * big_g**2 + w1**2))
    x = 0.5 * d * t
    if abs(d) < 1e-12:
        bracket = np.cos(x) + 1j * w1 * (0.5 * t)
    else:
        bracket = np.cos(x) + 1j * (w1 / d) * np.sin(x)
    return np.exp(-0.5j * delta * t) * np.exp(-0.25 * gamma * t) * bracket


def amplitude_ode_solve(delta, big_g, gamma, t_grid):
    """Integrate the coupled amplitude pair

        eps' = -i G beta
        beta' = -i (delta - i gamma/2) beta - i G eps

    from (eps, beta)(0) = (1, 0) and sample on t_grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    a = np.array(
        [[0.0, -1j * big_g], [-1j * big_g, -1j * (delta - 0.5j * gamma)]],
        dtype=complex,
    )

    def rhs(_t, y):
        return a @ y

    sol = scipy.integrate.solve_ivp(
        rhs,
        (0.0, float(t_grid[-1])),
        np.array([1.0, 0.0], dtype=complex),
        t_eval=t_grid,
        method="DOP853",
        rtol=1e-12,
        atol=1e-12,
    )
    if not sol.success:
        raise RuntimeError(f"amplitude integration failed: {sol.message}")
    return sol.y[0], sol.y[1]


def build_model(p: LossyCavityParams, n_max=2) -> CompositeModel:
    """Collision-engine representation with bosonic modes truncated to
    n_max levels (exact for single-excitation initial states)."""
    a = destroy(n_max)
    num = a.conj().T @ a
    h = p.delta * kron(np.eye(2, dtype=complex), num) + p.big_g * (
        kron(sigma_m, a.conj().T) + kron(sigma_p, a)
    )
    w = kron(a, a.conj().T) + kron(a.conj().T, a)
    spec = AncillaSpec(
        dim=n_max, eta=projector(0, n_max), coupling_op=w, coupling_rate=p.small_g
    )
    return CompositeModel(
        dim_S=2,
        aux_dims=[n_max],
        internal_hamiltonian=h,
        ancillas=[spec],
        tau=p.tau,
    )


def discrete_vs_continuous_deviation(p: LossyCavityParams, n):
    """max_k | |eps_k|^2 - |eps(k tau)|^2 | over k = 0..n, the measure
    used for the convergence-in-tau sweeps."""
    traj = amplitude_trajectory(p, n)
    pops_d = np.array([abs(e) ** 2 for e, _ in traj])
    ts = p.tau * np.arange(n + 1)
    pops_c = np.abs(analytic_excited_amplitude(p.delta, p.big_g, p.gamma, ts)) ** 2
    return float(np.max(np.abs(pops_d - pops_c)))
