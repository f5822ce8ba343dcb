"""Qubit decaying through two coupled lossy bosonic modes.

Tripartite extension of the lossy-cavity model: S exchange-couples to
two auxiliary modes (rates G1, G2, detunings D1, D2, mutual coupling
c); each mode leaks into its own fresh vacuum ancilla (rates g1, g2).
Excitation number is conserved, so the single-excitation dynamics
closes on three amplitudes.  In the continuous limit gamma_i = g_i^2
tau the reduced S dynamics equals spontaneous emission into a
two-Lorentzian spectral density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .engine import AncillaSpec, CompositeModel
from .linalg import destroy, kron, matexp, projector, sigma_m, sigma_p
from .spectral import LorentzianSum


@dataclass(frozen=True)
class TriParams:
    """Either supply gamma1/gamma2 (continuous form) or small_g1/
    small_g2 plus tau (discrete form); the other pair is derived via
    gamma_i = g_i^2 tau when tau is available."""

    delta1: float
    delta2: float
    big_g1: float
    big_g2: float
    c: float
    gamma1: float | None = None
    gamma2: float | None = None
    small_g1: float | None = None
    small_g2: float | None = None
    tau: float | None = None

    def __post_init__(self):
        if self.big_g1 < 0 or self.big_g2 < 0:
            raise ValueError("coupling rates G_i must be nonnegative")
        discrete = self.small_g1 is not None and self.small_g2 is not None
        if discrete and self.tau is None:
            raise ValueError("discrete form requires tau")
        if not discrete and (self.gamma1 is None or self.gamma2 is None):
            raise ValueError("supply either gamma_i or small_g_i with tau")

    @property
    def rates(self):
        """(gamma1, gamma2), derived from the discrete couplings when
        not given directly."""
        if self.gamma1 is not None and self.gamma2 is not None:
            return float(self.gamma1), float(self.gamma2)
        return (
            float(self.small_g1) ** 2 * self.tau,
            float(self.small_g2) ** 2 * self.tau,
        )


def single_excitation_hamiltonian(p: TriParams) -> np.ndarray:
    """3x3 internal Hamiltonian on {|S>, |S1>, |S2>} amplitudes."""
    return np.array(
        [
            [0.0, p.big_g1, p.big_g2],
            [p.big_g1, p.delta1, p.c],
            [p.big_g2, p.c, p.delta2],
        ],
        dtype=complex,
    )


def transfer_matrix3(p: TriParams) -> np.ndarray:
    """One-step 3x3 map on (eps, beta1, beta2): the internal rotation
    followed by the per-branch ancilla-exchange damping cos(g_i tau)."""
    if p.small_g1 is None or p.small_g2 is None or p.tau is None:
        raise ValueError("transfer_matrix3 requires the discrete form")
    u = matexp(-1j * single_excitation_hamiltonian(p) * p.tau)
    d = np.diag(
        [1.0, np.cos(p.small_g1 * p.tau), np.cos(p.small_g2 * p.tau)]
    ).astype(complex)
    return d @ u


def amplitude_trajectory3(p: TriParams, n: int):
    """[(eps, beta1, beta2)] for k = 0..n from (1, 0, 0)."""
    m = transfer_matrix3(p)
    vec = np.array([1.0, 0.0, 0.0], dtype=complex)
    out = [tuple(vec)]
    for _ in range(int(n)):
        vec = m @ vec
        out.append(tuple(vec))
    return out


def amplitude_ode3(p: TriParams, t_grid):
    """Continuous-limit amplitudes from (1, 0, 0):

        eps'   = -i G1 b1 - i G2 b2
        b1'    = -i (D1 - i gamma1/2) b1 - i G1 eps - i c b2
        b2'    = -i (D2 - i gamma2/2) b2 - i G2 eps - i c b1
    """
    g1, g2 = p.rates
    t_grid = np.asarray(t_grid, dtype=float)
    a = -1j * np.array(
        [
            [0.0, p.big_g1, p.big_g2],
            [p.big_g1, p.delta1 - 0.5j * g1, p.c],
            [p.big_g2, p.c, p.delta2 - 0.5j * g2],
        ],
        dtype=complex,
    )

    def rhs(_t, y):
        return a @ y

    sol = scipy.integrate.solve_ivp(
        rhs,
        (0.0, float(t_grid[-1])),
        np.array([1.0, 0.0, 0.0], dtype=complex),
        t_eval=t_grid,
        method="DOP853",
        rtol=1e-12,
        atol=1e-12,
    )
    if not sol.success:
        raise RuntimeError(f"amplitude integration failed: {sol.message}")
    return sol.y[0], sol.y[1], sol.y[2]


def equivalent_sd(p: TriParams, case: str) -> LorentzianSum:
    """Spectral density seen by S in the continuous limit.

    case 'a' (requires c = 0): two positive-weight Lorentzians of
    half-width gamma_i/2 centered on Delta_i with peak 4 G_i^2 /
    (2 pi gamma_i).

    case 'b' (requires G2 = 0, Delta1 = Delta2): eliminating the two
    damped modes exactly gives the memory kernel

        K(dt) = G1^2 e^{-i Delta dt} [p e^{-l+ dt} + (1-p) e^{-l- dt}],
        l+- = (gamma1 + gamma2 +- chi)/4,
        chi = sqrt((gamma1 - gamma2)^2 - 16 c^2),
        p = (gamma1 - gamma2 + chi)/(2 chi),

    i.e. Lorentzians of half-widths l+- centered on Delta with signed
    weights G1^2 p/(pi l+) and G1^2 (1-p)/(pi l-); the second weight is
    negative whenever c != 0, while the total stays nonnegative."""
    g1, g2 = p.rates
    if case == "a":
        if p.c != 0.0:
            raise ValueError("case 'a' requires c = 0")
        terms = []
        for big_g, gam, delta in (
            (p.big_g1, g1, p.delta1),
            (p.big_g2, g2, p.delta2),
        ):
            if big_g == 0.0:
                continue
            if gam <= 0.0:
                raise ValueError("case 'a' requires positive gamma_i")
            terms.append((2.0 * big_g**2 / (np.pi * gam), delta, 0.5 * gam))
        return LorentzianSum(tuple(terms))
    if case == "b":
        if p.big_g2 != 0.0:
            raise ValueError("case 'b' requires G2 = 0")
        if p.delta1 != p.delta2:
            raise ValueError("case 'b' requires Delta1 = Delta2")
        chi_sq = (g1 - g2) ** 2 - 16.0 * p.c**2
        if g1 - g2 <= 2.0 * abs(p.c) or chi_sq <= 0.0:
            raise ValueError(
                "case 'b' requires gamma1 - gamma2 large enough against c "
                "for both mode-elimination decay branches to be real"
            )
        chi = np.sqrt(chi_sq)
        lam_p = 0.25 * (g1 + g2 + chi)
        lam_m = 0.25 * (g1 + g2 - chi)
        weight_p = (g1 - g2 + chi) / (2.0 * chi)
        terms = (
            (p.big_g1**2 * weight_p / (np.pi * lam_p), p.delta1, lam_p),
            (p.big_g1**2 * (1.0 - weight_p) / (np.pi * lam_m), p.delta1, lam_m),
        )
        return LorentzianSum(terms)
    raise ValueError("case must be 'a' or 'b'")


def build_model(p: TriParams, n_max=2) -> CompositeModel:
    """Collision-engine representation with each bosonic mode truncated
    to n_max levels (exact for single-excitation states)."""
    if p.small_g1 is None or p.small_g2 is None or p.tau is None:
        raise ValueError("build_model requires the discrete form")
    a = destroy(n_max)
    ad = a.conj().T
    num = ad @ a
    i2 = np.eye(2, dtype=complex)
    im = np.eye(n_max, dtype=complex)
    h = (
        p.delta1 * kron(i2, kron(num, im))
        + p.delta2 * kron(i2, kron(im, num))
        + p.big_g1 * (kron(sigma_m, kron(ad, im)) + kron(sigma_p, kron(a, im)))
        + p.big_g2 * (kron(sigma_m, kron(im, ad)) + kron(sigma_p, kron(im, a)))
        + p.c * (kron(i2, kron(a, ad)) + kron(i2, kron(ad, a)))
    )
    w = kron(a, ad) + kron(ad, a)
    eta = projector(0, n_max)
    specs = [
        AncillaSpec(dim=n_max, eta=eta, coupling_op=w, coupling_rate=p.small_g1),
        AncillaSpec(dim=n_max, eta=eta, coupling_op=w, coupling_rate=p.small_g2),
    ]
    return CompositeModel(
        dim_S=2,
        aux_dims=[n_max, n_max],
        internal_hamiltonian=h,
        ancillas=specs,
        tau=p.tau,
    )
