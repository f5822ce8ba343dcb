"""Qubit-qubit composite model: random telegraph noise and pure dephasing.

S couples dispersively (rate G) to an auxiliary qubit S1; S1 exchanges
excitations (rate g) with fresh thermal ancilla qubits.  Two operator
choices are covered:

* RTN: internal Hamiltonian H_S (x) sigma_z1 with maximally mixed
  ancillas.  Tracing S1 gives a classical bistable fluctuator with
  correlation time t_c = 2/(g^2 tau).
* pure dephasing: internal Hamiltonian G sigma_z (x) sigma_x1, ancillas
  and S1 prepared in |1>.  The S coherence is multiplied by a real
  dephasing factor f_n per step, with a closed continuous limit f(t).

The one-step map of the pure-dephasing model is also exposed as a 16x16
transfer matrix on the normalized two-qubit Pauli basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
import scipy.integrate

from .engine import AncillaSpec, CompositeModel
from .linalg import kron, mat_power, projector, sigma_m, sigma_p, sigma_x, sigma_y, sigma_z

_PAULIS = (np.eye(2, dtype=complex), sigma_x, sigma_y, sigma_z)


@dataclass(frozen=True)
class DephasingParams:
    big_g: float
    small_g: float
    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    @property
    def gamma(self) -> float:
        return self.small_g**2 * self.tau

    # Shorthands of the one-step trigonometry.
    @property
    def c_g(self):
        return np.cos(2.0 * self.small_g * self.tau)

    @property
    def s_g(self):
        return np.sin(2.0 * self.small_g * self.tau)

    @property
    def c_G(self):
        return np.cos(2.0 * self.big_g * self.tau)

    @property
    def s_G(self):
        return np.sin(2.0 * self.big_g * self.tau)


def thermal_qubit(bias: float) -> np.ndarray:
    """diag((1-bias)/2, (1+bias)/2); bias=+1 is the excited state |1>."""
    if abs(bias) > 1.0:
        raise ValueError("bias must lie in [-1, 1]")
    return np.diag([0.5 * (1.0 - bias), 0.5 * (1.0 + bias)]).astype(complex)


def exchange_coupling(doubled: bool = True) -> np.ndarray:
    """S1-ancilla excitation exchange (S1 factor first).

    With doubled=True returns sigma_x(x)sigma_x + sigma_y(x)sigma_y =
    2(sigma_+ sigma_- + sigma_- sigma_+), the normalization under which
    the one-step trigonometry of this model carries cos(2 g tau)."""
    w = kron(sigma_m, sigma_p) + kron(sigma_p, sigma_m)
    return 2.0 * w if doubled else w


def build_dephasing_model(p: DephasingParams) -> CompositeModel:
    """Collision model realizing pure dephasing of S.

    Internal Hamiltonian G sigma_z (x) sigma_x1; ancillas in |1>."""
    h = p.big_g * kron(sigma_z, sigma_x)
    spec = AncillaSpec(
        dim=2,
        eta=projector(1, 2),
        coupling_op=exchange_coupling(doubled=True),
        coupling_rate=p.small_g,
    )
    return CompositeModel(
        dim_S=2, aux_dims=[2], internal_hamiltonian=h, ancillas=[spec], tau=p.tau
    )


def rtn_bipartite_model(h_s, t_c, tau) -> CompositeModel:
    """Collision model whose continuous limit is RTN with correlation
    time t_c: Hamiltonian H_S (x) sigma_z1, maximally mixed ancillas,
    g chosen so that g^2 tau = 2/t_c."""
    h_s = np.asarray(h_s, dtype=complex)
    g = np.sqrt(2.0 / (t_c * tau))
    spec = AncillaSpec(
        dim=2,
        eta=thermal_qubit(0.0),
        coupling_op=exchange_coupling(doubled=False),
        coupling_rate=g,
    )
    return CompositeModel(
        dim_S=2,
        aux_dims=[2],
        internal_hamiltonian=kron(h_s, sigma_z),
        ancillas=[spec],
        tau=tau,
    )


# ---------------------------------------------------------------------------
# Pauli transfer matrix of the pure-dephasing one-step map
# ---------------------------------------------------------------------------

def pauli_basis_element(k: int, j: int) -> np.ndarray:
    """Normalized two-qubit basis operator (P_k (x) P_j)/2 with
    P in (I, sigma_x, sigma_y, sigma_z); Tr{G_kj G_k'j'} = delta."""
    return 0.5 * kron(_PAULIS[k], _PAULIS[j])


def bloch_vector(rho) -> np.ndarray:
    """16 real components r_kj = Tr{G_kj rho}, flattened as 4k + j."""
    rho = np.asarray(rho, dtype=complex)
    out = np.empty(16)
    for k, j in product(range(4), range(4)):
        out[4 * k + j] = np.trace(pauli_basis_element(k, j) @ rho).real
    return out


def bloch_to_matrix(r) -> np.ndarray:
    rho = np.zeros((4, 4), dtype=complex)
    for k, j in product(range(4), range(4)):
        rho += r[4 * k + j] * pauli_basis_element(k, j)
    return rho


def pauli_transfer_matrix(p: DephasingParams) -> np.ndarray:
    """Closed-form 16x16 one-step transfer matrix of the pure-dephasing
    map on the normalized Pauli basis (row/column index 4k + j).

    Identical to conjugating the basis through one engine collision of
    build_dephasing_model; the closed form avoids the 64-dimensional
    joint space in hot loops."""
    c_g, s_g, c_G, s_G = p.c_g, p.s_g, p.c_G, p.s_G
    f = np.zeros((16, 16))
    f[0, 0] = 1.0
    f[1, 1] = c_g
    f[2, 2] = c_G * c_g
    f[2, 15] = -c_g * s_G
    f[3, 0] = -(s_g**2)
    f[3, 3] = c_G * c_g**2
    f[3, 14] = c_g**2 * s_G
    f[4, 4] = c_G
    f[4, 9] = -s_G
    f[5, 5] = c_G * c_g
    f[5, 8] = -c_g * s_G
    f[6, 6] = c_g
    f[7, 4] = -c_G * s_g**2
    f[7, 7] = c_g**2
    f[7, 9] = s_G * s_g**2
    f[8, 5] = s_G
    f[8, 8] = c_G
    f[9, 4] = c_g * s_G
    f[9, 9] = c_G * c_g
    f[10, 10] = c_g
    f[11, 5] = -s_G * s_g**2
    f[11, 8] = -c_G * s_g**2
    f[11, 11] = c_g**2
    f[12, 12] = 1.0
    f[13, 13] = c_g
    f[14, 3] = -c_g * s_G
    f[14, 14] = c_G * c_g
    f[15, 2] = c_g**2 * s_G
    f[15, 12] = -(s_g**2)
    f[15, 15] = c_G * c_g**2
    return f


def coherence_block(p: DephasingParams) -> np.ndarray:
    """Closed 2x2 sub-block B of the transfer matrix on the coherence
    pair {sigma_x (x) I, sigma_y (x) sigma_x}; f_n = (B^n)_11."""
    return np.array(
        [[p.c_G, -p.s_G], [p.c_g * p.s_G, p.c_g * p.c_G]], dtype=float
    )


# ---------------------------------------------------------------------------
# Dephasing factor: discrete, closed form, continuum
# ---------------------------------------------------------------------------

def dephasing_factor_discrete(p: DephasingParams, n: int) -> float:
    """f_n via the n-th power of the closed 2x2 block."""
    if n < 0:
        raise ValueError("step count must be nonnegative")
    return float(mat_power(coherence_block(p), int(n))[0, 0].real)


def dephasing_factor_closed(p: DephasingParams, n: int) -> float:
    """f_n via the two-branch closed form

        f_n = (lam+^n + lam-^n)/2
              + ((1 - c_g) c_G / kap) (lam+^n - lam-^n)/2,
        lam+- = ((c_g + 1) c_G +- kap)/2,
        kap = sqrt((c_g - 1)^2 c_G^2 - 4 c_g s_G^2),

    with complex-safe arithmetic when kap^2 < 0 and the confluent
    (kap -> 0) limit handled by the n lam^(n-1) term."""
    if n < 0:
        raise ValueError("step count must be nonnegative")
    c_g, c_G, s_G = p.c_g, p.c_G, p.s_G
    kap = np.sqrt(complex((c_g - 1.0) ** 2 * c_G**2 - 4.0 * c_g * s_G**2))
    if abs(kap) < 1e-12:
        lam = 0.5 * (c_g + 1.0) * c_G
        val = lam**n + 0.5 * (1.0 - c_g) * c_G * n * lam ** max(n - 1, 0)
        return float(np.real(val))
    lam_p = 0.5 * ((c_g + 1.0) * c_G + kap)
    lam_m = 0.5 * ((c_g + 1.0) * c_G - kap)
    val = 0.5 * (lam_p**n + lam_m**n) + ((1.0 - c_g) * c_G / kap) * 0.5 * (
        lam_p**n - lam_m**n
    )
    assert abs(val.imag) < 1e-9
    return float(val.real)


def dephasing_factor_continuous(gamma, big_g, t):
    """Continuum dephasing factor
    f(t) = e^{-gamma t}[cosh(kc t) + gamma sinh(kc t)/kc],
    kc = sqrt(gamma^2 - 4 G^2), complex-safe for gamma < 2G and with
    the kc -> 0 limit f = e^{-gamma t}(1 + gamma t)."""
    t = float(t)
    if t < 0:
        raise ValueError("t must be nonnegative")
    kc = np.sqrt(complex(gamma**2 - 4.0 * big_g**2))
    x = kc * t
    if abs(x) < 1e-8:
        # cosh x -> 1 + x^2/2, sinh(x)/kc -> t (1 + x^2/6)
        val = (1.0 + 0.5 * x**2) + gamma * t * (1.0 + x**2 / 6.0)
    else:
        val = np.cosh(x) + gamma * np.sinh(x) / kc
    val = np.exp(-gamma * t) * val
    assert abs(np.imag(val)) < 1e-10
    return float(np.real(val))


def dephasing_rate(gamma, big_g, t):
    """Instantaneous rate -f'(t)/(2 f(t)) of the continuum factor:
    2 G^2 sinh(kc t) / (kc cosh(kc t) + gamma sinh(kc t)),
    complex-safe, with value 0 at t = 0."""
    t = float(t)
    kc = np.sqrt(complex(gamma**2 - 4.0 * big_g**2))
    x = kc * t
    if abs(x) < 1e-8:
        num = 2.0 * big_g**2 * t * (1.0 + x**2 / 6.0)
        den = (1.0 + 0.5 * x**2) + gamma * t * (1.0 + x**2 / 6.0)
    else:
        num = 2.0 * big_g**2 * np.sinh(x) / kc
        den = np.cosh(x) + gamma * np.sinh(x) / kc
    val = num / den
    assert abs(np.imag(val)) < 1e-10
    return float(np.real(val))


# ---------------------------------------------------------------------------
# Random telegraph noise
# ---------------------------------------------------------------------------

def rtn_propagate(h_s, t_c, rho_plus0, rho_minus0, t_grid):
    """Integrate the coupled fluctuator-branch equations

        rho+' = -i[+H_S, rho+] + (1/t_c)(rho- - rho+)
        rho-' = -i[-H_S, rho-] - (1/t_c)(rho- - rho+)

    and return the branch trajectories sampled on t_grid."""
    h_s = np.asarray(h_s, dtype=complex)
    d = h_s.shape[0]
    rp = np.asarray(rho_plus0, dtype=complex)
    rm = np.asarray(rho_minus0, dtype=complex)
    total = np.trace(rp + rm)
    if abs(total - 1.0) > 1e-9:
        raise ValueError("branch traces must sum to 1")
    t_grid = np.asarray(t_grid, dtype=float)

    def rhs(_t, y):
        a = y[: d * d].reshape(d, d)
        b = y[d * d :].reshape(d, d)
        da = -1j * (h_s @ a - a @ h_s) + (b - a) / t_c
        db = 1j * (h_s @ b - b @ h_s) - (b - a) / t_c
        return np.concatenate([da.reshape(-1), db.reshape(-1)])

    sol = scipy.integrate.solve_ivp(
        rhs,
        (0.0, float(t_grid[-1])),
        np.concatenate([rp.reshape(-1), rm.reshape(-1)]),
        t_eval=t_grid,
        method="DOP853",
        rtol=1e-10,
        atol=1e-12,
    )
    if not sol.success:
        raise RuntimeError(f"RTN integration failed: {sol.message}")
    plus = [sol.y[: d * d, k].reshape(d, d) for k in range(sol.y.shape[1])]
    minus = [sol.y[d * d :, k].reshape(d, d) for k in range(sol.y.shape[1])]
    return plus, minus
