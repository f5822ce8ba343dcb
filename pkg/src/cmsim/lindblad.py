"""Continuous-time limit of a composite collision model.

In the limit tau -> 0 with gamma = g^2 tau fixed, one collision per tau
induces GKSL (Lindblad) dynamics on the S (x) auxiliaries space.  The
jump operators come from partial matrix elements of the coupling
operator between eigenstates of the fresh-ancilla state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate

from .engine import CompositeModel, ModelError
from .linalg import embed_op, herm_eig, is_hermitian

P_ZERO = 1e-14


@dataclass(frozen=True)
class JumpOperatorSet:
    """Jump operators sharing a single rate gamma = g^2 tau.

    The operators act on the subsystem the originating coupling operator
    touched (not yet embedded into the full space).
    """

    ops: tuple
    rate: float


def jump_operators(w, eta, g, tau, basis=None):
    """Extract Lindblad jump operators from one system-ancilla coupling.

    w is the dimensionless Hermitian coupling on subsystem (x) ancilla
    (subsystem factor first), eta the ancilla preparation.  For each
    eigenpair (mu, nu) of eta with p_nu > 0 the operator
    A_{mu nu} = sqrt(p_nu) <mu| w |nu> (matrix element over the ancilla
    factor only) is emitted with rate g^2 tau.

    `basis` optionally overrides the eigenvector columns; it must still
    diagonalize eta (used to probe invariance under degenerate-basis
    rotations).
    """
    w = np.asarray(w, dtype=complex)
    eta = np.asarray(eta, dtype=complex)
    da = eta.shape[0]
    if w.shape[0] % da != 0:
        raise ModelError("coupling operator incompatible with ancilla dimension")
    if not is_hermitian(w, 1e-12):
        raise ModelError("coupling operator must be Hermitian")
    d = w.shape[0] // da

    w4 = w.reshape(d, da, d, da)
    moment = np.einsum("ambn,nm->ab", w4, eta)
    if np.max(np.abs(moment)) > 1e-10:
        raise ModelError(
            "first-moment condition Tr_R{w eta} = 0 violated; jump extraction "
            "is only valid for centered couplings"
        )

    if basis is None:
        p, v = herm_eig(eta)
    else:
        v = np.asarray(basis, dtype=complex)
        diag = v.conj().T @ eta @ v
        if np.max(np.abs(diag - np.diag(np.diag(diag)))) > 1e-12:
            raise ModelError("supplied basis does not diagonalize eta")
        p = np.diag(diag).real

    ops = []
    for nu in range(da):
        if p[nu] < P_ZERO:
            continue
        for mu in range(da):
            a = np.sqrt(p[nu]) * np.einsum(
                "m,ambn,n->ab", v[:, mu].conj(), w4, v[:, nu]
            )
            ops.append(a)
    return JumpOperatorSet(ops=tuple(ops), rate=float(g) ** 2 * float(tau))


@dataclass(frozen=True)
class Liouvillian:
    """GKSL generator L(rho) = -i[H, rho] + sum dissipators.

    `dissipators` holds JumpOperatorSets whose operators are already
    embedded into the full space of `hamiltonian`.
    """

    hamiltonian: np.ndarray
    dissipators: tuple

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        h = self.hamiltonian
        out = -1j * (h @ rho - rho @ h)
        for jset in self.dissipators:
            for a in jset.ops:
                ad = a.conj().T
                ada = ad @ a
                out += jset.rate * (a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada))
        return out

    def __call__(self, rho):
        return self.apply(rho)


def liouvillian(model: CompositeModel) -> Liouvillian:
    """GKSL generator induced by one collision step per tau.

    Cross terms between different ancillas vanish because each coupling
    is centered, so the dissipators simply add.
    """
    dims = model.sys_factor_dims
    dissipators = []
    for i, spec in enumerate(model.ancillas):
        site = (1 + i) if model.aux_dims else 0
        jset = jump_operators(
            spec.coupling_op, spec.eta, spec.coupling_rate, model.tau
        )
        embedded = tuple(embed_op(a, dims, [site]) for a in jset.ops)
        dissipators.append(JumpOperatorSet(ops=embedded, rate=jset.rate))
    return Liouvillian(
        hamiltonian=model.internal_hamiltonian, dissipators=tuple(dissipators)
    )


def validate_state(rho, tol=1e-9):
    """(trace deviation, Hermiticity deviation, min eigenvalue) of rho.

    `tol` is the caller's acceptance threshold, returned alongside for
    convenience via the boolean in position 3.
    """
    rho = np.asarray(rho, dtype=complex)
    trace_dev = abs(np.trace(rho) - 1.0)
    herm_dev = float(np.max(np.abs(rho - rho.conj().T)))
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    ok = trace_dev <= tol and herm_dev <= tol and min_eig >= -tol
    return float(trace_dev), herm_dev, min_eig, ok


def integrate_me(liou: Liouvillian, rho0, t_grid, rtol=1e-10, atol=1e-12):
    """Integrate drho/dt = L(rho) and sample it on t_grid.

    Uses an adaptive high-order explicit Runge-Kutta method; every
    returned state is Hermitized and checked for trace and positivity.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid[0] != 0.0:
        raise ValueError("t_grid must start at 0")
    rho0 = np.asarray(rho0, dtype=complex)
    d = liou.dim
    if rho0.shape != (d, d):
        raise ValueError(f"rho0 must be {d}x{d}")

    def rhs(_t, y):
        return liou.apply(y.reshape(d, d)).reshape(-1)

    sol = scipy.integrate.solve_ivp(
        rhs,
        (0.0, float(t_grid[-1])),
        rho0.reshape(-1),
        t_eval=t_grid,
        method="DOP853",
        rtol=rtol,
        atol=atol,
    )
    if not sol.success:
        raise RuntimeError(f"master-equation integration failed: {sol.message}")

    traj = []
    for k in range(sol.y.shape[1]):
        rho = sol.y[:, k].reshape(d, d)
        rho = 0.5 * (rho + rho.conj().T)
        trace_dev, _, min_eig, _ = validate_state(rho, tol=1e-8)
        if trace_dev > 1e-8 or min_eig < -1e-8:
            raise RuntimeError(
                f"integrator produced an invalid state at t={sol.t[k]:.6g}: "
                f"trace deviation {trace_dev:.3e}, min eigenvalue {min_eig:.3e}"
            )
        traj.append(rho)
    return traj
