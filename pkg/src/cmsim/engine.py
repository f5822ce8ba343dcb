"""Exact discrete dynamics of memoryless composite collision models.

A model consists of the open system S, optional auxiliary subsystems
S_1..S_N, and a reservoir of identical (possibly multipartite) ancillas.
One step applies the intra-system unitary exp(-i H_S tau) followed by the
subsystem-ancilla collision unitaries, then traces out the used ancillas.
Fresh ancilla states are tensored in at every step, which realizes the
memoryless assumption exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import dag, embed_op, is_hermitian, matexp, partial_trace

MOMENT_TOL = 1e-10


class ModelError(ValueError):
    """Raised for models violating the structural preconditions."""


def _check_density_matrix(rho, dim, what="state"):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (dim, dim):
        raise ModelError(f"{what} must be {dim}x{dim}, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise ModelError(f"{what} is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-9 or abs(np.trace(rho).imag) > 1e-9:
        raise ModelError(f"{what} trace deviates from 1")
    if np.min(np.linalg.eigvalsh(rho)) < -1e-9:
        raise ModelError(f"{what} has a negative eigenvalue")
    return rho


@dataclass(frozen=True)
class AncillaSpec:
    """One reservoir (sub-)ancilla species.

    coupling_op is the dimensionless Hermitian operator w on the
    S_i (x) R_i space (auxiliary factor first), coupling_rate the
    frequency g_i multiplying it.
    """

    dim: int
    eta: np.ndarray
    coupling_op: np.ndarray
    coupling_rate: float

    def __post_init__(self):
        object.__setattr__(self, "eta", _check_density_matrix(self.eta, self.dim, "eta"))
        w = np.asarray(self.coupling_op, dtype=complex)
        if w.shape[0] != w.shape[1] or w.shape[0] % self.dim != 0:
            raise ModelError("coupling_op must be square on the S_i x R_i space")
        if not is_hermitian(w, 1e-12):
            raise ModelError("coupling_op must be Hermitian")
        object.__setattr__(self, "coupling_op", w)

    @property
    def sys_dim(self) -> int:
        """Dimension of the auxiliary subsystem the ancilla couples to."""
        return self.coupling_op.shape[0] // self.dim

    def moment_residual(self) -> float:
        """Max-entry norm of Tr_R{w eta}; must vanish for a valid model."""
        d = self.sys_dim
        w4 = self.coupling_op.reshape(d, self.dim, d, self.dim)
        m = np.einsum("ambn,nm->ab", w4, self.eta)
        return float(np.max(np.abs(m)))


@dataclass(frozen=True)
class CompositeModel:
    """Complete description of a composite collision model.

    dim_S: dimension of the open system S (never touched by ancillas).
    aux_dims: dimensions of the auxiliary subsystems S_1..S_N.  May be
        empty, in which case the single ancilla couples directly to S.
    internal_hamiltonian: H_S on the S (x) S_1 ... (x) S_N space.
    ancillas: one AncillaSpec per auxiliary subsystem (or exactly one
        when aux_dims is empty).
    tau: collision time.
    """

    dim_S: int
    aux_dims: tuple
    internal_hamiltonian: np.ndarray
    ancillas: tuple
    tau: float

    def __init__(self, dim_S, aux_dims, internal_hamiltonian, ancillas, tau):
        object.__setattr__(self, "dim_S", int(dim_S))
        object.__setattr__(self, "aux_dims", tuple(int(d) for d in aux_dims))
        object.__setattr__(self, "ancillas", tuple(ancillas))
        object.__setattr__(self, "tau", float(tau))
        h = np.asarray(internal_hamiltonian, dtype=complex)
        d_sys = self.sys_dim
        if h.shape != (d_sys, d_sys):
            raise ModelError(f"internal_hamiltonian must be {d_sys}x{d_sys}")
        if not is_hermitian(h, 1e-10):
            raise ModelError("internal_hamiltonian must be Hermitian")
        object.__setattr__(self, "internal_hamiltonian", h)

        n_targets = max(len(self.aux_dims), 1)
        if len(self.ancillas) != n_targets:
            raise ModelError(
                f"expected {n_targets} ancilla specs, got {len(self.ancillas)}"
            )
        target_dims = list(self.aux_dims) if self.aux_dims else [self.dim_S]
        for spec, d in zip(self.ancillas, target_dims):
            if spec.sys_dim != d:
                raise ModelError(
                    f"coupling_op acts on a {spec.sys_dim}-dim subsystem, "
                    f"expected {d}"
                )
        bad = [r for r in self.moment_residuals() if r > MOMENT_TOL]
        if bad:
            raise ModelError(
                "ancilla first-moment condition Tr_R{w eta} = 0 violated "
                f"(residuals {self.moment_residuals()}); renormalize the "
                "coupling operator before building the model"
            )

    @property
    def sys_dim(self) -> int:
        """Dimension of S (x) all auxiliaries."""
        return self.dim_S * int(np.prod(self.aux_dims)) if self.aux_dims else self.dim_S

    @property
    def sys_factor_dims(self) -> list:
        return [self.dim_S] + list(self.aux_dims)

    def moment_residuals(self) -> list:
        return [a.moment_residual() for a in self.ancillas]


def moment_condition_check(model: CompositeModel) -> list:
    """Per-ancilla residuals of the first-moment condition."""
    return model.moment_residuals()


def step_unitary(model: CompositeModel) -> np.ndarray:
    """Unitary of one full step on S (x) auxiliaries (x) fresh ancillas.

    Equal to (prod_i exp(-i g_i W_i tau)) exp(-i H_S tau), with W_i the
    coupling of auxiliary i to its own sub-ancilla.  The W_i act on
    disjoint factors and mutually commute.
    """
    sys_dims = model.sys_factor_dims
    anc_dims = [a.dim for a in model.ancillas]
    dims = sys_dims + anc_dims
    d_total = int(np.prod(dims))

    h_full = embed_op(model.internal_hamiltonian, dims, list(range(len(sys_dims))))
    u = matexp(-1j * h_full * model.tau)
    for i, spec in enumerate(model.ancillas):
        sys_site = (1 + i) if model.aux_dims else 0
        anc_site = len(sys_dims) + i
        w_full = embed_op(spec.coupling_op, dims, [sys_site, anc_site])
        u = matexp(-1j * spec.coupling_rate * w_full * model.tau) @ u
    assert u.shape == (d_total, d_total)
    return u


def collide(model: CompositeModel, rho: np.ndarray, u: np.ndarray | None = None) -> np.ndarray:
    """One full collision step: attach fresh ancillas, evolve, trace out.

    `u` may carry a precomputed step_unitary(model) to avoid recomputing
    it inside iteration loops.
    """
    rho = np.asarray(rho, dtype=complex)
    d_sys = model.sys_dim
    if rho.shape != (d_sys, d_sys):
        raise ModelError(f"state must be {d_sys}x{d_sys}, got {rho.shape}")
    if u is None:
        u = step_unitary(model)

    eta = model.ancillas[0].eta
    for spec in model.ancillas[1:]:
        eta = np.kron(eta, spec.eta)
    joint = np.kron(rho, eta)
    joint = u @ joint @ dag(u)

    dims = model.sys_factor_dims + [a.dim for a in model.ancillas]
    keep = list(range(len(model.sys_factor_dims)))
    out = partial_trace(joint, dims, keep)
    out = 0.5 * (out + out.conj().T)
    tr = np.trace(out).real
    if abs(tr - np.trace(rho).real) > 1e-10:
        raise ModelError("collision step failed to preserve the trace")
    return out


def evolve(
    model: CompositeModel,
    rho0: np.ndarray,
    n: int,
    leakage_sites: list | None = None,
    leakage_tol: float = 1e-8,
) -> list:
    """Trajectory [rho0, collide(rho0), ..., collide^n(rho0)].

    `leakage_sites` may list auxiliary factor indices (into
    sys_factor_dims) holding truncated bosonic modes; the population of
    the top Fock level of each is monitored every step and an error is
    raised if it exceeds `leakage_tol`.
    """
    if n < 0:
        raise ModelError("step count must be nonnegative")
    rho = np.asarray(rho0, dtype=complex)
    u = step_unitary(model)
    traj = [rho]
    dims = model.sys_factor_dims
    for _ in range(n):
        rho = collide(model, rho, u=u)
        if leakage_sites:
            for site in leakage_sites:
                leak = top_level_population(rho, dims, site)
                if leak > leakage_tol:
                    raise ModelError(
                        f"Fock truncation leakage {leak:.3e} on factor {site} "
                        f"exceeds {leakage_tol:.1e}; raise n_max"
                    )
        traj.append(rho)
    return traj


def top_level_population(rho, dims, site) -> float:
    """Population of the highest level of one tensor factor."""
    reduced = partial_trace(rho, dims, [site])
    return float(reduced[-1, -1].real)
