"""Shared helpers: an independent brute-force evolution oracle.

The oracle never calls collide/partial-trace machinery from the package:
it carries the full joint ket of the system, the auxiliaries and every
ancilla used so far as an explicit tensor, applies the one-step unitary
by tensor contraction, and only reduces to a density matrix at the end.
It requires pure ancilla preparations and a pure initial state.
"""

import numpy as np

from cmsim.engine import CompositeModel, step_unitary


def pure_state_vector(eta, tol=1e-12):
    """Extract the ket of a rank-one density matrix."""
    eta = np.asarray(eta, dtype=complex)
    w, v = np.linalg.eigh(eta)
    if w[-2] > tol:
        raise ValueError("ancilla preparation is not pure")
    return v[:, -1]


def brute_force_reduced(model: CompositeModel, psi0, n: int):
    """Reduced state on S (x) auxiliaries after n collisions.

    psi0 is a ket on the S (x) auxiliaries space.  All ancillas ever
    collided with are kept in the joint ket; nothing is traced out until
    the very end.
    """
    sys_dims = list(model.sys_factor_dims)
    anc_dims = [a.dim for a in model.ancillas]
    anc_kets = [pure_state_vector(a.eta) for a in model.ancillas]
    ns = len(sys_dims)
    na = len(anc_dims)

    step_dims = sys_dims + anc_dims
    nt = len(step_dims)
    u = step_unitary(model).reshape(step_dims + step_dims)

    ket = np.asarray(psi0, dtype=complex).reshape(sys_dims)
    for _ in range(int(n)):
        for vec in anc_kets:
            ket = np.tensordot(ket, vec, axes=0)
        # contract U's input legs with (system axes, fresh ancilla axes)
        contract = list(range(ns)) + list(range(ket.ndim - na, ket.ndim))
        ket = np.tensordot(u, ket, axes=(list(range(nt, 2 * nt)), contract))
        # axes now: sys, fresh ancillas, old ancillas -> move fresh last
        ket = np.moveaxis(
            ket, list(range(ns, nt)), list(range(ket.ndim - na, ket.ndim))
        )

    d_sys = int(np.prod(sys_dims))
    flat = ket.reshape(d_sys, -1)
    return flat @ flat.conj().T
