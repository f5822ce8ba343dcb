"""Dense complex linear algebra primitives shared by the whole package.

Everything here operates on plain numpy arrays (complex128, row-major).
Dimensions are run-time quantities so qubits and truncated bosonic modes
are handled uniformly.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = [
    "kron",
    "matexp",
    "partial_trace",
    "herm_eig",
    "mat_power",
    "dag",
    "is_hermitian",
    "embed_op",
    "sigma_x",
    "sigma_y",
    "sigma_z",
    "sigma_p",
    "sigma_m",
    "destroy",
    "projector",
]

# Pauli matrices in the convention sigma_z |0> = +|0>, sigma_z |1> = -|1>.
sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
sigma_y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
sigma_z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
# sigma_p raises |1> -> |0>, sigma_m lowers |0> -> |1>.
sigma_p = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
sigma_m = sigma_p.conj().T


def dag(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def destroy(n: int) -> np.ndarray:
    """Bosonic annihilation operator truncated to an n-level Fock space."""
    if n < 1:
        raise ValueError("Fock truncation must have at least one level")
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)


def projector(i: int, dim: int) -> np.ndarray:
    """|i><i| on a dim-dimensional space."""
    p = np.zeros((dim, dim), dtype=complex)
    p[i, i] = 1.0
    return p


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(_as_matrix(a), _as_matrix(b))


def is_hermitian(a, tol: float = 1e-10) -> bool:
    m = np.asarray(a)
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T)) <= tol


def matexp(a, tol: float = 1e-13) -> np.ndarray:
    """Matrix exponential of a square complex matrix.

    Delegates to scipy's scaling-and-squaring Pade implementation, which
    meets the target relative accuracy for the small dense operators used
    here.  `tol` is kept in the signature as the documented accuracy
    contract; it is not a tunable knob of the underlying algorithm.
    """
    m = _as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matexp requires a square matrix")
    del tol
    return scipy.linalg.expm(m)


def partial_trace(m, dims, keep) -> np.ndarray:
    """Trace out every tensor factor not listed in `keep`.

    `dims` lists the factor dimensions of the tensor-product space, and
    `keep` is an iterable of factor indices to retain (order preserved as
    in `dims`).  The total trace is preserved.
    """
    mat = _as_matrix(m)
    dims = list(int(d) for d in dims)
    total = int(np.prod(dims))
    if mat.shape != (total, total):
        raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one factor")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise ValueError("keep indices out of range")

    n = len(dims)
    t = mat.reshape(dims + dims)
    # Contract row/column indices of every traced factor pairwise.
    for f in reversed([i for i in range(n) if i not in keep]):
        t = np.trace(t, axis1=f, axis2=f + t.ndim // 2)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d_keep, d_keep)


def herm_eig(h, tol: float = 1e-10):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as orthonormal columns)
    with h = V diag(w) V^dagger.
    """
    m = _as_matrix(h)
    if m.shape[0] != m.shape[1]:
        raise ValueError("herm_eig requires a square matrix")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise ValueError("herm_eig requires a Hermitian matrix")
    w, v = np.linalg.eigh(m)
    return w, v


def mat_power(m, n: int) -> np.ndarray:
    """n-th matrix power via binary exponentiation, n >= 0."""
    mat = _as_matrix(m)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError("mat_power requires a square matrix")
    if n < 0 or int(n) != n:
        raise ValueError("exponent must be a nonnegative integer")
    return np.linalg.matrix_power(mat, int(n))


def embed_op(op, dims, sites) -> np.ndarray:
    """Embed an operator acting on the factors listed in `sites` into the
    full tensor-product space described by `dims`.

    `op` must act on the space formed by the `sites` factors in the given
    order; identity is applied everywhere else.
    """
    dims = [int(d) for d in dims]
    sites = [int(s) for s in sites]
    op = _as_matrix(op)
    d_sites = int(np.prod([dims[s] for s in sites]))
    if op.shape != (d_sites, d_sites):
        raise ValueError(
            f"operator shape {op.shape} does not match site dims "
            f"{[dims[s] for s in sites]}"
        )
    rest = [i for i in range(len(dims)) if i not in sites]
    d_rest = int(np.prod([dims[i] for i in rest])) if rest else 1
    full = np.kron(op, np.eye(d_rest, dtype=complex))
    # full currently lives on the factor ordering sites + rest; permute
    # rows and columns back to the canonical ordering of dims.
    order = sites + rest
    perm = np.argsort(order)
    shaped = full.reshape([dims[i] for i in order] * 2)
    n = len(dims)
    shaped = shaped.transpose(list(perm) + [p + n for p in perm])
    total = int(np.prod(dims))
    return np.ascontiguousarray(shaped.reshape(total, total))
