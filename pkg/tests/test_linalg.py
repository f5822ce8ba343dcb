import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmsim.linalg import (
    dag,
    destroy,
    embed_op,
    herm_eig,
    kron,
    mat_power,
    matexp,
    partial_trace,
    projector,
    sigma_x,
    sigma_y,
    sigma_z,
)

RNG = np.random.default_rng(20260826)


def random_matrix(d, rng=RNG):
    return rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))


def random_density(d, rng=RNG):
    a = random_matrix(d, rng)
    rho = a @ a.conj().T
    return rho / np.trace(rho)


class TestKron:
    def test_identity(self):
        assert np.allclose(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_block_structure(self):
        out = kron(sigma_z, sigma_x)
        expect = np.zeros((4, 4), dtype=complex)
        expect[:2, :2] = sigma_x
        expect[2:, 2:] = -sigma_x
        assert np.allclose(out, expect)

    def test_associativity_random(self):
        a, b, c = random_matrix(2), random_matrix(3), random_matrix(2)
        assert np.allclose(kron(kron(a, b), c), kron(a, kron(b, c)))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            kron(np.array([[np.nan, 0], [0, 1]]), np.eye(2))


class TestMatexp:
    def test_zero(self):
        assert np.allclose(matexp(np.zeros((3, 3))), np.eye(3))

    def test_diagonal(self):
        th = 0.37
        out = matexp(-1j * th * sigma_z)
        assert np.allclose(out, np.diag([np.exp(-1j * th), np.exp(1j * th)]))

    def test_sigma_x_rotation_vs_series(self):
        th = 0.81
        m = -1j * th * sigma_x
        series = np.zeros((2, 2), dtype=complex)
        term = np.eye(2, dtype=complex)
        for k in range(40):
            series += term
            term = term @ m / (k + 1)
        out = matexp(m)
        assert np.allclose(out, series, atol=1e-14)
        expect = np.array(
            [[np.cos(th), -1j * np.sin(th)], [-1j * np.sin(th), np.cos(th)]]
        )
        assert np.allclose(out, expect)

    def test_anti_hermitian_gives_unitary(self):
        h = random_matrix(5)
        h = h + h.conj().T
        u = matexp(-1j * h)
        assert np.max(np.abs(u.conj().T @ u - np.eye(5))) <= 1e-12

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            matexp(np.ones((2, 3)))


class TestPartialTrace:
    def test_product_state(self):
        ra, rb = random_density(2), random_density(3)
        assert np.allclose(partial_trace(np.kron(ra, rb), [2, 3], [0]), ra)
        assert np.allclose(partial_trace(np.kron(ra, rb), [2, 3], [1]), rb)

    def test_bell_state(self):
        psi = np.zeros(4, dtype=complex)
        psi[0] = psi[3] = 1 / np.sqrt(2)
        rho = np.outer(psi, psi.conj())
        assert np.allclose(partial_trace(rho, [2, 2], [0]), np.eye(2) / 2)

    def test_trace_preserved_vs_index_contraction(self):
        rho = random_density(4)
        red = partial_trace(rho, [2, 2], [0])
        assert abs(np.trace(red) - 1.0) < 1e-12
        # explicit index contraction oracle
        t = rho.reshape(2, 2, 2, 2)
        oracle = np.einsum("aibi->ab", t)
        assert np.allclose(red, oracle)

    def test_three_factor_middle_keep(self):
        rs = [random_density(2), random_density(2), random_density(2)]
        joint = np.kron(np.kron(rs[0], rs[1]), rs[2])
        assert np.allclose(partial_trace(joint, [2, 2, 2], [1]), rs[1])

    def test_errors(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(4), [2, 3], [0])
        with pytest.raises(ValueError):
            partial_trace(np.eye(4), [2, 2], [])


class TestHermEig:
    def test_sigma_z(self):
        w, _ = herm_eig(sigma_z)
        assert np.allclose(w, [-1.0, 1.0])

    def test_identity_degenerate(self):
        w, v = herm_eig(np.eye(2))
        assert np.allclose(w, [1.0, 1.0])
        assert np.allclose(v.conj().T @ v, np.eye(2))

    def test_sigma_x(self):
        w, v = herm_eig(sigma_x)
        assert np.allclose(w, [-1.0, 1.0])
        assert np.allclose(np.abs(v), np.full((2, 2), 1 / np.sqrt(2)))

    def test_reconstruction(self):
        h = random_matrix(6)
        h = h + h.conj().T
        w, v = herm_eig(h)
        assert np.max(np.abs(v @ np.diag(w) @ v.conj().T - h)) <= 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestMatPower:
    def test_trivial_powers(self):
        m = random_matrix(3)
        assert np.allclose(mat_power(m, 0), np.eye(3))
        assert np.allclose(mat_power(m, 1), m)

    def test_fifth_power_vs_naive(self):
        m = random_matrix(3)
        naive = np.eye(3, dtype=complex)
        for _ in range(5):
            naive = naive @ m
        assert np.allclose(mat_power(m, 5), naive)

    @given(a=st.integers(0, 32), b=st.integers(0, 32))
    @settings(max_examples=25, deadline=None)
    def test_additivity(self, a, b):
        m = random_matrix(2, np.random.default_rng(7))
        m = m / (2 * np.linalg.norm(m, 2))
        lhs = mat_power(m, a + b)
        rhs = mat_power(m, a) @ mat_power(m, b)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            mat_power(np.eye(2), -1)


class TestEmbedOp:
    def test_single_site(self):
        full = embed_op(sigma_x, [2, 3, 2], [0])
        assert np.allclose(full, np.kron(sigma_x, np.eye(6)))
        full = embed_op(sigma_x, [2, 2], [1])
        assert np.allclose(full, np.kron(np.eye(2), sigma_x))

    def test_two_site_adjacent(self):
        op = np.kron(sigma_x, sigma_y)
        assert np.allclose(
            embed_op(op, [2, 2, 2], [1, 2]), np.kron(np.eye(2), op)
        )

    def test_two_site_non_adjacent(self):
        op = np.kron(sigma_x, sigma_z)
        full = embed_op(op, [2, 2, 2], [0, 2])
        oracle = np.kron(np.kron(sigma_x, np.eye(2)), sigma_z)
        assert np.allclose(full, oracle)

    def test_mixed_dims(self):
        a = destroy(3)
        op = np.kron(sigma_x, a)
        full = embed_op(op, [2, 2, 3], [0, 2])
        oracle = np.kron(np.kron(sigma_x, np.eye(2)), a)
        assert np.allclose(full, oracle)


def test_destroy_matrix_elements():
    a = destroy(4)
    assert np.allclose(a @ a.conj().T - a.conj().T @ a, np.diag([1, 1, 1, -3]))
    assert a[0, 1] == 1.0 and abs(a[1, 2] - np.sqrt(2)) < 1e-15


def test_projector_and_dag():
    p = projector(1, 3)
    assert np.trace(p) == 1.0 and p[1, 1] == 1.0
    m = random_matrix(3)
    assert np.allclose(dag(m), m.conj().T)
