import numpy as np
import pytest

from adrecover.channel import kraus_ops
from adrecover.errors import DimensionMismatch, NoConvergence, NotHermitian, NotPSD
from adrecover.linalg import dagger, hermitian_eig, kron, partial_trace, psd_sqrt

from conftest import random_state


def kron_loop(a, b):
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def random_hermitian(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return g + g.conj().T


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_full_damping_ground_projector():
    a0, _ = kraus_ops(1.0)
    assert np.allclose(kron(a0, a0), np.diag([1, 0, 0, 0]), atol=0)


def test_kron_matches_index_loop(rng):
    for shape_a, shape_b in [((2, 2), (2, 2)), ((2, 3), (3, 1)), ((4, 4), (2, 2))]:
        a = rng.normal(size=shape_a) + 1j * rng.normal(size=shape_a)
        b = rng.normal(size=shape_b) + 1j * rng.normal(size=shape_b)
        assert np.allclose(kron(a, b), kron_loop(a, b), atol=1e-15)
        assert np.allclose(kron(a, b), np.kron(a, b), atol=1e-15)


def test_kron_associative(rng):
    for _ in range(20):
        a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
        assert np.allclose(kron(kron(a, b), c), kron(a, kron(b, c)), atol=1e-14)


def test_kron_broadcasts_over_stacks(rng):
    a = rng.normal(size=(5, 2, 2))
    b = rng.normal(size=(2, 2))
    out = kron(a, b)
    assert out.shape == (5, 4, 4)
    for k in range(5):
        assert np.allclose(out[k], np.kron(a[k], b))


def test_eig_diagonal():
    w, v = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [3, 2, 1])
    assert np.allclose(v @ np.diag(w) @ dagger(v), np.diag([3.0, 1.0, 2.0]))


def test_eig_pauli_x():
    w, _ = hermitian_eig(np.array([[0, 1], [1, 0]]))
    assert np.allclose(w, [1, -1], atol=1e-15)


@pytest.mark.parametrize("n", [2, 4, 16])
def test_eig_reconstruction_and_unitarity(rng, n):
    for _ in range(10):
        h = random_hermitian(rng, n)
        w, v = hermitian_eig(h)
        assert np.all(np.diff(w) <= 0)
        assert np.abs(v @ np.diag(w) @ dagger(v) - h).max() <= 1e-11 * max(1, np.abs(h).max())
        assert np.abs(dagger(v) @ v - np.eye(n)).max() <= 1e-12
        assert abs(w.sum() - np.trace(h).real) <= 1e-12 * max(1, np.abs(h).max())


def test_eig_spectrum_matches_lapack(rng):
    h = random_hermitian(rng, 4)
    assert np.allclose(hermitian_eig(h).eigenvalues, np.linalg.eigvalsh(h)[::-1], atol=1e-12)


def test_eig_degenerate_spectrum(rng):
    u = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    h = u @ np.diag([2.0, 2.0, -1.0, -1.0]) @ dagger(u)
    w, v = hermitian_eig(h)
    assert np.allclose(w, [2, 2, -1, -1], atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ dagger(v), h, atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_eig_sweep_limit():
    h = np.array([[1.0, 0.5], [0.5, 2.0]])
    with pytest.raises(NoConvergence):
        hermitian_eig(h, max_sweeps=0)


def test_eig_batched(rng):
    hs = np.stack([random_hermitian(rng, 4) for _ in range(50)])
    w, v = hermitian_eig(hs)
    assert w.shape == (50, 4) and v.shape == (50, 4, 4)
    for k in range(50):
        assert np.allclose(w[k], np.linalg.eigvalsh(hs[k])[::-1], atol=1e-12)


def test_psd_sqrt_examples():
    assert np.allclose(psd_sqrt(np.eye(4)), np.eye(4), atol=1e-15)
    assert np.allclose(psd_sqrt(np.diag([4.0, 9.0, 0.0, 1.0])), np.diag([2, 3, 0, 1]), atol=1e-15)


def test_psd_sqrt_squares_back(rng):
    for rank in (1, 2, 4):
        m = random_state(rng, 4, rank) * 3.0
        s = psd_sqrt(m)
        assert np.abs(s @ s - m).max() <= 1e-10
        assert np.abs(s - dagger(s)).max() <= 1e-12
        assert np.linalg.eigvalsh(s).min() >= -1e-10


def test_psd_sqrt_of_square_is_identity_map(rng):
    s = psd_sqrt(random_state(rng))
    assert np.abs(psd_sqrt(s @ s) - s).max() <= 1e-10


def test_psd_sqrt_clamps_round_off_and_rejects_negative():
    s = psd_sqrt(np.diag([1.0, -5e-11]))
    assert np.allclose(s, np.diag([1.0, 0.0]))
    with pytest.raises(NotPSD):
        psd_sqrt(np.diag([1.0, -1e-3]))


def test_partial_trace_product_state(rng):
    ra, rb = random_state(rng, 2), random_state(rng, 4) * 2.0
    assert np.allclose(partial_trace(kron(ra, rb), [2, 4], keep=[0]), ra * 2.0, atol=1e-14)
    assert np.allclose(partial_trace(kron(ra, rb), [2, 4], keep=[1]), rb, atol=1e-14)


def test_partial_trace_keep_all(rng):
    rho = random_state(rng, 8)
    assert np.allclose(partial_trace(rho, [2, 2, 2], keep=[0, 1, 2]), rho)


def test_partial_trace_middle_of_three(rng):
    a1, rd, a2 = random_state(rng, 2), random_state(rng, 4), random_state(rng, 2)
    big = kron(kron(a1, rd), a2)
    assert np.abs(partial_trace(big, [2, 2, 2, 2], keep=[1, 2]) - rd).max() <= 1e-14


def test_partial_trace_linear_and_trace_preserving(rng):
    x, y = random_state(rng, 16), random_state(rng, 16)
    f = lambda m: partial_trace(m, [2, 2, 2, 2], keep=[0, 3])  # noqa: E731
    assert np.allclose(f(0.3 * x + 0.7 * y), 0.3 * f(x) + 0.7 * f(y), atol=1e-14)
    assert abs(np.trace(f(x)) - 1) <= 1e-14


def test_partial_trace_dimension_errors(rng):
    with pytest.raises(DimensionMismatch):
        partial_trace(np.eye(4), [2, 3], keep=[0])
    with pytest.raises(DimensionMismatch):
        partial_trace(np.eye(4), [2, 2], keep=[])
